//! The JSON API driven in-process: log on, look at accounts, transfer.
//! Pass `--serve` to listen on 127.0.0.1:8080 instead.
//!
//! ```text
//! cargo run --example http_gateway
//! cargo run --example http_gateway -- --serve
//! ```

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use netbank::admin::seed_fixture;
use netbank::gateway::{router, serve, TOKEN_HEADER};
use netbank::{Bank, Config, SystemClock};

async fn call(app: &Router, method: &str, path: &str, token: Option<&str>, body: Option<Value>) -> Value {
    let mut req = Request::builder().method(method).uri(path).header("content-type", "application/json");
    if let Some(t) = token {
        req = req.header(TOKEN_HEADER, t);
    }
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    println!("{method} {path} -> {status}\n  {value}");
    value
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut bank = Bank::in_memory(Config::default(), Arc::new(SystemClock));
    seed_fixture(&mut bank)?;
    let bank = bank.into_shared();
    if std::env::args().any(|a| a == "--serve") {
        serve(bank, "127.0.0.1:8080".parse()?).await?;
        return Ok(());
    }

    let app = router(bank);
    let login = call(&app, "POST", "/api/session", None, Some(json!({"username": "user", "password": "user"}))).await;
    let token = login["token"].as_str().unwrap_or_default().to_string();
    let t = Some(token.as_str());
    let accounts = call(&app, "GET", "/api/accounts", t, None).await;
    let from = accounts["accounts"][0]["id"].as_str().unwrap_or_default().to_string();
    let to = accounts["accounts"][1]["id"].as_str().unwrap_or_default().to_string();
    let pending = call(&app, "POST", "/api/transfers/prepare", t, Some(json!({"from": from, "to": to, "amount": "25.00"}))).await;
    let confirm = format!("/api/pending/{}/confirm", pending["id"].as_str().unwrap_or_default());
    call(&app, "POST", &confirm, t, None).await;
    call(&app, "POST", &confirm, t, None).await;
    call(&app, "GET", "/api/cheques/000001", t, None).await;
    call(&app, "GET", "/api/accounts", None, None).await;
    call(&app, "DELETE", "/api/session", t, None).await;
    Ok(())
}
