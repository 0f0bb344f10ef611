//! End-to-end walk through every customer-facing screen, over HTTP.

use std::sync::Arc;
use std::time::Duration;

use axum::http::StatusCode;
use serde_json::{json, Value};

use netbank::bank::SharedBank;
use netbank::domain::ChequeNumber;
use netbank::gateway::{router, ROUTES};
use netbank::{Bank, ManualClock};

use super::{envelope_ok, fast_config, money, seeded_bank, Client, Fixture, JANE_PASSWORD};

pub struct Matrix {
    pub results: Vec<(String, Result<(), String>)>,
    pub client: Client,
    pub bank: SharedBank,
    pub clock: ManualClock,
    pub fx: Fixture,
}

impl Matrix {
    pub fn new() -> Self {
        let clock = ManualClock::default();
        let mut bank = Bank::in_memory(fast_config(), Arc::new(clock.clone()));
        let fx = seeded_bank(&mut bank);
        let bank = bank.into_shared();
        Matrix { results: Vec::new(), client: Client { router: router(bank.clone()) }, bank, clock, fx }
    }

    fn record(&mut self, name: &str, outcome: Result<(), String>) {
        self.results.push((name.to_string(), outcome));
    }

    /// Sends a request and records whether status (and error code, for
    /// failures) came back as expected. Returns the body either way.
    async fn expect(
        &mut self,
        name: &str,
        (method, path): (&str, &str),
        token: Option<&str>,
        body: Option<Value>,
        want: StatusCode,
        code: Option<&str>,
    ) -> Value {
        let (status, got) = self.client.send(method, path, token, body.as_ref()).await;
        let mut outcome = Ok(());
        if status != want {
            outcome = Err(format!("{method} {path}: expected {want}, got {status} {got}"));
        } else if status.as_u16() >= 400 {
            if !envelope_ok(status, &got) {
                outcome = Err(format!("{method} {path}: malformed error envelope {got}"));
            } else if let Some(code) = code {
                if got["code"] != code {
                    outcome = Err(format!("{method} {path}: expected code {code}, got {}", got["code"]));
                }
            }
        }
        self.record(name, outcome);
        got
    }

    fn assert(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.record(name, if ok { Ok(()) } else { Err(detail()) });
    }

    async fn login(&mut self, name: &str, user: &str, password: &str) -> String {
        let body = self
            .expect(name, ("POST", "/api/session"), None, Some(json!({"username": user, "password": password})), StatusCode::CREATED, None)
            .await;
        body["token"].as_str().unwrap_or_default().to_string()
    }

    async fn balance(&self, token: &str, account: &str) -> String {
        let (_, body) = self.client.send("GET", "/api/accounts", Some(token), None).await;
        body["accounts"]
            .as_array()
            .and_then(|a| a.iter().find(|x| x["id"] == account))
            .map(|a| a["balance"].as_str().unwrap_or_default().to_string())
            .unwrap_or_default()
    }

    pub fn failures(&self) -> Vec<&(String, Result<(), String>)> {
        self.results.iter().filter(|(_, r)| r.is_err()).collect()
    }
}

impl Default for Matrix {
    fn default() -> Self {
        Self::new()
    }
}

/// Runs the whole checklist and returns the matrix with one result per check.
pub async fn completeness_matrix() -> Matrix {
    let mut m = Matrix::new();
    let fx = m.fx.clone();
    let (cur, sav) = (fx.user_current.to_string(), fx.user_savings.to_string());
    let corp = fx.corporations[0].to_string();
    let corp2 = fx.corporations[1].to_string();

    // -- log-on ---------------------------------------------------------------
    m.expect(
        "login: wrong password is rejected",
        ("POST", "/api/session"),
        None,
        Some(json!({"username": "user", "password": "wrong"})),
        StatusCode::UNAUTHORIZED,
        Some("invalid-credentials"),
    )
    .await;
    m.expect(
        "login: unknown user looks the same as a wrong password",
        ("POST", "/api/session"),
        None,
        Some(json!({"username": "nobody", "password": "user"})),
        StatusCode::UNAUTHORIZED,
        Some("invalid-credentials"),
    )
    .await;
    let token = m.login("login: demo credentials open a session", "user", "user").await;
    m.assert("login: token is 32 random bytes in hex", token.len() == 64 && token.bytes().all(|b| b.is_ascii_hexdigit()), || {
        format!("token {token:?}")
    });
    let t = Some(token.as_str());

    // -- view account -----------------------------------------------------------
    let accounts = m.expect("view account: lists accounts", ("GET", "/api/accounts"), t, None, StatusCode::OK, None).await;
    let listed: Vec<(String, String)> = accounts["accounts"]
        .as_array()
        .map(|a| a.iter().map(|x| (x["kind"].as_str().unwrap_or("").into(), x["balance"].as_str().unwrap_or("").into())).collect())
        .unwrap_or_default();
    m.assert(
        "view account: current 1000.00 and savings 500.00",
        listed == [("current".into(), "1000.00".into()), ("savings".into(), "500.00".into())],
        || format!("{listed:?}"),
    );
    let hist =
        m.expect("history: current account", ("GET", &format!("/api/accounts/{cur}/transactions")), t, None, StatusCode::OK, None).await;
    let last = hist["rows"].as_array().and_then(|r| r.last()).map(|r| r["running_balance"].clone());
    m.assert("history: current ends at its balance", last == Some(json!("1000.00")), || format!("{hist}"));
    let hist =
        m.expect("history: savings account", ("GET", &format!("/api/accounts/{sav}/transactions")), t, None, StatusCode::OK, None).await;
    m.assert(
        "history: savings shows the opening deposit",
        hist["rows"].as_array().is_some_and(|r| r.len() == 1 && r[0]["amount"] == "500.00"),
        || format!("{hist}"),
    );
    m.expect(
        "history: from after to is rejected",
        ("GET", &format!("/api/accounts/{cur}/transactions?from=10&to=5")),
        t,
        None,
        StatusCode::BAD_REQUEST,
        Some("invalid-range"),
    )
    .await;
    m.expect(
        "history: other customer's account is forbidden",
        ("GET", &format!("/api/accounts/{}/transactions", fx.jane_current)),
        t,
        None,
        StatusCode::FORBIDDEN,
        Some("not-owner"),
    )
    .await;

    // -- transfers ----------------------------------------------------------------
    let transfer = json!({"from": cur, "to": sav, "amount": "100.00", "memo": "to savings"});
    let pending = m
        .expect("transfer: prepare echoes the details", ("POST", "/api/transfers/prepare"), t, Some(transfer), StatusCode::CREATED, None)
        .await;
    let pid = pending["id"].as_str().unwrap_or_default().to_string();
    let unchanged = m.balance(&token, &cur).await;
    m.assert("transfer: prepare moves no money", unchanged == "1000.00" && pending["payload"]["amount"] == "100.00", || {
        format!("balance {unchanged}, pending {pending}")
    });
    let done = m.expect("transfer: confirm commits", ("POST", &format!("/api/pending/{pid}/confirm")), t, None, StatusCode::OK, None).await;
    let transfer_id = done["result"]["id"].as_str().unwrap_or_default().to_string();
    let (c, s) = (m.balance(&token, &cur).await, m.balance(&token, &sav).await);
    m.assert("transfer: balances moved by exactly 100.00", c == "900.00" && s == "600.00", || format!("{c} / {s}"));
    let again = m
        .expect(
            "transfer: second confirm is already-processed",
            ("POST", &format!("/api/pending/{pid}/confirm")),
            t,
            None,
            StatusCode::CONFLICT,
            Some("already-processed"),
        )
        .await;
    m.assert(
        "transfer: already-processed names the original record",
        again["message"].as_str().is_some_and(|s| s.contains(&transfer_id)),
        || format!("{again}"),
    );
    m.expect(
        "transfer: insufficient funds",
        ("POST", "/api/transfers/prepare"),
        t,
        Some(json!({"from": cur, "to": sav, "amount": "2000.00"})),
        StatusCode::UNPROCESSABLE_ENTITY,
        Some("insufficient-funds"),
    )
    .await;
    m.expect(
        "transfer: same account",
        ("POST", "/api/transfers/prepare"),
        t,
        Some(json!({"from": cur, "to": cur, "amount": "1.00"})),
        StatusCode::BAD_REQUEST,
        Some("same-account"),
    )
    .await;
    m.expect(
        "transfer: amount with three decimals",
        ("POST", "/api/transfers/prepare"),
        t,
        Some(json!({"from": cur, "to": sav, "amount": "10.505"})),
        StatusCode::BAD_REQUEST,
        Some("too-many-fraction-digits"),
    )
    .await;
    let third_party = json!({"from": cur, "to": fx.jane_current.to_string(), "amount": "25.00", "memo": "rent"});
    let p2 = m
        .expect(
            "transfer: to another customer's account",
            ("POST", "/api/transfers/prepare"),
            t,
            Some(third_party),
            StatusCode::CREATED,
            None,
        )
        .await;
    let p2 = p2["id"].as_str().unwrap_or_default().to_string();
    m.expect("transfer: cancel pending", ("POST", &format!("/api/pending/{p2}/cancel")), t, None, StatusCode::OK, None).await;
    m.expect(
        "transfer: cancelled pending cannot be confirmed",
        ("POST", &format!("/api/pending/{p2}/confirm")),
        t,
        None,
        StatusCode::CONFLICT,
        Some("already-processed"),
    )
    .await;
    let p3 = m
        .expect(
            "transfer: prepare for expiry",
            ("POST", "/api/transfers/prepare"),
            t,
            Some(json!({"from": sav, "to": cur, "amount": "5.00"})),
            StatusCode::CREATED,
            None,
        )
        .await;
    let p3 = p3["id"].as_str().unwrap_or_default().to_string();
    m.clock.advance(Duration::from_secs(5 * 60 + 1));
    m.expect(
        "transfer: confirm after the deadline expires",
        ("POST", &format!("/api/pending/{p3}/confirm")),
        t,
        None,
        StatusCode::CONFLICT,
        Some("action-expired"),
    )
    .await;
    let history = m.expect("transfer: history", ("GET", "/api/transfers"), t, None, StatusCode::OK, None).await;
    m.assert(
        "transfer: history holds only the confirmed transfer",
        history["transfers"].as_array().is_some_and(|h| h.len() == 1 && h[0]["id"] == transfer_id.as_str()),
        || format!("{history}"),
    );
    let detail = m.expect("transfer: detail", ("GET", &format!("/api/transfers/{transfer_id}")), t, None, StatusCode::OK, None).await;
    m.assert(
        "transfer: detail names its ledger transaction",
        detail["committed_tx"].as_str().is_some_and(|s| s.starts_with("TX")) && detail["memo"] == "to savings",
        || format!("{detail}"),
    );
    m.expect("transfer: unknown id", ("GET", "/api/transfers/TF99999999"), t, None, StatusCode::NOT_FOUND, Some("unknown-transfer")).await;

    // -- bill payments ------------------------------------------------------------
    let corps = m.expect("pay bills: list corporations", ("GET", "/api/corporations"), t, None, StatusCode::OK, None).await;
    let names: Vec<&str> =
        corps["corporations"].as_array().map(|c| c.iter().filter_map(|x| x["name"].as_str()).collect()).unwrap_or_default();
    let mut sorted = names.clone();
    sorted.sort_by_key(|n| n.to_lowercase());
    m.assert("pay bills: three corporations in name order", names.len() == 3 && names == sorted, || format!("{names:?}"));

    let reg = m
        .expect(
            "bill registration: prepare",
            ("POST", "/api/billers/register/prepare"),
            t,
            Some(json!({"corporation": corp, "consumer_reference": "ACC-1001"})),
            StatusCode::CREATED,
            None,
        )
        .await;
    let reg = reg["id"].as_str().unwrap_or_default().to_string();
    m.expect("bill registration: confirm", ("POST", &format!("/api/pending/{reg}/confirm")), t, None, StatusCode::OK, None).await;
    m.expect(
        "bill registration: same corporation twice",
        ("POST", "/api/billers/register/prepare"),
        t,
        Some(json!({"corporation": corp, "consumer_reference": "ACC-1001"})),
        StatusCode::CONFLICT,
        Some("already-registered"),
    )
    .await;
    let billers =
        m.expect("registered payment: list registered billers", ("GET", "/api/billers/registered"), t, None, StatusCode::OK, None).await;
    m.assert(
        "registered payment: registration carries the reference",
        billers["billers"].as_array().is_some_and(|b| b.len() == 1 && b[0]["consumer_reference"] == "ACC-1001"),
        || format!("{billers}"),
    );
    let pay = m
        .expect(
            "registered payment: prepare",
            ("POST", "/api/billpay/registered/prepare"),
            t,
            Some(json!({"corporation": corp, "source": cur, "amount": "50.00"})),
            StatusCode::CREATED,
            None,
        )
        .await;
    m.assert("registered payment: reference filled in from the registration", pay["payload"]["consumer_reference"] == "ACC-1001", || {
        format!("{pay}")
    });
    let pay = pay["id"].as_str().unwrap_or_default().to_string();
    m.expect("registered payment: confirm", ("POST", &format!("/api/pending/{pay}/confirm")), t, None, StatusCode::OK, None).await;
    let c = m.balance(&token, &cur).await;
    m.assert("registered payment: source debited", c == "850.00", || c.clone());
    m.expect(
        "registered payment: unregistered corporation",
        ("POST", "/api/billpay/registered/prepare"),
        t,
        Some(json!({"corporation": corp2, "source": cur, "amount": "5.00"})),
        StatusCode::CONFLICT,
        Some("not-registered"),
    )
    .await;

    let open = m
        .expect(
            "open payment: prepare",
            ("POST", "/api/billpay/open/prepare"),
            t,
            Some(json!({"corporation": corp2, "consumer_reference": "A-778", "source": sav, "amount": "20.00"})),
            StatusCode::CREATED,
            None,
        )
        .await;
    let open = open["id"].as_str().unwrap_or_default().to_string();
    m.expect("open payment: confirm", ("POST", &format!("/api/pending/{open}/confirm")), t, None, StatusCode::OK, None).await;
    m.expect(
        "open payment: empty reference",
        ("POST", "/api/billpay/open/prepare"),
        t,
        Some(json!({"corporation": corp2, "consumer_reference": " ", "source": sav, "amount": "20.00"})),
        StatusCode::BAD_REQUEST,
        Some("empty-field"),
    )
    .await;

    let dereg = m
        .expect(
            "bill deregistration: prepare",
            ("POST", "/api/billers/deregister/prepare"),
            t,
            Some(json!({"corporation": corp})),
            StatusCode::CREATED,
            None,
        )
        .await;
    let dereg = dereg["id"].as_str().unwrap_or_default().to_string();
    m.expect("bill deregistration: confirm", ("POST", &format!("/api/pending/{dereg}/confirm")), t, None, StatusCode::OK, None).await;
    let billers = m.expect("bill deregistration: list afterwards", ("GET", "/api/billers/registered"), t, None, StatusCode::OK, None).await;
    m.assert("bill deregistration: corporation gone from the list", billers["billers"].as_array().is_some_and(Vec::is_empty), || {
        format!("{billers}")
    });
    m.expect(
        "bill deregistration: registered payment no longer possible",
        ("POST", "/api/billpay/registered/prepare"),
        t,
        Some(json!({"corporation": corp, "source": cur, "amount": "5.00"})),
        StatusCode::CONFLICT,
        Some("not-registered"),
    )
    .await;
    let payments = m.expect("bill payment history", ("GET", "/api/billpay/history"), t, None, StatusCode::OK, None).await;
    let kinds: Vec<&str> =
        payments["payments"].as_array().map(|p| p.iter().filter_map(|x| x["kind"].as_str()).collect()).unwrap_or_default();
    m.assert("bill payment history: both kinds, newest first", kinds == ["open", "registered"], || format!("{payments}"));

    // -- cheques ------------------------------------------------------------------
    let status = m.expect("cheque status: fresh cheque", ("GET", "/api/cheques/000001"), t, None, StatusCode::OK, None).await;
    m.assert("cheque status: fresh cheque is unused", status["status"] == "unused", || format!("{status}"));
    let presented = m.bank.write().present_cheque(&ChequeNumber::parse("000002").unwrap(), money("40.00"));
    m.assert("cheque status: presentation clears", presented.is_ok(), || format!("{presented:?}"));
    let status = m.expect("cheque status: after clearing", ("GET", "/api/cheques/000002"), t, None, StatusCode::OK, None).await;
    m.assert("cheque status: cleared with amount", status["status"] == "cleared" && status["amount"] == "40.00", || format!("{status}"));
    let stopped = m.expect("stop cheque: unused", ("POST", "/api/cheques/000003/stop"), t, None, StatusCode::OK, None).await;
    m.assert("stop cheque: status stopped", stopped["status"] == "stopped", || format!("{stopped}"));
    m.expect("stop cheque: twice", ("POST", "/api/cheques/000003/stop"), t, None, StatusCode::CONFLICT, Some("already-stopped")).await;
    m.expect("stop cheque: cleared cheque", ("POST", "/api/cheques/000002/stop"), t, None, StatusCode::CONFLICT, Some("already-cleared"))
        .await;
    m.expect("cheque status: unknown number", ("GET", "/api/cheques/999999"), t, None, StatusCode::NOT_FOUND, Some("unknown-cheque")).await;
    let book = m
        .expect(
            "request cheque book: current account",
            ("POST", "/api/cheque-books"),
            t,
            Some(json!({"account": cur, "leaves": 25})),
            StatusCode::CREATED,
            None,
        )
        .await;
    m.assert("request cheque book: status requested", book["status"] == "requested", || format!("{book}"));
    m.expect(
        "request cheque book: savings account",
        ("POST", "/api/cheque-books"),
        t,
        Some(json!({"account": sav, "leaves": 50})),
        StatusCode::BAD_REQUEST,
        Some("wrong-account-kind"),
    )
    .await;
    m.expect(
        "request cheque book: 30 leaves",
        ("POST", "/api/cheque-books"),
        t,
        Some(json!({"account": cur, "leaves": 30})),
        StatusCode::BAD_REQUEST,
        Some("invalid-leaves"),
    )
    .await;

    // -- utilities ------------------------------------------------------------------
    m.expect(
        "change password: confirmation mismatch",
        ("PUT", "/api/password"),
        t,
        Some(json!({"old_password": "user", "new_password": "abc123", "confirm_password": "abc124"})),
        StatusCode::BAD_REQUEST,
        Some("confirmation-mismatch"),
    )
    .await;
    m.expect(
        "change password: too short",
        ("PUT", "/api/password"),
        t,
        Some(json!({"old_password": "user", "new_password": "user", "confirm_password": "user"})),
        StatusCode::BAD_REQUEST,
        Some("policy-violation"),
    )
    .await;
    m.expect(
        "change password: wrong old password",
        ("PUT", "/api/password"),
        t,
        Some(json!({"old_password": "nope", "new_password": "abc123", "confirm_password": "abc123"})),
        StatusCode::BAD_REQUEST,
        Some("old-password-incorrect"),
    )
    .await;
    let other = m.login("change password: second session", "user", "user").await;
    m.expect(
        "change password: accepted",
        ("PUT", "/api/password"),
        t,
        Some(json!({"old_password": "user", "new_password": "abc123", "confirm_password": "abc123"})),
        StatusCode::OK,
        None,
    )
    .await;
    m.expect(
        "change password: other sessions revoked",
        ("GET", "/api/accounts"),
        Some(&other),
        None,
        StatusCode::UNAUTHORIZED,
        Some("session-invalid"),
    )
    .await;
    m.expect("change password: calling session survives", ("GET", "/api/accounts"), t, None, StatusCode::OK, None).await;
    m.expect(
        "change password: old password no longer works",
        ("POST", "/api/session"),
        None,
        Some(json!({"username": "user", "password": "user"})),
        StatusCode::UNAUTHORIZED,
        Some("invalid-credentials"),
    )
    .await;
    m.login("change password: new password works", "user", "abc123").await;

    let updated = m
        .expect(
            "update profile: valid",
            ("PUT", "/api/profile"),
            t,
            Some(json!({"email": "User@Example.com", "phone": "555-0199", "address": "2 New Road"})),
            StatusCode::OK,
            None,
        )
        .await;
    m.assert("update profile: email stored lowercased", updated["email"] == "user@example.com" && updated["username"] == "user", || {
        format!("{updated}")
    });
    m.expect(
        "update profile: email without dot after @",
        ("PUT", "/api/profile"),
        t,
        Some(json!({"email": "a@b", "phone": "1", "address": "x"})),
        StatusCode::BAD_REQUEST,
        Some("missing-dot-after-at"),
    )
    .await;
    let profile = m.expect("update profile: read back", ("GET", "/api/profile"), t, None, StatusCode::OK, None).await;
    m.assert(
        "update profile: failed update changed nothing",
        profile["phone"] == "555-0199" && profile.get("credential").is_none(),
        || format!("{profile}"),
    );
    let card = profile["atm_cards"][0]["id"].as_str().unwrap_or_default().to_string();
    let cancelled = m.expect("cancel ATM card", ("POST", &format!("/api/atm-cards/{card}/cancel")), t, None, StatusCode::OK, None).await;
    m.assert("cancel ATM card: status cancelled", cancelled["status"] == "cancelled", || format!("{cancelled}"));
    m.expect(
        "cancel ATM card: twice",
        ("POST", &format!("/api/atm-cards/{card}/cancel")),
        t,
        None,
        StatusCode::CONFLICT,
        Some("already-cancelled"),
    )
    .await;

    // -- ownership --------------------------------------------------------------------
    let jane = m.login("ownership: second customer logs in", "jane", JANE_PASSWORD).await;
    let j = Some(jane.as_str());
    m.expect("ownership: other customer's cheque", ("GET", "/api/cheques/000001"), j, None, StatusCode::FORBIDDEN, Some("not-owner")).await;
    m.expect(
        "ownership: other customer's transfer",
        ("GET", &format!("/api/transfers/{transfer_id}")),
        j,
        None,
        StatusCode::FORBIDDEN,
        Some("not-owner"),
    )
    .await;
    m.expect(
        "ownership: other customer's ATM card",
        ("POST", &format!("/api/atm-cards/{card}/cancel")),
        j,
        None,
        StatusCode::FORBIDDEN,
        Some("not-owner"),
    )
    .await;
    m.expect(
        "ownership: moving money out of someone else's account",
        ("POST", "/api/transfers/prepare"),
        j,
        Some(json!({"from": cur, "to": fx.jane_current.to_string(), "amount": "1.00"})),
        StatusCode::FORBIDDEN,
        Some("not-owner"),
    )
    .await;

    // -- gateway plumbing ---------------------------------------------------------------
    let mut gated = Vec::new();
    for (method, path) in ROUTES {
        if (*method, *path) == netbank::gateway::LOGIN_ROUTE {
            continue;
        }
        let concrete = path.replace("{id}", "X1").replace("{number}", "000001");
        let (status, body) = m.client.send(method, &concrete, None, Some(&json!({}))).await;
        if status != StatusCode::UNAUTHORIZED || body["code"] != "session-invalid" || !envelope_ok(status, &body) {
            gated.push(format!("{method} {path} -> {status}"));
        }
    }
    m.assert("gateway: every route but login requires a session", gated.is_empty(), || gated.join(", "));
    m.expect("gateway: unknown route", ("GET", "/api/nope"), t, None, StatusCode::NOT_FOUND, Some("unknown-route")).await;
    m.expect("gateway: wrong method", ("PATCH", "/api/accounts"), t, None, StatusCode::METHOD_NOT_ALLOWED, Some("wrong-method")).await;
    let (status, body) = m
        .client
        .raw(
            axum::http::Request::builder()
                .method("POST")
                .uri("/api/transfers/prepare")
                .header("X-Session-Token", &token)
                .header("content-type", "application/json")
                .body(axum::body::Body::from("{not json"))
                .unwrap(),
        )
        .await;
    m.assert(
        "gateway: malformed body",
        status == StatusCode::BAD_REQUEST && body["code"] == "malformed-body" && envelope_ok(status, &body),
        || format!("{status} {body}"),
    );
    m.expect("gateway: garbage token", ("GET", "/api/accounts"), Some("deadbeef"), None, StatusCode::UNAUTHORIZED, Some("session-invalid"))
        .await;

    // -- session end ----------------------------------------------------------------------
    let idle = m.login("session: fresh session for idling", "jane", JANE_PASSWORD).await;
    m.clock.advance(Duration::from_secs(15 * 60 + 1));
    m.expect(
        "session: idle past 15 minutes expires",
        ("GET", "/api/accounts"),
        Some(&idle),
        None,
        StatusCode::UNAUTHORIZED,
        Some("session-expired"),
    )
    .await;
    let token = m.login("session: log in again", "user", "abc123").await;
    m.expect("logout", ("DELETE", "/api/session"), Some(&token), None, StatusCode::NO_CONTENT, None).await;
    m.expect(
        "logout: token no longer works",
        ("GET", "/api/accounts"),
        Some(&token),
        None,
        StatusCode::UNAUTHORIZED,
        Some("session-invalid"),
    )
    .await;

    let state = m.bank.read().state().clone();
    let problems = state.verify();
    m.assert("ledger: every invariant holds after the walk", problems.is_empty(), || problems.join("; "));
    m
}
