//! JSON over HTTP.
//!
//! Every route except `POST /api/session` sits behind one session gate that
//! reads the `X-Session-Token` header. Failures of any kind come back as the
//! same envelope: `{"http_status": .., "code": .., "message": ..}`.

use std::net::SocketAddr;

use axum::extract::rejection::QueryRejection;
use axum::extract::{FromRequest, MatchedPath, Path, Query, Request, State};
use axum::http::{Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Extension, Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bank::SharedBank;
use crate::customer::{AtmCard, CustomerProfile};
use crate::domain::{parse_amount, AccountId, CardId, ChequeNumber, CorporationId, CustomerId, PendingId, Timestamp, TransferId};
use crate::error::{BankError, ErrorClass};

pub const TOKEN_HEADER: &str = "x-session-token";

/// Every route the gateway serves, as (method, path template).
pub const ROUTES: &[(&str, &str)] = &[
    ("POST", "/api/session"),
    ("DELETE", "/api/session"),
    ("GET", "/api/profile"),
    ("GET", "/api/accounts"),
    ("GET", "/api/accounts/{id}/transactions"),
    ("POST", "/api/transfers/prepare"),
    ("POST", "/api/pending/{id}/confirm"),
    ("POST", "/api/pending/{id}/cancel"),
    ("GET", "/api/transfers"),
    ("GET", "/api/transfers/{id}"),
    ("GET", "/api/corporations"),
    ("GET", "/api/billers/registered"),
    ("POST", "/api/billpay/registered/prepare"),
    ("POST", "/api/billpay/open/prepare"),
    ("GET", "/api/billpay/history"),
    ("POST", "/api/billers/register/prepare"),
    ("POST", "/api/billers/deregister/prepare"),
    ("GET", "/api/cheques/{number}"),
    ("POST", "/api/cheques/{number}/stop"),
    ("POST", "/api/cheque-books"),
    ("PUT", "/api/password"),
    ("PUT", "/api/profile"),
    ("POST", "/api/atm-cards/{id}/cancel"),
];

/// The only route reachable without a session.
pub const LOGIN_ROUTE: (&str, &str) = ("POST", "/api/session");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError { status, code: code.into(), message: message.into() }
    }
}

pub fn status_for(class: ErrorClass) -> StatusCode {
    match class {
        ErrorClass::Validation => StatusCode::BAD_REQUEST,
        ErrorClass::Auth => StatusCode::UNAUTHORIZED,
        ErrorClass::Forbidden => StatusCode::FORBIDDEN,
        ErrorClass::NotFound => StatusCode::NOT_FOUND,
        ErrorClass::Conflict => StatusCode::CONFLICT,
        ErrorClass::Unprocessable => StatusCode::UNPROCESSABLE_ENTITY,
        ErrorClass::Internal => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<BankError> for ApiError {
    fn from(e: BankError) -> Self {
        let class = e.class();
        let message = if class == ErrorClass::Internal {
            tracing::error!(error = %e, "request failed");
            "internal error".to_string()
        } else {
            e.to_string()
        };
        ApiError::new(status_for(class), e.code(), message)
    }
}

impl From<crate::domain::ValidationError> for ApiError {
    fn from(e: crate::domain::ValidationError) -> Self {
        BankError::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "http_status": self.status.as_u16(), "code": self.code, "message": self.message });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// `Json` whose rejections use the error envelope.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(rejection) => Err(ApiError::new(StatusCode::BAD_REQUEST, "malformed-body", rejection.body_text())),
        }
    }
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(v)| v).map_err(|r| ApiError::new(StatusCode::BAD_REQUEST, "malformed-query", r.body_text()))
}

/// The authenticated customer behind a request.
#[derive(Debug, Clone)]
pub struct Caller {
    pub customer: CustomerId,
    pub token: String,
}

async fn require_session(State(bank): State<SharedBank>, mut req: Request, next: Next) -> Response {
    let path = req.extensions().get::<MatchedPath>().map(|p| p.as_str().to_owned());
    if req.method() == Method::POST && path.as_deref() == Some(LOGIN_ROUTE.1) {
        return next.run(req).await;
    }
    let Some(token) = req.headers().get(TOKEN_HEADER).and_then(|v| v.to_str().ok()).map(str::to_owned) else {
        return ApiError::from(BankError::SessionInvalid).into_response();
    };
    let customer = match bank.read().authenticate(&token) {
        Ok(c) => c,
        Err(e) => return ApiError::from(e).into_response(),
    };
    req.extensions_mut().insert(Caller { customer, token });
    next.run(req).await
}

async fn unknown_route(method: Method, uri: axum::http::Uri) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "unknown-route", format!("no route for {method} {}", uri.path()))
}

async fn wrong_method(method: Method, uri: axum::http::Uri) -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "wrong-method", format!("{method} is not allowed on {}", uri.path()))
}

pub fn router(bank: SharedBank) -> Router {
    Router::new()
        .route("/api/session", post(login).delete(logout))
        .route("/api/profile", get(profile).put(update_profile))
        .route("/api/accounts", get(accounts))
        .route("/api/accounts/{id}/transactions", get(account_history))
        .route("/api/transfers/prepare", post(prepare_transfer))
        .route("/api/pending/{id}/confirm", post(confirm_pending))
        .route("/api/pending/{id}/cancel", post(cancel_pending))
        .route("/api/transfers", get(transfer_history))
        .route("/api/transfers/{id}", get(transfer_detail))
        .route("/api/corporations", get(corporations))
        .route("/api/billers/registered", get(registered_billers))
        .route("/api/billpay/registered/prepare", post(prepare_registered_payment))
        .route("/api/billpay/open/prepare", post(prepare_open_payment))
        .route("/api/billpay/history", get(payment_history))
        .route("/api/billers/register/prepare", post(prepare_registration))
        .route("/api/billers/deregister/prepare", post(prepare_deregistration))
        .route("/api/cheques/{number}", get(cheque_status))
        .route("/api/cheques/{number}/stop", post(stop_cheque))
        .route("/api/cheque-books", post(request_cheque_book))
        .route("/api/password", put(change_password))
        .route("/api/atm-cards/{id}/cancel", post(cancel_atm_card))
        .route_layer(middleware::from_fn_with_state(bank.clone(), require_session))
        .fallback(unknown_route)
        .method_not_allowed_fallback(wrong_method)
        .with_state(bank)
}

/// Serves the API on `addr` until Ctrl-C.
pub async fn serve(bank: SharedBank, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(bank))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

// -- payloads --------------------------------------------------------------

#[derive(Debug, Deserialize)]
pub struct LoginBody {
    pub username: String,
    pub password: String,
}

#[derive(Debug, Serialize)]
pub struct ProfileView {
    pub id: CustomerId,
    pub username: String,
    pub full_name: String,
    pub email: String,
    pub phone: String,
    pub address: String,
    pub atm_cards: Vec<AtmCard>,
}

impl From<CustomerProfile> for ProfileView {
    fn from(p: CustomerProfile) -> Self {
        ProfileView {
            id: p.id,
            username: p.username,
            full_name: p.full_name,
            email: p.email.as_str().to_string(),
            phone: p.phone,
            address: p.address,
            atm_cards: p.atm_cards,
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct HistoryQuery {
    pub from: Option<i64>,
    pub to: Option<i64>,
}

#[derive(Debug, Deserialize)]
pub struct TransferBody {
    pub from: String,
    pub to: String,
    pub amount: String,
    #[serde(default)]
    pub memo: String,
}

#[derive(Debug, Deserialize)]
pub struct CorporationsQuery {
    pub active_only: Option<bool>,
}

#[derive(Debug, Deserialize)]
pub struct RegisteredPaymentBody {
    pub corporation: String,
    pub source: String,
    pub amount: String,
}

#[derive(Debug, Deserialize)]
pub struct OpenPaymentBody {
    pub corporation: String,
    pub consumer_reference: String,
    pub source: String,
    pub amount: String,
}

#[derive(Debug, Deserialize)]
pub struct RegisterBody {
    pub corporation: String,
    pub consumer_reference: String,
}

#[derive(Debug, Deserialize)]
pub struct DeregisterBody {
    pub corporation: String,
}

#[derive(Debug, Deserialize)]
pub struct ChequeBookBody {
    pub account: String,
    pub leaves: u32,
}

#[derive(Debug, Deserialize)]
pub struct PasswordBody {
    pub old_password: String,
    pub new_password: String,
    pub confirm_password: String,
}

#[derive(Debug, Deserialize)]
pub struct ProfileBody {
    pub email: String,
    #[serde(default)]
    pub phone: String,
    #[serde(default)]
    pub address: String,
}

// -- handlers --------------------------------------------------------------

type Bank = State<SharedBank>;
type Who = Extension<Caller>;

async fn login(State(bank): Bank, ApiJson(body): ApiJson<LoginBody>) -> ApiResult<(StatusCode, Json<Value>)> {
    let mut bank = bank.write();
    let session = bank.login(&body.username, &body.password)?;
    let ttl = bank.config().session_ttl.as_secs();
    let profile = bank.profile(&session.customer)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "token": session.token,
            "customer": session.customer,
            "full_name": profile.full_name,
            "idle_timeout_secs": ttl,
        })),
    ))
}

async fn logout(State(bank): Bank, Extension(caller): Who) -> ApiResult<StatusCode> {
    bank.read().logout(&caller.token)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn profile(State(bank): Bank, Extension(caller): Who) -> ApiResult<Json<ProfileView>> {
    Ok(Json(bank.read().profile(&caller.customer)?.into()))
}

async fn update_profile(State(bank): Bank, Extension(caller): Who, ApiJson(body): ApiJson<ProfileBody>) -> ApiResult<Json<ProfileView>> {
    let profile = bank.write().update_profile(&caller.customer, &body.email, &body.phone, &body.address)?;
    Ok(Json(profile.into()))
}

async fn accounts(State(bank): Bank, Extension(caller): Who) -> ApiResult<Json<Value>> {
    let bank = bank.read();
    Ok(Json(json!({ "currency": bank.config().currency, "accounts": bank.accounts(&caller.customer) })))
}

async fn account_history(
    State(bank): Bank,
    Extension(caller): Who,
    Path(id): Path<String>,
    q: Result<Query<HistoryQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let q = query(q)?;
    let id = AccountId::parse(&id)?;
    let from = q.from.map_or(Timestamp::MIN, Timestamp);
    let to = q.to.map_or(Timestamp::MAX, Timestamp);
    let bank = bank.read();
    let rows = bank.account_history(&caller.customer, &id, from, to)?;
    let balance = bank.balance_of(&id)?;
    Ok(Json(json!({ "account": id, "balance": balance, "rows": rows })))
}

async fn prepare_transfer(
    State(bank): Bank,
    Extension(caller): Who,
    ApiJson(b): ApiJson<TransferBody>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let from = AccountId::parse(&b.from)?;
    let to = AccountId::parse(&b.to)?;
    let amount = parse_amount(&b.amount)?;
    let action = bank.write().prepare_transfer(&caller.customer, &from, &to, amount, &b.memo)?;
    Ok((StatusCode::CREATED, Json(json!(action))))
}

async fn confirm_pending(State(bank): Bank, Extension(caller): Who, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let outcome = bank.write().confirm_pending(&caller.customer, &PendingId::new(id))?;
    Ok(Json(json!(outcome)))
}

async fn cancel_pending(State(bank): Bank, Extension(caller): Who, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let id = PendingId::new(id);
    let mut bank = bank.write();
    bank.cancel_pending(&caller.customer, &id)?;
    Ok(Json(json!(bank.pending(&caller.customer, &id)?)))
}

async fn transfer_history(State(bank): Bank, Extension(caller): Who) -> Json<Value> {
    Json(json!({ "transfers": bank.read().transfer_history(&caller.customer) }))
}

async fn transfer_detail(State(bank): Bank, Extension(caller): Who, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(json!(bank.read().transfer_detail(&caller.customer, &TransferId::new(id))?)))
}

async fn corporations(State(bank): Bank, q: Result<Query<CorporationsQuery>, QueryRejection>) -> ApiResult<Json<Value>> {
    let active_only = query(q)?.active_only.unwrap_or(true);
    Ok(Json(json!({ "corporations": bank.read().list_corporations(active_only) })))
}

async fn registered_billers(State(bank): Bank, Extension(caller): Who) -> Json<Value> {
    let billers: Vec<Value> = bank
        .read()
        .list_registered_billers(&caller.customer)
        .into_iter()
        .map(|(corporation, reference)| json!({ "corporation": corporation, "consumer_reference": reference }))
        .collect();
    Json(json!({ "billers": billers }))
}

async fn prepare_registered_payment(
    State(bank): Bank,
    Extension(caller): Who,
    ApiJson(b): ApiJson<RegisteredPaymentBody>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let source = AccountId::parse(&b.source)?;
    let amount = parse_amount(&b.amount)?;
    let corporation = CorporationId::new(b.corporation);
    let action = bank.write().prepare_registered_payment(&caller.customer, &corporation, &source, amount)?;
    Ok((StatusCode::CREATED, Json(json!(action))))
}

async fn prepare_open_payment(
    State(bank): Bank,
    Extension(caller): Who,
    ApiJson(b): ApiJson<OpenPaymentBody>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let source = AccountId::parse(&b.source)?;
    let amount = parse_amount(&b.amount)?;
    let corporation = CorporationId::new(b.corporation);
    let action = bank.write().prepare_open_payment(&caller.customer, &corporation, &b.consumer_reference, &source, amount)?;
    Ok((StatusCode::CREATED, Json(json!(action))))
}

async fn payment_history(State(bank): Bank, Extension(caller): Who) -> Json<Value> {
    Json(json!({ "payments": bank.read().payment_history(&caller.customer) }))
}

async fn prepare_registration(
    State(bank): Bank,
    Extension(caller): Who,
    ApiJson(b): ApiJson<RegisterBody>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let corporation = CorporationId::new(b.corporation);
    let action = bank.write().register_biller(&caller.customer, &corporation, &b.consumer_reference)?;
    Ok((StatusCode::CREATED, Json(json!(action))))
}

async fn prepare_deregistration(
    State(bank): Bank,
    Extension(caller): Who,
    ApiJson(b): ApiJson<DeregisterBody>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let corporation = CorporationId::new(b.corporation);
    let action = bank.write().deregister_biller(&caller.customer, &corporation)?;
    Ok((StatusCode::CREATED, Json(json!(action))))
}

async fn cheque_status(State(bank): Bank, Extension(caller): Who, Path(number): Path<String>) -> ApiResult<Json<Value>> {
    let number = ChequeNumber::parse(&number)?;
    Ok(Json(json!(bank.read().cheque_status(&caller.customer, &number)?)))
}

async fn stop_cheque(State(bank): Bank, Extension(caller): Who, Path(number): Path<String>) -> ApiResult<Json<Value>> {
    let number = ChequeNumber::parse(&number)?;
    Ok(Json(json!(bank.write().stop_cheque(&caller.customer, &number)?)))
}

async fn request_cheque_book(
    State(bank): Bank,
    Extension(caller): Who,
    ApiJson(b): ApiJson<ChequeBookBody>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let account = AccountId::parse(&b.account)?;
    let request = bank.write().request_cheque_book(&caller.customer, &account, b.leaves)?;
    Ok((StatusCode::CREATED, Json(json!(request))))
}

async fn change_password(State(bank): Bank, Extension(caller): Who, ApiJson(b): ApiJson<PasswordBody>) -> ApiResult<Json<Value>> {
    bank.write().change_password(&caller.customer, Some(&caller.token), &b.old_password, &b.new_password, &b.confirm_password)?;
    Ok(Json(json!({ "status": "password-changed" })))
}

async fn cancel_atm_card(State(bank): Bank, Extension(caller): Who, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(json!(bank.write().cancel_atm_card(&caller.customer, &CardId::new(id))?)))
}
