#![allow(dead_code)]

pub mod e2e;

use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::Rng;
use serde_json::Value;
use tower::ServiceExt;

use netbank::admin::seed_fixture;
use netbank::cheque::ChequeStatus;
use netbank::customer::{NewCustomer, PasswordCheck};
use netbank::domain::{AccountId, ChequeNumber, CorporationId, CustomerId, Money};
use netbank::ledger::{AccountKind, Direction, TransactionKind};
use netbank::state::State;
use netbank::{Bank, Config, ManualClock};

/// Defaults, with a cheap digest so tests that log in often stay fast.
pub fn fast_config() -> Config {
    Config { digest_iterations: 16, ..Config::default() }
}

pub fn money(s: &str) -> Money {
    netbank::parse_amount(s).unwrap()
}

pub fn empty_bank() -> (Bank, ManualClock) {
    let clock = ManualClock::default();
    (Bank::in_memory(fast_config(), Arc::new(clock.clone())), clock)
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub user: CustomerId,
    pub user_current: AccountId,
    pub user_savings: AccountId,
    pub jane: CustomerId,
    pub jane_current: AccountId,
    pub jane_savings: AccountId,
    pub corporations: Vec<CorporationId>,
}

pub const JANE_PASSWORD: &str = "jane-secret";

/// The demo data set plus a second, well-funded customer, `jane`, for
/// ownership checks and for keeping random sessions solvent.
pub fn seeded_bank(bank: &mut Bank) -> Fixture {
    seed_fixture(bank).unwrap();
    bank.add_customer(
        NewCustomer {
            username: "jane".into(),
            password: JANE_PASSWORD.into(),
            full_name: "Jane Roe".into(),
            email: "jane@example.org".into(),
            phone: String::new(),
            address: String::new(),
            opening_current: money("5000.00"),
            opening_savings: money("2500.00"),
        },
        PasswordCheck::Enforce,
    )
    .unwrap();
    fixture(bank)
}

pub fn fixture(bank: &Bank) -> Fixture {
    let customers = bank.state().customers();
    let user = customers.by_username("user").unwrap().id.clone();
    let jane = customers.by_username("jane").unwrap().id.clone();
    let account = |c: &CustomerId, kind| bank.accounts(c).into_iter().find(|a| a.kind == kind).unwrap().id;
    Fixture {
        user_current: account(&user, AccountKind::Current),
        user_savings: account(&user, AccountKind::Savings),
        jane_current: account(&jane, AccountKind::Current),
        jane_savings: account(&jane, AccountKind::Savings),
        corporations: bank.list_corporations(false).into_iter().map(|c| c.id).collect(),
        user,
        jane,
    }
}

/// The demo user and their current and savings accounts, for banks
/// seeded without `jane`.
pub fn fixture_user_only(bank: &Bank) -> (CustomerId, AccountId, AccountId) {
    let user = bank.state().customers().by_username("user").unwrap().id.clone();
    let accounts = bank.accounts(&user);
    (user, accounts[0].id.clone(), accounts[1].id.clone())
}

/// Total of all seed deposits: the amount conservation is measured against.
pub fn seed_total(state: &State) -> u128 {
    state.ledger().transactions().iter().filter(|t| t.kind == TransactionKind::SeedDeposit).map(|t| t.credit_total()).sum()
}

/// Sum of every credit-normal balance (everything but the capital account).
pub fn held_total(state: &State) -> u128 {
    state.ledger().accounts().filter(|a| a.kind.normal_side() == Direction::Credit).map(|a| u128::from(a.balance.minor_units())).sum()
}

pub fn unbalanced_count(state: &State) -> usize {
    state.ledger().transactions().iter().filter(|t| !t.is_balanced()).count()
}

/// One step of a random banking session. Errors from the services are
/// expected (insufficient funds, expired actions, terminal cheques) and
/// simply skipped; whatever happens must leave the invariants intact.
pub fn random_op(bank: &mut Bank, clock: &ManualClock, fx: &Fixture, rng: &mut StdRng) -> &'static str {
    let customers = [(&fx.user, [&fx.user_current, &fx.user_savings]), (&fx.jane, [&fx.jane_current, &fx.jane_savings])];
    let (who, own) = customers[rng.random_range(0..2)];
    let all_accounts = [&fx.user_current, &fx.user_savings, &fx.jane_current, &fx.jane_savings];
    // mostly small amounts so money keeps circulating; the odd large one
    // exercises the insufficient-funds and bounce paths
    let amount = if rng.random_bool(0.9) {
        Money::from_minor_units(rng.random_range(1..=3_000))
    } else {
        Money::from_minor_units(rng.random_range(1..=300_000))
    };
    let corp = &fx.corporations[rng.random_range(0..fx.corporations.len())];
    match rng.random_range(0..100) {
        0..=29 => {
            let from = own[rng.random_range(0..2)];
            let to = all_accounts[rng.random_range(0..4)];
            if let Ok(p) = bank.prepare_transfer(who, from, to, amount, "random") {
                match rng.random_range(0..10) {
                    0 => {
                        let _ = bank.cancel_pending(who, &p.id);
                    }
                    1 => clock.advance(Duration::from_secs(400)),
                    _ => {
                        let _ = bank.confirm_pending(who, &p.id);
                    }
                }
                if rng.random_bool(0.2) {
                    let _ = bank.confirm_pending(who, &p.id);
                }
            }
            "transfer"
        }
        30..=44 => {
            let source = own[rng.random_range(0..2)];
            let prepared = if rng.random_bool(0.5) {
                bank.prepare_registered_payment(who, corp, source, amount)
            } else {
                bank.prepare_open_payment(who, corp, "REF-1", source, amount)
            };
            if let Ok(p) = prepared {
                let _ = bank.confirm_pending(who, &p.id);
            }
            "payment"
        }
        45..=54 => {
            let prepared = if rng.random_bool(0.5) { bank.register_biller(who, corp, "ACC-77") } else { bank.deregister_biller(who, corp) };
            if let Ok(p) = prepared {
                let _ = bank.confirm_pending(who, &p.id);
            }
            "registration"
        }
        55..=74 => {
            if let Some(number) = random_cheque(bank, rng) {
                let _ = bank.present_cheque(&number, amount);
            }
            "present"
        }
        75..=84 => {
            if let Some(number) = random_cheque(bank, rng) {
                let _ = bank.stop_cheque(who, &number);
            }
            "stop"
        }
        85..=89 => {
            let leaves = if rng.random_bool(0.5) { 25 } else { 50 };
            if let Ok(r) = bank.request_cheque_book(who, own[0], leaves) {
                let _ = bank.fulfill_cheque_book(&r.id);
            }
            "cheque-book"
        }
        90..=94 => {
            clock.advance(Duration::from_secs(rng.random_range(1..120)));
            "tick"
        }
        _ => {
            let email = format!("u{}@example.com", rng.random_range(0..1000));
            let _ = bank.update_profile(who, &email, "555", "somewhere");
            "profile"
        }
    }
}

pub fn random_cheque(bank: &Bank, rng: &mut StdRng) -> Option<ChequeNumber> {
    let count = bank.state().cheques().count();
    if count == 0 {
        return None;
    }
    // mostly unused ones, so the run keeps moving money
    let unused: Vec<_> = bank.state().cheques().filter(|c| c.status == ChequeStatus::Unused).collect();
    if !unused.is_empty() && rng.random_bool(0.8) {
        return Some(unused[rng.random_range(0..unused.len())].number.clone());
    }
    bank.state().cheques().nth(rng.random_range(0..count)).map(|c| c.number.clone())
}

// -- HTTP --------------------------------------------------------------------

pub struct Client {
    pub router: Router,
}

impl Client {
    pub async fn send(&self, method: &str, path: &str, token: Option<&str>, body: Option<&Value>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(path);
        if let Some(t) = token {
            req = req.header("X-Session-Token", t);
        }
        let req = match body {
            Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        self.raw(req).await
    }

    pub async fn raw(&self, req: Request<Body>) -> (StatusCode, Value) {
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::Null) };
        (status, value)
    }
}

/// Failure responses must carry exactly the three envelope fields.
pub fn envelope_ok(status: StatusCode, body: &Value) -> bool {
    let Some(obj) = body.as_object() else { return false };
    obj.len() == 3
        && obj.get("http_status").and_then(Value::as_u64) == Some(u64::from(status.as_u16()))
        && obj.get("code").is_some_and(Value::is_string)
        && obj.get("message").is_some_and(Value::is_string)
}
