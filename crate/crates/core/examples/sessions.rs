//! Log-on, lockout, idle expiry and password changes.
//!
//! ```text
//! cargo run --example sessions
//! ```

use std::sync::Arc;
use std::time::Duration;

use netbank::admin::seed_fixture;
use netbank::{Bank, Config, ManualClock};

fn main() -> Result<(), netbank::BankError> {
    let clock = ManualClock::default();
    let mut bank = Bank::in_memory(Config::default(), Arc::new(clock.clone()));
    seed_fixture(&mut bank)?;

    let session = bank.login("user", "user")?;
    println!("logged in as {} with token {}...", session.customer, &session.token[..12]);

    clock.advance(Duration::from_secs(10 * 60));
    println!("after 10 idle minutes: {:?}", bank.authenticate(&session.token).map(|c| c.to_string()));
    clock.advance(Duration::from_secs(16 * 60));
    println!("after 16 more: {}", bank.authenticate(&session.token).unwrap_err().code());

    for attempt in 1..=6 {
        let outcome = bank.login("user", "guess").map(|_| ()).unwrap_err().code();
        println!("bad attempt {attempt}: {outcome}");
    }
    bank.unlock_customer("user")?;
    let session = bank.login("user", "user")?;

    let customer = session.customer.clone();
    let refused = bank.change_password(&customer, Some(&session.token), "user", "short", "short").unwrap_err();
    println!("new password 'short': {}", refused.code());
    bank.change_password(&customer, Some(&session.token), "user", "longer-secret", "longer-secret")?;
    println!("password changed; old one now gives {}", bank.login("user", "user").unwrap_err().code());
    Ok(())
}
