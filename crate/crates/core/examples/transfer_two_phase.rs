//! Prepare, confirm, cancel and expire transfers.
//!
//! ```text
//! cargo run --example transfer_two_phase
//! ```

use std::sync::Arc;
use std::time::Duration;

use netbank::admin::seed_fixture;
use netbank::ledger::AccountKind;
use netbank::{parse_amount, Bank, Config, ManualClock};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clock = ManualClock::default();
    let mut bank = Bank::in_memory(Config::default(), Arc::new(clock.clone()));
    seed_fixture(&mut bank)?;
    let me = bank.login("user", "user")?.customer;
    let accounts = bank.accounts(&me);
    let current = accounts.iter().find(|a| a.kind == AccountKind::Current).unwrap().id.clone();
    let savings = accounts.iter().find(|a| a.kind == AccountKind::Savings).unwrap().id.clone();

    let pending = bank.prepare_transfer(&me, &current, &savings, parse_amount("100.00")?, "to savings")?;
    println!("prepared {} (expires at {}), current still {}", pending.id, pending.expires_at.millis(), bank.balance_of(&current)?);
    let done = bank.confirm_transfer(&me, &pending.id)?;
    println!("confirmed as {} via {}, current now {}", done.id, done.committed_tx, bank.balance_of(&current)?);
    println!("confirming again: {}", bank.confirm_transfer(&me, &pending.id).unwrap_err());

    let second = bank.prepare_transfer(&me, &current, &savings, parse_amount("5.00")?, "")?;
    bank.cancel_pending(&me, &second.id)?;
    println!("cancelled {}: {:?}", second.id, bank.pending(&me, &second.id)?.state);

    let third = bank.prepare_transfer(&me, &current, &savings, parse_amount("5.00")?, "")?;
    clock.advance(Duration::from_secs(6 * 60));
    println!("late confirm: {}", bank.confirm_transfer(&me, &third.id).unwrap_err().code());

    println!("too much: {}", bank.prepare_transfer(&me, &current, &savings, parse_amount("5000.00")?, "").unwrap_err().code());
    for record in bank.transfer_history(&me) {
        println!("history: {} {} -> {} {}", record.id, record.from_account, record.to_account, record.amount);
    }
    Ok(())
}
