//! The double-entry ledger on its own: accounts, balanced postings and
//! the history view.
//!
//! ```text
//! cargo run --example ledger
//! ```

use netbank::domain::{CustomerId, Timestamp};
use netbank::ledger::{AccountKind, Ledger, LedgerEntry, Owner, TransactionDraft, TransactionKind};
use netbank::parse_amount;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut ledger = Ledger::new();
    let now = Timestamp(0);
    let alice = Owner::Customer(CustomerId::new("CUS000001"));
    let capital = ledger.open_account(Owner::Bank, AccountKind::Capital, now)?.id.clone();
    let current = ledger.open_account(alice.clone(), AccountKind::Current, now)?.id.clone();
    let savings = ledger.open_account(alice, AccountKind::Savings, now)?.id.clone();

    let deposit = TransactionDraft::movement(TransactionKind::SeedDeposit, &capital, &current, parse_amount("250.00")?);
    let tx = ledger.draft(deposit, Timestamp(1));
    ledger.commit(tx)?;
    let move_some = TransactionDraft::movement(TransactionKind::Transfer, &current, &savings, parse_amount("40.00")?).memo("rainy day");
    let tx = ledger.draft(move_some, Timestamp(2));
    ledger.commit(tx)?;

    // one side heavier than the other never commits
    let mut lopsided = TransactionDraft::movement(TransactionKind::Transfer, &current, &savings, parse_amount("1.00")?);
    lopsided.entries.push(LedgerEntry::credit(savings.clone(), parse_amount("0.01")?));
    let tx = ledger.draft(lopsided, Timestamp(3));
    println!("lopsided posting: {}", ledger.commit(tx).unwrap_err());

    // nor does one that would overdraw
    let overdraw = TransactionDraft::movement(TransactionKind::Transfer, &savings, &current, parse_amount("999.00")?);
    let tx = ledger.draft(overdraw, Timestamp(4));
    println!("overdraft: {}", ledger.commit(tx).unwrap_err());

    for account in ledger.accounts() {
        println!("{} {:?} {}", account.id, account.kind, account.balance);
    }
    for row in ledger.history(&current, Timestamp::MIN, Timestamp::MAX)? {
        println!("  {} {:>8} -> {:>8}  {}", row.transaction, row.amount, row.running_balance, row.memo);
    }
    Ok(())
}
