//! Cheque books, status, stop and presentation.
//!
//! ```text
//! cargo run --example cheque_lifecycle
//! ```

use std::sync::Arc;

use netbank::admin::seed_fixture;
use netbank::domain::ChequeNumber;
use netbank::ledger::AccountKind;
use netbank::{parse_amount, Bank, Config, SystemClock};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut bank = Bank::in_memory(Config::default(), Arc::new(SystemClock));
    seed_fixture(&mut bank)?;
    let me = bank.login("user", "user")?.customer;
    let current = bank.accounts(&me).into_iter().find(|a| a.kind == AccountKind::Current).unwrap().id;
    let n = |s: &str| ChequeNumber::parse(s).unwrap();

    println!("000001 is {:?}", bank.cheque_status(&me, &n("000001"))?.status);
    println!("present 000001 for 120.00: {:?}", bank.present_cheque(&n("000001"), parse_amount("120.00")?)?);
    println!("present 000002 for 9000.00: {:?}", bank.present_cheque(&n("000002"), parse_amount("9000.00")?)?);
    bank.stop_cheque(&me, &n("000003"))?;
    println!("present stopped 000003: {:?}", bank.present_cheque(&n("000003"), parse_amount("1.00")?)?);
    println!("stop 000001 again: {}", bank.stop_cheque(&me, &n("000001")).unwrap_err().code());

    let request = bank.request_cheque_book(&me, &current, 25)?;
    println!("requested {}: {} leaves, open requests {}", request.id, request.leaves, bank.open_book_requests().len());
    let book = bank.fulfill_cheque_book(&request.id)?;
    let (first, last) = book.assigned_range.unwrap();
    println!("fulfilled with cheques {first}..{last}");
    println!("current balance {}", bank.balance_of(&current)?);
    Ok(())
}
