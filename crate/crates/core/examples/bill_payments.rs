//! Corporations, biller registration, and registered and open payments.
//!
//! ```text
//! cargo run --example bill_payments
//! ```

use std::sync::Arc;

use netbank::admin::seed_fixture;
use netbank::ledger::AccountKind;
use netbank::{parse_amount, Bank, Config, SystemClock};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut bank = Bank::in_memory(Config::default(), Arc::new(SystemClock));
    seed_fixture(&mut bank)?;
    let me = bank.login("user", "user")?.customer;
    let current = bank.accounts(&me).into_iter().find(|a| a.kind == AccountKind::Current).unwrap().id;

    let corporations = bank.list_corporations(true);
    for c in &corporations {
        println!("{} {}", c.id, c.name);
    }
    let power = &corporations[0];

    let reg = bank.register_biller(&me, &power.id, "ACC-0042")?;
    bank.confirm_registration(&me, &reg.id)?;
    let pay = bank.prepare_registered_payment(&me, &power.id, &current, parse_amount("64.20")?)?;
    let paid = bank.confirm_payment(&me, &pay.id)?;
    println!("paid {} to {} as {:?} payment {}", paid.amount, power.name, paid.kind, paid.id);

    let water = &corporations[1];
    let open = bank.prepare_open_payment(&me, &water.id, "INV-7781", &current, parse_amount("18.00")?)?;
    bank.confirm_payment(&me, &open.id)?;

    let unreg = bank.deregister_biller(&me, &power.id)?;
    bank.confirm_deregistration(&me, &unreg.id)?;
    let refused = bank.prepare_registered_payment(&me, &power.id, &current, parse_amount("1.00")?).unwrap_err();
    println!("after deregistering: {}", refused.code());

    for p in bank.payment_history(&me) {
        println!("history: {} {} {} ref {}", p.id, p.corporation, p.amount, p.consumer_reference);
    }
    println!("current balance {}", bank.balance_of(&current)?);
    Ok(())
}
