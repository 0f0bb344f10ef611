//! Durable state: journal, restart, snapshot and recovery from a torn
//! final line.
//!
//! ```text
//! cargo run --example journal_replay
//! ```

use std::fs::OpenOptions;
use std::io::Write;
use std::sync::Arc;

use netbank::admin::seed_fixture;
use netbank::journal::JOURNAL_FILE;
use netbank::{Bank, Config, SystemClock};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("netbank-example-{}", std::process::id()));
    let clock = Arc::new(SystemClock);
    {
        let (mut bank, _) = Bank::open(&dir, Config::default(), clock.clone())?;
        seed_fixture(&mut bank)?;
        bank.add_corporation("Harbour Gas")?;
        println!("wrote {} events to {}", bank.state().last_sequence(), dir.join(JOURNAL_FILE).display());
    }
    let journal = std::fs::read_to_string(dir.join(JOURNAL_FILE))?;
    let first = journal.lines().next().unwrap_or_default();
    println!("first line: {}...", &first[..first.len().min(90)]);

    let (mut bank, report) = Bank::open(&dir, Config::default(), clock.clone())?;
    println!("reopened: {report:?}");
    let at = bank.snapshot(true)?;
    bank.add_corporation("Ferry Water")?;
    drop(bank);

    // simulate a crash halfway through writing a line
    OpenOptions::new().append(true).open(dir.join(JOURNAL_FILE))?.write_all(b"3f2a91c0 {\"kind\":\"corpor")?;
    let (bank, report) = Bank::open(&dir, Config::default(), clock)?;
    println!("snapshot at {at}; after crash: {report:?}");
    println!("invariant problems: {:?}", bank.state().verify());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
