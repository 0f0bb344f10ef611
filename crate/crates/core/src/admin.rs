//! Operator command line.
//!
//! Commands run the in-process services directly against a data directory,
//! so they work with the gateway stopped. A `bank.lock` file in the
//! directory keeps two writers (say, `serve` and `cheque present`) apart.
//!
//! Exit codes: 0 success, 1 domain error (its code on stderr), 2 usage error.

use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::bank::{load_state, Bank};
use crate::cheque::Presentment;
use crate::clock::SystemClock;
use crate::config::{Config, ConfigError};
use crate::customer::{NewCustomer, PasswordCheck};
use crate::domain::{parse_amount, BookRequestId, ChequeNumber, CorporationId, Money};
use crate::error::BankError;
use crate::journal::{JournalError, JOURNAL_FILE, SNAPSHOT_FILE};
use crate::ledger::AccountKind;

pub const LOCK_FILE: &str = "bank.lock";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "netbank", version, about = "Internet banking server and operator tool")]
pub struct Cli {
    /// Directory holding events.log, snapshot.dat and bank.lock.
    #[arg(long, env = "BANK_DATA_DIR", default_value = "bank-data", global = true)]
    pub data_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create the demo data set in an empty data directory.
    Seed,
    /// Run the HTTP gateway.
    Serve {
        #[arg(long, env = "BANK_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
    },
    #[command(subcommand)]
    Customer(CustomerCommand),
    #[command(subcommand)]
    Corporation(CorporationCommand),
    #[command(subcommand, name = "cheque-book")]
    ChequeBook(ChequeBookCommand),
    #[command(subcommand)]
    Cheque(ChequeCommand),
    #[command(subcommand)]
    Journal(JournalCommand),
}

#[derive(Debug, Subcommand)]
pub enum CustomerCommand {
    /// Enrol a customer with a current and a savings account.
    Add(CustomerAdd),
    /// Clear a login lockout.
    Unlock { username: String },
}

#[derive(Debug, Args)]
pub struct CustomerAdd {
    #[arg(long)]
    pub username: String,
    #[arg(long)]
    pub password: String,
    #[arg(long)]
    pub full_name: String,
    #[arg(long)]
    pub email: String,
    #[arg(long, default_value = "")]
    pub phone: String,
    #[arg(long, default_value = "")]
    pub address: String,
    /// Opening balance of the current account, e.g. 250.00.
    #[arg(long, default_value = "0")]
    pub opening_current: String,
    #[arg(long, default_value = "0")]
    pub opening_savings: String,
}

#[derive(Debug, Subcommand)]
pub enum CorporationCommand {
    Add {
        name: String,
    },
    Deactivate {
        id: String,
    },
    List {
        #[arg(long)]
        all: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChequeBookCommand {
    /// Show requests waiting for fulfilment.
    List,
    /// Assign the next run of cheque numbers to a request.
    Fulfill { request: String },
}

#[derive(Debug, Subcommand)]
pub enum ChequeCommand {
    /// Present a cheque for payment: prints cleared, bounced or rejected.
    Present { number: String, amount: String },
}

#[derive(Debug, Subcommand)]
pub enum JournalCommand {
    /// Replay the journal and check every invariant.
    Verify,
    /// Write a snapshot, optionally dropping the journal prefix it covers.
    Snapshot {
        #[arg(long)]
        compact: bool,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum AdminError {
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error("data directory {0} is not empty")]
    DirNotEmpty(PathBuf),
    #[error("data directory {0} is in use by another process")]
    Locked(PathBuf),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{} invariant violation(s)", .0.len())]
    Invariants(Vec<String>),
}

impl AdminError {
    pub fn code(&self) -> String {
        match self {
            AdminError::Bank(e) => e.code(),
            AdminError::DirNotEmpty(_) => "dir-not-empty".into(),
            AdminError::Locked(_) => "data-dir-locked".into(),
            AdminError::Io(_) => "io-error".into(),
            AdminError::Config(_) => "bad-config".into(),
            AdminError::Invariants(_) => "invariant-violation".into(),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            AdminError::Config(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        }
    }
}

impl From<JournalError> for AdminError {
    fn from(e: JournalError) -> Self {
        AdminError::Bank(e.into())
    }
}

/// Exclusive hold on a data directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    _file: File,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<DirLock, AdminError> {
        fs::create_dir_all(dir)?;
        let file = OpenOptions::new().create(true).truncate(false).write(true).open(dir.join(LOCK_FILE))?;
        match file.try_lock() {
            Ok(()) => Ok(DirLock { _file: file }),
            Err(fs::TryLockError::WouldBlock) => Err(AdminError::Locked(dir.to_path_buf())),
            Err(fs::TryLockError::Error(e)) => Err(e.into()),
        }
    }
}

fn open_locked(dir: &Path, config: Config) -> Result<(Bank, DirLock), AdminError> {
    let lock = DirLock::acquire(dir)?;
    let (bank, report) = Bank::open(dir, config, Arc::new(SystemClock))?;
    if report.truncated_bytes > 0 {
        tracing::warn!(bytes = report.truncated_bytes, "dropped a torn final journal line");
    }
    Ok((bank, lock))
}

/// The demo data set: the `user`/`user` customer with opening balances,
/// three corporations and one fulfilled 50-leaf cheque book.
pub fn seed_fixture(bank: &mut Bank) -> Result<(), BankError> {
    let demo = bank.add_customer(
        NewCustomer {
            username: "user".into(),
            password: "user".into(),
            full_name: "Demo User".into(),
            email: "user@hotmail.com".into(),
            phone: "555-0100".into(),
            address: "1 Demo Street".into(),
            opening_current: Money::from_minor_units(100_000),
            opening_savings: Money::from_minor_units(50_000),
        },
        PasswordCheck::Legacy,
    )?;
    for name in ["City Power & Light", "Metro Water Board", "Telecom Mobile"] {
        bank.add_corporation(name)?;
    }
    let current = bank
        .accounts(&demo.id)
        .into_iter()
        .find(|a| a.kind == AccountKind::Current)
        .ok_or_else(|| BankError::Internal("demo customer has no current account".into()))?;
    let request = bank.request_cheque_book(&demo.id, &current.id, 50)?;
    bank.fulfill_cheque_book(&request.id)?;
    Ok(())
}

fn dir_is_empty(dir: &Path) -> std::io::Result<bool> {
    match fs::read_dir(dir) {
        Ok(mut entries) => Ok(entries.next().is_none()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(true),
        Err(e) => Err(e),
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.code());
            if let AdminError::Invariants(problems) = &e {
                for p in problems {
                    let _ = writeln!(err, "  {p}");
                }
            }
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), AdminError> {
    let config = Config::from_env()?;
    let dir = cli.data_dir.as_path();
    match cli.command {
        Command::Seed => {
            if !dir_is_empty(dir)? {
                return Err(AdminError::DirNotEmpty(dir.to_path_buf()));
            }
            let (mut bank, _lock) = open_locked(dir, config)?;
            seed_fixture(&mut bank)?;
            writeln!(out, "seeded {} ({} events)", dir.display(), bank.state().last_sequence())?;
        }
        Command::Serve { listen } => {
            let (bank, _lock) = open_locked(dir, config)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::gateway::serve(bank.into_shared(), listen))?;
        }
        Command::Customer(CustomerCommand::Add(a)) => {
            let opening_current = parse_opening(&a.opening_current)?;
            let opening_savings = parse_opening(&a.opening_savings)?;
            let (mut bank, _lock) = open_locked(dir, config)?;
            let new = NewCustomer {
                username: a.username,
                password: a.password,
                full_name: a.full_name,
                email: a.email,
                phone: a.phone,
                address: a.address,
                opening_current,
                opening_savings,
            };
            let profile = bank.add_customer(new, PasswordCheck::Enforce)?;
            write!(out, "{} {}", profile.id, profile.username)?;
            for account in bank.accounts(&profile.id) {
                write!(out, " {}={}", kind_label(account.kind), account.id)?;
            }
            writeln!(out, " card={}", profile.atm_cards[0].id)?;
        }
        Command::Customer(CustomerCommand::Unlock { username }) => {
            let (mut bank, _lock) = open_locked(dir, config)?;
            let profile = bank.unlock_customer(&username)?;
            writeln!(out, "unlocked {} {}", profile.id, profile.username)?;
        }
        Command::Corporation(CorporationCommand::Add { name }) => {
            let (mut bank, _lock) = open_locked(dir, config)?;
            let corp = bank.add_corporation(&name)?;
            writeln!(out, "{} {} settlement={}", corp.id, corp.name, corp.settlement_account)?;
        }
        Command::Corporation(CorporationCommand::Deactivate { id }) => {
            let (mut bank, _lock) = open_locked(dir, config)?;
            let id = CorporationId::new(id);
            bank.deactivate_corporation(&id)?;
            writeln!(out, "deactivated {id}")?;
        }
        Command::Corporation(CorporationCommand::List { all }) => {
            let (bank, _lock) = open_locked(dir, config)?;
            for c in bank.list_corporations(!all) {
                writeln!(out, "{} {} {}", c.id, if c.active { "active" } else { "inactive" }, c.name)?;
            }
        }
        Command::ChequeBook(ChequeBookCommand::List) => {
            let (bank, _lock) = open_locked(dir, config)?;
            for r in bank.open_book_requests() {
                writeln!(out, "{} {} {} leaves={}", r.id, r.customer, r.account, r.leaves)?;
            }
        }
        Command::ChequeBook(ChequeBookCommand::Fulfill { request }) => {
            let (mut bank, _lock) = open_locked(dir, config)?;
            let book = bank.fulfill_cheque_book(&BookRequestId::new(request))?;
            let (first, last) = book.assigned_range.expect("fulfilled books have a range");
            writeln!(out, "{} {} {}-{}", book.id, book.account, first, last)?;
        }
        Command::Cheque(ChequeCommand::Present { number, amount }) => {
            let number = ChequeNumber::parse(&number).map_err(BankError::from)?;
            let amount = parse_amount(&amount).map_err(BankError::from)?;
            let (mut bank, _lock) = open_locked(dir, config)?;
            match bank.present_cheque(&number, amount)? {
                Presentment::Cleared { transaction } => writeln!(out, "cleared {transaction}")?,
                Presentment::Bounced => writeln!(out, "bounced")?,
                Presentment::Rejected => writeln!(out, "rejected")?,
            }
        }
        Command::Journal(JournalCommand::Verify) => {
            let (state, report) = load_state(dir)?;
            if report.truncated_bytes > 0 {
                writeln!(out, "warning: torn final line ({} bytes) would be dropped", report.truncated_bytes)?;
            }
            let problems = state.verify();
            if !problems.is_empty() {
                return Err(AdminError::Invariants(problems));
            }
            writeln!(
                out,
                "ok: {} events, {} transactions, {} accounts",
                state.last_sequence(),
                state.ledger().transactions().len(),
                state.ledger().accounts().count()
            )?;
        }
        Command::Journal(JournalCommand::Snapshot { compact }) => {
            let (mut bank, _lock) = open_locked(dir, config)?;
            let seq = bank.snapshot(compact)?;
            writeln!(out, "snapshot {} at sequence {seq}", dir.join(SNAPSHOT_FILE).display())?;
            if compact {
                writeln!(out, "compacted {}", dir.join(JOURNAL_FILE).display())?;
            }
        }
    }
    Ok(())
}

fn parse_opening(raw: &str) -> Result<Money, BankError> {
    Ok(raw.trim().parse::<Money>()?)
}

fn kind_label(kind: AccountKind) -> &'static str {
    match kind {
        AccountKind::Current => "current",
        AccountKind::Savings => "savings",
        AccountKind::CorporationSettlement => "settlement",
        AccountKind::FeeIncome => "fee-income",
        AccountKind::ChequeClearing => "cheque-clearing",
        AccountKind::Capital => "capital",
    }
}
