//! The bank: state, sessions, configuration and the journal behind one
//! single-writer handle.
//!
//! Every mutation goes through [`Bank::record`], which validates an event,
//! appends it to the journal and only then applies it. Share a bank between
//! threads as a [`SharedBank`]: writers take the write lock, so commits are
//! totally ordered, while reads proceed concurrently on the read lock.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use crate::clock::Clock;
use crate::config::Config;
use crate::customer::SessionTable;
use crate::domain::{AccountId, CustomerId, Money, Timestamp, TransactionId, ValidationError};
use crate::error::{BankError, Result};
use crate::journal::{
    compact_journal, read_journal, read_snapshot, write_snapshot, Journal, JournalError, JournalRecord, JOURNAL_FILE, SNAPSHOT_FILE,
};
use crate::ledger::{Account, AccountKind, AccountStatus, HistoryRow, Owner, TransactionDraft, TransactionKind};
use crate::state::{Event, State};

pub type SharedBank = Arc<RwLock<Bank>>;

/// What [`Bank::open`] found on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenReport {
    pub snapshot_sequence: Option<u64>,
    pub replayed_events: usize,
    /// Bytes of a torn final journal line that were discarded.
    pub truncated_bytes: u64,
    pub last_sequence: u64,
}

pub struct Bank {
    state: State,
    pub(crate) sessions: Mutex<SessionTable>,
    journal: Option<Journal>,
    data_dir: Option<PathBuf>,
    config: Config,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for Bank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bank")
            .field("last_sequence", &self.state.last_sequence())
            .field("data_dir", &self.data_dir)
            .field("journal", &self.journal)
            .finish_non_exhaustive()
    }
}

impl Bank {
    /// A bank with no persistence.
    pub fn in_memory(config: Config, clock: Arc<dyn Clock>) -> Self {
        Bank { state: State::default(), sessions: Mutex::default(), journal: None, data_dir: None, config, clock }
    }

    /// A bank that journals to `journal`, starting from empty state.
    pub fn with_journal(config: Config, clock: Arc<dyn Clock>, journal: Journal) -> Self {
        Bank { journal: Some(journal), ..Bank::in_memory(config, clock) }
    }

    /// Loads the snapshot and journal in `dir` (creating it if needed) and
    /// replays them. A torn final journal line is cut off with a warning.
    pub fn open(dir: &Path, config: Config, clock: Arc<dyn Clock>) -> Result<(Bank, OpenReport)> {
        fs::create_dir_all(dir).map_err(JournalError::from)?;
        let journal_path = dir.join(JOURNAL_FILE);
        let (state, mut report) = load_state(dir)?;
        if report.truncated_bytes > 0 {
            tracing::warn!(bytes = report.truncated_bytes, after_sequence = state.last_sequence(), "discarding torn final journal line");
        }
        let contents_len = fs::metadata(&journal_path).map(|m| m.len()).unwrap_or(0) - report.truncated_bytes;
        let journal = Journal::open_file(&journal_path, contents_len, state.last_sequence(), config.flush)?;
        report.last_sequence = state.last_sequence();
        let bank = Bank { state, sessions: Mutex::default(), journal: Some(journal), data_dir: Some(dir.to_path_buf()), config, clock };
        Ok((bank, report))
    }

    pub fn into_shared(self) -> SharedBank {
        Arc::new(RwLock::new(self))
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.data_dir.as_deref()
    }

    /// Validates, journals and applies one event.
    pub(crate) fn record(&mut self, event: Event) -> Result<()> {
        let sequence = self.state.last_sequence() + 1;
        self.state.check(&event)?;
        if let Some(journal) = &mut self.journal {
            journal.append(&JournalRecord { sequence, event: &event })?;
        }
        self.state.apply(sequence, &event)
    }

    /// Writes a snapshot of the current state and, if `compact` is set,
    /// drops the journal prefix it covers. Returns the snapshot sequence.
    pub fn snapshot(&mut self, compact: bool) -> Result<u64> {
        let dir = self.data_dir.clone().ok_or_else(|| BankError::Internal("bank has no data directory".into()))?;
        let as_of = self.state.last_sequence();
        write_snapshot(&dir.join(SNAPSHOT_FILE), as_of, &self.state)?;
        if compact {
            let path = dir.join(JOURNAL_FILE);
            self.journal = None;
            compact_journal(&path, as_of)?;
            let len = fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
            self.journal = Some(Journal::open_file(&path, len, as_of, self.config.flush)?);
        }
        Ok(as_of)
    }

    // -- accounts ----------------------------------------------------------

    /// An open account belonging to `customer`.
    pub(crate) fn owned_account(&self, customer: &CustomerId, id: &AccountId) -> Result<&Account> {
        let account = self.state.ledger().account(id)?;
        if account.owner != Owner::Customer(customer.clone()) {
            return Err(BankError::NotOwner(format!("account {id}")));
        }
        if account.status != AccountStatus::Open {
            return Err(crate::ledger::LedgerError::AccountClosed(id.clone()).into());
        }
        Ok(account)
    }

    /// A customer account that can receive a transfer.
    pub(crate) fn destination_account(&self, id: &AccountId) -> Result<&Account> {
        match self.state.ledger().account(id) {
            Ok(a) if a.kind.is_retail() && a.status == AccountStatus::Open => Ok(a),
            _ => Err(BankError::not_found("account", id)),
        }
    }

    /// The bank's own account of `kind`, opened on first use.
    pub(crate) fn ensure_bank_account(&mut self, kind: AccountKind) -> Result<AccountId> {
        if let Some(a) = self.state.bank_account(kind) {
            return Ok(a.id.clone());
        }
        let account = self.state.ledger().plan_account(Owner::Bank, kind, self.now())?;
        let id = account.id.clone();
        self.record(Event::AccountOpened(account))?;
        Ok(id)
    }

    /// Opens an empty account for an existing owner.
    pub fn open_account(&mut self, owner: Owner, kind: AccountKind) -> Result<Account> {
        let known = match &owner {
            Owner::Customer(id) => self.state.customers().get(id).is_some(),
            Owner::Corporation(id) => self.state.corporation(id).is_some(),
            Owner::Bank => true,
        };
        if !known {
            let id = match &owner {
                Owner::Customer(id) => id.to_string(),
                Owner::Corporation(id) => id.to_string(),
                Owner::Bank => "bank".into(),
            };
            return Err(BankError::not_found("owner", id));
        }
        let account = self.state.ledger().plan_account(owner, kind, self.now())?;
        self.record(Event::AccountOpened(account.clone()))?;
        Ok(account)
    }

    /// Funds a customer account from the bank's capital account.
    pub fn seed_deposit(&mut self, account: &AccountId, amount: Money) -> Result<TransactionId> {
        if amount.is_zero() {
            return Err(ValidationError::NonPositive.into());
        }
        if !self.state.ledger().account(account)?.kind.is_retail() {
            return Err(BankError::WrongAccountKind);
        }
        let capital = self.ensure_bank_account(AccountKind::Capital)?;
        let draft = TransactionDraft::movement(TransactionKind::SeedDeposit, &capital, account, amount).memo("opening deposit");
        let tx = self.state.ledger().draft(draft, self.now());
        let id = tx.id.clone();
        self.record(Event::DepositPosted(tx))?;
        Ok(id)
    }

    pub fn balance_of(&self, account: &AccountId) -> Result<Money> {
        Ok(self.state.ledger().balance_of(account)?)
    }

    /// The customer's accounts, current before savings.
    pub fn accounts(&self, customer: &CustomerId) -> Vec<Account> {
        let owner = Owner::Customer(customer.clone());
        let mut out: Vec<Account> = self.state.ledger().accounts_of(&owner).cloned().collect();
        out.sort_by_key(|a| (a.kind, a.id.clone()));
        out
    }

    pub fn account_history(&self, customer: &CustomerId, account: &AccountId, from: Timestamp, to: Timestamp) -> Result<Vec<HistoryRow>> {
        let account = self.state.ledger().account(account)?;
        if account.owner != Owner::Customer(customer.clone()) {
            return Err(BankError::NotOwner(format!("account {}", account.id)));
        }
        Ok(self.state.ledger().history(&account.id, from, to)?)
    }
}

/// Reads snapshot and journal from `dir` without touching either file.
pub fn load_state(dir: &Path) -> Result<(State, OpenReport)> {
    let snapshot = read_snapshot::<State>(&dir.join(SNAPSHOT_FILE))?;
    let snapshot_sequence = snapshot.as_ref().map(|s| s.as_of_sequence);
    let base = match snapshot {
        Some(s) if s.as_of_sequence != s.state.last_sequence() => {
            return Err(BankError::Internal(format!(
                "snapshot claims sequence {} but holds state at {}",
                s.as_of_sequence,
                s.state.last_sequence()
            )));
        }
        Some(s) => s.state,
        None => State::default(),
    };
    let contents = read_journal::<Event>(&dir.join(JOURNAL_FILE))?;
    if let Some(first) = contents.records.first() {
        if first.sequence > base.last_sequence() + 1 {
            return Err(JournalError::SequenceGap { expected: base.last_sequence() + 1, got: first.sequence }.into());
        }
    }
    let replayed_events = contents.records.iter().filter(|r| r.sequence > base.last_sequence()).count();
    let state = base.replay(&contents.records).map_err(|e| BankError::Replay(Box::new(e)))?;
    let report =
        OpenReport { snapshot_sequence, replayed_events, truncated_bytes: contents.torn_bytes, last_sequence: state.last_sequence() };
    Ok((state, report))
}
