//! Double-entry ledger.
//!
//! Every account has a normal side. Customer, settlement, fee-income and
//! clearing accounts are credit-normal: their balance is credits minus
//! debits. The bank's capital account, which funds opening deposits, is
//! debit-normal. Balances are therefore never negative, and because every
//! committed transaction is balanced the credit-normal balances always sum
//! to the capital balance, which in turn equals the total of all opening
//! deposits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{AccountId, CorporationId, CustomerId, Money, SignedMoney, Timestamp, TransactionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccountKind {
    Current,
    Savings,
    CorporationSettlement,
    FeeIncome,
    ChequeClearing,
    Capital,
}

impl AccountKind {
    pub fn is_retail(self) -> bool {
        matches!(self, AccountKind::Current | AccountKind::Savings)
    }

    pub fn normal_side(self) -> Direction {
        match self {
            AccountKind::Capital => Direction::Debit,
            _ => Direction::Credit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type", content = "id")]
pub enum Owner {
    Customer(CustomerId),
    Corporation(CorporationId),
    Bank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccountStatus {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub id: AccountId,
    pub owner: Owner,
    pub kind: AccountKind,
    pub opened_at: Timestamp,
    pub status: AccountStatus,
    pub balance: Money,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Debit,
    Credit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub account: AccountId,
    pub direction: Direction,
    pub amount: Money,
}

impl LedgerEntry {
    pub fn debit(account: AccountId, amount: Money) -> Self {
        LedgerEntry { account, direction: Direction::Debit, amount }
    }

    pub fn credit(account: AccountId, amount: Money) -> Self {
        LedgerEntry { account, direction: Direction::Credit, amount }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransactionKind {
    Transfer,
    BillPayment,
    ChequeClearing,
    Fee,
    SeedDeposit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerTransaction {
    pub id: TransactionId,
    /// Position in commit order, starting at 1. Orders history.
    pub seq: u64,
    pub at: Timestamp,
    pub kind: TransactionKind,
    pub memo: String,
    pub reference: Option<String>,
    pub entries: Vec<LedgerEntry>,
}

impl LedgerTransaction {
    pub fn debit_total(&self) -> u128 {
        self.side_total(Direction::Debit)
    }

    pub fn credit_total(&self) -> u128 {
        self.side_total(Direction::Credit)
    }

    fn side_total(&self, side: Direction) -> u128 {
        self.entries.iter().filter(|e| e.direction == side).map(|e| e.amount.minor_units() as u128).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.debit_total() == self.credit_total()
    }

    pub fn touches(&self, account: &AccountId) -> bool {
        self.entries.iter().any(|e| &e.account == account)
    }
}

/// A transaction before the ledger has assigned its id and position.
#[derive(Debug, Clone)]
pub struct TransactionDraft {
    pub kind: TransactionKind,
    pub memo: String,
    pub reference: Option<String>,
    pub entries: Vec<LedgerEntry>,
}

impl TransactionDraft {
    /// Moves `amount` out of `from` and into `to`.
    pub fn movement(kind: TransactionKind, from: &AccountId, to: &AccountId, amount: Money) -> Self {
        TransactionDraft {
            kind,
            memo: String::new(),
            reference: None,
            entries: vec![LedgerEntry::debit(from.clone(), amount), LedgerEntry::credit(to.clone(), amount)],
        }
    }

    pub fn memo(mut self, memo: impl Into<String>) -> Self {
        self.memo = memo.into();
        self
    }

    pub fn reference(mut self, reference: impl Into<String>) -> Self {
        self.reference = Some(reference.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("owner already has a {0:?} account")]
    DuplicateKindForOwner(AccountKind),
    #[error("unknown account {0}")]
    UnknownAccount(AccountId),
    #[error("account {0} is closed")]
    AccountClosed(AccountId),
    #[error("insufficient funds in account {0}")]
    InsufficientFunds(AccountId),
    #[error("transaction is unbalanced: debits {debits}, credits {credits}")]
    Unbalanced { debits: u128, credits: u128 },
    #[error("transaction needs at least two entries with positive amounts")]
    MalformedTransaction,
    #[error("transaction {got} is out of order; expected {expected}")]
    OutOfOrder { expected: TransactionId, got: TransactionId },
    #[error("account id {got} is out of order; expected {expected}")]
    AccountOutOfOrder { expected: AccountId, got: AccountId },
    #[error("history range starts after it ends")]
    InvalidRange,
    #[error("balance overflow")]
    Overflow,
}

impl LedgerError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::DuplicateKindForOwner(_) => "duplicate-kind-for-owner",
            Self::UnknownAccount(_) => "unknown-account",
            Self::AccountClosed(_) => "account-closed",
            Self::InsufficientFunds(_) => "insufficient-funds",
            Self::Unbalanced { .. } => "unbalanced-transaction",
            Self::MalformedTransaction => "malformed-transaction",
            Self::OutOfOrder { .. } | Self::AccountOutOfOrder { .. } => "out-of-order",
            Self::InvalidRange => "invalid-range",
            Self::Overflow => "overflow",
        }
    }
}

/// One row of an account statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub transaction: TransactionId,
    pub seq: u64,
    pub at: Timestamp,
    pub kind: TransactionKind,
    pub memo: String,
    pub reference: Option<String>,
    /// Effect on the account balance.
    pub amount: SignedMoney,
    pub running_balance: Money,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    accounts: BTreeMap<AccountId, Account>,
    transactions: Vec<LedgerTransaction>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn account(&self, id: &AccountId) -> Result<&Account, LedgerError> {
        self.accounts.get(id).ok_or_else(|| LedgerError::UnknownAccount(id.clone()))
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn accounts_of<'a>(&'a self, owner: &'a Owner) -> impl Iterator<Item = &'a Account> + 'a {
        self.accounts.values().filter(move |a| &a.owner == owner)
    }

    pub fn transactions(&self) -> &[LedgerTransaction] {
        &self.transactions
    }

    pub fn transaction(&self, id: &TransactionId) -> Option<&LedgerTransaction> {
        // ids are dense: TX00000001 is at index 0
        let seq: usize = id.as_str().strip_prefix("TX")?.parse().ok()?;
        self.transactions.get(seq.checked_sub(1)?).filter(|tx| &tx.id == id)
    }

    pub fn next_account_id(&self) -> AccountId {
        AccountId::from_index(self.accounts.len())
    }

    /// Builds the account that [`Ledger::insert_account`] would accept,
    /// without registering it.
    pub fn plan_account(&self, owner: Owner, kind: AccountKind, at: Timestamp) -> Result<Account, LedgerError> {
        let account = Account { id: self.next_account_id(), owner, kind, opened_at: at, status: AccountStatus::Open, balance: Money::ZERO };
        self.check_account(&account)?;
        Ok(account)
    }

    pub fn check_account(&self, account: &Account) -> Result<(), LedgerError> {
        self.check_new_accounts(std::slice::from_ref(account))
    }

    /// Checks a batch of accounts that would be inserted in order.
    pub fn check_new_accounts(&self, accounts: &[Account]) -> Result<(), LedgerError> {
        for (i, account) in accounts.iter().enumerate() {
            let expected = AccountId::from_index(self.accounts.len() + i);
            if account.id != expected {
                return Err(LedgerError::AccountOutOfOrder { expected, got: account.id.clone() });
            }
            if !account.balance.is_zero() || account.status != AccountStatus::Open {
                return Err(LedgerError::MalformedTransaction);
            }
            let unique_per_owner = account.kind.is_retail() || !matches!(account.owner, Owner::Customer(_));
            let clash = |a: &Account| a.owner == account.owner && a.kind == account.kind;
            if unique_per_owner && (self.accounts.values().any(clash) || accounts[..i].iter().any(clash)) {
                return Err(LedgerError::DuplicateKindForOwner(account.kind));
            }
        }
        Ok(())
    }

    pub fn insert_account(&mut self, account: Account) -> Result<&Account, LedgerError> {
        self.check_account(&account)?;
        let id = account.id.clone();
        Ok(self.accounts.entry(id).or_insert(account))
    }

    /// Registers a new empty account. Each owner holds at most one account
    /// of any given kind.
    pub fn open_account(&mut self, owner: Owner, kind: AccountKind, at: Timestamp) -> Result<&Account, LedgerError> {
        let account = self.plan_account(owner, kind, at)?;
        self.insert_account(account)
    }

    /// Assigns the next transaction id and position to a draft.
    pub fn draft(&self, draft: TransactionDraft, at: Timestamp) -> LedgerTransaction {
        let seq = self.transactions.len() as u64 + 1;
        LedgerTransaction {
            id: TransactionId::from_serial(seq as usize),
            seq,
            at,
            kind: draft.kind,
            memo: draft.memo,
            reference: draft.reference,
            entries: draft.entries,
        }
    }

    /// Checks everything [`Ledger::commit`] would check, without mutating.
    pub fn check(&self, tx: &LedgerTransaction) -> Result<(), LedgerError> {
        self.resulting_balances(tx).map(|_| ())
    }

    fn resulting_balances(&self, tx: &LedgerTransaction) -> Result<BTreeMap<AccountId, Money>, LedgerError> {
        let expected = TransactionId::from_serial(self.transactions.len() + 1);
        if tx.id != expected || tx.seq != self.transactions.len() as u64 + 1 {
            return Err(LedgerError::OutOfOrder { expected, got: tx.id.clone() });
        }
        if tx.entries.len() < 2 || tx.entries.iter().any(|e| e.amount.is_zero()) {
            return Err(LedgerError::MalformedTransaction);
        }
        if !tx.is_balanced() {
            return Err(LedgerError::Unbalanced { debits: tx.debit_total(), credits: tx.credit_total() });
        }
        let mut delta: BTreeMap<&AccountId, i128> = BTreeMap::new();
        for entry in &tx.entries {
            let account = self.account(&entry.account)?;
            if account.status == AccountStatus::Closed {
                return Err(LedgerError::AccountClosed(account.id.clone()));
            }
            let signed = entry.amount.minor_units() as i128;
            *delta.entry(&entry.account).or_default() += if entry.direction == account.kind.normal_side() { signed } else { -signed };
        }
        let mut out = BTreeMap::new();
        for (id, change) in delta {
            let current = self.accounts[id].balance.minor_units() as i128;
            let next = current + change;
            if next < 0 {
                return Err(LedgerError::InsufficientFunds(id.clone()));
            }
            let next = u64::try_from(next).map_err(|_| LedgerError::Overflow)?;
            out.insert(id.clone(), Money::from_minor_units(next));
        }
        Ok(out)
    }

    /// Applies a transaction atomically: either every balance moves or none.
    pub fn commit(&mut self, tx: LedgerTransaction) -> Result<TransactionId, LedgerError> {
        let balances = self.resulting_balances(&tx)?;
        debug_assert!(tx.is_balanced(), "committing unbalanced transaction {}", tx.id);
        for (id, balance) in balances {
            if let Some(account) = self.accounts.get_mut(&id) {
                account.balance = balance;
            }
        }
        let id = tx.id.clone();
        self.transactions.push(tx);
        Ok(id)
    }

    pub fn balance_of(&self, id: &AccountId) -> Result<Money, LedgerError> {
        self.account(id).map(|a| a.balance)
    }

    /// Statement rows for transactions committed in `[from, to]`, in commit
    /// order. Running balances account for every earlier transaction, so on
    /// a full range the last row's running balance equals the current
    /// balance.
    pub fn history(&self, id: &AccountId, from: Timestamp, to: Timestamp) -> Result<Vec<HistoryRow>, LedgerError> {
        let account = self.account(id)?;
        if from > to {
            return Err(LedgerError::InvalidRange);
        }
        let normal = account.kind.normal_side();
        let mut running: i128 = 0;
        let mut rows = Vec::new();
        for tx in self.transactions.iter().filter(|tx| tx.touches(id)) {
            let change: i128 = tx
                .entries
                .iter()
                .filter(|e| &e.account == id)
                .map(|e| {
                    let v = e.amount.minor_units() as i128;
                    if e.direction == normal {
                        v
                    } else {
                        -v
                    }
                })
                .sum();
            running += change;
            if tx.at < from || tx.at > to {
                continue;
            }
            let amount = if change >= 0 {
                SignedMoney::credit(Money::from_minor_units(change as u64))
            } else {
                SignedMoney::debit(Money::from_minor_units((-change) as u64))
            };
            rows.push(HistoryRow {
                transaction: tx.id.clone(),
                seq: tx.seq,
                at: tx.at,
                kind: tx.kind,
                memo: tx.memo.clone(),
                reference: tx.reference.clone(),
                amount,
                running_balance: Money::from_minor_units(running.max(0) as u64),
            });
        }
        Ok(rows)
    }
}
