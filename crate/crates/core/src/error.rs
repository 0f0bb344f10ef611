use crate::domain::{PendingId, ValidationError};
use crate::journal::JournalError;
use crate::ledger::LedgerError;
use crate::state::ReplayError;

/// Broad failure classes; the HTTP layer maps each to one status code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Auth,
    Forbidden,
    NotFound,
    Conflict,
    Unprocessable,
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum BankError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("new password rejected: {0}")]
    PolicyViolation(ValidationError),
    #[error(transparent)]
    Ledger(LedgerError),
    #[error("insufficient funds")]
    InsufficientFunds,

    #[error("invalid username or password")]
    InvalidCredentials,
    #[error("account locked after repeated failed logins")]
    AccountLocked,
    #[error("session is not valid")]
    SessionInvalid,
    #[error("session expired")]
    SessionExpired,
    #[error("unknown session token")]
    UnknownToken,
    #[error("current password is incorrect")]
    OldPasswordIncorrect,
    #[error("password confirmation does not match")]
    ConfirmationMismatch,

    #[error("{0} does not belong to this customer")]
    NotOwner(String),
    #[error("source and destination are the same account")]
    SameAccount,
    #[error("unknown {what} {id}")]
    NotFound { what: &'static str, id: String },

    #[error("pending action {pending} was already processed{}", record.as_ref().map(|r| format!(" (record {r})")).unwrap_or_default())]
    AlreadyProcessed { pending: PendingId, record: Option<String> },
    #[error("pending action {0} expired before confirmation")]
    ActionExpired(PendingId),
    #[error("pending action {0} is not a {1}")]
    WrongPendingKind(PendingId, &'static str),

    #[error("card is already cancelled")]
    AlreadyCancelled,
    #[error("no active biller registration for this corporation")]
    NotRegistered,
    #[error("corporation is already registered")]
    AlreadyRegistered,
    #[error("cheque already cleared")]
    AlreadyCleared,
    #[error("cheque already stopped")]
    AlreadyStopped,
    #[error("cheque already bounced")]
    AlreadyBounced,
    #[error("cheque is in a terminal state")]
    TerminalState,
    #[error("cheques draw on current accounts only")]
    WrongAccountKind,
    #[error("cheque books come with 25 or 50 leaves, not {0}")]
    InvalidLeaves(u32),
    #[error("cheque book request already fulfilled")]
    AlreadyFulfilled,
    #[error("cheque numbers exhausted")]
    ChequeNumbersExhausted,
    #[error("{what} '{name}' already exists")]
    Duplicate { what: &'static str, name: String },

    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error(transparent)]
    Replay(Box<ReplayError>),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<LedgerError> for BankError {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::InsufficientFunds(_) => BankError::InsufficientFunds,
            LedgerError::UnknownAccount(id) => BankError::NotFound { what: "account", id: id.to_string() },
            other => BankError::Ledger(other),
        }
    }
}

impl BankError {
    pub(crate) fn not_found(what: &'static str, id: impl ToString) -> Self {
        BankError::NotFound { what, id: id.to_string() }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> String {
        let code: &str = match self {
            Self::Validation(v) => v.code(),
            Self::PolicyViolation(_) => "policy-violation",
            Self::Ledger(l) => l.code(),
            Self::InsufficientFunds => "insufficient-funds",
            Self::InvalidCredentials => "invalid-credentials",
            Self::AccountLocked => "account-locked",
            Self::SessionInvalid => "session-invalid",
            Self::SessionExpired => "session-expired",
            Self::UnknownToken => "unknown-token",
            Self::OldPasswordIncorrect => "old-password-incorrect",
            Self::ConfirmationMismatch => "confirmation-mismatch",
            Self::NotOwner(_) => "not-owner",
            Self::SameAccount => "same-account",
            Self::NotFound { what, .. } => return format!("unknown-{}", what.replace(' ', "-")),
            Self::AlreadyProcessed { .. } => "already-processed",
            Self::ActionExpired(_) => "action-expired",
            Self::WrongPendingKind(..) => "wrong-pending-kind",
            Self::AlreadyCancelled => "already-cancelled",
            Self::NotRegistered => "not-registered",
            Self::AlreadyRegistered => "already-registered",
            Self::AlreadyCleared => "already-cleared",
            Self::AlreadyStopped => "already-stopped",
            Self::AlreadyBounced => "already-bounced",
            Self::TerminalState => "terminal-state",
            Self::WrongAccountKind => "wrong-account-kind",
            Self::InvalidLeaves(_) => "invalid-leaves",
            Self::AlreadyFulfilled => "already-fulfilled",
            Self::ChequeNumbersExhausted => "cheque-numbers-exhausted",
            Self::Duplicate { .. } => "duplicate",
            Self::Journal(j) => j.code(),
            Self::Replay(_) => "replay-failed",
            Self::Internal(_) => "internal",
        };
        code.to_string()
    }

    pub fn class(&self) -> ErrorClass {
        use ErrorClass::*;
        match self {
            Self::Validation(_)
            | Self::PolicyViolation(_)
            | Self::OldPasswordIncorrect
            | Self::ConfirmationMismatch
            | Self::SameAccount
            | Self::WrongAccountKind
            | Self::InvalidLeaves(_) => Validation,
            Self::Ledger(l) => match l {
                LedgerError::InvalidRange => Validation,
                LedgerError::AccountClosed(_) | LedgerError::DuplicateKindForOwner(_) => Conflict,
                LedgerError::Overflow => Unprocessable,
                _ => Internal,
            },
            Self::InsufficientFunds => Unprocessable,
            Self::InvalidCredentials | Self::AccountLocked | Self::SessionInvalid | Self::SessionExpired => Auth,
            Self::NotOwner(_) => Forbidden,
            Self::UnknownToken | Self::NotFound { .. } => NotFound,
            Self::AlreadyProcessed { .. }
            | Self::ActionExpired(_)
            | Self::WrongPendingKind(..)
            | Self::AlreadyCancelled
            | Self::NotRegistered
            | Self::AlreadyRegistered
            | Self::AlreadyCleared
            | Self::AlreadyStopped
            | Self::AlreadyBounced
            | Self::TerminalState
            | Self::AlreadyFulfilled
            | Self::ChequeNumbersExhausted
            | Self::Duplicate { .. } => Conflict,
            Self::Journal(_) | Self::Replay(_) | Self::Internal(_) => Internal,
        }
    }
}

pub type Result<T, E = BankError> = std::result::Result<T, E>;
