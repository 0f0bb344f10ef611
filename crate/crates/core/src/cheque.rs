//! Cheque books, cheque status, stop instructions and presentation.

use serde::{Deserialize, Serialize};

use crate::bank::Bank;
use crate::domain::{AccountId, BookRequestId, ChequeNumber, CustomerId, Money, Timestamp, TransactionId};
use crate::error::{BankError, Result};
use crate::ledger::{AccountKind, TransactionDraft, TransactionKind};
use crate::state::Event;

pub const ALLOWED_LEAVES: [u32; 2] = [25, 50];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChequeStatus {
    Unused,
    Cleared,
    Stopped,
    Bounced,
}

impl ChequeStatus {
    /// The full transition table: an unused cheque can end up cleared,
    /// stopped or bounced, and every other status is terminal.
    pub fn can_become(self, next: ChequeStatus) -> bool {
        use ChequeStatus::*;
        matches!((self, next), (Unused, Cleared) | (Unused, Stopped) | (Unused, Bounced))
    }

    pub fn is_terminal(self) -> bool {
        self != ChequeStatus::Unused
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cheque {
    pub number: ChequeNumber,
    pub account: AccountId,
    pub book: BookRequestId,
    pub status: ChequeStatus,
    /// Known once the cheque is presented.
    pub amount: Option<Money>,
    pub presented_at: Option<Timestamp>,
    pub stopped_at: Option<Timestamp>,
    pub transaction: Option<TransactionId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BookStatus {
    Requested,
    Fulfilled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChequeBookRequest {
    pub id: BookRequestId,
    pub customer: CustomerId,
    pub account: AccountId,
    pub leaves: u32,
    pub status: BookStatus,
    pub requested_at: Timestamp,
    pub fulfilled_at: Option<Timestamp>,
    pub assigned_range: Option<(ChequeNumber, ChequeNumber)>,
}

/// Result of presenting a cheque for payment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Presentment {
    Cleared {
        transaction: TransactionId,
    },
    /// Not enough funds; nothing was posted.
    Bounced,
    /// The cheque was stopped; nothing was posted.
    Rejected,
}

impl Bank {
    fn owned_cheque(&self, customer: &CustomerId, number: &ChequeNumber) -> Result<&Cheque> {
        let cheque = self.state().cheque(number).ok_or_else(|| BankError::not_found("cheque", number))?;
        self.owned_account(customer, &cheque.account).map_err(|e| match e {
            BankError::NotOwner(_) => BankError::NotOwner(format!("cheque {number}")),
            other => other,
        })?;
        Ok(cheque)
    }

    pub fn cheque_status(&self, customer: &CustomerId, number: &ChequeNumber) -> Result<Cheque> {
        self.owned_cheque(customer, number).cloned()
    }

    /// Stops an unused cheque. A nonzero stop fee is charged to the
    /// cheque's account in the same step.
    pub fn stop_cheque(&mut self, customer: &CustomerId, number: &ChequeNumber) -> Result<Cheque> {
        let cheque = self.owned_cheque(customer, number)?.clone();
        match cheque.status {
            ChequeStatus::Cleared => return Err(BankError::AlreadyCleared),
            ChequeStatus::Stopped => return Err(BankError::AlreadyStopped),
            ChequeStatus::Bounced => return Err(BankError::AlreadyBounced),
            ChequeStatus::Unused => {}
        }
        let fee_amount = self.config().stop_cheque_fee;
        let fee = if fee_amount.is_zero() {
            None
        } else {
            if self.state().ledger().balance_of(&cheque.account)? < fee_amount {
                return Err(BankError::InsufficientFunds);
            }
            let income = self.ensure_bank_account(AccountKind::FeeIncome)?;
            let draft = TransactionDraft::movement(TransactionKind::Fee, &cheque.account, &income, fee_amount)
                .memo(format!("stop cheque {number} fee"))
                .reference(number.as_str());
            Some(self.state().ledger().draft(draft, self.now()))
        };
        let at = self.now();
        self.record(Event::ChequeStopped { number: number.clone(), at, fee })?;
        Ok(self.state().cheque(number).cloned().expect("cheque exists"))
    }

    pub fn request_cheque_book(&mut self, customer: &CustomerId, account: &AccountId, leaves: u32) -> Result<ChequeBookRequest> {
        let acct = self.owned_account(customer, account)?;
        if acct.kind != AccountKind::Current {
            return Err(BankError::WrongAccountKind);
        }
        if !ALLOWED_LEAVES.contains(&leaves) {
            return Err(BankError::InvalidLeaves(leaves));
        }
        let request = ChequeBookRequest {
            id: self.state().next_book_id(),
            customer: customer.clone(),
            account: account.clone(),
            leaves,
            status: BookStatus::Requested,
            requested_at: self.now(),
            fulfilled_at: None,
            assigned_range: None,
        };
        self.record(Event::ChequeBookRequested(request.clone()))?;
        Ok(request)
    }

    /// Cheque book requests still waiting for fulfilment, oldest first.
    pub fn open_book_requests(&self) -> Vec<ChequeBookRequest> {
        self.state().cheque_books().filter(|b| b.status == BookStatus::Requested).cloned().collect()
    }

    /// Assigns the next consecutive run of cheque numbers to a request.
    pub fn fulfill_cheque_book(&mut self, request: &BookRequestId) -> Result<ChequeBookRequest> {
        let book = self.state().cheque_book(request).ok_or_else(|| BankError::not_found("cheque book request", request))?;
        if book.status == BookStatus::Fulfilled {
            return Err(BankError::AlreadyFulfilled);
        }
        let first_serial = self.state().next_cheque_serial();
        let last_serial = first_serial + u64::from(book.leaves) - 1;
        let (Some(first), Some(last)) = (ChequeNumber::from_serial(first_serial), ChequeNumber::from_serial(last_serial)) else {
            return Err(BankError::ChequeNumbersExhausted);
        };
        let at = self.now();
        self.record(Event::ChequeBookFulfilled { request: request.clone(), first, last, at })?;
        Ok(self.state().cheque_book(request).cloned().expect("request exists"))
    }

    /// Presents a cheque for payment. Unused cheques clear when the drawer
    /// has the funds and bounce otherwise; stopped cheques are rejected.
    pub fn present_cheque(&mut self, number: &ChequeNumber, amount: Money) -> Result<Presentment> {
        if amount.is_zero() {
            return Err(crate::domain::ValidationError::NonPositive.into());
        }
        let cheque = self.state().cheque(number).ok_or_else(|| BankError::not_found("cheque", number))?.clone();
        match cheque.status {
            ChequeStatus::Stopped => return Ok(Presentment::Rejected),
            ChequeStatus::Cleared | ChequeStatus::Bounced => return Err(BankError::TerminalState),
            ChequeStatus::Unused => {}
        }
        let at = self.now();
        if self.state().ledger().balance_of(&cheque.account)? < amount {
            self.record(Event::ChequeBounced { number: number.clone(), amount, at })?;
            return Ok(Presentment::Bounced);
        }
        let clearing = self.ensure_bank_account(AccountKind::ChequeClearing)?;
        let draft = TransactionDraft::movement(TransactionKind::ChequeClearing, &cheque.account, &clearing, amount)
            .memo(format!("cheque {number}"))
            .reference(number.as_str());
        let transaction = self.state().ledger().draft(draft, at);
        let id = transaction.id.clone();
        self.record(Event::ChequeCleared { number: number.clone(), amount, at, transaction })?;
        Ok(Presentment::Cleared { transaction: id })
    }
}
