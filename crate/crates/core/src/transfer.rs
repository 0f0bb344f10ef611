//! Fund transfers between accounts held at this bank.

use serde::{Deserialize, Serialize};

use crate::bank::Bank;
use crate::domain::{AccountId, CustomerId, Money, PendingId, Timestamp, TransactionId, TransferId, ValidationError};
use crate::error::{BankError, Result};
use crate::ledger::{TransactionDraft, TransactionKind};
use crate::pending::{PendingAction, PendingKind, PendingPayload};
use crate::state::Event;

pub const MAX_MEMO_LEN: usize = 140;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub id: TransferId,
    pub customer: CustomerId,
    pub from_account: AccountId,
    pub to_account: AccountId,
    pub amount: Money,
    pub memo: String,
    pub committed_tx: TransactionId,
    pub pending: PendingId,
    pub timestamp: Timestamp,
}

pub(crate) fn clean_memo(memo: &str) -> Result<String> {
    let memo = memo.trim();
    if memo.chars().count() > MAX_MEMO_LEN || memo.chars().any(char::is_control) {
        return Err(ValidationError::BadIdentifier { what: "memo", value: memo.chars().take(20).collect() }.into());
    }
    Ok(memo.to_string())
}

impl Bank {
    /// Validates a transfer and returns the pending action to confirm.
    /// Nothing moves yet.
    pub fn prepare_transfer(
        &mut self,
        customer: &CustomerId,
        from: &AccountId,
        to: &AccountId,
        amount: Money,
        memo: &str,
    ) -> Result<PendingAction> {
        if amount.is_zero() {
            return Err(ValidationError::NonPositive.into());
        }
        let memo = clean_memo(memo)?;
        if from == to {
            return Err(BankError::SameAccount);
        }
        let source = self.owned_account(customer, from)?;
        let balance = source.balance;
        self.destination_account(to)?;
        if balance < amount {
            return Err(BankError::InsufficientFunds);
        }
        let payload = PendingPayload::Transfer { from: from.clone(), to: to.clone(), amount, memo };
        self.prepare_pending(customer, payload)
    }

    /// Executes a prepared transfer. Funds are re-checked because balances
    /// may have moved since the transfer was prepared.
    pub fn confirm_transfer(&mut self, customer: &CustomerId, pending: &PendingId) -> Result<TransferRecord> {
        let action = self.claim_pending(customer, pending, &[PendingKind::Transfer])?;
        let PendingPayload::Transfer { from, to, amount, memo } = action.payload else {
            unreachable!("claim_pending checked the kind");
        };
        let id = self.state().next_transfer_id();
        let now = self.now();
        let memo_line = if memo.is_empty() { format!("transfer to {to}") } else { memo.clone() };
        let draft = TransactionDraft::movement(TransactionKind::Transfer, &from, &to, amount).memo(memo_line).reference(id.as_str());
        let transaction = self.state().ledger().draft(draft, now);
        let record = TransferRecord {
            id,
            customer: customer.clone(),
            from_account: from,
            to_account: to,
            amount,
            memo,
            committed_tx: transaction.id.clone(),
            pending: pending.clone(),
            timestamp: now,
        };
        self.record(Event::TransferConfirmed { pending: pending.clone(), record: record.clone(), transaction })?;
        Ok(record)
    }

    /// Confirmed transfers by `customer`, newest first.
    pub fn transfer_history(&self, customer: &CustomerId) -> Vec<TransferRecord> {
        self.state().transfers().rev().filter(|t| &t.customer == customer).cloned().collect()
    }

    pub fn transfer_detail(&self, customer: &CustomerId, id: &TransferId) -> Result<TransferRecord> {
        let record = self.state().transfer(id).ok_or_else(|| BankError::not_found("transfer", id))?;
        if &record.customer != customer {
            return Err(BankError::NotOwner(format!("transfer {id}")));
        }
        Ok(record.clone())
    }
}
