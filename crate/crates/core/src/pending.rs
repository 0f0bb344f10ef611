//! Prepared-but-unconfirmed mutations.
//!
//! Every money movement and biller (de)registration happens in two steps:
//! a prepare call validates the request and stores a [`PendingAction`]
//! echoing what will happen; a confirm call executes it exactly once.
//! Pending actions expire lazily: the first touch after the deadline flips
//! them to expired.

use serde::{Deserialize, Serialize};

use crate::bank::Bank;
use crate::billpay::{BillPaymentRecord, BillerRegistration};
use crate::domain::{AccountId, CorporationId, CustomerId, Money, PendingId, Timestamp};
use crate::error::{BankError, Result};
use crate::state::Event;
use crate::transfer::TransferRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PendingKind {
    Transfer,
    RegisteredPayment,
    OpenPayment,
    BillerRegistration,
    BillerDeregistration,
}

impl PendingKind {
    pub const ALL: [PendingKind; 5] = [
        PendingKind::Transfer,
        PendingKind::RegisteredPayment,
        PendingKind::OpenPayment,
        PendingKind::BillerRegistration,
        PendingKind::BillerDeregistration,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PendingKind::Transfer => "transfer",
            PendingKind::RegisteredPayment => "registered-payment",
            PendingKind::OpenPayment => "open-payment",
            PendingKind::BillerRegistration => "biller-registration",
            PendingKind::BillerDeregistration => "biller-deregistration",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PendingPayload {
    Transfer { from: AccountId, to: AccountId, amount: Money, memo: String },
    RegisteredPayment { corporation: CorporationId, consumer_reference: String, source: AccountId, amount: Money },
    OpenPayment { corporation: CorporationId, consumer_reference: String, source: AccountId, amount: Money },
    BillerRegistration { corporation: CorporationId, consumer_reference: String },
    BillerDeregistration { corporation: CorporationId },
}

impl PendingPayload {
    pub fn kind(&self) -> PendingKind {
        match self {
            PendingPayload::Transfer { .. } => PendingKind::Transfer,
            PendingPayload::RegisteredPayment { .. } => PendingKind::RegisteredPayment,
            PendingPayload::OpenPayment { .. } => PendingKind::OpenPayment,
            PendingPayload::BillerRegistration { .. } => PendingKind::BillerRegistration,
            PendingPayload::BillerDeregistration { .. } => PendingKind::BillerDeregistration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PendingState {
    Pending,
    Confirmed,
    Cancelled,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingAction {
    pub id: PendingId,
    pub customer: CustomerId,
    pub payload: PendingPayload,
    pub created_at: Timestamp,
    pub expires_at: Timestamp,
    pub state: PendingState,
    /// Id of whatever the confirmation produced.
    pub outcome: Option<String>,
    pub closed_at: Option<Timestamp>,
}

impl PendingAction {
    pub fn kind(&self) -> PendingKind {
        self.payload.kind()
    }
}

/// What confirming a pending action produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "result", rename_all = "kebab-case")]
pub enum Confirmation {
    Transfer(TransferRecord),
    RegisteredPayment(BillPaymentRecord),
    OpenPayment(BillPaymentRecord),
    BillerRegistration(BillerRegistration),
    BillerDeregistration(BillerRegistration),
}

impl Bank {
    /// Stores a validated pending action for `customer`.
    pub(crate) fn prepare_pending(&mut self, customer: &CustomerId, payload: PendingPayload) -> Result<PendingAction> {
        let now = self.now();
        let action = PendingAction {
            id: self.state().next_pending_id(),
            customer: customer.clone(),
            payload,
            created_at: now,
            expires_at: now.plus(self.config().pending_ttl),
            state: PendingState::Pending,
            outcome: None,
            closed_at: None,
        };
        self.record(Event::PendingPrepared(action.clone()))?;
        Ok(action)
    }

    pub fn pending(&self, customer: &CustomerId, id: &PendingId) -> Result<&PendingAction> {
        let action = self.state().pending(id).ok_or_else(|| BankError::not_found("pending", id))?;
        if &action.customer != customer {
            return Err(BankError::NotOwner(format!("pending action {id}")));
        }
        Ok(action)
    }

    /// Returns a confirmable action, expiring it first if its deadline has
    /// passed.
    pub(crate) fn claim_pending(&mut self, customer: &CustomerId, id: &PendingId, kinds: &[PendingKind]) -> Result<PendingAction> {
        let action = self.pending(customer, id)?.clone();
        match action.state {
            PendingState::Confirmed | PendingState::Cancelled => {
                return Err(BankError::AlreadyProcessed { pending: id.clone(), record: action.outcome });
            }
            PendingState::Expired => return Err(BankError::ActionExpired(id.clone())),
            PendingState::Pending => {}
        }
        let now = self.now();
        if now > action.expires_at {
            self.record(Event::PendingExpired { pending: id.clone(), at: now })?;
            return Err(BankError::ActionExpired(id.clone()));
        }
        if !kinds.contains(&action.kind()) {
            return Err(BankError::WrongPendingKind(id.clone(), kinds[0].label()));
        }
        Ok(action)
    }

    /// Declines a pending action; it can never be confirmed afterwards.
    pub fn cancel_pending(&mut self, customer: &CustomerId, id: &PendingId) -> Result<()> {
        self.claim_pending(customer, id, &PendingKind::ALL)?;
        let at = self.now();
        self.record(Event::PendingCancelled { pending: id.clone(), at })
    }

    /// Confirms a pending action of any kind.
    pub fn confirm_pending(&mut self, customer: &CustomerId, id: &PendingId) -> Result<Confirmation> {
        let kind = self.pending(customer, id)?.kind();
        Ok(match kind {
            PendingKind::Transfer => Confirmation::Transfer(self.confirm_transfer(customer, id)?),
            PendingKind::RegisteredPayment => Confirmation::RegisteredPayment(self.confirm_payment(customer, id)?),
            PendingKind::OpenPayment => Confirmation::OpenPayment(self.confirm_payment(customer, id)?),
            PendingKind::BillerRegistration => Confirmation::BillerRegistration(self.confirm_registration(customer, id)?),
            PendingKind::BillerDeregistration => Confirmation::BillerDeregistration(self.confirm_deregistration(customer, id)?),
        })
    }
}
