//! Bill payments to corporations.
//!
//! A *registered* payment draws its consumer reference from a stored
//! biller registration; an *open* payment carries a caller-supplied
//! reference and needs no registration. Either way the money lands in the
//! corporation's settlement account.

use serde::{Deserialize, Serialize};

use crate::bank::Bank;
use crate::domain::{AccountId, CorporationId, CustomerId, Money, PaymentId, PendingId, Timestamp, TransactionId, ValidationError};
use crate::error::{BankError, Result};
use crate::ledger::{AccountKind, Owner, TransactionDraft, TransactionKind};
use crate::pending::{PendingAction, PendingKind, PendingPayload};
use crate::state::Event;

pub const MAX_REFERENCE_LEN: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corporation {
    pub id: CorporationId,
    pub name: String,
    pub settlement_account: AccountId,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BillerRegistration {
    pub customer: CustomerId,
    pub corporation: CorporationId,
    pub consumer_reference: String,
    pub registered_at: Timestamp,
    pub deregistered_at: Option<Timestamp>,
    pub active: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaymentKind {
    Registered,
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BillPaymentRecord {
    pub id: PaymentId,
    pub customer: CustomerId,
    pub corporation: CorporationId,
    pub kind: PaymentKind,
    pub consumer_reference: String,
    pub source_account: AccountId,
    pub amount: Money,
    pub committed_tx: TransactionId,
    pub pending: PendingId,
    pub timestamp: Timestamp,
}

fn clean_reference(reference: &str) -> Result<String> {
    let reference = reference.trim();
    if reference.is_empty() {
        return Err(ValidationError::EmptyField("consumer reference").into());
    }
    if reference.chars().count() > MAX_REFERENCE_LEN || reference.chars().any(char::is_control) {
        return Err(ValidationError::BadIdentifier { what: "consumer reference", value: reference.to_string() }.into());
    }
    Ok(reference.to_string())
}

impl Bank {
    /// Registers a corporation that customers can pay, with its own
    /// settlement account.
    pub fn add_corporation(&mut self, name: &str) -> Result<Corporation> {
        let name = name.trim();
        if name.is_empty() {
            return Err(ValidationError::EmptyField("corporation name").into());
        }
        if self.state().corporations().any(|c| c.name.eq_ignore_ascii_case(name)) {
            return Err(BankError::Duplicate { what: "corporation", name: name.to_string() });
        }
        let id = self.state().next_corporation_id();
        let now = self.now();
        let settlement = self.state().ledger().plan_account(Owner::Corporation(id.clone()), AccountKind::CorporationSettlement, now)?;
        let corporation = Corporation { id, name: name.to_string(), settlement_account: settlement.id.clone(), active: true };
        self.record(Event::CorporationAdded { corporation: corporation.clone(), settlement })?;
        Ok(corporation)
    }

    pub fn deactivate_corporation(&mut self, id: &CorporationId) -> Result<()> {
        let corp = self.state().corporation(id).ok_or_else(|| BankError::not_found("corporation", id))?;
        if !corp.active {
            return Ok(());
        }
        self.record(Event::CorporationDeactivated { corporation: id.clone() })
    }

    /// Corporations in name order.
    pub fn list_corporations(&self, active_only: bool) -> Vec<Corporation> {
        let mut out: Vec<Corporation> = self.state().corporations().filter(|c| c.active || !active_only).cloned().collect();
        out.sort_by(|a, b| a.name.to_lowercase().cmp(&b.name.to_lowercase()).then_with(|| a.id.cmp(&b.id)));
        out
    }

    fn active_corporation(&self, id: &CorporationId) -> Result<&Corporation> {
        match self.state().corporation(id) {
            Some(c) if c.active => Ok(c),
            _ => Err(BankError::not_found("corporation", id)),
        }
    }

    /// Active registrations of `customer`, in corporation name order.
    pub fn list_registered_billers(&self, customer: &CustomerId) -> Vec<(Corporation, String)> {
        let mut out: Vec<(Corporation, String)> = self
            .state()
            .registrations()
            .filter(|r| r.active && &r.customer == customer)
            .filter_map(|r| self.state().corporation(&r.corporation).map(|c| (c.clone(), r.consumer_reference.clone())))
            .collect();
        out.sort_by_key(|(c, _)| c.name.to_lowercase());
        out
    }

    fn check_payment_source(&self, customer: &CustomerId, source: &AccountId, amount: Money) -> Result<()> {
        if amount.is_zero() {
            return Err(ValidationError::NonPositive.into());
        }
        if self.owned_account(customer, source)?.balance < amount {
            return Err(BankError::InsufficientFunds);
        }
        Ok(())
    }

    pub fn prepare_registered_payment(
        &mut self,
        customer: &CustomerId,
        corporation: &CorporationId,
        source: &AccountId,
        amount: Money,
    ) -> Result<PendingAction> {
        self.active_corporation(corporation)?;
        let registration = self.state().active_registration(customer, corporation).ok_or(BankError::NotRegistered)?.clone();
        self.check_payment_source(customer, source, amount)?;
        let payload = PendingPayload::RegisteredPayment {
            corporation: corporation.clone(),
            consumer_reference: registration.consumer_reference,
            source: source.clone(),
            amount,
        };
        self.prepare_pending(customer, payload)
    }

    pub fn prepare_open_payment(
        &mut self,
        customer: &CustomerId,
        corporation: &CorporationId,
        consumer_reference: &str,
        source: &AccountId,
        amount: Money,
    ) -> Result<PendingAction> {
        self.active_corporation(corporation)?;
        let consumer_reference = clean_reference(consumer_reference)?;
        self.check_payment_source(customer, source, amount)?;
        let payload = PendingPayload::OpenPayment { corporation: corporation.clone(), consumer_reference, source: source.clone(), amount };
        self.prepare_pending(customer, payload)
    }

    /// Executes a prepared registered or open payment.
    pub fn confirm_payment(&mut self, customer: &CustomerId, pending: &PendingId) -> Result<BillPaymentRecord> {
        let action = self.claim_pending(customer, pending, &[PendingKind::RegisteredPayment, PendingKind::OpenPayment])?;
        let (kind, corporation, consumer_reference, source, amount) = match action.payload {
            PendingPayload::RegisteredPayment { corporation, consumer_reference, source, amount } => {
                (PaymentKind::Registered, corporation, consumer_reference, source, amount)
            }
            PendingPayload::OpenPayment { corporation, consumer_reference, source, amount } => {
                (PaymentKind::Open, corporation, consumer_reference, source, amount)
            }
            _ => unreachable!("claim_pending checked the kind"),
        };
        let settlement = self.active_corporation(&corporation)?.settlement_account.clone();
        if kind == PaymentKind::Registered && self.state().active_registration(customer, &corporation).is_none() {
            return Err(BankError::NotRegistered);
        }
        let id = self.state().next_payment_id();
        let now = self.now();
        let draft = TransactionDraft::movement(TransactionKind::BillPayment, &source, &settlement, amount)
            .memo(format!("bill payment {corporation} ref {consumer_reference}"))
            .reference(id.as_str());
        let transaction = self.state().ledger().draft(draft, now);
        let record = BillPaymentRecord {
            id,
            customer: customer.clone(),
            corporation,
            kind,
            consumer_reference,
            source_account: source,
            amount,
            committed_tx: transaction.id.clone(),
            pending: pending.clone(),
            timestamp: now,
        };
        self.record(Event::BillPaymentConfirmed { pending: pending.clone(), record: record.clone(), transaction })?;
        Ok(record)
    }

    /// First step of registering a biller.
    pub fn register_biller(
        &mut self,
        customer: &CustomerId,
        corporation: &CorporationId,
        consumer_reference: &str,
    ) -> Result<PendingAction> {
        self.active_corporation(corporation)?;
        let consumer_reference = clean_reference(consumer_reference)?;
        if self.state().active_registration(customer, corporation).is_some() {
            return Err(BankError::AlreadyRegistered);
        }
        let payload = PendingPayload::BillerRegistration { corporation: corporation.clone(), consumer_reference };
        self.prepare_pending(customer, payload)
    }

    pub fn confirm_registration(&mut self, customer: &CustomerId, pending: &PendingId) -> Result<BillerRegistration> {
        let action = self.claim_pending(customer, pending, &[PendingKind::BillerRegistration])?;
        let PendingPayload::BillerRegistration { corporation, consumer_reference } = action.payload else {
            unreachable!("claim_pending checked the kind");
        };
        self.active_corporation(&corporation)?;
        if self.state().active_registration(customer, &corporation).is_some() {
            return Err(BankError::AlreadyRegistered);
        }
        let registration = BillerRegistration {
            customer: customer.clone(),
            corporation,
            consumer_reference,
            registered_at: self.now(),
            deregistered_at: None,
            active: true,
        };
        self.record(Event::BillerRegistered { pending: pending.clone(), registration: registration.clone() })?;
        Ok(registration)
    }

    /// First step of removing a biller registration.
    pub fn deregister_biller(&mut self, customer: &CustomerId, corporation: &CorporationId) -> Result<PendingAction> {
        if self.state().corporation(corporation).is_none() {
            return Err(BankError::not_found("corporation", corporation));
        }
        if self.state().active_registration(customer, corporation).is_none() {
            return Err(BankError::NotRegistered);
        }
        self.prepare_pending(customer, PendingPayload::BillerDeregistration { corporation: corporation.clone() })
    }

    /// Deactivates the registration; past payments are left untouched.
    pub fn confirm_deregistration(&mut self, customer: &CustomerId, pending: &PendingId) -> Result<BillerRegistration> {
        let action = self.claim_pending(customer, pending, &[PendingKind::BillerDeregistration])?;
        let PendingPayload::BillerDeregistration { corporation } = action.payload else {
            unreachable!("claim_pending checked the kind");
        };
        let mut registration = self.state().active_registration(customer, &corporation).ok_or(BankError::NotRegistered)?.clone();
        let at = self.now();
        self.record(Event::BillerDeregistered { pending: pending.clone(), customer: customer.clone(), corporation, at })?;
        registration.active = false;
        registration.deregistered_at = Some(at);
        Ok(registration)
    }

    /// Confirmed bill payments of both kinds, newest first.
    pub fn payment_history(&self, customer: &CustomerId) -> Vec<BillPaymentRecord> {
        self.state().payments().rev().filter(|p| &p.customer == customer).cloned().collect()
    }
}
