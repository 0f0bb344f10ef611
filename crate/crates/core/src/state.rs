//! The persisted system state and the events that change it.
//!
//! Services validate a request, describe the outcome as one [`Event`], and
//! hand it to [`State::apply`]. Replaying the journal is nothing more than
//! applying every recorded event again, so each event carries everything
//! its effect depends on (generated ids, salts, timestamps, ledger
//! transactions) and `apply` is a pure function of state and event.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::billpay::{BillPaymentRecord, BillerRegistration, Corporation};
use crate::cheque::{BookStatus, Cheque, ChequeBookRequest, ChequeStatus};
use crate::customer::{CardStatus, Credential, CustomerProfile, Customers};
use crate::domain::{
    AccountId, BookRequestId, CardId, ChequeNumber, CorporationId, CustomerId, EmailAddress, Money, PaymentId, PendingId, Timestamp,
    TransferId,
};
use crate::error::{BankError, Result};
use crate::journal::{canonical_json, JournalRecord};
use crate::ledger::{Account, AccountKind, Direction, Ledger, LedgerTransaction, Owner, TransactionKind};
use crate::pending::{PendingAction, PendingKind, PendingPayload, PendingState};
use crate::transfer::TransferRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    AccountOpened(Account),
    CustomerAdded { profile: CustomerProfile, accounts: Vec<Account> },
    CorporationAdded { corporation: Corporation, settlement: Account },
    CorporationDeactivated { corporation: CorporationId },
    DepositPosted(LedgerTransaction),
    LoginFailed { customer: CustomerId, at: Timestamp },
    LoginFailuresCleared { customer: CustomerId },
    CustomerUnlocked { customer: CustomerId },
    PasswordChanged { customer: CustomerId, credential: Credential, at: Timestamp },
    ProfileUpdated { customer: CustomerId, email: EmailAddress, phone: String, address: String, at: Timestamp },
    AtmCardCancelled { customer: CustomerId, card: CardId, at: Timestamp },
    PendingPrepared(PendingAction),
    PendingCancelled { pending: PendingId, at: Timestamp },
    PendingExpired { pending: PendingId, at: Timestamp },
    TransferConfirmed { pending: PendingId, record: TransferRecord, transaction: LedgerTransaction },
    BillPaymentConfirmed { pending: PendingId, record: BillPaymentRecord, transaction: LedgerTransaction },
    BillerRegistered { pending: PendingId, registration: BillerRegistration },
    BillerDeregistered { pending: PendingId, customer: CustomerId, corporation: CorporationId, at: Timestamp },
    ChequeBookRequested(ChequeBookRequest),
    ChequeBookFulfilled { request: BookRequestId, first: ChequeNumber, last: ChequeNumber, at: Timestamp },
    ChequeStopped { number: ChequeNumber, at: Timestamp, fee: Option<LedgerTransaction> },
    ChequeCleared { number: ChequeNumber, amount: Money, at: Timestamp, transaction: LedgerTransaction },
    ChequeBounced { number: ChequeNumber, amount: Money, at: Timestamp },
}

impl Event {
    /// The journal tag of this event.
    pub fn kind(&self) -> &'static str {
        match self {
            Event::AccountOpened(_) => "account_opened",
            Event::CustomerAdded { .. } => "customer_added",
            Event::CorporationAdded { .. } => "corporation_added",
            Event::CorporationDeactivated { .. } => "corporation_deactivated",
            Event::DepositPosted(_) => "deposit_posted",
            Event::LoginFailed { .. } => "login_failed",
            Event::LoginFailuresCleared { .. } => "login_failures_cleared",
            Event::CustomerUnlocked { .. } => "customer_unlocked",
            Event::PasswordChanged { .. } => "password_changed",
            Event::ProfileUpdated { .. } => "profile_updated",
            Event::AtmCardCancelled { .. } => "atm_card_cancelled",
            Event::PendingPrepared(_) => "pending_prepared",
            Event::PendingCancelled { .. } => "pending_cancelled",
            Event::PendingExpired { .. } => "pending_expired",
            Event::TransferConfirmed { .. } => "transfer_confirmed",
            Event::BillPaymentConfirmed { .. } => "bill_payment_confirmed",
            Event::BillerRegistered { .. } => "biller_registered",
            Event::BillerDeregistered { .. } => "biller_deregistered",
            Event::ChequeBookRequested(_) => "cheque_book_requested",
            Event::ChequeBookFulfilled { .. } => "cheque_book_fulfilled",
            Event::ChequeStopped { .. } => "cheque_stopped",
            Event::ChequeCleared { .. } => "cheque_cleared",
            Event::ChequeBounced { .. } => "cheque_bounced",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    ledger: Ledger,
    customers: Customers,
    corporations: BTreeMap<CorporationId, Corporation>,
    pendings: BTreeMap<PendingId, PendingAction>,
    transfers: BTreeMap<TransferId, TransferRecord>,
    payments: BTreeMap<PaymentId, BillPaymentRecord>,
    registrations: Vec<BillerRegistration>,
    cheques: BTreeMap<ChequeNumber, Cheque>,
    cheque_books: BTreeMap<BookRequestId, ChequeBookRequest>,
    last_sequence: u64,
}

#[derive(Debug, thiserror::Error)]
#[error("event {sequence} ({kind}) cannot be applied: {source}")]
pub struct ReplayError {
    pub sequence: u64,
    pub kind: &'static str,
    #[source]
    pub source: BankError,
}

fn invalid(reason: impl Into<String>) -> BankError {
    BankError::Internal(reason.into())
}

impl State {
    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn customers(&self) -> &Customers {
        &self.customers
    }

    pub fn corporations(&self) -> impl DoubleEndedIterator<Item = &Corporation> {
        self.corporations.values()
    }

    pub fn corporation(&self, id: &CorporationId) -> Option<&Corporation> {
        self.corporations.get(id)
    }

    pub fn pendings(&self) -> impl DoubleEndedIterator<Item = &PendingAction> {
        self.pendings.values()
    }

    pub fn pending(&self, id: &PendingId) -> Option<&PendingAction> {
        self.pendings.get(id)
    }

    pub fn transfers(&self) -> impl DoubleEndedIterator<Item = &TransferRecord> {
        self.transfers.values()
    }

    pub fn transfer(&self, id: &TransferId) -> Option<&TransferRecord> {
        self.transfers.get(id)
    }

    pub fn payments(&self) -> impl DoubleEndedIterator<Item = &BillPaymentRecord> {
        self.payments.values()
    }

    pub fn registrations(&self) -> impl DoubleEndedIterator<Item = &BillerRegistration> {
        self.registrations.iter()
    }

    pub fn active_registration(&self, customer: &CustomerId, corporation: &CorporationId) -> Option<&BillerRegistration> {
        self.registrations.iter().find(|r| r.active && &r.customer == customer && &r.corporation == corporation)
    }

    pub fn cheques(&self) -> impl DoubleEndedIterator<Item = &Cheque> {
        self.cheques.values()
    }

    pub fn cheque(&self, number: &ChequeNumber) -> Option<&Cheque> {
        self.cheques.get(number)
    }

    pub fn cheque_books(&self) -> impl DoubleEndedIterator<Item = &ChequeBookRequest> {
        self.cheque_books.values()
    }

    pub fn cheque_book(&self, id: &BookRequestId) -> Option<&ChequeBookRequest> {
        self.cheque_books.get(id)
    }

    pub fn last_sequence(&self) -> u64 {
        self.last_sequence
    }

    pub fn next_customer_id(&self) -> CustomerId {
        CustomerId::from_serial(self.customers.len() + 1)
    }

    pub fn next_corporation_id(&self) -> CorporationId {
        CorporationId::from_serial(self.corporations.len() + 1)
    }

    pub fn next_card_id(&self) -> CardId {
        CardId::from_serial(self.customers.card_count() + 1)
    }

    pub fn next_pending_id(&self) -> PendingId {
        PendingId::from_serial(self.pendings.len() + 1)
    }

    pub fn next_transfer_id(&self) -> TransferId {
        TransferId::from_serial(self.transfers.len() + 1)
    }

    pub fn next_payment_id(&self) -> PaymentId {
        PaymentId::from_serial(self.payments.len() + 1)
    }

    pub fn next_book_id(&self) -> BookRequestId {
        BookRequestId::from_serial(self.cheque_books.len() + 1)
    }

    pub fn next_cheque_serial(&self) -> u64 {
        self.cheques.keys().next_back().map_or(1, |n| n.serial() + 1)
    }

    pub fn bank_account(&self, kind: AccountKind) -> Option<&Account> {
        self.ledger.accounts_of(&Owner::Bank).find(|a| a.kind == kind)
    }

    /// Canonical serialization; equal states produce identical bytes.
    pub fn canonical(&self) -> String {
        canonical_json(self).expect("state always serializes")
    }

    /// Checks that `event` would apply cleanly, without applying it.
    pub fn check(&self, event: &Event) -> Result<()> {
        self.validate(event)
    }

    /// Applies one event at `sequence`, all or nothing.
    pub fn apply(&mut self, sequence: u64, event: &Event) -> Result<()> {
        if sequence != self.last_sequence + 1 {
            return Err(invalid(format!("sequence {sequence} does not follow {}", self.last_sequence)));
        }
        self.validate(event)?;
        self.mutate(event);
        self.last_sequence = sequence;
        Ok(())
    }

    /// Rebuilds state by applying `records` on top of `self`. Records at or
    /// below the current sequence (already folded into a snapshot) are
    /// skipped.
    pub fn replay<'a>(mut self, records: impl IntoIterator<Item = &'a JournalRecord<Event>>) -> Result<State, ReplayError> {
        for record in records {
            if record.sequence <= self.last_sequence {
                continue;
            }
            self.apply(record.sequence, &record.event).map_err(|source| ReplayError {
                sequence: record.sequence,
                kind: record.event.kind(),
                source,
            })?;
        }
        Ok(self)
    }

    fn customer(&self, id: &CustomerId) -> Result<&CustomerProfile> {
        self.customers.get(id).ok_or_else(|| BankError::not_found("customer", id))
    }

    fn open_pending(&self, id: &PendingId, kind: PendingKind) -> Result<&PendingAction> {
        let p = self.pendings.get(id).ok_or_else(|| BankError::not_found("pending", id))?;
        if p.state != PendingState::Pending {
            return Err(BankError::AlreadyProcessed { pending: id.clone(), record: p.outcome.clone() });
        }
        if p.kind() != kind {
            return Err(BankError::WrongPendingKind(id.clone(), kind.label()));
        }
        Ok(p)
    }

    fn unused_cheque(&self, number: &ChequeNumber, next: ChequeStatus) -> Result<&Cheque> {
        let cheque = self.cheques.get(number).ok_or_else(|| BankError::not_found("cheque", number))?;
        if !cheque.status.can_become(next) {
            return Err(BankError::TerminalState);
        }
        Ok(cheque)
    }

    fn check_owner(&self, owner: &Owner) -> Result<()> {
        match owner {
            Owner::Customer(id) => self.customer(id).map(|_| ()),
            Owner::Corporation(id) => self.corporations.get(id).map(|_| ()).ok_or_else(|| BankError::not_found("owner", id)),
            Owner::Bank => Ok(()),
        }
    }

    fn validate(&self, event: &Event) -> Result<()> {
        match event {
            Event::AccountOpened(account) => {
                self.check_owner(&account.owner)?;
                self.ledger.check_account(account)?;
            }
            Event::CustomerAdded { profile, accounts } => {
                if profile.id != self.next_customer_id() {
                    return Err(invalid(format!("customer id {} out of order", profile.id)));
                }
                if self.customers.by_username(&profile.username).is_some() {
                    return Err(BankError::Duplicate { what: "username", name: profile.username.clone() });
                }
                let owner = Owner::Customer(profile.id.clone());
                if accounts.iter().any(|a| a.owner != owner) {
                    return Err(invalid("customer accounts must belong to the new customer"));
                }
                self.ledger.check_new_accounts(accounts)?;
                let first_card = self.customers.card_count() + 1;
                for (i, card) in profile.atm_cards.iter().enumerate() {
                    if card.id != CardId::from_serial(first_card + i) || card.status != CardStatus::Active {
                        return Err(invalid(format!("card {} out of order", card.id)));
                    }
                }
            }
            Event::CorporationAdded { corporation, settlement } => {
                if corporation.id != self.next_corporation_id() {
                    return Err(invalid(format!("corporation id {} out of order", corporation.id)));
                }
                if settlement.kind != AccountKind::CorporationSettlement
                    || settlement.owner != Owner::Corporation(corporation.id.clone())
                    || settlement.id != corporation.settlement_account
                {
                    return Err(invalid("corporation needs its own settlement account"));
                }
                if self.corporations.values().any(|c| c.name.eq_ignore_ascii_case(&corporation.name)) {
                    return Err(BankError::Duplicate { what: "corporation", name: corporation.name.clone() });
                }
                self.ledger.check_account(settlement)?;
            }
            Event::CorporationDeactivated { corporation } => {
                self.corporations.get(corporation).ok_or_else(|| BankError::not_found("corporation", corporation))?;
            }
            Event::DepositPosted(tx) => {
                if tx.kind != TransactionKind::SeedDeposit {
                    return Err(invalid("deposits must be seed-deposit transactions"));
                }
                self.ledger.check(tx)?;
            }
            Event::LoginFailed { customer, .. }
            | Event::LoginFailuresCleared { customer }
            | Event::CustomerUnlocked { customer }
            | Event::PasswordChanged { customer, .. }
            | Event::ProfileUpdated { customer, .. } => {
                self.customer(customer)?;
            }
            Event::AtmCardCancelled { customer, card, .. } => {
                let profile = self.customer(customer)?;
                match profile.card(card) {
                    None => return Err(BankError::not_found("card", card)),
                    Some(c) if c.status == CardStatus::Cancelled => return Err(BankError::AlreadyCancelled),
                    Some(_) => {}
                }
            }
            Event::PendingPrepared(action) => {
                if action.id != self.next_pending_id() || action.state != PendingState::Pending {
                    return Err(invalid(format!("pending action {} out of order", action.id)));
                }
                self.customer(&action.customer)?;
            }
            Event::PendingCancelled { pending, .. } | Event::PendingExpired { pending, .. } => {
                let p = self.pendings.get(pending).ok_or_else(|| BankError::not_found("pending", pending))?;
                self.open_pending(pending, p.kind())?;
            }
            Event::TransferConfirmed { pending, record, transaction } => {
                let p = self.open_pending(pending, PendingKind::Transfer)?;
                if record.id != self.next_transfer_id() || record.committed_tx != transaction.id || p.customer != record.customer {
                    return Err(invalid("transfer record does not match its pending action"));
                }
                self.ledger.check(transaction)?;
            }
            Event::BillPaymentConfirmed { pending, record, transaction } => {
                let p = self.pendings.get(pending).ok_or_else(|| BankError::not_found("pending", pending))?;
                let kind = p.kind();
                if !matches!(kind, PendingKind::RegisteredPayment | PendingKind::OpenPayment) {
                    return Err(BankError::WrongPendingKind(pending.clone(), "payment"));
                }
                self.open_pending(pending, kind)?;
                if record.id != self.next_payment_id() || record.committed_tx != transaction.id || p.customer != record.customer {
                    return Err(invalid("payment record does not match its pending action"));
                }
                if kind == PendingKind::RegisteredPayment && self.active_registration(&record.customer, &record.corporation).is_none() {
                    return Err(BankError::NotRegistered);
                }
                self.ledger.check(transaction)?;
            }
            Event::BillerRegistered { pending, registration } => {
                self.open_pending(pending, PendingKind::BillerRegistration)?;
                if !registration.active {
                    return Err(invalid("new registrations are active"));
                }
                if self.active_registration(&registration.customer, &registration.corporation).is_some() {
                    return Err(BankError::AlreadyRegistered);
                }
            }
            Event::BillerDeregistered { pending, customer, corporation, .. } => {
                self.open_pending(pending, PendingKind::BillerDeregistration)?;
                if self.active_registration(customer, corporation).is_none() {
                    return Err(BankError::NotRegistered);
                }
            }
            Event::ChequeBookRequested(request) => {
                if request.id != self.next_book_id() || request.status != BookStatus::Requested {
                    return Err(invalid(format!("cheque book request {} out of order", request.id)));
                }
                let account = self.ledger.account(&request.account)?;
                if account.kind != AccountKind::Current || account.owner != Owner::Customer(request.customer.clone()) {
                    return Err(BankError::WrongAccountKind);
                }
            }
            Event::ChequeBookFulfilled { request, first, last, .. } => {
                let book = self.cheque_books.get(request).ok_or_else(|| BankError::not_found("cheque book request", request))?;
                if book.status != BookStatus::Requested {
                    return Err(BankError::AlreadyFulfilled);
                }
                if first.serial() != self.next_cheque_serial() || last.serial() + 1 - first.serial() != u64::from(book.leaves) {
                    return Err(invalid("cheque range must be the next consecutive run"));
                }
            }
            Event::ChequeStopped { number, fee, .. } => {
                let cheque = self.unused_cheque(number, ChequeStatus::Stopped)?;
                if let Some(fee) = fee {
                    if fee.kind != TransactionKind::Fee || !fee.entries.iter().any(|e| e.account == cheque.account) {
                        return Err(invalid("stop fee must be charged to the cheque's account"));
                    }
                    self.ledger.check(fee)?;
                }
            }
            Event::ChequeCleared { number, amount, transaction, .. } => {
                let cheque = self.unused_cheque(number, ChequeStatus::Cleared)?;
                let debits_drawer = transaction
                    .entries
                    .iter()
                    .any(|e| e.account == cheque.account && e.direction == Direction::Debit && e.amount == *amount);
                if transaction.kind != TransactionKind::ChequeClearing || !debits_drawer {
                    return Err(invalid("clearing must debit the drawer's account"));
                }
                self.ledger.check(transaction)?;
            }
            Event::ChequeBounced { number, .. } => {
                self.unused_cheque(number, ChequeStatus::Bounced)?;
            }
        }
        Ok(())
    }

    fn close_pending(&mut self, id: &PendingId, state: PendingState, outcome: Option<String>, at: Timestamp) {
        if let Some(p) = self.pendings.get_mut(id) {
            p.state = state;
            p.outcome = outcome;
            p.closed_at = Some(at);
        }
    }

    fn commit(&mut self, tx: &LedgerTransaction) {
        self.ledger.commit(tx.clone()).expect("validated transaction commits");
    }

    fn mutate(&mut self, event: &Event) {
        match event {
            Event::AccountOpened(account) => {
                self.ledger.insert_account(account.clone()).expect("validated account");
            }
            Event::CustomerAdded { profile, accounts } => {
                self.customers.insert(profile.clone());
                for account in accounts {
                    self.ledger.insert_account(account.clone()).expect("validated account");
                }
            }
            Event::CorporationAdded { corporation, settlement } => {
                self.corporations.insert(corporation.id.clone(), corporation.clone());
                self.ledger.insert_account(settlement.clone()).expect("validated account");
            }
            Event::CorporationDeactivated { corporation } => {
                if let Some(c) = self.corporations.get_mut(corporation) {
                    c.active = false;
                }
            }
            Event::DepositPosted(tx) => self.commit(tx),
            Event::LoginFailed { customer, .. } => {
                if let Some(p) = self.customers.get_mut(customer) {
                    p.failed_logins = p.failed_logins.saturating_add(1);
                }
            }
            Event::LoginFailuresCleared { customer } | Event::CustomerUnlocked { customer } => {
                if let Some(p) = self.customers.get_mut(customer) {
                    p.failed_logins = 0;
                }
            }
            Event::PasswordChanged { customer, credential, .. } => {
                if let Some(p) = self.customers.get_mut(customer) {
                    p.credential = credential.clone();
                }
            }
            Event::ProfileUpdated { customer, email, phone, address, .. } => {
                if let Some(p) = self.customers.get_mut(customer) {
                    p.email = email.clone();
                    p.phone = phone.clone();
                    p.address = address.clone();
                }
            }
            Event::AtmCardCancelled { customer, card, at } => {
                if let Some(c) = self.customers.get_mut(customer).and_then(|p| p.atm_cards.iter_mut().find(|c| &c.id == card)) {
                    c.status = CardStatus::Cancelled;
                    c.cancelled_at = Some(*at);
                }
            }
            Event::PendingPrepared(action) => {
                self.pendings.insert(action.id.clone(), action.clone());
            }
            Event::PendingCancelled { pending, at } => self.close_pending(pending, PendingState::Cancelled, None, *at),
            Event::PendingExpired { pending, at } => self.close_pending(pending, PendingState::Expired, None, *at),
            Event::TransferConfirmed { pending, record, transaction } => {
                self.commit(transaction);
                self.close_pending(pending, PendingState::Confirmed, Some(record.id.to_string()), record.timestamp);
                self.transfers.insert(record.id.clone(), record.clone());
            }
            Event::BillPaymentConfirmed { pending, record, transaction } => {
                self.commit(transaction);
                self.close_pending(pending, PendingState::Confirmed, Some(record.id.to_string()), record.timestamp);
                self.payments.insert(record.id.clone(), record.clone());
            }
            Event::BillerRegistered { pending, registration } => {
                let outcome = Some(registration.corporation.to_string());
                self.close_pending(pending, PendingState::Confirmed, outcome, registration.registered_at);
                self.registrations.push(registration.clone());
            }
            Event::BillerDeregistered { pending, customer, corporation, at } => {
                self.close_pending(pending, PendingState::Confirmed, Some(corporation.to_string()), *at);
                if let Some(r) =
                    self.registrations.iter_mut().find(|r| r.active && &r.customer == customer && &r.corporation == corporation)
                {
                    r.active = false;
                    r.deregistered_at = Some(*at);
                }
            }
            Event::ChequeBookRequested(request) => {
                self.cheque_books.insert(request.id.clone(), request.clone());
            }
            Event::ChequeBookFulfilled { request, first, last, at } => {
                let Some(book) = self.cheque_books.get_mut(request) else { return };
                book.status = BookStatus::Fulfilled;
                book.fulfilled_at = Some(*at);
                book.assigned_range = Some((first.clone(), last.clone()));
                let account = book.account.clone();
                for serial in first.serial()..=last.serial() {
                    let number = ChequeNumber::from_serial(serial).expect("validated range");
                    self.cheques.insert(
                        number.clone(),
                        Cheque {
                            number,
                            account: account.clone(),
                            book: request.clone(),
                            status: ChequeStatus::Unused,
                            amount: None,
                            presented_at: None,
                            stopped_at: None,
                            transaction: None,
                        },
                    );
                }
            }
            Event::ChequeStopped { number, at, fee } => {
                if let Some(fee) = fee {
                    self.commit(fee);
                }
                if let Some(c) = self.cheques.get_mut(number) {
                    c.status = ChequeStatus::Stopped;
                    c.stopped_at = Some(*at);
                }
            }
            Event::ChequeCleared { number, amount, at, transaction } => {
                self.commit(transaction);
                if let Some(c) = self.cheques.get_mut(number) {
                    c.status = ChequeStatus::Cleared;
                    c.amount = Some(*amount);
                    c.presented_at = Some(*at);
                    c.transaction = Some(transaction.id.clone());
                }
            }
            Event::ChequeBounced { number, amount, at } => {
                if let Some(c) = self.cheques.get_mut(number) {
                    c.status = ChequeStatus::Bounced;
                    c.amount = Some(*amount);
                    c.presented_at = Some(*at);
                }
            }
        }
    }

    /// Checks every cross-module invariant and returns a description of
    /// each violation found.
    pub fn verify(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let ledger = &self.ledger;

        // journal fold: recompute every balance from postings alone
        let mut folded: BTreeMap<&AccountId, i128> = BTreeMap::new();
        for tx in ledger.transactions() {
            if !tx.is_balanced() {
                problems.push(format!("transaction {} is unbalanced", tx.id));
            }
            for e in &tx.entries {
                let Ok(account) = ledger.account(&e.account) else {
                    problems.push(format!("transaction {} posts to unknown account {}", tx.id, e.account));
                    continue;
                };
                let v = e.amount.minor_units() as i128;
                *folded.entry(&e.account).or_default() += if e.direction == account.kind.normal_side() { v } else { -v };
            }
        }
        let (mut credit_normal, mut debit_normal, mut seeded) = (0i128, 0i128, 0i128);
        for account in ledger.accounts() {
            let fold = folded.get(&account.id).copied().unwrap_or(0);
            if fold != account.balance.minor_units() as i128 {
                problems.push(format!("account {} balance {} disagrees with postings {}", account.id, account.balance, fold));
            }
            match account.kind.normal_side() {
                Direction::Credit => credit_normal += fold,
                Direction::Debit => debit_normal += fold,
            }
            if let Ok(rows) = ledger.history(&account.id, Timestamp::MIN, Timestamp::MAX) {
                if rows.last().map_or(Money::ZERO, |r| r.running_balance) != account.balance {
                    problems.push(format!("account {} history does not end at its balance", account.id));
                }
            }
        }
        for tx in ledger.transactions().iter().filter(|t| t.kind == TransactionKind::SeedDeposit) {
            seeded += tx.credit_total() as i128;
        }
        if credit_normal != seeded || debit_normal != seeded {
            problems.push(format!("conservation broken: accounts hold {credit_normal}, capital {debit_normal}, seeded {seeded}"));
        }

        for profile in self.customers.iter() {
            let owner = Owner::Customer(profile.id.clone());
            for kind in [AccountKind::Current, AccountKind::Savings] {
                let n = ledger.accounts_of(&owner).filter(|a| a.kind == kind).count();
                if n != 1 {
                    problems.push(format!("customer {} has {n} {kind:?} accounts", profile.id));
                }
            }
        }

        let mut active_pairs = BTreeSet::new();
        for r in self.registrations.iter().filter(|r| r.active) {
            if !active_pairs.insert((&r.customer, &r.corporation)) {
                problems.push(format!("customer {} has two active registrations for {}", r.customer, r.corporation));
            }
        }

        for record in self.transfers.values() {
            match ledger.transaction(&record.committed_tx) {
                Some(tx) if tx.entries.len() == 2 && tx.entries.iter().all(|e| e.amount == record.amount) => {}
                _ => problems.push(format!("transfer {} does not match its ledger transaction", record.id)),
            }
        }
        for record in self.payments.values() {
            match ledger.transaction(&record.committed_tx) {
                Some(tx) if tx.entries.iter().all(|e| e.amount == record.amount) => {}
                _ => problems.push(format!("payment {} does not match its ledger transaction", record.id)),
            }
        }

        let mut clearings: BTreeMap<&str, usize> = BTreeMap::new();
        for tx in ledger.transactions().iter().filter(|t| t.kind == TransactionKind::ChequeClearing) {
            if let Some(r) = &tx.reference {
                *clearings.entry(r.as_str()).or_default() += 1;
            }
        }
        for cheque in self.cheques.values() {
            let postings = clearings.get(cheque.number.as_str()).copied().unwrap_or(0);
            let expected = usize::from(cheque.status == ChequeStatus::Cleared);
            if postings != expected {
                problems.push(format!("cheque {} is {:?} with {postings} clearing postings", cheque.number, cheque.status));
            }
        }
        let mut ranges: Vec<(u64, u64)> =
            self.cheque_books.values().filter_map(|b| b.assigned_range.as_ref().map(|(f, l)| (f.serial(), l.serial()))).collect();
        ranges.sort();
        for pair in ranges.windows(2) {
            if pair[1].0 <= pair[0].1 {
                problems.push(format!("cheque ranges overlap at {}", pair[1].0));
            }
        }

        for p in self.pendings.values() {
            let consumed = p.state == PendingState::Confirmed;
            if consumed != p.outcome.is_some() {
                problems.push(format!("pending action {} state {:?} disagrees with outcome", p.id, p.state));
            }
            if let PendingPayload::Transfer { from, to, .. } = &p.payload {
                if from == to {
                    problems.push(format!("pending transfer {} moves money to itself", p.id));
                }
            }
        }
        problems
    }
}
