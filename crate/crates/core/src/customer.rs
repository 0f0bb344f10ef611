//! Customer profiles, credential digests, ATM cards and login sessions.

use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bank::Bank;
use crate::domain::{validate_email, validate_password, AccountId, CardId, CustomerId, EmailAddress, Money, Timestamp, ValidationError};
use crate::error::{BankError, Result};
use crate::ledger::{Account, AccountKind, AccountStatus, Owner};
use crate::state::Event;

pub const DIGEST_ALGORITHM: &str = "sha256-iterated";
const SALT_LEN: usize = 16;
const TOKEN_LEN: usize = 32;

/// A salted, iterated one-way digest of a password.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credential {
    pub algorithm: String,
    pub iterations: u32,
    pub salt: String,
    pub digest: String,
}

impl Credential {
    pub fn derive(password: &str, iterations: u32) -> Self {
        let mut salt = [0u8; SALT_LEN];
        rand::rng().fill_bytes(&mut salt);
        Self::with_salt(password, &salt, iterations)
    }

    pub fn with_salt(password: &str, salt: &[u8], iterations: u32) -> Self {
        Credential {
            algorithm: DIGEST_ALGORITHM.to_string(),
            iterations,
            salt: hex::encode(salt),
            digest: hex::encode(stretch(password, salt, iterations)),
        }
    }

    pub fn verify(&self, password: &str) -> bool {
        if self.algorithm != DIGEST_ALGORITHM {
            return false;
        }
        let (Ok(salt), Ok(expected)) = (hex::decode(&self.salt), hex::decode(&self.digest)) else {
            return false;
        };
        let actual = stretch(password, &salt, self.iterations);
        constant_time_eq(&actual, &expected)
    }
}

fn stretch(password: &str, salt: &[u8], iterations: u32) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(salt);
    hasher.update(password.as_bytes());
    let mut state: [u8; 32] = hasher.finalize().into();
    for _ in 1..iterations.max(1) {
        let mut hasher = Sha256::new();
        hasher.update(state);
        hasher.update(salt);
        state = hasher.finalize().into();
    }
    state
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CardStatus {
    Active,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtmCard {
    pub id: CardId,
    pub status: CardStatus,
    pub cancelled_at: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomerProfile {
    pub id: CustomerId,
    pub username: String,
    pub credential: Credential,
    pub email: EmailAddress,
    pub full_name: String,
    pub phone: String,
    pub address: String,
    pub atm_cards: Vec<AtmCard>,
    pub failed_logins: u32,
    pub created_at: Timestamp,
}

impl CustomerProfile {
    pub fn card(&self, id: &CardId) -> Option<&AtmCard> {
        self.atm_cards.iter().find(|c| &c.id == id)
    }
}

/// Normalized lookup key for usernames, which are case-insensitive.
pub fn username_key(username: &str) -> String {
    username.trim().to_lowercase()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Customers {
    profiles: BTreeMap<CustomerId, CustomerProfile>,
    usernames: BTreeMap<String, CustomerId>,
}

impl Customers {
    pub fn get(&self, id: &CustomerId) -> Option<&CustomerProfile> {
        self.profiles.get(id)
    }

    pub(crate) fn get_mut(&mut self, id: &CustomerId) -> Option<&mut CustomerProfile> {
        self.profiles.get_mut(id)
    }

    pub fn by_username(&self, username: &str) -> Option<&CustomerProfile> {
        self.usernames.get(&username_key(username)).and_then(|id| self.profiles.get(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = &CustomerProfile> {
        self.profiles.values()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn card_count(&self) -> usize {
        self.profiles.values().map(|p| p.atm_cards.len()).sum()
    }

    pub(crate) fn insert(&mut self, profile: CustomerProfile) {
        self.usernames.insert(username_key(&profile.username), profile.id.clone());
        self.profiles.insert(profile.id.clone(), profile);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionState {
    Active,
    Expired,
    LoggedOut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Session {
    pub token: String,
    pub customer: CustomerId,
    pub created_at: Timestamp,
    pub last_seen: Timestamp,
    pub state: SessionState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("session is not valid")]
    Invalid,
    #[error("session expired after inactivity")]
    Expired,
    #[error("unknown session token")]
    UnknownToken,
}

/// Live sessions. Tokens are bearer secrets, so the table is kept in memory
/// only and never written to the journal or snapshots.
#[derive(Debug, Default)]
pub struct SessionTable {
    sessions: HashMap<String, Session>,
}

impl SessionTable {
    pub fn create(&mut self, customer: CustomerId, now: Timestamp) -> Session {
        let mut raw = [0u8; TOKEN_LEN];
        rand::rng().fill_bytes(&mut raw);
        let session = Session { token: hex::encode(raw), customer, created_at: now, last_seen: now, state: SessionState::Active };
        self.sessions.insert(session.token.clone(), session.clone());
        session
    }

    pub fn get(&self, token: &str) -> Option<&Session> {
        self.sessions.get(token)
    }

    /// Resolves a token to its customer and refreshes its idle timer.
    /// Sessions idle for longer than `idle_ttl` become expired for good.
    pub fn authenticate(&mut self, token: &str, now: Timestamp, idle_ttl: Duration) -> Result<CustomerId, SessionError> {
        let session = self.sessions.get_mut(token).ok_or(SessionError::Invalid)?;
        match session.state {
            SessionState::LoggedOut => return Err(SessionError::Invalid),
            SessionState::Expired => return Err(SessionError::Expired),
            SessionState::Active => {}
        }
        if now > session.last_seen.plus(idle_ttl) {
            session.state = SessionState::Expired;
            return Err(SessionError::Expired);
        }
        session.last_seen = now.max(session.last_seen);
        Ok(session.customer.clone())
    }

    pub fn logout(&mut self, token: &str) -> Result<(), SessionError> {
        let session = self.sessions.get_mut(token).ok_or(SessionError::UnknownToken)?;
        session.state = SessionState::LoggedOut;
        Ok(())
    }

    /// Logs out every active session of `customer` except `keep`.
    pub fn revoke_others(&mut self, customer: &CustomerId, keep: Option<&str>) -> usize {
        let mut revoked = 0;
        for session in self.sessions.values_mut() {
            if &session.customer == customer && session.state == SessionState::Active && Some(session.token.as_str()) != keep {
                session.state = SessionState::LoggedOut;
                revoked += 1;
            }
        }
        revoked
    }

    pub fn active_count(&self, customer: &CustomerId) -> usize {
        self.sessions.values().filter(|s| &s.customer == customer && s.state == SessionState::Active).count()
    }
}

/// Input for [`Bank::add_customer`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewCustomer {
    pub username: String,
    pub password: String,
    pub full_name: String,
    pub email: String,
    pub phone: String,
    pub address: String,
    pub opening_current: Money,
    pub opening_savings: Money,
}

/// Whether the password policy applies to a new customer's password.
/// `Legacy` exists for fixture credentials that predate the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PasswordCheck {
    Enforce,
    Legacy,
}

fn session_error(e: SessionError) -> BankError {
    match e {
        SessionError::Invalid => BankError::SessionInvalid,
        SessionError::Expired => BankError::SessionExpired,
        SessionError::UnknownToken => BankError::UnknownToken,
    }
}

fn clean_text(value: &str, field: &'static str, required: bool) -> Result<String> {
    let value = value.trim();
    if required && value.is_empty() {
        return Err(ValidationError::EmptyField(field).into());
    }
    if value.chars().any(char::is_control) {
        return Err(ValidationError::DisallowedCharacter.into());
    }
    Ok(value.to_string())
}

impl Bank {
    fn profile_of(&self, customer: &CustomerId) -> Result<&CustomerProfile> {
        self.state().customers().get(customer).ok_or_else(|| BankError::not_found("customer", customer))
    }

    pub fn profile(&self, customer: &CustomerId) -> Result<CustomerProfile> {
        self.profile_of(customer).cloned()
    }

    /// Enrols a customer with a current account, a savings account and one
    /// ATM card, then funds the accounts with any opening balances.
    pub fn add_customer(&mut self, new: NewCustomer, check: PasswordCheck) -> Result<CustomerProfile> {
        let username = new.username.trim();
        if username.is_empty() {
            return Err(ValidationError::EmptyField("username").into());
        }
        if username.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(ValidationError::WhitespacePresent.into());
        }
        if check == PasswordCheck::Enforce {
            validate_password(&new.password).map_err(BankError::PolicyViolation)?;
        } else if new.password.is_empty() {
            return Err(ValidationError::TooShort.into());
        }
        let email = validate_email(&new.email)?;
        let full_name = clean_text(&new.full_name, "full name", true)?;
        let phone = clean_text(&new.phone, "phone", false)?;
        let address = clean_text(&new.address, "address", false)?;
        if self.state().customers().by_username(username).is_some() {
            return Err(BankError::Duplicate { what: "username", name: username.to_string() });
        }

        let now = self.now();
        let id = self.state().next_customer_id();
        let owner = Owner::Customer(id.clone());
        let first = self.state().ledger().accounts().count();
        let accounts: Vec<Account> = [AccountKind::Current, AccountKind::Savings]
            .into_iter()
            .enumerate()
            .map(|(i, kind)| Account {
                id: AccountId::from_index(first + i),
                owner: owner.clone(),
                kind,
                opened_at: now,
                status: AccountStatus::Open,
                balance: Money::ZERO,
            })
            .collect();
        let profile = CustomerProfile {
            id: id.clone(),
            username: username.to_string(),
            credential: Credential::derive(&new.password, self.config().digest_iterations),
            email,
            full_name,
            phone,
            address,
            atm_cards: vec![AtmCard { id: self.state().next_card_id(), status: CardStatus::Active, cancelled_at: None }],
            failed_logins: 0,
            created_at: now,
        };
        self.record(Event::CustomerAdded { profile, accounts: accounts.clone() })?;
        for (account, amount) in accounts.iter().zip([new.opening_current, new.opening_savings]) {
            if !amount.is_zero() {
                self.seed_deposit(&account.id, amount)?;
            }
        }
        self.profile(&id)
    }

    /// Checks credentials and opens a session. Unknown usernames and wrong
    /// passwords fail the same way; once the failure count reaches the
    /// lockout threshold every attempt fails with `account-locked` until an
    /// administrator unlocks the customer.
    pub fn login(&mut self, username: &str, password: &str) -> Result<Session> {
        let Some(profile) = self.state().customers().by_username(username) else {
            // spend the same effort as a real check
            let _ = Credential::with_salt(password, &[0u8; SALT_LEN], self.config().digest_iterations);
            return Err(BankError::InvalidCredentials);
        };
        let (id, failures) = (profile.id.clone(), profile.failed_logins);
        if failures >= self.config().lockout_threshold {
            return Err(BankError::AccountLocked);
        }
        let now = self.now();
        if !profile.credential.verify(password) {
            self.record(Event::LoginFailed { customer: id, at: now })?;
            return Err(BankError::InvalidCredentials);
        }
        if failures > 0 {
            self.record(Event::LoginFailuresCleared { customer: id.clone() })?;
        }
        Ok(self.sessions.lock().create(id, now))
    }

    /// Ends a session. Logging out twice is fine.
    pub fn logout(&self, token: &str) -> Result<()> {
        self.sessions.lock().logout(token).map_err(session_error)
    }

    /// Resolves a token to its customer, refreshing the idle timer.
    pub fn authenticate(&self, token: &str) -> Result<CustomerId> {
        let now = self.now();
        self.sessions.lock().authenticate(token, now, self.config().session_ttl).map_err(session_error)
    }

    pub fn session(&self, token: &str) -> Option<Session> {
        self.sessions.lock().get(token).cloned()
    }

    /// Replaces the password and logs out every other session of the
    /// customer; the session named by `keep_token` stays active.
    pub fn change_password(&mut self, customer: &CustomerId, keep_token: Option<&str>, old: &str, new: &str, confirm: &str) -> Result<()> {
        if !self.profile_of(customer)?.credential.verify(old) {
            return Err(BankError::OldPasswordIncorrect);
        }
        if new != confirm {
            return Err(BankError::ConfirmationMismatch);
        }
        let password = validate_password(new).map_err(BankError::PolicyViolation)?;
        let credential = Credential::derive(password.expose(), self.config().digest_iterations);
        let at = self.now();
        self.record(Event::PasswordChanged { customer: customer.clone(), credential, at })?;
        self.sessions.lock().revoke_others(customer, keep_token);
        Ok(())
    }

    /// Replaces email, phone and address together, or nothing at all.
    pub fn update_profile(&mut self, customer: &CustomerId, email: &str, phone: &str, address: &str) -> Result<CustomerProfile> {
        self.profile_of(customer)?;
        let email = validate_email(email)?;
        let phone = clean_text(phone, "phone", false)?;
        let address = clean_text(address, "address", false)?;
        let at = self.now();
        self.record(Event::ProfileUpdated { customer: customer.clone(), email, phone, address, at })?;
        self.profile(customer)
    }

    pub fn cancel_atm_card(&mut self, customer: &CustomerId, card: &CardId) -> Result<AtmCard> {
        let owner = self
            .state()
            .customers()
            .iter()
            .find(|p| p.card(card).is_some())
            .map(|p| p.id.clone())
            .ok_or_else(|| BankError::not_found("card", card))?;
        if &owner != customer {
            return Err(BankError::NotOwner(format!("card {card}")));
        }
        let at = self.now();
        self.record(Event::AtmCardCancelled { customer: customer.clone(), card: card.clone(), at })?;
        Ok(self.profile_of(customer)?.card(card).cloned().expect("card exists"))
    }

    /// Clears a lockout. Unlocking a customer who is not locked is a no-op.
    pub fn unlock_customer(&mut self, username: &str) -> Result<CustomerProfile> {
        let profile = self.state().customers().by_username(username).ok_or_else(|| BankError::not_found("customer", username.trim()))?;
        let id = profile.id.clone();
        if profile.failed_logins > 0 {
            self.record(Event::CustomerUnlocked { customer: id.clone() })?;
        }
        self.profile(&id)
    }
}
