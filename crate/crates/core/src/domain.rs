//! Value types shared by every service: money, identifiers, timestamps and
//! the field rules for e-mail addresses and passwords.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest number of digits accepted before the decimal point of an amount.
pub const MAX_INTEGER_DIGITS: usize = 13;
/// Digits after the decimal point; amounts are held in minor units.
pub const FRACTION_DIGITS: u32 = 2;
const MINOR_PER_MAJOR: u64 = 10u64.pow(FRACTION_DIGITS);

pub const PASSWORD_MIN_LEN: usize = 6;
pub const PASSWORD_MAX_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("e-mail address must contain an '@' sign")]
    MissingAtSign,
    #[error("e-mail address must contain exactly one '@' sign")]
    MultipleAtSigns,
    #[error("e-mail address must contain a '.' after the '@' sign")]
    MissingDotAfterAt,
    #[error("e-mail address must not contain whitespace")]
    WhitespacePresent,
    #[error("e-mail address needs text on both sides of the '@' sign")]
    EmptyPart,
    #[error("password must be at least {PASSWORD_MIN_LEN} characters")]
    TooShort,
    #[error("password must be at most {PASSWORD_MAX_LEN} characters")]
    TooLong,
    #[error("password contains whitespace or control characters")]
    DisallowedCharacter,
    #[error("'{0}' is not a decimal amount")]
    NotANumber(String),
    #[error("amount must be greater than zero")]
    NonPositive,
    #[error("amount has more than {FRACTION_DIGITS} fraction digits")]
    TooManyFractionDigits,
    #[error("amount exceeds {MAX_INTEGER_DIGITS} integer digits")]
    Overflow,
    #[error("{0} must not be empty")]
    EmptyField(&'static str),
    #[error("'{value}' is not a valid {what}")]
    BadIdentifier { what: &'static str, value: String },
}

impl ValidationError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::MissingAtSign => "missing-at-sign",
            Self::MultipleAtSigns => "multiple-at-signs",
            Self::MissingDotAfterAt => "missing-dot-after-at",
            Self::WhitespacePresent => "whitespace-present",
            Self::EmptyPart => "empty-part",
            Self::TooShort => "too-short",
            Self::TooLong => "too-long",
            Self::DisallowedCharacter => "disallowed-character",
            Self::NotANumber(_) => "not-a-number",
            Self::NonPositive => "non-positive",
            Self::TooManyFractionDigits => "too-many-fraction-digits",
            Self::Overflow => "overflow",
            Self::EmptyField(_) => "empty-field",
            Self::BadIdentifier { .. } => "bad-identifier",
        }
    }
}

// ---------------------------------------------------------------------------
// Money
// ---------------------------------------------------------------------------

/// An exact amount in currency minor units. The system runs a single
/// currency, so the code lives in configuration rather than on each value.
///
/// Serialized as a decimal string (`"100.50"`) so amounts never pass through
/// floating point on the wire or in the journal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(u64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_minor_units(minor: u64) -> Self {
        Money(minor)
    }

    pub const fn minor_units(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, other: Money) -> Option<Money> {
        self.0.checked_add(other.0).map(Money)
    }

    pub fn checked_sub(self, other: Money) -> Option<Money> {
        self.0.checked_sub(other.0).map(Money)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / MINOR_PER_MAJOR, self.0 % MINOR_PER_MAJOR)
    }
}

impl FromStr for Money {
    type Err = ValidationError;

    /// Accepts zero; use [`parse_amount`] for user-entered amounts.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_decimal(s).map(Money)
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// A signed amount, used for per-row movements in account histories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SignedMoney(i128);

impl SignedMoney {
    pub fn credit(amount: Money) -> Self {
        SignedMoney(amount.0 as i128)
    }

    pub fn debit(amount: Money) -> Self {
        SignedMoney(-(amount.0 as i128))
    }

    pub fn minor_units(self) -> i128 {
        self.0
    }
}

impl fmt::Display for SignedMoney {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let per = MINOR_PER_MAJOR as u128;
        write!(f, "{sign}{}.{:02}", abs / per, abs % per)
    }
}

impl Serialize for SignedMoney {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignedMoney {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        let (negative, digits) = match raw.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, raw.as_str()),
        };
        let value = parse_decimal(digits).map_err(serde::de::Error::custom)? as i128;
        Ok(SignedMoney(if negative { -value } else { value }))
    }
}

fn parse_decimal(candidate: &str) -> Result<u64, ValidationError> {
    let s = candidate.trim();
    let nan = || ValidationError::NotANumber(candidate.to_string());
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(nan());
    }
    let frac = frac_part.unwrap_or("");
    if frac_part.is_some() && frac.is_empty() {
        return Err(nan());
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(nan());
    }
    if frac.len() > FRACTION_DIGITS as usize {
        return Err(ValidationError::TooManyFractionDigits);
    }
    let significant = int_part.trim_start_matches('0');
    if significant.len() > MAX_INTEGER_DIGITS {
        return Err(ValidationError::Overflow);
    }
    let major: u64 = if significant.is_empty() { 0 } else { significant.parse().map_err(|_| nan())? };
    let mut minor: u64 = 0;
    for (i, b) in frac.bytes().enumerate() {
        minor += u64::from(b - b'0') * 10u64.pow(FRACTION_DIGITS - 1 - i as u32);
    }
    Ok(major * MINOR_PER_MAJOR + minor)
}

/// Parses a user-entered amount: a positive decimal with at most two
/// fraction digits and at most thirteen integer digits.
pub fn parse_amount(candidate: &str) -> Result<Money, ValidationError> {
    let trimmed = candidate.trim();
    if let Some(rest) = trimmed.strip_prefix('-') {
        // a well-formed negative number is reported as such, not as garbage
        return match parse_decimal(rest) {
            Ok(_) => Err(ValidationError::NonPositive),
            Err(e) => Err(e),
        };
    }
    match parse_decimal(trimmed)? {
        0 => Err(ValidationError::NonPositive),
        minor => Ok(Money(minor)),
    }
}

// ---------------------------------------------------------------------------
// E-mail and password
// ---------------------------------------------------------------------------

/// A lowercased e-mail address with exactly one '@' and a '.' somewhere
/// after it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmailAddress(String);

impl EmailAddress {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EmailAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn validate_email(candidate: &str) -> Result<EmailAddress, ValidationError> {
    if candidate.chars().any(char::is_whitespace) {
        return Err(ValidationError::WhitespacePresent);
    }
    let (local, domain) = candidate.split_once('@').ok_or(ValidationError::MissingAtSign)?;
    if domain.contains('@') {
        return Err(ValidationError::MultipleAtSigns);
    }
    if local.is_empty() || domain.is_empty() {
        return Err(ValidationError::EmptyPart);
    }
    if !domain.contains('.') {
        return Err(ValidationError::MissingDotAfterAt);
    }
    Ok(EmailAddress(candidate.to_lowercase()))
}

/// A password that satisfies the length policy. Never serialized.
#[derive(Clone, PartialEq, Eq)]
pub struct Password(String);

impl Password {
    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Password {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Password(..)")
    }
}

pub fn validate_password(candidate: &str) -> Result<Password, ValidationError> {
    let len = candidate.chars().count();
    if len < PASSWORD_MIN_LEN {
        return Err(ValidationError::TooShort);
    }
    if len > PASSWORD_MAX_LEN {
        return Err(ValidationError::TooLong);
    }
    if candidate.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(ValidationError::DisallowedCharacter);
    }
    Ok(Password(candidate.to_string()))
}

// ---------------------------------------------------------------------------
// Identifiers and time
// ---------------------------------------------------------------------------

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

id_type!(
    /// Ten-digit account number.
    AccountId
);
id_type!(CustomerId);
id_type!(CorporationId);
id_type!(
    /// Six-digit cheque number.
    ChequeNumber
);
id_type!(CardId);
id_type!(TransactionId);
id_type!(PendingId);
id_type!(TransferId);
id_type!(PaymentId);
id_type!(BookRequestId);

const ACCOUNT_NUMBER_BASE: u64 = 1_000_000_000;

fn all_digits(s: &str, len: usize) -> bool {
    s.len() == len && s.bytes().all(|b| b.is_ascii_digit())
}

impl AccountId {
    /// The account number for the `index`-th account opened (0-based).
    pub fn from_index(index: usize) -> Self {
        AccountId(format!("{:010}", ACCOUNT_NUMBER_BASE + index as u64))
    }

    pub fn parse(raw: &str) -> Result<Self, ValidationError> {
        if all_digits(raw, 10) {
            Ok(AccountId(raw.to_string()))
        } else {
            Err(ValidationError::BadIdentifier { what: "account number", value: raw.to_string() })
        }
    }
}

impl ChequeNumber {
    pub const MAX: u64 = 999_999;

    /// `n` must be in `1..=999_999`.
    pub fn from_serial(n: u64) -> Option<Self> {
        (1..=Self::MAX).contains(&n).then(|| ChequeNumber(format!("{n:06}")))
    }

    pub fn serial(&self) -> u64 {
        self.0.parse().expect("cheque numbers are numeric")
    }

    pub fn parse(raw: &str) -> Result<Self, ValidationError> {
        if all_digits(raw, 6) && raw != "000000" {
            Ok(ChequeNumber(raw.to_string()))
        } else {
            Err(ValidationError::BadIdentifier { what: "cheque number", value: raw.to_string() })
        }
    }
}

macro_rules! prefixed_id {
    ($name:ident, $prefix:literal, $width:literal) => {
        impl $name {
            pub fn from_serial(n: usize) -> Self {
                $name(format!(concat!($prefix, "{:0", $width, "}"), n))
            }

            /// Wraps a caller-supplied id; unknown ids simply fail lookups.
            pub fn new(raw: impl Into<String>) -> Self {
                $name(raw.into())
            }
        }
    };
}

prefixed_id!(CustomerId, "CUS", 6);
prefixed_id!(CorporationId, "CORP", 4);
prefixed_id!(CardId, "CARD", 6);
prefixed_id!(TransactionId, "TX", 8);
prefixed_id!(PendingId, "PA", 8);
prefixed_id!(TransferId, "TF", 8);
prefixed_id!(PaymentId, "BP", 8);
prefixed_id!(BookRequestId, "CB", 6);

/// Wall-clock instant in milliseconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub const MIN: Timestamp = Timestamp(i64::MIN);
    pub const MAX: Timestamp = Timestamp(i64::MAX);

    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn plus(self, d: std::time::Duration) -> Timestamp {
        Timestamp(self.0.saturating_add(d.as_millis().min(i64::MAX as u128) as i64))
    }
}
