use std::time::Duration;

use crate::domain::Money;
use crate::journal::FlushPolicy;

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(15 * 60);
pub const DEFAULT_PENDING_TTL: Duration = Duration::from_secs(5 * 60);
pub const DEFAULT_LOCKOUT_THRESHOLD: u32 = 5;
pub const DEFAULT_DIGEST_ITERATIONS: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// ISO 4217 code of the single currency the bank runs in.
    pub currency: String,
    pub session_ttl: Duration,
    pub pending_ttl: Duration,
    /// Consecutive failed logins that lock a customer out.
    pub lockout_threshold: u32,
    pub stop_cheque_fee: Money,
    pub digest_iterations: u32,
    pub flush: FlushPolicy,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            currency: "USD".to_string(),
            session_ttl: DEFAULT_SESSION_TTL,
            pending_ttl: DEFAULT_PENDING_TTL,
            lockout_threshold: DEFAULT_LOCKOUT_THRESHOLD,
            stop_cheque_fee: Money::ZERO,
            digest_iterations: DEFAULT_DIGEST_ITERATIONS,
            flush: FlushPolicy::PerEvent,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid value for {var}: {reason}")]
pub struct ConfigError {
    pub var: &'static str,
    pub reason: String,
}

impl Config {
    /// Reads `BANK_CURRENCY`, `BANK_SESSION_TTL_SECS`,
    /// `BANK_PENDING_TTL_SECS` and `BANK_STOP_CHEQUE_FEE` on top of the
    /// defaults.
    pub fn from_env() -> Result<Config, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Config, ConfigError> {
        let mut config = Config::default();
        if let Some(code) = get("BANK_CURRENCY") {
            config.currency = parse_currency(&code)?;
        }
        if let Some(secs) = get("BANK_SESSION_TTL_SECS") {
            config.session_ttl = parse_secs("BANK_SESSION_TTL_SECS", &secs)?;
        }
        if let Some(secs) = get("BANK_PENDING_TTL_SECS") {
            config.pending_ttl = parse_secs("BANK_PENDING_TTL_SECS", &secs)?;
        }
        if let Some(fee) = get("BANK_STOP_CHEQUE_FEE") {
            config.stop_cheque_fee = fee
                .parse()
                .map_err(|e: crate::domain::ValidationError| ConfigError { var: "BANK_STOP_CHEQUE_FEE", reason: e.to_string() })?;
        }
        Ok(config)
    }
}

pub fn parse_currency(code: &str) -> Result<String, ConfigError> {
    if code.len() == 3 && code.bytes().all(|b| b.is_ascii_alphabetic()) {
        Ok(code.to_ascii_uppercase())
    } else {
        Err(ConfigError { var: "BANK_CURRENCY", reason: format!("'{code}' is not a 3-letter code") })
    }
}

fn parse_secs(var: &'static str, raw: &str) -> Result<Duration, ConfigError> {
    match raw.trim().parse::<u64>() {
        Ok(n) if n > 0 => Ok(Duration::from_secs(n)),
        _ => Err(ConfigError { var, reason: format!("'{raw}' is not a positive number of seconds") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn env_overrides() {
        let env: HashMap<&str, &str> = [("BANK_CURRENCY", "eur"), ("BANK_SESSION_TTL_SECS", "60"), ("BANK_STOP_CHEQUE_FEE", "2.50")].into();
        let config = Config::from_lookup(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(config.currency, "EUR");
        assert_eq!(config.session_ttl, Duration::from_secs(60));
        assert_eq!(config.pending_ttl, DEFAULT_PENDING_TTL);
        assert_eq!(config.stop_cheque_fee, Money::from_minor_units(250));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::from_lookup(|k| (k == "BANK_CURRENCY").then(|| "dollars".into())).is_err());
        assert!(Config::from_lookup(|k| (k == "BANK_PENDING_TTL_SECS").then(|| "0".into())).is_err());
    }
}
