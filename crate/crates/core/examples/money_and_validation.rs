//! Parsing amounts and checking e-mail addresses and passwords.
//!
//! ```text
//! cargo run --example money_and_validation
//! ```

use netbank::{parse_amount, validate_email, validate_password};

fn main() {
    for raw in ["12.50", "0.01", "7", "1.999", "-3.00", "0", "12,50"] {
        match parse_amount(raw) {
            Ok(m) => println!("amount {raw:>6} -> {m} ({} minor units)", m.minor_units()),
            Err(e) => println!("amount {raw:>6} -> rejected: {} ({e})", e.code()),
        }
    }

    for raw in ["user@hotmail.com", "userhotmail.com", "user@hotmail", "a@b@c.com", "x @y.com"] {
        match validate_email(raw) {
            Ok(email) => println!("email {raw:<18} ok -> {email}"),
            Err(e) => println!("email {raw:<18} {}", e.code()),
        }
    }

    for len in [5, 6, 20, 21] {
        let candidate = "s3cr3t!".chars().cycle().take(len).collect::<String>();
        let verdict = validate_password(&candidate).map(|_| "ok".to_string()).unwrap_or_else(|e| e.code().to_string());
        println!("password of {len:>2} chars: {verdict}");
    }
}
