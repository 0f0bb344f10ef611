//! Internet banking core.
//!
//! Money lives in a double-entry [`ledger`]. Customers reach it through
//! session-authenticated services: two-phase [`transfer`]s and bill
//! payments ([`billpay`]), [`cheque`] books and stop instructions, and the
//! profile utilities in [`customer`]. Every change is an [`state::Event`]
//! appended to the [`journal`] before it takes effect, so a bank can always
//! be rebuilt by replay. [`gateway`] serves the services over HTTP and
//! [`admin`] is the operator command line.

pub mod admin;
pub mod bank;
pub mod billpay;
pub mod cheque;
pub mod clock;
pub mod config;
pub mod customer;
pub mod domain;
pub mod error;
pub mod gateway;
pub mod journal;
pub mod ledger;
pub mod pending;
pub mod state;
pub mod transfer;

pub use bank::{Bank, OpenReport, SharedBank};
pub use clock::{Clock, ManualClock, SystemClock};
pub use config::Config;
pub use domain::{parse_amount, validate_email, validate_password, AccountId, CustomerId, Money, Timestamp};
pub use error::{BankError, ErrorClass, Result};
