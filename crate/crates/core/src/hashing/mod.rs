//! Universal hashing: Toeplitz privacy amplification, the error-verification
//! hash and Wegman-Carter authentication, plus the ledger of secret key
//! spent on authentication.

mod auth;
mod gf2n;
mod ledger;
mod polyhash;
mod toeplitz;

use thiserror::Error;

pub use auth::{auth_check, auth_forgery_bound, auth_tag, auth_tag_in, AuthKey, AuthTag, AUTH_TAG_BITS};
pub use gf2n::Field;
pub use ledger::{KeyLedger, BOOTSTRAP_KEY_BITS, SETUP_KEY_BITS};
pub use polyhash::{
    block_count, poly_hash, verify_collision_bound, verify_hash, verify_hash_in, VerifyKey, VERIFY_TAG_BITS,
};
pub use toeplitz::{toeplitz_hash, toeplitz_hash_naive, ToeplitzSeed};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashError {
    #[error("length mismatch: {0}")]
    Length(String),
    #[error("key material exhausted: need {needed} bits, {available} available")]
    Exhausted { needed: usize, available: usize },
}
