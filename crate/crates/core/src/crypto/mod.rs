//! Deterministic primitives over a prime-order subgroup of Z_p^*:
//! Schnorr signatures, Pedersen commitments, salted-hash attribute
//! commitments, and Fiat–Shamir sigma proofs (knowledge of opening,
//! equality of committed values).
//!
//! Everything is a pure function of its inputs; the caller owns the seeded
//! random source. The hash used throughout the build is SHA-256
//! ([`HASH_NAME`]).

mod group;
mod hashcommit;
mod pedersen;
mod schnorr;
mod sigma;
mod transcript;

pub use group::{GroupParams, GroupProfile};
pub use hashcommit::{hash_commit, SaltedHashCommitment, SALT_LEN};
pub use pedersen::{pedersen_commit, PedersenCommitment};
pub use schnorr::{keygen, sign, verify, KeyPair, Signature};
pub use sigma::{prove_equal, prove_opening, verify_equal, verify_opening, SigmaProof};
pub use transcript::Transcript;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Name of the hash function fixed for this build, reported by the CLI's
/// vector output so other implementations can match it.
pub const HASH_NAME: &str = "sha-256";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CryptoError {
    #[error("scalar out of range")]
    OutOfRange,
    #[error("invalid group parameters: {0}")]
    BadGroup(String),
}

pub fn sha256(data: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(data);
    h.finalize().into()
}
