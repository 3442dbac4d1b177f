//! Pedersen commitments C = g^m · h^r mod p. The blinded link secret in a
//! credential request is a commitment of this form; equality proofs across
//! credentials work because the binding generator pair is shared.

use super::{CryptoError, GroupParams};
use num_bigint::BigUint;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PedersenCommitment {
    pub value: BigUint,
}

pub fn pedersen_commit(
    group: &GroupParams,
    m: &BigUint,
    r: &BigUint,
) -> Result<PedersenCommitment, CryptoError> {
    if !group.is_scalar(m) || !group.is_scalar(r) {
        return Err(CryptoError::OutOfRange);
    }
    let value = (group.g.modpow(m, &group.p) * group.h.modpow(r, &group.p)) % &group.p;
    Ok(PedersenCommitment { value })
}
