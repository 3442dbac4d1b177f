//! Schnorr signatures over the configured group. One uniform suite stands
//! in for every "digital signature" in the system: issuers signing
//! credentials, DID controllers authorizing ledger transactions, key
//! attestations.

use super::{GroupParams, Transcript};
use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub sk: BigUint,
    pub pk: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub c: BigUint,
    pub s: BigUint,
}

pub fn keygen<R: RngCore>(group: &GroupParams, rng: &mut R) -> KeyPair {
    let sk = group.rand_nonzero_scalar(rng);
    let pk = group.g.modpow(&sk, &group.p);
    KeyPair { sk, pk }
}

fn challenge(group: &GroupParams, pk: &BigUint, commitment: &BigUint, msg: &[u8]) -> BigUint {
    let mut t = Transcript::new("sim.schnorr.v1");
    t.absorb_int("pk", pk);
    t.absorb("msg", msg);
    t.challenge(group, &[commitment])
}

/// Signing is deterministic: the nonce is derived from the secret key and
/// the message, so identical inputs give identical signatures byte for byte.
pub fn sign(group: &GroupParams, sk: &BigUint, msg: &[u8]) -> Signature {
    let mut nt = Transcript::new("sim.schnorr.nonce.v1");
    nt.absorb_int("sk", sk);
    nt.absorb("msg", msg);
    let k = nt.challenge(group, &[]);
    let pk = group.g.modpow(sk, &group.p);
    let commitment = group.g.modpow(&k, &group.p);
    let c = challenge(group, &pk, &commitment, msg);
    // s = k - c*sk mod q, so g^s * pk^c = g^k
    let s = group.mod_sub(&k, &group.mod_mul(&c, sk));
    Signature { c, s }
}

/// Pure check; returns false on any mismatch, never errors.
pub fn verify(group: &GroupParams, pk: &BigUint, msg: &[u8], sig: &Signature) -> bool {
    if !group.is_element(pk) || !group.is_scalar(&sig.c) || !group.is_scalar(&sig.s) {
        return false;
    }
    if sig.c < BigUint::one() {
        return false;
    }
    let commitment =
        (group.g.modpow(&sig.s, &group.p) * pk.modpow(&sig.c, &group.p)) % &group.p;
    challenge(group, pk, &commitment, msg) == sig.c
}
