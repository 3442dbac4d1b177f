//! Fiat–Shamir sigma proofs over Pedersen commitments: knowledge of an
//! opening, and equality of the committed value across two commitments.
//! Both absorb the caller's transcript, which carries the proof-request
//! nonce, so a proof cannot be replayed under a different request.

use super::{GroupParams, PedersenCommitment, Transcript};
use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaProof {
    pub commitment_elements: Vec<BigUint>,
    pub challenge: BigUint,
    pub responses: Vec<BigUint>,
}

fn opening_transcript(transcript: &Transcript, c: &PedersenCommitment) -> Transcript {
    let mut t = transcript.clone();
    t.absorb("proof", b"sim.sigma.opening.v1");
    t.absorb_int("stmt.c", &c.value);
    t
}

/// Prove knowledge of (m, r) with C = g^m h^r.
pub fn prove_opening<R: RngCore>(
    group: &GroupParams,
    c: &PedersenCommitment,
    m: &BigUint,
    r: &BigUint,
    transcript: &Transcript,
    rng: &mut R,
) -> SigmaProof {
    let a = group.rand_scalar(rng);
    let b = group.rand_scalar(rng);
    let big_a = (group.g.modpow(&a, &group.p) * group.h.modpow(&b, &group.p)) % &group.p;
    let t = opening_transcript(transcript, c);
    let challenge = t.challenge(group, &[&big_a]);
    let z1 = group.mod_add(&a, &group.mod_mul(&challenge, m));
    let z2 = group.mod_add(&b, &group.mod_mul(&challenge, r));
    SigmaProof {
        commitment_elements: vec![big_a],
        challenge,
        responses: vec![z1, z2],
    }
}

pub fn verify_opening(
    group: &GroupParams,
    c: &PedersenCommitment,
    proof: &SigmaProof,
    transcript: &Transcript,
) -> bool {
    let [big_a] = proof.commitment_elements.as_slice() else {
        return false;
    };
    let [z1, z2] = proof.responses.as_slice() else {
        return false;
    };
    if !group.is_element(big_a) || !group.is_element(&c.value) {
        return false;
    }
    if !group.is_scalar(z1) || !group.is_scalar(z2) || proof.challenge < BigUint::one() {
        return false;
    }
    let t = opening_transcript(transcript, c);
    if t.challenge(group, &[big_a]) != proof.challenge {
        return false;
    }
    let lhs = (group.g.modpow(z1, &group.p) * group.h.modpow(z2, &group.p)) % &group.p;
    let rhs = (big_a * c.value.modpow(&proof.challenge, &group.p)) % &group.p;
    lhs == rhs
}

fn equality_transcript(
    transcript: &Transcript,
    c1: &PedersenCommitment,
    c2: &PedersenCommitment,
) -> Transcript {
    let mut t = transcript.clone();
    t.absorb("proof", b"sim.sigma.equal.v1");
    t.absorb_int("stmt.c1", &c1.value);
    t.absorb_int("stmt.c2", &c2.value);
    t
}

/// Prove that C1 and C2 commit to the same value m under blinding r1, r2.
pub fn prove_equal<R: RngCore>(
    group: &GroupParams,
    c1: &PedersenCommitment,
    c2: &PedersenCommitment,
    m: &BigUint,
    r1: &BigUint,
    r2: &BigUint,
    transcript: &Transcript,
    rng: &mut R,
) -> SigmaProof {
    let a = group.rand_scalar(rng);
    let b1 = group.rand_scalar(rng);
    let b2 = group.rand_scalar(rng);
    let ga = group.g.modpow(&a, &group.p);
    let big_a1 = (&ga * group.h.modpow(&b1, &group.p)) % &group.p;
    let big_a2 = (&ga * group.h.modpow(&b2, &group.p)) % &group.p;
    let t = equality_transcript(transcript, c1, c2);
    let challenge = t.challenge(group, &[&big_a1, &big_a2]);
    let zm = group.mod_add(&a, &group.mod_mul(&challenge, m));
    let z1 = group.mod_add(&b1, &group.mod_mul(&challenge, r1));
    let z2 = group.mod_add(&b2, &group.mod_mul(&challenge, r2));
    SigmaProof {
        commitment_elements: vec![big_a1, big_a2],
        challenge,
        responses: vec![zm, z1, z2],
    }
}

pub fn verify_equal(
    group: &GroupParams,
    c1: &PedersenCommitment,
    c2: &PedersenCommitment,
    proof: &SigmaProof,
    transcript: &Transcript,
) -> bool {
    let [big_a1, big_a2] = proof.commitment_elements.as_slice() else {
        return false;
    };
    let [zm, z1, z2] = proof.responses.as_slice() else {
        return false;
    };
    if ![big_a1, big_a2, &c1.value, &c2.value]
        .iter()
        .all(|x| group.is_element(x))
    {
        return false;
    }
    if ![zm, z1, z2].iter().all(|x| group.is_scalar(x)) || proof.challenge < BigUint::one() {
        return false;
    }
    let t = equality_transcript(transcript, c1, c2);
    if t.challenge(group, &[big_a1, big_a2]) != proof.challenge {
        return false;
    }
    let gzm = group.g.modpow(zm, &group.p);
    let check = |big_a: &BigUint, c: &PedersenCommitment, z: &BigUint| {
        let lhs = (&gzm * group.h.modpow(z, &group.p)) % &group.p;
        let rhs = (big_a * c.value.modpow(&proof.challenge, &group.p)) % &group.p;
        lhs == rhs
    };
    check(big_a1, c1, z1) && check(big_a2, c2, z2)
}
