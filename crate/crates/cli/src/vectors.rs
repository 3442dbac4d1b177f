//! Deterministic TEST-group vectors: everything another implementation
//! needs to reproduce this build's bytes — group constants, hash choice,
//! the nonzero challenge rule, and worked examples for every primitive.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sim_core::crypto::{
    hash_commit, keygen, pedersen_commit, prove_opening, sign, GroupProfile, Transcript,
    HASH_NAME, SALT_LEN,
};
use num_bigint::BigUint;
use std::fmt::Write;

pub fn render() -> String {
    let group = GroupProfile::Test.params();
    let mut out = String::new();
    let w = &mut out;

    writeln!(w, "# sim crypto vectors (profile TEST)").unwrap();
    writeln!(w, "hash = {HASH_NAME}").unwrap();
    writeln!(w, "group.p = {}", group.p).unwrap();
    writeln!(w, "group.q = {}", group.q).unwrap();
    writeln!(w, "group.g = {}", group.g).unwrap();
    writeln!(w, "group.h = {}", group.h).unwrap();
    writeln!(
        w,
        "challenge = 1 + (sha256(transcript) mod (q-1))   # never zero"
    )
    .unwrap();
    writeln!(
        w,
        "encoding = length-prefixed fields, declared order, big-endian"
    )
    .unwrap();
    writeln!(w).unwrap();

    let kp = keygen(group, &mut ChaCha20Rng::seed_from_u64(1));
    writeln!(w, "keygen.seed = 1").unwrap();
    writeln!(w, "keygen.sk = {}", kp.sk).unwrap();
    writeln!(w, "keygen.pk = {}", kp.pk).unwrap();
    writeln!(w).unwrap();

    let sk = BigUint::from(2u32);
    let sig = sign(group, &sk, b"kyc-1");
    writeln!(w, "sign.sk = 2").unwrap();
    writeln!(w, "sign.msg = \"kyc-1\"").unwrap();
    writeln!(w, "sign.c = {}", sig.c).unwrap();
    writeln!(w, "sign.s = {}", sig.s).unwrap();
    writeln!(w).unwrap();

    let m = BigUint::from(4u32);
    let r = BigUint::from(5u32);
    let commitment = pedersen_commit(group, &m, &r).unwrap();
    writeln!(w, "pedersen.m = 4").unwrap();
    writeln!(w, "pedersen.r = 5").unwrap();
    writeln!(w, "pedersen.c = {}", commitment.value).unwrap();
    writeln!(w).unwrap();

    let salt = [0u8; SALT_LEN];
    let digest = hash_commit("name", "Alice", &salt);
    writeln!(w, "hash_commit.name = \"name\"").unwrap();
    writeln!(w, "hash_commit.value = \"Alice\"").unwrap();
    writeln!(w, "hash_commit.salt = {}", hex::encode(salt)).unwrap();
    writeln!(w, "hash_commit.digest = {}", hex::encode(digest.digest)).unwrap();
    writeln!(w).unwrap();

    let mut transcript = Transcript::new("sim.test");
    transcript.absorb("nonce", b"nonce=7");
    let proof = prove_opening(
        group,
        &commitment,
        &m,
        &r,
        &transcript,
        &mut ChaCha20Rng::seed_from_u64(7),
    );
    writeln!(w, "opening.transcript = domain \"sim.test\", nonce \"nonce=7\"").unwrap();
    writeln!(w, "opening.rng_seed = 7").unwrap();
    writeln!(w, "opening.commitment = {}", proof.commitment_elements[0]).unwrap();
    writeln!(w, "opening.challenge = {}", proof.challenge).unwrap();
    writeln!(
        w,
        "opening.responses = {},{}",
        proof.responses[0], proof.responses[1]
    )
    .unwrap();
    out
}
