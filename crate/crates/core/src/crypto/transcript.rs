//! Labeled transcript for Fiat–Shamir challenges. Every proof in the
//! system absorbs the verifier's request nonce before anything else, which
//! is what binds presentations to a single proof request.

use super::{sha256, GroupParams};
use crate::enc::Enc;
use num_bigint::BigUint;
use num_traits::One;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    entries: Vec<(String, Vec<u8>)>,
}

impl Transcript {
    pub fn new(domain: &str) -> Self {
        let mut t = Self::default();
        t.absorb("domain", domain.as_bytes());
        t
    }

    pub fn absorb(&mut self, label: &str, data: &[u8]) {
        self.entries.push((label.to_string(), data.to_vec()));
    }

    pub fn absorb_int(&mut self, label: &str, x: &BigUint) {
        self.absorb(label, &x.to_bytes_be());
    }

    fn digest(&self) -> [u8; 32] {
        let mut e = Enc::new();
        e.put_count(self.entries.len());
        for (label, data) in &self.entries {
            e.put_str(label);
            e.put_bytes(data);
        }
        sha256(&e.into_bytes())
    }

    /// Challenge scalar over everything absorbed so far plus the proof's
    /// commitment elements. The result lies in [1, q−1]: a zero challenge
    /// would let a mismatched-witness transcript verify, which the
    /// exhaustive small-group soundness checks forbid.
    pub fn challenge(&self, group: &GroupParams, elements: &[&BigUint]) -> BigUint {
        let mut forked = self.clone();
        for (i, el) in elements.iter().enumerate() {
            forked.absorb_int(&format!("commit.{i}"), el);
        }
        let digest = forked.digest();
        let wide = BigUint::from_bytes_be(&digest);
        let q_minus_1 = &group.q - BigUint::one();
        (wide % q_minus_1) + BigUint::one()
    }
}
