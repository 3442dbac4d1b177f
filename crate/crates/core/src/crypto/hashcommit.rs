//! Salted-hash commitments to credential attributes. A credential signs
//! the digests; revealing (name, value, salt) lets a verifier recompute
//! one digest without learning anything about the others.

use super::sha256;
use crate::enc::Enc;

pub const SALT_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SaltedHashCommitment {
    pub digest: [u8; 32],
}

/// Digest of canonical(name, value, salt): length-prefixed UTF-8 fields in
/// that order.
pub fn hash_commit(attr_name: &str, attr_value: &str, salt: &[u8; SALT_LEN]) -> SaltedHashCommitment {
    let mut e = Enc::new();
    e.put_str("sim.attr.v1");
    e.put_str(attr_name);
    e.put_str(attr_value);
    e.put_bytes(salt);
    SaltedHashCommitment {
        digest: sha256(&e.into_bytes()),
    }
}

impl SaltedHashCommitment {
    pub fn matches(&self, attr_name: &str, attr_value: &str, salt: &[u8; SALT_LEN]) -> bool {
        hash_commit(attr_name, attr_value, salt) == *self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn deterministic() {
        let salt = [0u8; SALT_LEN];
        assert_eq!(
            hash_commit("name", "Alice", &salt),
            hash_commit("name", "Alice", &salt)
        );
    }

    #[test]
    fn value_change_changes_digest() {
        let salt = [0u8; SALT_LEN];
        assert_ne!(
            hash_commit("name", "Alice", &salt).digest,
            hash_commit("name", "Alicf", &salt).digest
        );
    }

    #[test]
    fn name_value_boundary_not_malleable() {
        let salt = [7u8; SALT_LEN];
        assert_ne!(
            hash_commit("ab", "c", &salt).digest,
            hash_commit("a", "bc", &salt).digest
        );
    }

    #[test]
    fn salt_scan_finds_no_collision() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let base = hash_commit("name", "Alice", &[0u8; SALT_LEN]);
        let mut digests = std::collections::BTreeSet::new();
        digests.insert(base.digest);
        for _ in 0..10_000 {
            let mut salt = [0u8; SALT_LEN];
            rng.fill_bytes(&mut salt);
            let c = hash_commit("name", "Alice", &salt);
            assert!(digests.insert(c.digest), "salt collision");
        }
    }
}
