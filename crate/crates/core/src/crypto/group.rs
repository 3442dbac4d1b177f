//! Group parameters: a prime p, a prime q dividing p−1, and two generators
//! g, h of the order-q subgroup with no known discrete-log relation.
//!
//! Two profiles exist. TEST (p=23, q=11, g=2, h=3) is small enough for
//! exhaustive property checks. DEFAULT is the 2048-bit safe-prime MODP
//! group from RFC 3526 §3 with g=2 (a quadratic residue, hence of order
//! q=(p−1)/2) and h derived by hashing a domain tag into the subgroup:
//! h = H_expand(tag, ctr)^((p−1)/q) mod p, rejecting 1.

use super::{sha256, CryptoError};
use crate::enc::Enc;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use rand::RngCore;

const RFC3526_2048_P_HEX: &str = "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1\
29024E088A67CC74020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437\
4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7EDEE386BFB5A899FA5\
AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F\
83655D23DCA3AD961C62F356208552BB9ED529077096966D670C354E4ABC9804F1746C08CA18217C\
32905E462E36CE3BE39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718\
3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF";

const H_DOMAIN_TAG: &str = "sim.group.h.v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
    pub h: BigUint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GroupProfile {
    #[serde(rename = "TEST")]
    Test,
    #[serde(rename = "DEFAULT")]
    Default,
}

static TEST_GROUP: Lazy<GroupParams> = Lazy::new(|| {
    let params = GroupParams {
        p: BigUint::from(23u32),
        q: BigUint::from(11u32),
        g: BigUint::from(2u32),
        h: BigUint::from(3u32),
    };
    params.validate().expect("TEST group invalid");
    params
});

static DEFAULT_GROUP: Lazy<GroupParams> = Lazy::new(|| {
    let p = BigUint::parse_bytes(RFC3526_2048_P_HEX.as_bytes(), 16).unwrap();
    let q = (&p - BigUint::one()) >> 1;
    let g = BigUint::from(2u32);
    let h = derive_second_generator(&p, &q, H_DOMAIN_TAG);
    let params = GroupParams { p, q, g, h };
    params.validate().expect("DEFAULT group invalid");
    params
});

impl GroupProfile {
    pub fn params(self) -> &'static GroupParams {
        match self {
            GroupProfile::Test => &TEST_GROUP,
            GroupProfile::Default => &DEFAULT_GROUP,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupProfile::Test => "TEST",
            GroupProfile::Default => "DEFAULT",
        }
    }

    /// Passphrase KDF iteration count for wallet backups.
    pub fn kdf_iterations(self) -> u32 {
        match self {
            GroupProfile::Test => 10,
            GroupProfile::Default => 10_000,
        }
    }
}

impl GroupParams {
    pub fn validate(&self) -> Result<(), CryptoError> {
        let one = BigUint::one();
        if self.p <= one || self.q <= one {
            return Err(CryptoError::BadGroup("p and q must exceed 1".into()));
        }
        if (&self.p - &one) % &self.q != BigUint::zero() {
            return Err(CryptoError::BadGroup("q does not divide p-1".into()));
        }
        if !is_probable_prime(&self.q) {
            return Err(CryptoError::BadGroup("q is not prime".into()));
        }
        for (name, x) in [("g", &self.g), ("h", &self.h)] {
            if x <= &one || x >= &self.p {
                return Err(CryptoError::BadGroup(format!("{name} out of range")));
            }
            if x.modpow(&self.q, &self.p) != one {
                return Err(CryptoError::BadGroup(format!("{name}^q != 1")));
            }
        }
        Ok(())
    }

    /// Membership in the order-q subgroup (the identity element included).
    pub fn is_element(&self, x: &BigUint) -> bool {
        !x.is_zero() && x < &self.p && x.modpow(&self.q, &self.p).is_one()
    }

    pub fn is_scalar(&self, s: &BigUint) -> bool {
        s < &self.q
    }

    /// Uniform scalar in [0, q−1] by rejection sampling. The byte
    /// consumption order is fixed so identical seeds give identical
    /// scalars on every platform.
    pub fn rand_scalar<R: RngCore>(&self, rng: &mut R) -> BigUint {
        let bits = self.q.bits();
        let nbytes = bits.div_ceil(8) as usize;
        let excess = (nbytes as u64 * 8 - bits) as u32;
        let mask = 0xffu8 >> excess;
        let mut buf = vec![0u8; nbytes];
        loop {
            rng.fill_bytes(&mut buf);
            buf[0] &= mask;
            let x = BigUint::from_bytes_be(&buf);
            if x < self.q {
                return x;
            }
        }
    }

    /// Uniform scalar in [1, q−1].
    pub fn rand_nonzero_scalar<R: RngCore>(&self, rng: &mut R) -> BigUint {
        loop {
            let x = self.rand_scalar(rng);
            if !x.is_zero() {
                return x;
            }
        }
    }

    pub(crate) fn mod_mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.q
    }

    pub(crate) fn mod_add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a + b) % &self.q
    }

    pub(crate) fn mod_sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        ((a + &self.q) - (b % &self.q)) % &self.q
    }
}

/// Hash a domain tag into the order-q subgroup. The exponent (p−1)/q maps
/// any nonzero residue into the subgroup; counters are bumped until the
/// result is not the identity.
fn derive_second_generator(p: &BigUint, q: &BigUint, tag: &str) -> BigUint {
    let cofactor = (p - BigUint::one()) / q;
    let nbytes = (p.bits().div_ceil(8)) as usize;
    for ctr in 0u32.. {
        let mut material = Vec::new();
        let mut block = 0u32;
        while material.len() < nbytes {
            let mut e = Enc::new();
            e.put_str(tag);
            e.put_u32(ctr);
            e.put_u32(block);
            material.extend_from_slice(&sha256(&e.into_bytes()));
            block += 1;
        }
        let x = BigUint::from_bytes_be(&material[..nbytes]) % p;
        if x.is_zero() {
            continue;
        }
        let h = x.modpow(&cofactor, p);
        if !h.is_one() {
            return h;
        }
    }
    unreachable!()
}

/// Miller–Rabin with fixed bases; deterministic for all inputs we feed it
/// (exact below 3.3·10^24, overwhelming confidence for the 2048-bit q).
fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for small in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let s = BigUint::from(small);
        if n == &s {
            return true;
        }
        if (n % &s).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - BigUint::one();
    let trailing = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> trailing;
    'bases: for base in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigUint::from(base).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..trailing {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha20Rng;
    use rand::SeedableRng;

    #[test]
    fn test_group_is_valid() {
        let g = GroupProfile::Test.params();
        assert_eq!(g.p, BigUint::from(23u32));
        assert_eq!(g.q, BigUint::from(11u32));
        assert!(g.is_element(&g.g));
        assert!(g.is_element(&g.h));
        assert!(g.is_element(&BigUint::one()));
        // 5 generates the full group mod 23, not the subgroup
        assert!(!g.is_element(&BigUint::from(5u32)));
    }

    #[test]
    fn default_group_is_valid() {
        let g = GroupProfile::Default.params();
        assert!(g.p.bits() >= 2048);
        assert!(g.is_element(&g.h));
        assert_ne!(g.h, g.g);
        assert!(!g.h.is_one());
    }

    #[test]
    fn scalar_sampling_in_range_and_deterministic() {
        let g = GroupProfile::Test.params();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let s = g.rand_scalar(&mut rng);
            assert!(s < g.q);
            seen.insert(s);
        }
        // all 11 residues show up over 200 draws
        assert_eq!(seen.len(), 11);

        let mut r1 = ChaCha20Rng::seed_from_u64(99);
        let mut r2 = ChaCha20Rng::seed_from_u64(99);
        for _ in 0..50 {
            assert_eq!(g.rand_scalar(&mut r1), g.rand_scalar(&mut r2));
        }
    }

    #[test]
    fn nonzero_scalar_never_zero() {
        let g = GroupProfile::Test.params();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(!g.rand_nonzero_scalar(&mut rng).is_zero());
        }
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        // independent oracle: trial division up to sqrt(n)
        fn is_prime_slow(n: u64) -> bool {
            if n < 2 {
                return false;
            }
            let mut d = 2;
            while d * d <= n {
                if n % d == 0 {
                    return false;
                }
                d += 1;
            }
            true
        }
        for n in 0..500u64 {
            assert_eq!(
                is_probable_prime(&BigUint::from(n)),
                is_prime_slow(n),
                "disagree at {n}"
            );
        }
    }
}
