//! Decentralized identifiers and their documents. Public DIDs live on a
//! named ledger (`did:sim:<ledger_id>:<idstring>`); pairwise peer DIDs
//! (`did:peer:<idstring>`) exist only between two parties and never touch
//! a ledger. idstrings are self-certifying: base-32 of the hash of the
//! initial public key.

use crate::crypto::{sha256, Signature};
use crate::enc::{Dec, DecodeError, Enc};
use num_bigint::BigUint;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Did {
    Public { ledger_id: String, idstring: String },
    Peer { idstring: String },
}

fn idstring_for_key(public_key: &BigUint) -> String {
    let digest = sha256(&public_key.to_bytes_be());
    data_encoding::BASE32_NOPAD
        .encode(&digest)
        .to_ascii_lowercase()
}

impl Did {
    pub fn public_from_key(ledger_id: &str, public_key: &BigUint) -> Self {
        Did::Public {
            ledger_id: ledger_id.to_string(),
            idstring: idstring_for_key(public_key),
        }
    }

    pub fn peer_from_key(public_key: &BigUint) -> Self {
        Did::Peer {
            idstring: idstring_for_key(public_key),
        }
    }

    pub fn is_peer(&self) -> bool {
        matches!(self, Did::Peer { .. })
    }

    pub fn ledger_id(&self) -> Option<&str> {
        match self {
            Did::Public { ledger_id, .. } => Some(ledger_id),
            Did::Peer { .. } => None,
        }
    }

    pub fn idstring(&self) -> &str {
        match self {
            Did::Public { idstring, .. } | Did::Peer { idstring } => idstring,
        }
    }

    pub fn parse(s: &str) -> Option<Did> {
        let rest = s.strip_prefix("did:")?;
        if let Some(peer) = rest.strip_prefix("peer:") {
            if peer.is_empty() || peer.contains(':') {
                return None;
            }
            return Some(Did::Peer {
                idstring: peer.to_string(),
            });
        }
        let rest = rest.strip_prefix("sim:")?;
        let (ledger_id, idstring) = rest.split_once(':')?;
        if ledger_id.is_empty() || idstring.is_empty() || idstring.contains(':') {
            return None;
        }
        Some(Did::Public {
            ledger_id: ledger_id.to_string(),
            idstring: idstring.to_string(),
        })
    }
}

impl fmt::Display for Did {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Did::Public {
                ledger_id,
                idstring,
            } => write!(f, "did:sim:{ledger_id}:{idstring}"),
            Did::Peer { idstring } => write!(f, "did:peer:{idstring}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationKey {
    pub key_id: String,
    pub public_key: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceEndpoint {
    pub label: String,
    pub address: String,
}

/// An issuer certification over a DID's key, the simulator's stand-in for
/// an external trust anchor on an institution's signing key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyAttestation {
    pub key_id: String,
    pub attester: Did,
    pub signature: Signature,
}

/// Bytes an attester signs when certifying `key_id`/`public_key` of `did`.
pub fn attestation_message(did: &Did, key_id: &str, public_key: &BigUint) -> Vec<u8> {
    let mut e = Enc::new();
    e.put_str("sim.attest.v1");
    e.put_str(&did.to_string());
    e.put_str(key_id);
    e.put_int(public_key);
    e.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DidDocument {
    pub did: Did,
    pub verification_keys: Vec<VerificationKey>,
    pub service_endpoints: Vec<ServiceEndpoint>,
    pub attestations: Vec<KeyAttestation>,
}

impl DidDocument {
    pub fn key(&self, key_id: &str) -> Option<&VerificationKey> {
        self.verification_keys.iter().find(|k| k.key_id == key_id)
    }

    pub fn endpoint(&self, label: &str) -> Option<&ServiceEndpoint> {
        self.service_endpoints.iter().find(|e| e.label == label)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.diddoc.v1");
        e.field("did").put_str(&self.did.to_string());
        e.field("keys").put_count(self.verification_keys.len());
        for k in &self.verification_keys {
            e.put_str(&k.key_id);
            e.put_int(&k.public_key);
        }
        e.field("endpoints").put_count(self.service_endpoints.len());
        for ep in &self.service_endpoints {
            e.put_str(&ep.label);
            e.put_str(&ep.address);
        }
        e.field("attestations").put_count(self.attestations.len());
        for a in &self.attestations {
            e.put_str(&a.key_id);
            e.put_str(&a.attester.to_string());
            e.put_int(&a.signature.c);
            e.put_int(&a.signature.s);
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.diddoc.v1")?;
        d.field("did")?;
        let did = Did::parse(d.str()?)
            .ok_or_else(|| DecodeError::Invalid("bad did syntax".into()))?;
        d.field("keys")?;
        let nkeys = d.count()?;
        let mut verification_keys = Vec::with_capacity(nkeys);
        for _ in 0..nkeys {
            verification_keys.push(VerificationKey {
                key_id: d.str()?.to_string(),
                public_key: d.int()?,
            });
        }
        d.field("endpoints")?;
        let neps = d.count()?;
        let mut service_endpoints = Vec::with_capacity(neps);
        for _ in 0..neps {
            service_endpoints.push(ServiceEndpoint {
                label: d.str()?.to_string(),
                address: d.str()?.to_string(),
            });
        }
        d.field("attestations")?;
        let natts = d.count()?;
        let mut attestations = Vec::with_capacity(natts);
        for _ in 0..natts {
            attestations.push(KeyAttestation {
                key_id: d.str()?.to_string(),
                attester: Did::parse(d.str()?)
                    .ok_or_else(|| DecodeError::Invalid("bad attester did".into()))?,
                signature: Signature {
                    c: d.int()?,
                    s: d.int()?,
                },
            });
        }
        d.finish()?;
        if verification_keys.is_empty() {
            return Err(DecodeError::Invalid("document without keys".into()));
        }
        Ok(DidDocument {
            did,
            verification_keys,
            service_endpoints,
            attestations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{keygen, GroupProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn did_display_and_parse_round_trip() {
        let g = GroupProfile::Test.params();
        let kp = keygen(g, &mut ChaCha20Rng::seed_from_u64(1));
        let public = Did::public_from_key("L1", &kp.pk);
        let peer = Did::peer_from_key(&kp.pk);
        assert_eq!(Did::parse(&public.to_string()), Some(public.clone()));
        assert_eq!(Did::parse(&peer.to_string()), Some(peer));
        assert!(public.to_string().starts_with("did:sim:L1:"));
        assert!(Did::parse("did:web:foo").is_none());
        assert!(Did::parse("did:sim:L1:").is_none());
    }

    #[test]
    fn idstring_is_self_certifying() {
        let g = GroupProfile::Test.params();
        let kp = keygen(g, &mut ChaCha20Rng::seed_from_u64(2));
        let did = Did::public_from_key("L1", &kp.pk);
        assert_eq!(did.idstring(), idstring_for_key(&kp.pk));
        let other = keygen(g, &mut ChaCha20Rng::seed_from_u64(3));
        assert_ne!(did.idstring(), idstring_for_key(&other.pk));
    }

    #[test]
    fn document_round_trip() {
        let g = GroupProfile::Test.params();
        let kp = keygen(g, &mut ChaCha20Rng::seed_from_u64(4));
        let doc = DidDocument {
            did: Did::public_from_key("L1", &kp.pk),
            verification_keys: vec![VerificationKey {
                key_id: "key-1".into(),
                public_key: kp.pk.clone(),
            }],
            service_endpoints: vec![ServiceEndpoint {
                label: "kyc".into(),
                address: "mb-0001".into(),
            }],
            attestations: vec![],
        };
        let decoded = DidDocument::decode(&doc.encode()).unwrap();
        assert_eq!(decoded, doc);
    }

    #[test]
    fn document_without_keys_rejected() {
        let g = GroupProfile::Test.params();
        let kp = keygen(g, &mut ChaCha20Rng::seed_from_u64(5));
        let doc = DidDocument {
            did: Did::public_from_key("L1", &kp.pk),
            verification_keys: vec![],
            service_endpoints: vec![],
            attestations: vec![],
        };
        assert!(DidDocument::decode(&doc.encode()).is_err());
    }
}
