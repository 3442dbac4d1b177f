//! Credential wire objects: offers, blinded requests, the issued
//! credential itself, and the holder-side companion secrets (values,
//! salts, blinding randomness) that never leave the wallet.

use crate::clock::Tick;
use crate::crypto::{PedersenCommitment, Signature, SALT_LEN};
use crate::enc::{Dec, DecodeError, Enc};
use num_bigint::BigUint;
use std::collections::BTreeMap;

pub const NONCE_LEN: usize = 16;
pub type Nonce = [u8; NONCE_LEN];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CredentialOffer {
    pub cred_def_id: String,
    pub preview: BTreeMap<String, String>,
    pub expiration: Tick,
    pub registry_id: Option<String>,
    pub nonce: Nonce,
}

impl CredentialOffer {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.offer.v1");
        e.field("cred_def_id").put_str(&self.cred_def_id);
        e.field("preview").put_count(self.preview.len());
        for (k, v) in &self.preview {
            e.put_str(k);
            e.put_str(v);
        }
        e.field("expiration").put_u64(self.expiration);
        e.field("registry_id")
            .put_str(self.registry_id.as_deref().unwrap_or(""));
        e.field("nonce").put_bytes(&self.nonce);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.offer.v1")?;
        d.field("cred_def_id")?;
        let cred_def_id = d.str()?.to_string();
        d.field("preview")?;
        let n = d.count()?;
        let mut preview = BTreeMap::new();
        for _ in 0..n {
            let k = d.str()?.to_string();
            let v = d.str()?.to_string();
            preview.insert(k, v);
        }
        d.field("expiration")?;
        let expiration = d.u64()?;
        d.field("registry_id")?;
        let reg = d.str()?;
        let registry_id = (!reg.is_empty()).then(|| reg.to_string());
        d.field("nonce")?;
        let nonce = d.fixed()?;
        d.finish()?;
        Ok(CredentialOffer {
            cred_def_id,
            preview,
            expiration,
            registry_id,
            nonce,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CredentialRequest {
    pub offer_nonce: Nonce,
    pub blinded_link_secret: PedersenCommitment,
    pub nonce: Nonce,
}

impl CredentialRequest {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.credreq.v1");
        e.field("offer_nonce").put_bytes(&self.offer_nonce);
        e.field("blinded_link_secret")
            .put_int(&self.blinded_link_secret.value);
        e.field("nonce").put_bytes(&self.nonce);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.credreq.v1")?;
        d.field("offer_nonce")?;
        let offer_nonce = d.fixed()?;
        d.field("blinded_link_secret")?;
        let blinded_link_secret = PedersenCommitment { value: d.int()? };
        d.field("nonce")?;
        let nonce = d.fixed()?;
        d.finish()?;
        Ok(CredentialRequest {
            offer_nonce,
            blinded_link_secret,
            nonce,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevocationCoords {
    pub registry_id: String,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiableCredential {
    pub cred_def_id: String,
    pub schema_id: String,
    /// Salted-hash digests in schema attribute order.
    pub attribute_commitments: Vec<[u8; 32]>,
    pub link_secret_commitment: PedersenCommitment,
    pub revocation: Option<RevocationCoords>,
    pub expiration: Tick,
    pub issuer_signature: Signature,
}

/// The bytes an issuer signs: everything except the signature itself.
pub fn credential_signing_bytes(
    cred_def_id: &str,
    schema_id: &str,
    attribute_commitments: &[[u8; 32]],
    link_secret_commitment: &PedersenCommitment,
    revocation: Option<&RevocationCoords>,
    expiration: Tick,
) -> Vec<u8> {
    let mut e = Enc::new();
    e.put_str("sim.cred.v1");
    e.field("cred_def_id").put_str(cred_def_id);
    e.field("schema_id").put_str(schema_id);
    e.field("commitments").put_count(attribute_commitments.len());
    for c in attribute_commitments {
        e.put_bytes(c);
    }
    e.field("link").put_int(&link_secret_commitment.value);
    match revocation {
        Some(r) => {
            e.field("revocation").put_str(&r.registry_id);
            e.put_u32(r.index);
        }
        None => {
            e.field("revocation").put_str("");
            e.put_u32(0);
        }
    }
    e.field("expiration").put_u64(expiration);
    e.into_bytes()
}

impl VerifiableCredential {
    pub fn signing_bytes(&self) -> Vec<u8> {
        credential_signing_bytes(
            &self.cred_def_id,
            &self.schema_id,
            &self.attribute_commitments,
            &self.link_secret_commitment,
            self.revocation.as_ref(),
            self.expiration,
        )
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_bytes(&self.signing_bytes());
        e.field("sig").put_int(&self.issuer_signature.c);
        e.put_int(&self.issuer_signature.s);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut outer = Dec::new(bytes);
        let body = outer.bytes()?;
        outer.field("sig")?;
        let issuer_signature = Signature {
            c: outer.int()?,
            s: outer.int()?,
        };
        outer.finish()?;

        let mut d = Dec::new(body);
        d.field("sim.cred.v1")?;
        d.field("cred_def_id")?;
        let cred_def_id = d.str()?.to_string();
        d.field("schema_id")?;
        let schema_id = d.str()?.to_string();
        d.field("commitments")?;
        let n = d.count()?;
        let mut attribute_commitments = Vec::with_capacity(n);
        for _ in 0..n {
            attribute_commitments.push(d.fixed()?);
        }
        d.field("link")?;
        let link_secret_commitment = PedersenCommitment { value: d.int()? };
        d.field("revocation")?;
        let reg = d.str()?.to_string();
        let index = d.u32()?;
        let revocation = (!reg.is_empty()).then_some(RevocationCoords {
            registry_id: reg,
            index,
        });
        d.field("expiration")?;
        let expiration = d.u64()?;
        d.finish()?;
        Ok(VerifiableCredential {
            cred_def_id,
            schema_id,
            attribute_commitments,
            link_secret_commitment,
            revocation,
            expiration,
            issuer_signature,
        })
    }
}

/// What the issuer actually transmits: the signed credential plus the
/// attribute plaintexts and salts the holder needs to open commitments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CredentialBundle {
    pub offer_nonce: Nonce,
    pub credential: VerifiableCredential,
    pub values: BTreeMap<String, String>,
    pub salts: BTreeMap<String, [u8; SALT_LEN]>,
}

impl CredentialBundle {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.credbundle.v1");
        e.field("offer_nonce").put_bytes(&self.offer_nonce);
        e.field("credential").put_bytes(&self.credential.encode());
        e.field("values").put_count(self.values.len());
        for (k, v) in &self.values {
            e.put_str(k);
            e.put_str(v);
        }
        e.field("salts").put_count(self.salts.len());
        for (k, v) in &self.salts {
            e.put_str(k);
            e.put_bytes(v);
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.credbundle.v1")?;
        d.field("offer_nonce")?;
        let offer_nonce = d.fixed()?;
        d.field("credential")?;
        let credential = VerifiableCredential::decode(d.bytes()?)?;
        d.field("values")?;
        let n = d.count()?;
        let mut values = BTreeMap::new();
        for _ in 0..n {
            let k = d.str()?.to_string();
            values.insert(k, d.str()?.to_string());
        }
        d.field("salts")?;
        let n = d.count()?;
        let mut salts = BTreeMap::new();
        for _ in 0..n {
            let k = d.str()?.to_string();
            salts.insert(k, d.fixed()?);
        }
        d.finish()?;
        Ok(CredentialBundle {
            offer_nonce,
            credential,
            values,
            salts,
        })
    }
}

/// Wallet-resident credential: the signed object plus everything needed to
/// present from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeldCredential {
    pub credential: VerifiableCredential,
    pub values: BTreeMap<String, String>,
    pub salts: BTreeMap<String, [u8; SALT_LEN]>,
    pub link_blinding: BigUint,
}

impl HeldCredential {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.field("credential").put_bytes(&self.credential.encode());
        e.field("values").put_count(self.values.len());
        for (k, v) in &self.values {
            e.put_str(k);
            e.put_str(v);
        }
        e.field("salts").put_count(self.salts.len());
        for (k, v) in &self.salts {
            e.put_str(k);
            e.put_bytes(v);
        }
        e.field("blinding").put_int(&self.link_blinding);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("credential")?;
        let credential = VerifiableCredential::decode(d.bytes()?)?;
        d.field("values")?;
        let n = d.count()?;
        let mut values = BTreeMap::new();
        for _ in 0..n {
            let k = d.str()?.to_string();
            values.insert(k, d.str()?.to_string());
        }
        d.field("salts")?;
        let n = d.count()?;
        let mut salts = BTreeMap::new();
        for _ in 0..n {
            let k = d.str()?.to_string();
            salts.insert(k, d.fixed()?);
        }
        d.field("blinding")?;
        let link_blinding = d.int()?;
        d.finish()?;
        Ok(HeldCredential {
            credential,
            values,
            salts,
            link_blinding,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn sample_credential() -> VerifiableCredential {
        VerifiableCredential {
            cred_def_id: "creddef:L1:ab:kyc:1.0".into(),
            schema_id: "schema:L1:kyc:1.0".into(),
            attribute_commitments: vec![[1u8; 32], [2u8; 32]],
            link_secret_commitment: PedersenCommitment {
                value: BigUint::from(9u32),
            },
            revocation: Some(RevocationCoords {
                registry_id: "revreg:L1:ab:0".into(),
                index: 3,
            }),
            expiration: 720,
            issuer_signature: Signature {
                c: BigUint::one(),
                s: BigUint::from(5u32),
            },
        }
    }

    #[test]
    fn credential_round_trip() {
        let vc = sample_credential();
        assert_eq!(VerifiableCredential::decode(&vc.encode()).unwrap(), vc);
    }

    #[test]
    fn signing_bytes_cover_every_field() {
        let base = sample_credential();
        let mut variants = vec![base.clone()];
        let mut v = base.clone();
        v.cred_def_id = "creddef:L1:ab:kyc:2.0".into();
        variants.push(v);
        let mut v = base.clone();
        v.attribute_commitments[0][0] ^= 1;
        variants.push(v);
        let mut v = base.clone();
        v.link_secret_commitment.value += BigUint::one();
        variants.push(v);
        let mut v = base.clone();
        v.revocation.as_mut().unwrap().index = 4;
        variants.push(v);
        let mut v = base.clone();
        v.expiration += 1;
        variants.push(v);
        let mut v = base.clone();
        v.revocation = None;
        variants.push(v);
        let bytes: Vec<_> = variants.iter().map(|c| c.signing_bytes()).collect();
        for i in 0..bytes.len() {
            for j in i + 1..bytes.len() {
                assert_ne!(bytes[i], bytes[j], "variants {i} and {j} collide");
            }
        }
    }

    #[test]
    fn bundle_round_trip() {
        let bundle = CredentialBundle {
            offer_nonce: [7u8; NONCE_LEN],
            credential: sample_credential(),
            values: [("name".to_string(), "Alice".to_string())].into(),
            salts: [("name".to_string(), [3u8; SALT_LEN])].into(),
        };
        assert_eq!(CredentialBundle::decode(&bundle.encode()).unwrap(), bundle);
    }
}
