//! Proof requests and holder-side presentation building: match wallet
//! credentials against the request's restrictions, reveal exactly the
//! requested attributes, and chain every used credential to one link
//! secret with an opening proof plus pairwise equality proofs — all bound
//! to the verifier's nonce.

use super::credential::{Nonce, RevocationCoords};
use crate::clock::Tick;
use crate::connect::wallet::Wallet;
use crate::crypto::{
    prove_equal, prove_opening, PedersenCommitment, SigmaProof, Signature, Transcript, SALT_LEN,
};
use crate::enc::{Dec, DecodeError, Enc};
use crate::ledger::LedgerHub;
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttributeRestriction {
    /// Accepted schema ids; empty means unrestricted.
    pub schema_ids: Vec<String>,
    /// Accepted credential definition ids; empty means unrestricted.
    pub cred_def_ids: Vec<String>,
}

impl AttributeRestriction {
    pub fn admits(&self, schema_id: &str, cred_def_id: &str) -> bool {
        (self.schema_ids.is_empty() || self.schema_ids.iter().any(|s| s == schema_id))
            && (self.cred_def_ids.is_empty() || self.cred_def_ids.iter().any(|c| c == cred_def_id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestedAttribute {
    pub name: String,
    pub restrictions: AttributeRestriction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonRevocationRequirement {
    /// The holder must prove its credentials were unrevoked as of this tick.
    pub as_of: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofRequest {
    pub nonce: Nonce,
    pub requested: Vec<RequestedAttribute>,
    pub non_revocation: Option<NonRevocationRequirement>,
    pub created_at: Tick,
    /// Verification later than created_at + freshness_window is refused.
    pub freshness_window: Tick,
}

impl ProofRequest {
    pub fn new<R: RngCore>(
        requested: Vec<RequestedAttribute>,
        non_revocation: Option<NonRevocationRequirement>,
        created_at: Tick,
        freshness_window: Tick,
        rng: &mut R,
    ) -> Self {
        let mut nonce = [0u8; 16];
        rng.fill_bytes(&mut nonce);
        ProofRequest {
            nonce,
            requested,
            non_revocation,
            created_at,
            freshness_window,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.proofreq.v1");
        e.field("nonce").put_bytes(&self.nonce);
        e.field("requested").put_count(self.requested.len());
        for r in &self.requested {
            e.put_str(&r.name);
            e.put_count(r.restrictions.schema_ids.len());
            for s in &r.restrictions.schema_ids {
                e.put_str(s);
            }
            e.put_count(r.restrictions.cred_def_ids.len());
            for c in &r.restrictions.cred_def_ids {
                e.put_str(c);
            }
        }
        match self.non_revocation {
            Some(nr) => {
                e.field("non_revocation").put_bool(true);
                e.put_u64(nr.as_of);
            }
            None => {
                e.field("non_revocation").put_bool(false);
                e.put_u64(0);
            }
        }
        e.field("created_at").put_u64(self.created_at);
        e.field("freshness").put_u64(self.freshness_window);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.proofreq.v1")?;
        d.field("nonce")?;
        let nonce = d.fixed()?;
        d.field("requested")?;
        let n = d.count()?;
        let mut requested = Vec::with_capacity(n);
        for _ in 0..n {
            let name = d.str()?.to_string();
            let ns = d.count()?;
            let mut schema_ids = Vec::with_capacity(ns);
            for _ in 0..ns {
                schema_ids.push(d.str()?.to_string());
            }
            let nc = d.count()?;
            let mut cred_def_ids = Vec::with_capacity(nc);
            for _ in 0..nc {
                cred_def_ids.push(d.str()?.to_string());
            }
            requested.push(RequestedAttribute {
                name,
                restrictions: AttributeRestriction {
                    schema_ids,
                    cred_def_ids,
                },
            });
        }
        d.field("non_revocation")?;
        let has = d.bool()?;
        let as_of = d.u64()?;
        let non_revocation = has.then_some(NonRevocationRequirement { as_of });
        d.field("created_at")?;
        let created_at = d.u64()?;
        d.field("freshness")?;
        let freshness_window = d.u64()?;
        d.finish()?;
        Ok(ProofRequest {
            nonce,
            requested,
            non_revocation,
            created_at,
            freshness_window,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevealedAttribute {
    pub name: String,
    pub value: String,
    pub salt: [u8; SALT_LEN],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresentedCredential {
    pub cred_def_id: String,
    pub schema_id: String,
    pub attribute_commitments: Vec<[u8; 32]>,
    pub link_secret_commitment: PedersenCommitment,
    pub revocation: Option<RevocationCoords>,
    pub expiration: Tick,
    pub issuer_signature: Signature,
    /// Registry version the holder claims was in force at the required
    /// tick; the verifier re-derives it from the ledger.
    pub revocation_version_claimed: Option<u64>,
    pub revealed: Vec<RevealedAttribute>,
}

impl PresentedCredential {
    /// The issuer-signed portion, reassembled for signature checking.
    pub fn signing_bytes(&self) -> Vec<u8> {
        super::credential::credential_signing_bytes(
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
        e.put_str("sim.vpcred.v1");
        e.field("core").put_bytes(&self.signing_bytes());
        e.field("sig").put_int(&self.issuer_signature.c);
        e.put_int(&self.issuer_signature.s);
        match self.revocation_version_claimed {
            Some(v) => {
                e.field("version_claimed").put_bool(true);
                e.put_u64(v);
            }
            None => {
                e.field("version_claimed").put_bool(false);
                e.put_u64(0);
            }
        }
        e.field("revealed").put_count(self.revealed.len());
        for r in &self.revealed {
            e.put_str(&r.name);
            e.put_str(&r.value);
            e.put_bytes(&r.salt);
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.vpcred.v1")?;
        d.field("core")?;
        let core = d.bytes()?;
        d.field("sig")?;
        let issuer_signature = Signature {
            c: d.int()?,
            s: d.int()?,
        };
        d.field("version_claimed")?;
        let has_version = d.bool()?;
        let version = d.u64()?;
        d.field("revealed")?;
        let n = d.count()?;
        let mut revealed = Vec::with_capacity(n);
        for _ in 0..n {
            revealed.push(RevealedAttribute {
                name: d.str()?.to_string(),
                value: d.str()?.to_string(),
                salt: d.fixed()?,
            });
        }
        d.finish()?;

        // reuse the credential body parser on the signed core
        let mut c = Dec::new(core);
        c.field("sim.cred.v1")?;
        c.field("cred_def_id")?;
        let cred_def_id = c.str()?.to_string();
        c.field("schema_id")?;
        let schema_id = c.str()?.to_string();
        c.field("commitments")?;
        let n = c.count()?;
        let mut attribute_commitments = Vec::with_capacity(n);
        for _ in 0..n {
            attribute_commitments.push(c.fixed()?);
        }
        c.field("link")?;
        let link_secret_commitment = PedersenCommitment { value: c.int()? };
        c.field("revocation")?;
        let reg = c.str()?.to_string();
        let index = c.u32()?;
        let revocation = (!reg.is_empty()).then_some(RevocationCoords {
            registry_id: reg,
            index,
        });
        c.field("expiration")?;
        let expiration = c.u64()?;
        c.finish()?;

        Ok(PresentedCredential {
            cred_def_id,
            schema_id,
            attribute_commitments,
            link_secret_commitment,
            revocation,
            expiration,
            issuer_signature,
            revocation_version_claimed: has_version.then_some(version),
            revealed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiablePresentation {
    pub request_nonce: Nonce,
    pub credentials: Vec<PresentedCredential>,
    /// Knowledge of the first credential's link-secret commitment opening.
    pub opening_proof: SigmaProof,
    /// Equality of the committed link secret between credentials i and i+1.
    pub equality_proofs: Vec<SigmaProof>,
}

fn encode_sigma(e: &mut Enc, p: &SigmaProof) {
    e.put_count(p.commitment_elements.len());
    for el in &p.commitment_elements {
        e.put_int(el);
    }
    e.put_int(&p.challenge);
    e.put_count(p.responses.len());
    for r in &p.responses {
        e.put_int(r);
    }
}

fn decode_sigma(d: &mut Dec) -> Result<SigmaProof, DecodeError> {
    let n = d.count()?;
    let mut commitment_elements = Vec::with_capacity(n);
    for _ in 0..n {
        commitment_elements.push(d.int()?);
    }
    let challenge = d.int()?;
    let n = d.count()?;
    let mut responses = Vec::with_capacity(n);
    for _ in 0..n {
        responses.push(d.int()?);
    }
    Ok(SigmaProof {
        commitment_elements,
        challenge,
        responses,
    })
}

impl VerifiablePresentation {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.vp.v1");
        e.field("nonce").put_bytes(&self.request_nonce);
        e.field("credentials").put_count(self.credentials.len());
        for c in &self.credentials {
            e.put_bytes(&c.encode());
        }
        e.field("opening");
        encode_sigma(&mut e, &self.opening_proof);
        e.field("equality").put_count(self.equality_proofs.len());
        for p in &self.equality_proofs {
            encode_sigma(&mut e, p);
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.vp.v1")?;
        d.field("nonce")?;
        let request_nonce = d.fixed()?;
        d.field("credentials")?;
        let n = d.count()?;
        let mut credentials = Vec::with_capacity(n);
        for _ in 0..n {
            credentials.push(PresentedCredential::decode(d.bytes()?)?);
        }
        d.field("opening")?;
        let opening_proof = decode_sigma(&mut d)?;
        d.field("equality")?;
        let n = d.count()?;
        let mut equality_proofs = Vec::with_capacity(n);
        for _ in 0..n {
            equality_proofs.push(decode_sigma(&mut d)?);
        }
        d.finish()?;
        Ok(VerifiablePresentation {
            request_nonce,
            credentials,
            opening_proof,
            equality_proofs,
        })
    }
}

/// Transcript shared by every proof in a presentation: the request nonce
/// is absorbed first, then each presented credential in order.
pub fn presentation_transcript(
    request_nonce: &Nonce,
    credentials: &[PresentedCredential],
) -> Transcript {
    let mut t = Transcript::new("sim.vp.v1");
    t.absorb("nonce", request_nonce);
    for (i, c) in credentials.iter().enumerate() {
        t.absorb(&format!("credential.{i}"), &c.encode());
    }
    t
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PresentError {
    #[error("no credential satisfies request items: {}", unsatisfied.join(", "))]
    NoMatchingCredential { unsatisfied: Vec<String> },
    #[error("matching credential from `{cred_def_id}` is revoked")]
    RevokedCredential { cred_def_id: String },
    #[error("could not read ledger state: {0}")]
    Resolution(String),
}

/// Pick the smallest set of wallet credentials that covers the request.
/// Exhaustive over subsets in (size, index) order, so the choice is
/// deterministic; wallets are small.
fn choose_cover(candidates: &[Vec<usize>], credential_count: usize) -> Option<(u32, Vec<usize>)> {
    if credential_count == 0 || credential_count > 20 {
        return None;
    }
    for size in 1..=credential_count as u32 {
        for mask in 0u32..(1 << credential_count) {
            if mask.count_ones() != size {
                continue;
            }
            let covers = candidates.iter().all(|cands| {
                cands.iter().any(|i| mask & (1 << i) != 0)
            });
            if covers {
                let assignment = candidates
                    .iter()
                    .map(|cands| {
                        *cands
                            .iter()
                            .find(|i| mask & (1 << **i) != 0)
                            .expect("cover checked")
                    })
                    .collect();
                return Some((mask, assignment));
            }
        }
    }
    None
}

/// Attributes the wallet can satisfy, per request item. Used by the
/// new-to-KYC flow to split a request into VP-coverable and
/// document-needed parts.
pub fn coverable_attributes(
    wallet: &Wallet,
    request: &ProofRequest,
    hub: &LedgerHub,
    now: Tick,
) -> (Vec<String>, Vec<String>) {
    let mut covered = Vec::new();
    let mut missing = Vec::new();
    for item in &request.requested {
        let ok = wallet.credentials.iter().any(|held| {
            credential_admissible(held, item, request.non_revocation, hub, now) == Admissible::Yes
        });
        if ok {
            covered.push(item.name.clone());
        } else {
            missing.push(item.name.clone());
        }
    }
    (covered, missing)
}

#[derive(PartialEq)]
enum Admissible {
    Yes,
    Revoked,
    No,
}

fn credential_admissible(
    held: &super::credential::HeldCredential,
    item: &RequestedAttribute,
    non_revocation: Option<NonRevocationRequirement>,
    hub: &LedgerHub,
    now: Tick,
) -> Admissible {
    let cred = &held.credential;
    if !item.restrictions.admits(&cred.schema_id, &cred.cred_def_id) {
        return Admissible::No;
    }
    if !held.values.contains_key(&item.name) {
        return Admissible::No;
    }
    if cred.expiration <= now {
        return Admissible::No;
    }
    if let Some(req) = non_revocation {
        let Some(coords) = &cred.revocation else {
            return Admissible::No;
        };
        match hub.registry_at_tick(&coords.registry_id, req.as_of) {
            Ok(state) if state.revoked.contains(&coords.index) => Admissible::Revoked,
            Ok(_) => Admissible::Yes,
            Err(_) => Admissible::No,
        }
    } else {
        Admissible::Yes
    }
}

/// Build a presentation for the request, revealing exactly the requested
/// attributes and their salts from a minimal set of credentials.
pub fn create_presentation<R: RngCore>(
    wallet: &mut Wallet,
    request: &ProofRequest,
    hub: &LedgerHub,
    now: Tick,
    rng: &mut R,
) -> Result<VerifiablePresentation, PresentError> {
    let group = wallet.group();
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(request.requested.len());
    let mut unsatisfied = Vec::new();
    let mut revoked_blocker: Option<String> = None;
    for item in &request.requested {
        let mut cands = Vec::new();
        let mut saw_revoked = None;
        for (i, held) in wallet.credentials.iter().enumerate() {
            match credential_admissible(held, item, request.non_revocation, hub, now) {
                Admissible::Yes => cands.push(i),
                Admissible::Revoked => {
                    saw_revoked = Some(held.credential.cred_def_id.clone());
                }
                Admissible::No => {}
            }
        }
        if cands.is_empty() {
            match saw_revoked {
                Some(id) => revoked_blocker = Some(id),
                None => unsatisfied.push(item.name.clone()),
            }
        }
        candidates.push(cands);
    }
    if !unsatisfied.is_empty() {
        return Err(PresentError::NoMatchingCredential { unsatisfied });
    }
    if let Some(cred_def_id) = revoked_blocker {
        return Err(PresentError::RevokedCredential { cred_def_id });
    }

    let (mask, assignment) = choose_cover(&candidates, wallet.credentials.len())
        .ok_or_else(|| PresentError::NoMatchingCredential {
            unsatisfied: request.requested.iter().map(|r| r.name.clone()).collect(),
        })?;

    let used: Vec<usize> = (0..wallet.credentials.len())
        .filter(|i| mask & (1 << i) != 0)
        .collect();

    let mut presented = Vec::with_capacity(used.len());
    for &idx in &used {
        let held = &wallet.credentials[idx];
        let cred = &held.credential;
        let mut revealed = Vec::new();
        for (req_i, item) in request.requested.iter().enumerate() {
            if assignment[req_i] != idx {
                continue;
            }
            revealed.push(RevealedAttribute {
                name: item.name.clone(),
                value: held.values[&item.name].clone(),
                salt: held.salts[&item.name],
            });
        }
        revealed.sort_by(|a, b| a.name.cmp(&b.name));
        let version_claimed = match (request.non_revocation, &cred.revocation) {
            (Some(req), Some(coords)) => Some(
                hub.registry_at_tick(&coords.registry_id, req.as_of)
                    .map_err(|e| PresentError::Resolution(e.to_string()))?
                    .version,
            ),
            _ => None,
        };
        presented.push(PresentedCredential {
            cred_def_id: cred.cred_def_id.clone(),
            schema_id: cred.schema_id.clone(),
            attribute_commitments: cred.attribute_commitments.clone(),
            link_secret_commitment: cred.link_secret_commitment.clone(),
            revocation: cred.revocation.clone(),
            expiration: cred.expiration,
            issuer_signature: cred.issuer_signature.clone(),
            revocation_version_claimed: version_claimed,
            revealed,
        });
    }

    let transcript = presentation_transcript(&request.nonce, &presented);
    let link_secret = wallet.link_secret().clone();
    let first = &wallet.credentials[used[0]];
    let opening_proof = prove_opening(
        group,
        &first.credential.link_secret_commitment,
        &link_secret,
        &first.link_blinding,
        &transcript,
        rng,
    );
    let mut equality_proofs = Vec::new();
    for pair in used.windows(2) {
        let a = &wallet.credentials[pair[0]];
        let b = &wallet.credentials[pair[1]];
        equality_proofs.push(prove_equal(
            group,
            &a.credential.link_secret_commitment,
            &b.credential.link_secret_commitment,
            &link_secret,
            &a.link_blinding,
            &b.link_blinding,
            &transcript,
            rng,
        ));
    }

    let revealed_names: Vec<String> = request.requested.iter().map(|r| r.name.clone()).collect();
    wallet.record_disclosure(now, request.nonce, revealed_names);

    Ok(VerifiablePresentation {
        request_nonce: request.nonce,
        credentials: presented,
        opening_proof,
        equality_proofs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_prefers_fewest_credentials() {
        // attr0 satisfiable by cred0 or cred1; attr1 only by cred1:
        // minimal cover is {cred1} alone
        let candidates = vec![vec![0, 1], vec![1]];
        let (mask, assignment) = choose_cover(&candidates, 2).unwrap();
        assert_eq!(mask, 0b10);
        assert_eq!(assignment, vec![1, 1]);
    }

    #[test]
    fn cover_brute_force_oracle() {
        // oracle: enumerate every attr->credential assignment and take the
        // minimum number of distinct credentials used
        fn oracle_min(candidates: &[Vec<usize>]) -> Option<u32> {
            fn rec(candidates: &[Vec<usize>], i: usize, used: u32) -> Option<u32> {
                if i == candidates.len() {
                    return Some(used.count_ones());
                }
                let mut best = None;
                for &c in &candidates[i] {
                    if let Some(n) = rec(candidates, i + 1, used | (1 << c)) {
                        best = Some(best.map_or(n, |b: u32| b.min(n)));
                    }
                }
                best
            }
            rec(candidates, 0, 0)
        }
        let cases: Vec<Vec<Vec<usize>>> = vec![
            vec![vec![0], vec![1], vec![2]],
            vec![vec![0, 1], vec![1, 2], vec![2]],
            vec![vec![0, 3], vec![1, 3], vec![2, 3]],
            vec![vec![0], vec![0, 1]],
        ];
        for candidates in cases {
            let max = 1 + candidates
                .iter()
                .flatten()
                .copied()
                .max()
                .unwrap();
            let (mask, _) = choose_cover(&candidates, max).unwrap();
            assert_eq!(Some(mask.count_ones()), oracle_min(&candidates));
        }
    }

    #[test]
    fn unsolvable_cover_is_none() {
        assert!(choose_cover(&[vec![]], 1).is_none());
        assert!(choose_cover(&[vec![0]], 0).is_none());
    }

    #[test]
    fn proof_request_round_trip() {
        let req = ProofRequest {
            nonce: [9u8; 16],
            requested: vec![RequestedAttribute {
                name: "name".into(),
                restrictions: AttributeRestriction {
                    schema_ids: vec!["schema:L1:kyc:1.0".into()],
                    cred_def_ids: vec![],
                },
            }],
            non_revocation: Some(NonRevocationRequirement { as_of: 12 }),
            created_at: 10,
            freshness_window: 30,
        };
        assert_eq!(ProofRequest::decode(&req.encode()).unwrap(), req);
    }
}
