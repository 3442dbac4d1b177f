//! Verifier-side presentation checking: issuer signatures against
//! on-ledger keys, commitment openings, restriction coverage, link-secret
//! proofs under the request-bound transcript, non-revocation against the
//! registry state actually in force at the required tick, expirations, and
//! nonce uniqueness. Failures are coded reasons, never panics; the ledger
//! is only ever read.

use super::present::{presentation_transcript, ProofRequest, VerifiablePresentation};
use crate::clock::Tick;
use crate::crypto::{hash_commit, verify, verify_equal, verify_opening, GroupParams};
use crate::ledger::LedgerHub;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureReason {
    RequestExpired,
    NonceReused,
    TranscriptMismatch,
    LinkProofInvalid,
    SignatureInvalid { cred_def_id: String },
    CommitmentMismatch { attr: String },
    MissingRequestedAttribute { attr: String },
    RestrictionUnsatisfied { attr: String },
    MalformedPresentation { detail: String },
    ResolutionFailed { detail: String },
    Revoked { cred_def_id: String },
    RevocationVersionStale { cred_def_id: String },
    NonRevocationMissing { cred_def_id: String },
    Expired { cred_def_id: String },
}

impl FailureReason {
    pub fn code(&self) -> &'static str {
        match self {
            FailureReason::RequestExpired => "RequestExpired",
            FailureReason::NonceReused => "NonceReused",
            FailureReason::TranscriptMismatch => "TranscriptMismatch",
            FailureReason::LinkProofInvalid => "LinkProofInvalid",
            FailureReason::SignatureInvalid { .. } => "SignatureInvalid",
            FailureReason::CommitmentMismatch { .. } => "CommitmentMismatch",
            FailureReason::MissingRequestedAttribute { .. } => "MissingRequestedAttribute",
            FailureReason::RestrictionUnsatisfied { .. } => "RestrictionUnsatisfied",
            FailureReason::MalformedPresentation { .. } => "MalformedPresentation",
            FailureReason::ResolutionFailed { .. } => "ResolutionFailed",
            FailureReason::Revoked { .. } => "Revoked",
            FailureReason::RevocationVersionStale { .. } => "RevocationVersionStale",
            FailureReason::NonRevocationMissing { .. } => "NonRevocationMissing",
            FailureReason::Expired { .. } => "Expired",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::SignatureInvalid { cred_def_id }
            | FailureReason::Revoked { cred_def_id }
            | FailureReason::RevocationVersionStale { cred_def_id }
            | FailureReason::NonRevocationMissing { cred_def_id }
            | FailureReason::Expired { cred_def_id } => {
                write!(f, "{}({cred_def_id})", self.code())
            }
            FailureReason::CommitmentMismatch { attr }
            | FailureReason::MissingRequestedAttribute { attr }
            | FailureReason::RestrictionUnsatisfied { attr } => {
                write!(f, "{}({attr})", self.code())
            }
            FailureReason::MalformedPresentation { detail }
            | FailureReason::ResolutionFailed { detail } => {
                write!(f, "{}({detail})", self.code())
            }
            _ => f.write_str(self.code()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationResult {
    pub accepted: bool,
    pub reasons: Vec<FailureReason>,
    pub attributes: BTreeMap<String, String>,
}

/// Per-verifier replay state: nonces stay consumed for the lifetime of the
/// scenario.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifierState {
    consumed: BTreeSet<[u8; 16]>,
}

impl VerifierState {
    pub fn new() -> Self {
        Self::default()
    }
}

pub fn verify_presentation(
    verifier: &mut VerifierState,
    vp: &VerifiablePresentation,
    request: &ProofRequest,
    hub: &LedgerHub,
    group: &GroupParams,
    now: Tick,
) -> VerificationResult {
    let mut reasons = Vec::new();

    if now > request.created_at + request.freshness_window {
        reasons.push(FailureReason::RequestExpired);
    }
    if verifier.consumed.contains(&request.nonce) {
        reasons.push(FailureReason::NonceReused);
    }
    let nonce_echo_ok = vp.request_nonce == request.nonce;
    if !nonce_echo_ok {
        reasons.push(FailureReason::TranscriptMismatch);
    }
    if vp.credentials.is_empty() {
        reasons.push(FailureReason::MalformedPresentation {
            detail: "presentation without credentials".into(),
        });
        return VerificationResult {
            accepted: false,
            reasons,
            attributes: BTreeMap::new(),
        };
    }

    // (a) + (b): issuer signatures against on-ledger keys, revealed values
    // against the signed commitments
    for cred in &vp.credentials {
        let cred_def = match hub.cred_def(&cred.cred_def_id) {
            Ok(cd) => cd,
            Err(e) => {
                reasons.push(FailureReason::ResolutionFailed {
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let schema = match hub.schema(&cred.schema_id) {
            Ok(s) => s,
            Err(e) => {
                reasons.push(FailureReason::ResolutionFailed {
                    detail: e.to_string(),
                });
                continue;
            }
        };
        if cred_def.schema_id != cred.schema_id {
            reasons.push(FailureReason::MalformedPresentation {
                detail: format!("{} not defined over {}", cred.cred_def_id, cred.schema_id),
            });
            continue;
        }
        if cred.attribute_commitments.len() != schema.attr_names.len() {
            reasons.push(FailureReason::MalformedPresentation {
                detail: "commitment count differs from schema".into(),
            });
            continue;
        }
        match hub.resolve(&cred_def.issuer_did) {
            Ok(doc) => match doc.key(&cred_def.key_id) {
                Some(key) => {
                    if !verify(
                        group,
                        &key.public_key,
                        &cred.signing_bytes(),
                        &cred.issuer_signature,
                    ) {
                        reasons.push(FailureReason::SignatureInvalid {
                            cred_def_id: cred.cred_def_id.clone(),
                        });
                    }
                }
                None => reasons.push(FailureReason::ResolutionFailed {
                    detail: format!("issuer key {} not in document", cred_def.key_id),
                }),
            },
            Err(e) => reasons.push(FailureReason::ResolutionFailed {
                detail: e.to_string(),
            }),
        }
        for revealed in &cred.revealed {
            let Some(pos) = schema.attr_names.iter().position(|n| n == &revealed.name) else {
                reasons.push(FailureReason::MalformedPresentation {
                    detail: format!("revealed `{}` outside schema", revealed.name),
                });
                continue;
            };
            let recomputed = hash_commit(&revealed.name, &revealed.value, &revealed.salt);
            if recomputed.digest != cred.attribute_commitments[pos] {
                reasons.push(FailureReason::CommitmentMismatch {
                    attr: revealed.name.clone(),
                });
            }
        }
    }

    // (c): every requested attribute revealed from an admissible credential
    for item in &request.requested {
        let mut revealed_somewhere = false;
        let mut admissible = false;
        for cred in &vp.credentials {
            if cred.revealed.iter().any(|r| r.name == item.name) {
                revealed_somewhere = true;
                if item.restrictions.admits(&cred.schema_id, &cred.cred_def_id) {
                    admissible = true;
                }
            }
        }
        if !revealed_somewhere {
            reasons.push(FailureReason::MissingRequestedAttribute {
                attr: item.name.clone(),
            });
        } else if !admissible {
            reasons.push(FailureReason::RestrictionUnsatisfied {
                attr: item.name.clone(),
            });
        }
    }

    // (d): link-secret proofs under the request-bound transcript
    if nonce_echo_ok {
        let transcript = presentation_transcript(&request.nonce, &vp.credentials);
        if !verify_opening(
            group,
            &vp.credentials[0].link_secret_commitment,
            &vp.opening_proof,
            &transcript,
        ) {
            reasons.push(FailureReason::LinkProofInvalid);
        }
        if vp.equality_proofs.len() != vp.credentials.len() - 1 {
            reasons.push(FailureReason::LinkProofInvalid);
        } else {
            for (i, proof) in vp.equality_proofs.iter().enumerate() {
                if !verify_equal(
                    group,
                    &vp.credentials[i].link_secret_commitment,
                    &vp.credentials[i + 1].link_secret_commitment,
                    proof,
                    &transcript,
                ) {
                    reasons.push(FailureReason::LinkProofInvalid);
                }
            }
        }
    }

    // (e): non-revocation against the registry state in force at the
    // required tick; the claimed version must be exactly that state
    if let Some(req) = request.non_revocation {
        for cred in &vp.credentials {
            let (Some(coords), Some(claimed)) =
                (&cred.revocation, cred.revocation_version_claimed)
            else {
                reasons.push(FailureReason::NonRevocationMissing {
                    cred_def_id: cred.cred_def_id.clone(),
                });
                continue;
            };
            match hub.registry_at_tick(&coords.registry_id, req.as_of) {
                Ok(state) => {
                    if state.version != claimed {
                        reasons.push(FailureReason::RevocationVersionStale {
                            cred_def_id: cred.cred_def_id.clone(),
                        });
                    } else if state.revoked.contains(&coords.index) {
                        reasons.push(FailureReason::Revoked {
                            cred_def_id: cred.cred_def_id.clone(),
                        });
                    }
                }
                Err(e) => reasons.push(FailureReason::ResolutionFailed {
                    detail: e.to_string(),
                }),
            }
        }
    }

    // (f): expirations are strict
    for cred in &vp.credentials {
        if cred.expiration <= now {
            reasons.push(FailureReason::Expired {
                cred_def_id: cred.cred_def_id.clone(),
            });
        }
    }

    let accepted = reasons.is_empty();
    let mut attributes = BTreeMap::new();
    if accepted {
        verifier.consumed.insert(request.nonce);
        for cred in &vp.credentials {
            for r in &cred.revealed {
                attributes.insert(r.name.clone(), r.value.clone());
            }
        }
    }
    VerificationResult {
        accepted,
        reasons,
        attributes,
    }
}
