//! The onboarding choreographies and the post-opening processes. Every
//! protocol message rides the established encrypted channel (optionally
//! store-and-forward through cloud mailboxes); every step lands in the
//! trace and the case audit; screening always precedes issuance, so a
//! blocking hit means no credential ever existed for that case.

use super::bank::{Bank, Customer};
use super::case::{CaseState, IllegalTransition, KycCase, RejectReason};
use super::documents::{verify_documents, AnalogDocument, DocumentError};
use super::monitor::{reproof_due, scan_transactions, Alert, TransactionRecord};
use super::risk::{assess_risk, has_blocking_hit};
use super::screening::name_screen;
use crate::anoncred::credential::{CredentialBundle, CredentialOffer, CredentialRequest};
use crate::anoncred::issue::{
    accept_offer, create_offer, create_revocation_registry, issue, register_cred_def,
    register_schema, store_credential, IssuerState,
};
use crate::anoncred::present::{
    coverable_attributes, create_presentation, AttributeRestriction, NonRevocationRequirement,
    PresentError, ProofRequest, RequestedAttribute, VerifiablePresentation,
};
use crate::anoncred::verify::verify_presentation;
use crate::clock::Tick;
use crate::connect::channel::{recv, send, ChannelError, ConnectError, SealedEnvelope};
use crate::connect::did::Did;
use crate::connect::mailbox::{MailboxHub, MailboxItem};
use crate::connect::wallet::{Invitation, Wallet};
use crate::enc::{Dec, DecodeError, Enc};
use crate::ledger::{LedgerError, LedgerHub};
use crate::trace::Trace;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Connect(#[from] ConnectError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Case(#[from] IllegalTransition),
    #[error("message decode failed: {0}")]
    Codec(#[from] DecodeError),
    #[error("{0}")]
    State(String),
}

pub struct FlowCtx<'a> {
    pub hub: &'a mut LedgerHub,
    pub mail: &'a mut MailboxHub,
    pub rng: &'a mut ChaCha20Rng,
    pub trace: &'a mut Trace,
    pub now: Tick,
    /// Route every envelope through the recipient's cloud mailbox instead
    /// of handing it over directly. Byte-identical either way.
    pub route_via_mailbox: bool,
}

/// Protocol payloads carried inside channel envelopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowMessage {
    Offer(CredentialOffer),
    Request(CredentialRequest),
    Bundle(CredentialBundle),
    Proof(ProofRequest),
    Presentation(VerifiablePresentation),
    CoverageReport {
        covered: Vec<String>,
        missing: Vec<String>,
        revoked: bool,
    },
    DocumentRequest {
        attributes: Vec<String>,
    },
    Documents(Vec<AnalogDocument>),
}

impl FlowMessage {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        match self {
            FlowMessage::Offer(x) => {
                e.put_str("offer");
                e.put_bytes(&x.encode());
            }
            FlowMessage::Request(x) => {
                e.put_str("request");
                e.put_bytes(&x.encode());
            }
            FlowMessage::Bundle(x) => {
                e.put_str("bundle");
                e.put_bytes(&x.encode());
            }
            FlowMessage::Proof(x) => {
                e.put_str("proof-request");
                e.put_bytes(&x.encode());
            }
            FlowMessage::Presentation(x) => {
                e.put_str("presentation");
                e.put_bytes(&x.encode());
            }
            FlowMessage::CoverageReport {
                covered,
                missing,
                revoked,
            } => {
                e.put_str("coverage");
                e.put_count(covered.len());
                for c in covered {
                    e.put_str(c);
                }
                e.put_count(missing.len());
                for m in missing {
                    e.put_str(m);
                }
                e.put_bool(*revoked);
            }
            FlowMessage::DocumentRequest { attributes } => {
                e.put_str("document-request");
                e.put_count(attributes.len());
                for a in attributes {
                    e.put_str(a);
                }
            }
            FlowMessage::Documents(docs) => {
                e.put_str("documents");
                e.put_count(docs.len());
                for d in docs {
                    e.put_bytes(&d.encode());
                }
            }
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        let tag = d.str()?.to_string();
        let msg = match tag.as_str() {
            "offer" => FlowMessage::Offer(CredentialOffer::decode(d.bytes()?)?),
            "request" => FlowMessage::Request(CredentialRequest::decode(d.bytes()?)?),
            "bundle" => FlowMessage::Bundle(CredentialBundle::decode(d.bytes()?)?),
            "proof-request" => FlowMessage::Proof(ProofRequest::decode(d.bytes()?)?),
            "presentation" => {
                FlowMessage::Presentation(VerifiablePresentation::decode(d.bytes()?)?)
            }
            "coverage" => {
                let n = d.count()?;
                let mut covered = Vec::with_capacity(n);
                for _ in 0..n {
                    covered.push(d.str()?.to_string());
                }
                let n = d.count()?;
                let mut missing = Vec::with_capacity(n);
                for _ in 0..n {
                    missing.push(d.str()?.to_string());
                }
                let revoked = d.bool()?;
                FlowMessage::CoverageReport {
                    covered,
                    missing,
                    revoked,
                }
            }
            "document-request" => {
                let n = d.count()?;
                let mut attributes = Vec::with_capacity(n);
                for _ in 0..n {
                    attributes.push(d.str()?.to_string());
                }
                FlowMessage::DocumentRequest { attributes }
            }
            "documents" => {
                let n = d.count()?;
                let mut docs = Vec::with_capacity(n);
                for _ in 0..n {
                    docs.push(AnalogDocument::decode(d.bytes()?)?);
                }
                FlowMessage::Documents(docs)
            }
            other => return Err(DecodeError::Invalid(format!("unknown message `{other}`"))),
        };
        d.finish()?;
        Ok(msg)
    }
}

fn route_sealed(ctx: &mut FlowCtx, endpoint: &str, env: SealedEnvelope) -> SealedEnvelope {
    if !ctx.route_via_mailbox {
        return env;
    }
    ctx.mail.deliver(endpoint, MailboxItem::Sealed(env));
    match ctx.mail.pop(endpoint) {
        Some(MailboxItem::Sealed(e)) => e,
        _ => unreachable!("just delivered"),
    }
}

/// Encrypt, (maybe) relay through the recipient's mailbox, decrypt.
fn transfer(
    ctx: &mut FlowCtx,
    from: &mut Wallet,
    to: &mut Wallet,
    to_peer_did: &Did,
    msg: &FlowMessage,
) -> Result<FlowMessage, FlowError> {
    let conn = from
        .connection_mut(to_peer_did)
        .ok_or_else(|| FlowError::State(format!("no connection to {to_peer_did}")))?;
    let envelope = send(conn, &msg.encode(), ctx.rng);
    let endpoint = conn.their_endpoint.clone();
    let envelope = if ctx.route_via_mailbox {
        ctx.mail.deliver(&endpoint, MailboxItem::Channel(envelope));
        match ctx.mail.pop(&endpoint) {
            Some(MailboxItem::Channel(e)) => e,
            _ => unreachable!("just delivered"),
        }
    } else {
        envelope
    };
    let sender = envelope.sender.clone();
    let conn = to
        .connection_mut(&sender)
        .ok_or_else(|| FlowError::State(format!("no connection from {sender}")))?;
    let plaintext = recv(conn, &envelope)?;
    Ok(FlowMessage::decode(&plaintext)?)
}

/// One-time bank bootstrap: public DID document, schema, credential
/// definition, revocation registry — the only writes the whole KYC life
/// cycle needs.
pub fn bootstrap_bank(bank: &mut Bank, ctx: &mut FlowCtx) -> Result<(), FlowError> {
    if bank.public_did.is_some() {
        return Ok(());
    }
    let ledger = ctx
        .hub
        .ledger_mut(&bank.ledger_id)
        .ok_or_else(|| FlowError::State(format!("no ledger {}", bank.ledger_id)))?;
    let did = bank.wallet.create_public_did(ledger, ctx.now, ctx.rng)?;
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "bank.did_registered",
        &[("did", did.to_string())],
    );
    // schemas are shared standards: reuse one already on the ledger
    let schema_id = format!(
        "schema:{}:{}:{}",
        bank.ledger_id, bank.config.schema_name, bank.config.schema_version
    );
    let schema = match ledger.schema(&schema_id) {
        Some(existing) => {
            let existing = existing.clone();
            ctx.trace.emit(
                ctx.now,
                &bank.label,
                "bank.schema_reused",
                &[("schema", schema_id.clone())],
            );
            existing
        }
        None => register_schema(
            &bank.wallet,
            &did,
            ledger,
            &bank.config.schema_name,
            &bank.config.schema_version,
            bank.config.schema_attributes.clone(),
            ctx.now,
        )?,
    };
    let cred_def = register_cred_def(
        &bank.wallet,
        &did,
        ledger,
        &schema,
        Some(bank.config.registry_capacity),
        ctx.now,
    )?;
    let registry_id =
        create_revocation_registry(&bank.wallet, &did, ledger, &cred_def, bank.config.registry_capacity, ctx.now)?;
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "bank.bootstrapped",
        &[
            ("schema", schema.schema_id.clone()),
            ("cred_def", cred_def.cred_def_id.clone()),
            ("registry", registry_id),
        ],
    );
    bank.issuer = Some(IssuerState::new(&cred_def, &schema, bank.config.registry_capacity));
    // a bank accepts its own credentials unless configured otherwise
    if bank.config.accepted_cred_defs.is_empty() {
        bank.config.accepted_cred_defs = vec![cred_def.cred_def_id.clone()];
    }
    bank.public_did = Some(did);
    bank.schema = Some(schema);
    bank.cred_def = Some(cred_def);
    Ok(())
}

/// QR-code invitation plus DID-exchange handshake. Returns the pairwise
/// DIDs each side records for the other: (customer-as-seen-by-bank,
/// bank-as-seen-by-customer).
fn establish_connection(
    bank: &mut Bank,
    customer_label: &str,
    customer_wallet: &mut Wallet,
    ctx: &mut FlowCtx,
) -> Result<(Did, Did), ConnectError> {
    let invitation = bank
        .wallet
        .create_invitation(bank.public_did.as_ref(), ctx.rng);
    // the QR payload is the invitation's canonical text
    let invitation = Invitation::parse(&invitation.to_text()).expect("canonical text");
    let initiated = customer_wallet.initiate_connection(&invitation, ctx.hub, ctx.rng)?;
    if initiated.trust_on_first_use {
        ctx.trace.emit(
            ctx.now,
            customer_label,
            "conn.trust_on_first_use",
            &[("inviter", bank.label.clone())],
        );
    }
    let endpoint = initiated.inviter_endpoint.clone();
    let request = route_sealed(ctx, &endpoint, initiated.request);
    let accepted = bank.wallet.accept_connection(&request, ctx.rng)?;
    let response = route_sealed(ctx, &accepted.requester_endpoint, accepted.response);
    let bank_peer = customer_wallet.complete_connection(initiated.pending, &response)?;
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "conn.established",
        &[
            ("with", customer_label.to_string()),
            ("peer_did", accepted.their_peer_did.to_string()),
        ],
    );
    Ok((accepted.their_peer_did, bank_peer))
}

fn finalize_case(bank: &mut Bank, case_id: &str, ctx: &mut FlowCtx) {
    let case = &bank.cases[case_id];
    let identified = !case.attributes.is_empty();
    if case.state == CaseState::AccountOpened || (case.state == CaseState::Rejected && identified) {
        let case = bank.cases[case_id].clone();
        bank.store
            .keep_record(&case, bank.config.retention_ticks, ctx.now);
        ctx.trace.emit(
            ctx.now,
            &bank.label,
            "record.kept",
            &[
                ("case", case_id.to_string()),
                (
                    "retention_until",
                    (ctx.now + bank.config.retention_ticks).to_string(),
                ),
            ],
        );
    }
}

/// Name screening and risk assessment; returns false when the case is
/// rejected (blocking hit) and must not proceed to issuance or opening.
fn screen_and_assess(
    bank: &mut Bank,
    customer: &Customer,
    case_id: &str,
    ctx: &mut FlowCtx,
) -> Result<bool, FlowError> {
    let (name, dob) = {
        let case = &bank.cases[case_id];
        (
            case.attributes.get("name").cloned().unwrap_or_default(),
            case.attributes.get("dob").cloned(),
        )
    };
    let hits = name_screen(&name, dob.as_deref(), &bank.screening_lists);
    for hit in &hits {
        ctx.trace.emit(
            ctx.now,
            &bank.label,
            "screen.hit",
            &[
                ("list", hit.list.as_str().to_string()),
                ("grade", hit.grade.as_str().to_string()),
                ("case", case_id.to_string()),
            ],
        );
    }
    let case = bank.cases.get_mut(case_id).expect("case exists");
    case.transition(CaseState::Screened, ctx.now)?;
    if has_blocking_hit(&hits) {
        reject_case(bank, case_id, RejectReason::ScreeningHit, ctx)?;
        return Ok(false);
    }
    let assessment = assess_risk(&hits, &customer.profile, &bank.config.risk);
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "risk.assessed",
        &[
            ("case", case_id.to_string()),
            ("score", assessment.score.to_string()),
            ("level", assessment.level.as_str().to_string()),
        ],
    );
    let high = assessment.level == super::risk::RiskLevel::High;
    let case = bank.cases.get_mut(case_id).expect("case exists");
    case.risk = Some(assessment);
    case.transition(CaseState::RiskAssessed, ctx.now)?;
    if high {
        case.transition(CaseState::EddRequested, ctx.now)?;
        case.edd_deadline = Some(ctx.now + bank.config.edd_timeout);
        ctx.trace.emit(
            ctx.now,
            &bank.label,
            "edd.requested",
            &[
                ("case", case_id.to_string()),
                ("deadline", case.edd_deadline.unwrap().to_string()),
            ],
        );
    }
    Ok(true)
}

/// Offer/request/issue/store over the established channel.
fn issue_credential_over_channel(
    bank: &mut Bank,
    customer: &mut Customer,
    customer_peer: &Did,
    case_id: &str,
    ctx: &mut FlowCtx,
) -> Result<(), FlowError> {
    let values = {
        let case = &bank.cases[case_id];
        let mut values = std::collections::BTreeMap::new();
        for attr in &bank.config.schema_attributes {
            let v = case.attributes.get(attr).ok_or_else(|| {
                FlowError::State(format!("verified attributes missing `{attr}`"))
            })?;
            values.insert(attr.clone(), v.clone());
        }
        values
    };
    let expiration = ctx.now + bank.config.credential_validity;
    let issuer = bank
        .issuer
        .as_mut()
        .ok_or_else(|| FlowError::State("bank not bootstrapped".into()))?;
    let offer = create_offer(issuer, &values, expiration, ctx.rng)
        .map_err(|e| FlowError::State(e.to_string()))?;
    let wallet = customer.wallet_mut();
    let msg = transfer(ctx, &mut bank.wallet, wallet, customer_peer, &FlowMessage::Offer(offer))?;
    let FlowMessage::Offer(offer) = msg else {
        return Err(FlowError::State("expected offer".into()));
    };
    let request = accept_offer(wallet, &offer, ctx.rng);
    let bank_peer = peer_did_of(wallet, &bank.wallet.mailbox_address)?;
    let msg = transfer(ctx, wallet, &mut bank.wallet, &bank_peer, &FlowMessage::Request(request))?;
    let FlowMessage::Request(request) = msg else {
        return Err(FlowError::State("expected request".into()));
    };
    let issuer = bank.issuer.as_mut().expect("checked above");
    let signing_key = {
        let did = bank.public_did.as_ref().expect("bootstrapped");
        let (_, key_id) = bank
            .wallet
            .public_dids
            .iter()
            .find(|(d, _)| d == did)
            .expect("wallet controls did");
        bank.wallet.key(key_id).expect("key").clone()
    };
    let bundle = issue(issuer, &signing_key, &bank.wallet, &request, ctx.rng)
        .map_err(|e| FlowError::State(e.to_string()))?;
    let wallet = customer.wallet_mut();
    let msg = transfer(ctx, &mut bank.wallet, wallet, customer_peer, &FlowMessage::Bundle(bundle))?;
    let FlowMessage::Bundle(bundle) = msg else {
        return Err(FlowError::State("expected bundle".into()));
    };
    store_credential(wallet, &bundle, ctx.hub, ctx.now)
        .map_err(|e| FlowError::State(e.to_string()))?;
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "cred.issued",
        &[
            ("case", case_id.to_string()),
            ("to", customer.label.clone()),
            (
                "index",
                bundle
                    .credential
                    .revocation
                    .as_ref()
                    .map(|r| r.index.to_string())
                    .unwrap_or_else(|| "-".into()),
            ),
        ],
    );
    let case = bank.cases.get_mut(case_id).expect("case exists");
    case.note(ctx.now, "cred.issued", &customer.label);
    Ok(())
}

fn open_account(bank: &mut Bank, case_id: &str, ctx: &mut FlowCtx) -> Result<(), FlowError> {
    let case = bank.cases.get_mut(case_id).expect("case exists");
    case.transition(CaseState::AccountOpened, ctx.now)?;
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "case.final",
        &[
            ("case", case_id.to_string()),
            ("state", "AccountOpened".into()),
        ],
    );
    finalize_case(bank, case_id, ctx);
    Ok(())
}

fn reject_case(
    bank: &mut Bank,
    case_id: &str,
    reason: RejectReason,
    ctx: &mut FlowCtx,
) -> Result<(), FlowError> {
    let case = bank.cases.get_mut(case_id).expect("case exists");
    case.reject(reason, ctx.now)?;
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "case.final",
        &[
            ("case", case_id.to_string()),
            ("state", "Rejected".into()),
            ("reason", reason.as_str().to_string()),
        ],
    );
    finalize_case(bank, case_id, ctx);
    Ok(())
}

/// Ask for, receive, and verify analog documents covering `attributes`.
/// On success merges the verified claims into the case.
fn documents_phase(
    bank: &mut Bank,
    customer: &mut Customer,
    customer_peer: &Did,
    case_id: &str,
    attributes: Vec<String>,
    ctx: &mut FlowCtx,
) -> Result<bool, FlowError> {
    {
        let case = bank.cases.get_mut(case_id).expect("case exists");
        case.transition(CaseState::DocumentsRequested, ctx.now)?;
        case.documents_requested = attributes.clone();
    }
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "documents.requested",
        &[
            ("case", case_id.to_string()),
            ("attributes", attributes.join(",")),
        ],
    );
    let wallet = customer.wallet_mut();
    let msg = transfer(
        ctx,
        &mut bank.wallet,
        wallet,
        customer_peer,
        &FlowMessage::DocumentRequest {
            attributes: attributes.clone(),
        },
    )?;
    let FlowMessage::DocumentRequest { attributes: wanted } = msg else {
        return Err(FlowError::State("expected document request".into()));
    };
    let docs = customer.documents_covering(&wanted);
    let wallet = customer.wallet_mut();
    let bank_peer = peer_did_of(wallet, &bank.wallet.mailbox_address)?;
    let msg = transfer(
        ctx,
        wallet,
        &mut bank.wallet,
        &bank_peer,
        &FlowMessage::Documents(docs),
    )?;
    let FlowMessage::Documents(docs) = msg else {
        return Err(FlowError::State("expected documents".into()));
    };
    {
        let case = bank.cases.get_mut(case_id).expect("case exists");
        case.analog_documents_received += docs.len() as u32;
    }
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "documents.received",
        &[("case", case_id.to_string()), ("count", docs.len().to_string())],
    );
    match verify_documents(&docs, ctx.now) {
        Ok(verified) => {
            let missing = {
                let case = bank.cases.get_mut(case_id).expect("case exists");
                for conflict in &verified.conflicts {
                    case.note(ctx.now, "documents.conflict", conflict);
                }
                attributes
                    .iter()
                    .any(|a| !verified.attributes.contains_key(a) && !case.attributes.contains_key(a))
            };
            if missing {
                reject_case(bank, case_id, RejectReason::DocumentCheckFailed, ctx)?;
                return Ok(false);
            }
            let case = bank.cases.get_mut(case_id).expect("case exists");
            case.attributes.extend(verified.attributes);
            case.transition(CaseState::IdentityVerified, ctx.now)?;
            ctx.trace.emit(
                ctx.now,
                &bank.label,
                "documents.verified",
                &[("case", case_id.to_string())],
            );
            Ok(true)
        }
        Err(DocumentError::DocumentCheckFailed(_)) => {
            reject_case(bank, case_id, RejectReason::DocumentCheckFailed, ctx)?;
            Ok(false)
        }
        Err(DocumentError::ExpiredDocument(_)) => {
            reject_case(bank, case_id, RejectReason::ExpiredDocument, ctx)?;
            Ok(false)
        }
    }
}

fn peer_did_of(wallet: &Wallet, counterparty_mailbox: &str) -> Result<Did, FlowError> {
    wallet
        .connections
        .values()
        .find(|c| c.their_endpoint == counterparty_mailbox)
        .map(|c| c.their_peer_did.clone())
        .ok_or_else(|| FlowError::State("no connection to counterparty".into()))
}

fn bank_proof_request(bank: &Bank, attributes: &[String], as_of: Option<Tick>, ctx: &mut FlowCtx) -> ProofRequest {
    let requested = attributes
        .iter()
        .map(|name| RequestedAttribute {
            name: name.clone(),
            restrictions: AttributeRestriction {
                schema_ids: vec![],
                cred_def_ids: bank.config.accepted_cred_defs.clone(),
            },
        })
        .collect();
    let non_revocation = bank
        .config
        .require_non_revocation
        .then(|| NonRevocationRequirement {
            as_of: as_of.unwrap_or(ctx.now),
        });
    ProofRequest::new(
        requested,
        non_revocation,
        ctx.now,
        bank.config.freshness_window,
        ctx.rng,
    )
}

/// Send a proof request, receive either a presentation or a coverage
/// report, verify, and absorb verified attributes into the case.
enum ProofPhase {
    Verified,
    Partial { missing: Vec<String> },
    NothingCoverable { missing: Vec<String> },
    Failed(RejectReason),
}

fn proof_phase(
    bank: &mut Bank,
    customer: &mut Customer,
    customer_peer: &Did,
    case_id: &str,
    attributes: &[String],
    as_of: Option<Tick>,
    ctx: &mut FlowCtx,
) -> Result<ProofPhase, FlowError> {
    let request = bank_proof_request(bank, attributes, as_of, ctx);
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "proof.requested",
        &[
            ("case", case_id.to_string()),
            ("attributes", attributes.join(",")),
            (
                "as_of",
                request
                    .non_revocation
                    .map(|r| r.as_of.to_string())
                    .unwrap_or_else(|| "-".into()),
            ),
        ],
    );
    let wallet = customer.wallet_mut();
    let msg = transfer(
        ctx,
        &mut bank.wallet,
        wallet,
        customer_peer,
        &FlowMessage::Proof(request.clone()),
    )?;
    let FlowMessage::Proof(received_request) = msg else {
        return Err(FlowError::State("expected proof request".into()));
    };

    // holder side: try to present; report coverage gaps instead when the
    // wallet cannot satisfy the request
    let (covered, missing) = coverable_attributes(wallet, &received_request, ctx.hub, ctx.now);
    let reply = if missing.is_empty() {
        match create_presentation(wallet, &received_request, ctx.hub, ctx.now, ctx.rng) {
            Ok(vp) => FlowMessage::Presentation(vp),
            Err(PresentError::RevokedCredential { .. }) => FlowMessage::CoverageReport {
                covered: vec![],
                missing: attributes.to_vec(),
                revoked: true,
            },
            Err(PresentError::NoMatchingCredential { unsatisfied }) => {
                FlowMessage::CoverageReport {
                    covered,
                    missing: unsatisfied,
                    revoked: false,
                }
            }
            Err(e) => return Err(FlowError::State(e.to_string())),
        }
    } else {
        // the wallet may still be blocked by a revoked credential
        let revoked = covered.is_empty()
            && wallet.credentials.iter().any(|held| {
                held.credential.revocation.is_some()
                    && received_request.non_revocation.is_some()
            })
            && matches!(
                create_presentation(wallet, &received_request, ctx.hub, ctx.now, ctx.rng),
                Err(PresentError::RevokedCredential { .. })
            );
        FlowMessage::CoverageReport {
            covered,
            missing,
            revoked,
        }
    };
    let bank_peer = peer_did_of(wallet, &bank.wallet.mailbox_address)?;
    let msg = transfer(ctx, wallet, &mut bank.wallet, &bank_peer, &reply)?;
    match msg {
        FlowMessage::Presentation(vp) => {
            let vp_bytes = vp.encode();
            let group = bank.wallet.profile.params();
            let result =
                verify_presentation(&mut bank.verifier, &vp, &request, ctx.hub, group, ctx.now);
            ctx.trace.emit(
                ctx.now,
                &bank.label,
                "vp.verified",
                &[
                    ("case", case_id.to_string()),
                    ("accepted", result.accepted.to_string()),
                    (
                        "reasons",
                        result
                            .reasons
                            .iter()
                            .map(|r| r.code())
                            .collect::<Vec<_>>()
                            .join(","),
                    ),
                ],
            );
            if result.accepted {
                let min_exp = vp.credentials.iter().map(|c| c.expiration).min();
                let case = bank.cases.get_mut(case_id).expect("case exists");
                case.vp_bytes.push(vp_bytes);
                case.attributes.extend(result.attributes);
                case.credential_expiration = match (case.credential_expiration, min_exp) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                Ok(ProofPhase::Verified)
            } else if result.reasons.iter().any(|r| r.code() == "Revoked") {
                Ok(ProofPhase::Failed(RejectReason::Revoked))
            } else {
                Ok(ProofPhase::Failed(RejectReason::ProofInvalid))
            }
        }
        FlowMessage::CoverageReport {
            covered,
            missing,
            revoked,
        } => {
            ctx.trace.emit(
                ctx.now,
                &customer.label,
                "proof.coverage",
                &[
                    ("covered", covered.join(",")),
                    ("missing", missing.join(",")),
                    ("revoked", revoked.to_string()),
                ],
            );
            if revoked {
                Ok(ProofPhase::Failed(RejectReason::Revoked))
            } else if covered.is_empty() {
                Ok(ProofPhase::NothingCoverable { missing })
            } else {
                Ok(ProofPhase::Partial { missing })
            }
        }
        _ => Err(FlowError::State("unexpected reply to proof request".into())),
    }
}

/// Completely new onboarding: the customer starts with no wallet and no
/// credentials. Wallet provisioning, connection, analog documents,
/// screening, risk, then first-ever credential issuance.
pub fn run_completely_new_onboarding(
    bank: &mut Bank,
    customer: &mut Customer,
    ctx: &mut FlowCtx,
) -> Result<String, FlowError> {
    let case_id = bank.new_case_id();
    bank.cases
        .insert(case_id.clone(), KycCase::new(case_id.clone(), &customer.label, ctx.now));
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "flow.start",
        &[("kind", "completely_new".into()), ("case", case_id.clone())],
    );

    if customer.wallet.is_none() {
        let wallet = Wallet::new(&customer.label, bank.wallet.profile, ctx.rng);
        ctx.trace.emit(
            ctx.now,
            &customer.label,
            "wallet.provisioned",
            &[("mailbox", wallet.mailbox_address.clone())],
        );
        customer.wallet = Some(wallet);
    }

    let customer_peer = match establish_connection(bank, &customer.label.clone(), customer.wallet_mut(), ctx) {
        Ok((customer_peer, _)) => {
            let case = bank.cases.get_mut(&case_id).expect("case exists");
            case.customer_peer_did = Some(customer_peer.to_string());
            case.transition(CaseState::ConnectionEstablished, ctx.now)?;
            customer_peer
        }
        Err(e) => {
            ctx.trace.emit(
                ctx.now,
                &bank.label,
                "conn.failed",
                &[("error", e.to_string())],
            );
            reject_case(bank, &case_id, RejectReason::ConnectionFailed, ctx)?;
            return Ok(case_id);
        }
    };

    let wanted = bank.config.schema_attributes.clone();
    if !documents_phase(bank, customer, &customer_peer, &case_id, wanted, ctx)? {
        return Ok(case_id);
    }
    if !screen_and_assess(bank, customer, &case_id, ctx)? {
        return Ok(case_id);
    }
    if bank.cases[&case_id].state == CaseState::EddRequested {
        // EDD must be satisfied before issuance and opening
        let case = bank.cases.get_mut(&case_id).expect("case exists");
        case.note(ctx.now, "edd.pending", "issuance deferred");
        return Ok(case_id);
    }
    issue_credential_over_channel(bank, customer, &customer_peer, &case_id, ctx)?;
    open_account(bank, &case_id, ctx)?;
    Ok(case_id)
}

/// Fast onboarding: the customer already holds an accepted KYC credential;
/// zero analog documents, zero ledger writes.
pub fn run_fast_onboarding(
    bank: &mut Bank,
    customer: &mut Customer,
    as_of: Option<Tick>,
    ctx: &mut FlowCtx,
) -> Result<String, FlowError> {
    let case_id = bank.new_case_id();
    bank.cases
        .insert(case_id.clone(), KycCase::new(case_id.clone(), &customer.label, ctx.now));
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "flow.start",
        &[("kind", "fast".into()), ("case", case_id.clone())],
    );
    if customer.wallet.is_none() {
        reject_case(bank, &case_id, RejectReason::NoMatchingCredential, ctx)?;
        return Ok(case_id);
    }
    let customer_peer = match establish_connection(bank, &customer.label.clone(), customer.wallet_mut(), ctx) {
        Ok((customer_peer, _)) => {
            let case = bank.cases.get_mut(&case_id).expect("case exists");
            case.customer_peer_did = Some(customer_peer.to_string());
            case.transition(CaseState::ConnectionEstablished, ctx.now)?;
            customer_peer
        }
        Err(e) => {
            ctx.trace.emit(ctx.now, &bank.label, "conn.failed", &[("error", e.to_string())]);
            reject_case(bank, &case_id, RejectReason::ConnectionFailed, ctx)?;
            return Ok(case_id);
        }
    };

    let attributes = bank.config.schema_attributes.clone();
    match proof_phase(bank, customer, &customer_peer, &case_id, &attributes, as_of, ctx)? {
        ProofPhase::Verified => {
            let case = bank.cases.get_mut(&case_id).expect("case exists");
            case.transition(CaseState::ProofVerified, ctx.now)?;
            if !screen_and_assess(bank, customer, &case_id, ctx)? {
                return Ok(case_id);
            }
            if bank.cases[&case_id].state == CaseState::EddRequested {
                return Ok(case_id);
            }
            open_account(bank, &case_id, ctx)?;
            Ok(case_id)
        }
        ProofPhase::Failed(reason) => {
            reject_case(bank, &case_id, reason, ctx)?;
            Ok(case_id)
        }
        ProofPhase::Partial { missing } | ProofPhase::NothingCoverable { missing } => {
            if bank.config.fallback_to_new_to_kyc {
                ctx.trace.emit(
                    ctx.now,
                    &bank.label,
                    "flow.fallback",
                    &[("to", "new_to_kyc".into()), ("missing", missing.join(","))],
                );
                continue_new_to_kyc(bank, customer, &customer_peer, &case_id, ctx)?;
            } else {
                reject_case(bank, &case_id, RejectReason::NoMatchingCredential, ctx)?;
            }
            Ok(case_id)
        }
    }
}

/// New-to-KYC: the customer has a wallet and possibly identity credentials
/// from other contexts, but no accepted KYC credential. A proof request
/// first determines what the wallet covers; only the gap is requested as
/// analog documents; the bank then issues its own KYC credential.
pub fn run_new_to_kyc(
    bank: &mut Bank,
    customer: &mut Customer,
    ctx: &mut FlowCtx,
) -> Result<String, FlowError> {
    let case_id = bank.new_case_id();
    bank.cases
        .insert(case_id.clone(), KycCase::new(case_id.clone(), &customer.label, ctx.now));
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "flow.start",
        &[("kind", "new_to_kyc".into()), ("case", case_id.clone())],
    );
    if customer.wallet.is_none() {
        let wallet = Wallet::new(&customer.label, bank.wallet.profile, ctx.rng);
        ctx.trace.emit(
            ctx.now,
            &customer.label,
            "wallet.provisioned",
            &[("mailbox", wallet.mailbox_address.clone())],
        );
        customer.wallet = Some(wallet);
    }
    let customer_peer = match establish_connection(bank, &customer.label.clone(), customer.wallet_mut(), ctx) {
        Ok((customer_peer, _)) => {
            let case = bank.cases.get_mut(&case_id).expect("case exists");
            case.customer_peer_did = Some(customer_peer.to_string());
            case.transition(CaseState::ConnectionEstablished, ctx.now)?;
            customer_peer
        }
        Err(e) => {
            ctx.trace.emit(ctx.now, &bank.label, "conn.failed", &[("error", e.to_string())]);
            reject_case(bank, &case_id, RejectReason::ConnectionFailed, ctx)?;
            return Ok(case_id);
        }
    };
    continue_new_to_kyc(bank, customer, &customer_peer, &case_id, ctx)?;
    Ok(case_id)
}

/// The shared tail of new-to-KYC (also entered from fast-onboarding
/// fallback): partial proof, documents for the gap, screening, risk,
/// issuance, opening.
fn continue_new_to_kyc(
    bank: &mut Bank,
    customer: &mut Customer,
    customer_peer: &Did,
    case_id: &str,
    ctx: &mut FlowCtx,
) -> Result<(), FlowError> {
    // accept identity credentials from any issuer the bank trusts; for
    // coverage the restriction set already names them all
    let attributes = bank.config.schema_attributes.clone();
    let mut missing = attributes.clone();
    match proof_phase(bank, customer, customer_peer, case_id, &attributes, None, ctx)? {
        ProofPhase::Verified => {
            let case = bank.cases.get_mut(case_id).expect("case exists");
            case.transition(CaseState::ProofVerified, ctx.now)?;
            missing.clear();
        }
        ProofPhase::Failed(reason) => {
            reject_case(bank, case_id, reason, ctx)?;
            return Ok(());
        }
        ProofPhase::NothingCoverable { missing: m } => {
            missing = m;
        }
        ProofPhase::Partial { missing: m } => {
            // second, narrower proof request over just the covered subset
            let covered: Vec<String> = attributes
                .iter()
                .filter(|a| !m.contains(a))
                .cloned()
                .collect();
            match proof_phase(bank, customer, customer_peer, case_id, &covered, None, ctx)? {
                ProofPhase::Verified => {
                    let case = bank.cases.get_mut(case_id).expect("case exists");
                    case.transition(CaseState::ProofVerified, ctx.now)?;
                    missing = m;
                }
                ProofPhase::Failed(reason) => {
                    reject_case(bank, case_id, reason, ctx)?;
                    return Ok(());
                }
                _ => {
                    reject_case(bank, case_id, RejectReason::ProofInvalid, ctx)?;
                    return Ok(());
                }
            }
        }
    }
    if !missing.is_empty() {
        if !documents_phase(bank, customer, customer_peer, case_id, missing, ctx)? {
            return Ok(());
        }
    }
    if !screen_and_assess(bank, customer, case_id, ctx)? {
        return Ok(());
    }
    if bank.cases[case_id].state == CaseState::EddRequested {
        let case = bank.cases.get_mut(case_id).expect("case exists");
        case.note(ctx.now, "edd.pending", "issuance deferred");
        return Ok(());
    }
    issue_credential_over_channel(bank, customer, customer_peer, case_id, ctx)?;
    open_account(bank, case_id, ctx)?;
    Ok(())
}

/// How a customer answers an enhanced-due-diligence request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EddFulfillment {
    IncomeCredential,
    IncomeDocument,
    Nothing,
}

/// Satisfy (or ignore) a pending EDD request. Success moves the case to
/// AccountOpened, issuing the bank's credential first when the flow that
/// parked the case was an issuing flow.
pub fn provide_edd(
    bank: &mut Bank,
    customer: &mut Customer,
    case_id: &str,
    fulfillment: EddFulfillment,
    ctx: &mut FlowCtx,
) -> Result<(), FlowError> {
    let (state, peer) = {
        let case = bank
            .cases
            .get(case_id)
            .ok_or_else(|| FlowError::State(format!("no case {case_id}")))?;
        (case.state, case.customer_peer_did.clone())
    };
    if state != CaseState::EddRequested {
        return Err(FlowError::State(format!(
            "case {case_id} is not awaiting EDD"
        )));
    }
    let customer_peer = peer
        .and_then(|p| Did::parse(&p))
        .ok_or_else(|| FlowError::State("case has no connection".into()))?;
    match fulfillment {
        EddFulfillment::Nothing => {
            ctx.trace.emit(
                ctx.now,
                &customer.label,
                "edd.ignored",
                &[("case", case_id.to_string())],
            );
            return Ok(());
        }
        EddFulfillment::IncomeCredential => {
            let attrs = vec![bank.config.edd_attribute.clone()];
            let requested = attrs
                .iter()
                .map(|name| RequestedAttribute {
                    name: name.clone(),
                    restrictions: AttributeRestriction::default(),
                })
                .collect();
            let request = ProofRequest::new(
                requested,
                None,
                ctx.now,
                bank.config.freshness_window,
                ctx.rng,
            );
            let wallet = customer.wallet_mut();
            let msg = transfer(
                ctx,
                &mut bank.wallet,
                wallet,
                &customer_peer,
                &FlowMessage::Proof(request.clone()),
            )?;
            let FlowMessage::Proof(received) = msg else {
                return Err(FlowError::State("expected proof request".into()));
            };
            let vp = match create_presentation(wallet, &received, ctx.hub, ctx.now, ctx.rng) {
                Ok(vp) => vp,
                Err(e) => {
                    ctx.trace.emit(
                        ctx.now,
                        &customer.label,
                        "edd.unsatisfiable",
                        &[("error", e.to_string())],
                    );
                    return Ok(());
                }
            };
            let bank_peer = peer_did_of(wallet, &bank.wallet.mailbox_address)?;
            let msg = transfer(ctx, wallet, &mut bank.wallet, &bank_peer, &FlowMessage::Presentation(vp))?;
            let FlowMessage::Presentation(vp) = msg else {
                return Err(FlowError::State("expected presentation".into()));
            };
            let group = bank.wallet.profile.params();
            let result =
                verify_presentation(&mut bank.verifier, &vp, &request, ctx.hub, group, ctx.now);
            ctx.trace.emit(
                ctx.now,
                &bank.label,
                "edd.vp_verified",
                &[
                    ("case", case_id.to_string()),
                    ("accepted", result.accepted.to_string()),
                ],
            );
            if !result.accepted {
                reject_case(bank, case_id, RejectReason::ProofInvalid, ctx)?;
                return Ok(());
            }
            let case = bank.cases.get_mut(case_id).expect("case exists");
            case.vp_bytes.push(vp.encode());
            case.attributes.extend(result.attributes);
            case.note(ctx.now, "edd.satisfied", "income credential");
        }
        EddFulfillment::IncomeDocument => {
            let docs = customer.income_documents();
            match verify_documents(&docs, ctx.now) {
                Ok(verified) if !verified.attributes.is_empty() => {
                    let case = bank.cases.get_mut(case_id).expect("case exists");
                    case.analog_documents_received += docs.len() as u32;
                    case.attributes.extend(verified.attributes);
                    case.note(ctx.now, "edd.satisfied", "income document");
                }
                _ => {
                    reject_case(bank, case_id, RejectReason::DocumentCheckFailed, ctx)?;
                    return Ok(());
                }
            }
        }
    }
    // EDD satisfied. Issuing flows (those that went through the documents
    // phase for identity) still owe the customer their KYC credential.
    let came_through_documents = {
        let case = &bank.cases[case_id];
        case.audit
            .iter()
            .any(|e| e.code == "case.state" && e.detail == "IdentityVerified")
    };
    let issued_already = bank.cases[case_id]
        .audit
        .iter()
        .any(|e| e.code == "cred.issued");
    if came_through_documents && !issued_already {
        issue_credential_over_channel(bank, customer, &customer_peer, case_id, ctx)?;
    }
    open_account(bank, case_id, ctx)?;
    Ok(())
}

/// Expire pending EDD cases whose deadline has passed.
pub fn process_timeouts(bank: &mut Bank, ctx: &mut FlowCtx) -> Result<(), FlowError> {
    let expired: Vec<String> = bank
        .cases
        .values()
        .filter(|c| {
            c.state == CaseState::EddRequested
                && c.edd_deadline.is_some_and(|d| ctx.now > d)
        })
        .map(|c| c.case_id.clone())
        .collect();
    for case_id in expired {
        reject_case(bank, &case_id, RejectReason::EddTimeout, ctx)?;
    }
    Ok(())
}

/// Book a transaction against an opened account.
pub fn record_transaction(
    bank: &mut Bank,
    case_id: &str,
    tx: TransactionRecord,
    ctx: &mut FlowCtx,
) -> Result<(), FlowError> {
    let case = bank
        .cases
        .get_mut(case_id)
        .ok_or_else(|| FlowError::State(format!("no case {case_id}")))?;
    if case.state == CaseState::AccountOpened {
        case.transition(CaseState::Monitoring, ctx.now)?;
    }
    if case.state != CaseState::Monitoring {
        return Err(FlowError::State(format!(
            "case {case_id} is not under monitoring"
        )));
    }
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "tx.recorded",
        &[
            ("case", case_id.to_string()),
            ("amount", tx.amount.to_string()),
        ],
    );
    case.transactions.push(tx);
    Ok(())
}

/// Scan transactions against the monitoring rules and run a re-proof when
/// one is due (or forced). A failed re-proof bumps the risk level.
pub fn run_monitoring(
    bank: &mut Bank,
    customer: &mut Customer,
    case_id: &str,
    force_reproof: bool,
    ctx: &mut FlowCtx,
) -> Result<Vec<Alert>, FlowError> {
    {
        let case = bank
            .cases
            .get_mut(case_id)
            .ok_or_else(|| FlowError::State(format!("no case {case_id}")))?;
        if case.state == CaseState::AccountOpened {
            case.transition(CaseState::Monitoring, ctx.now)?;
        }
        if case.state != CaseState::Monitoring {
            return Err(FlowError::State(format!(
                "case {case_id} is not under monitoring"
            )));
        }
    }
    let mut new_alerts = Vec::new();
    {
        let case = &bank.cases[case_id];
        let scanned = scan_transactions(
            &case.transactions,
            &bank.config.monitoring,
            customer.profile.expected_monthly_volume,
        );
        for alert in scanned {
            if !case.alerts.contains(&alert) {
                new_alerts.push(alert);
            }
        }
    }
    for alert in &new_alerts {
        ctx.trace.emit(
            ctx.now,
            &bank.label,
            "alert",
            &[("case", case_id.to_string()), ("kind", alert.code().to_string())],
        );
    }
    let due = {
        let case = &bank.cases[case_id];
        force_reproof
            || reproof_due(
                case.last_reproof,
                case.opened_at.unwrap_or(0),
                case.credential_expiration,
                bank.config.reproof_interval,
                ctx.now,
            )
    };
    if due {
        let reproof_alert = run_reproof(bank, customer, case_id, ctx)?;
        new_alerts.extend(reproof_alert);
    }
    let case = bank.cases.get_mut(case_id).expect("case exists");
    case.alerts.extend(new_alerts.clone());
    Ok(new_alerts)
}

/// One re-proof cycle: fresh proof request over the existing channel; the
/// customer only confirms. Failure (revoked or rejected) reassesses risk
/// one level up; the account is never frozen here.
fn run_reproof(
    bank: &mut Bank,
    customer: &mut Customer,
    case_id: &str,
    ctx: &mut FlowCtx,
) -> Result<Option<Alert>, FlowError> {
    let customer_peer = {
        let case = &bank.cases[case_id];
        case.customer_peer_did
            .as_deref()
            .and_then(Did::parse)
            .ok_or_else(|| FlowError::State("case has no connection".into()))?
    };
    ctx.trace.emit(
        ctx.now,
        &bank.label,
        "reproof.start",
        &[("case", case_id.to_string())],
    );
    let attributes = bank.config.schema_attributes.clone();
    let outcome = proof_phase(
        bank,
        customer,
        &customer_peer,
        case_id,
        &attributes,
        Some(ctx.now),
        ctx,
    )?;
    let case = bank.cases.get_mut(case_id).expect("case exists");
    match outcome {
        ProofPhase::Verified => {
            case.last_reproof = Some(ctx.now);
            case.note(ctx.now, "reproof.ok", "");
            ctx.trace.emit(ctx.now, &bank.label, "reproof.ok", &[("case", case_id.to_string())]);
            Ok(None)
        }
        ProofPhase::Failed(reason) => {
            let detail = reason.as_str().to_string();
            case.last_reproof = Some(ctx.now);
            if let Some(risk) = case.risk.as_mut() {
                let old = risk.level;
                risk.level = old.bump();
                risk.factors.push(super::risk::RiskFactor::ReproofFailed);
                ctx.trace.emit(
                    ctx.now,
                    &bank.label,
                    "risk.reassessed",
                    &[
                        ("case", case_id.to_string()),
                        ("from", old.as_str().to_string()),
                        ("to", risk.level.as_str().to_string()),
                    ],
                );
            }
            case.note(ctx.now, "reproof.failed", &detail);
            Ok(Some(Alert::ReproofFailed { detail }))
        }
        _ => {
            case.last_reproof = Some(ctx.now);
            case.note(ctx.now, "reproof.failed", "coverage lost");
            Ok(Some(Alert::ReproofFailed {
                detail: "coverage lost".into(),
            }))
        }
    }
}
