//! Issuer-side bootstrap (schema, credential definition, revocation
//! registry) and the offer → blinded request → issue → holder-validate
//! exchange.

use super::credential::{
    credential_signing_bytes, CredentialBundle, CredentialOffer, CredentialRequest, Nonce,
    RevocationCoords, VerifiableCredential, HeldCredential,
};
use super::objects::{CredentialDefinition, Schema};
use crate::clock::Tick;
use crate::connect::did::Did;
use crate::connect::wallet::Wallet;
use crate::crypto::{hash_commit, pedersen_commit, sign, verify, KeyPair, SALT_LEN};
use crate::ledger::{Ledger, LedgerError, LedgerHub, LedgerTransaction, RevRegCreation, RevRegUpdate, TxKind};
use rand::RngCore;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IssueError {
    #[error("offer is missing attribute `{0}`")]
    MissingAttribute(String),
    #[error("offer carries attribute `{0}` not in the schema")]
    UnknownAttribute(String),
    #[error("unknown credential definition `{0}`")]
    UnknownCredDef(String),
    #[error("request does not echo a live offer")]
    StaleOffer,
    #[error("revocation registry index space exhausted")]
    RegistryFull,
    #[error("request rejected: {0}")]
    BadRequest(String),
    #[error("holder validation failed: {0}")]
    HolderValidation(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RevokeError {
    #[error("index was never issued")]
    UnknownIndex,
    #[error("index already revoked")]
    AlreadyRevoked,
    #[error("credential definition has no revocation registry")]
    NoRegistry,
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// Issuance bookkeeping for one credential definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuerState {
    pub cred_def_id: String,
    pub schema_id: String,
    pub attr_names: Vec<String>,
    pub registry_id: Option<String>,
    pub next_index: u32,
    pub max_entries: u32,
    live_offers: BTreeMap<Nonce, CredentialOffer>,
}

fn signed_tx(wallet: &Wallet, did: &Did, key: &KeyPair, kind: TxKind, payload: Vec<u8>) -> LedgerTransaction {
    let msg = LedgerTransaction::signing_bytes(kind, &payload, did);
    LedgerTransaction {
        kind,
        payload,
        author_did: did.clone(),
        author_signature: sign(wallet.group(), &key.sk, &msg),
    }
}

fn issuer_key<'w>(wallet: &'w Wallet, did: &Did) -> &'w KeyPair {
    let (_, key_id) = wallet
        .public_dids
        .iter()
        .find(|(d, _)| d == did)
        .expect("issuer wallet controls this did");
    wallet.key(key_id).expect("key present")
}

pub fn register_schema(
    wallet: &Wallet,
    did: &Did,
    ledger: &mut Ledger,
    name: &str,
    version: &str,
    attr_names: Vec<String>,
    now: Tick,
) -> Result<Schema, LedgerError> {
    let schema = Schema::new(&ledger.ledger_id, name, version, attr_names);
    let key = issuer_key(wallet, did);
    let tx = signed_tx(wallet, did, key, TxKind::SchemaRegistration, schema.encode());
    ledger.append(wallet.group(), tx, now)?;
    Ok(schema)
}

pub fn register_cred_def(
    wallet: &Wallet,
    did: &Did,
    ledger: &mut Ledger,
    schema: &Schema,
    revocation_capacity: Option<u32>,
    now: Tick,
) -> Result<CredentialDefinition, LedgerError> {
    let (_, key_id) = wallet
        .public_dids
        .iter()
        .find(|(d, _)| d == did)
        .expect("issuer wallet controls this did");
    let registry_id = revocation_capacity.map(|_| {
        let short = &did.idstring()[..16.min(did.idstring().len())];
        format!("revreg:{}:{}:{}:0", ledger.ledger_id, short, schema.name)
    });
    let cred_def = CredentialDefinition {
        cred_def_id: CredentialDefinition::make_id(&ledger.ledger_id, did, &schema.name, &schema.version),
        schema_id: schema.schema_id.clone(),
        issuer_did: did.clone(),
        key_id: key_id.clone(),
        revocation_supported: revocation_capacity.is_some(),
        registry_id,
    };
    let key = issuer_key(wallet, did);
    let tx = signed_tx(wallet, did, key, TxKind::CredDefRegistration, cred_def.encode());
    ledger.append(wallet.group(), tx, now)?;
    Ok(cred_def)
}

pub fn create_revocation_registry(
    wallet: &Wallet,
    did: &Did,
    ledger: &mut Ledger,
    cred_def: &CredentialDefinition,
    max_entries: u32,
    now: Tick,
) -> Result<String, LedgerError> {
    let registry_id = cred_def
        .registry_id
        .clone()
        .expect("cred def declares revocation support");
    let creation = RevRegCreation {
        registry_id: registry_id.clone(),
        cred_def_id: cred_def.cred_def_id.clone(),
        max_entries,
    };
    let key = issuer_key(wallet, did);
    let tx = signed_tx(wallet, did, key, TxKind::RevRegCreation, creation.encode());
    ledger.append(wallet.group(), tx, now)?;
    Ok(registry_id)
}

impl IssuerState {
    pub fn new(cred_def: &CredentialDefinition, schema: &Schema, max_entries: u32) -> Self {
        IssuerState {
            cred_def_id: cred_def.cred_def_id.clone(),
            schema_id: schema.schema_id.clone(),
            attr_names: schema.attr_names.clone(),
            registry_id: cred_def.registry_id.clone(),
            next_index: 0,
            max_entries,
            live_offers: BTreeMap::new(),
        }
    }
}

/// Offer a credential over the given values. The preview must cover the
/// schema's attributes exactly.
pub fn create_offer<R: RngCore>(
    issuer: &mut IssuerState,
    values: &BTreeMap<String, String>,
    expiration: Tick,
    rng: &mut R,
) -> Result<CredentialOffer, IssueError> {
    for name in &issuer.attr_names {
        if !values.contains_key(name) {
            return Err(IssueError::MissingAttribute(name.clone()));
        }
    }
    for name in values.keys() {
        if !issuer.attr_names.contains(name) {
            return Err(IssueError::UnknownAttribute(name.clone()));
        }
    }
    let mut nonce = [0u8; 16];
    rng.fill_bytes(&mut nonce);
    let offer = CredentialOffer {
        cred_def_id: issuer.cred_def_id.clone(),
        preview: values.clone(),
        expiration,
        registry_id: issuer.registry_id.clone(),
        nonce,
    };
    issuer.live_offers.insert(nonce, offer.clone());
    Ok(offer)
}

/// Holder accepts an offer: fresh blinding randomness every time, so the
/// same link secret commits to a different value in every issuance.
pub fn accept_offer<R: RngCore>(
    wallet: &mut Wallet,
    offer: &CredentialOffer,
    rng: &mut R,
) -> CredentialRequest {
    let group = wallet.group();
    let blinding = group.rand_scalar(rng);
    let commitment = pedersen_commit(group, wallet.link_secret(), &blinding)
        .expect("link secret and blinding are reduced scalars");
    let mut nonce = [0u8; 16];
    rng.fill_bytes(&mut nonce);
    wallet.note_pending_issuance(offer.clone(), blinding);
    CredentialRequest {
        offer_nonce: offer.nonce,
        blinded_link_secret: commitment,
        nonce,
    }
}

/// Issue against a live offer: assign the next free revocation index,
/// commit every attribute under a fresh salt, sign the lot.
pub fn issue<R: RngCore>(
    issuer: &mut IssuerState,
    signing_key: &KeyPair,
    wallet: &Wallet,
    request: &CredentialRequest,
    rng: &mut R,
) -> Result<CredentialBundle, IssueError> {
    let group = wallet.group();
    let offer = issuer
        .live_offers
        .remove(&request.offer_nonce)
        .ok_or(IssueError::StaleOffer)?;
    if !group.is_element(&request.blinded_link_secret.value) {
        return Err(IssueError::BadRequest(
            "blinded link secret is not a subgroup element".into(),
        ));
    }
    let revocation = match &issuer.registry_id {
        Some(registry_id) => {
            if issuer.next_index >= issuer.max_entries {
                return Err(IssueError::RegistryFull);
            }
            let index = issuer.next_index;
            issuer.next_index += 1;
            Some(RevocationCoords {
                registry_id: registry_id.clone(),
                index,
            })
        }
        None => None,
    };
    let mut salts = BTreeMap::new();
    let mut commitments = Vec::with_capacity(issuer.attr_names.len());
    for name in &issuer.attr_names {
        let mut salt = [0u8; SALT_LEN];
        rng.fill_bytes(&mut salt);
        let value = &offer.preview[name];
        commitments.push(hash_commit(name, value, &salt).digest);
        salts.insert(name.clone(), salt);
    }
    let signing_bytes = credential_signing_bytes(
        &issuer.cred_def_id,
        &issuer.schema_id,
        &commitments,
        &request.blinded_link_secret,
        revocation.as_ref(),
        offer.expiration,
    );
    let credential = VerifiableCredential {
        cred_def_id: issuer.cred_def_id.clone(),
        schema_id: issuer.schema_id.clone(),
        attribute_commitments: commitments,
        link_secret_commitment: request.blinded_link_secret.clone(),
        revocation,
        expiration: offer.expiration,
        issuer_signature: sign(group, &signing_key.sk, &signing_bytes),
    };
    Ok(CredentialBundle {
        offer_nonce: request.offer_nonce,
        credential,
        values: offer.preview,
        salts,
    })
}

/// Holder-side validity check on receipt; only a fully checked credential
/// enters the wallet.
pub fn store_credential(
    wallet: &mut Wallet,
    bundle: &CredentialBundle,
    hub: &LedgerHub,
    now: Tick,
) -> Result<(), IssueError> {
    let group = wallet.group();
    let (offer, blinding) = wallet
        .take_pending_issuance(&bundle.offer_nonce)
        .ok_or(IssueError::StaleOffer)?;
    let cred = &bundle.credential;
    let fail = |m: &str| IssueError::HolderValidation(m.into());

    if cred.cred_def_id != offer.cred_def_id {
        return Err(fail("credential definition differs from offer"));
    }
    if bundle.values != offer.preview {
        return Err(fail("attested values differ from the offered preview"));
    }
    let cred_def = hub
        .cred_def(&cred.cred_def_id)
        .map_err(|_| IssueError::UnknownCredDef(cred.cred_def_id.clone()))?;
    let schema = hub
        .schema(&cred.schema_id)
        .map_err(|e| IssueError::HolderValidation(e.to_string()))?;
    if cred_def.schema_id != cred.schema_id {
        return Err(fail("schema does not match credential definition"));
    }
    if cred.attribute_commitments.len() != schema.attr_names.len() {
        return Err(fail("commitment count does not match schema"));
    }
    for (i, name) in schema.attr_names.iter().enumerate() {
        let value = bundle.values.get(name).ok_or_else(|| fail("missing value"))?;
        let salt = bundle.salts.get(name).ok_or_else(|| fail("missing salt"))?;
        if hash_commit(name, value, salt).digest != cred.attribute_commitments[i] {
            return Err(fail("attribute commitment does not recompute"));
        }
    }
    let expected_link = pedersen_commit(group, wallet.link_secret(), &blinding)
        .expect("scalars reduced");
    if expected_link != cred.link_secret_commitment {
        return Err(fail("link secret commitment was altered"));
    }
    match (&cred.revocation, &cred_def.registry_id) {
        (Some(coords), Some(reg)) if &coords.registry_id == reg => {
            hub.latest_registry(reg)
                .map_err(|e| IssueError::HolderValidation(e.to_string()))?;
        }
        (None, None) => {}
        _ => return Err(fail("revocation coordinates inconsistent with cred def")),
    }
    if cred.expiration <= now {
        return Err(fail("credential already expired"));
    }
    let issuer_doc = hub
        .resolve(&cred_def.issuer_did)
        .map_err(|e| IssueError::HolderValidation(e.to_string()))?;
    let key = issuer_doc
        .key(&cred_def.key_id)
        .ok_or_else(|| fail("issuer key not in document"))?;
    if !verify(group, &key.public_key, &cred.signing_bytes(), &cred.issuer_signature) {
        return Err(fail("issuer signature does not verify"));
    }
    wallet.credentials.push(HeldCredential {
        credential: cred.clone(),
        values: bundle.values.clone(),
        salts: bundle.salts.clone(),
        link_blinding: blinding,
    });
    Ok(())
}

/// Revoke one issued index: next registry version with the index added.
pub fn revoke(
    issuer: &IssuerState,
    wallet: &Wallet,
    did: &Did,
    ledger: &mut Ledger,
    index: u32,
    now: Tick,
) -> Result<u64, RevokeError> {
    let registry_id = issuer.registry_id.as_ref().ok_or(RevokeError::NoRegistry)?;
    if index >= issuer.next_index {
        return Err(RevokeError::UnknownIndex);
    }
    let current = ledger.latest_registry(registry_id)?;
    if current.revoked.contains(&index) {
        return Err(RevokeError::AlreadyRevoked);
    }
    let mut revoked = current.revoked.clone();
    revoked.insert(index);
    let update = RevRegUpdate {
        registry_id: registry_id.clone(),
        version: current.version + 1,
        revoked,
    };
    let new_version = update.version;
    let key = issuer_key(wallet, did);
    let tx = signed_tx(wallet, did, key, TxKind::RevRegUpdate, update.encode());
    ledger.append(wallet.group(), tx, now)?;
    Ok(new_version)
}
