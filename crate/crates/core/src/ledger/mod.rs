//! Simulated verifiable data registries: per-ledger append-only
//! hash-chained logs restricted to five public trust-object kinds, with
//! synchronously updated read replicas. A structural whitelist rejects any
//! payload that does not parse as exactly one public object, so personal
//! data cannot land on a chain in the first place; scenario audits
//! additionally byte-scan whole chains.

mod hub;

pub use hub::{LedgerHub, ResolveError};

use crate::anoncred::objects::{CredentialDefinition, Schema};
use crate::clock::Tick;
use crate::connect::did::{Did, DidDocument};
use crate::crypto::{sha256, verify, GroupParams, Signature};
use crate::enc::{Dec, DecodeError, Enc};
use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("payload rejected by public-object guard: {0}")]
    ForbiddenKind(String),
    #[error("author signature invalid: {0}")]
    BadSignature(String),
    #[error("revocation registry version conflict: {0}")]
    VersionConflict(String),
    #[error("revocation set must grow monotonically")]
    ShrinkingRevocationSet,
    #[error("unknown revocation registry `{0}`")]
    UnknownRegistry(String),
    #[error("registry version out of range: {0}")]
    VersionOutOfRange(String),
    #[error("corrupt chain dump: {0}")]
    CorruptDump(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TxKind {
    DidDocRegistration,
    SchemaRegistration,
    CredDefRegistration,
    RevRegCreation,
    RevRegUpdate,
}

impl TxKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TxKind::DidDocRegistration => "diddoc",
            TxKind::SchemaRegistration => "schema",
            TxKind::CredDefRegistration => "creddef",
            TxKind::RevRegCreation => "revreg-create",
            TxKind::RevRegUpdate => "revreg-update",
        }
    }

    pub fn parse(s: &str) -> Option<TxKind> {
        Some(match s {
            "diddoc" => TxKind::DidDocRegistration,
            "schema" => TxKind::SchemaRegistration,
            "creddef" => TxKind::CredDefRegistration,
            "revreg-create" => TxKind::RevRegCreation,
            "revreg-update" => TxKind::RevRegUpdate,
            _ => return None,
        })
    }
}

/// Payload announcing a new revocation registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevRegCreation {
    pub registry_id: String,
    pub cred_def_id: String,
    pub max_entries: u32,
}

impl RevRegCreation {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.revreg.create.v1");
        e.field("registry_id").put_str(&self.registry_id);
        e.field("cred_def_id").put_str(&self.cred_def_id);
        e.field("max_entries").put_u32(self.max_entries);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.revreg.create.v1")?;
        d.field("registry_id")?;
        let registry_id = d.str()?.to_string();
        d.field("cred_def_id")?;
        let cred_def_id = d.str()?.to_string();
        d.field("max_entries")?;
        let max_entries = d.u32()?;
        d.finish()?;
        if max_entries == 0 {
            return Err(DecodeError::Invalid("registry of size zero".into()));
        }
        Ok(RevRegCreation {
            registry_id,
            cred_def_id,
            max_entries,
        })
    }
}

/// Payload carrying a full, monotonically grown revoked-index set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevRegUpdate {
    pub registry_id: String,
    pub version: u64,
    pub revoked: BTreeSet<u32>,
}

impl RevRegUpdate {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.revreg.update.v1");
        e.field("registry_id").put_str(&self.registry_id);
        e.field("version").put_u64(self.version);
        e.field("revoked").put_count(self.revoked.len());
        for idx in &self.revoked {
            e.put_u32(*idx);
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.revreg.update.v1")?;
        d.field("registry_id")?;
        let registry_id = d.str()?.to_string();
        d.field("version")?;
        let version = d.u64()?;
        d.field("revoked")?;
        let n = d.count()?;
        let mut revoked = BTreeSet::new();
        for _ in 0..n {
            revoked.insert(d.u32()?);
        }
        d.finish()?;
        Ok(RevRegUpdate {
            registry_id,
            version,
            revoked,
        })
    }
}

/// Registry state as of one version, with the logical tick of the block
/// that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevocationRegistry {
    pub registry_id: String,
    pub cred_def_id: String,
    pub version: u64,
    pub revoked: BTreeSet<u32>,
    pub state_hash: [u8; 32],
    pub updated_at: Tick,
    pub max_entries: u32,
}

pub fn registry_state_hash(registry_id: &str, version: u64, revoked: &BTreeSet<u32>) -> [u8; 32] {
    let mut e = Enc::new();
    e.put_str("sim.revreg.state.v1");
    e.put_str(registry_id);
    e.put_u64(version);
    e.put_count(revoked.len());
    for idx in revoked {
        e.put_u32(*idx);
    }
    sha256(&e.into_bytes())
}

/// What a payload must parse into for its claimed kind. Anything else is a
/// ForbiddenKind: the chain only ever holds these five shapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PublicObject {
    DidDoc(DidDocument),
    Schema(Schema),
    CredDef(CredentialDefinition),
    RevRegCreation(RevRegCreation),
    RevRegUpdate(RevRegUpdate),
}

impl PublicObject {
    pub fn parse(kind: TxKind, payload: &[u8]) -> Result<Self, LedgerError> {
        let forbidden = |e: DecodeError| LedgerError::ForbiddenKind(e.to_string());
        Ok(match kind {
            TxKind::DidDocRegistration => {
                PublicObject::DidDoc(DidDocument::decode(payload).map_err(forbidden)?)
            }
            TxKind::SchemaRegistration => {
                PublicObject::Schema(Schema::decode(payload).map_err(forbidden)?)
            }
            TxKind::CredDefRegistration => {
                PublicObject::CredDef(CredentialDefinition::decode(payload).map_err(forbidden)?)
            }
            TxKind::RevRegCreation => {
                PublicObject::RevRegCreation(RevRegCreation::decode(payload).map_err(forbidden)?)
            }
            TxKind::RevRegUpdate => {
                PublicObject::RevRegUpdate(RevRegUpdate::decode(payload).map_err(forbidden)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerTransaction {
    pub kind: TxKind,
    pub payload: Vec<u8>,
    pub author_did: Did,
    pub author_signature: Signature,
}

impl LedgerTransaction {
    /// Bytes the author signs.
    pub fn signing_bytes(kind: TxKind, payload: &[u8], author_did: &Did) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.tx.v1");
        e.put_str(kind.as_str());
        e.put_bytes(payload);
        e.put_str(&author_did.to_string());
        e.into_bytes()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.field("kind").put_str(self.kind.as_str());
        e.field("payload").put_bytes(&self.payload);
        e.field("author").put_str(&self.author_did.to_string());
        e.field("sig").put_int(&self.author_signature.c);
        e.put_int(&self.author_signature.s);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("kind")?;
        let kind = TxKind::parse(d.str()?)
            .ok_or_else(|| DecodeError::Invalid("unknown tx kind".into()))?;
        d.field("payload")?;
        let payload = d.bytes()?.to_vec();
        d.field("author")?;
        let author_did = Did::parse(d.str()?)
            .ok_or_else(|| DecodeError::Invalid("bad author did".into()))?;
        d.field("sig")?;
        let author_signature = Signature {
            c: d.int()?,
            s: d.int()?,
        };
        d.finish()?;
        Ok(LedgerTransaction {
            kind,
            payload,
            author_did,
            author_signature,
        })
    }

    pub fn hash(&self) -> [u8; 32] {
        sha256(&self.encode())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub height: u64,
    pub prev_hash: [u8; 32],
    pub timestamp: Tick,
    pub txs: Vec<LedgerTransaction>,
    pub hash: [u8; 32],
}

impl Block {
    fn header_bytes(height: u64, prev_hash: &[u8; 32], timestamp: Tick, txs: &[LedgerTransaction]) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.block.v1");
        e.put_u64(height);
        e.put_bytes(prev_hash);
        e.put_u64(timestamp);
        e.put_count(txs.len());
        for tx in txs {
            e.put_bytes(&tx.encode());
        }
        e.into_bytes()
    }

    fn seal(height: u64, prev_hash: [u8; 32], timestamp: Tick, txs: Vec<LedgerTransaction>) -> Block {
        let hash = sha256(&Self::header_bytes(height, &prev_hash, timestamp, &txs));
        Block {
            height,
            prev_hash,
            timestamp,
            txs,
            hash,
        }
    }

    pub fn recomputed_hash(&self) -> [u8; 32] {
        sha256(&Self::header_bytes(
            self.height,
            &self.prev_hash,
            self.timestamp,
            &self.txs,
        ))
    }

    /// All canonical bytes of this block, for replica comparison and the
    /// PII byte-scan.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        Self::header_bytes(self.height, &self.prev_hash, self.timestamp, &self.txs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Receipt {
    pub height: u64,
    pub tx_hash: [u8; 32],
}

#[derive(Debug)]
pub struct Ledger {
    pub ledger_id: String,
    blocks: Vec<Block>,
    replica_count: usize,
    replicas: Vec<Vec<Block>>,
    reads: Cell<u64>,
    // materialized views, rebuilt on load; tests cross-check them against
    // a plain linear scan of the chain
    dids: BTreeMap<String, DidDocument>,
    schemas: BTreeMap<String, Schema>,
    cred_defs: BTreeMap<String, CredentialDefinition>,
    registries: BTreeMap<String, Vec<RevocationRegistry>>,
}

impl Ledger {
    pub fn new(ledger_id: &str, replica_count: usize) -> Self {
        let genesis = Block::seal(0, [0u8; 32], 0, Vec::new());
        let blocks = vec![genesis];
        let replicas = vec![blocks.clone(); replica_count];
        Ledger {
            ledger_id: ledger_id.to_string(),
            blocks,
            replica_count,
            replicas,
            reads: Cell::new(0),
            dids: BTreeMap::new(),
            schemas: BTreeMap::new(),
            cred_defs: BTreeMap::new(),
            registries: BTreeMap::new(),
        }
    }

    pub fn height(&self) -> u64 {
        self.blocks.len() as u64 - 1
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn replica_count(&self) -> usize {
        self.replica_count
    }

    /// Appends since genesis. Genesis does not count.
    pub fn append_count(&self) -> u64 {
        self.height()
    }

    pub fn read_count(&self) -> u64 {
        self.reads.get()
    }

    fn note_read(&self) {
        self.reads.set(self.reads.get() + 1);
    }

    /// Validate and append one transaction as a new block, then bring all
    /// replicas up to date before returning.
    pub fn append(
        &mut self,
        group: &GroupParams,
        tx: LedgerTransaction,
        now: Tick,
    ) -> Result<Receipt, LedgerError> {
        let object = PublicObject::parse(tx.kind, &tx.payload)?;
        self.validate_semantics(&object, &tx)?;
        self.verify_author(group, &object, &tx)?;

        let tx_hash = tx.hash();
        let prev = self.blocks.last().expect("genesis always present");
        let block = Block::seal(prev.height + 1, prev.hash, now, vec![tx]);
        self.apply_views(&object, now);
        self.blocks.push(block.clone());
        for replica in &mut self.replicas {
            replica.push(block.clone());
        }
        Ok(Receipt {
            height: block.height,
            tx_hash,
        })
    }

    fn validate_semantics(
        &self,
        object: &PublicObject,
        tx: &LedgerTransaction,
    ) -> Result<(), LedgerError> {
        match object {
            PublicObject::DidDoc(doc) => {
                if doc.did.is_peer() {
                    return Err(LedgerError::ForbiddenKind(
                        "peer DIDs are never registered on a ledger".into(),
                    ));
                }
                if doc.did.ledger_id() != Some(self.ledger_id.as_str()) {
                    return Err(LedgerError::ForbiddenKind(format!(
                        "did {} does not belong to ledger {}",
                        doc.did, self.ledger_id
                    )));
                }
                if tx.author_did != doc.did {
                    return Err(LedgerError::BadSignature(
                        "only the DID controller may register its document".into(),
                    ));
                }
            }
            PublicObject::Schema(schema) => {
                self.check_home_ledger(&schema.schema_id)?;
                if self.schemas.contains_key(&schema.schema_id) {
                    return Err(LedgerError::VersionConflict(format!(
                        "schema {} already registered",
                        schema.schema_id
                    )));
                }
            }
            PublicObject::CredDef(cd) => {
                self.check_home_ledger(&cd.cred_def_id)?;
                if self.cred_defs.contains_key(&cd.cred_def_id) {
                    return Err(LedgerError::VersionConflict(format!(
                        "cred def {} already registered",
                        cd.cred_def_id
                    )));
                }
                if !self.schemas.contains_key(&cd.schema_id) {
                    return Err(LedgerError::ForbiddenKind(format!(
                        "cred def references unknown schema {}",
                        cd.schema_id
                    )));
                }
                if tx.author_did != cd.issuer_did {
                    return Err(LedgerError::BadSignature(
                        "cred def must be registered by its issuer".into(),
                    ));
                }
            }
            PublicObject::RevRegCreation(c) => {
                self.check_home_ledger(&c.registry_id)?;
                if self.registries.contains_key(&c.registry_id) {
                    return Err(LedgerError::VersionConflict(format!(
                        "registry {} already created",
                        c.registry_id
                    )));
                }
                let cd = self.cred_defs.get(&c.cred_def_id).ok_or_else(|| {
                    LedgerError::ForbiddenKind(format!(
                        "registry references unknown cred def {}",
                        c.cred_def_id
                    ))
                })?;
                if tx.author_did != cd.issuer_did {
                    return Err(LedgerError::BadSignature(
                        "registry must be created by the cred def issuer".into(),
                    ));
                }
            }
            PublicObject::RevRegUpdate(u) => {
                let history = self
                    .registries
                    .get(&u.registry_id)
                    .ok_or_else(|| LedgerError::UnknownRegistry(u.registry_id.clone()))?;
                let current = history.last().expect("creation always recorded");
                if u.version != current.version + 1 {
                    return Err(LedgerError::VersionConflict(format!(
                        "expected version {}, got {}",
                        current.version + 1,
                        u.version
                    )));
                }
                if !current.revoked.is_subset(&u.revoked) {
                    return Err(LedgerError::ShrinkingRevocationSet);
                }
                if u.revoked.iter().any(|idx| *idx >= current.max_entries) {
                    return Err(LedgerError::ForbiddenKind(
                        "revoked index beyond registry size".into(),
                    ));
                }
                let cd = self.cred_defs.get(&current.cred_def_id);
                if cd.map(|cd| &cd.issuer_did) != Some(&tx.author_did) {
                    return Err(LedgerError::BadSignature(
                        "registry must be updated by the cred def issuer".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_home_ledger(&self, object_id: &str) -> Result<(), LedgerError> {
        match crate::anoncred::objects::object_ledger_segment(object_id) {
            Some(l) if l == self.ledger_id => Ok(()),
            _ => Err(LedgerError::ForbiddenKind(format!(
                "object id `{object_id}` does not name ledger {}",
                self.ledger_id
            ))),
        }
    }

    fn verify_author(
        &self,
        group: &GroupParams,
        object: &PublicObject,
        tx: &LedgerTransaction,
    ) -> Result<(), LedgerError> {
        let msg = LedgerTransaction::signing_bytes(tx.kind, &tx.payload, &tx.author_did);
        let did_str = tx.author_did.to_string();
        // first registration of a DID document is self-certifying: the
        // signature must verify under a key inside the new document, and
        // the idstring must be derived from that key
        if let (PublicObject::DidDoc(doc), None) = (object, self.dids.get(&did_str)) {
            let signer = doc.verification_keys.iter().find(|k| {
                verify(group, &k.public_key, &msg, &tx.author_signature)
            });
            let Some(signer) = signer else {
                return Err(LedgerError::BadSignature(
                    "self-certifying registration does not verify".into(),
                ));
            };
            let derived = Did::public_from_key(&self.ledger_id, &signer.public_key);
            if derived != doc.did {
                return Err(LedgerError::BadSignature(
                    "idstring not derived from signing key".into(),
                ));
            }
            return Ok(());
        }
        let doc = self.dids.get(&did_str).ok_or_else(|| {
            LedgerError::BadSignature(format!("author {did_str} not registered on this ledger"))
        })?;
        let ok = doc
            .verification_keys
            .iter()
            .any(|k| verify(group, &k.public_key, &msg, &tx.author_signature));
        if !ok {
            return Err(LedgerError::BadSignature(format!(
                "signature does not verify under any key of {did_str}"
            )));
        }
        Ok(())
    }

    fn apply_views(&mut self, object: &PublicObject, now: Tick) {
        match object {
            PublicObject::DidDoc(doc) => {
                self.dids.insert(doc.did.to_string(), doc.clone());
            }
            PublicObject::Schema(s) => {
                self.schemas.insert(s.schema_id.clone(), s.clone());
            }
            PublicObject::CredDef(cd) => {
                self.cred_defs.insert(cd.cred_def_id.clone(), cd.clone());
            }
            PublicObject::RevRegCreation(c) => {
                let state = RevocationRegistry {
                    registry_id: c.registry_id.clone(),
                    cred_def_id: c.cred_def_id.clone(),
                    version: 0,
                    revoked: BTreeSet::new(),
                    state_hash: registry_state_hash(&c.registry_id, 0, &BTreeSet::new()),
                    updated_at: now,
                    max_entries: c.max_entries,
                };
                self.registries.insert(c.registry_id.clone(), vec![state]);
            }
            PublicObject::RevRegUpdate(u) => {
                let history = self.registries.get_mut(&u.registry_id).expect("validated");
                let prev = history.last().expect("creation present");
                let state = RevocationRegistry {
                    registry_id: u.registry_id.clone(),
                    cred_def_id: prev.cred_def_id.clone(),
                    version: u.version,
                    revoked: u.revoked.clone(),
                    state_hash: registry_state_hash(&u.registry_id, u.version, &u.revoked),
                    updated_at: now,
                    max_entries: prev.max_entries,
                };
                history.push(state);
            }
        }
    }

    /// True iff every block hash and prev_hash linkage recomputes.
    pub fn verify_chain(&self) -> bool {
        Self::chain_valid(&self.blocks)
    }

    fn chain_valid(blocks: &[Block]) -> bool {
        if blocks.is_empty() || blocks[0].height != 0 || blocks[0].prev_hash != [0u8; 32] {
            return false;
        }
        let mut prev: Option<&Block> = None;
        for b in blocks {
            if b.recomputed_hash() != b.hash {
                return false;
            }
            if let Some(p) = prev {
                if b.height != p.height + 1 || b.prev_hash != p.hash {
                    return false;
                }
            }
            prev = Some(b);
        }
        true
    }

    pub fn replicas_consistent(&self) -> bool {
        self.replicas.iter().all(|r| r == &self.blocks)
    }

    pub fn did_document(&self, did: &Did) -> Option<&DidDocument> {
        self.note_read();
        self.dids.get(&did.to_string())
    }

    pub fn schema(&self, schema_id: &str) -> Option<&Schema> {
        self.note_read();
        self.schemas.get(schema_id)
    }

    pub fn cred_def(&self, cred_def_id: &str) -> Option<&CredentialDefinition> {
        self.note_read();
        self.cred_defs.get(cred_def_id)
    }

    pub fn registry_at_version(
        &self,
        registry_id: &str,
        version: u64,
    ) -> Result<&RevocationRegistry, LedgerError> {
        self.note_read();
        let history = self
            .registries
            .get(registry_id)
            .ok_or_else(|| LedgerError::UnknownRegistry(registry_id.to_string()))?;
        history
            .iter()
            .find(|r| r.version == version)
            .ok_or_else(|| {
                LedgerError::VersionOutOfRange(format!(
                    "registry {registry_id} has no version {version}"
                ))
            })
    }

    /// Latest state whose updated_at is <= the tick. A tick before the
    /// registry's creation is out of range.
    pub fn registry_at_tick(
        &self,
        registry_id: &str,
        tick: Tick,
    ) -> Result<&RevocationRegistry, LedgerError> {
        self.note_read();
        let history = self
            .registries
            .get(registry_id)
            .ok_or_else(|| LedgerError::UnknownRegistry(registry_id.to_string()))?;
        history
            .iter()
            .rev()
            .find(|r| r.updated_at <= tick)
            .ok_or_else(|| {
                LedgerError::VersionOutOfRange(format!(
                    "registry {registry_id} did not exist at tick {tick}"
                ))
            })
    }

    pub fn latest_registry(&self, registry_id: &str) -> Result<&RevocationRegistry, LedgerError> {
        self.note_read();
        self.registries
            .get(registry_id)
            .and_then(|h| h.last())
            .ok_or_else(|| LedgerError::UnknownRegistry(registry_id.to_string()))
    }

    /// Byte-scan the whole chain for a term. The DP1/GDPR audits use this.
    pub fn contains_bytes(&self, needle: &[u8]) -> bool {
        if needle.is_empty() {
            return false;
        }
        self.blocks.iter().any(|b| {
            let bytes = b.canonical_bytes();
            bytes.windows(needle.len()).any(|w| w == needle)
        })
    }

    /// One block per line: height, timestamp, prev_hash, hash, then each
    /// transaction's canonical bytes, all hex, tab-separated.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            out.push_str(&b.height.to_string());
            out.push('\t');
            out.push_str(&b.timestamp.to_string());
            out.push('\t');
            out.push_str(&hex::encode(b.prev_hash));
            out.push('\t');
            out.push_str(&hex::encode(b.hash));
            for tx in &b.txs {
                out.push('\t');
                out.push_str(&hex::encode(tx.encode()));
            }
            out.push('\n');
        }
        out
    }

    /// Parse a dump back into a ledger. Hash linkage is *not* re-verified
    /// here so that audits can still inspect tampered dumps; call
    /// [`Ledger::verify_chain`] to check integrity.
    pub fn load(ledger_id: &str, text: &str, replica_count: usize) -> Result<Self, LedgerError> {
        let corrupt = |m: String| LedgerError::CorruptDump(m);
        let mut blocks = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let height: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| corrupt(format!("line {lineno}: bad height")))?;
            let timestamp: Tick = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| corrupt(format!("line {lineno}: bad timestamp")))?;
            let prev_hash: [u8; 32] = parts
                .next()
                .and_then(|s| hex::decode(s).ok())
                .and_then(|v| v.try_into().ok())
                .ok_or_else(|| corrupt(format!("line {lineno}: bad prev_hash")))?;
            let hash: [u8; 32] = parts
                .next()
                .and_then(|s| hex::decode(s).ok())
                .and_then(|v| v.try_into().ok())
                .ok_or_else(|| corrupt(format!("line {lineno}: bad hash")))?;
            let mut txs = Vec::new();
            for txhex in parts {
                let bytes = hex::decode(txhex)
                    .map_err(|_| corrupt(format!("line {lineno}: bad tx hex")))?;
                let tx = LedgerTransaction::decode(&bytes)
                    .map_err(|e| corrupt(format!("line {lineno}: {e}")))?;
                txs.push(tx);
            }
            blocks.push(Block {
                height,
                prev_hash,
                timestamp,
                txs,
                hash,
            });
        }
        if blocks.is_empty() {
            return Err(corrupt("empty dump".into()));
        }
        let mut ledger = Ledger {
            ledger_id: ledger_id.to_string(),
            blocks: Vec::new(),
            replica_count,
            replicas: Vec::new(),
            reads: Cell::new(0),
            dids: BTreeMap::new(),
            schemas: BTreeMap::new(),
            cred_defs: BTreeMap::new(),
            registries: BTreeMap::new(),
        };
        for b in &blocks {
            for tx in &b.txs {
                if let Ok(object) = PublicObject::parse(tx.kind, &tx.payload) {
                    ledger.apply_views(&object, b.timestamp);
                }
            }
        }
        ledger.blocks = blocks;
        ledger.replicas = vec![ledger.blocks.clone(); replica_count];
        Ok(ledger)
    }
}

#[cfg(test)]
mod tests;
