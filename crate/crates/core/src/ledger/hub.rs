//! Universal resolver over an ecosystem of ledgers. Routing is purely
//! syntactic: public DIDs and object ids embed their home ledger's name.

use super::{Ledger, LedgerError, RevocationRegistry};
use crate::anoncred::objects::{object_ledger_segment, CredentialDefinition, Schema};
use crate::clock::Tick;
use crate::connect::did::{Did, DidDocument};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("no ledger named `{0}`")]
    UnknownLedger(String),
    #[error("did `{0}` not registered")]
    UnknownDid(String),
    #[error("peer DIDs are never on any ledger")]
    PeerDidNotResolvable,
    #[error("object `{0}` not found")]
    UnknownObject(String),
}

#[derive(Debug, Default)]
pub struct LedgerHub {
    ledgers: BTreeMap<String, Ledger>,
}

impl LedgerHub {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_ledger(&mut self, ledger: Ledger) {
        self.ledgers.insert(ledger.ledger_id.clone(), ledger);
    }

    pub fn ledger(&self, ledger_id: &str) -> Option<&Ledger> {
        self.ledgers.get(ledger_id)
    }

    pub fn ledger_mut(&mut self, ledger_id: &str) -> Option<&mut Ledger> {
        self.ledgers.get_mut(ledger_id)
    }

    pub fn ledger_ids(&self) -> impl Iterator<Item = &str> {
        self.ledgers.keys().map(|s| s.as_str())
    }

    pub fn ledgers(&self) -> impl Iterator<Item = &Ledger> {
        self.ledgers.values()
    }

    pub fn resolve(&self, did: &Did) -> Result<&DidDocument, ResolveError> {
        let ledger_id = match did {
            Did::Peer { .. } => return Err(ResolveError::PeerDidNotResolvable),
            Did::Public { ledger_id, .. } => ledger_id,
        };
        let ledger = self
            .ledgers
            .get(ledger_id)
            .ok_or_else(|| ResolveError::UnknownLedger(ledger_id.clone()))?;
        ledger
            .did_document(did)
            .ok_or_else(|| ResolveError::UnknownDid(did.to_string()))
    }

    fn route(&self, object_id: &str) -> Result<&Ledger, ResolveError> {
        let ledger_id = object_ledger_segment(object_id)
            .ok_or_else(|| ResolveError::UnknownObject(object_id.to_string()))?;
        self.ledgers
            .get(ledger_id)
            .ok_or_else(|| ResolveError::UnknownLedger(ledger_id.to_string()))
    }

    pub fn schema(&self, schema_id: &str) -> Result<&Schema, ResolveError> {
        self.route(schema_id)?
            .schema(schema_id)
            .ok_or_else(|| ResolveError::UnknownObject(schema_id.to_string()))
    }

    pub fn cred_def(&self, cred_def_id: &str) -> Result<&CredentialDefinition, ResolveError> {
        self.route(cred_def_id)?
            .cred_def(cred_def_id)
            .ok_or_else(|| ResolveError::UnknownObject(cred_def_id.to_string()))
    }

    pub fn registry_at_version(
        &self,
        registry_id: &str,
        version: u64,
    ) -> Result<&RevocationRegistry, LedgerError> {
        let ledger = self
            .route(registry_id)
            .map_err(|_| LedgerError::UnknownRegistry(registry_id.to_string()))?;
        ledger.registry_at_version(registry_id, version)
    }

    pub fn registry_at_tick(
        &self,
        registry_id: &str,
        tick: Tick,
    ) -> Result<&RevocationRegistry, LedgerError> {
        let ledger = self
            .route(registry_id)
            .map_err(|_| LedgerError::UnknownRegistry(registry_id.to_string()))?;
        ledger.registry_at_tick(registry_id, tick)
    }

    pub fn latest_registry(&self, registry_id: &str) -> Result<&RevocationRegistry, LedgerError> {
        let ledger = self
            .route(registry_id)
            .map_err(|_| LedgerError::UnknownRegistry(registry_id.to_string()))?;
        ledger.latest_registry(registry_id)
    }

    pub fn total_appends(&self) -> u64 {
        self.ledgers.values().map(|l| l.append_count()).sum()
    }

    pub fn total_reads(&self) -> u64 {
        self.ledgers.values().map(|l| l.read_count()).sum()
    }

    /// Scan every chain for a term; ledger names that match are returned.
    pub fn scan_for_bytes(&self, needle: &[u8]) -> Vec<&str> {
        self.ledgers
            .values()
            .filter(|l| l.contains_bytes(needle))
            .map(|l| l.ledger_id.as_str())
            .collect()
    }
}
