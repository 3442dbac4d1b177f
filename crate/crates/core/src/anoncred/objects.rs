//! The two anoncred objects that live on a ledger: schemas (ordered
//! attribute names) and credential definitions (issuer key binding plus
//! optional revocation support). Their ids embed the home ledger so the
//! universal resolver can route lookups.

use crate::connect::did::Did;
use crate::enc::{Dec, DecodeError, Enc};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub schema_id: String,
    pub name: String,
    pub version: String,
    pub attr_names: Vec<String>,
}

impl Schema {
    pub fn new(ledger_id: &str, name: &str, version: &str, attr_names: Vec<String>) -> Self {
        Schema {
            schema_id: format!("schema:{ledger_id}:{name}:{version}"),
            name: name.to_string(),
            version: version.to_string(),
            attr_names,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.schema.v1");
        e.field("schema_id").put_str(&self.schema_id);
        e.field("name").put_str(&self.name);
        e.field("version").put_str(&self.version);
        e.field("attrs").put_count(self.attr_names.len());
        for a in &self.attr_names {
            e.put_str(a);
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.schema.v1")?;
        d.field("schema_id")?;
        let schema_id = d.str()?.to_string();
        d.field("name")?;
        let name = d.str()?.to_string();
        d.field("version")?;
        let version = d.str()?.to_string();
        d.field("attrs")?;
        let n = d.count()?;
        let mut attr_names = Vec::with_capacity(n);
        for _ in 0..n {
            attr_names.push(d.str()?.to_string());
        }
        d.finish()?;
        if attr_names.is_empty() {
            return Err(DecodeError::Invalid("schema without attributes".into()));
        }
        let mut dedup = attr_names.clone();
        dedup.sort();
        dedup.dedup();
        if dedup.len() != attr_names.len() {
            return Err(DecodeError::Invalid("duplicate attribute names".into()));
        }
        Ok(Schema {
            schema_id,
            name,
            version,
            attr_names,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CredentialDefinition {
    pub cred_def_id: String,
    pub schema_id: String,
    pub issuer_did: Did,
    pub key_id: String,
    pub revocation_supported: bool,
    pub registry_id: Option<String>,
}

impl CredentialDefinition {
    pub fn make_id(ledger_id: &str, issuer: &Did, schema_name: &str, version: &str) -> String {
        let short = &issuer.idstring()[..16.min(issuer.idstring().len())];
        format!("creddef:{ledger_id}:{short}:{schema_name}:{version}")
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.creddef.v1");
        e.field("cred_def_id").put_str(&self.cred_def_id);
        e.field("schema_id").put_str(&self.schema_id);
        e.field("issuer").put_str(&self.issuer_did.to_string());
        e.field("key_id").put_str(&self.key_id);
        e.field("revocation").put_bool(self.revocation_supported);
        e.field("registry_id")
            .put_str(self.registry_id.as_deref().unwrap_or(""));
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.creddef.v1")?;
        d.field("cred_def_id")?;
        let cred_def_id = d.str()?.to_string();
        d.field("schema_id")?;
        let schema_id = d.str()?.to_string();
        d.field("issuer")?;
        let issuer_did = Did::parse(d.str()?)
            .ok_or_else(|| DecodeError::Invalid("bad issuer did".into()))?;
        d.field("key_id")?;
        let key_id = d.str()?.to_string();
        d.field("revocation")?;
        let revocation_supported = d.bool()?;
        d.field("registry_id")?;
        let reg = d.str()?;
        let registry_id = if reg.is_empty() {
            None
        } else {
            Some(reg.to_string())
        };
        d.finish()?;
        if revocation_supported && registry_id.is_none() {
            return Err(DecodeError::Invalid(
                "revocation supported but no registry".into(),
            ));
        }
        if issuer_did.is_peer() {
            return Err(DecodeError::Invalid("issuer must be a public did".into()));
        }
        Ok(CredentialDefinition {
            cred_def_id,
            schema_id,
            issuer_did,
            key_id,
            revocation_supported,
            registry_id,
        })
    }
}

/// The ledger segment embedded in object ids like `schema:<ledger>:...`.
pub fn object_ledger_segment(object_id: &str) -> Option<&str> {
    let mut parts = object_id.splitn(3, ':');
    let _kind = parts.next()?;
    let ledger = parts.next()?;
    parts.next()?;
    Some(ledger)
}
