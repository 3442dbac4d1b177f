//! Analog identity documents. Verification is a simulation stub keyed on
//! the document's `authentic` flag — the physical or video check is
//! outside computational scope — but the flow's branching (reject on
//! inauthentic or expired, merge claims with last-wins conflict logging)
//! is real.

use crate::clock::Tick;
use crate::enc::{Dec, DecodeError, Enc};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Passport,
    IdCard,
    UtilityBill,
    IncomeStatement,
}

impl DocType {
    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Passport => "passport",
            DocType::IdCard => "id_card",
            DocType::UtilityBill => "utility_bill",
            DocType::IncomeStatement => "income_statement",
        }
    }

    pub fn parse(s: &str) -> Option<DocType> {
        Some(match s {
            "passport" => DocType::Passport,
            "id_card" => DocType::IdCard,
            "utility_bill" => DocType::UtilityBill,
            "income_statement" => DocType::IncomeStatement,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogDocument {
    pub doc_type: DocType,
    pub claims: BTreeMap<String, String>,
    pub authentic: bool,
    pub validity_end: Tick,
}

impl AnalogDocument {
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Enc::new();
        e.put_str("sim.doc.v1");
        e.field("type").put_str(self.doc_type.as_str());
        e.field("claims").put_count(self.claims.len());
        for (k, v) in &self.claims {
            e.put_str(k);
            e.put_str(v);
        }
        e.field("authentic").put_bool(self.authentic);
        e.field("validity_end").put_u64(self.validity_end);
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Dec::new(bytes);
        d.field("sim.doc.v1")?;
        d.field("type")?;
        let doc_type = DocType::parse(d.str()?)
            .ok_or_else(|| DecodeError::Invalid("unknown doc type".into()))?;
        d.field("claims")?;
        let n = d.count()?;
        let mut claims = BTreeMap::new();
        for _ in 0..n {
            let k = d.str()?.to_string();
            claims.insert(k, d.str()?.to_string());
        }
        d.field("authentic")?;
        let authentic = d.bool()?;
        d.field("validity_end")?;
        let validity_end = d.u64()?;
        d.finish()?;
        Ok(AnalogDocument {
            doc_type,
            claims,
            authentic,
            validity_end,
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DocumentError {
    #[error("document check failed for {}", .0.as_str())]
    DocumentCheckFailed(DocType),
    #[error("document expired: {}", .0.as_str())]
    ExpiredDocument(DocType),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifiedDocuments {
    pub attributes: BTreeMap<String, String>,
    /// Audit notes for claims overridden by a later document.
    pub conflicts: Vec<String>,
}

/// All documents must be authentic and unexpired; claims merge in order
/// with later documents overriding earlier ones (logged).
pub fn verify_documents(
    documents: &[AnalogDocument],
    now: Tick,
) -> Result<VerifiedDocuments, DocumentError> {
    for doc in documents {
        if !doc.authentic {
            return Err(DocumentError::DocumentCheckFailed(doc.doc_type));
        }
        if doc.validity_end <= now {
            return Err(DocumentError::ExpiredDocument(doc.doc_type));
        }
    }
    let mut out = VerifiedDocuments::default();
    for doc in documents {
        for (k, v) in &doc.claims {
            if let Some(old) = out.attributes.get(k) {
                if old != v {
                    out.conflicts.push(format!(
                        "{k}: `{old}` overridden by {} value `{v}`",
                        doc.doc_type.as_str()
                    ));
                }
            }
            out.attributes.insert(k.clone(), v.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn passport() -> AnalogDocument {
        AnalogDocument {
            doc_type: DocType::Passport,
            claims: [
                ("name".to_string(), "Frida Hollis".to_string()),
                ("dob".to_string(), "1990-02-14".to_string()),
                ("address".to_string(), "7 Elm Court".to_string()),
            ]
            .into(),
            authentic: true,
            validity_end: 1000,
        }
    }

    #[test]
    fn single_authentic_document_yields_claims() {
        let out = verify_documents(&[passport()], 5).unwrap();
        assert_eq!(out.attributes["name"], "Frida Hollis");
        assert!(out.conflicts.is_empty());
    }

    #[test]
    fn inauthentic_document_fails() {
        let mut doc = passport();
        doc.authentic = false;
        assert_eq!(
            verify_documents(&[doc], 5).unwrap_err(),
            DocumentError::DocumentCheckFailed(DocType::Passport)
        );
    }

    #[test]
    fn expired_companion_document_fails_the_set() {
        let bill = AnalogDocument {
            doc_type: DocType::UtilityBill,
            claims: [("address".to_string(), "9 Oak Row".to_string())].into(),
            authentic: true,
            validity_end: 3,
        };
        assert_eq!(
            verify_documents(&[passport(), bill], 5).unwrap_err(),
            DocumentError::ExpiredDocument(DocType::UtilityBill)
        );
    }

    #[test]
    fn conflicting_claims_last_wins_with_audit() {
        let bill = AnalogDocument {
            doc_type: DocType::UtilityBill,
            claims: [("address".to_string(), "9 Oak Row".to_string())].into(),
            authentic: true,
            validity_end: 1000,
        };
        let out = verify_documents(&[passport(), bill.clone()], 5).unwrap();
        assert_eq!(out.attributes["address"], "9 Oak Row");
        assert_eq!(out.conflicts.len(), 1);

        // merge oracle: fold claims in order by hand
        let mut oracle = BTreeMap::new();
        for doc in [&passport(), &bill] {
            for (k, v) in &doc.claims {
                oracle.insert(k.clone(), v.clone());
            }
        }
        assert_eq!(out.attributes, oracle);

        // identical values do not log a conflict
        let out2 = verify_documents(&[passport(), passport()], 5).unwrap();
        assert!(out2.conflicts.is_empty());
    }

    #[test]
    fn codec_round_trip() {
        let doc = passport();
        assert_eq!(AnalogDocument::decode(&doc.encode()).unwrap(), doc);
    }
}
