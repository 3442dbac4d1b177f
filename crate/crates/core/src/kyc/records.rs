//! Retention-bound record keeping. A record is written for every case
//! that reached a final decision after identification; purging before the
//! retention deadline is refused, purging after it is audited.

use super::case::{CaseEvent, KycCase};
use crate::clock::Tick;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CustomerRecord {
    pub case_id: String,
    pub customer: String,
    pub attributes: BTreeMap<String, String>,
    pub vp_bytes: Vec<Vec<u8>>,
    pub audit: Vec<CaseEvent>,
    pub retention_until: Tick,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecordError {
    #[error("retention period runs until tick {retention_until}")]
    RetentionViolation { retention_until: Tick },
    #[error("no record for case `{0}`")]
    UnknownRecord(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BankStore {
    records: BTreeMap<String, CustomerRecord>,
    pub deletions: Vec<CaseEvent>,
}

impl BankStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn keep_record(&mut self, case: &KycCase, retention_ticks: Tick, now: Tick) -> &CustomerRecord {
        let record = CustomerRecord {
            case_id: case.case_id.clone(),
            customer: case.customer.clone(),
            attributes: case.attributes.clone(),
            vp_bytes: case.vp_bytes.clone(),
            audit: case.audit.clone(),
            retention_until: now + retention_ticks,
        };
        self.records.insert(case.case_id.clone(), record);
        &self.records[&case.case_id]
    }

    pub fn record(&self, case_id: &str) -> Option<&CustomerRecord> {
        self.records.get(case_id)
    }

    pub fn purge(&mut self, case_id: &str, now: Tick) -> Result<(), RecordError> {
        let record = self
            .records
            .get(case_id)
            .ok_or_else(|| RecordError::UnknownRecord(case_id.to_string()))?;
        if now < record.retention_until {
            return Err(RecordError::RetentionViolation {
                retention_until: record.retention_until,
            });
        }
        self.records.remove(case_id);
        self.deletions.push(CaseEvent {
            tick: now,
            code: "record.purged".into(),
            detail: case_id.to_string(),
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_case() -> KycCase {
        let mut case = KycCase::new("bankA-0".into(), "cust1", 0);
        case.attributes.insert("name".into(), "Frida".into());
        case.vp_bytes.push(vec![1, 2, 3]);
        case
    }

    #[test]
    fn purge_before_retention_fails() {
        let mut store = BankStore::new();
        let case = sample_case();
        store.keep_record(&case, 1800, 10);
        assert_eq!(
            store.purge("bankA-0", 1809).unwrap_err(),
            RecordError::RetentionViolation {
                retention_until: 1810
            }
        );
        assert!(store.record("bankA-0").is_some());
    }

    #[test]
    fn purge_at_deadline_succeeds_and_is_audited() {
        let mut store = BankStore::new();
        let case = sample_case();
        store.keep_record(&case, 1800, 10);
        store.purge("bankA-0", 1810).unwrap();
        assert!(store.record("bankA-0").is_none());
        assert_eq!(store.deletions.len(), 1);
        assert_eq!(store.deletions[0].tick, 1810);
    }

    #[test]
    fn record_stores_vp_bytes_verbatim() {
        let mut store = BankStore::new();
        let case = sample_case();
        let record = store.keep_record(&case, 1800, 10);
        assert_eq!(record.vp_bytes, vec![vec![1, 2, 3]]);
    }

    #[test]
    fn unknown_record_is_an_error() {
        let mut store = BankStore::new();
        assert_eq!(
            store.purge("nope", 0).unwrap_err(),
            RecordError::UnknownRecord("nope".into())
        );
    }
}
