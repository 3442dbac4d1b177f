//! The KYC case state machine. Transitions outside the documented graph
//! are errors; every transition lands in the audit trail with its tick.

use super::monitor::{Alert, TransactionRecord};
use super::risk::RiskAssessment;
use crate::clock::Tick;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseState {
    Initiated,
    ConnectionEstablished,
    DocumentsRequested,
    IdentityVerified,
    ProofVerified,
    Screened,
    RiskAssessed,
    EddRequested,
    AccountOpened,
    Rejected,
    Monitoring,
}

impl CaseState {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseState::Initiated => "Initiated",
            CaseState::ConnectionEstablished => "ConnectionEstablished",
            CaseState::DocumentsRequested => "DocumentsRequested",
            CaseState::IdentityVerified => "IdentityVerified",
            CaseState::ProofVerified => "ProofVerified",
            CaseState::Screened => "Screened",
            CaseState::RiskAssessed => "RiskAssessed",
            CaseState::EddRequested => "EddRequested",
            CaseState::AccountOpened => "AccountOpened",
            CaseState::Rejected => "Rejected",
            CaseState::Monitoring => "Monitoring",
        }
    }
}

/// The documented state graph. Anything else is a bug in a flow.
pub fn transition_allowed(from: CaseState, to: CaseState) -> bool {
    use CaseState::*;
    matches!(
        (from, to),
        (Initiated, ConnectionEstablished)
            | (Initiated, Rejected)
            | (ConnectionEstablished, DocumentsRequested)
            | (ConnectionEstablished, ProofVerified)
            | (ConnectionEstablished, Rejected)
            | (ProofVerified, DocumentsRequested)
            | (ProofVerified, Screened)
            | (ProofVerified, Rejected)
            | (DocumentsRequested, IdentityVerified)
            | (DocumentsRequested, Rejected)
            | (IdentityVerified, Screened)
            | (IdentityVerified, Rejected)
            | (Screened, RiskAssessed)
            | (Screened, Rejected)
            | (RiskAssessed, EddRequested)
            | (RiskAssessed, AccountOpened)
            | (RiskAssessed, Rejected)
            | (EddRequested, AccountOpened)
            | (EddRequested, Rejected)
            | (AccountOpened, Monitoring)
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    DocumentCheckFailed,
    ExpiredDocument,
    ScreeningHit,
    ProofInvalid,
    Revoked,
    NoMatchingCredential,
    EddTimeout,
    ConnectionFailed,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::DocumentCheckFailed => "DocumentCheckFailed",
            RejectReason::ExpiredDocument => "ExpiredDocument",
            RejectReason::ScreeningHit => "ScreeningHit",
            RejectReason::ProofInvalid => "ProofInvalid",
            RejectReason::Revoked => "Revoked",
            RejectReason::NoMatchingCredential => "NoMatchingCredential",
            RejectReason::EddTimeout => "EddTimeout",
            RejectReason::ConnectionFailed => "ConnectionFailed",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("illegal case transition {from:?} -> {to:?}")]
pub struct IllegalTransition {
    pub from: CaseState,
    pub to: CaseState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseEvent {
    pub tick: Tick,
    pub code: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KycCase {
    pub case_id: String,
    pub customer: String,
    pub state: CaseState,
    pub reject_reason: Option<RejectReason>,
    pub attributes: BTreeMap<String, String>,
    pub audit: Vec<CaseEvent>,
    pub risk: Option<RiskAssessment>,
    /// Attribute names the bank asked for as analog documents.
    pub documents_requested: Vec<String>,
    pub analog_documents_received: u32,
    /// Received presentations, verbatim bytes.
    pub vp_bytes: Vec<Vec<u8>>,
    pub customer_peer_did: Option<String>,
    pub opened_at: Option<Tick>,
    pub edd_deadline: Option<Tick>,
    pub transactions: Vec<TransactionRecord>,
    pub alerts: Vec<Alert>,
    pub last_reproof: Option<Tick>,
    /// Earliest expiration among credentials seen in verified VPs.
    pub credential_expiration: Option<Tick>,
}

impl KycCase {
    pub fn new(case_id: String, customer: &str, tick: Tick) -> Self {
        let mut case = KycCase {
            case_id,
            customer: customer.to_string(),
            state: CaseState::Initiated,
            reject_reason: None,
            attributes: BTreeMap::new(),
            audit: Vec::new(),
            risk: None,
            documents_requested: Vec::new(),
            analog_documents_received: 0,
            vp_bytes: Vec::new(),
            customer_peer_did: None,
            opened_at: None,
            edd_deadline: None,
            transactions: Vec::new(),
            alerts: Vec::new(),
            last_reproof: None,
            credential_expiration: None,
        };
        case.note(tick, "case.opened", customer);
        case
    }

    pub fn note(&mut self, tick: Tick, code: &str, detail: &str) {
        self.audit.push(CaseEvent {
            tick,
            code: code.to_string(),
            detail: detail.to_string(),
        });
    }

    pub fn transition(&mut self, to: CaseState, tick: Tick) -> Result<(), IllegalTransition> {
        if !transition_allowed(self.state, to) {
            return Err(IllegalTransition {
                from: self.state,
                to,
            });
        }
        self.state = to;
        self.note(tick, "case.state", to.as_str());
        if to == CaseState::AccountOpened {
            self.opened_at = Some(tick);
        }
        Ok(())
    }

    pub fn reject(&mut self, reason: RejectReason, tick: Tick) -> Result<(), IllegalTransition> {
        self.transition(CaseState::Rejected, tick)?;
        self.reject_reason = Some(reason);
        self.note(tick, "case.rejected", reason.as_str());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn happy_paths_follow_the_graph() {
        use CaseState::*;
        let fast = [
            Initiated,
            ConnectionEstablished,
            ProofVerified,
            Screened,
            RiskAssessed,
            AccountOpened,
            Monitoring,
        ];
        let full = [
            Initiated,
            ConnectionEstablished,
            DocumentsRequested,
            IdentityVerified,
            Screened,
            RiskAssessed,
            EddRequested,
            AccountOpened,
        ];
        for path in [&fast[..], &full[..]] {
            for w in path.windows(2) {
                assert!(transition_allowed(w[0], w[1]), "{:?} -> {:?}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn account_cannot_open_without_screening_and_risk() {
        use CaseState::*;
        assert!(!transition_allowed(ConnectionEstablished, AccountOpened));
        assert!(!transition_allowed(ProofVerified, AccountOpened));
        assert!(!transition_allowed(IdentityVerified, AccountOpened));
        assert!(!transition_allowed(Screened, AccountOpened));
        assert!(!transition_allowed(Rejected, AccountOpened));
        assert!(!transition_allowed(Monitoring, AccountOpened));
    }

    #[test]
    fn transition_updates_audit_and_errors_on_illegal() {
        let mut case = KycCase::new("bankA-0".into(), "cust1", 0);
        case.transition(CaseState::ConnectionEstablished, 1).unwrap();
        let err = case.transition(CaseState::AccountOpened, 2).unwrap_err();
        assert_eq!(err.from, CaseState::ConnectionEstablished);
        assert_eq!(case.audit.len(), 2);
        case.reject(RejectReason::ScreeningHit, 3).unwrap();
        assert_eq!(case.state, CaseState::Rejected);
        assert_eq!(case.reject_reason, Some(RejectReason::ScreeningHit));
    }
}
