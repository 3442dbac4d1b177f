//! Bank-side actor state: wallet, issuance machinery, verifier state,
//! case book, record store, screening lists, and the frozen-but-overridable
//! policy configuration.

use super::case::KycCase;
use super::monitor::MonitoringConfig;
use super::records::BankStore;
use super::risk::RiskConfig;
use super::screening::ScreeningList;
use crate::anoncred::issue::IssuerState;
use crate::anoncred::objects::{CredentialDefinition, Schema};
use crate::anoncred::verify::VerifierState;
use crate::clock::Tick;
use crate::connect::did::Did;
use crate::connect::wallet::Wallet;
use crate::crypto::{GroupProfile, KeyPair};
use crate::kyc::documents::{AnalogDocument, DocType};
use crate::kyc::risk::CustomerProfile;
use rand::RngCore;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BankConfig {
    pub schema_name: String,
    pub schema_version: String,
    /// Schema attributes double as the bank's required KYC attributes.
    pub schema_attributes: Vec<String>,
    /// Explicit allow-list of accepted credential definition ids.
    pub accepted_cred_defs: Vec<String>,
    pub risk: RiskConfig,
    pub monitoring: MonitoringConfig,
    pub retention_ticks: Tick,
    pub reproof_interval: Tick,
    pub edd_timeout: Tick,
    pub credential_validity: Tick,
    pub registry_capacity: u32,
    /// Fast onboarding falls through to new-to-KYC when no credential matches.
    pub fallback_to_new_to_kyc: bool,
    pub require_non_revocation: bool,
    pub freshness_window: Tick,
    /// Attribute requested during enhanced due diligence.
    pub edd_attribute: String,
}

impl Default for BankConfig {
    fn default() -> Self {
        BankConfig {
            schema_name: "kyc".into(),
            schema_version: "1.0".into(),
            schema_attributes: vec![
                "name".into(),
                "dob".into(),
                "address".into(),
                "id_number".into(),
            ],
            accepted_cred_defs: Vec::new(),
            risk: RiskConfig::default(),
            monitoring: MonitoringConfig::default(),
            // five years at one tick per day, 360-day years
            retention_ticks: 5 * 360,
            reproof_interval: 360,
            edd_timeout: 30,
            credential_validity: 720,
            registry_capacity: 64,
            fallback_to_new_to_kyc: true,
            require_non_revocation: true,
            freshness_window: 30,
            edd_attribute: "salary".into(),
        }
    }
}

#[derive(Debug)]
pub struct Bank {
    pub label: String,
    pub ledger_id: String,
    pub wallet: Wallet,
    pub config: BankConfig,
    pub public_did: Option<Did>,
    pub schema: Option<Schema>,
    pub cred_def: Option<CredentialDefinition>,
    pub issuer: Option<IssuerState>,
    pub verifier: VerifierState,
    pub store: BankStore,
    pub cases: BTreeMap<String, KycCase>,
    pub screening_lists: Vec<ScreeningList>,
    next_case: u64,
}

impl Bank {
    pub fn new<R: RngCore>(
        label: &str,
        ledger_id: &str,
        profile: GroupProfile,
        config: BankConfig,
        rng: &mut R,
    ) -> Bank {
        Bank {
            label: label.to_string(),
            ledger_id: ledger_id.to_string(),
            wallet: Wallet::new(label, profile, rng),
            config,
            public_did: None,
            schema: None,
            cred_def: None,
            issuer: None,
            verifier: VerifierState::new(),
            store: BankStore::new(),
            cases: BTreeMap::new(),
            screening_lists: Vec::new(),
            next_case: 0,
        }
    }

    pub fn new_case_id(&mut self) -> String {
        let id = format!("{}-{}", self.label, self.next_case);
        self.next_case += 1;
        id
    }

    pub fn signing_key(&self) -> KeyPair {
        let did = self.public_did.as_ref().expect("bank bootstrapped");
        let (_, key_id) = self
            .wallet
            .public_dids
            .iter()
            .find(|(d, _)| d == did)
            .expect("wallet controls the bank did");
        self.wallet.key(key_id).expect("key present").clone()
    }

    /// The newest case for a customer, however it ended.
    pub fn case_for(&self, customer: &str) -> Option<&KycCase> {
        self.cases.values().rev().find(|c| c.customer == customer)
    }

    pub fn case_id_for(&self, customer: &str) -> Option<String> {
        self.case_for(customer).map(|c| c.case_id.clone())
    }
}

/// Customer-side actor: a person with (maybe) a wallet, a stack of analog
/// documents, and a risk profile the bank learns out of band.
#[derive(Debug)]
pub struct Customer {
    pub label: String,
    pub wallet: Option<Wallet>,
    pub documents: Vec<AnalogDocument>,
    pub edd_documents: Vec<AnalogDocument>,
    pub profile: CustomerProfile,
}

impl Customer {
    pub fn new(label: &str, profile: CustomerProfile) -> Customer {
        Customer {
            label: label.to_string(),
            wallet: None,
            documents: Vec::new(),
            edd_documents: Vec::new(),
            profile,
        }
    }

    pub fn wallet_mut(&mut self) -> &mut Wallet {
        self.wallet.as_mut().expect("customer has a wallet")
    }

    /// Documents whose claims cover any of the wanted attributes.
    pub fn documents_covering(&self, wanted: &[String]) -> Vec<AnalogDocument> {
        self.documents
            .iter()
            .filter(|d| d.claims.keys().any(|k| wanted.contains(k)))
            .cloned()
            .collect()
    }

    pub fn income_documents(&self) -> Vec<AnalogDocument> {
        self.edd_documents
            .iter()
            .filter(|d| d.doc_type == DocType::IncomeStatement)
            .cloned()
            .collect()
    }
}
