//! Scenario files: TOML documents declaring ledgers, banks, customers,
//! screening lists, and an ordered list of steps with expectations.
//! Parsing is strict (unknown keys are errors) so fixtures stay honest.

use crate::clock::Tick;
use crate::kyc::documents::DocType;
use crate::kyc::monitor::Direction;
use serde::Deserialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default)]
    pub route_via_mailbox: bool,
    #[serde(default)]
    pub ledgers: Vec<LedgerDecl>,
    #[serde(default)]
    pub banks: Vec<BankDecl>,
    #[serde(default)]
    pub customers: Vec<CustomerDecl>,
    #[serde(default)]
    pub screening: Option<ScreeningDecl>,
    #[serde(default)]
    pub steps: Vec<StepDecl>,
}

fn default_profile() -> String {
    "TEST".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerDecl {
    pub id: String,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
}

fn default_replicas() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankDecl {
    pub name: String,
    pub ledger: String,
    /// Standalone bank policy file (TOML, relative to the scenario);
    /// inline fields below override it.
    #[serde(default)]
    pub config_file: Option<String>,
    #[serde(default)]
    pub schema_name: Option<String>,
    #[serde(default)]
    pub schema_version: Option<String>,
    #[serde(default)]
    pub schema_attributes: Option<Vec<String>>,
    /// Labels of actors whose credential definitions this bank accepts.
    #[serde(default)]
    pub accepted_issuers: Vec<String>,
    #[serde(default)]
    pub retention_ticks: Option<Tick>,
    #[serde(default)]
    pub reproof_interval: Option<Tick>,
    #[serde(default)]
    pub edd_timeout: Option<Tick>,
    #[serde(default)]
    pub credential_validity: Option<Tick>,
    #[serde(default)]
    pub freshness_window: Option<Tick>,
    #[serde(default)]
    pub registry_capacity: Option<u32>,
    #[serde(default)]
    pub fallback_to_new_to_kyc: Option<bool>,
    #[serde(default)]
    pub require_non_revocation: Option<bool>,
    #[serde(default)]
    pub risk: Option<RiskDecl>,
    #[serde(default)]
    pub monitoring: Option<MonitoringDecl>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskDecl {
    #[serde(default)]
    pub volume_threshold: Option<u64>,
    #[serde(default)]
    pub high_risk_countries: Vec<String>,
    #[serde(default)]
    pub standard_min: Option<u32>,
    #[serde(default)]
    pub high_min: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitoringDecl {
    #[serde(default)]
    pub reporting_threshold: Option<u64>,
    #[serde(default)]
    pub volume_window: Option<Tick>,
    #[serde(default)]
    pub volume_multiplier: Option<u64>,
    #[serde(default)]
    pub structuring_count: Option<usize>,
    #[serde(default)]
    pub structuring_window: Option<Tick>,
}

/// A bank's policy in a file of its own: the accepted credential
/// definitions, risk table overrides, retention and re-proof knobs.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankConfigFile {
    /// Raw credential definition ids this bank accepts.
    #[serde(default)]
    pub accepted_cred_defs: Vec<String>,
    #[serde(default)]
    pub schema_name: Option<String>,
    #[serde(default)]
    pub schema_version: Option<String>,
    #[serde(default)]
    pub schema_attributes: Option<Vec<String>>,
    #[serde(default)]
    pub retention_ticks: Option<Tick>,
    #[serde(default)]
    pub reproof_interval: Option<Tick>,
    #[serde(default)]
    pub edd_timeout: Option<Tick>,
    #[serde(default)]
    pub credential_validity: Option<Tick>,
    #[serde(default)]
    pub freshness_window: Option<Tick>,
    #[serde(default)]
    pub registry_capacity: Option<u32>,
    #[serde(default)]
    pub fallback_to_new_to_kyc: Option<bool>,
    #[serde(default)]
    pub require_non_revocation: Option<bool>,
    #[serde(default)]
    pub risk: Option<RiskDecl>,
    #[serde(default)]
    pub monitoring: Option<MonitoringDecl>,
}

impl BankConfigFile {
    pub fn parse(text: &str) -> Result<BankConfigFile, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomerDecl {
    pub name: String,
    #[serde(default)]
    pub country: Option<String>,
    #[serde(default)]
    pub expected_monthly_volume: u64,
    #[serde(default)]
    pub trusted_attesters: Vec<String>,
    #[serde(default)]
    pub documents: Vec<DocumentDecl>,
    #[serde(default)]
    pub edd_documents: Vec<DocumentDecl>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentDecl {
    pub doc_type: DocType,
    #[serde(default = "default_true")]
    pub authentic: bool,
    #[serde(default = "default_validity")]
    pub validity_end: Tick,
    pub claims: BTreeMap<String, String>,
}

fn default_true() -> bool {
    true
}

fn default_validity() -> Tick {
    1_000_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreeningDecl {
    /// Tab-separated list file, relative to the scenario file.
    #[serde(default)]
    pub file: Option<String>,
    #[serde(default)]
    pub entries: Vec<ScreeningEntryDecl>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreeningEntryDecl {
    pub kind: String,
    pub name: String,
    #[serde(default)]
    pub dob: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDecl {
    pub action: Action,
    #[serde(default)]
    pub bank: Option<String>,
    #[serde(default)]
    pub customer: Option<String>,
    /// Non-revocation as-of tick (fast onboarding / reproof).
    #[serde(default)]
    pub as_of: Option<Tick>,
    #[serde(default)]
    pub ticks: Option<Tick>,
    #[serde(default)]
    pub index: Option<u32>,
    #[serde(default)]
    pub amount: Option<u64>,
    #[serde(default)]
    pub direction: Option<Direction>,
    #[serde(default)]
    pub counterparty: Option<String>,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub passphrase: Option<String>,
    #[serde(default)]
    pub attester: Option<String>,
    #[serde(default)]
    pub subject: Option<String>,
    #[serde(default)]
    pub expect: Option<Expectation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Bootstrap,
    OnboardNew,
    OnboardFast,
    OnboardNewToKyc,
    Revoke,
    Transact,
    AdvanceClock,
    Monitor,
    Reproof,
    ProvideEdd,
    ProcessTimeouts,
    Purge,
    ExportWallet,
    DestroyWallet,
    ImportWallet,
    Attest,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default)]
    pub state: Option<String>,
    #[serde(default)]
    pub reason: Option<String>,
    /// Ledger appends during this step.
    #[serde(default)]
    pub appends: Option<u64>,
    /// Attribute names requested as analog documents.
    #[serde(default)]
    pub documents: Option<usize>,
    /// Customer wallet credential count after the step.
    #[serde(default)]
    pub credentials: Option<usize>,
    /// Alert codes this step must raise.
    #[serde(default)]
    pub alerts: Vec<String>,
    /// Error code the step must fail with.
    #[serde(default)]
    pub error: Option<String>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<ScenarioFile, ScenarioError> {
        let scenario: ScenarioFile =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.profile != "TEST" && self.profile != "DEFAULT" {
            return bad(format!("unknown profile `{}`", self.profile));
        }
        let ledger_ids: Vec<&str> = self.ledgers.iter().map(|l| l.id.as_str()).collect();
        let bank_names: Vec<&str> = self.banks.iter().map(|b| b.name.as_str()).collect();
        let customer_names: Vec<&str> = self.customers.iter().map(|c| c.name.as_str()).collect();
        for bank in &self.banks {
            if !ledger_ids.contains(&bank.ledger.as_str()) {
                return bad(format!(
                    "bank `{}` references undeclared ledger `{}`",
                    bank.name, bank.ledger
                ));
            }
            for issuer in &bank.accepted_issuers {
                if !bank_names.contains(&issuer.as_str()) {
                    return bad(format!(
                        "bank `{}` accepts undeclared issuer `{issuer}`",
                        bank.name
                    ));
                }
            }
        }
        for customer in &self.customers {
            for attester in &customer.trusted_attesters {
                if !bank_names.contains(&attester.as_str()) {
                    return bad(format!(
                        "customer `{}` trusts undeclared attester `{attester}`",
                        customer.name
                    ));
                }
            }
        }
        if let Some(screening) = &self.screening {
            for entry in &screening.entries {
                if crate::kyc::screening::ListKind::parse(&entry.kind).is_none() {
                    return bad(format!("unknown screening list kind `{}`", entry.kind));
                }
            }
        }
        for (i, step) in self.steps.iter().enumerate() {
            let need_bank = |field: &Option<String>| -> Result<(), ScenarioError> {
                match field {
                    Some(b) if bank_names.contains(&b.as_str()) => Ok(()),
                    Some(b) => Err(ScenarioError::Invalid(format!(
                        "step {i}: undeclared bank `{b}`"
                    ))),
                    None => Err(ScenarioError::Invalid(format!(
                        "step {i}: missing bank"
                    ))),
                }
            };
            let need_customer = |field: &Option<String>| -> Result<(), ScenarioError> {
                match field {
                    Some(c) if customer_names.contains(&c.as_str()) => Ok(()),
                    Some(c) => Err(ScenarioError::Invalid(format!(
                        "step {i}: undeclared customer `{c}`"
                    ))),
                    None => Err(ScenarioError::Invalid(format!(
                        "step {i}: missing customer"
                    ))),
                }
            };
            match step.action {
                Action::Bootstrap | Action::ProcessTimeouts => need_bank(&step.bank)?,
                Action::OnboardNew
                | Action::OnboardFast
                | Action::OnboardNewToKyc
                | Action::Revoke
                | Action::Monitor
                | Action::Reproof
                | Action::ProvideEdd
                | Action::Purge => {
                    need_bank(&step.bank)?;
                    need_customer(&step.customer)?;
                }
                Action::Transact => {
                    need_bank(&step.bank)?;
                    need_customer(&step.customer)?;
                    if step.amount.is_none() {
                        return bad(format!("step {i}: transact needs an amount"));
                    }
                }
                Action::AdvanceClock => {
                    if step.ticks.is_none() {
                        return bad(format!("step {i}: advance_clock needs ticks"));
                    }
                }
                Action::ExportWallet | Action::ImportWallet => {
                    need_customer(&step.customer)?;
                    if step.passphrase.is_none() {
                        return bad(format!("step {i}: wallet step needs a passphrase"));
                    }
                }
                Action::DestroyWallet => need_customer(&step.customer)?,
                Action::Attest => {
                    for role in [&step.attester, &step.subject] {
                        match role {
                            Some(b) if bank_names.contains(&b.as_str()) => {}
                            _ => return bad(format!("step {i}: attest needs attester and subject")),
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
[[ledgers]]
id = "L1"

[[banks]]
name = "bankA"
ledger = "L1"

[[customers]]
name = "cust1"
[[customers.documents]]
doc_type = "passport"
[customers.documents.claims]
name = "Frida Hollis"

[[steps]]
action = "bootstrap"
bank = "bankA"

[[steps]]
action = "onboard_new"
bank = "bankA"
customer = "cust1"
[steps.expect]
state = "AccountOpened"
"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = ScenarioFile::parse(MINIMAL).unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.profile, "TEST");
        assert_eq!(s.steps.len(), 2);
        assert_eq!(s.steps[1].expect.as_ref().unwrap().state.as_deref(), Some("AccountOpened"));
    }

    #[test]
    fn undeclared_actor_rejected() {
        let text = MINIMAL.replace("customer = \"cust1\"", "customer = \"ghost\"");
        let err = ScenarioFile::parse(&text).unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid(_)), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}\nnot_a_key = 1\n");
        assert!(matches!(
            ScenarioFile::parse(&text).unwrap_err(),
            ScenarioError::Parse(_)
        ));
    }

    #[test]
    fn bad_profile_rejected() {
        let text = MINIMAL.replace("seed = 7", "seed = 7\nprofile = \"HUGE\"");
        assert!(matches!(
            ScenarioFile::parse(&text).unwrap_err(),
            ScenarioError::Invalid(_)
        ));
    }
}
