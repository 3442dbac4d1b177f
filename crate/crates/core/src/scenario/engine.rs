//! Scenario execution: one seeded generator, one logical clock, serial
//! steps. Produces a trace, a machine-readable summary, and a pass/fail
//! verdict over every step expectation plus the end-of-run audits (chain
//! integrity, replica consistency, PII byte-scan).

use super::file::{Action, BankDecl, ScenarioFile, StepDecl};
use crate::clock::{Clock, Tick};
use crate::connect::backup::{export_wallet, import_wallet};
use crate::connect::did::KeyAttestation;
use crate::connect::mailbox::MailboxHub;
use crate::crypto::{sign, GroupProfile};
use crate::kyc::bank::{Bank, BankConfig, Customer};
use crate::kyc::case::CaseState;
use crate::kyc::documents::AnalogDocument;
use crate::kyc::flows::{
    bootstrap_bank, process_timeouts, provide_edd, record_transaction, run_completely_new_onboarding,
    run_fast_onboarding, run_monitoring, run_new_to_kyc, EddFulfillment, FlowCtx,
};
use crate::kyc::monitor::{Direction, TransactionRecord};
use crate::kyc::risk::CustomerProfile;
use crate::kyc::screening::{normalize_name, parse_lists, ListKind, ScreeningEntry, ScreeningList};
use crate::ledger::{Ledger, LedgerHub};
use crate::trace::Trace;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub profile: String,
    pub final_tick: Tick,
    pub cases: Vec<CaseSummary>,
    pub ledgers: Vec<LedgerSummary>,
    pub pii_audit: PiiAudit,
    pub expectations_checked: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct CaseSummary {
    pub bank: String,
    pub case_id: String,
    pub customer: String,
    pub state: String,
    pub reject_reason: Option<String>,
    pub risk_score: Option<u32>,
    pub risk_level: Option<String>,
    pub documents_requested: Vec<String>,
    pub analog_documents_received: u32,
    pub alerts: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct LedgerSummary {
    pub id: String,
    pub height: u64,
    pub appends: u64,
    pub reads: u64,
    pub chain_valid: bool,
    pub replicas_consistent: bool,
}

#[derive(Debug, Serialize)]
pub struct PiiAudit {
    pub terms_scanned: usize,
    /// (term index, ledger id) — term values are never echoed.
    pub hits: Vec<(usize, String)>,
}

pub struct RunReport {
    pub summary: Summary,
    pub trace_text: String,
    pub ok: bool,
}

pub struct Engine {
    pub profile: GroupProfile,
    pub clock: Clock,
    pub rng: ChaCha20Rng,
    pub hub: LedgerHub,
    pub mail: MailboxHub,
    pub banks: BTreeMap<String, Bank>,
    pub customers: BTreeMap<String, Customer>,
    pub trace: Trace,
    pub backups: BTreeMap<String, Vec<u8>>,
    route_via_mailbox: bool,
    pii_terms: Vec<String>,
    screening_lists: Vec<ScreeningList>,
    accepted_issuers_decl: BTreeMap<String, Vec<String>>,
    trusted_attesters_decl: BTreeMap<String, Vec<String>>,
    expectations_checked: usize,
    failures: Vec<String>,
}

fn doc_from_decl(decl: &super::file::DocumentDecl) -> AnalogDocument {
    AnalogDocument {
        doc_type: decl.doc_type,
        claims: decl.claims.clone(),
        authentic: decl.authentic,
        validity_end: decl.validity_end,
    }
}

fn apply_config_file(config: &mut BankConfig, file: &super::file::BankConfigFile) {
    if !file.accepted_cred_defs.is_empty() {
        config.accepted_cred_defs = file.accepted_cred_defs.clone();
    }
    if let Some(v) = &file.schema_name {
        config.schema_name = v.clone();
    }
    if let Some(v) = &file.schema_version {
        config.schema_version = v.clone();
    }
    if let Some(v) = &file.schema_attributes {
        config.schema_attributes = v.clone();
    }
    if let Some(v) = file.retention_ticks {
        config.retention_ticks = v;
    }
    if let Some(v) = file.reproof_interval {
        config.reproof_interval = v;
    }
    if let Some(v) = file.edd_timeout {
        config.edd_timeout = v;
    }
    if let Some(v) = file.credential_validity {
        config.credential_validity = v;
    }
    if let Some(v) = file.freshness_window {
        config.freshness_window = v;
    }
    if let Some(v) = file.registry_capacity {
        config.registry_capacity = v;
    }
    if let Some(v) = file.fallback_to_new_to_kyc {
        config.fallback_to_new_to_kyc = v;
    }
    if let Some(v) = file.require_non_revocation {
        config.require_non_revocation = v;
    }
    if let Some(risk) = &file.risk {
        if let Some(v) = risk.volume_threshold {
            config.risk.volume_threshold = v;
        }
        if let Some(v) = risk.standard_min {
            config.risk.standard_min = v;
        }
        if let Some(v) = risk.high_min {
            config.risk.high_min = v;
        }
        config
            .risk
            .high_risk_countries
            .extend(risk.high_risk_countries.iter().cloned());
    }
    if let Some(mon) = &file.monitoring {
        if let Some(v) = mon.reporting_threshold {
            config.monitoring.reporting_threshold = v;
        }
        if let Some(v) = mon.volume_window {
            config.monitoring.volume_window = v;
        }
        if let Some(v) = mon.volume_multiplier {
            config.monitoring.volume_multiplier = v;
        }
        if let Some(v) = mon.structuring_count {
            config.monitoring.structuring_count = v;
        }
        if let Some(v) = mon.structuring_window {
            config.monitoring.structuring_window = v;
        }
    }
}

fn apply_decl(config: &mut BankConfig, decl: &BankDecl) {
    if let Some(v) = &decl.schema_name {
        config.schema_name = v.clone();
    }
    if let Some(v) = &decl.schema_version {
        config.schema_version = v.clone();
    }
    if let Some(v) = &decl.schema_attributes {
        config.schema_attributes = v.clone();
    }
    if let Some(v) = decl.retention_ticks {
        config.retention_ticks = v;
    }
    if let Some(v) = decl.reproof_interval {
        config.reproof_interval = v;
    }
    if let Some(v) = decl.edd_timeout {
        config.edd_timeout = v;
    }
    if let Some(v) = decl.credential_validity {
        config.credential_validity = v;
    }
    if let Some(v) = decl.freshness_window {
        config.freshness_window = v;
    }
    if let Some(v) = decl.registry_capacity {
        config.registry_capacity = v;
    }
    if let Some(v) = decl.fallback_to_new_to_kyc {
        config.fallback_to_new_to_kyc = v;
    }
    if let Some(v) = decl.require_non_revocation {
        config.require_non_revocation = v;
    }
    if let Some(risk) = &decl.risk {
        if let Some(v) = risk.volume_threshold {
            config.risk.volume_threshold = v;
        }
        if let Some(v) = risk.standard_min {
            config.risk.standard_min = v;
        }
        if let Some(v) = risk.high_min {
            config.risk.high_min = v;
        }
        config
            .risk
            .high_risk_countries
            .extend(risk.high_risk_countries.iter().cloned());
    }
    if let Some(mon) = &decl.monitoring {
        if let Some(v) = mon.reporting_threshold {
            config.monitoring.reporting_threshold = v;
        }
        if let Some(v) = mon.volume_window {
            config.monitoring.volume_window = v;
        }
        if let Some(v) = mon.volume_multiplier {
            config.monitoring.volume_multiplier = v;
        }
        if let Some(v) = mon.structuring_count {
            config.monitoring.structuring_count = v;
        }
        if let Some(v) = mon.structuring_window {
            config.monitoring.structuring_window = v;
        }
    }
}

impl Engine {
    /// Build from a parsed scenario. `base_dir` resolves the screening
    /// list file; `seed_override` replaces the scenario's seed.
    pub fn new(
        scenario: &ScenarioFile,
        base_dir: Option<&std::path::Path>,
        seed_override: Option<u64>,
    ) -> Result<Engine, super::file::ScenarioError> {
        let seed = seed_override.unwrap_or(scenario.seed);
        let profile = if scenario.profile == "DEFAULT" {
            GroupProfile::Default
        } else {
            GroupProfile::Test
        };
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut hub = LedgerHub::new();
        for l in &scenario.ledgers {
            hub.add_ledger(Ledger::new(&l.id, l.replicas));
        }

        let mut screening_lists: Vec<ScreeningList> = Vec::new();
        if let Some(decl) = &scenario.screening {
            if let Some(file) = &decl.file {
                let path = match base_dir {
                    Some(dir) => dir.join(file),
                    None => std::path::PathBuf::from(file),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    super::file::ScenarioError::Invalid(format!(
                        "screening list {}: {e}",
                        path.display()
                    ))
                })?;
                screening_lists = parse_lists(&text)
                    .map_err(|e| super::file::ScenarioError::Invalid(e.to_string()))?;
            }
            for entry in &decl.entries {
                let kind = ListKind::parse(&entry.kind).expect("validated");
                let item = ScreeningEntry {
                    name: normalize_name(&entry.name),
                    dob: entry.dob.clone(),
                };
                match screening_lists.iter_mut().find(|l| l.kind == kind) {
                    Some(l) => l.entries.push(item),
                    None => screening_lists.push(ScreeningList {
                        kind,
                        entries: vec![item],
                    }),
                }
            }
        }

        let mut banks = BTreeMap::new();
        let mut accepted_issuers_decl = BTreeMap::new();
        for decl in &scenario.banks {
            let mut config = BankConfig::default();
            if let Some(file) = &decl.config_file {
                let path = match base_dir {
                    Some(dir) => dir.join(file),
                    None => std::path::PathBuf::from(file),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    super::file::ScenarioError::Invalid(format!(
                        "bank config {}: {e}",
                        path.display()
                    ))
                })?;
                apply_config_file(&mut config, &super::file::BankConfigFile::parse(&text)?);
            }
            apply_decl(&mut config, decl);
            let mut bank = Bank::new(&decl.name, &decl.ledger, profile, config, &mut rng);
            bank.screening_lists = screening_lists.clone();
            accepted_issuers_decl.insert(decl.name.clone(), decl.accepted_issuers.clone());
            banks.insert(decl.name.clone(), bank);
        }

        let mut customers = BTreeMap::new();
        let mut trusted_attesters_decl = BTreeMap::new();
        let mut pii_terms = Vec::new();
        for decl in &scenario.customers {
            let mut customer = Customer::new(
                &decl.name,
                CustomerProfile {
                    country: decl.country.clone(),
                    expected_monthly_volume: decl.expected_monthly_volume,
                },
            );
            customer.documents = decl.documents.iter().map(doc_from_decl).collect();
            customer.edd_documents = decl.edd_documents.iter().map(doc_from_decl).collect();
            for doc in customer.documents.iter().chain(&customer.edd_documents) {
                for value in doc.claims.values() {
                    if !pii_terms.contains(value) {
                        pii_terms.push(value.clone());
                    }
                }
            }
            trusted_attesters_decl.insert(decl.name.clone(), decl.trusted_attesters.clone());
            customers.insert(decl.name.clone(), customer);
        }

        Ok(Engine {
            profile,
            clock: Clock::new(),
            rng,
            hub,
            mail: MailboxHub::new(),
            banks,
            customers,
            trace: Trace::new(),
            backups: BTreeMap::new(),
            route_via_mailbox: scenario.route_via_mailbox,
            pii_terms,
            screening_lists,
            accepted_issuers_decl,
            trusted_attesters_decl,
            expectations_checked: 0,
            failures: Vec::new(),
        })
    }

    fn fail(&mut self, step_index: usize, message: String) {
        self.failures.push(format!("step {step_index}: {message}"));
    }

    /// Resolve accepted-issuer labels into credential definition ids for
    /// every bank whose issuers have bootstrapped.
    fn resolve_accepted_issuers(&mut self) {
        let resolved: BTreeMap<String, Option<String>> = self
            .banks
            .iter()
            .map(|(label, bank)| {
                (
                    label.clone(),
                    bank.cred_def.as_ref().map(|cd| cd.cred_def_id.clone()),
                )
            })
            .collect();
        for (bank_label, issuers) in &self.accepted_issuers_decl {
            if issuers.is_empty() {
                continue;
            }
            let ids: Vec<String> = issuers
                .iter()
                .filter_map(|label| resolved.get(label).cloned().flatten())
                .collect();
            if let Some(bank) = self.banks.get_mut(bank_label) {
                if !ids.is_empty() {
                    bank.config.accepted_cred_defs = ids;
                }
            }
        }
    }

    /// Customers trust attesters by label; wallets need the DIDs.
    fn sync_trusted_attesters(&mut self, customer_label: &str) {
        let Some(labels) = self.trusted_attesters_decl.get(customer_label) else {
            return;
        };
        let dids: Vec<_> = labels
            .iter()
            .filter_map(|l| self.banks.get(l).and_then(|b| b.public_did.clone()))
            .collect();
        if let Some(wallet) = self
            .customers
            .get_mut(customer_label)
            .and_then(|c| c.wallet.as_mut())
        {
            wallet.trusted_attesters = dids;
        }
    }

    fn check_expectations(
        &mut self,
        step_index: usize,
        step: &StepDecl,
        appends_during: u64,
        step_alerts: &[String],
        step_error: Option<String>,
    ) {
        let Some(expect) = &step.expect else {
            if let Some(err) = step_error {
                self.fail(step_index, format!("unexpected error: {err}"));
            }
            return;
        };
        let expect = expect.clone();
        let mut check = |ok: bool, message: String| {
            self.expectations_checked += 1;
            if !ok {
                self.failures.push(format!("step {step_index}: {message}"));
            }
        };
        match (&expect.error, &step_error) {
            (Some(want), Some(got)) => check(
                got.contains(want.as_str()),
                format!("expected error `{want}`, got `{got}`"),
            ),
            (Some(want), None) => check(false, format!("expected error `{want}`, step succeeded")),
            (None, Some(got)) => check(false, format!("unexpected error: {got}")),
            (None, None) => {}
        }
        let case = step
            .bank
            .as_ref()
            .zip(step.customer.as_ref())
            .and_then(|(b, c)| {
                self.banks
                    .get(b)
                    .and_then(|bank| bank.case_for(c).cloned())
            });
        if let Some(want) = &expect.state {
            match &case {
                Some(case) => check(
                    case.state.as_str() == want,
                    format!("expected state {want}, got {}", case.state.as_str()),
                ),
                None => check(false, format!("expected state {want}, no case found")),
            }
        }
        if let Some(want) = &expect.reason {
            let got = case
                .as_ref()
                .and_then(|c| c.reject_reason)
                .map(|r| r.as_str().to_string());
            check(
                got.as_deref() == Some(want.as_str()),
                format!("expected reject reason {want}, got {got:?}"),
            );
        }
        if let Some(want) = expect.appends {
            check(
                appends_during == want,
                format!("expected {want} appends, got {appends_during}"),
            );
        }
        if let Some(want) = expect.documents {
            let got = case.as_ref().map(|c| c.documents_requested.len());
            check(
                got == Some(want),
                format!("expected {want} requested documents, got {got:?}"),
            );
        }
        if let Some(want) = expect.credentials {
            let got = step.customer.as_ref().and_then(|c| {
                self.customers
                    .get(c)
                    .map(|c| c.wallet.as_ref().map_or(0, |w| w.credentials.len()))
            });
            check(
                got == Some(want),
                format!("expected {want} credentials in the wallet, got {got:?}"),
            );
        }
        for alert in &expect.alerts {
            check(
                step_alerts.iter().any(|a| a == alert),
                format!("expected alert {alert}, got {step_alerts:?}"),
            );
        }
    }

    fn case_id(&self, bank: &str, customer: &str) -> Option<String> {
        self.banks.get(bank).and_then(|b| b.case_id_for(customer))
    }

    fn exec_step(&mut self, step: &StepDecl) -> (Vec<String>, Option<String>) {
        let mut alerts = Vec::new();
        let mut error = None;
        let now = self.clock.now();

        macro_rules! ctx {
            () => {
                FlowCtx {
                    hub: &mut self.hub,
                    mail: &mut self.mail,
                    rng: &mut self.rng,
                    trace: &mut self.trace,
                    now,
                    route_via_mailbox: self.route_via_mailbox,
                }
            };
        }

        match step.action {
            Action::AdvanceClock => {
                self.clock.advance(step.ticks.unwrap_or(1));
                self.trace.emit(
                    self.clock.now(),
                    "harness",
                    "clock.advanced",
                    &[("now", self.clock.now().to_string())],
                );
            }
            Action::Bootstrap => {
                let label = step.bank.clone().expect("validated");
                let mut bank = self.banks.remove(&label).expect("validated");
                let result = bootstrap_bank(&mut bank, &mut ctx!());
                self.banks.insert(label, bank);
                if let Err(e) = result {
                    error = Some(e.to_string());
                }
                self.resolve_accepted_issuers();
            }
            Action::OnboardNew | Action::OnboardFast | Action::OnboardNewToKyc => {
                let bank_label = step.bank.clone().expect("validated");
                let customer_label = step.customer.clone().expect("validated");
                // a wallet may exist already; keep its trust anchors fresh
                self.sync_trusted_attesters(&customer_label);
                let mut bank = self.banks.remove(&bank_label).expect("validated");
                let mut customer = self.customers.remove(&customer_label).expect("validated");
                let had_wallet = customer.wallet.is_some();
                let result = match step.action {
                    Action::OnboardNew => {
                        run_completely_new_onboarding(&mut bank, &mut customer, &mut ctx!())
                    }
                    Action::OnboardFast => {
                        run_fast_onboarding(&mut bank, &mut customer, step.as_of, &mut ctx!())
                    }
                    _ => run_new_to_kyc(&mut bank, &mut customer, &mut ctx!()),
                };
                if let Err(e) = &result {
                    error = Some(e.to_string());
                }
                self.banks.insert(bank_label, bank);
                self.customers.insert(customer_label.clone(), customer);
                if !had_wallet {
                    self.sync_trusted_attesters(&customer_label);
                }
            }
            Action::Revoke => {
                let bank_label = step.bank.clone().expect("validated");
                let customer_label = step.customer.clone().expect("validated");
                let bank = self.banks.get(&bank_label).expect("validated");
                // the index defaults to the one issued to this customer
                let index = step.index.or_else(|| {
                    let customer = self.customers.get(&customer_label)?;
                    let wallet = customer.wallet.as_ref()?;
                    let cred_def_id = bank.cred_def.as_ref()?.cred_def_id.clone();
                    wallet
                        .credentials
                        .iter()
                        .find(|h| h.credential.cred_def_id == cred_def_id)
                        .and_then(|h| h.credential.revocation.as_ref())
                        .map(|r| r.index)
                });
                match index {
                    Some(index) => {
                        let issuer = bank.issuer.as_ref().expect("bootstrapped").clone();
                        let did = bank.public_did.clone().expect("bootstrapped");
                        let wallet_snapshot = bank.wallet.clone();
                        let ledger_id = bank.ledger_id.clone();
                        let ledger = self.hub.ledger_mut(&ledger_id).expect("ledger exists");
                        match crate::anoncred::issue::revoke(
                            &issuer,
                            &wallet_snapshot,
                            &did,
                            ledger,
                            index,
                            now,
                        ) {
                            Ok(version) => {
                                self.trace.emit(
                                    now,
                                    &bank_label,
                                    "cred.revoked",
                                    &[
                                        ("index", index.to_string()),
                                        ("version", version.to_string()),
                                    ],
                                );
                            }
                            Err(e) => error = Some(e.to_string()),
                        }
                    }
                    None => error = Some("no issued credential to revoke".into()),
                }
            }
            Action::Transact => {
                let bank_label = step.bank.clone().expect("validated");
                let customer_label = step.customer.clone().expect("validated");
                match self.case_id(&bank_label, &customer_label) {
                    Some(case_id) => {
                        let mut bank = self.banks.remove(&bank_label).expect("validated");
                        let tx = TransactionRecord {
                            tick: now,
                            amount: step.amount.expect("validated"),
                            counterparty: step
                                .counterparty
                                .clone()
                                .unwrap_or_else(|| "counterparty".into()),
                            direction: step.direction.unwrap_or(Direction::In),
                        };
                        if let Err(e) = record_transaction(&mut bank, &case_id, tx, &mut ctx!()) {
                            error = Some(e.to_string());
                        }
                        self.banks.insert(bank_label, bank);
                    }
                    None => error = Some("no case for customer".into()),
                }
            }
            Action::Monitor | Action::Reproof => {
                let bank_label = step.bank.clone().expect("validated");
                let customer_label = step.customer.clone().expect("validated");
                match self.case_id(&bank_label, &customer_label) {
                    Some(case_id) => {
                        let mut bank = self.banks.remove(&bank_label).expect("validated");
                        let mut customer =
                            self.customers.remove(&customer_label).expect("validated");
                        let force = step.action == Action::Reproof;
                        match run_monitoring(&mut bank, &mut customer, &case_id, force, &mut ctx!())
                        {
                            Ok(new_alerts) => {
                                alerts =
                                    new_alerts.iter().map(|a| a.code().to_string()).collect();
                            }
                            Err(e) => error = Some(e.to_string()),
                        }
                        self.banks.insert(bank_label, bank);
                        self.customers.insert(customer_label, customer);
                    }
                    None => error = Some("no case for customer".into()),
                }
            }
            Action::ProvideEdd => {
                let bank_label = step.bank.clone().expect("validated");
                let customer_label = step.customer.clone().expect("validated");
                let fulfillment = match step.kind.as_deref() {
                    Some("credential") => EddFulfillment::IncomeCredential,
                    Some("nothing") => EddFulfillment::Nothing,
                    _ => EddFulfillment::IncomeDocument,
                };
                match self.case_id(&bank_label, &customer_label) {
                    Some(case_id) => {
                        let mut bank = self.banks.remove(&bank_label).expect("validated");
                        let mut customer =
                            self.customers.remove(&customer_label).expect("validated");
                        if let Err(e) =
                            provide_edd(&mut bank, &mut customer, &case_id, fulfillment, &mut ctx!())
                        {
                            error = Some(e.to_string());
                        }
                        self.banks.insert(bank_label, bank);
                        self.customers.insert(customer_label, customer);
                    }
                    None => error = Some("no case for customer".into()),
                }
            }
            Action::ProcessTimeouts => {
                let bank_label = step.bank.clone().expect("validated");
                let mut bank = self.banks.remove(&bank_label).expect("validated");
                if let Err(e) = process_timeouts(&mut bank, &mut ctx!()) {
                    error = Some(e.to_string());
                }
                self.banks.insert(bank_label, bank);
            }
            Action::Purge => {
                let bank_label = step.bank.clone().expect("validated");
                let customer_label = step.customer.clone().expect("validated");
                match self.case_id(&bank_label, &customer_label) {
                    Some(case_id) => {
                        let bank = self.banks.get_mut(&bank_label).expect("validated");
                        match bank.store.purge(&case_id, now) {
                            Ok(()) => self.trace.emit(
                                now,
                                &bank_label,
                                "record.purged",
                                &[("case", case_id)],
                            ),
                            Err(e) => error = Some(e.to_string()),
                        }
                    }
                    None => error = Some("no case for customer".into()),
                }
            }
            Action::ExportWallet => {
                let customer_label = step.customer.clone().expect("validated");
                let passphrase = step.passphrase.clone().expect("validated");
                let customer = self.customers.get(&customer_label).expect("validated");
                match &customer.wallet {
                    Some(wallet) => {
                        let bytes = export_wallet(wallet, &passphrase, &mut self.rng);
                        self.trace.emit(
                            now,
                            &customer_label,
                            "wallet.exported",
                            &[("bytes", bytes.len().to_string())],
                        );
                        self.backups.insert(customer_label, bytes);
                    }
                    None => error = Some("customer has no wallet".into()),
                }
            }
            Action::DestroyWallet => {
                let customer_label = step.customer.clone().expect("validated");
                let customer = self.customers.get_mut(&customer_label).expect("validated");
                customer.wallet = None;
                self.trace
                    .emit(now, &customer_label, "wallet.destroyed", &[]);
            }
            Action::ImportWallet => {
                let customer_label = step.customer.clone().expect("validated");
                let passphrase = step.passphrase.clone().expect("validated");
                match self.backups.get(&customer_label) {
                    Some(bytes) => match import_wallet(bytes, &passphrase) {
                        Ok(wallet) => {
                            self.trace.emit(
                                now,
                                &customer_label,
                                "wallet.imported",
                                &[("owner", wallet.owner.clone())],
                            );
                            self.customers
                                .get_mut(&customer_label)
                                .expect("validated")
                                .wallet = Some(wallet);
                            self.sync_trusted_attesters(&customer_label);
                        }
                        Err(e) => error = Some(e.to_string()),
                    },
                    None => error = Some("no backup for customer".into()),
                }
            }
            Action::Attest => {
                let attester_label = step.attester.clone().expect("validated");
                let subject_label = step.subject.clone().expect("validated");
                error = self.attest(&attester_label, &subject_label, now).err();
            }
        }
        (alerts, error)
    }

    /// The attester signs the subject bank's registered key; the subject
    /// re-registers its DID document carrying the attestation.
    fn attest(&mut self, attester_label: &str, subject_label: &str, now: Tick) -> Result<(), String> {
        let attester = self.banks.get(attester_label).ok_or("unknown attester")?;
        let attester_did = attester
            .public_did
            .clone()
            .ok_or("attester not bootstrapped")?;
        let attester_key = attester.signing_key();
        let group = attester.wallet.group();

        let subject = self.banks.get(subject_label).ok_or("unknown subject")?;
        let subject_did = subject
            .public_did
            .clone()
            .ok_or("subject not bootstrapped")?;
        let ledger = self
            .hub
            .ledger(&subject.ledger_id)
            .ok_or("subject ledger missing")?;
        let mut doc = ledger
            .did_document(&subject_did)
            .ok_or("subject document missing")?
            .clone();
        let key = doc
            .verification_keys
            .first()
            .ok_or("subject has no keys")?
            .clone();
        let message =
            crate::connect::did::attestation_message(&subject_did, &key.key_id, &key.public_key);
        doc.attestations.push(KeyAttestation {
            key_id: key.key_id.clone(),
            attester: attester_did.clone(),
            signature: sign(group, &attester_key.sk, &message),
        });
        let subject = self.banks.get(subject_label).expect("checked");
        let ledger_id = subject.ledger_id.clone();
        let ledger = self.hub.ledger_mut(&ledger_id).expect("checked");
        subject
            .wallet
            .republish_document(ledger, &doc, now)
            .map_err(|e| e.to_string())?;
        self.trace.emit(
            now,
            attester_label,
            "key.attested",
            &[("subject", subject_label.to_string())],
        );
        Ok(())
    }

    pub fn run(&mut self, scenario: &ScenarioFile) -> RunReport {
        for (i, step) in scenario.steps.iter().enumerate() {
            let appends_before = self.hub.total_appends();
            let (alerts, error) = self.exec_step(step);
            let appends_during = self.hub.total_appends() - appends_before;
            self.check_expectations(i, step, appends_during, &alerts, error);
        }

        // end-of-run audits
        let mut ledgers = Vec::new();
        for ledger in self.hub.ledgers() {
            let chain_valid = ledger.verify_chain();
            let replicas_consistent = ledger.replicas_consistent();
            if !chain_valid {
                self.failures
                    .push(format!("audit: chain {} does not verify", ledger.ledger_id));
            }
            if !replicas_consistent {
                self.failures
                    .push(format!("audit: replicas of {} diverge", ledger.ledger_id));
            }
            ledgers.push(LedgerSummary {
                id: ledger.ledger_id.clone(),
                height: ledger.height(),
                appends: ledger.append_count(),
                reads: ledger.read_count(),
                chain_valid,
                replicas_consistent,
            });
        }
        let mut pii_hits = Vec::new();
        for (i, term) in self.pii_terms.iter().enumerate() {
            for ledger_id in self.hub.scan_for_bytes(term.as_bytes()) {
                pii_hits.push((i, ledger_id.to_string()));
            }
        }
        if !pii_hits.is_empty() {
            self.failures
                .push(format!("audit: {} PII term(s) found on-chain", pii_hits.len()));
        }

        let mut cases = Vec::new();
        for (label, bank) in &self.banks {
            for case in bank.cases.values() {
                cases.push(CaseSummary {
                    bank: label.clone(),
                    case_id: case.case_id.clone(),
                    customer: case.customer.clone(),
                    state: case.state.as_str().to_string(),
                    reject_reason: case.reject_reason.map(|r| r.as_str().to_string()),
                    risk_score: case.risk.as_ref().map(|r| r.score),
                    risk_level: case.risk.as_ref().map(|r| r.level.as_str().to_string()),
                    documents_requested: case.documents_requested.clone(),
                    analog_documents_received: case.analog_documents_received,
                    alerts: case.alerts.iter().map(|a| a.code().to_string()).collect(),
                });
            }
        }

        let summary = Summary {
            seed: 0, // filled by the caller (it knows about overrides)
            profile: self.profile.name().to_string(),
            final_tick: self.clock.now(),
            cases,
            ledgers,
            pii_audit: PiiAudit {
                terms_scanned: self.pii_terms.len(),
                hits: pii_hits,
            },
            expectations_checked: self.expectations_checked,
            failures: self.failures.clone(),
        };
        RunReport {
            ok: summary.failures.is_empty(),
            trace_text: self.trace.render(),
            summary,
        }
    }

    pub fn screening_lists(&self) -> &[ScreeningList] {
        &self.screening_lists
    }

    pub fn pii_terms(&self) -> &[String] {
        &self.pii_terms
    }

    /// Every case in this engine, keyed by bank.
    pub fn case_state(&self, bank: &str, customer: &str) -> Option<CaseState> {
        self.banks
            .get(bank)
            .and_then(|b| b.case_for(customer))
            .map(|c| c.state)
    }
}

/// Parse, build, and run a scenario in one call.
pub fn run_scenario_text(
    text: &str,
    base_dir: Option<&std::path::Path>,
    seed_override: Option<u64>,
) -> Result<RunReport, super::file::ScenarioError> {
    let scenario = ScenarioFile::parse(text)?;
    let mut engine = Engine::new(&scenario, base_dir, seed_override)?;
    let mut report = engine.run(&scenario);
    report.summary.seed = seed_override.unwrap_or(scenario.seed);
    Ok(report)
}
