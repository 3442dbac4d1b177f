//! Acceptance suite: one test per criterion, each printing a PASS line
//! once its assertions (at the stated tolerances) hold. Run with
//! `cargo test -p sim-core --test acceptance -- --nocapture` to see them.

use num_bigint::BigUint;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sim_core::anoncred::issue::{
    accept_offer, create_offer, create_revocation_registry, issue, register_cred_def,
    register_schema, store_credential, IssuerState,
};
use sim_core::anoncred::present::{
    create_presentation, presentation_transcript, AttributeRestriction, PresentedCredential,
    ProofRequest, RequestedAttribute,
};
use sim_core::anoncred::verify::{verify_presentation, VerifierState};
use sim_core::connect::channel::{recv, send, ChannelError};
use sim_core::connect::did::Did;
use sim_core::connect::wallet::Wallet;
use sim_core::crypto::{pedersen_commit, prove_equal, GroupProfile, Transcript, SALT_LEN};
use sim_core::kyc::monitor::{scan_transactions, Direction, MonitoringConfig, TransactionRecord};
use sim_core::kyc::risk::{assess_risk, has_blocking_hit, CustomerProfile, RiskConfig, RiskLevel};
use sim_core::kyc::screening::{name_screen, parse_lists};
use sim_core::ledger::{Ledger, LedgerHub, TxKind};
use sim_core::scenario::{run_scenario_text, Engine, ScenarioFile};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .canonicalize()
        .unwrap()
}

fn read_scenario(name: &str) -> String {
    std::fs::read_to_string(scenario_dir().join(name)).unwrap()
}

fn pass(criterion: u32, name: &str) {
    println!("ACCEPTANCE {criterion:>2} PASS: {name}");
}

fn run_engine(name: &str) -> (Engine, sim_core::scenario::RunReport) {
    let text = read_scenario(name);
    let scenario = ScenarioFile::parse(&text).unwrap();
    let mut engine = Engine::new(&scenario, Some(&scenario_dir()), None).unwrap();
    let report = engine.run(&scenario);
    (engine, report)
}

#[test]
fn criterion_01_completely_new_onboarding() {
    let started = Instant::now();
    let (engine, report) = run_engine("completely_new.scn");
    assert!(report.ok, "{:?}", report.summary.failures);
    let case = &report.summary.cases[0];
    assert_eq!(case.state, "AccountOpened");

    // the ledger holds exactly one DID document, one schema, one cred
    // def, one revocation registry creation — and nothing else
    let ledger = engine.hub.ledger("L1").unwrap();
    let mut kinds: BTreeMap<&str, u32> = BTreeMap::new();
    for block in ledger.blocks() {
        for tx in &block.txs {
            *kinds.entry(tx.kind.as_str()).or_default() += 1;
        }
    }
    assert!(kinds[TxKind::DidDocRegistration.as_str()] >= 1);
    assert_eq!(kinds[TxKind::SchemaRegistration.as_str()], 1);
    assert_eq!(kinds[TxKind::CredDefRegistration.as_str()], 1);
    assert_eq!(kinds[TxKind::RevRegCreation.as_str()], 1);
    assert!(!kinds.contains_key(TxKind::RevRegUpdate.as_str()));

    // PII byte-scan over all chains: zero customer attribute values
    assert!(report.summary.pii_audit.terms_scanned >= 4);
    assert!(report.summary.pii_audit.hits.is_empty());

    assert!(started.elapsed().as_secs_f64() < 5.0, "took {:?}", started.elapsed());
    pass(1, "completely new onboarding opens the account with a clean chain");
}

#[test]
fn criterion_02_fast_onboarding() {
    let started = Instant::now();
    let (_, report) = run_engine("fast_onboarding.scn");
    assert!(report.ok, "{:?}", report.summary.failures);
    // the scenario's own expectations pin 0 appends and 0 documents
    // during the fast flow; both cases ended open
    let fast_case = report
        .summary
        .cases
        .iter()
        .find(|c| c.bank == "bankB")
        .unwrap();
    assert_eq!(fast_case.state, "AccountOpened");
    assert_eq!(fast_case.analog_documents_received, 0);
    assert!(fast_case.documents_requested.is_empty());
    assert!(started.elapsed().as_secs_f64() < 5.0);
    pass(2, "credential from bank A verifies at bank B with zero writes and zero documents");
}

#[test]
fn criterion_03_new_to_kyc_requests_strictly_fewer_documents() {
    let (_, baseline) = run_engine("completely_new.scn");
    let baseline_docs = &baseline.summary.cases[0].documents_requested;
    assert_eq!(baseline_docs.len(), 4);

    let (_, report) = run_engine("new_to_kyc.scn");
    assert!(report.ok, "{:?}", report.summary.failures);
    let bank_case = report
        .summary
        .cases
        .iter()
        .find(|c| c.bank == "bankA")
        .unwrap();
    assert_eq!(bank_case.state, "AccountOpened");
    // set difference: everything requested on paper is a required
    // attribute that no credential covered
    let covered = ["name", "dob"];
    let expected: Vec<String> = baseline_docs
        .iter()
        .filter(|a| !covered.contains(&a.as_str()))
        .cloned()
        .collect();
    assert_eq!(bank_case.documents_requested, expected);
    assert!(bank_case.documents_requested.len() < baseline_docs.len());
    pass(3, "partial government credential shrinks the analog document set");
}

#[test]
fn criterion_04_revocation_semantics() {
    let (engine, report) = run_engine("revocation.scn");
    assert!(report.ok, "{:?}", report.summary.failures);
    let states: Vec<(&str, &str)> = report
        .summary
        .cases
        .iter()
        .filter(|c| c.bank == "bankB")
        .map(|c| (c.state.as_str(), c.reject_reason.as_deref().unwrap_or("-")))
        .collect();
    assert_eq!(states, vec![("Rejected", "Revoked"), ("AccountOpened", "-")]);

    // registry versions are monotone along the chain
    let ledger = engine.hub.ledger("L1").unwrap();
    let mut last_version = None;
    for block in ledger.blocks() {
        for tx in &block.txs {
            if tx.kind == TxKind::RevRegUpdate {
                let update = sim_core::ledger::RevRegUpdate::decode(&tx.payload).unwrap();
                if let Some(last) = last_version {
                    assert!(update.version > last);
                }
                last_version = Some(update.version);
            }
        }
    }
    assert_eq!(last_version, Some(1));
    pass(4, "non-revocation as of t+1 rejects, as of t-1 accepts, versions monotone");
}

struct DisclosureFixture {
    hub: LedgerHub,
    rng: ChaCha20Rng,
    issuer_wallet: Wallet,
    issuer_did: Did,
}

fn disclosure_fixture(seed: u64) -> DisclosureFixture {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut hub = LedgerHub::new();
    hub.add_ledger(Ledger::new("L1", 1));
    let mut issuer_wallet = Wallet::new("issuer", GroupProfile::Test, &mut rng);
    let issuer_did = issuer_wallet
        .create_public_did(hub.ledger_mut("L1").unwrap(), 0, &mut rng)
        .unwrap();
    DisclosureFixture {
        hub,
        rng,
        issuer_wallet,
        issuer_did,
    }
}

fn random_token(rng: &mut ChaCha20Rng, len: usize) -> String {
    (0..len)
        .map(|_| char::from(rng.sample(rand::distr::Alphanumeric)))
        .collect()
}

#[test]
fn criterion_05_selective_disclosure_over_randomized_credentials() {
    let mut fx = disclosure_fixture(500);
    for trial in 0..100u32 {
        // fresh schema with 3..=6 attributes and random values
        let n_attrs = 3 + (trial % 4) as usize;
        let attr_names: Vec<String> = (0..n_attrs).map(|i| format!("a{trial}x{i}")).collect();
        let values: BTreeMap<String, String> = attr_names
            .iter()
            .map(|name| (name.clone(), random_token(&mut fx.rng, 14)))
            .collect();
        let ledger = fx.hub.ledger_mut("L1").unwrap();
        let schema = register_schema(
            &fx.issuer_wallet,
            &fx.issuer_did,
            ledger,
            &format!("s{trial}"),
            "1.0",
            attr_names.clone(),
            0,
        )
        .unwrap();
        let cred_def =
            register_cred_def(&fx.issuer_wallet, &fx.issuer_did, ledger, &schema, None, 0).unwrap();
        let mut issuer = IssuerState::new(&cred_def, &schema, 0);

        let mut wallet = Wallet::new("holder", GroupProfile::Test, &mut fx.rng);
        let offer = create_offer(&mut issuer, &values, 1_000, &mut fx.rng).unwrap();
        let request = accept_offer(&mut wallet, &offer, &mut fx.rng);
        let key = fx.issuer_wallet.key("key-0").unwrap().clone();
        let bundle = issue(&mut issuer, &key, &fx.issuer_wallet, &request, &mut fx.rng).unwrap();
        store_credential(&mut wallet, &bundle, &fx.hub, 0).unwrap();

        // reveal k of n
        let k = 1 + (trial as usize % n_attrs.saturating_sub(1).max(1));
        let revealed: Vec<String> = attr_names.iter().take(k).cloned().collect();
        let hidden: Vec<String> = attr_names.iter().skip(k).cloned().collect();
        let proof_request = ProofRequest::new(
            revealed
                .iter()
                .map(|name| RequestedAttribute {
                    name: name.clone(),
                    restrictions: AttributeRestriction::default(),
                })
                .collect(),
            None,
            1,
            100,
            &mut fx.rng,
        );
        let vp = create_presentation(&mut wallet, &proof_request, &fx.hub, 1, &mut fx.rng).unwrap();
        let bytes = vp.encode();
        let contains = |needle: &[u8]| bytes.windows(needle.len()).any(|w| w == needle);
        for name in &hidden {
            assert!(!contains(values[name].as_bytes()), "trial {trial}: value leaked");
            assert!(
                !contains(&wallet.credentials[0].salts[name]),
                "trial {trial}: salt leaked"
            );
        }
        for name in &revealed {
            assert!(contains(values[name].as_bytes()));
        }
        let mut verifier = VerifierState::new();
        let result = verify_presentation(
            &mut verifier,
            &vp,
            &proof_request,
            &fx.hub,
            GroupProfile::Test.params(),
            1,
        );
        assert!(result.accepted, "trial {trial}: {:?}", result.reasons);
    }
    pass(5, "100 randomized VPs never leak an unrevealed value or salt and all verify");
}

/// Issue a KYC-style credential into the wallet using the fixture issuer.
fn issue_into(
    fx: &mut DisclosureFixture,
    issuer: &mut IssuerState,
    wallet: &mut Wallet,
    values: &BTreeMap<String, String>,
) {
    let offer = create_offer(issuer, values, 10_000, &mut fx.rng).unwrap();
    let request = accept_offer(wallet, &offer, &mut fx.rng);
    let key = fx.issuer_wallet.key("key-0").unwrap().clone();
    let bundle = issue(issuer, &key, &fx.issuer_wallet, &request, &mut fx.rng).unwrap();
    store_credential(wallet, &bundle, &fx.hub, 0).unwrap();
}

#[test]
fn criterion_06_link_secret_binding() {
    // part 1: 100 randomized mixed-wallet splices are all rejected
    let mut fx = disclosure_fixture(600);
    let group = GroupProfile::Test.params();
    let attr_names = vec!["name".to_string(), "dob".to_string()];
    let ledger = fx.hub.ledger_mut("L1").unwrap();
    let schema = register_schema(
        &fx.issuer_wallet,
        &fx.issuer_did,
        ledger,
        "kyc",
        "1.0",
        attr_names.clone(),
        0,
    )
    .unwrap();
    let cred_def =
        register_cred_def(&fx.issuer_wallet, &fx.issuer_did, ledger, &schema, None, 0).unwrap();
    let mut issuer = IssuerState::new(&cred_def, &schema, 0);

    for trial in 0..100u32 {
        let values: BTreeMap<String, String> = attr_names
            .iter()
            .map(|n| (n.clone(), random_token(&mut fx.rng, 10)))
            .collect();
        let mut wallet_a = Wallet::new("a", GroupProfile::Test, &mut fx.rng);
        let mut wallet_b = loop {
            let w = Wallet::new("b", GroupProfile::Test, &mut fx.rng);
            if w.link_secret() != wallet_a.link_secret() {
                break w;
            }
        };
        issue_into(&mut fx, &mut issuer, &mut wallet_a, &values);
        issue_into(&mut fx, &mut issuer, &mut wallet_b, &values);

        let request = ProofRequest::new(
            vec![RequestedAttribute {
                name: "name".into(),
                restrictions: AttributeRestriction::default(),
            }],
            None,
            1,
            100,
            &mut fx.rng,
        );
        let vp_a = create_presentation(&mut wallet_a, &request, &fx.hub, 1, &mut fx.rng).unwrap();
        let held_b = &wallet_b.credentials[0];
        let mut spliced = vp_a;
        spliced.credentials.push(PresentedCredential {
            cred_def_id: held_b.credential.cred_def_id.clone(),
            schema_id: held_b.credential.schema_id.clone(),
            attribute_commitments: held_b.credential.attribute_commitments.clone(),
            link_secret_commitment: held_b.credential.link_secret_commitment.clone(),
            revocation: held_b.credential.revocation.clone(),
            expiration: held_b.credential.expiration,
            issuer_signature: held_b.credential.issuer_signature.clone(),
            revocation_version_claimed: None,
            revealed: vec![],
        });
        let transcript = presentation_transcript(&request.nonce, &spliced.credentials);
        spliced.opening_proof = sim_core::crypto::prove_opening(
            group,
            &spliced.credentials[0].link_secret_commitment,
            wallet_a.link_secret(),
            &wallet_a.credentials[0].link_blinding,
            &transcript,
            &mut fx.rng,
        );
        spliced.equality_proofs = vec![prove_equal(
            group,
            &spliced.credentials[0].link_secret_commitment,
            &spliced.credentials[1].link_secret_commitment,
            wallet_a.link_secret(),
            &wallet_a.credentials[0].link_blinding,
            &held_b.link_blinding,
            &transcript,
            &mut fx.rng,
        )];
        let mut verifier = VerifierState::new();
        let result = verify_presentation(&mut verifier, &spliced, &request, &fx.hub, group, 1);
        assert!(!result.accepted, "trial {trial} accepted a mixed-wallet VP");
    }

    // part 2: exhaustive equality-proof soundness over all q=11 witness
    // pairs with m1 != m2 — no honest-prover transcript verifies
    let mut rng = ChaCha20Rng::seed_from_u64(601);
    let mut transcript = Transcript::new("acceptance.soundness");
    transcript.absorb("nonce", b"fixed");
    let (r1, r2) = (BigUint::from(4u32), BigUint::from(9u32));
    for m1 in 0u32..11 {
        for m2 in 0u32..11 {
            if m1 == m2 {
                continue;
            }
            let (m1, m2) = (BigUint::from(m1), BigUint::from(m2));
            let c1 = pedersen_commit(group, &m1, &r1).unwrap();
            let c2 = pedersen_commit(group, &m2, &r2).unwrap();
            for witness in [&m1, &m2] {
                let proof = prove_equal(group, &c1, &c2, witness, &r1, &r2, &transcript, &mut rng);
                assert!(
                    !sim_core::crypto::verify_equal(group, &c1, &c2, &proof, &transcript),
                    "equality proof accepted for m1={m1}, m2={m2}"
                );
            }
        }
    }
    pass(6, "mixed-wallet VPs rejected 100/100; exhaustive q=11 equality soundness holds");
}

#[test]
fn criterion_07_tamper_atlas() {
    // DEFAULT profile so rejection is structural, not probabilistic
    let group = GroupProfile::Default.params();
    let mut rng = ChaCha20Rng::seed_from_u64(700);
    let mut hub = LedgerHub::new();
    hub.add_ledger(Ledger::new("L1", 1));
    let mut issuer_wallet = Wallet::new("issuer", GroupProfile::Default, &mut rng);
    let issuer_did = issuer_wallet
        .create_public_did(hub.ledger_mut("L1").unwrap(), 0, &mut rng)
        .unwrap();
    let ledger = hub.ledger_mut("L1").unwrap();
    let schema = register_schema(
        &issuer_wallet,
        &issuer_did,
        ledger,
        "kyc",
        "1.0",
        vec!["name".into(), "dob".into()],
        0,
    )
    .unwrap();
    let cred_def =
        register_cred_def(&issuer_wallet, &issuer_did, ledger, &schema, Some(8), 0).unwrap();
    create_revocation_registry(&issuer_wallet, &issuer_did, ledger, &cred_def, 8, 0).unwrap();
    let mut issuer = IssuerState::new(&cred_def, &schema, 8);

    let mut wallet = Wallet::new("holder", GroupProfile::Default, &mut rng);
    let values: BTreeMap<String, String> =
        [("name".to_string(), "Frida Hollis".to_string()),
         ("dob".to_string(), "1990-02-14".to_string())]
        .into();
    let offer = create_offer(&mut issuer, &values, 10_000, &mut rng).unwrap();
    let request = accept_offer(&mut wallet, &offer, &mut rng);
    let key = issuer_wallet.key("key-0").unwrap().clone();
    let bundle = issue(&mut issuer, &key, &issuer_wallet, &request, &mut rng).unwrap();
    store_credential(&mut wallet, &bundle, &hub, 0).unwrap();

    let proof_request = ProofRequest::new(
        vec![RequestedAttribute {
            name: "name".into(),
            restrictions: AttributeRestriction::default(),
        }],
        Some(sim_core::anoncred::present::NonRevocationRequirement { as_of: 1 }),
        1,
        100,
        &mut rng,
    );
    let vp = create_presentation(&mut wallet, &proof_request, &hub, 1, &mut rng).unwrap();

    // the untampered presentation verifies
    let fresh = |req: &ProofRequest, vp: &sim_core::anoncred::present::VerifiablePresentation| {
        let mut verifier = VerifierState::new();
        verify_presentation(&mut verifier, vp, req, &hub, group, 1)
    };
    assert!(fresh(&proof_request, &vp).accepted);

    let mutations: Vec<(&str, Box<dyn Fn(&mut sim_core::anoncred::present::VerifiablePresentation)>)> = vec![
        ("signature", Box::new(|vp| {
            vp.credentials[0].issuer_signature.s += BigUint::from(1u32);
        })),
        ("commitment", Box::new(|vp| {
            vp.credentials[0].attribute_commitments[1][0] ^= 1;
        })),
        ("revealed value", Box::new(|vp| {
            vp.credentials[0].revealed[0].value = "Mallory".into();
        })),
        ("salt", Box::new(|vp| {
            vp.credentials[0].revealed[0].salt[0] ^= 1;
        })),
        ("revocation version", Box::new(|vp| {
            vp.credentials[0].revocation_version_claimed =
                vp.credentials[0].revocation_version_claimed.map(|v| v + 1);
        })),
        ("expiration", Box::new(|vp| {
            vp.credentials[0].expiration += 1;
        })),
        ("link commitment", Box::new(|vp| {
            vp.credentials[0].link_secret_commitment.value += BigUint::from(1u32);
        })),
        ("opening proof response", Box::new(|vp| {
            vp.opening_proof.responses[0] += BigUint::from(1u32);
        })),
    ];
    assert!(mutations.len() >= 6);
    for (what, mutate) in mutations {
        let mut tampered = vp.clone();
        mutate(&mut tampered);
        let result = fresh(&proof_request, &tampered);
        assert!(!result.accepted, "mutating {what} still verified");
    }

    // chain tamper at any height flips verify_chain: flip one hex digit
    // of the stored block hash in the dump and reload
    let pristine = hub.ledger("L1").unwrap();
    let dump = pristine.dump();
    assert!(pristine.verify_chain());
    for height in 0..pristine.blocks().len() {
        let tampered: Vec<String> = dump
            .lines()
            .enumerate()
            .map(|(i, line)| {
                if i != height {
                    return line.to_string();
                }
                let mut cols: Vec<String> = line.split('\t').map(str::to_string).collect();
                let hash = &mut cols[3];
                let flipped = if hash.starts_with('0') { "1" } else { "0" };
                hash.replace_range(0..1, flipped);
                cols.join("\t")
            })
            .collect();
        let copy = Ledger::load("L1", &format!("{}\n", tampered.join("\n")), 1).unwrap();
        assert!(!copy.verify_chain(), "tamper at height {height} undetected");
    }
    pass(7, "every single-field mutation and every chain tamper flips to rejected");
}

#[test]
fn criterion_08_replay_rejected() {
    // VP replay under a new nonce (DEFAULT profile)
    let group = GroupProfile::Default.params();
    let mut rng = ChaCha20Rng::seed_from_u64(800);
    let mut hub = LedgerHub::new();
    hub.add_ledger(Ledger::new("L1", 1));
    let mut issuer_wallet = Wallet::new("issuer", GroupProfile::Default, &mut rng);
    let issuer_did = issuer_wallet
        .create_public_did(hub.ledger_mut("L1").unwrap(), 0, &mut rng)
        .unwrap();
    let ledger = hub.ledger_mut("L1").unwrap();
    let schema = register_schema(
        &issuer_wallet,
        &issuer_did,
        ledger,
        "kyc",
        "1.0",
        vec!["name".into()],
        0,
    )
    .unwrap();
    let cred_def =
        register_cred_def(&issuer_wallet, &issuer_did, ledger, &schema, None, 0).unwrap();
    let mut issuer = IssuerState::new(&cred_def, &schema, 0);
    let mut wallet = Wallet::new("holder", GroupProfile::Default, &mut rng);
    let values: BTreeMap<String, String> = [("name".to_string(), "Greta".to_string())].into();
    let offer = create_offer(&mut issuer, &values, 10_000, &mut rng).unwrap();
    let request = accept_offer(&mut wallet, &offer, &mut rng);
    let key = issuer_wallet.key("key-0").unwrap().clone();
    let bundle = issue(&mut issuer, &key, &issuer_wallet, &request, &mut rng).unwrap();
    store_credential(&mut wallet, &bundle, &hub, 0).unwrap();

    let make_request = |rng: &mut ChaCha20Rng| {
        ProofRequest::new(
            vec![RequestedAttribute {
                name: "name".into(),
                restrictions: AttributeRestriction::default(),
            }],
            None,
            1,
            100,
            rng,
        )
    };
    let request_a = make_request(&mut rng);
    let vp = create_presentation(&mut wallet, &request_a, &hub, 1, &mut rng).unwrap();
    let mut verifier = VerifierState::new();
    assert!(verify_presentation(&mut verifier, &vp, &request_a, &hub, group, 1).accepted);

    let request_b = make_request(&mut rng);
    let replay = verify_presentation(&mut verifier, &vp, &request_b, &hub, group, 1);
    assert!(!replay.accepted);
    assert!(replay.reasons.iter().any(|r| r.code() == "TranscriptMismatch"));

    // channel envelope re-delivery
    let mut inviter = Wallet::new("bank", GroupProfile::Default, &mut rng);
    let mut invitee = Wallet::new("cust", GroupProfile::Default, &mut rng);
    let invitation = inviter.create_invitation(None, &mut rng);
    let (their, _) =
        sim_core::connect::wallet::connect_pair(&mut inviter, &mut invitee, &invitation, &hub, &mut rng)
            .unwrap();
    let conn_out = inviter.connection_mut(&their).unwrap();
    let envelope = send(conn_out, b"payment instruction", &mut rng);
    let bank_peer = conn_out.my_peer_did.clone();
    let conn_in = invitee.connection_mut(&bank_peer).unwrap();
    assert_eq!(recv(conn_in, &envelope).unwrap(), b"payment instruction");
    assert!(matches!(
        recv(conn_in, &envelope).unwrap_err(),
        ChannelError::ReplayDetected { .. }
    ));
    pass(8, "VP replay under a new nonce and envelope re-delivery are both rejected");
}

#[test]
fn criterion_09_risk_and_monitoring_determinism() {
    // scoring table examples against an independent recomputation
    let mut cfg = RiskConfig::default();
    cfg.high_risk_countries.insert("XX".into());
    let lists = parse_lists("pep\tpolly exposed\t1970-01-01\nterrorism\tmara vex\t\n").unwrap();

    let pep_hits = name_screen("Polly Exposed", Some("1970-01-01"), &lists);
    let quiet = CustomerProfile {
        country: Some("DE".into()),
        expected_monthly_volume: 100,
    };
    let a = assess_risk(&pep_hits, &quiet, &cfg);
    assert_eq!((a.score, a.level), (30, RiskLevel::Standard));

    let risky = CustomerProfile {
        country: Some("XX".into()),
        expected_monthly_volume: 20_000,
    };
    let b = assess_risk(&pep_hits, &risky, &cfg);
    let oracle = 30 + 15 + 10;
    assert_eq!((b.score, b.level), (oracle, RiskLevel::High));

    let clean = assess_risk(&[], &quiet, &cfg);
    assert_eq!((clean.score, clean.level), (0, RiskLevel::Low));

    // structuring example against a brute-force sliding window
    let txs: Vec<TransactionRecord> = [(10u64, 9_500u64), (30, 9_500), (70, 9_500)]
        .into_iter()
        .map(|(tick, amount)| TransactionRecord {
            tick,
            amount,
            counterparty: "cashpoint".into(),
            direction: Direction::In,
        })
        .collect();
    let mcfg = MonitoringConfig::default();
    let alerts = scan_transactions(&txs, &mcfg, 1_000_000);
    let window_oracle = (0..=70u64).any(|start| {
        txs.iter()
            .filter(|t| {
                t.tick >= start
                    && t.tick < start + mcfg.structuring_window
                    && t.amount < mcfg.reporting_threshold
                    && t.amount * 10 >= mcfg.reporting_threshold * 9
            })
            .count()
            >= mcfg.structuring_count
    });
    assert!(window_oracle);
    assert!(alerts.iter().any(|a| a.code() == "Structuring"));

    // terrorism hit: scenario ends Rejected with no credential issued
    let (engine, report) = run_engine("screening_hit.scn");
    assert!(report.ok, "{:?}", report.summary.failures);
    let case = &report.summary.cases[0];
    assert_eq!(case.state, "Rejected");
    assert_eq!(case.reject_reason.as_deref(), Some("ScreeningHit"));
    let terror_hits = name_screen("Mara Vex", None, &lists);
    assert!(has_blocking_hit(&terror_hits));
    let cust = &engine.customers["cust1"];
    assert_eq!(cust.wallet.as_ref().unwrap().credentials.len(), 0);

    // the monitoring scenario reproduces structuring + failed re-proof
    let (_, monitoring) = run_engine("monitoring.scn");
    assert!(monitoring.ok, "{:?}", monitoring.summary.failures);
    pass(9, "risk table and structuring window match oracles; terror hit rejects without issuance");
}

#[test]
fn criterion_10_wallet_recovery_then_fast_onboarding() {
    let (engine, report) = run_engine("recovery.scn");
    assert!(report.ok, "{:?}", report.summary.failures);
    let fast_case = report
        .summary
        .cases
        .iter()
        .find(|c| c.bank == "bankB")
        .unwrap();
    assert_eq!(fast_case.state, "AccountOpened");
    // the restored wallet holds the original credential plus the new one
    let wallet = engine.customers["cust1"].wallet.as_ref().unwrap();
    assert_eq!(wallet.credentials.len(), 1);
    assert!(!engine.backups["cust1"].is_empty());
    pass(10, "export, destroy, import on a fresh agent, then fast onboarding succeeds");
}

#[test]
fn criterion_11_retention() {
    let (_, report) = run_engine("retention.scn");
    assert!(report.ok, "{:?}", report.summary.failures);
    pass(11, "purging before retention fails with RetentionViolation, at the deadline succeeds");
}

#[test]
fn criterion_12_global_determinism_within_time_budget() {
    let started = Instant::now();
    let mut files: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .filter_map(|e| {
            let path = e.unwrap().path();
            (path.extension().and_then(|x| x.to_str()) == Some("scn")).then_some(path)
        })
        .collect();
    files.sort();
    assert!(files.len() >= 9);
    for path in &files {
        let text = std::fs::read_to_string(path).unwrap();
        let a = run_scenario_text(&text, Some(&scenario_dir()), None).unwrap();
        let b = run_scenario_text(&text, Some(&scenario_dir()), None).unwrap();
        assert!(a.ok, "{}: {:?}", path.display(), a.summary.failures);
        assert_eq!(
            a.trace_text,
            b.trace_text,
            "{}: trace not reproducible",
            path.display()
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "suite took {elapsed:?}, budget is 60s"
    );
    pass(12, "every scenario byte-identical across runs; double-run suite finished in time");
}
