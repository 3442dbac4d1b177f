//! End-to-end checks of the `sim` binary: exit codes, state dumps, the
//! PII scan, and wallet backup round trips through real files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sim"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .canonicalize()
        .unwrap()
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn bundled_fast_onboarding_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(sim().args([
        "run",
        scenario("fast_onboarding.scn").to_str().unwrap(),
        "--state-dir",
        dir.path().to_str().unwrap(),
        "--summary",
        dir.path().join("summary.json").to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("AccountOpened"));
    assert!(dir.path().join("L1.chain").exists());
    assert!(dir.path().join("cust1.wallet").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn same_seed_twice_gives_byte_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let trace_a = dir.path().join("a.trace");
    let trace_b = dir.path().join("b.trace");
    for trace in [&trace_a, &trace_b] {
        run_ok(sim().args([
            "run",
            scenario("completely_new.scn").to_str().unwrap(),
            "--quiet",
            "--state-dir",
            dir.path().join("state").to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ]));
    }
    let a = std::fs::read(&trace_a).unwrap();
    let b = std::fs::read(&trace_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn failed_expectation_exits_one() {
    // the scenario revokes the credential, then expects fast onboarding
    // to still open the account
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("revocation.scn"))
        .unwrap()
        .replace("state = \"Rejected\"", "state = \"AccountOpened\"")
        .replace("reason = \"Revoked\"\n", "");
    let path = dir.path().join("broken.scn");
    std::fs::write(&path, text).unwrap();
    std::fs::create_dir_all(dir.path().join("lists")).unwrap();
    std::fs::copy(
        scenario("lists/watchlists.tsv"),
        dir.path().join("lists/watchlists.tsv"),
    )
    .unwrap();
    let out = sim()
        .args([
            "run",
            path.to_str().unwrap(),
            "--quiet",
            "--state-dir",
            dir.path().join("state").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("FAILED"), "{stderr}");
    assert!(stderr.contains("expected state AccountOpened"), "{stderr}");
}

#[test]
fn unparseable_scenario_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    std::fs::write(&path, "seed = \"not a number\"\n").unwrap();
    let out = sim().args(["run", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inspect_genesis_block() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(sim().args([
        "run",
        scenario("completely_new.scn").to_str().unwrap(),
        "--quiet",
        "--state-dir",
        dir.path().to_str().unwrap(),
    ]));
    let out = run_ok(sim().args([
        "ledger",
        "inspect",
        "--ledger",
        "L1",
        "--height",
        "0",
        "--state-dir",
        dir.path().to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains(&format!("prev_hash: {}", "00".repeat(32))));
}

#[test]
fn scan_pii_clean_after_full_scenario() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(sim().args([
        "run",
        scenario("completely_new.scn").to_str().unwrap(),
        "--quiet",
        "--state-dir",
        dir.path().to_str().unwrap(),
    ]));
    let terms = dir.path().join("terms.txt");
    std::fs::write(&terms, "Nora Feldt\n1991-03-07\n12 Birch Lane\nP-7742158\n").unwrap();
    run_ok(sim().args([
        "ledger",
        "scan-pii",
        "--terms-file",
        terms.to_str().unwrap(),
        "--state-dir",
        dir.path().to_str().unwrap(),
    ]));
}

#[test]
fn scan_pii_flags_corrupted_chain() {
    use rand::SeedableRng;
    use sim_core::anoncred::issue::register_schema;
    use sim_core::connect::wallet::Wallet;
    use sim_core::crypto::GroupProfile;
    use sim_core::ledger::Ledger;

    // a fixture whose on-chain schema smuggles a personal value as an
    // attribute name: structurally legal, caught by the byte scan
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
    let mut ledger = Ledger::new("L9", 1);
    let mut wallet = Wallet::new("careless", GroupProfile::Test, &mut rng);
    let did = wallet.create_public_did(&mut ledger, 0, &mut rng).unwrap();
    register_schema(
        &wallet,
        &did,
        &mut ledger,
        "leaky",
        "1.0",
        vec!["Alice".into()],
        0,
    )
    .unwrap();

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("L9.chain"), ledger.dump()).unwrap();
    let terms = dir.path().join("terms.txt");
    std::fs::write(&terms, "Alice\n").unwrap();
    let out = sim()
        .args([
            "ledger",
            "scan-pii",
            "--terms-file",
            terms.to_str().unwrap(),
            "--state-dir",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("HIT"));
}

#[test]
fn wallet_backup_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(sim().args([
        "run",
        scenario("completely_new.scn").to_str().unwrap(),
        "--quiet",
        "--state-dir",
        dir.path().to_str().unwrap(),
    ]));
    let wallet = dir.path().join("cust1.wallet");
    let backup = dir.path().join("cust1.backup");
    let restored = dir.path().join("restored.wallet");
    run_ok(sim().args([
        "wallet",
        "export",
        "--wallet",
        wallet.to_str().unwrap(),
        "--passphrase",
        "open sesame",
        "--out",
        backup.to_str().unwrap(),
    ]));
    let out = run_ok(sim().args([
        "wallet",
        "import",
        "--backup",
        backup.to_str().unwrap(),
        "--passphrase",
        "open sesame",
        "--out",
        restored.to_str().unwrap(),
    ]));
    assert!(String::from_utf8_lossy(&out.stdout).contains("1 credentials"));
    assert_eq!(
        std::fs::read(&wallet).unwrap(),
        std::fs::read(&restored).unwrap()
    );

    // wrong passphrase exits 1 and writes nothing
    let out = sim()
        .args([
            "wallet",
            "import",
            "--backup",
            backup.to_str().unwrap(),
            "--passphrase",
            "wrong",
            "--out",
            dir.path().join("nope.wallet").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("nope.wallet").exists());
}

#[test]
fn crypto_vectors_are_stable() {
    let out = run_ok(sim().args(["crypto", "vectors"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("group.p = 23"));
    assert!(text.contains("group.q = 11"));
    assert!(text.contains("hash = sha-256"));
    assert!(text.contains("pedersen.c = 1"));
    let again = run_ok(sim().args(["crypto", "vectors"]));
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn show_renders_a_presentation() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(sim().args([
        "run",
        scenario("fast_onboarding.scn").to_str().unwrap(),
        "--quiet",
        "--state-dir",
        dir.path().to_str().unwrap(),
    ]));
    let vp = dir.path().join("bankB-0.vp");
    assert!(vp.exists());
    let out = run_ok(sim().args(["anoncred", "show", vp.to_str().unwrap()]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("presentation"));
    assert!(text.contains("revealed    name = Milan Ortiz"));
}
