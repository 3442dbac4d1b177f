//! `sim` — operator surface for the eKYC simulator: run scenario files,
//! inspect and audit ledgers, exercise wallet backups, and emit crypto
//! test vectors.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use sim_core::connect::backup::{export_wallet, import_wallet};
use sim_core::connect::wallet::Wallet;
use sim_core::ledger::Ledger;
use sim_core::scenario::{ScenarioError, ScenarioFile};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod show;
mod vectors;

#[derive(Parser)]
#[command(name = "sim", version, about = "Deterministic SSI-based eKYC simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file; exit 0 on success, 1 on expectation failure,
    /// 2 on parse errors.
    Run {
        /// Scenario file (TOML).
        file: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the run trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the JSON summary to this file (also printed).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Directory for chain dumps, wallets, and presentations.
        #[arg(long, default_value = "state")]
        state_dir: PathBuf,
        /// Print only the verdict.
        #[arg(long)]
        quiet: bool,
    },
    /// Ledger inspection and audits over a state directory.
    Ledger {
        #[command(subcommand)]
        command: LedgerCommand,
    },
    /// Wallet backup and restore on exported wallet files.
    Wallet {
        #[command(subcommand)]
        command: WalletCommand,
    },
    /// Cryptographic test vectors.
    Crypto {
        #[command(subcommand)]
        command: CryptoCommand,
    },
    /// Pretty-printers for canonical object files.
    Anoncred {
        #[command(subcommand)]
        command: AnoncredCommand,
    },
}

#[derive(Subcommand)]
enum LedgerCommand {
    /// Print a chain (or one block) from a state directory.
    Inspect {
        #[arg(long)]
        ledger: String,
        #[arg(long)]
        height: Option<u64>,
        #[arg(long, default_value = "state")]
        state_dir: PathBuf,
    },
    /// Byte-scan every chain for the terms in a file; exit 1 on any hit.
    ScanPii {
        #[arg(long)]
        terms_file: PathBuf,
        #[arg(long, default_value = "state")]
        state_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum WalletCommand {
    /// Encrypt a wallet file into a passphrase-protected backup.
    Export {
        #[arg(long)]
        wallet: PathBuf,
        #[arg(long)]
        passphrase: String,
        #[arg(long)]
        out: PathBuf,
        /// Seed for backup salt/nonce generation (runs are reproducible).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decrypt a backup into a wallet file.
    Import {
        #[arg(long)]
        backup: PathBuf,
        #[arg(long)]
        passphrase: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CryptoCommand {
    /// Emit deterministic TEST-group vectors for cross-checking.
    Vectors,
}

#[derive(Subcommand)]
enum AnoncredCommand {
    /// Decode and pretty-print a canonical object file.
    Show { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            file,
            seed,
            trace,
            summary,
            state_dir,
            quiet,
        } => run_scenario(&file, seed, trace, summary, &state_dir, quiet),
        Command::Ledger { command } => match command {
            LedgerCommand::Inspect {
                ledger,
                height,
                state_dir,
            } => inspect(&ledger, height, &state_dir),
            LedgerCommand::ScanPii {
                terms_file,
                state_dir,
            } => scan_pii(&terms_file, &state_dir),
        },
        Command::Wallet { command } => match command {
            WalletCommand::Export {
                wallet,
                passphrase,
                out,
                seed,
            } => wallet_export(&wallet, &passphrase, &out, seed),
            WalletCommand::Import {
                backup,
                passphrase,
                out,
            } => wallet_import(&backup, &passphrase, &out),
        },
        Command::Crypto {
            command: CryptoCommand::Vectors,
        } => {
            print!("{}", vectors::render());
            Ok(ExitCode::SUCCESS)
        }
        Command::Anoncred {
            command: AnoncredCommand::Show { file },
        } => {
            let bytes =
                std::fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            match show::render(&bytes) {
                Some(text) => {
                    print!("{text}");
                    Ok(ExitCode::SUCCESS)
                }
                None => bail!("{} is not a recognized canonical object", file.display()),
            }
        }
    }
}

fn run_scenario(
    file: &Path,
    seed: Option<u64>,
    trace_out: Option<PathBuf>,
    summary_out: Option<PathBuf>,
    state_dir: &Path,
    quiet: bool,
) -> Result<ExitCode> {
    let text =
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let base_dir = file.parent().map(Path::to_path_buf);

    // parse separately so bad files exit 2 before any side effects
    let scenario = match ScenarioFile::parse(&text) {
        Ok(s) => s,
        Err(e @ (ScenarioError::Parse(_) | ScenarioError::Invalid(_))) => {
            eprintln!("scenario error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let mut engine = match sim_core::scenario::Engine::new(&scenario, base_dir.as_deref(), seed) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("scenario error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let mut report = engine.run(&scenario);
    report.summary.seed = seed.unwrap_or(scenario.seed);

    if let Some(path) = &trace_out {
        std::fs::write(path, &report.trace_text)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let summary_json = serde_json::to_string_pretty(&report.summary)?;
    if let Some(path) = &summary_out {
        std::fs::write(path, &summary_json)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    write_state(&engine, state_dir)?;

    if !quiet {
        println!("{summary_json}");
    }
    if report.ok {
        if !quiet {
            println!(
                "result: ok ({} expectations)",
                report.summary.expectations_checked
            );
        }
        Ok(ExitCode::SUCCESS)
    } else {
        let first = report.summary.failures.first().cloned().unwrap_or_default();
        eprintln!("result: FAILED — {first}");
        Ok(ExitCode::from(1))
    }
}

/// Per-ledger chain dumps, customer wallet files, and received
/// presentations, for the inspect/scan/wallet subcommands.
fn write_state(engine: &sim_core::scenario::Engine, state_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(state_dir)
        .with_context(|| format!("creating {}", state_dir.display()))?;
    for ledger in engine.hub.ledgers() {
        let path = state_dir.join(format!("{}.chain", ledger.ledger_id));
        std::fs::write(&path, ledger.dump())?;
    }
    for (label, customer) in &engine.customers {
        if let Some(wallet) = &customer.wallet {
            std::fs::write(state_dir.join(format!("{label}.wallet")), wallet.encode())?;
        }
    }
    for bank in engine.banks.values() {
        for case in bank.cases.values() {
            for (i, vp) in case.vp_bytes.iter().enumerate() {
                let name = if case.vp_bytes.len() == 1 {
                    format!("{}.vp", case.case_id)
                } else {
                    format!("{}-{i}.vp", case.case_id)
                };
                std::fs::write(state_dir.join(name), vp)?;
            }
        }
    }
    Ok(())
}

fn load_chain(state_dir: &Path, ledger_id: &str) -> Result<Ledger> {
    let path = state_dir.join(format!("{ledger_id}.chain"));
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ledger::load(ledger_id, &text, 1).map_err(|e| anyhow::anyhow!("{e}"))
}

fn inspect(ledger_id: &str, height: Option<u64>, state_dir: &Path) -> Result<ExitCode> {
    let ledger = load_chain(state_dir, ledger_id)?;
    let blocks = ledger.blocks();
    match height {
        Some(h) => {
            let block = blocks
                .iter()
                .find(|b| b.height == h)
                .with_context(|| format!("no block at height {h}"))?;
            println!("height:    {}", block.height);
            println!("timestamp: {}", block.timestamp);
            println!("prev_hash: {}", hex::encode(block.prev_hash));
            println!("hash:      {}", hex::encode(block.hash));
            for tx in &block.txs {
                println!("tx:        {} by {}", tx.kind.as_str(), tx.author_did);
            }
        }
        None => {
            println!(
                "ledger {ledger_id}: {} blocks, chain {}",
                blocks.len(),
                if ledger.verify_chain() {
                    "valid"
                } else {
                    "INVALID"
                }
            );
            for block in blocks {
                let kinds: Vec<&str> = block.txs.iter().map(|t| t.kind.as_str()).collect();
                println!(
                    "{:>4}  t={:<6} {}  [{}]",
                    block.height,
                    block.timestamp,
                    hex::encode(&block.hash[..8]),
                    kinds.join(",")
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn scan_pii(terms_file: &Path, state_dir: &Path) -> Result<ExitCode> {
    let terms_text = std::fs::read_to_string(terms_file)
        .with_context(|| format!("reading {}", terms_file.display()))?;
    let terms: Vec<&str> = terms_text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if terms.is_empty() {
        bail!("terms file is empty");
    }
    let mut chains = Vec::new();
    for entry in
        std::fs::read_dir(state_dir).with_context(|| format!("reading {}", state_dir.display()))?
    {
        let path = entry?.path();
        if path.extension().and_then(|x| x.to_str()) == Some("chain") {
            let id = path.file_stem().unwrap().to_string_lossy().to_string();
            chains.push(load_chain(state_dir, &id)?);
        }
    }
    if chains.is_empty() {
        bail!("no chain dumps in {}", state_dir.display());
    }
    let mut hits = 0usize;
    for (i, term) in terms.iter().enumerate() {
        for chain in &chains {
            if chain.contains_bytes(term.as_bytes()) {
                println!("HIT term #{i} on ledger {}", chain.ledger_id);
                hits += 1;
            }
        }
    }
    if hits == 0 {
        println!(
            "clean: {} terms scanned over {} chains, no matches",
            terms.len(),
            chains.len()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn wallet_export(wallet_file: &Path, passphrase: &str, out: &Path, seed: u64) -> Result<ExitCode> {
    use rand::SeedableRng;
    let bytes = std::fs::read(wallet_file)
        .with_context(|| format!("reading {}", wallet_file.display()))?;
    let wallet = Wallet::decode(&bytes).map_err(|e| anyhow::anyhow!("bad wallet file: {e}"))?;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let backup = export_wallet(&wallet, passphrase, &mut rng);
    std::fs::write(out, &backup).with_context(|| format!("writing {}", out.display()))?;
    println!("exported {} bytes for `{}`", backup.len(), wallet.owner);
    Ok(ExitCode::SUCCESS)
}

fn wallet_import(backup_file: &Path, passphrase: &str, out: &Path) -> Result<ExitCode> {
    let bytes = std::fs::read(backup_file)
        .with_context(|| format!("reading {}", backup_file.display()))?;
    match import_wallet(&bytes, passphrase) {
        Ok(wallet) => {
            std::fs::write(out, wallet.encode())
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "restored wallet `{}` ({} credentials)",
                wallet.owner,
                wallet.credentials.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("import failed: {e}");
            Ok(ExitCode::from(1))
        }
    }
}
