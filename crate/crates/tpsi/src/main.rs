use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use tpsi::bench::{run_sweep, write_csv, SweepSpec};
use tpsi::config::{BackendChoice, ModeChoice, ProtocolChoice, RunConfig};
use tpsi::output::ResultDocument;
use tpsi::runner::{self, RunError};
use tpsi::setfile::{read_set, write_set};
use tpsi::tpsi_core::field::Fp;
use tpsi::tpsi_core::oracle::{gen_instance, OverlapPlan};

#[derive(Parser)]
#[command(
    name = "tpsi",
    version,
    about = "Traceable over-threshold multi-party PSI"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Settings that override the configuration file.
#[derive(clap::Args, Clone, Default)]
struct Overrides {
    #[arg(long)]
    protocol: Option<ProtocolChoice>,
    #[arg(long)]
    mode: Option<ModeChoice>,
    #[arg(long = "backend-opprf")]
    backend_opprf: Option<BackendChoice>,
    #[arg(long = "backend-ole")]
    backend_ole: Option<BackendChoice>,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the result JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "timeout-secs")]
    timeout_secs: Option<u64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = self.protocol {
            cfg.protocol = p;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(b) = self.backend_opprf {
            cfg.opprf = b;
        }
        if let Some(b) = self.backend_ole {
            cfg.ole = b;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(t) = self.timeout_secs {
            cfg.timeout_secs = t;
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Role {
    Leader,
    Client,
}

#[derive(Subcommand)]
enum Command {
    /// Write one set file per party with planted overlaps, plus a matching
    /// configuration file.
    GenSets {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        m: usize,
        /// Planted elements per holder count (t-1, t, t+1, and clients-only).
        #[arg(long, default_value_t = 4)]
        per_count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long, default_value = "et")]
        protocol: ProtocolChoice,
    },
    /// Run one party over TCP.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        role: Role,
        /// Party index (clients only; the leader is always 0).
        #[arg(long)]
        party: Option<u8>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run all parties in-process and print the result JSON.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Simulate and compare against the plaintext reference; exit 0 iff
    /// identical.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sweep parameters and write per-phase timings as CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "et")]
        protocol: Vec<ProtocolChoice>,
        #[arg(long, value_delimiter = ',', default_value = "5")]
        n: Vec<usize>,
        /// Thresholds; defaults to max(2, n/2) for each n.
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', default_value = "1024")]
        m: Vec<usize>,
        #[arg(long, default_value = "single-modulus")]
        mode: ModeChoice,
        #[arg(long = "backend-opprf", default_value = "ideal")]
        backend_opprf: BackendChoice,
        #[arg(long = "backend-ole", default_value = "ideal")]
        backend_ole: BackendChoice,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long = "timeout-secs", default_value_t = 600)]
        timeout_secs: u64,
        /// CSV destination; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Run(Box<RunError>),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("the configuration lists no set files")]
    NoSets,
    #[error("--party is required for the client role and must be nonzero")]
    ClientIndex,
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        CliError::Run(Box::new(e))
    }
}

fn load(config: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(config).map_err(RunError::from)?;
    overrides.apply(&mut cfg);
    cfg.validate().map_err(RunError::from)?;
    Ok(cfg)
}

fn load_sets(cfg: &RunConfig) -> Result<Vec<Vec<u128>>, CliError> {
    if cfg.sets.is_empty() {
        return Err(CliError::NoSets);
    }
    cfg.sets
        .iter()
        .map(|p| read_set(p).map_err(|e| CliError::from(RunError::from(e))))
        .collect()
}

fn emit(cfg: &RunConfig, doc: &ResultDocument) -> Result<(), CliError> {
    let json = doc.to_json();
    println!("{json}");
    if let Some(out) = &cfg.out {
        std::fs::write(out, json + "\n").map_err(|e| CliError::Io(out.display().to_string(), e))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::GenSets {
            n,
            t,
            m,
            per_count,
            seed,
            out_dir,
            protocol,
        } => {
            let mut cfg = RunConfig::new(protocol, n, t, m);
            cfg.validate().map_err(RunError::from)?;
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let plan = OverlapPlan::straddling(n, t, m, per_count, &mut rng);
            let inst = gen_instance::<Fp>(n, t, m, &plan, seed).map_err(RunError::from)?;
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| CliError::Io(out_dir.display().to_string(), e))?;
            for (i, set) in inst.sets.iter().enumerate() {
                let name = PathBuf::from(format!("party{i}.txt"));
                let values: Vec<u128> = set.iter().map(Fp::value).collect();
                write_set(
                    &out_dir.join(&name),
                    &values,
                    Some(&format!("party {i}, n={n} t={t} m={m} seed={seed}")),
                )
                .map_err(RunError::from)?;
                cfg.sets.push(name);
            }
            cfg.seed = Some(seed);
            cfg.endpoints = (0..n).map(|i| format!("127.0.0.1:{}", 7100 + i)).collect();
            let path = out_dir.join("config.toml");
            std::fs::write(&path, cfg.to_toml())
                .map_err(|e| CliError::Io(path.display().to_string(), e))?;
            eprintln!("wrote {n} set files and {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            role,
            party,
            overrides,
        } => {
            let cfg = load(&config, &overrides)?;
            let party = match role {
                Role::Leader => 0,
                Role::Client => party.filter(|&p| p != 0).ok_or(CliError::ClientIndex)?,
            };
            let set_path = cfg.sets.get(party as usize).ok_or(CliError::NoSets)?;
            let set = read_set(set_path).map_err(RunError::from)?;
            if let Some(entries) = runner::run_networked(&cfg, party, &set)? {
                emit(
                    &cfg,
                    &ResultDocument::new(cfg.protocol(), cfg.n, cfg.t, &entries),
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let sets = load_sets(&cfg)?;
            let run = runner::simulate(&cfg, &sets, false)?;
            emit(
                &cfg,
                &ResultDocument::new(cfg.protocol(), cfg.n, cfg.t, &run.entries),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let sets = load_sets(&cfg)?;
            let report = runner::verify(&cfg, &sets)?;
            if report.matches() {
                eprintln!(
                    "identical to the reference: {} elements",
                    report.oracle.len()
                );
                Ok(ExitCode::SUCCESS)
            } else {
                for line in report.differences() {
                    eprintln!("{line}");
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Bench {
            protocol,
            n,
            t,
            m,
            mode,
            backend_opprf,
            backend_ole,
            reps,
            seed,
            timeout_secs,
            out,
        } => {
            let spec = SweepSpec {
                protocols: protocol,
                ns: n,
                ts: t,
                ms: m,
                mode,
                opprf: backend_opprf,
                ole: backend_ole,
                reps,
                seed,
                timeout_secs,
                ..SweepSpec::default()
            };
            let rows = run_sweep(&spec, |_| {})?;
            match out {
                Some(path) => {
                    let f = std::fs::File::create(&path)
                        .map_err(|e| CliError::Io(path.display().to_string(), e))?;
                    write_csv(&rows, f)?;
                }
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TPSI_LOG", "warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
