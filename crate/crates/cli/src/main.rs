//! `berbn` command-line front end.
//!
//! Exit codes: 0 success, 1 validation threshold exceeded, 2 usage or input
//! error, 3 failure writing output, 4 evidence with zero probability.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use berbn::bn::{BayesNet, Cpt, Evidence};
use berbn::channel::DISABLED;
use berbn::discretizer::SpecSet;
use berbn::experiment::{
    ber_sweep, compare_tables, learn_ber_cpt, read_dataset, run_experiment, run_experiment_with_workers, write_dataset,
    ExperimentConfig, ReferenceCpd, SweepConfig, Thresholds,
};
use berbn::{report, Error};
use clap::{Parser, Subcommand};
use log::{info, warn};

#[derive(Parser)]
#[command(name = "berbn", version, about = "Bayesian-network BER model for DPSK links")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo sweep and write the trial dataset as CSV.
    Simulate {
        /// Experiment configuration (JSON). Defaults to the built-in grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override trials per combination.
        #[arg(long)]
        trials: Option<u32>,
        /// Override bits per trial.
        #[arg(long)]
        bits: Option<u64>,
        /// Worker threads (0 = all cores). Output does not depend on it.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Learn the BER CPT from a dataset.
    Learn {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Configuration whose state definitions are used for discretization.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Additive smoothing per cell; 0 gives maximum likelihood.
        #[arg(long, default_value_t = 0.0)]
        pseudocount: f64,
    },
    /// Posterior marginals of the non-evidence variables.
    Infer {
        cpt: PathBuf,
        /// Observation VAR=STATE; repeat or comma-separate for several.
        #[arg(long, short)]
        evidence: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Compare a learned CPT against reference rows by total variation distance.
    Validate {
        cpt: PathBuf,
        /// Reference table (CPT JSON, rows may be partial). Defaults to the bundled one.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Threshold for degenerate reference rows.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Threshold for interior reference rows.
        #[arg(long, default_value_t = 1.0)]
        interior_threshold: f64,
        #[arg(long)]
        json: bool,
    },
    /// Write CPT row listing and BER-versus-EbN0 curves (CSV and SVG).
    Report {
        #[arg(long)]
        out: PathBuf,
        /// Learned CPT to tabulate.
        #[arg(long)]
        cpt: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Bits per curve point.
        #[arg(long, default_value_t = 300_000)]
        bits: u64,
        /// Carrier-to-interference ratio in dB for the curves (default: no interferer).
        #[arg(long)]
        ci_db: Option<f64>,
        /// Doppler phase step in radians for the curves.
        #[arg(long, default_value_t = 0.0)]
        dop_phi: f64,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }

    fn input(e: impl Display) -> Self {
        Failure::new(2, e)
    }

    fn output(path: &Path, e: impl Display) -> Self {
        Failure::new(3, format!("writing {}: {e}", path.display()))
    }
}

fn from_core(e: Error) -> Failure {
    match e {
        Error::ImpossibleEvidence => Failure::new(4, e),
        other => Failure::input(other),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("reading {}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::output(path, e))
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            ExperimentConfig::from_json(&read_input(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
        }
    }
}

fn load_cpt(path: &Path) -> Result<Cpt, Failure> {
    Cpt::from_json(&read_input(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Simulate {
            config,
            out,
            seed,
            trials,
            bits,
            workers,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(t) = trials {
                cfg.trials_per_combo = t;
            }
            if let Some(b) = bits {
                cfg.bits_per_trial = b;
            }
            cfg.validate().map_err(from_core)?;
            info!(
                "simulating {} combinations x {} trials",
                cfg.combination_count().map_err(from_core)?,
                cfg.trials_per_combo
            );
            let records = match workers {
                0 => run_experiment(&cfg),
                n => run_experiment_with_workers(&cfg, n),
            }
            .map_err(from_core)?;
            write_dataset(&records, &out).map_err(|e| Failure::output(&out, e))?;
            println!("wrote {} records to {}", records.len(), out.display());
            Ok(0)
        }
        Command::Learn {
            dataset,
            out,
            config,
            pseudocount,
        } => {
            let specs = match config {
                Some(p) => load_config(Some(&p))?.specs,
                None => SpecSet::table1(),
            };
            if !dataset.is_file() {
                return Err(Failure::input(format!("dataset {} not found", dataset.display())));
            }
            let records = read_dataset(&dataset).map_err(|e| Failure::input(format!("{}: {e}", dataset.display())))?;
            if records.is_empty() {
                warn!("dataset {} holds no records", dataset.display());
            }
            let cpt = learn_ber_cpt(&records, &specs, pseudocount).map_err(from_core)?;
            let unobserved = cpt.unobserved_count();
            if unobserved > 0 {
                warn!(
                    "{unobserved} of {} CPT rows have no samples and default to uniform",
                    cpt.rows().len()
                );
            }
            write_output(&out, &cpt.to_json().map_err(from_core)?)?;
            println!(
                "learned {} rows from {} records ({unobserved} unobserved) -> {}",
                cpt.rows().len(),
                records.len(),
                out.display()
            );
            Ok(0)
        }
        Command::Infer { cpt, evidence, json } => {
            let net = BayesNet::from_cpt(load_cpt(&cpt)?).map_err(from_core)?;
            if net.unobserved_rows() > 0 {
                warn!(
                    "model has {} unobserved CPT rows; those rows are uniform",
                    net.unobserved_rows()
                );
            }
            let mut ev = Evidence::new();
            for item in &evidence {
                let parsed: Evidence = item.parse().map_err(from_core)?;
                for (var, state) in parsed.iter() {
                    ev.insert(var, state);
                }
            }
            let posterior = net.infer_posterior(&ev).map_err(from_core)?;
            let hidden: Vec<_> = posterior.marginals.iter().filter(|m| !m.observed).collect();
            if json {
                let evidence_map: serde_json::Map<String, serde_json::Value> =
                    ev.iter().map(|(k, v)| (k.to_string(), v.into())).collect();
                let doc = serde_json::json!({
                    "evidence": evidence_map,
                    "evidence_probability": posterior.evidence_probability,
                    "marginals": hidden,
                });
                println!("{}", serde_json::to_string_pretty(&doc).map_err(Failure::input)?);
            } else {
                println!("P(evidence) = {:.6e}", posterior.evidence_probability);
                for m in hidden {
                    println!("{}:", m.variable);
                    for (s, p) in m.states.iter().zip(&m.probs) {
                        println!("  {s:<10} {p:.6}");
                    }
                }
            }
            Ok(0)
        }
        Command::Validate {
            cpt,
            reference,
            threshold,
            interior_threshold,
            json,
        } => {
            let learned = ReferenceCpd::from_json(&read_input(&cpt)?)
                .map_err(|e| Failure::input(format!("{}: {e}", cpt.display())))?;
            let reference = match reference {
                None => ReferenceCpd::paper(),
                Some(p) => ReferenceCpd::from_json(&read_input(&p)?)
                    .map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
            };
            let thresholds = Thresholds {
                degenerate: threshold,
                interior: interior_threshold,
            };
            let report = compare_tables(&learned, &reference, thresholds).map_err(from_core)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(Failure::input)?);
            } else {
                print!("{}", report.render_table());
                println!(
                    "{} rows, max distance {:.4}, mean distance {:.4}, {} over threshold: {}",
                    report.rows.len(),
                    report.max_distance,
                    report.mean_distance,
                    report.failures().count(),
                    if report.passed { "PASS" } else { "FAIL" }
                );
            }
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Report {
            out,
            cpt,
            seed,
            bits,
            ci_db,
            dop_phi,
        } => {
            fs::create_dir_all(&out).map_err(|e| Failure::output(&out, e))?;
            if let Some(path) = cpt {
                let cpt = load_cpt(&path)?;
                write_output(&out.join("cpt_rows.csv"), &report::cpt_rows_csv(&cpt))?;
            }
            let sweep = SweepConfig {
                bits_per_point: bits,
                seed,
                ci_db: ci_db.unwrap_or(DISABLED),
                dop_phi_rad: dop_phi,
                ..SweepConfig::default()
            };
            let points = ber_sweep(&sweep).map_err(from_core)?;
            write_output(&out.join("ber_sweep.csv"), &report::sweep_csv(&points))?;
            write_output(&out.join("ber_sweep.svg"), &report::sweep_svg(&points))?;
            println!("wrote report to {}", out.display());
            Ok(0)
        }
    }
}
