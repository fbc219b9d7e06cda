//! The end-to-end pipeline: scenario grid, sweep execution, discretization
//! and CPT learning, plus comparison against reference tables.

mod compare;
mod dataset;

pub use compare::{
    compare_cpt, compare_tables, total_variation, ComparisonReport, ReferenceCpd, RowClass, RowComparison, Thresholds,
};
pub use dataset::{read_dataset, read_dataset_from, write_dataset, write_dataset_to, DATASET_HEADER};

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bn::{learn_cpt, Cpt, NetworkStructure, Variable};
use crate::channel::{self, dbpsk_theoretical_ber, LinkScenario, TrialRecord};
use crate::discretizer::{discretize_record, SpecSet, StateDef};
use crate::modem::Modulation;
use crate::rng::{derive_seed, trial_rng, STREAM_GRID, STREAM_TRIAL};
use crate::vars;
use crate::{Error, Result};

/// How a continuous value is picked inside a state's interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    #[default]
    Uniform,
    Midpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub specs: SpecSet,
    pub trials_per_combo: u32,
    /// Bits per trial; rounded down to a whole number of symbols per modulation.
    pub bits_per_trial: u64,
    pub master_seed: u64,
    pub modulations: Vec<Modulation>,
    pub sampling: SamplingMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            specs: SpecSet::table1(),
            trials_per_combo: 200,
            bits_per_trial: 10_000,
            master_seed: 1,
            modulations: Modulation::ALL.to_vec(),
            sampling: SamplingMode::Uniform,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_combo == 0 {
            return Err(Error::Config("trials_per_combo must be at least 1".into()));
        }
        if self.modulations.is_empty() {
            return Err(Error::Config("at least one modulation is required".into()));
        }
        let mod_spec = self.specs.get(vars::MOD)?;
        for (i, m) in self.modulations.iter().enumerate() {
            if self.modulations[..i].contains(m) {
                return Err(Error::Config(format!("modulation {m} listed twice")));
            }
            if mod_spec.state_index(m.name()).is_none() {
                return Err(Error::Config(format!("modulation {m} is not a state of MOD")));
            }
            if self.bits_per_trial < m.bits_per_symbol() as u64 {
                return Err(Error::Config(format!(
                    "bits_per_trial = {} is less than one {m} symbol",
                    self.bits_per_trial
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Bits actually sent per trial for `m`: a whole number of symbols.
    pub fn bits_for(&self, m: Modulation) -> u64 {
        let k = m.bits_per_symbol() as u64;
        self.bits_per_trial / k * k
    }

    /// Number of parent-state combinations in the full grid (all MOD states).
    pub fn combination_count(&self) -> Result<usize> {
        [vars::MOD, vars::EBN0, vars::CI, vars::DOP_PHI]
            .iter()
            .map(|v| self.specs.get(v).map(|s| s.cardinality()))
            .product()
    }
}

fn sample_in(state: &StateDef, mode: SamplingMode, rng: &mut impl Rng) -> f64 {
    match mode {
        SamplingMode::Midpoint => 0.5 * (state.lower + state.upper),
        SamplingMode::Uniform => {
            let v = rng.random_range(state.lower..state.upper);
            if v < state.upper {
                v
            } else {
                state.upper.next_down()
            }
        }
    }
}

/// One scenario per (MOD, EbN0, C/I, Dop_Phi) state combination and trial.
///
/// The combination index is the mixed-radix position in the full grid, so a
/// scenario does not change when other modulations are dropped from the config.
/// Output is ordered by combination index, then trial index.
pub fn build_grid(config: &ExperimentConfig) -> Result<Vec<LinkScenario>> {
    config.validate()?;
    let specs = &config.specs;
    let mod_spec = specs.get(vars::MOD)?;
    let interval = |name| specs.get(name).map(|s| s.intervals().expect("validated interval spec"));
    let (ebn0, ci, phi) = (interval(vars::EBN0)?, interval(vars::CI)?, interval(vars::DOP_PHI)?);

    let mut mods: Vec<(usize, Modulation)> = config
        .modulations
        .iter()
        .map(|m| (mod_spec.state_index(m.name()).expect("validated modulation"), *m))
        .collect();
    mods.sort();

    let trials = config.trials_per_combo as usize;
    let mut out = Vec::with_capacity(mods.len() * ebn0.len() * ci.len() * phi.len() * trials);
    for &(mi, m) in &mods {
        for (ei, e) in ebn0.iter().enumerate() {
            for (ci_idx, c) in ci.iter().enumerate() {
                for (pi, p) in phi.iter().enumerate() {
                    let combo = ((mi * ebn0.len() + ei) * ci.len() + ci_idx) * phi.len() + pi;
                    for t in 0..trials as u64 {
                        let coords = [combo as u64, t];
                        let mut rng = trial_rng(derive_seed(config.master_seed, &[STREAM_GRID, coords[0], coords[1]]));
                        out.push(LinkScenario {
                            modulation: m,
                            ebn0_db: sample_in(e, config.sampling, &mut rng),
                            ci_db: sample_in(c, config.sampling, &mut rng),
                            dop_phi_rad: sample_in(p, config.sampling, &mut rng),
                            n_bits: config.bits_for(m),
                            seed: derive_seed(config.master_seed, &[STREAM_TRIAL, coords[0], coords[1]]),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Runs every scenario of the grid on the global rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let grid = build_grid(config)?;
    run_scenarios(&grid)
}

/// Same as [`run_experiment`] on a dedicated pool of `workers` threads.
pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<Vec<TrialRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

/// Order of the output matches the input regardless of scheduling.
pub fn run_scenarios(scenarios: &[LinkScenario]) -> Result<Vec<TrialRecord>> {
    scenarios.par_iter().map(channel::run_trial).collect()
}

pub fn ber_variables(specs: &SpecSet) -> Vec<Variable> {
    specs.iter().map(Variable::from).collect()
}

/// Discretizes a dataset and learns the unified BER table
/// (parents MOD, EbN0, C/I, Dop_Phi).
pub fn learn_ber_cpt(records: &[TrialRecord], specs: &SpecSet, pseudocount: f64) -> Result<Cpt> {
    let discrete = records
        .par_iter()
        .map(|r| discretize_record(r, specs))
        .collect::<Result<Vec<_>>>()?;
    learn_cpt(
        &discrete,
        &NetworkStructure::ber_default(),
        &ber_variables(specs),
        vars::BER,
        pseudocount,
    )
}

/// Settings for a BER-versus-EbN0 curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub modulations: Vec<Modulation>,
    pub ebn0_db: Vec<f64>,
    pub ci_db: f64,
    pub dop_phi_rad: f64,
    pub bits_per_point: u64,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            modulations: Modulation::ALL.to_vec(),
            ebn0_db: (0..=14).map(f64::from).collect(),
            ci_db: channel::DISABLED,
            dop_phi_rad: 0.0,
            bits_per_point: 300_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub modulation: Modulation,
    pub ebn0_db: f64,
    pub n_bits: u64,
    pub n_errors: u64,
    pub ber: f64,
    /// Closed-form reference, available for DBPSK on a noise-only channel.
    pub theory: Option<f64>,
}

pub fn ber_sweep(config: &SweepConfig) -> Result<Vec<SweepPoint>> {
    let mut scenarios = Vec::new();
    for (mi, &m) in config.modulations.iter().enumerate() {
        let k = m.bits_per_symbol() as u64;
        for (ei, &e) in config.ebn0_db.iter().enumerate() {
            scenarios.push(LinkScenario {
                modulation: m,
                ebn0_db: e,
                ci_db: config.ci_db,
                dop_phi_rad: config.dop_phi_rad,
                n_bits: (config.bits_per_point / k * k).max(k),
                seed: derive_seed(config.seed, &[STREAM_TRIAL, mi as u64, ei as u64]),
            });
        }
    }
    let noise_only = config.ci_db == channel::DISABLED && config.dop_phi_rad == 0.0;
    Ok(run_scenarios(&scenarios)?
        .into_iter()
        .map(|r| SweepPoint {
            modulation: r.modulation,
            ebn0_db: r.ebn0_db,
            n_bits: r.n_bits,
            n_errors: r.n_errors,
            ber: r.ber,
            theory: (noise_only && r.modulation == Modulation::Dbpsk).then(|| dbpsk_theoretical_ber(r.ebn0_db)),
        })
        .collect())
}
