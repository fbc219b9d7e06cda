//! Flat-channel impairments and the single-trial BER measurement.
//!
//! Conventions:
//!
//! - symbol energy `Es = 1`, so `Eb = 1/k` and `N0 = 1 / (k * 10^(EbN0/10))`;
//! - the interferer is a constant-envelope addend of power `10^(-C/I / 10)`
//!   with an independent uniform phase on every symbol;
//! - Doppler is a phase ramp: symbol `n` is rotated by `n * phi`.
//!
//! `+inf` switches interference (`ci_db`) or noise (`ebn0_db`) off.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::modem::{self, IqSymbol, Modulation};
use crate::rng::trial_rng;
use crate::{Error, Result};

/// Sentinel for a disabled impairment.
pub const DISABLED: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkScenario {
    pub modulation: Modulation,
    pub ebn0_db: f64,
    pub ci_db: f64,
    pub dop_phi_rad: f64,
    pub n_bits: u64,
    pub seed: u64,
}

impl LinkScenario {
    pub fn validate(&self) -> Result<()> {
        let k = self.modulation.bits_per_symbol() as u64;
        if self.n_bits < k || !self.n_bits.is_multiple_of(k) {
            return Err(Error::invalid(format!(
                "n_bits = {} must be a positive multiple of {k} for {}",
                self.n_bits, self.modulation
            )));
        }
        if !(self.dop_phi_rad.is_finite() && self.dop_phi_rad >= 0.0) {
            return Err(Error::invalid(format!(
                "Doppler phase {} must be finite and non-negative",
                self.dop_phi_rad
            )));
        }
        if self.ebn0_db.is_nan() || self.ci_db.is_nan() {
            return Err(Error::invalid("EbN0 and C/I must not be NaN"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub modulation: Modulation,
    pub ebn0_db: f64,
    pub ci_db: f64,
    pub dop_phi_rad: f64,
    pub n_bits: u64,
    pub n_errors: u64,
    pub ber: f64,
}

impl TrialRecord {
    pub fn new(scenario: &LinkScenario, n_errors: u64) -> Self {
        TrialRecord {
            modulation: scenario.modulation,
            ebn0_db: scenario.ebn0_db,
            ci_db: scenario.ci_db,
            dop_phi_rad: scenario.dop_phi_rad,
            n_bits: scenario.n_bits,
            n_errors,
            ber: n_errors as f64 / scenario.n_bits as f64,
        }
    }
}

/// Rotates symbol `n` by `n * phi` radians.
pub fn apply_doppler(symbols: &mut [IqSymbol], phi: f64) {
    if phi == 0.0 {
        return;
    }
    for (n, s) in symbols.iter_mut().enumerate() {
        *s *= IqSymbol::from_polar(1.0, n as f64 * phi);
    }
}

/// Interferer power relative to unit signal power.
pub fn interference_power(ci_db: f64) -> f64 {
    10f64.powf(-ci_db / 10.0)
}

/// Adds a random-phase interferer of power `10^(-ci_db/10)` to every symbol.
pub fn add_interference<R: Rng + ?Sized>(symbols: &mut [IqSymbol], ci_db: f64, rng: &mut R) {
    let amplitude = interference_power(ci_db).sqrt();
    if amplitude == 0.0 {
        return;
    }
    for s in symbols.iter_mut() {
        let theta: f64 = rng.random::<f64>() * TAU;
        *s += IqSymbol::from_polar(amplitude, theta);
    }
}

/// Total complex noise variance per symbol for the given per-bit SNR.
pub fn noise_variance(ebn0_db: f64, bits_per_symbol: usize) -> f64 {
    1.0 / (bits_per_symbol as f64 * 10f64.powf(ebn0_db / 10.0))
}

/// Adds circularly symmetric Gaussian noise, variance `N0/2` per quadrature.
pub fn add_noise<R: Rng + ?Sized>(
    symbols: &mut [IqSymbol],
    ebn0_db: f64,
    bits_per_symbol: usize,
    rng: &mut R,
) -> Result<()> {
    if bits_per_symbol == 0 {
        return Err(Error::invalid("bits per symbol must be at least 1"));
    }
    let sigma = (noise_variance(ebn0_db, bits_per_symbol) / 2.0).sqrt();
    if sigma == 0.0 {
        return Ok(());
    }
    for s in symbols.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += IqSymbol::new(sigma * re, sigma * im);
    }
    Ok(())
}

/// Runs one link trial: random bits, modulation, channel, detection, error count.
///
/// The result is a pure function of `scenario`; the scenario seed drives a
/// private ChaCha8 stream consumed in the order bits, interference, noise.
pub fn run_trial(scenario: &LinkScenario) -> Result<TrialRecord> {
    scenario.validate()?;
    let mut rng = trial_rng(scenario.seed);
    let n_bits = scenario.n_bits as usize;

    let mut bits = Vec::with_capacity(n_bits);
    while bits.len() < n_bits {
        let word: u64 = rng.random();
        let take = (n_bits - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }

    let mut symbols = modem::modulate(&bits, scenario.modulation)?;
    apply_doppler(&mut symbols, scenario.dop_phi_rad);
    add_interference(&mut symbols, scenario.ci_db, &mut rng);
    add_noise(
        &mut symbols,
        scenario.ebn0_db,
        scenario.modulation.bits_per_symbol(),
        &mut rng,
    )?;
    let received = modem::demodulate(&symbols, scenario.modulation)?;
    let errors = modem::count_bit_errors(&bits, &received)?;
    Ok(TrialRecord::new(scenario, errors))
}

/// Closed-form DBPSK bit error probability, `exp(-Eb/N0) / 2`.
pub fn dbpsk_theoretical_ber(ebn0_db: f64) -> f64 {
    0.5 * (-(10f64.powf(ebn0_db / 10.0))).exp()
}
