//! Differential PSK modulation and detection.
//!
//! Information rides on the phase *increment* between consecutive symbols.
//! A `k`-bit group selects one of `2^k` increments `2πm/2^k`; the bits of
//! increment index `m` are the reflected binary Gray code of `m`, MSB first,
//! so neighbouring increments differ in exactly one bit.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Unit-energy complex baseband symbol.
pub type IqSymbol = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "DBPSK")]
    Dbpsk,
    #[serde(rename = "DQPSK")]
    Dqpsk,
    #[serde(rename = "D8PSK")]
    D8psk,
}

impl Modulation {
    pub const ALL: [Modulation; 3] = [Modulation::Dbpsk, Modulation::Dqpsk, Modulation::D8psk];

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Dbpsk => "DBPSK",
            Modulation::Dqpsk => "DQPSK",
            Modulation::D8psk => "D8PSK",
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Dbpsk => 1,
            Modulation::Dqpsk => 2,
            Modulation::D8psk => 3,
        }
    }

    /// Number of distinct phase increments, `2^k`.
    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    /// Phase increment of index `m`, in radians.
    pub fn increment(self, m: usize) -> f64 {
        TAU * (m % self.order()) as f64 / self.order() as f64
    }

    /// Bit group (as an integer, MSB first) carried by increment index `m`.
    pub fn bits_of_increment(self, m: usize) -> usize {
        m ^ (m >> 1)
    }

    /// Increment index carrying bit group `g`; inverse of [`Self::bits_of_increment`].
    pub fn increment_of_bits(self, g: usize) -> usize {
        let mut m = g;
        let mut shift = g >> 1;
        while shift != 0 {
            m ^= shift;
            shift >>= 1;
        }
        m
    }

    /// Index of the increment nearest to `phase` on the circle.
    ///
    /// An exact tie between two neighbours resolves to the smaller index.
    pub fn nearest_increment(self, phase: f64) -> usize {
        let order = self.order();
        let t = phase.rem_euclid(TAU) / TAU * order as f64;
        let lo = t.floor();
        let frac = t - lo;
        let lo = (lo as usize) % order;
        let hi = (lo + 1) % order;
        if frac < 0.5 {
            lo
        } else if frac > 0.5 {
            hi
        } else {
            lo.min(hi)
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Modulation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownState {
                variable: crate::vars::MOD.to_string(),
                state: s.to_string(),
            })
    }
}

/// Differentially encodes `bits` (each 0 or 1).
///
/// The output starts with a reference symbol at phase 0 and has
/// `bits.len() / k + 1` symbols.
pub fn modulate(bits: &[u8], scheme: Modulation) -> Result<Vec<IqSymbol>> {
    let k = scheme.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(Error::invalid(format!(
            "{} bits is not a multiple of {k} bits per {scheme} symbol",
            bits.len()
        )));
    }
    let order = scheme.order();
    let mut symbols = Vec::with_capacity(bits.len() / k + 1);
    // Phase is tracked as an integer multiple of 2π/order so it never drifts.
    let mut acc = 0usize;
    symbols.push(IqSymbol::new(1.0, 0.0));
    for group in bits.chunks_exact(k) {
        let mut g = 0usize;
        for &b in group {
            if b > 1 {
                return Err(Error::invalid(format!("bit value {b} is not 0 or 1")));
            }
            g = (g << 1) | b as usize;
        }
        acc = (acc + scheme.increment_of_bits(g)) % order;
        symbols.push(IqSymbol::from_polar(1.0, scheme.increment(acc)));
    }
    Ok(symbols)
}

/// Differential detection: decides on `arg(y[n] * conj(y[n-1]))`.
pub fn demodulate(symbols: &[IqSymbol], scheme: Modulation) -> Result<Vec<u8>> {
    if symbols.len() < 2 {
        return Err(Error::invalid(format!(
            "differential detection needs at least 2 symbols, got {}",
            symbols.len()
        )));
    }
    let k = scheme.bits_per_symbol();
    let mut bits = Vec::with_capacity((symbols.len() - 1) * k);
    for pair in symbols.windows(2) {
        let z = pair[1] * pair[0].conj();
        let m = scheme.nearest_increment(z.im.atan2(z.re));
        let g = scheme.bits_of_increment(m);
        for i in (0..k).rev() {
            bits.push(((g >> i) & 1) as u8);
        }
    }
    Ok(bits)
}

/// Hamming distance between two equal-length bit sequences.
pub fn count_bit_errors(sent: &[u8], received: &[u8]) -> Result<u64> {
    if sent.len() != received.len() {
        return Err(Error::invalid(format!(
            "cannot compare {} sent bits with {} received bits",
            sent.len(),
            received.len()
        )));
    }
    Ok(sent.iter().zip(received).filter(|(a, b)| a != b).count() as u64)
}
