//! Bayesian-network model of the bit error rate of a differential PSK link.
//!
//! The crate covers the whole pipeline:
//!
//! - [`modem`]: DBPSK / DQPSK / D8PSK differential modulation and detection.
//! - [`channel`]: Doppler phase ramp, co-channel interference, AWGN and the
//!   single-trial BER measurement.
//! - [`discretizer`]: interval/categorical variable specs and the mapping of
//!   measurements onto named states.
//! - [`bn`]: network structure, maximum-likelihood CPT learning and exact
//!   posterior inference by enumeration.
//! - [`experiment`]: grid generation, parallel sweeps, dataset files and
//!   comparison of learned tables against reference tables.
//! - [`report`]: CSV and SVG renderings of tables and BER curves.

pub mod bn;
pub mod channel;
pub mod discretizer;
pub mod error;
pub mod experiment;
pub mod modem;
pub mod report;
pub mod rng;

pub use error::{Error, Result};

/// Canonical variable names of the BER network.
pub mod vars {
    pub const EBN0: &str = "EbN0";
    pub const CI: &str = "C/I";
    pub const DOP_PHI: &str = "Dop_Phi";
    pub const MOD: &str = "MOD";
    pub const BER: &str = "BER";
}
