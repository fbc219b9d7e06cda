//! Named discrete states for continuous link measurements.
//!
//! Interval states are half-open `[lower, upper)`; the last state of a
//! variable is closed above so its top boundary is still in range.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::TrialRecord;
use crate::vars;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval(Vec<StateDef>),
    Categorical(Vec<String>),
}

/// A named variable together with its ordered states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVariableSpec", into = "RawVariableSpec")]
pub struct VariableSpec {
    pub name: String,
    pub unit: String,
    pub domain: Domain,
}

/// What to do with a value outside a variable's total range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangePolicy {
    #[default]
    Reject,
    Clamp,
}

impl VariableSpec {
    /// Builds an interval variable from its `n + 1` boundaries; state `i`
    /// is named `{prefix}_{i+1}`.
    pub fn from_boundaries(name: &str, unit: &str, prefix: &str, bounds: &[f64]) -> Result<Self> {
        let states = bounds
            .windows(2)
            .enumerate()
            .map(|(i, w)| StateDef {
                name: format!("{prefix}_{}", i + 1),
                lower: w[0],
                upper: w[1],
            })
            .collect();
        let spec = VariableSpec {
            name: name.to_string(),
            unit: unit.to_string(),
            domain: Domain::Interval(states),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn categorical(name: &str, states: &[&str]) -> Result<Self> {
        let spec = VariableSpec {
            name: name.to_string(),
            unit: String::new(),
            domain: Domain::Categorical(states.iter().map(|s| s.to_string()).collect()),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let names = self.state_names();
        if names.len() < 2 {
            return Err(Error::Config(format!("variable {} needs at least 2 states", self.name)));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Config(format!("variable {} repeats state {n}", self.name)));
            }
        }
        if let Domain::Interval(states) = &self.domain {
            for s in states {
                if !(s.lower.is_finite() && s.upper.is_finite() && s.lower < s.upper) {
                    return Err(Error::Config(format!(
                        "state {} of {} has invalid interval [{}, {})",
                        s.name, self.name, s.lower, s.upper
                    )));
                }
            }
            for w in states.windows(2) {
                if w[0].upper != w[1].lower {
                    return Err(Error::Config(format!(
                        "states {} and {} of {} are not contiguous",
                        w[0].name, w[1].name, self.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn state_names(&self) -> Vec<&str> {
        match &self.domain {
            Domain::Interval(states) => states.iter().map(|s| s.name.as_str()).collect(),
            Domain::Categorical(states) => states.iter().map(String::as_str).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        match &self.domain {
            Domain::Interval(states) => states.len(),
            Domain::Categorical(states) => states.len(),
        }
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.state_names().iter().position(|s| *s == state)
    }

    pub fn intervals(&self) -> Option<&[StateDef]> {
        match &self.domain {
            Domain::Interval(states) => Some(states),
            Domain::Categorical(_) => None,
        }
    }

    /// Index of the state containing `value`.
    pub fn discretize_index(&self, value: f64, policy: RangePolicy) -> Result<usize> {
        let states = self
            .intervals()
            .ok_or_else(|| Error::invalid(format!("variable {} is categorical, not interval", self.name)))?;
        let out_of_range = || Error::OutOfRange {
            variable: self.name.clone(),
            value,
        };
        if value.is_nan() {
            return Err(out_of_range());
        }
        let last = states.len() - 1;
        if value < states[0].lower || value > states[last].upper {
            return match policy {
                RangePolicy::Reject => Err(out_of_range()),
                RangePolicy::Clamp if value < states[0].lower => Ok(0),
                RangePolicy::Clamp => Ok(last),
            };
        }
        // First state whose upper bound lies strictly above the value.
        Ok(states.partition_point(|s| s.upper <= value).min(last))
    }

    /// Name of the state containing `value`; out-of-range values are errors.
    pub fn discretize(&self, value: f64) -> Result<&str> {
        let i = self.discretize_index(value, RangePolicy::Reject)?;
        Ok(self.state_names()[i])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariableSpec {
    name: String,
    #[serde(default)]
    unit: String,
    kind: RawKind,
    states: Vec<RawState>,
}

#[derive(Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    Interval,
    Categorical,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawState {
    Interval(StateDef),
    Name(String),
}

impl TryFrom<RawVariableSpec> for VariableSpec {
    type Error = Error;

    fn try_from(raw: RawVariableSpec) -> Result<Self> {
        let domain = match raw.kind {
            RawKind::Interval => Domain::Interval(
                raw.states
                    .into_iter()
                    .map(|s| match s {
                        RawState::Interval(d) => Ok(d),
                        RawState::Name(n) => Err(Error::Config(format!(
                            "interval variable {} has state {n:?} without bounds",
                            raw.name
                        ))),
                    })
                    .collect::<Result<_>>()?,
            ),
            RawKind::Categorical => Domain::Categorical(
                raw.states
                    .into_iter()
                    .map(|s| match s {
                        RawState::Name(n) => Ok(n),
                        RawState::Interval(d) => Err(Error::Config(format!(
                            "categorical variable {} has interval state {}",
                            raw.name, d.name
                        ))),
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        let spec = VariableSpec {
            name: raw.name,
            unit: raw.unit,
            domain,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<VariableSpec> for RawVariableSpec {
    fn from(spec: VariableSpec) -> Self {
        let (kind, states) = match spec.domain {
            Domain::Interval(s) => (RawKind::Interval, s.into_iter().map(RawState::Interval).collect()),
            Domain::Categorical(s) => (RawKind::Categorical, s.into_iter().map(RawState::Name).collect()),
        };
        RawVariableSpec {
            name: spec.name,
            unit: spec.unit,
            kind,
            states,
        }
    }
}

/// The state definitions of the BER network: EbN0, C/I, Dop_Phi, BER and MOD.
pub fn default_table1_specs() -> Vec<VariableSpec> {
    let interval = |name, unit, prefix, bounds: &[f64]| {
        VariableSpec::from_boundaries(name, unit, prefix, bounds).expect("built-in spec is valid")
    };
    vec![
        interval(vars::EBN0, "dB", "EbN0", &[-72.8, 0.0, 10.0, 13.0, 16.0, 19.0, 109.1]),
        interval(vars::CI, "dB", "C/I", &[-159.0, 0.0, 20.0, 30.0, 40.0, 50.0, 159.0]),
        interval(vars::DOP_PHI, "rad", "Phi", &[0.0, 0.05, 0.1, 0.136]),
        interval(vars::BER, "", "BER", &[0.0, 1e-5, 1e-3, 1e-2, 1e-1, 1.0]),
        VariableSpec::categorical(vars::MOD, &["DBPSK", "DQPSK", "D8PSK"]).expect("built-in spec is valid"),
    ]
}

/// The five variable specs of the BER network, addressable by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<VariableSpec>", into = "Vec<VariableSpec>")]
pub struct SpecSet {
    specs: Vec<VariableSpec>,
}

impl SpecSet {
    pub fn new(specs: Vec<VariableSpec>) -> Result<Self> {
        for (i, s) in specs.iter().enumerate() {
            s.validate()?;
            if specs[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::Config(format!("variable {} is defined twice", s.name)));
            }
        }
        let set = SpecSet { specs };
        for name in [vars::EBN0, vars::CI, vars::DOP_PHI, vars::BER] {
            if set.get(name)?.intervals().is_none() {
                return Err(Error::Config(format!("variable {name} must be an interval variable")));
            }
        }
        let m = set.get(vars::MOD)?;
        if m.intervals().is_some() {
            return Err(Error::Config("variable MOD must be categorical".into()));
        }
        for state in m.state_names() {
            state
                .parse::<crate::modem::Modulation>()
                .map_err(|_| Error::Config(format!("MOD state {state:?} is not a supported modulation")))?;
        }
        Ok(set)
    }

    pub fn table1() -> Self {
        SpecSet::new(default_table1_specs()).expect("built-in specs are valid")
    }

    pub fn get(&self, name: &str) -> Result<&VariableSpec> {
        self.specs
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &VariableSpec> {
        self.specs.iter()
    }
}

impl Default for SpecSet {
    fn default() -> Self {
        SpecSet::table1()
    }
}

impl TryFrom<Vec<VariableSpec>> for SpecSet {
    type Error = Error;
    fn try_from(specs: Vec<VariableSpec>) -> Result<Self> {
        SpecSet::new(specs)
    }
}

impl From<SpecSet> for Vec<VariableSpec> {
    fn from(set: SpecSet) -> Self {
        set.specs
    }
}

/// A fully discretized sample: one state name per network variable.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiscreteRecord {
    states: BTreeMap<String, String>,
}

impl DiscreteRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: &str, state: &str) -> Self {
        self.insert(variable, state);
        self
    }

    pub fn insert(&mut self, variable: &str, state: &str) {
        self.states.insert(variable.to_string(), state.to_string());
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.states.get(variable).map(String::as_str)
    }

    pub fn states(&self) -> &BTreeMap<String, String> {
        &self.states
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for DiscreteRecord {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        DiscreteRecord {
            states: iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

pub fn discretize_record(trial: &TrialRecord, specs: &SpecSet) -> Result<DiscreteRecord> {
    discretize_record_with(trial, specs, RangePolicy::Reject)
}

pub fn discretize_record_with(trial: &TrialRecord, specs: &SpecSet, policy: RangePolicy) -> Result<DiscreteRecord> {
    let mut record = DiscreteRecord::new();
    for (name, value) in [
        (vars::EBN0, trial.ebn0_db),
        (vars::CI, trial.ci_db),
        (vars::DOP_PHI, trial.dop_phi_rad),
        (vars::BER, trial.ber),
    ] {
        let spec = specs.get(name)?;
        let i = spec.discretize_index(value, policy)?;
        record.insert(name, spec.state_names()[i]);
    }
    let mod_spec = specs.get(vars::MOD)?;
    let m = trial.modulation.name();
    if mod_spec.state_index(m).is_none() {
        return Err(Error::UnknownState {
            variable: vars::MOD.into(),
            state: m.into(),
        });
    }
    record.insert(vars::MOD, m);
    Ok(record)
}
