//! Discrete Bayesian networks: structure, CPT learning and exact inference.

mod cpt;
mod inference;
mod structure;

pub use cpt::{learn_cpt, CountTable, Cpt, CptDocument, CptRow, CptRowDocument};
pub use inference::{BayesNet, Evidence, Marginal, Posterior};
pub use structure::NetworkStructure;

use serde::{Deserialize, Serialize};

use crate::discretizer::VariableSpec;

/// A discrete variable as the network sees it: a name and ordered states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new(name: &str, states: &[&str]) -> Self {
        Variable {
            name: name.to_string(),
            states: states.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

impl From<&VariableSpec> for Variable {
    fn from(spec: &VariableSpec) -> Self {
        Variable {
            name: spec.name.clone(),
            states: spec.state_names().into_iter().map(String::from).collect(),
        }
    }
}
