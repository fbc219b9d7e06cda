use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cpt::check_distribution;
use super::{Cpt, NetworkStructure, Variable};
use crate::{Error, Result};

/// Observed states for a subset of the network variables.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Evidence {
    states: BTreeMap<String, String>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: &str, state: &str) -> Self {
        self.states.insert(variable.to_string(), state.to_string());
        self
    }

    pub fn insert(&mut self, variable: &str, state: &str) {
        self.states.insert(variable.to_string(), state.to_string());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.states.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

impl std::str::FromStr for Evidence {
    type Err = Error;

    /// Parses a comma-separated `VAR=STATE` list.
    fn from_str(s: &str) -> Result<Self> {
        let mut ev = Evidence::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (var, state) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("evidence {item:?} is not VAR=STATE")))?;
            ev.insert(var.trim(), state.trim());
        }
        Ok(ev)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub variable: String,
    pub states: Vec<String>,
    pub probs: Vec<f64>,
    pub observed: bool,
}

/// Posterior marginals of every network variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub marginals: Vec<Marginal>,
    /// Probability of the evidence under the model.
    pub evidence_probability: f64,
}

impl Posterior {
    pub fn get(&self, variable: &str) -> Option<&Marginal> {
        self.marginals.iter().find(|m| m.variable == variable)
    }

    pub fn prob(&self, variable: &str, state: &str) -> Option<f64> {
        let m = self.get(variable)?;
        let i = m.states.iter().position(|s| s == state)?;
        Some(m.probs[i])
    }
}

/// A discrete Bayesian network with root priors and per-child CPTs.
#[derive(Debug, Clone)]
pub struct BayesNet {
    structure: NetworkStructure,
    variables: Vec<Variable>,
    parents: Vec<Vec<usize>>,
    order: Vec<usize>,
    cpts: Vec<Option<Cpt>>,
    priors: Vec<Option<Vec<f64>>>,
}

impl BayesNet {
    /// Assembles a network. Every non-root node needs exactly one CPT whose
    /// parents match the structure; roots start with uniform priors.
    pub fn new(variables: Vec<Variable>, structure: NetworkStructure, cpts: Vec<Cpt>) -> Result<Self> {
        let order = structure.topological_order()?;
        let vars = structure
            .nodes
            .iter()
            .map(|n| {
                variables
                    .iter()
                    .find(|v| &v.name == n)
                    .cloned()
                    .ok_or_else(|| Error::UnknownVariable(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(v) = variables.iter().find(|v| structure.node_index(&v.name).is_none()) {
            return Err(Error::UndeclaredNode(v.name.clone()));
        }

        let mut slots: Vec<Option<Cpt>> = vec![None; vars.len()];
        for cpt in cpts {
            let i = structure
                .node_index(&cpt.child().name)
                .ok_or_else(|| Error::UndeclaredNode(cpt.child().name.clone()))?;
            if slots[i].is_some() {
                return Err(Error::invalid(format!("two CPTs for {}", vars[i].name)));
            }
            slots[i] = Some(cpt);
        }

        let mut parents = Vec::with_capacity(vars.len());
        let mut priors = Vec::with_capacity(vars.len());
        for (i, v) in vars.iter().enumerate() {
            let names = structure.parents(&v.name);
            parents.push(
                names
                    .iter()
                    .map(|p| structure.node_index(p).unwrap())
                    .collect::<Vec<_>>(),
            );
            match (&slots[i], names.is_empty()) {
                (None, true) => priors.push(Some(vec![1.0 / v.cardinality() as f64; v.cardinality()])),
                (Some(_), true) => {
                    return Err(Error::invalid(format!(
                        "{} is a root; give it a prior, not a CPT",
                        v.name
                    )))
                }
                (None, false) => return Err(Error::invalid(format!("missing CPT for {}", v.name))),
                (Some(cpt), false) => {
                    if cpt.child() != v {
                        return Err(Error::KeyMismatch(format!("CPT child states differ for {}", v.name)));
                    }
                    let expected: Vec<&Variable> =
                        names.iter().map(|p| &vars[structure.node_index(p).unwrap()]).collect();
                    if cpt.parents().iter().ne(expected.iter().copied()) {
                        return Err(Error::KeyMismatch(format!(
                            "CPT parents of {} do not match the structure",
                            v.name
                        )));
                    }
                    priors.push(None);
                }
            }
        }
        Ok(BayesNet {
            structure,
            variables: vars,
            parents,
            order,
            cpts: slots,
            priors,
        })
    }

    /// The single-child network implied by one CPT: every parent points at the child.
    pub fn from_cpt(cpt: Cpt) -> Result<Self> {
        let mut variables: Vec<Variable> = cpt.parents().to_vec();
        variables.push(cpt.child().clone());
        let nodes: Vec<&str> = variables.iter().map(|v| v.name.as_str()).collect();
        let child = cpt.child().name.as_str();
        let edges: Vec<(&str, &str)> = cpt.parents().iter().map(|p| (p.name.as_str(), child)).collect();
        let structure = NetworkStructure::new(&nodes, &edges);
        BayesNet::new(variables.clone(), structure, vec![cpt])
    }

    pub fn structure(&self) -> &NetworkStructure {
        &self.structure
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.structure
            .node_index(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    fn state(&self, var: usize, state: &str) -> Result<usize> {
        self.variables[var]
            .state_index(state)
            .ok_or_else(|| Error::UnknownState {
                variable: self.variables[var].name.clone(),
                state: state.to_string(),
            })
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.index(name)?])
    }

    pub fn cpt(&self, child: &str) -> Option<&Cpt> {
        self.cpts[self.structure.node_index(child)?].as_ref()
    }

    pub fn prior(&self, root: &str) -> Option<&[f64]> {
        self.priors[self.structure.node_index(root)?].as_deref()
    }

    /// Replaces the prior of a root variable.
    pub fn set_prior(&mut self, root: &str, distribution: Vec<f64>) -> Result<()> {
        let i = self.index(root)?;
        if self.priors[i].is_none() {
            return Err(Error::invalid(format!("{root} has parents; only roots take priors")));
        }
        check_distribution(&distribution, self.variables[i].cardinality())
            .map_err(|e| Error::InvalidDistribution(format!("prior of {root}: {e}")))?;
        self.priors[i] = Some(distribution);
        Ok(())
    }

    /// Number of CPT rows learned from no data.
    pub fn unobserved_rows(&self) -> usize {
        self.cpts.iter().flatten().map(Cpt::unobserved_count).sum()
    }

    /// Local factor of node `v` in state `s` given the states in `assign`.
    fn factor(&self, v: usize, s: usize, assign: &[usize]) -> f64 {
        match (&self.priors[v], &self.cpts[v]) {
            (Some(prior), _) => prior[s],
            (None, Some(cpt)) => {
                let row = self.parents[v]
                    .iter()
                    .fold(0, |acc, &p| acc * self.variables[p].cardinality() + assign[p]);
                cpt.rows()[row].probs[s]
            }
            (None, None) => unreachable!("every node has a prior or a CPT"),
        }
    }

    /// Product of priors and CPT entries under a complete assignment.
    pub fn joint_probability(&self, assignment: &BTreeMap<String, String>) -> Result<f64> {
        let mut assign = vec![0; self.variables.len()];
        for (i, v) in self.variables.iter().enumerate() {
            let state = assignment
                .get(&v.name)
                .ok_or_else(|| Error::invalid(format!("assignment has no value for {}", v.name)))?;
            assign[i] = self.state(i, state)?;
        }
        if let Some(k) = assignment.keys().find(|k| self.structure.node_index(k).is_none()) {
            return Err(Error::UnknownVariable(k.clone()));
        }
        Ok((0..assign.len()).map(|v| self.factor(v, assign[v], &assign)).product())
    }

    /// Exact posterior marginals by enumerating every completion of the evidence.
    ///
    /// Nodes are visited in topological order so each local factor can be
    /// applied as soon as its node is assigned; zero-weight branches are pruned.
    pub fn infer_posterior(&self, evidence: &Evidence) -> Result<Posterior> {
        let n = self.variables.len();
        let mut fixed = vec![None; n];
        for (var, state) in evidence.iter() {
            let i = self.index(var)?;
            fixed[i] = Some(self.state(i, state)?);
        }

        let mut acc: Vec<Vec<f64>> = self.variables.iter().map(|v| vec![0.0; v.cardinality()]).collect();
        let mut assign = vec![0; n];
        let mut total = 0.0;
        self.enumerate(0, 1.0, &fixed, &mut assign, &mut acc, &mut total);

        if total <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        let marginals = self
            .variables
            .iter()
            .zip(acc)
            .zip(&fixed)
            .map(|((v, a), f)| Marginal {
                variable: v.name.clone(),
                states: v.states.clone(),
                probs: a.into_iter().map(|x| x / total).collect(),
                observed: f.is_some(),
            })
            .collect();
        Ok(Posterior {
            marginals,
            evidence_probability: total,
        })
    }

    fn enumerate(
        &self,
        depth: usize,
        weight: f64,
        fixed: &[Option<usize>],
        assign: &mut [usize],
        acc: &mut [Vec<f64>],
        total: &mut f64,
    ) {
        if depth == self.order.len() {
            *total += weight;
            for (v, &s) in assign.iter().enumerate() {
                acc[v][s] += weight;
            }
            return;
        }
        let v = self.order[depth];
        let states = match fixed[v] {
            Some(s) => s..s + 1,
            None => 0..self.variables[v].cardinality(),
        };
        for s in states {
            assign[v] = s;
            let w = weight * self.factor(v, s, assign);
            if w > 0.0 {
                self.enumerate(depth + 1, w, fixed, assign, acc, total);
            }
        }
    }
}
