use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{NetworkStructure, Variable};
use crate::discretizer::DiscreteRecord;
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptRow {
    pub probs: Vec<f64>,
    /// Number of training samples behind this row.
    pub n: u64,
    /// `false` when no sample reached this parent combination.
    pub observed: bool,
}

/// Conditional probability table of one child given its ordered parents.
///
/// Rows are stored in mixed-radix order of the parent state indices, with
/// the first parent varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    child: Variable,
    parents: Vec<Variable>,
    rows: Vec<CptRow>,
}

impl Cpt {
    pub fn new(child: Variable, parents: Vec<Variable>, rows: Vec<CptRow>) -> Result<Self> {
        let expected: usize = parents.iter().map(Variable::cardinality).product();
        if rows.len() != expected {
            return Err(Error::invalid(format!(
                "CPT of {} has {} rows, expected {expected}",
                child.name,
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            check_distribution(&row.probs, child.cardinality())
                .map_err(|e| Error::InvalidDistribution(format!("{} row {i}: {e}", child.name)))?;
        }
        Ok(Cpt { child, parents, rows })
    }

    pub fn child(&self) -> &Variable {
        &self.child
    }

    pub fn parents(&self) -> &[Variable] {
        &self.parents
    }

    pub fn rows(&self) -> &[CptRow] {
        &self.rows
    }

    pub fn row_index(&self, parent_states: &[usize]) -> usize {
        debug_assert_eq!(parent_states.len(), self.parents.len());
        parent_states
            .iter()
            .zip(&self.parents)
            .fold(0, |acc, (&s, p)| acc * p.cardinality() + s)
    }

    /// Parent state indices of row `index`.
    pub fn parent_states_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.parents.len()];
        for (slot, p) in out.iter_mut().zip(&self.parents).rev() {
            *slot = index % p.cardinality();
            index /= p.cardinality();
        }
        out
    }

    pub fn row(&self, parent_states: &[usize]) -> &CptRow {
        &self.rows[self.row_index(parent_states)]
    }

    pub fn prob(&self, parent_states: &[usize], child_state: usize) -> f64 {
        self.row(parent_states).probs[child_state]
    }

    pub fn row_by_names(&self, parent_states: &[&str]) -> Result<&CptRow> {
        if parent_states.len() != self.parents.len() {
            return Err(Error::invalid(format!(
                "expected {} parent states, got {}",
                self.parents.len(),
                parent_states.len()
            )));
        }
        let idx = parent_states
            .iter()
            .zip(&self.parents)
            .map(|(s, p)| {
                p.state_index(s).ok_or_else(|| Error::UnknownState {
                    variable: p.name.clone(),
                    state: s.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.row(&idx))
    }

    pub fn unobserved_count(&self) -> usize {
        self.rows.iter().filter(|r| !r.observed).count()
    }

    /// Rows whose `parent` is in `state`, with their parent state names.
    ///
    /// Slicing the unified BER table by `MOD` gives the per-modulation tables.
    pub fn rows_where<'a>(
        &'a self,
        parent: &str,
        state: &str,
    ) -> Result<impl Iterator<Item = (Vec<&'a str>, &'a CptRow)> + 'a> {
        let pi = self
            .parents
            .iter()
            .position(|p| p.name == parent)
            .ok_or_else(|| Error::UnknownVariable(parent.to_string()))?;
        let si = self.parents[pi].state_index(state).ok_or_else(|| Error::UnknownState {
            variable: parent.to_string(),
            state: state.to_string(),
        })?;
        Ok(self.rows.iter().enumerate().filter_map(move |(i, row)| {
            let idx = self.parent_states_of(i);
            (idx[pi] == si).then(|| (self.state_names(&idx), row))
        }))
    }

    fn state_names(&self, idx: &[usize]) -> Vec<&str> {
        idx.iter()
            .zip(&self.parents)
            .map(|(&s, p)| p.states[s].as_str())
            .collect()
    }

    pub fn to_document(&self) -> CptDocument {
        CptDocument {
            child: self.child.name.clone(),
            parents: self.parents.iter().map(|p| p.name.clone()).collect(),
            child_states: self.child.states.clone(),
            rows: self
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| CptRowDocument {
                    parent_states: self
                        .state_names(&self.parent_states_of(i))
                        .into_iter()
                        .map(String::from)
                        .collect(),
                    probs: r.probs.clone(),
                    n: r.n,
                    observed: r.observed,
                })
                .collect(),
        }
    }

    /// Rebuilds a table from its document form.
    ///
    /// Parent state orders are taken from first appearance in the rows, and
    /// the rows must then enumerate the full grid in canonical order.
    pub fn from_document(doc: CptDocument) -> Result<Self> {
        let mut parent_states: Vec<Vec<String>> = vec![Vec::new(); doc.parents.len()];
        for (i, row) in doc.rows.iter().enumerate() {
            if row.parent_states.len() != doc.parents.len() {
                return Err(Error::KeyMismatch(format!(
                    "row {i} has {} parent states, expected {}",
                    row.parent_states.len(),
                    doc.parents.len()
                )));
            }
            for (states, s) in parent_states.iter_mut().zip(&row.parent_states) {
                if !states.contains(s) {
                    states.push(s.clone());
                }
            }
        }
        let parents: Vec<Variable> = doc
            .parents
            .into_iter()
            .zip(parent_states)
            .map(|(name, states)| Variable { name, states })
            .collect();
        let child = Variable {
            name: doc.child,
            states: doc.child_states,
        };
        let rows: Vec<CptRow> = doc
            .rows
            .iter()
            .map(|r| CptRow {
                probs: r.probs.clone(),
                n: r.n,
                observed: r.observed,
            })
            .collect();
        let cpt = Cpt::new(child, parents, rows)?;
        for (i, row) in doc.rows.iter().enumerate() {
            let expected = cpt.state_names(&cpt.parent_states_of(i));
            if row
                .parent_states
                .iter()
                .map(String::as_str)
                .ne(expected.iter().copied())
            {
                return Err(Error::KeyMismatch(format!(
                    "row {i} is {:?}, expected {expected:?}; rows must cover the full parent grid in order",
                    row.parent_states
                )));
            }
        }
        Ok(cpt)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Cpt::from_document(serde_json::from_str(text)?)
    }
}

/// Serialized form of a CPT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptDocument {
    pub child: String,
    pub parents: Vec<String>,
    pub child_states: Vec<String>,
    pub rows: Vec<CptRowDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptRowDocument {
    pub parent_states: Vec<String>,
    pub probs: Vec<f64>,
    pub n: u64,
    pub observed: bool,
}

pub(crate) fn check_distribution(probs: &[f64], len: usize) -> std::result::Result<(), String> {
    if probs.len() != len {
        return Err(format!("{} entries, expected {len}", probs.len()));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(format!("entry {p} is not a probability"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(format!("entries sum to {sum}"));
    }
    Ok(())
}

/// Per-row child state counts. Tables over disjoint record batches merge by
/// addition, so learning can be split across workers in any order.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    child: Variable,
    parents: Vec<Variable>,
    counts: Vec<u64>,
}

impl CountTable {
    pub fn new(child: Variable, parents: Vec<Variable>) -> Self {
        let rows: usize = parents.iter().map(Variable::cardinality).product();
        let len = rows * child.cardinality();
        CountTable {
            child,
            parents,
            counts: vec![0; len],
        }
    }

    fn lookup(var: &Variable, record: &DiscreteRecord) -> Result<usize> {
        let state = record
            .get(&var.name)
            .ok_or_else(|| Error::invalid(format!("record has no value for {}", var.name)))?;
        var.state_index(state).ok_or_else(|| Error::UnknownState {
            variable: var.name.clone(),
            state: state.to_string(),
        })
    }

    pub fn add(&mut self, record: &DiscreteRecord) -> Result<()> {
        let mut row = 0;
        for p in &self.parents {
            row = row * p.cardinality() + Self::lookup(p, record)?;
        }
        let s = Self::lookup(&self.child, record)?;
        self.counts[row * self.child.cardinality() + s] += 1;
        Ok(())
    }

    pub fn merge(mut self, other: &CountTable) -> Result<Self> {
        if self.child != other.child || self.parents != other.parents {
            return Err(Error::KeyMismatch("count tables have different variables".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(self)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Normalizes counts into a CPT: `(count + a) / (total + a * |states|)`.
    ///
    /// A row with no samples and `a = 0` becomes uniform and is marked unobserved.
    pub fn into_cpt(self, pseudocount: f64) -> Result<Cpt> {
        if !(pseudocount.is_finite() && pseudocount >= 0.0) {
            return Err(Error::invalid(format!(
                "pseudocount {pseudocount} must be finite and >= 0"
            )));
        }
        let k = self.child.cardinality();
        let rows = self
            .counts
            .chunks_exact(k)
            .map(|c| {
                let total: u64 = c.iter().sum();
                let denom = total as f64 + pseudocount * k as f64;
                let probs = if denom > 0.0 {
                    c.iter().map(|&x| (x as f64 + pseudocount) / denom).collect()
                } else {
                    vec![1.0 / k as f64; k]
                };
                CptRow {
                    probs,
                    n: total,
                    observed: total > 0,
                }
            })
            .collect();
        Cpt::new(self.child, self.parents, rows)
    }
}

/// Maximum-likelihood CPT of `child` from discretized records.
pub fn learn_cpt(
    records: &[DiscreteRecord],
    structure: &NetworkStructure,
    variables: &[Variable],
    child: &str,
    pseudocount: f64,
) -> Result<Cpt> {
    structure.validate()?;
    let find = |name: &str| -> Result<Variable> {
        if structure.node_index(name).is_none() {
            return Err(Error::UnknownVariable(name.to_string()));
        }
        variables
            .iter()
            .find(|v| v.name == name)
            .cloned()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    };
    let child_var = find(child)?;
    let parents = structure
        .parents(child)
        .into_iter()
        .map(find)
        .collect::<Result<Vec<_>>>()?;
    let empty = CountTable::new(child_var, parents);

    let counts = records
        .par_chunks(4096)
        .map(|chunk| {
            let mut t = empty.clone();
            chunk.iter().try_for_each(|r| t.add(r))?;
            Ok(t)
        })
        .try_reduce(|| empty.clone(), |a, b| a.merge(&b))?;
    counts.into_cpt(pseudocount)
}
