use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bn::{Cpt, CptDocument, CptRowDocument};
use crate::{Error, Result};

/// Row sums of transcribed tables only need to hold to the printed precision.
const REFERENCE_SUM_TOL: f64 = 1e-3;

const PAPER_TABLES: &str = include_str!("../../data/reference_tables.json");

/// A possibly partial set of CPT rows keyed by parent-state tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCpd {
    pub child: String,
    pub parents: Vec<String>,
    pub child_states: Vec<String>,
    rows: Vec<(Vec<String>, Vec<f64>)>,
    index: HashMap<Vec<String>, usize>,
}

impl ReferenceCpd {
    pub fn from_document(doc: CptDocument) -> Result<Self> {
        let mut rows = Vec::with_capacity(doc.rows.len());
        let mut index = HashMap::new();
        for (i, r) in doc.rows.into_iter().enumerate() {
            if r.parent_states.len() != doc.parents.len() {
                return Err(Error::KeyMismatch(format!(
                    "row {i} has {} parent states, expected {}",
                    r.parent_states.len(),
                    doc.parents.len()
                )));
            }
            if r.probs.len() != doc.child_states.len() || r.probs.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
                return Err(Error::InvalidDistribution(format!(
                    "row {i} is not a distribution over the child states"
                )));
            }
            let sum: f64 = r.probs.iter().sum();
            if (sum - 1.0).abs() > REFERENCE_SUM_TOL {
                return Err(Error::InvalidDistribution(format!("row {i} sums to {sum}")));
            }
            if index.insert(r.parent_states.clone(), i).is_some() {
                return Err(Error::KeyMismatch(format!("row {:?} appears twice", r.parent_states)));
            }
            rows.push((r.parent_states, r.probs));
        }
        Ok(ReferenceCpd {
            child: doc.child,
            parents: doc.parents,
            child_states: doc.child_states,
            rows,
            index,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(text)?)
    }

    pub fn from_cpt(cpt: &Cpt) -> Self {
        Self::from_document(cpt.to_document()).expect("a valid CPT is a valid reference")
    }

    /// The published BER rows for DBPSK, DQPSK and D8PSK: every row with
    /// EbN0_1 or C/I_1, and the EbN0_6 rows for C/I_2 through C/I_6.
    pub fn paper() -> Self {
        Self::from_json(PAPER_TABLES).expect("bundled reference tables are valid")
    }

    pub fn to_document(&self) -> CptDocument {
        CptDocument {
            child: self.child.clone(),
            parents: self.parents.clone(),
            child_states: self.child_states.clone(),
            rows: self
                .rows
                .iter()
                .map(|(k, p)| CptRowDocument {
                    parent_states: k.clone(),
                    probs: p.clone(),
                    n: 0,
                    observed: true,
                })
                .collect(),
        }
    }

    pub fn get(&self, parent_states: &[String]) -> Option<&[f64]> {
        self.index.get(parent_states).map(|&i| self.rows[i].1.as_slice())
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[String], &[f64])> {
        self.rows.iter().map(|(k, p)| (k.as_slice(), p.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Degenerate rows put all mass on one state; interior rows do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowClass {
    Degenerate,
    Interior,
}

impl RowClass {
    pub fn of(probs: &[f64]) -> Self {
        if probs.iter().any(|&p| p >= 1.0 - 1e-9) {
            RowClass::Degenerate
        } else {
            RowClass::Interior
        }
    }
}

/// Largest acceptable total variation distance per row class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub degenerate: f64,
    pub interior: f64,
}

impl Default for Thresholds {
    /// Interior rows depend on unpublished simulation constants, so by
    /// default only degenerate rows gate the verdict.
    fn default() -> Self {
        Thresholds {
            degenerate: 0.05,
            interior: 1.0,
        }
    }
}

impl Thresholds {
    pub fn for_class(&self, class: RowClass) -> f64 {
        match class {
            RowClass::Degenerate => self.degenerate,
            RowClass::Interior => self.interior,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowComparison {
    pub parent_states: Vec<String>,
    pub class: RowClass,
    pub reference: Vec<f64>,
    pub learned: Vec<f64>,
    pub distance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub parents: Vec<String>,
    pub child_states: Vec<String>,
    pub thresholds: Thresholds,
    pub rows: Vec<RowComparison>,
    pub max_distance: f64,
    pub mean_distance: f64,
    pub passed: bool,
}

impl ComparisonReport {
    pub fn failures(&self) -> impl Iterator<Item = &RowComparison> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Fixed-width text table, one line per row.
    pub fn render_table(&self) -> String {
        let fmt_probs = |p: &[f64]| p.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<36} {:<10} {:<30} {:<30} {:>8} verdict",
            self.parents.join(" "),
            "class",
            "reference",
            "learned",
            "TV"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<36} {:<10} {:<30} {:<30} {:>8.4} {}",
                r.parent_states.join(" "),
                format!("{:?}", r.class).to_lowercase(),
                fmt_probs(&r.reference),
                fmt_probs(&r.learned),
                r.distance,
                if r.pass { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "rows {}  max TV {:.4}  mean TV {:.4}  thresholds degenerate {} interior {}  => {}",
            self.rows.len(),
            self.max_distance,
            self.mean_distance,
            self.thresholds.degenerate,
            self.thresholds.interior,
            if self.passed { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// `½ Σ |p_i − q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Compares every reference row against the matching learned row.
pub fn compare_tables(
    learned: &ReferenceCpd,
    reference: &ReferenceCpd,
    thresholds: Thresholds,
) -> Result<ComparisonReport> {
    if learned.child != reference.child || learned.parents != reference.parents {
        return Err(Error::KeyMismatch(format!(
            "learned table is {} | {:?}, reference is {} | {:?}",
            learned.child, learned.parents, reference.child, reference.parents
        )));
    }
    if learned.child_states != reference.child_states {
        return Err(Error::KeyMismatch(format!(
            "child states differ: {:?} vs {:?}",
            learned.child_states, reference.child_states
        )));
    }
    let rows = reference
        .rows()
        .map(|(key, q)| {
            let p = learned
                .get(key)
                .ok_or_else(|| Error::KeyMismatch(format!("learned table has no row {key:?}")))?;
            let class = RowClass::of(q);
            let distance = total_variation(p, q);
            Ok(RowComparison {
                parent_states: key.to_vec(),
                class,
                reference: q.to_vec(),
                learned: p.to_vec(),
                distance,
                pass: distance <= thresholds.for_class(class),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_distance = rows.iter().map(|r| r.distance).fold(0.0, f64::max);
    let mean_distance = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.distance).sum::<f64>() / rows.len() as f64
    };
    Ok(ComparisonReport {
        parents: reference.parents.clone(),
        child_states: reference.child_states.clone(),
        thresholds,
        passed: rows.iter().all(|r| r.pass),
        rows,
        max_distance,
        mean_distance,
    })
}

pub fn compare_cpt(learned: &Cpt, reference: &ReferenceCpd, thresholds: Thresholds) -> Result<ComparisonReport> {
    compare_tables(&ReferenceCpd::from_cpt(learned), reference, thresholds)
}
