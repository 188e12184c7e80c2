//! Clique priors and local characteristics learned from data.

mod encode;
mod nnor;
mod sop;

pub use encode::{decode_index, encode_index, encode_tuple};
pub use nnor::{
    nnor_learn, score_assignments, FillStep, KMap, NnorResult, Provenance, DEFAULT_ASSIGNMENT_CAP,
    UNANIMITY_TOLERANCE,
};
pub use sop::{sop_minimize, SopFormula, Term, TruthTable, MAX_SOP_VARS};

use std::fmt;
use std::str::FromStr;

use crate::attr::{Attr, AttrSet};
use crate::error::{Error, Result};
use crate::network::{BeliefNetwork, ConditionalTable, CountTable};
use crate::relation::Relation;
use crate::table::CliquePotential;

/// Multiset projection onto `clique`, normalized by the row count.
pub fn frequency_prior(r: &Relation, clique: &AttrSet) -> Result<CliquePotential> {
    r.frequency(clique)
}

/// `(C(x, π) + 1) / (C(π) + V_X)` for one parent configuration.
pub fn dirichlet_row(counts: &[u64], v_x: usize) -> Result<Vec<f64>> {
    if v_x < 1 {
        return Err(Error::schema("child domain size must be at least 1"));
    }
    if counts.len() != v_x {
        return Err(Error::schema(format!("{} counts for a domain of size {v_x}", counts.len())));
    }
    let total: u64 = counts.iter().sum();
    let denom = total as f64 + v_x as f64;
    Ok(counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect())
}

/// Dirichlet estimate of every row; unseen parent configurations are uniform.
pub fn dirichlet_lc(counts: &CountTable) -> Result<ConditionalTable> {
    let v_x = counts.child.size();
    let rows = counts
        .counts
        .iter()
        .map(|c| dirichlet_row(c, v_x).map(Some))
        .collect::<Result<Vec<_>>>()?;
    ConditionalTable::from_rows(counts.child.clone(), counts.parents.clone(), rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Frequency,
    Dirichlet,
    Nnor,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frequency" => Ok(Method::Frequency),
            "dirichlet" => Ok(Method::Dirichlet),
            "nnor" => Ok(Method::Nnor),
            _ => Err(Error::Config(format!("unknown learning method {s:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Frequency => "frequency",
            Method::Dirichlet => "dirichlet",
            Method::Nnor => "nnor",
        })
    }
}

/// A learned conditional table with per-row provenance and, for NN/OR, the
/// minimal formula of each completed 0/1 map keyed by child value.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedLc {
    pub table: ConditionalTable,
    pub provenance: Vec<Provenance>,
    pub formulas: Vec<(String, SopFormula)>,
}

/// Learns `P(child | parents)` from counts with the given method.
pub fn learn_lc(counts: &CountTable, method: Method, cap: u64) -> Result<LearnedLc> {
    let n = counts.counts.len();
    match method {
        Method::Frequency => {
            let table = counts.frequency_table();
            let provenance = (0..n)
                .map(|k| {
                    if table.row_at(k).is_some() {
                        Provenance::Data
                    } else {
                        Provenance::Undefined
                    }
                })
                .collect();
            Ok(LearnedLc {
                table,
                provenance,
                formulas: Vec::new(),
            })
        }
        Method::Dirichlet => Ok(LearnedLc {
            table: dirichlet_lc(counts)?,
            provenance: vec![Provenance::Dirichlet; n],
            formulas: Vec::new(),
        }),
        Method::Nnor => learn_nnor(counts, cap),
    }
}

/// One map per child value (only the last value for a binary child); rows
/// are renormalized after completion.
fn learn_nnor(counts: &CountTable, cap: u64) -> Result<LearnedLc> {
    let freq = counts.frequency_table();
    let v_x = counts.child.size();
    let values: Vec<usize> = if v_x == 2 { vec![1] } else { (0..v_x).collect() };
    let mut completed = Vec::new();
    let mut formulas = Vec::new();
    for &v in &values {
        let cells = (0..freq.num_rows()).map(|k| freq.row_at(k).map(|r| r[v])).collect();
        let map = KMap::new(counts.parents.clone(), cells)?;
        let res = nnor_learn(&map, cap)?;
        if let Some(f) = &res.formula {
            formulas.push((counts.child.value(v as u32).to_string(), f.clone()));
        }
        completed.push(res);
    }
    let rows = (0..freq.num_rows())
        .map(|k| {
            if let Some(r) = freq.row_at(k) {
                return Some(r.to_vec());
            }
            let row = if v_x == 2 {
                let p = completed[0].map.cells[k].unwrap();
                vec![1.0 - p, p]
            } else {
                let raw: Vec<f64> = completed.iter().map(|c| c.map.cells[k].unwrap()).collect();
                let s: f64 = raw.iter().sum();
                if s > 0.0 {
                    raw.iter().map(|p| p / s).collect()
                } else {
                    vec![1.0 / v_x as f64; v_x]
                }
            };
            Some(row)
        })
        .collect();
    let provenance = completed[0].provenance.clone();
    Ok(LearnedLc {
        table: ConditionalTable::from_rows(counts.child.clone(), counts.parents.clone(), rows)?,
        provenance,
        formulas,
    })
}

/// Learns one table per network node, children in natural order.
pub fn learn_network(r: &Relation, bn: &BeliefNetwork, method: Method, cap: u64) -> Result<Vec<LearnedLc>> {
    bn.node_names()
        .iter()
        .map(|child: &Attr| {
            let counts = CountTable::from_relation(r, child, &bn.parents(child))?;
            learn_lc(&counts, method, cap)
        })
        .collect()
}
