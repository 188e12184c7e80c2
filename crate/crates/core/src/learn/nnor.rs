//! Nearest-neighbor completion of unseen parent configurations, with ties
//! settled by the simplest logic formula.

use std::fmt;

use crate::attr::{configurations, offset, AttributeDecl};
use crate::error::{Error, Result};
use crate::learn::sop::{sop_minimize, SopFormula, TruthTable, MAX_SOP_VARS};

/// Values within this distance count as equal.
pub const UNANIMITY_TOLERANCE: f64 = 1e-9;

/// Default bound on the number of joint 0/1 assignments scored.
pub const DEFAULT_ASSIGNMENT_CAP: u64 = 1 << 16;

/// Where a learned row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Data,
    NnFill,
    OrFill,
    MeanFill,
    Dirichlet,
    /// No data and no completion (frequency method).
    Undefined,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Data => "data",
            Provenance::NnFill => "nn-fill",
            Provenance::OrFill => "or-fill",
            Provenance::MeanFill => "mean-fill",
            Provenance::Dirichlet => "dirichlet",
            Provenance::Undefined => "undefined",
        })
    }
}

/// A value in `[0, 1]` or unseen for every parent configuration. Two cells
/// are neighbors when they differ in one attribute by one step of its
/// declared domain order.
#[derive(Debug, Clone, PartialEq)]
pub struct KMap {
    pub parents: Vec<AttributeDecl>,
    pub cells: Vec<Option<f64>>,
}

impl KMap {
    pub fn new(parents: Vec<AttributeDecl>, cells: Vec<Option<f64>>) -> Result<Self> {
        let n: usize = parents.iter().map(AttributeDecl::size).product();
        if cells.len() != n {
            return Err(Error::schema(format!("map needs {n} cells, got {}", cells.len())));
        }
        if let Some(v) = cells.iter().flatten().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::schema(format!("map value {v} lies outside [0,1]")));
        }
        Ok(KMap { parents, cells })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parents.iter().map(AttributeDecl::size).collect()
    }

    pub fn configs(&self) -> Vec<Vec<u32>> {
        configurations(&self.sizes()).collect()
    }

    pub fn unseen(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&k| self.cells[k].is_none()).collect()
    }

    pub fn neighbors(&self, k: usize) -> Vec<usize> {
        let sizes = self.sizes();
        let cfg = configurations(&sizes).nth(k).unwrap();
        let mut out = Vec::new();
        for i in 0..cfg.len() {
            for step in [-1i64, 1] {
                let v = cfg[i] as i64 + step;
                if v >= 0 && (v as usize) < sizes[i] {
                    let mut c = cfg.clone();
                    c[i] = v as u32;
                    out.push(offset(&sizes, &c));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_binary(&self) -> bool {
        self.parents.iter().all(|p| p.size() == 2)
    }

    /// Every known value is 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.cells
            .iter()
            .flatten()
            .all(|&v| v.abs() <= UNANIMITY_TOLERANCE || (v - 1.0).abs() <= UNANIMITY_TOLERANCE)
    }

    fn names(&self) -> Vec<String> {
        self.parents.iter().map(|p| p.name.to_string()).collect()
    }

    /// The Boolean function of a complete binary deterministic map.
    pub fn truth_table(&self) -> Result<TruthTable> {
        if !self.is_binary() || !self.is_deterministic() {
            return Err(Error::schema("only binary 0/1 maps have a truth table"));
        }
        let bits = self
            .cells
            .iter()
            .map(|c| c.map(|v| v > 0.5).ok_or_else(|| Error::schema("map has unseen cells")))
            .collect::<Result<Vec<_>>>()?;
        TruthTable::new(self.names(), bits)
    }

    pub fn render_cell(&self, k: usize) -> String {
        let cfg = configurations(&self.sizes()).nth(k).unwrap();
        let vals: Vec<&str> = self.parents.iter().zip(&cfg).map(|(d, &c)| d.value(c)).collect();
        format!("({})", vals.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FillStep {
    pub cell: usize,
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnorResult {
    pub map: KMap,
    pub provenance: Vec<Provenance>,
    /// Formula of the completed map when it is binary and 0/1-valued.
    pub formula: Option<SopFormula>,
    /// Fills in the order they were made.
    pub steps: Vec<FillStep>,
}

fn known_neighbors(map: &KMap, k: usize) -> Vec<f64> {
    map.neighbors(k).into_iter().filter_map(|j| map.cells[j]).collect()
}

fn unanimous(vals: &[f64]) -> bool {
    !vals.is_empty() && vals.iter().all(|v| (v - vals[0]).abs() <= UNANIMITY_TOLERANCE)
}

fn mean(vals: &[f64]) -> f64 {
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// The next unseen cell to fill: most known neighbors first, then the
/// smallest configuration, among cells satisfying `eligible`.
fn next_cell(map: &KMap, eligible: impl Fn(&[f64]) -> bool) -> Option<(usize, Vec<f64>)> {
    let mut best: Option<(usize, Vec<f64>)> = None;
    for k in map.unseen() {
        let vals = known_neighbors(map, k);
        if eligible(&vals) && best.as_ref().map_or(true, |(_, b)| vals.len() > b.len()) {
            best = Some((k, vals));
        }
    }
    best
}

/// Completes `map` in three phases: unanimous nearest neighbors, then the
/// 0/1 assignment of the remaining cells with the simplest formula (binary
/// deterministic maps only), then neighbor means.
pub fn nnor_learn(map: &KMap, cap: u64) -> Result<NnorResult> {
    if map.cells.iter().all(Option::is_none) {
        return Err(Error::NoData("every cell of the map is unseen".into()));
    }
    let mut out = map.clone();
    let mut provenance: Vec<Provenance> = map
        .cells
        .iter()
        .map(|c| if c.is_some() { Provenance::Data } else { Provenance::Undefined })
        .collect();
    let mut steps = Vec::new();
    let mut record = |out: &mut KMap, k: usize, value: f64, p: Provenance, provenance: &mut Vec<Provenance>| {
        out.cells[k] = Some(value);
        provenance[k] = p;
        steps.push(FillStep {
            cell: k,
            value,
            provenance: p,
        });
    };

    while let Some((k, vals)) = next_cell(&out, unanimous) {
        record(&mut out, k, mean(&vals), Provenance::NnFill, &mut provenance);
    }

    let remaining = out.unseen();
    let binary = out.is_binary() && out.is_deterministic() && out.parents.len() <= MAX_SOP_VARS;
    if !remaining.is_empty() && binary {
        let scored = score_assignments(&out, cap)?;
        let (assignment, _) = scored
            .into_iter()
            .min_by(|(a, fa), (b, fb)| {
                let ones = |x: &[bool]| x.iter().filter(|&&v| v).count();
                fa.complexity()
                    .cmp(&fb.complexity())
                    .then(ones(a).cmp(&ones(b)))
                    .then(a.cmp(b))
            })
            .unwrap();
        for (&k, &v) in remaining.iter().zip(&assignment) {
            record(&mut out, k, if v { 1.0 } else { 0.0 }, Provenance::OrFill, &mut provenance);
        }
    }

    while let Some((k, vals)) = next_cell(&out, |v| !v.is_empty()) {
        record(&mut out, k, mean(&vals), Provenance::MeanFill, &mut provenance);
    }

    let formula = if out.is_binary() && out.is_deterministic() && out.parents.len() <= MAX_SOP_VARS {
        Some(sop_minimize(&out.truth_table()?)?)
    } else {
        None
    };
    Ok(NnorResult {
        map: out,
        provenance,
        formula,
        steps,
    })
}

/// Minimal formulas for every 0/1 assignment of the unseen cells, in
/// lexicographic assignment order (earliest cell most significant).
pub fn score_assignments(map: &KMap, cap: u64) -> Result<Vec<(Vec<bool>, SopFormula)>> {
    if !map.is_binary() || !map.is_deterministic() {
        return Err(Error::schema("assignment scoring needs a binary 0/1 map"));
    }
    let unseen = map.unseen();
    if unseen.len() >= 64 || (1u64 << unseen.len()) > cap {
        return Err(Error::Capacity(format!(
            "{} unseen cells give more than {cap} assignments",
            unseen.len()
        )));
    }
    let n = unseen.len();
    let mut out = Vec::with_capacity(1 << n);
    for a in 0u64..1 << n {
        let assignment: Vec<bool> = (0..n).map(|i| a >> (n - 1 - i) & 1 == 1).collect();
        let mut filled = map.clone();
        for (&k, &v) in unseen.iter().zip(&assignment) {
            filled.cells[k] = Some(if v { 1.0 } else { 0.0 });
        }
        out.push((assignment, sop_minimize(&filled.truth_table()?)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(n: &str) -> AttributeDecl {
        AttributeDecl::new(n, &["-1", "1"]).unwrap()
    }

    fn map(names: &[&str], cells: &[Option<f64>]) -> KMap {
        KMap::new(names.iter().map(|n| bin(n)).collect(), cells.to_vec()).unwrap()
    }

    // cells over (u1, u2, u3) in configuration order 000..111
    fn u7_map() -> KMap {
        map(
            &["u1", "u2", "u3"],
            &[Some(0.0), Some(1.0), None, Some(0.0), Some(1.0), None, Some(0.0), Some(1.0)],
        )
    }

    #[test]
    fn u7_phase_one_fills_both_cells() {
        let r = nnor_learn(&u7_map(), DEFAULT_ASSIGNMENT_CAP).unwrap();
        assert_eq!(r.map.cells[2], Some(0.0));
        assert_eq!(r.map.cells[5], Some(1.0));
        assert_eq!(r.provenance[2], Provenance::NnFill);
        assert_eq!(r.provenance[5], Provenance::NnFill);
        let f = r.formula.unwrap();
        assert_eq!((f.to_string(), f.complexity()), ("u1~u2 + u1u3 + ~u2u3".into(), 5));
    }

    #[test]
    fn u7_assignment_scores() {
        let scores: Vec<usize> = score_assignments(&u7_map(), DEFAULT_ASSIGNMENT_CAP)
            .unwrap()
            .iter()
            .map(|(_, f)| f.complexity())
            .collect();
        assert_eq!(scores, vec![8, 5, 11, 8]);
    }

    #[test]
    fn neighbors_follow_domain_steps() {
        let tern = AttributeDecl::new("t", &["-1", "0", "1"]).unwrap();
        let m = KMap::new(vec![tern, bin("b")], vec![Some(0.0); 6]).unwrap();
        // (-1,-1) is adjacent to (0,-1) and (-1,1) but not to (1,-1)
        assert_eq!(m.neighbors(0), vec![1, 2]);
        assert_eq!(m.neighbors(2), vec![0, 3, 4]);
    }

    #[test]
    fn complete_map_is_unchanged() {
        let m = map(&["a", "b"], &[Some(0.0), Some(1.0), Some(1.0), Some(1.0)]);
        let r = nnor_learn(&m, DEFAULT_ASSIGNMENT_CAP).unwrap();
        assert_eq!(r.map, m);
        assert!(r.steps.is_empty());
        assert_eq!(r.formula.unwrap().to_string(), "a + b");
    }

    #[test]
    fn probabilistic_map_uses_means() {
        let m = map(&["a", "b"], &[Some(0.2), Some(0.6), Some(0.8), None]);
        let r = nnor_learn(&m, DEFAULT_ASSIGNMENT_CAP).unwrap();
        assert!((r.map.cells[3].unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(r.provenance[3], Provenance::MeanFill);
        assert!(r.formula.is_none());
    }

    #[test]
    fn errors() {
        let m = map(&["a"], &[None, None]);
        assert!(matches!(nnor_learn(&m, DEFAULT_ASSIGNMENT_CAP), Err(Error::NoData(_))));
        assert!(matches!(score_assignments(&u7_map(), 2), Err(Error::Capacity(_))));
        assert!(KMap::new(vec![bin("a")], vec![Some(1.5), None]).is_err());
        assert!(KMap::new(vec![bin("a")], vec![None]).is_err());
    }
}
