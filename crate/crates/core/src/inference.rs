//! Belief extraction, Jeffrey updating and propagation over a junction tree,
//! plus a brute-force oracle over the universal relation.

use std::collections::BTreeMap;
use std::fmt;

use crate::attr::{fmt_set, offset, Attr, AttrSet, AttributeDecl};
use crate::decompose::JunctionTree;
use crate::error::{Error, Result};
use crate::io::EvidenceItem;
use crate::relation::Relation;
use crate::table::{CliquePotential, Distribution, FrequencyTable};

pub use crate::network::MarginalConstraint as JeffreyConstraint;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    CliquePropagation,
    UniversalOracle,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::CliquePropagation => "clique-propagation",
            Engine::UniversalOracle => "universal-oracle",
        })
    }
}

/// Resolves evidence against attribute declarations. Hard evidence becomes a
/// point mass; marginal blocks list nonzero entries, the rest are zero.
pub fn compile_evidence(items: &[EvidenceItem], decls: &[AttributeDecl]) -> Result<Vec<JeffreyConstraint>> {
    let lookup: BTreeMap<&Attr, &AttributeDecl> = decls.iter().map(|d| (&d.name, d)).collect();
    let decl = |a: &Attr| {
        lookup
            .get(a)
            .map(|d| (*d).clone())
            .ok_or_else(|| Error::schema(format!("evidence names unknown attribute {a}")))
    };
    items
        .iter()
        .map(|item| match item {
            EvidenceItem::Hard(a, v) => {
                let d = decl(a)?;
                let i = d.index_of(v)?;
                JeffreyConstraint::point_mass(vec![d], &[i])
            }
            EvidenceItem::Marginal(attrs, entries) => {
                let mut sorted: Vec<Attr> = attrs.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != attrs.len() {
                    return Err(Error::schema("marginal block repeats an attribute"));
                }
                let vars = sorted.iter().map(decl).collect::<Result<Vec<_>>>()?;
                // position of each sorted attribute in the block's own order
                let perm: Vec<usize> = sorted.iter().map(|a| attrs.iter().position(|b| b == a).unwrap()).collect();
                let sizes: Vec<usize> = vars.iter().map(AttributeDecl::size).collect();
                let mut table = Distribution::zeros(vars.clone());
                let mut seen = vec![false; table.len()];
                for (values, p) in entries {
                    let cfg = perm
                        .iter()
                        .zip(&vars)
                        .map(|(&k, d)| d.index_of(&values[k]))
                        .collect::<Result<Vec<_>>>()?;
                    let k = offset(&sizes, &cfg);
                    if std::mem::replace(&mut seen[k], true) {
                        return Err(Error::schema(format!(
                            "marginal over {} lists ({}) twice",
                            fmt_set(&table.scheme()),
                            values.join(",")
                        )));
                    }
                    table.values_mut()[k] = *p;
                }
                JeffreyConstraint::new(table)
            }
        })
        .collect()
}

/// For each configuration of `big`, the offset of its restriction to
/// `small_vars` (which must all occur in `big`).
fn restriction_offsets(big: &Distribution, small_vars: &[AttributeDecl]) -> Result<Vec<usize>> {
    let pos = small_vars
        .iter()
        .map(|s| {
            big.vars()
                .iter()
                .position(|b| b.name == s.name)
                .ok_or_else(|| Error::Scope(format!("{} is not in table scope", s.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = small_vars.iter().map(AttributeDecl::size).collect();
    Ok(big
        .iter()
        .map(|(cfg, _)| {
            let sub: Vec<u32> = pos.iter().map(|&i| cfg[i]).collect();
            offset(&sizes, &sub)
        })
        .collect())
}

/// Marginal of `p` on `x`, which must lie inside the clique.
pub fn belief_extract(p: &CliquePotential, x: &AttrSet) -> Result<FrequencyTable> {
    p.marginal(x)
}

/// `P'(s) = P(s) · Q(x_s) / P(X = x_s)`.
pub fn jeffrey_update(p: &CliquePotential, q: &JeffreyConstraint) -> Result<CliquePotential> {
    let qt = q.table();
    let idx = restriction_offsets(p, qt.vars())?;
    let mut m = vec![0.0; qt.len()];
    for (k, v) in p.values().iter().enumerate() {
        m[idx[k]] += v;
    }
    for (x, (&target, &current)) in qt.values().iter().zip(&m).enumerate() {
        if target > 0.0 && current <= 0.0 {
            let cfg = qt.iter().nth(x).unwrap().0;
            return Err(Error::IncompatibleEvidence(format!(
                "({}) = ({}) has zero prior mass",
                fmt_set(&qt.scheme()),
                qt.render(&cfg).join(",")
            )));
        }
    }
    let mut out = p.clone();
    for (k, v) in out.values_mut().iter_mut().enumerate() {
        let x = idx[k];
        *v = if m[x] > 0.0 { *v * qt.values()[x] / m[x] } else { 0.0 };
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    /// Calibration is reached when every separator disagreement is below this.
    pub tolerance: f64,
    /// Sweeps allowed per constraint before giving up.
    pub max_sweeps: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

impl PropagateOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Config("at least one sweep must be allowed".into()));
        }
        Ok(())
    }
}

/// A junction tree with one potential per clique and one stored potential per
/// separator.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedModel {
    pub tree: JunctionTree,
    pub potentials: Vec<CliquePotential>,
    separators: Vec<Distribution>,
}

fn clique_vars(clique: &AttrSet, decls: &BTreeMap<Attr, AttributeDecl>) -> Result<Vec<AttributeDecl>> {
    clique
        .iter()
        .map(|a| {
            decls
                .get(a)
                .cloned()
                .ok_or_else(|| Error::schema(format!("no domain declared for {a}")))
        })
        .collect()
}

impl CalibratedModel {
    /// Uses the given clique priors as they are; separators start from the
    /// marginal of each edge's first clique.
    pub fn from_priors(tree: JunctionTree, potentials: Vec<CliquePotential>) -> Result<Self> {
        if potentials.len() != tree.cliques.len() {
            return Err(Error::schema(format!(
                "{} potentials for {} cliques",
                potentials.len(),
                tree.cliques.len()
            )));
        }
        for (c, p) in tree.cliques.iter().zip(&potentials) {
            if &p.scheme() != c {
                return Err(Error::schema(format!(
                    "potential over {} given for clique {}",
                    fmt_set(&p.scheme()),
                    fmt_set(c)
                )));
            }
        }
        let separators = tree
            .edges
            .iter()
            .map(|e| potentials[e.a].marginal(&e.separator))
            .collect::<Result<Vec<_>>>()?;
        Ok(CalibratedModel {
            tree,
            potentials,
            separators,
        })
    }

    /// Frequency priors of `r` on every clique.
    pub fn from_relation(tree: JunctionTree, r: &Relation) -> Result<Self> {
        let priors = tree
            .cliques
            .iter()
            .map(|c| r.frequency(c))
            .collect::<Result<Vec<_>>>()?;
        Self::from_priors(tree, priors)
    }

    /// The normalized product of `factors`, each assigned to the first clique
    /// covering its scheme, calibrated by one collect/distribute pass.
    pub fn from_factors(tree: JunctionTree, factors: &[Distribution]) -> Result<Self> {
        let decls: BTreeMap<Attr, AttributeDecl> = factors
            .iter()
            .flat_map(|f| f.vars().iter().map(|d| (d.name.clone(), d.clone())))
            .collect();
        let mut potentials = tree
            .cliques
            .iter()
            .map(|c| Ok(Distribution::filled(clique_vars(c, &decls)?, 1.0)))
            .collect::<Result<Vec<_>>>()?;
        for f in factors {
            let c = tree
                .covering_clique(&f.scheme())
                .ok_or_else(|| Error::Coverage(format!("no clique covers {}", fmt_set(&f.scheme()))))?;
            let idx = restriction_offsets(&potentials[c], f.vars())?;
            for (k, v) in potentials[c].values_mut().iter_mut().enumerate() {
                *v *= f.values()[idx[k]];
            }
        }
        let separators = tree
            .edges
            .iter()
            .map(|e| Ok(Distribution::filled(clique_vars(&e.separator, &decls)?, 1.0)))
            .collect::<Result<Vec<_>>>()?;
        let mut model = CalibratedModel {
            tree,
            potentials,
            separators,
        };
        model.sweep();
        let z = model.potentials.first().map_or(1.0, Distribution::total);
        if z <= 0.0 {
            return Err(Error::NoData("factor product has zero mass".into()));
        }
        model.potentials.iter_mut().for_each(|p| p.values_mut().iter_mut().for_each(|v| *v /= z));
        model.separators.iter_mut().for_each(|p| p.values_mut().iter_mut().for_each(|v| *v /= z));
        Ok(model)
    }

    /// Passes the separator marginal of `from` to `to` across edge `e`.
    fn pass(&mut self, from: usize, to: usize, e: usize) {
        let sep = &self.separators[e];
        let new = self.potentials[from].marginal(&sep.scheme()).expect("separator inside clique");
        let idx = restriction_offsets(&self.potentials[to], new.vars()).expect("separator inside clique");
        let (old, newv) = (self.separators[e].values(), new.values());
        for (k, v) in self.potentials[to].values_mut().iter_mut().enumerate() {
            let x = idx[k];
            *v = if old[x] > 0.0 { *v * newv[x] / old[x] } else { 0.0 };
        }
        self.separators[e] = new;
    }

    /// Collect to the root, then distribute from it.
    fn sweep(&mut self) {
        let order = self.tree.rooted();
        for &(j, up) in order.iter().rev() {
            if let Some((i, e)) = up {
                self.pass(j, i, e);
            }
        }
        for &(j, up) in order.iter() {
            if let Some((i, e)) = up {
                self.pass(i, j, e);
            }
        }
    }

    /// Largest difference between the two clique marginals on any separator.
    pub fn max_separator_disagreement(&self) -> f64 {
        self.tree
            .edges
            .iter()
            .map(|e| {
                let a = self.potentials[e.a].marginal(&e.separator).unwrap();
                let b = self.potentials[e.b].marginal(&e.separator).unwrap();
                a.max_abs_diff(&b)
            })
            .fold(0.0, f64::max)
    }

    /// Applies each constraint to its first covering clique, in order, and
    /// sweeps until calibrated after each one.
    pub fn propagate(&self, constraints: &[JeffreyConstraint], opts: PropagateOptions) -> Result<CalibratedModel> {
        opts.validate()?;
        let mut m = self.clone();
        let calibrate = |m: &mut CalibratedModel| -> Result<()> {
            let mut sweeps = 0;
            while m.max_separator_disagreement() >= opts.tolerance {
                if sweeps == opts.max_sweeps {
                    return Err(Error::Convergence(sweeps));
                }
                m.sweep();
                sweeps += 1;
            }
            Ok(())
        };
        calibrate(&mut m)?;
        for q in constraints {
            let c = m.tree.covering_clique(&q.scheme()).ok_or_else(|| {
                Error::Scope(format!("no clique contains the constraint set {}", fmt_set(&q.scheme())))
            })?;
            m.potentials[c] = jeffrey_update(&m.potentials[c], q)?;
            calibrate(&mut m)?;
        }
        Ok(m)
    }

    /// Marginal on `x` from the first clique containing it.
    pub fn marginal(&self, x: &AttrSet) -> Result<FrequencyTable> {
        let c = self
            .tree
            .covering_clique(x)
            .ok_or_else(|| Error::Scope(format!("no clique contains {}", fmt_set(x))))?;
        belief_extract(&self.potentials[c], x)
    }

    pub fn query(
        &self,
        constraints: &[JeffreyConstraint],
        targets: &[AttrSet],
        opts: PropagateOptions,
    ) -> Result<Vec<FrequencyTable>> {
        for t in targets {
            if self.tree.covering_clique(t).is_none() {
                return Err(Error::Scope(format!("no clique contains the target {}", fmt_set(t))));
            }
        }
        let post = self.propagate(constraints, opts)?;
        targets.iter().map(|t| post.marginal(t)).collect()
    }
}

/// Exact marginals of the universal relation's frequencies after Jeffrey
/// reweighting of its rows by each constraint in turn.
pub fn oracle_query(
    universal: &Relation,
    constraints: &[JeffreyConstraint],
    targets: &[AttrSet],
) -> Result<Vec<FrequencyTable>> {
    let posterior = oracle_posterior(universal, constraints)?;
    targets.iter().map(|t| posterior.marginal(t)).collect()
}

/// Full joint as a sparse row list.
#[derive(Debug, Clone)]
pub struct OraclePosterior {
    scheme: Vec<AttributeDecl>,
    rows: Vec<(Vec<u32>, f64)>,
}

impl OraclePosterior {
    fn positions(&self, x: &[AttributeDecl]) -> Vec<usize> {
        x.iter()
            .map(|d| self.scheme.iter().position(|s| s.name == d.name).unwrap())
            .collect()
    }

    fn vars(&self, x: &AttrSet) -> Result<Vec<AttributeDecl>> {
        x.iter()
            .map(|a| {
                self.scheme
                    .iter()
                    .find(|d| &d.name == a)
                    .cloned()
                    .ok_or_else(|| Error::Scope(format!("{a} is not in the universal scheme")))
            })
            .collect()
    }

    pub fn marginal(&self, x: &AttrSet) -> Result<FrequencyTable> {
        let vars = self.vars(x)?;
        let pos = self.positions(&vars);
        let sizes: Vec<usize> = vars.iter().map(AttributeDecl::size).collect();
        let mut out = Distribution::zeros(vars);
        for (t, w) in &self.rows {
            let sub: Vec<u32> = pos.iter().map(|&i| t[i]).collect();
            out.values_mut()[offset(&sizes, &sub)] += w;
        }
        Ok(out)
    }
}

pub fn oracle_posterior(universal: &Relation, constraints: &[JeffreyConstraint]) -> Result<OraclePosterior> {
    let n = universal.len();
    if n == 0 {
        return Err(Error::UndefinedFrequency);
    }
    let mut post = OraclePosterior {
        scheme: universal.scheme().to_vec(),
        rows: universal
            .rows()
            .map(|(t, m)| (t.to_vec(), m as f64 / n as f64))
            .collect(),
    };
    for q in constraints {
        let qt = q.table();
        post.vars(&qt.scheme())?;
        let current = post.marginal(&qt.scheme())?;
        let pos = post.positions(qt.vars());
        for (x, (&target, &f)) in qt.values().iter().zip(current.values()).enumerate() {
            if target > 0.0 && f <= 0.0 {
                let cfg = qt.iter().nth(x).unwrap().0;
                return Err(Error::IncompatibleEvidence(format!(
                    "({}) = ({}) has no support in the relation",
                    fmt_set(&qt.scheme()),
                    qt.render(&cfg).join(",")
                )));
            }
        }
        let sizes = qt.sizes();
        for (t, w) in post.rows.iter_mut() {
            let sub: Vec<u32> = pos.iter().map(|&i| t[i]).collect();
            let x = offset(&sizes, &sub);
            let f = current.values()[x];
            *w = if f > 0.0 { *w * qt.values()[x] / f } else { 0.0 };
        }
    }
    Ok(post)
}
