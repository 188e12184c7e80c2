//! Functional / multivalued / probabilistic dependencies, FD closure and keys,
//! 4NF decomposition with a key scheme, and instance-level verification of
//! lossless join and FD preservation.

use std::fmt;

use crate::attr::{fmt_set, Attr, AttrSet};
use crate::error::{Error, Result};
use crate::relation::{ProjectMode, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DepKind {
    /// `X -> Y`
    Fd,
    /// `X ->> Y`
    Md,
    /// `X |-> Y`
    Pd,
}

impl DepKind {
    pub fn arrow(self) -> &'static str {
        match self {
            DepKind::Fd => "->",
            DepKind::Md => "->>",
            DepKind::Pd => "|->",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dependency {
    pub kind: DepKind,
    pub lhs: AttrSet,
    pub rhs: AttrSet,
}

impl Dependency {
    pub fn new(kind: DepKind, lhs: AttrSet, rhs: AttrSet) -> Self {
        Dependency { kind, lhs, rhs }
    }

    pub fn fd(lhs: AttrSet, rhs: AttrSet) -> Self {
        Self::new(DepKind::Fd, lhs, rhs)
    }

    pub fn md(lhs: AttrSet, rhs: AttrSet) -> Self {
        Self::new(DepKind::Md, lhs, rhs)
    }

    pub fn pd(lhs: AttrSet, rhs: AttrSet) -> Self {
        Self::new(DepKind::Pd, lhs, rhs)
    }

    /// `X → A` for every `A ∈ Y`.
    pub fn split(&self) -> Vec<Dependency> {
        self.rhs
            .iter()
            .map(|a| Dependency::new(self.kind, self.lhs.clone(), AttrSet::from([a.clone()])))
            .collect()
    }

    /// `X ∪ Y`.
    pub fn family(&self) -> AttrSet {
        self.lhs.union(&self.rhs).cloned().collect()
    }
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", fmt_set(&self.lhs), self.kind.arrow(), fmt_set(&self.rhs))
    }
}

/// Splits every dependency to singleton right-hand sides, keeping input order
/// and dropping repeats.
pub fn split_all(deps: &[Dependency]) -> Vec<Dependency> {
    let mut out: Vec<Dependency> = Vec::new();
    for d in deps.iter().flat_map(Dependency::split) {
        if !out.contains(&d) {
            out.push(d);
        }
    }
    out
}

/// `X⁺` with respect to the FDs in `deps` (other kinds are ignored).
pub fn attribute_closure(deps: &[Dependency], attrs: &AttrSet) -> AttrSet {
    let mut closure = attrs.clone();
    loop {
        let before = closure.len();
        for d in deps.iter().filter(|d| d.kind == DepKind::Fd) {
            if d.lhs.is_subset(&closure) {
                closure.extend(d.rhs.iter().cloned());
            }
        }
        if closure.len() == before {
            return closure;
        }
    }
}

/// `K` determines all of `scheme` and no proper subset of `K` does.
pub fn is_key(deps: &[Dependency], scheme: &AttrSet, key: &AttrSet) -> bool {
    if !key.is_subset(scheme) || !scheme.is_subset(&attribute_closure(deps, key)) {
        return false;
    }
    // Closure is monotone, so dropping one attribute at a time suffices.
    key.iter().all(|a| {
        let mut smaller = key.clone();
        smaller.remove(a);
        !scheme.is_subset(&attribute_closure(deps, &smaller))
    })
}

/// First key of `scheme` in (size, lexicographic) order.
pub fn find_key(deps: &[Dependency], scheme: &AttrSet) -> AttrSet {
    // Attributes never derived by an FD belong to every key.
    let derived: AttrSet = deps
        .iter()
        .filter(|d| d.kind == DepKind::Fd)
        .flat_map(|d| d.rhs.difference(&d.lhs).cloned())
        .collect();
    let core: AttrSet = scheme.difference(&derived).cloned().collect();
    let rest: Vec<Attr> = scheme.intersection(&derived).cloned().collect();
    for size in 0..=rest.len() {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let mut cand = core.clone();
            cand.extend(idx.iter().map(|&i| rest[i].clone()));
            if scheme.is_subset(&attribute_closure(deps, &cand)) {
                return cand;
            }
            if !next_combination(&mut idx, rest.len()) {
                break;
            }
        }
    }
    scheme.clone()
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// A decomposition `ρ(R_1, ..., R_k)` with an optional key scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub schemes: Vec<AttrSet>,
    pub key_scheme: Option<AttrSet>,
    /// How the key scheme was handled.
    pub notes: Vec<String>,
}

impl Decomposition {
    pub fn single(scheme: AttrSet) -> Self {
        Decomposition {
            schemes: vec![scheme],
            key_scheme: None,
            notes: Vec::new(),
        }
    }

    pub fn from_schemes(schemes: Vec<AttrSet>) -> Self {
        Decomposition {
            schemes,
            key_scheme: None,
            notes: Vec::new(),
        }
    }

    /// Dependency schemes followed by the key scheme, if any.
    pub fn all_schemes(&self) -> Vec<AttrSet> {
        let mut out = self.schemes.clone();
        out.extend(self.key_scheme.iter().cloned());
        out
    }
}

/// Decomposes `scheme` into 4NF from dependencies `⟨X, A⟩`.
///
/// Multi-attribute right-hand sides are split first. Probabilistic
/// dependencies are treated as multivalued ones. Attributes mentioned by no
/// dependency become singleton schemes; a dependency spanning the whole scheme
/// yields `{R}`; otherwise one scheme `XA` per dependency. A key scheme is
/// appended only when the FDs admit a key other than `R` itself.
pub fn decompose_4nf(scheme: &AttrSet, deps: &[Dependency]) -> Result<Decomposition> {
    if scheme.is_empty() {
        return Err(Error::schema("cannot decompose an empty scheme"));
    }
    for d in deps {
        if let Some(a) = d.family().difference(scheme).next() {
            return Err(Error::schema(format!("dependency {d} mentions unknown attribute {a}")));
        }
        if d.rhs.is_empty() {
            return Err(Error::schema(format!("dependency {d} has an empty right-hand side")));
        }
    }
    let split = split_all(deps);
    if split.iter().any(|d| &d.family() == scheme) {
        return Ok(Decomposition::single(scheme.clone()));
    }

    let mut schemes: Vec<AttrSet> = Vec::new();
    for a in scheme {
        if !split.iter().any(|d| d.family().contains(a)) {
            schemes.push(AttrSet::from([a.clone()]));
        }
    }
    for d in &split {
        let s = d.family();
        if !schemes.contains(&s) {
            schemes.push(s);
        }
    }
    let schemes: Vec<AttrSet> = schemes
        .iter()
        .filter(|s| !schemes.iter().any(|t| s.is_subset(t) && s != &t))
        .cloned()
        .collect();

    let mut notes = Vec::new();
    let mut key_scheme = None;
    if split.iter().any(|d| d.kind == DepKind::Fd) {
        let key = find_key(&split, scheme);
        if &key == scheme {
            notes.push("key scheme omitted: the only key is the whole scheme".to_string());
        } else if let Some(s) = schemes.iter().find(|s| key.is_subset(s)) {
            notes.push(format!(
                "key scheme {} omitted: contained in {}",
                fmt_set(&key),
                fmt_set(s)
            ));
        } else {
            notes.push(format!("key scheme {} appended", fmt_set(&key)));
            key_scheme = Some(key);
        }
    } else {
        notes.push("key scheme omitted: no functional dependencies".to_string());
    }
    Ok(Decomposition {
        schemes,
        key_scheme,
        notes,
    })
}

/// Joins the set-projections of `r` onto every scheme and compares the result
/// with `r` as a set of tuples.
pub fn verify_lossless_join(r: &Relation, rho: &Decomposition) -> Result<bool> {
    let schemes = rho.all_schemes();
    let covered: AttrSet = schemes.iter().flatten().cloned().collect();
    if covered != r.attrs() {
        return Err(Error::schema(format!(
            "decomposition covers {} but relation has {}",
            fmt_set(&covered),
            fmt_set(&r.attrs())
        )));
    }
    let mut joined: Option<Relation> = None;
    for s in &schemes {
        let p = r.project(s, ProjectMode::Set)?;
        joined = Some(match joined {
            None => p,
            Some(j) => j.natural_join(&p)?,
        });
    }
    Ok(joined.map_or(false, |j| j.set_eq(&r.to_set())))
}

/// Every FD in `deps` follows from the union of its projections onto the
/// schemes of `rho`.
pub fn preserves_fds(deps: &[Dependency], rho: &Decomposition) -> Result<bool> {
    if let Some(d) = deps.iter().find(|d| d.kind != DepKind::Fd) {
        return Err(Error::UnsupportedDependency(format!(
            "{d}: preservation is checked for functional dependencies only"
        )));
    }
    let schemes = rho.all_schemes();
    for d in deps {
        // Closure of X under the projected FDs without materialising them.
        let mut z = d.lhs.clone();
        loop {
            let before = z.len();
            for s in &schemes {
                let local: AttrSet = z.intersection(s).cloned().collect();
                let gained = attribute_closure(deps, &local);
                z.extend(gained.intersection(s).cloned());
            }
            if z.len() == before {
                break;
            }
        }
        if !d.rhs.is_subset(&z) {
            return Ok(false);
        }
    }
    Ok(true)
}
