//! Relations over finite symbolic domains with integer multiplicities, the
//! select / project / join operators, frequencies and exact dependency tests.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::attr::{check_unique, Attr, AttrSet, AttributeDecl};
use crate::error::{Error, Result};
use crate::table::{Distribution, FrequencyTable};

/// A partial tuple: attribute name to symbolic value.
pub type Assignment = BTreeMap<Attr, String>;

/// Builds an assignment from `(name, value)` pairs.
pub fn assignment<A: AsRef<str>, V: AsRef<str>>(pairs: &[(A, V)]) -> Assignment {
    pairs
        .iter()
        .map(|(a, v)| (Attr::new(a.as_ref()), v.as_ref().to_string()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectMode {
    /// Distinct partial tuples, multiplicity 1 each.
    Set,
    /// Multiplicities summed per partial tuple.
    Multiset,
}

/// A multiset of tuples. Tuples are stored as domain indices; identical tuples
/// are merged with their multiplicities summed.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    scheme: Vec<AttributeDecl>,
    rows: BTreeMap<Vec<u32>, u64>,
}

impl Relation {
    pub fn new(scheme: Vec<AttributeDecl>) -> Result<Self> {
        check_unique(&scheme)?;
        Ok(Relation {
            scheme,
            rows: BTreeMap::new(),
        })
    }

    /// Builds a relation from rows of symbolic values, each with multiplicity 1.
    pub fn from_rows<S: AsRef<str>>(scheme: Vec<AttributeDecl>, rows: &[Vec<S>]) -> Result<Self> {
        let mut r = Relation::new(scheme)?;
        for row in rows {
            let vals: Vec<&str> = row.iter().map(AsRef::as_ref).collect();
            r.insert(&vals, 1)?;
        }
        Ok(r)
    }

    pub fn insert(&mut self, values: &[&str], count: u64) -> Result<()> {
        if values.len() != self.scheme.len() {
            return Err(Error::schema(format!(
                "tuple has {} values, scheme has {} attributes",
                values.len(),
                self.scheme.len()
            )));
        }
        let tuple = self
            .scheme
            .iter()
            .zip(values)
            .map(|(d, v)| d.index_of(v))
            .collect::<Result<Vec<_>>>()?;
        self.insert_indices(tuple, count);
        Ok(())
    }

    pub(crate) fn insert_indices(&mut self, tuple: Vec<u32>, count: u64) {
        if count > 0 {
            *self.rows.entry(tuple).or_insert(0) += count;
        }
    }

    pub fn scheme(&self) -> &[AttributeDecl] {
        &self.scheme
    }

    pub fn attrs(&self) -> AttrSet {
        self.scheme.iter().map(|d| d.name.clone()).collect()
    }

    pub fn decl(&self, attr: &Attr) -> Result<&AttributeDecl> {
        self.scheme
            .iter()
            .find(|d| &d.name == attr)
            .ok_or_else(|| Error::schema(format!("unknown attribute {attr}")))
    }

    fn position(&self, attr: &Attr) -> Result<usize> {
        self.scheme
            .iter()
            .position(|d| &d.name == attr)
            .ok_or_else(|| Error::schema(format!("unknown attribute {attr}")))
    }

    /// Positions of `attrs` in scheme order.
    fn positions(&self, attrs: &AttrSet) -> Result<Vec<usize>> {
        for a in attrs {
            self.position(a)?;
        }
        Ok(self
            .scheme
            .iter()
            .enumerate()
            .filter(|(_, d)| attrs.contains(&d.name))
            .map(|(i, _)| i)
            .collect())
    }

    /// Total count `|r|`.
    pub fn len(&self) -> u64 {
        self.rows.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn distinct(&self) -> usize {
        self.rows.len()
    }

    /// Distinct tuples (as domain indices) with their multiplicities.
    pub fn rows(&self) -> impl Iterator<Item = (&[u32], u64)> {
        self.rows.iter().map(|(t, &n)| (t.as_slice(), n))
    }

    /// Distinct tuples rendered as symbolic values.
    pub fn value_rows(&self) -> Vec<(Vec<String>, u64)> {
        self.rows
            .iter()
            .map(|(t, &n)| {
                let vals = self
                    .scheme
                    .iter()
                    .zip(t)
                    .map(|(d, &i)| d.value(i).to_string())
                    .collect();
                (vals, n)
            })
            .collect()
    }

    /// Multiplicity of a full tuple given as symbolic values.
    pub fn count_of(&self, values: &[&str]) -> Result<u64> {
        let tuple = self
            .scheme
            .iter()
            .zip(values)
            .map(|(d, v)| d.index_of(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.rows.get(&tuple).copied().unwrap_or(0))
    }

    fn resolve(&self, a: &Assignment) -> Result<Vec<(usize, u32)>> {
        a.iter()
            .map(|(attr, v)| {
                let p = self.position(attr)?;
                Ok((p, self.scheme[p].index_of(v)?))
            })
            .collect()
    }

    /// `σ_{A=a}(r)` extended to a conjunction of equalities.
    pub fn select(&self, a: &Assignment) -> Result<Relation> {
        let cond = self.resolve(a)?;
        let rows = self
            .rows
            .iter()
            .filter(|(t, _)| cond.iter().all(|&(p, v)| t[p] == v))
            .map(|(t, &n)| (t.clone(), n))
            .collect();
        Ok(Relation {
            scheme: self.scheme.clone(),
            rows,
        })
    }

    /// `|σ_{Y=y}(r)|`.
    pub fn count(&self, a: &Assignment) -> Result<u64> {
        let cond = self.resolve(a)?;
        Ok(self
            .rows
            .iter()
            .filter(|(t, _)| cond.iter().all(|&(p, v)| t[p] == v))
            .map(|(_, &n)| n)
            .sum())
    }

    /// `π_X(r)`; the result keeps this relation's column order.
    pub fn project(&self, attrs: &AttrSet, mode: ProjectMode) -> Result<Relation> {
        let pos = self.positions(attrs)?;
        let scheme = pos.iter().map(|&i| self.scheme[i].clone()).collect();
        let mut rows = BTreeMap::new();
        for (t, &n) in &self.rows {
            let sub: Vec<u32> = pos.iter().map(|&i| t[i]).collect();
            match mode {
                ProjectMode::Set => {
                    rows.insert(sub, 1);
                }
                ProjectMode::Multiset => *rows.entry(sub).or_insert(0) += n,
            }
        }
        Ok(Relation { scheme, rows })
    }

    /// Set-semantic natural join. Columns of `self` come first, then the
    /// columns of `other` not shared with `self`.
    pub fn natural_join(&self, other: &Relation) -> Result<Relation> {
        let mut shared = Vec::new();
        let mut extra = Vec::new();
        for (j, d) in other.scheme.iter().enumerate() {
            match self.scheme.iter().position(|e| e.name == d.name) {
                Some(i) => {
                    if self.scheme[i].domain != d.domain {
                        return Err(Error::schema(format!(
                            "attribute {} has conflicting domain declarations",
                            d.name
                        )));
                    }
                    shared.push((i, j));
                }
                None => extra.push(j),
            }
        }
        let mut index: HashMap<Vec<u32>, Vec<&Vec<u32>>> = HashMap::new();
        for t in other.rows.keys() {
            let key: Vec<u32> = shared.iter().map(|&(_, j)| t[j]).collect();
            index.entry(key).or_default().push(t);
        }
        let mut scheme = self.scheme.clone();
        scheme.extend(extra.iter().map(|&j| other.scheme[j].clone()));
        let mut rows = BTreeMap::new();
        for t in self.rows.keys() {
            let key: Vec<u32> = shared.iter().map(|&(i, _)| t[i]).collect();
            if let Some(matches) = index.get(&key) {
                for s in matches {
                    let mut joined = t.clone();
                    joined.extend(extra.iter().map(|&j| s[j]));
                    rows.insert(joined, 1);
                }
            }
        }
        Ok(Relation { scheme, rows })
    }

    /// The distinct tuples of this relation, multiplicity 1.
    pub fn to_set(&self) -> Relation {
        Relation {
            scheme: self.scheme.clone(),
            rows: self.rows.keys().map(|t| (t.clone(), 1)).collect(),
        }
    }

    /// Equality of tuple sets irrespective of column order and multiplicity.
    pub fn set_eq(&self, other: &Relation) -> bool {
        if self.attrs() != other.attrs() {
            return false;
        }
        let Ok(aligned) = other.reorder(&self.scheme) else {
            return false;
        };
        aligned.rows.keys().eq(self.rows.keys())
    }

    /// Same tuples with columns permuted into the order of `scheme`.
    pub fn reorder(&self, scheme: &[AttributeDecl]) -> Result<Relation> {
        let pos = scheme
            .iter()
            .map(|d| {
                let p = self.position(&d.name)?;
                if self.scheme[p].domain != d.domain {
                    return Err(Error::schema(format!(
                        "attribute {} has conflicting domain declarations",
                        d.name
                    )));
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        if pos.len() != self.scheme.len() {
            return Err(Error::schema("reorder must keep every attribute"));
        }
        let rows = self
            .rows
            .iter()
            .map(|(t, &n)| (pos.iter().map(|&p| t[p]).collect(), n))
            .collect();
        Ok(Relation {
            scheme: scheme.to_vec(),
            rows,
        })
    }

    /// Restricts every domain with more than two values to its first and last
    /// value, dropping tuples that carry any other value.
    pub fn binary_slice(&self) -> Relation {
        let scheme: Vec<AttributeDecl> = self.scheme.iter().map(AttributeDecl::binary_slice).collect();
        let mut rows = BTreeMap::new();
        'rows: for (t, &n) in &self.rows {
            let mut out = Vec::with_capacity(t.len());
            for (d, &i) in self.scheme.iter().zip(t) {
                let sliced = match i as usize {
                    0 => 0,
                    k if k + 1 == d.size() => (d.size().min(2) - 1) as u32,
                    _ => continue 'rows,
                };
                out.push(sliced);
            }
            rows.insert(out, n);
        }
        Relation { scheme, rows }
    }

    /// Multiset counts of the partial tuples over `attrs` (scheme order).
    fn counts_on(&self, pos: &[usize]) -> HashMap<Vec<u32>, u64> {
        let mut m = HashMap::new();
        for (t, &n) in &self.rows {
            *m.entry(pos.iter().map(|&i| t[i]).collect()).or_insert(0) += n;
        }
        m
    }

    fn table_vars(&self, attrs: &AttrSet) -> Result<(Vec<AttributeDecl>, Vec<usize>)> {
        let mut vars = Vec::new();
        let mut pos = Vec::new();
        for a in attrs {
            let p = self.position(a)?;
            vars.push(self.scheme[p].clone());
            pos.push(p);
        }
        Ok((vars, pos))
    }

    /// `F_X(r)`: frequencies of every configuration of `attrs` (natural order).
    pub fn frequency(&self, attrs: &AttrSet) -> Result<FrequencyTable> {
        let total = self.len();
        if total == 0 {
            return Err(Error::UndefinedFrequency);
        }
        let (vars, pos) = self.table_vars(attrs)?;
        let mut out = Distribution::zeros(vars);
        let sizes = out.sizes();
        let values = out.values_mut();
        for (t, &n) in &self.rows {
            let sub: Vec<u32> = pos.iter().map(|&i| t[i]).collect();
            values[crate::attr::offset(&sizes, &sub)] += n as f64;
        }
        values.iter_mut().for_each(|v| *v /= total as f64);
        Ok(out)
    }

    /// `F_{X|Y=y}(r)`.
    pub fn cond_frequency(&self, attrs: &AttrSet, given: &Assignment) -> Result<FrequencyTable> {
        let sel = self.select(given)?;
        if sel.len() == 0 {
            let cond = given
                .iter()
                .map(|(a, v)| format!("{a}={v}"))
                .collect::<Vec<_>>()
                .join(",");
            return Err(Error::UndefinedConditional(cond));
        }
        sel.frequency(attrs)
    }

    /// `X → Y`: tuples agreeing on X agree on Y.
    pub fn fd_holds(&self, lhs: &AttrSet, rhs: &AttrSet) -> Result<bool> {
        let xp = self.positions(lhs)?;
        let yp = self.positions(rhs)?;
        let mut seen: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
        for t in self.rows.keys() {
            let x: Vec<u32> = xp.iter().map(|&i| t[i]).collect();
            let y: Vec<u32> = yp.iter().map(|&i| t[i]).collect();
            match seen.get(&x) {
                Some(prev) if prev != &y => return Ok(false),
                Some(_) => {}
                None => {
                    seen.insert(x, y);
                }
            }
        }
        Ok(true)
    }

    /// `X ↠ Y`: given X, the Y-values and the remaining values recombine
    /// freely (the swap tuples exist for every pair agreeing on X).
    pub fn md_holds(&self, lhs: &AttrSet, rhs: &AttrSet) -> Result<bool> {
        self.positions(rhs)?;
        let xp = self.positions(lhs)?;
        let y: AttrSet = rhs.difference(lhs).cloned().collect();
        let yp = self.positions(&y)?;
        let zp: Vec<usize> = (0..self.scheme.len())
            .filter(|i| !xp.contains(i) && !yp.contains(i))
            .collect();
        type Group = (BTreeSet<Vec<u32>>, BTreeSet<Vec<u32>>, BTreeSet<(Vec<u32>, Vec<u32>)>);
        let mut groups: HashMap<Vec<u32>, Group> = HashMap::new();
        for t in self.rows.keys() {
            let x: Vec<u32> = xp.iter().map(|&i| t[i]).collect();
            let yv: Vec<u32> = yp.iter().map(|&i| t[i]).collect();
            let zv: Vec<u32> = zp.iter().map(|&i| t[i]).collect();
            let g = groups.entry(x).or_default();
            g.0.insert(yv.clone());
            g.1.insert(zv.clone());
            g.2.insert((yv, zv));
        }
        Ok(groups
            .values()
            .all(|(ys, zs, pairs)| pairs.len() == ys.len() * zs.len()))
    }

    /// `X ↦ Y` read literally over `Z = R − XY`: for every tuple `xyz`,
    /// `|σ_xyz|·|σ_x| = |σ_xy|·|σ_xz|` in exact integer arithmetic.
    pub fn pd_holds(&self, lhs: &AttrSet, rhs: &AttrSet) -> Result<bool> {
        self.positions(lhs)?;
        self.positions(rhs)?;
        let rest: AttrSet = self
            .attrs()
            .into_iter()
            .filter(|a| !lhs.contains(a) && !rhs.contains(a))
            .collect();
        self.pd_holds_wrt(lhs, rhs, &rest)
    }

    /// Tests `Y ⟂ Z | X` on counts for a caller-chosen Z (other attributes
    /// are summed out).
    pub fn pd_holds_wrt(&self, lhs: &AttrSet, rhs: &AttrSet, rest: &AttrSet) -> Result<bool> {
        let y: AttrSet = rhs.difference(lhs).cloned().collect();
        let z: AttrSet = rest.difference(lhs).filter(|a| !y.contains(a)).cloned().collect();
        let xp = self.positions(lhs)?;
        let yp = self.positions(&y)?;
        let zp = self.positions(&z)?;
        let xy: Vec<usize> = xp.iter().chain(&yp).copied().collect();
        let xz: Vec<usize> = xp.iter().chain(&zp).copied().collect();
        let xyz: Vec<usize> = xp.iter().chain(&yp).chain(&zp).copied().collect();
        let nx = self.counts_on(&xp);
        let nxy = self.counts_on(&xy);
        let nxz = self.counts_on(&xz);
        let nxyz = self.counts_on(&xyz);
        let key = |t: &[u32], p: &[usize]| -> Vec<u32> { p.iter().map(|&i| t[i]).collect() };
        for t in self.rows.keys() {
            let lhs_n = nxyz[&key(t, &xyz)] as u128 * nx[&key(t, &xp)] as u128;
            let rhs_n = nxy[&key(t, &xy)] as u128 * nxz[&key(t, &xz)] as u128;
            if lhs_n != rhs_n {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
