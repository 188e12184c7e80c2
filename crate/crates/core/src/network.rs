//! Conditional constraint extraction, the directed belief network induced by
//! the dependencies and its undirected neighborhood graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::attr::{configurations, fmt_set, offset, Attr, AttrSet, AttributeDecl};
use crate::dependency::{split_all, Dependency};
use crate::error::{Error, Result};
use crate::relation::{ProjectMode, Relation};
use crate::table::Distribution;

/// Row-sum tolerance for conditional and marginal tables.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// `P(child | parents)` with one row per parent configuration. A row is `None`
/// when the configuration never occurs in the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    pub child: AttributeDecl,
    pub parents: Vec<AttributeDecl>,
    rows: Vec<Option<Vec<f64>>>,
}

impl ConditionalTable {
    /// A table with every row undefined.
    pub fn undefined(child: AttributeDecl, parents: Vec<AttributeDecl>) -> Self {
        let n = parents.iter().map(AttributeDecl::size).product();
        ConditionalTable {
            child,
            parents,
            rows: vec![None; n],
        }
    }

    /// Builds a table from rows in parent-configuration order, validating each.
    pub fn from_rows(child: AttributeDecl, parents: Vec<AttributeDecl>, rows: Vec<Option<Vec<f64>>>) -> Result<Self> {
        let mut t = Self::undefined(child, parents);
        if rows.len() != t.rows.len() {
            return Err(Error::schema(format!(
                "table for {} given {} rows, expected {}",
                t.child.name,
                rows.len(),
                t.rows.len()
            )));
        }
        for (cfg, row) in t.parent_configs().into_iter().zip(rows) {
            t.set_row(&cfg, row)?;
        }
        Ok(t)
    }

    pub fn parent_sizes(&self) -> Vec<usize> {
        self.parents.iter().map(AttributeDecl::size).collect()
    }

    pub fn parent_set(&self) -> AttrSet {
        self.parents.iter().map(|p| p.name.clone()).collect()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, parent_cfg: &[u32]) -> Option<&[f64]> {
        self.rows[offset(&self.parent_sizes(), parent_cfg)].as_deref()
    }

    pub fn row_at(&self, k: usize) -> Option<&[f64]> {
        self.rows[k].as_deref()
    }

    /// Sets a row; it must have one entry per child value and sum to one.
    pub fn set_row(&mut self, parent_cfg: &[u32], row: Option<Vec<f64>>) -> Result<()> {
        if let Some(r) = &row {
            if r.len() != self.child.size() {
                return Err(Error::schema(format!(
                    "row for {} has {} entries, expected {}",
                    self.child.name,
                    r.len(),
                    self.child.size()
                )));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > SUM_TOLERANCE || r.iter().any(|&p| p < 0.0) {
                return Err(Error::schema(format!(
                    "row for {} is not a distribution (sum {s})",
                    self.child.name
                )));
            }
        }
        let k = offset(&self.parent_sizes(), parent_cfg);
        self.rows[k] = row;
        Ok(())
    }

    /// Every parent configuration in row order.
    pub fn parent_configs(&self) -> Vec<Vec<u32>> {
        configurations(&self.parent_sizes()).collect()
    }

    pub fn undefined_configs(&self) -> Vec<Vec<u32>> {
        self.parent_configs()
            .into_iter()
            .zip(&self.rows)
            .filter(|(_, r)| r.is_none())
            .map(|(c, _)| c)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(Option::is_some)
    }

    pub fn render_parents(&self, cfg: &[u32]) -> Vec<String> {
        self.parents
            .iter()
            .zip(cfg)
            .map(|(d, &c)| d.value(c).to_string())
            .collect()
    }

    /// The child-given-parents factor over `parents ∪ {child}` (parents first,
    /// child last). Undefined rows are rejected.
    pub fn to_factor(&self) -> Result<Distribution> {
        let mut vars = self.parents.clone();
        vars.push(self.child.clone());
        let mut values = Vec::with_capacity(self.rows.len() * self.child.size());
        for (k, r) in self.rows.iter().enumerate() {
            let r = r.as_ref().ok_or_else(|| {
                let cfg = configurations(&self.parent_sizes()).nth(k).unwrap();
                Error::NoData(format!(
                    "P({} | {}) is undefined at {}",
                    self.child.name,
                    fmt_set(&self.parent_set()),
                    self.render_parents(&cfg).join(",")
                ))
            })?;
            values.extend_from_slice(r);
        }
        Distribution::from_values(vars, values)
    }
}

/// Child-given-parents counts `C(X = x, Π = π)` over the parent product.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub child: AttributeDecl,
    pub parents: Vec<AttributeDecl>,
    /// `counts[parent offset][child index]`.
    pub counts: Vec<Vec<u64>>,
}

impl CountTable {
    /// Counts the family of `child` in `r`; parents are taken in natural order.
    pub fn from_relation(r: &Relation, child: &Attr, parents: &AttrSet) -> Result<Self> {
        let child_decl = r.decl(child)?.clone();
        let parent_decls = parents
            .iter()
            .map(|p| r.decl(p).cloned())
            .collect::<Result<Vec<_>>>()?;
        let mut family = parents.clone();
        family.insert(child.clone());
        let proj = r.project(&family, ProjectMode::Multiset)?;
        // column positions of the parents (natural order) and the child in `proj`
        let pos = |a: &Attr| proj.scheme().iter().position(|d| &d.name == a).unwrap();
        let ppos: Vec<usize> = parents.iter().map(pos).collect();
        let cpos = pos(child);
        let sizes: Vec<usize> = parent_decls.iter().map(AttributeDecl::size).collect();
        let n: usize = sizes.iter().product();
        let mut counts = vec![vec![0u64; child_decl.size()]; n];
        for (t, m) in proj.rows() {
            let pcfg: Vec<u32> = ppos.iter().map(|&i| t[i]).collect();
            counts[offset(&sizes, &pcfg)][t[cpos] as usize] += m;
        }
        Ok(CountTable {
            child: child_decl,
            parents: parent_decls,
            counts,
        })
    }

    pub fn parent_total(&self, k: usize) -> u64 {
        self.counts[k].iter().sum()
    }

    /// Relative frequencies; zero-count parent configurations are undefined.
    pub fn frequency_table(&self) -> ConditionalTable {
        let mut t = ConditionalTable::undefined(self.child.clone(), self.parents.clone());
        for (k, row) in self.counts.iter().enumerate() {
            let total: u64 = row.iter().sum();
            if total > 0 {
                t.rows[k] = Some(row.iter().map(|&c| c as f64 / total as f64).collect());
            }
        }
        t
    }
}

/// Extracts one conditional table per singleton dependency `⟨X, A⟩` from the
/// first relation whose scheme contains `XA`.
pub fn extract_ccs(relations: &[Relation], deps: &[Dependency]) -> Result<Vec<ConditionalTable>> {
    let mut out = Vec::new();
    for d in split_all(deps) {
        let family = d.family();
        let r = relations
            .iter()
            .find(|r| family.is_subset(&r.attrs()))
            .ok_or_else(|| Error::Coverage(d.to_string()))?;
        let child = d.rhs.iter().next().unwrap();
        let parents: AttrSet = d.lhs.iter().filter(|a| *a != child).cloned().collect();
        out.push(CountTable::from_relation(r, child, &parents)?.frequency_table());
    }
    Ok(out)
}

/// Directed graph with one edge parent → child per parent of each dependency.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefNetwork {
    pub nodes: Vec<AttributeDecl>,
    pub edges: BTreeSet<(Attr, Attr)>,
}

impl BeliefNetwork {
    pub fn parents(&self, child: &Attr) -> AttrSet {
        self.edges
            .iter()
            .filter(|(_, c)| c == child)
            .map(|(p, _)| p.clone())
            .collect()
    }

    pub fn node_names(&self) -> AttrSet {
        self.nodes.iter().map(|d| d.name.clone()).collect()
    }

    pub fn decl(&self, a: &Attr) -> Option<&AttributeDecl> {
        self.nodes.iter().find(|d| &d.name == a)
    }

    /// `{A} ∪ parents(A)` for every node with at least one parent.
    pub fn families(&self) -> Vec<AttrSet> {
        let mut out = Vec::new();
        for n in self.node_names() {
            let mut f = self.parents(&n);
            if !f.is_empty() {
                f.insert(n);
                out.push(f);
            }
        }
        out
    }

    pub fn neighborhood_graph(&self) -> NeighborhoodGraph {
        let mut g = neighborhood_graph(&self.families());
        g.nodes.extend(self.node_names());
        g
    }
}

/// Builds the network over `nodes`; rejects dependency sets that induce a
/// directed cycle.
pub fn build_bn(nodes: &[AttributeDecl], deps: &[Dependency]) -> Result<BeliefNetwork> {
    let names: AttrSet = nodes.iter().map(|d| d.name.clone()).collect();
    let mut edges = BTreeSet::new();
    for d in deps {
        if let Some(a) = d.family().difference(&names).next() {
            return Err(Error::schema(format!("dependency {d} mentions undeclared attribute {a}")));
        }
        for child in &d.rhs {
            for parent in d.lhs.iter().filter(|p| *p != child) {
                edges.insert((parent.clone(), child.clone()));
            }
        }
    }
    if let Some(cycle) = find_cycle(&names, &edges) {
        return Err(Error::CyclicNetwork(cycle.iter().map(|a| a.to_string()).collect()));
    }
    Ok(BeliefNetwork {
        nodes: nodes.to_vec(),
        edges,
    })
}

fn find_cycle(nodes: &AttrSet, edges: &BTreeSet<(Attr, Attr)>) -> Option<Vec<Attr>> {
    let mut succ: BTreeMap<&Attr, Vec<&Attr>> = BTreeMap::new();
    for (p, c) in edges {
        succ.entry(p).or_default().push(c);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&Attr, u8> = nodes.iter().map(|n| (n, 0)).collect();
    fn visit<'a>(
        n: &'a Attr,
        succ: &BTreeMap<&'a Attr, Vec<&'a Attr>>,
        state: &mut BTreeMap<&'a Attr, u8>,
        stack: &mut Vec<&'a Attr>,
    ) -> Option<Vec<Attr>> {
        state.insert(n, 1);
        stack.push(n);
        for &m in succ.get(n).map(Vec::as_slice).unwrap_or(&[]) {
            match state[m] {
                1 => {
                    let start = stack.iter().position(|x| *x == m).unwrap();
                    let mut cycle: Vec<Attr> = stack[start..].iter().map(|a| (*a).clone()).collect();
                    cycle.push(m.clone());
                    return Some(cycle);
                }
                0 => {
                    if let Some(c) = visit(m, succ, state, stack) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        stack.pop();
        state.insert(n, 2);
        None
    }
    for n in nodes {
        if state[n] == 0 {
            if let Some(c) = visit(n, &succ, &mut state, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

/// Undirected graph linking attributes that co-occur in a constraint family.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NeighborhoodGraph {
    pub nodes: AttrSet,
    /// Each edge stored once as `(a, b)` with `a < b`.
    pub edges: BTreeSet<(Attr, Attr)>,
}

impl NeighborhoodGraph {
    pub fn add_edge(&mut self, a: &Attr, b: &Attr) {
        if a == b {
            return;
        }
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        let e = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        self.edges.insert(e);
    }

    pub fn has_edge(&self, a: &Attr, b: &Attr) -> bool {
        let e = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        self.edges.contains(&e)
    }

    /// The neighbors `σA`.
    pub fn neighbors(&self, a: &Attr) -> AttrSet {
        self.edges
            .iter()
            .filter_map(|(x, y)| {
                if x == a {
                    Some(y.clone())
                } else if y == a {
                    Some(x.clone())
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Union of complete graphs over each family.
pub fn neighborhood_graph(families: &[AttrSet]) -> NeighborhoodGraph {
    let mut g = NeighborhoodGraph::default();
    for f in families {
        g.nodes.extend(f.iter().cloned());
        let members: Vec<&Attr> = f.iter().collect();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// A target marginal on an attribute subset: nonnegative, unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalConstraint {
    table: Distribution,
}

impl MarginalConstraint {
    pub fn new(table: Distribution) -> Result<Self> {
        if table.values().iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::schema("marginal has a negative or non-finite entry"));
        }
        let s = table.total();
        if (s - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::schema(format!(
                "marginal over {} sums to {s}",
                fmt_set(&table.scheme())
            )));
        }
        Ok(MarginalConstraint { table })
    }

    /// Point mass on one configuration given as domain indices.
    pub fn point_mass(vars: Vec<AttributeDecl>, cfg: &[u32]) -> Result<Self> {
        let mut t = Distribution::zeros(vars);
        t.set(cfg, 1.0);
        Self::new(t)
    }

    pub fn scheme(&self) -> AttrSet {
        self.table.scheme()
    }

    pub fn table(&self) -> &Distribution {
        &self.table
    }
}
