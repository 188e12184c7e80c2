//! Triangulation of the neighborhood graph, clique-state minimization over
//! elimination orders (greedy and simulated annealing), Graham reduction and
//! junction-tree construction.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attr::{fmt_set, Attr, AttrSet, AttributeDecl};
use crate::error::{Error, Result};
use crate::network::NeighborhoodGraph;

/// Domain size per attribute.
pub type DomainSizes = BTreeMap<Attr, usize>;

pub fn domain_sizes(decls: &[AttributeDecl]) -> DomainSizes {
    decls.iter().map(|d| (d.name.clone(), d.size())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    pub vertices: AttrSet,
    pub edges: Vec<AttrSet>,
}

impl Hypergraph {
    pub fn new(edges: Vec<AttrSet>) -> Self {
        let vertices = edges.iter().flatten().cloned().collect();
        let mut unique: Vec<AttrSet> = Vec::new();
        for e in edges {
            if !unique.contains(&e) {
                unique.push(e);
            }
        }
        Hypergraph {
            vertices,
            edges: unique,
        }
    }
}

/// Applies the Graham (GYO) rules to a fixpoint: drop vertices that occur in
/// exactly one hyperedge, drop hyperedges that are empty or contained in
/// another. Returns what is left.
pub fn graham_reduce(h: &Hypergraph) -> Vec<AttrSet> {
    let mut edges: Vec<AttrSet> = h.edges.clone();
    loop {
        let mut changed = false;
        let mut occurrences: BTreeMap<Attr, usize> = BTreeMap::new();
        for e in &edges {
            for v in e {
                *occurrences.entry(v.clone()).or_insert(0) += 1;
            }
        }
        for e in edges.iter_mut() {
            let before = e.len();
            e.retain(|v| occurrences[v] > 1);
            changed |= e.len() != before;
        }
        let mut i = 0;
        while i < edges.len() {
            let redundant = edges[i].is_empty()
                || edges
                    .iter()
                    .enumerate()
                    .any(|(j, f)| j != i && edges[i].is_subset(f));
            if redundant {
                edges.remove(i);
                changed = true;
            } else {
                i += 1;
            }
        }
        if !changed {
            return edges;
        }
    }
}

/// A hypergraph is acyclic iff Graham reduction empties it.
pub fn graham_is_acyclic(h: &Hypergraph) -> bool {
    graham_reduce(h).is_empty()
}

/// Fixed-capacity vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn is_subset(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }
    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b)
        })
    }
}

/// Index form of a neighborhood graph; vertices in natural order.
struct IndexedGraph {
    names: Vec<Attr>,
    sizes: Vec<u128>,
    adj: Vec<Bits>,
}

impl IndexedGraph {
    fn new(g: &NeighborhoodGraph, sizes: &DomainSizes) -> Result<Self> {
        let names: Vec<Attr> = g.nodes.iter().cloned().collect();
        let index: BTreeMap<&Attr, usize> = names.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let n = names.len();
        let mut adj = vec![Bits::new(n); n];
        for (a, b) in &g.edges {
            let (i, j) = (index[a], index[b]);
            adj[i].insert(j);
            adj[j].insert(i);
        }
        let sizes = names
            .iter()
            .map(|a| {
                sizes
                    .get(a)
                    .map(|&s| s as u128)
                    .ok_or_else(|| Error::schema(format!("no domain declared for {a}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IndexedGraph { names, sizes, adj })
    }

    fn states(&self, set: &Bits) -> u128 {
        set.iter().fold(1u128, |acc, v| acc.saturating_mul(self.sizes[v]))
    }

    /// Eliminates along `order`; returns fill edges and the maximal cliques.
    fn eliminate(&self, order: &[usize]) -> (Vec<(usize, usize)>, Vec<Bits>) {
        let n = self.names.len();
        let mut adj = self.adj.clone();
        let mut alive = Bits::new(n);
        (0..n).for_each(|i| alive.insert(i));
        let mut fill = Vec::new();
        let mut cliques: Vec<Bits> = Vec::new();
        for &v in order {
            let nb = adj[v].and(&alive);
            let members: Vec<usize> = nb.iter().collect();
            for (k, &a) in members.iter().enumerate() {
                for &b in &members[k + 1..] {
                    if !adj[a].contains(b) {
                        adj[a].insert(b);
                        adj[b].insert(a);
                        fill.push((a.min(b), a.max(b)));
                    }
                }
            }
            let mut clique = nb;
            clique.insert(v);
            cliques.push(clique);
            alive.remove(v);
        }
        let maximal = cliques
            .iter()
            .enumerate()
            .filter(|(i, c)| {
                !cliques
                    .iter()
                    .enumerate()
                    .any(|(j, d)| j != *i && c.is_subset(d) && (c.len() < d.len() || j < *i))
            })
            .map(|(_, c)| c.clone())
            .collect();
        (fill, maximal)
    }

    fn cost(&self, order: &[usize], objective: Objective) -> u128 {
        let (fill, cliques) = self.eliminate(order);
        match objective {
            Objective::States => cliques
                .iter()
                .fold(0u128, |acc, c| acc.saturating_add(self.states(c))),
            Objective::Fill => fill.len() as u128,
        }
    }

    fn to_set(&self, b: &Bits) -> AttrSet {
        b.iter().map(|i| self.names[i].clone()).collect()
    }

    fn triangulation(&self, order: &[usize], objective: Objective) -> Triangulation {
        let (fill, cliques) = self.eliminate(order);
        let mut cliques: Vec<AttrSet> = cliques.iter().map(|c| self.to_set(c)).collect();
        cliques.sort();
        let fill: BTreeSet<(Attr, Attr)> = fill
            .iter()
            .map(|&(a, b)| (self.names[a].clone(), self.names[b].clone()))
            .collect();
        let total = cliques.iter().fold(0u128, |acc, c| {
            let s = c
                .iter()
                .fold(1u128, |p, a| p.saturating_mul(self.sizes[self.names.binary_search(a).unwrap()]));
            acc.saturating_add(s)
        });
        let cost = match objective {
            Objective::States => total,
            Objective::Fill => fill.len() as u128,
        };
        Triangulation {
            order: EliminationOrder(order.iter().map(|&i| self.names[i].clone()).collect()),
            fill,
            cliques,
            total_states: total,
            objective,
            cost,
        }
    }
}

/// A permutation of the graph's vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrder(pub Vec<Attr>);

impl EliminationOrder {
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Self {
        EliminationOrder(names.iter().map(|n| Attr::new(n.as_ref())).collect())
    }

    fn indices(&self, g: &IndexedGraph) -> Result<Vec<usize>> {
        let mut seen = vec![false; g.names.len()];
        let mut out = Vec::with_capacity(self.0.len());
        for a in &self.0 {
            let i = g
                .names
                .binary_search(a)
                .map_err(|_| Error::Decomposition(format!("{a} is not a vertex of the graph")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Decomposition(format!("{a} appears twice in the order")));
            }
            out.push(i);
        }
        if out.len() != g.names.len() {
            return Err(Error::Decomposition("elimination order must cover every vertex".into()));
        }
        Ok(out)
    }
}

/// What the optimizers minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Total number of states over all cliques.
    #[default]
    States,
    /// Number of fill edges.
    Fill,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub order: EliminationOrder,
    /// Added edges, each as `(a, b)` with `a < b`.
    pub fill: BTreeSet<(Attr, Attr)>,
    /// Maximal cliques of the filled graph, sorted.
    pub cliques: Vec<AttrSet>,
    pub total_states: u128,
    pub objective: Objective,
    /// Value of `objective` for this triangulation.
    pub cost: u128,
}

/// Eliminates vertices along `order`.
pub fn triangulate(g: &NeighborhoodGraph, sizes: &DomainSizes, order: &EliminationOrder) -> Result<Triangulation> {
    let ig = IndexedGraph::new(g, sizes)?;
    let idx = order.indices(&ig)?;
    Ok(ig.triangulation(&idx, Objective::States))
}

/// `Σ_cliques Π_members |domain|`.
pub fn total_states(cliques: &[AttrSet], sizes: &DomainSizes) -> Result<u128> {
    let mut total = 0u128;
    for c in cliques {
        let mut s = 1u128;
        for a in c {
            let n = sizes
                .get(a)
                .ok_or_else(|| Error::schema(format!("no domain declared for {a}")))?;
            s = s.saturating_mul(*n as u128);
        }
        total = total.saturating_add(s);
    }
    Ok(total)
}

/// Repeatedly eliminates the vertex adding the fewest fill edges, ties broken
/// by fewer states in the resulting clique, then by name.
pub fn greedy_decompose(g: &NeighborhoodGraph, sizes: &DomainSizes, objective: Objective) -> Result<Triangulation> {
    let ig = IndexedGraph::new(g, sizes)?;
    Ok(ig.triangulation(&greedy_order(&ig), objective))
}

fn greedy_order(ig: &IndexedGraph) -> Vec<usize> {
    let n = ig.names.len();
    let mut adj = ig.adj.clone();
    let mut alive = Bits::new(n);
    (0..n).for_each(|i| alive.insert(i));
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, u128, usize)> = None;
        for v in alive.iter() {
            let nb = adj[v].and(&alive);
            let members: Vec<usize> = nb.iter().collect();
            let mut fill = 0;
            for (k, &a) in members.iter().enumerate() {
                fill += members[k + 1..].iter().filter(|&&b| !adj[a].contains(b)).count();
            }
            let mut clique = nb;
            clique.insert(v);
            let key = (fill, ig.states(&clique), v);
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
        let v = best.unwrap().2;
        let nb: Vec<usize> = adj[v].and(&alive).iter().collect();
        for (k, &a) in nb.iter().enumerate() {
            for &b in &nb[k + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        alive.remove(v);
        order.push(v);
    }
    order
}

/// Geometric-cooling schedule for [`anneal_decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Starting temperature; `None` uses a tenth of the greedy cost.
    pub initial_temperature: Option<f64>,
    /// `T ← αT` after each temperature level.
    pub cooling: f64,
    /// Proposals per temperature level; `None` uses `100·|V|`.
    pub steps_per_temperature: Option<usize>,
    /// Stop once `T < floor_ratio · T0`.
    pub floor_ratio: f64,
    /// Stop after this many levels without a new best.
    pub max_stale: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            initial_temperature: None,
            cooling: 0.95,
            steps_per_temperature: None,
            floor_ratio: 1e-3,
            max_stale: 20,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.initial_temperature {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("initial temperature must be positive, got {t}")));
            }
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::Config(format!("cooling factor must lie in (0,1), got {}", self.cooling)));
        }
        if self.steps_per_temperature == Some(0) {
            return Err(Error::Config("steps per temperature must be positive".into()));
        }
        if !(self.floor_ratio > 0.0 && self.floor_ratio < 1.0) {
            return Err(Error::Config(format!("floor ratio must lie in (0,1), got {}", self.floor_ratio)));
        }
        if self.max_stale == 0 {
            return Err(Error::Config("stale-level limit must be positive".into()));
        }
        Ok(())
    }
}

/// Simulated annealing over elimination orders, starting from the greedy
/// order. Moves swap two positions; uphill moves are accepted with
/// probability `exp(−Δ/T)`. Returns the best order seen, so the result never
/// costs more than the greedy one.
pub fn anneal_decompose(
    g: &NeighborhoodGraph,
    sizes: &DomainSizes,
    objective: Objective,
    seed: u64,
    schedule: &Schedule,
) -> Result<Triangulation> {
    schedule.validate()?;
    let ig = IndexedGraph::new(g, sizes)?;
    let n = ig.names.len();
    let mut order = greedy_order(&ig);
    let mut cost = ig.cost(&order, objective);
    let mut best = (cost, order.clone());
    if n < 2 || cost == 0 {
        return Ok(ig.triangulation(&best.1, objective));
    }
    let t0 = schedule.initial_temperature.unwrap_or(cost as f64 / 10.0);
    let steps = schedule.steps_per_temperature.unwrap_or(100 * n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = t0;
    let mut stale = 0;
    while t >= schedule.floor_ratio * t0 && stale < schedule.max_stale {
        let mut improved = false;
        for _ in 0..steps {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            order.swap(i, j);
            let next = ig.cost(&order, objective);
            let delta = next as f64 - cost as f64;
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp() {
                cost = next;
                if cost < best.0 {
                    best = (cost, order.clone());
                    improved = true;
                }
            } else {
                order.swap(i, j);
            }
        }
        stale = if improved { 0 } else { stale + 1 };
        t *= schedule.cooling;
    }
    Ok(ig.triangulation(&best.1, objective))
}

/// True iff repeatedly removing simplicial vertices empties the graph.
pub fn is_chordal(g: &NeighborhoodGraph) -> bool {
    let sizes: DomainSizes = g.nodes.iter().map(|a| (a.clone(), 2)).collect();
    let ig = IndexedGraph::new(g, &sizes).expect("sizes cover every node");
    let (fill, _) = ig.eliminate(&greedy_order(&ig));
    fill.is_empty()
}

/// The graph with its fill edges added.
pub fn filled_graph(g: &NeighborhoodGraph, t: &Triangulation) -> NeighborhoodGraph {
    let mut out = g.clone();
    for (a, b) in &t.fill {
        out.add_edge(a, b);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub separator: AttrSet,
}

/// Cliques joined by a spanning tree with the running intersection property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunctionTree {
    /// Sorted; index 0 is the root used for propagation.
    pub cliques: Vec<AttrSet>,
    pub edges: Vec<TreeEdge>,
}

impl JunctionTree {
    pub fn neighbors(&self, i: usize) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(k, e)| {
                if e.a == i {
                    Some((e.b, k))
                } else if e.b == i {
                    Some((e.a, k))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Breadth-first order from the root with each node's `(parent, edge)`.
    pub fn rooted(&self) -> Vec<(usize, Option<(usize, usize)>)> {
        if self.cliques.is_empty() {
            return Vec::new();
        }
        let mut out = vec![(0, None)];
        let mut seen = vec![false; self.cliques.len()];
        seen[0] = true;
        let mut k = 0;
        while k < out.len() {
            let i = out[k].0;
            for (j, e) in self.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    out.push((j, Some((i, e))));
                }
            }
            k += 1;
        }
        out
    }

    /// First clique in sorted order containing `attrs`.
    pub fn covering_clique(&self, attrs: &AttrSet) -> Option<usize> {
        self.cliques.iter().position(|c| attrs.is_subset(c))
    }

    /// For every attribute, the cliques containing it induce a connected
    /// subtree.
    pub fn has_running_intersection(&self) -> bool {
        let attrs: AttrSet = self.cliques.iter().flatten().cloned().collect();
        for a in &attrs {
            let holders: Vec<usize> = (0..self.cliques.len()).filter(|&i| self.cliques[i].contains(a)).collect();
            let mut reached = vec![holders[0]];
            let mut k = 0;
            while k < reached.len() {
                let i = reached[k];
                for (j, _) in self.neighbors(i) {
                    if self.cliques[j].contains(a) && !reached.contains(&j) {
                        reached.push(j);
                    }
                }
                k += 1;
            }
            if reached.len() != holders.len() {
                return false;
            }
        }
        true
    }
}

/// Maximum-weight spanning tree over pairwise intersection sizes, ties broken
/// by the lexicographically smallest clique pair. Requires an acyclic clique
/// hypergraph.
pub fn build_junction_tree(cliques: &[AttrSet]) -> Result<JunctionTree> {
    let mut sorted: Vec<AttrSet> = cliques.to_vec();
    sorted.sort();
    sorted.dedup();
    if !graham_is_acyclic(&Hypergraph::new(sorted.clone())) {
        let names: Vec<String> = sorted.iter().map(|c| format!("{{{}}}", fmt_set(c))).collect();
        return Err(Error::Decomposition(format!(
            "cliques {} do not form an acyclic hypergraph",
            names.join(" ")
        )));
    }
    let mut candidates = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let sep: AttrSet = sorted[i].intersection(&sorted[j]).cloned().collect();
            candidates.push((sep.len(), i, j, sep));
        }
    }
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut parent: Vec<usize> = (0..sorted.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut edges = Vec::new();
    for (_, i, j, sep) in candidates {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            edges.push(TreeEdge { a: i, b: j, separator: sep });
        }
    }
    let tree = JunctionTree { cliques: sorted, edges };
    debug_assert!(tree.has_running_intersection());
    Ok(tree)
}
