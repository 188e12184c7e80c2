use std::collections::BTreeSet;

use proptest::prelude::*;

use relbn_core::attr::{configurations, Attr, AttrSet, AttributeDecl};
use relbn_core::decompose::{
    build_junction_tree, filled_graph, greedy_decompose, is_chordal, triangulate, DomainSizes, EliminationOrder,
    Objective,
};
use relbn_core::dependency::{attribute_closure, Dependency};
use relbn_core::inference::{jeffrey_update, JeffreyConstraint};
use relbn_core::learn::{
    decode_index, dirichlet_row, encode_index, nnor_learn, score_assignments, sop_minimize, KMap, Provenance,
    SopFormula, TruthTable,
};
use relbn_core::network::{neighborhood_graph, NeighborhoodGraph};
use relbn_core::{Distribution, ProjectMode, Relation};

fn decls(sizes: &[usize]) -> Vec<AttributeDecl> {
    sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let vals: Vec<String> = (0..s).map(|v| v.to_string()).collect();
            AttributeDecl::new(format!("a{i}"), &vals).unwrap()
        })
        .collect()
}

/// A small multiset relation over two to four attributes.
fn arb_relation() -> impl Strategy<Value = Relation> {
    prop::collection::vec(2usize..=3, 2..=4).prop_flat_map(|sizes| {
        let row = sizes.iter().map(|&s| 0..s as u32).collect::<Vec<_>>();
        prop::collection::vec((row, 1u64..4), 1..10).prop_map(move |rows| {
            let d = decls(&sizes);
            let mut r = Relation::new(d.clone()).unwrap();
            for (t, m) in rows {
                let vals: Vec<&str> = t.iter().zip(&d).map(|(&v, d)| d.value(v)).collect();
                r.insert(&vals, m).unwrap();
            }
            r
        })
    })
}

fn subset(r: &Relation, mask: u32) -> AttrSet {
    r.scheme()
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, d)| d.name.clone())
        .collect()
}

fn arb_graph() -> impl Strategy<Value = (NeighborhoodGraph, DomainSizes)> {
    (2usize..=8).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n * (n - 1) / 2),
            prop::collection::vec(2usize..=4, n),
        )
            .prop_map(move |(edges, sizes)| {
                let names: Vec<Attr> = (0..n).map(|i| Attr::from(format!("x{i}").as_str())).collect();
                let mut families: Vec<AttrSet> = names.iter().map(|a| [a.clone()].into()).collect();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if edges[k] {
                            families.push([names[i].clone(), names[j].clone()].into());
                        }
                        k += 1;
                    }
                }
                let ds = names.iter().cloned().zip(sizes).collect();
                (neighborhood_graph(&families), ds)
            })
    })
}

fn maximal_cliques(g: &NeighborhoodGraph) -> BTreeSet<AttrSet> {
    let nodes: Vec<Attr> = g.nodes.iter().cloned().collect();
    let n = nodes.len();
    let cliques: Vec<u32> = (1u32..1 << n)
        .filter(|&m| {
            (0..n).all(|i| m >> i & 1 == 0 || (i + 1..n).all(|j| m >> j & 1 == 0 || g.has_edge(&nodes[i], &nodes[j])))
        })
        .collect();
    cliques
        .iter()
        .filter(|&&m| !cliques.iter().any(|&o| o != m && o & m == m))
        .map(|&m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| nodes[i].clone()).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn multiset_projection_preserves_count(r in arb_relation(), mask in 1u32..16) {
        let attrs = subset(&r, mask);
        prop_assume!(!attrs.is_empty());
        let p = r.project(&attrs, ProjectMode::Multiset).unwrap();
        prop_assert_eq!(p.len(), r.len());
        let s = r.project(&attrs, ProjectMode::Set).unwrap();
        prop_assert_eq!(s.len() as usize, s.distinct());
        prop_assert_eq!(s.distinct(), p.distinct());
    }

    #[test]
    fn join_of_projections_contains_relation(r in arb_relation(), m1 in 1u32..16, m2 in 1u32..16) {
        let all = (1u32 << r.scheme().len()) - 1;
        let (a, b) = (subset(&r, m1 & all), subset(&r, (m2 | !m1) & all));
        prop_assume!(!a.is_empty() && !b.is_empty());
        let j = r
            .project(&a, ProjectMode::Set).unwrap()
            .natural_join(&r.project(&b, ProjectMode::Set).unwrap()).unwrap()
            .reorder(r.scheme()).unwrap();
        for (t, _) in r.rows() {
            let vals: Vec<&str> = t.iter().zip(r.scheme()).map(|(&v, d)| d.value(v)).collect();
            prop_assert!(j.count_of(&vals).unwrap() > 0);
        }
    }

    #[test]
    fn frequencies_sum_to_one(r in arb_relation(), mask in 1u32..16) {
        let attrs = subset(&r, mask);
        prop_assume!(!attrs.is_empty());
        let f = r.frequency(&attrs).unwrap();
        prop_assert!((f.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fd_implies_md(r in arb_relation(), m1 in 1u32..16, m2 in 1u32..16) {
        let (x, y) = (subset(&r, m1), subset(&r, m2 & !m1));
        prop_assume!(!x.is_empty() && !y.is_empty());
        if r.fd_holds(&x, &y).unwrap() {
            prop_assert!(r.md_holds(&x, &y).unwrap());
            prop_assert!(r.pd_holds(&x, &y).unwrap());
        }
        if r.pd_holds(&x, &y).unwrap() {
            prop_assert!(r.md_holds(&x, &y).unwrap());
        }
    }

    #[test]
    fn closure_is_extensive_and_idempotent(
        deps in prop::collection::vec((1u32..64, 0usize..6), 0..6),
        start in 0u32..64,
    ) {
        let names: Vec<String> = (0..6).map(|i| format!("a{i}")).collect();
        let set = |m: u32| -> AttrSet { (0..6).filter(|i| m >> i & 1 == 1).map(|i| names[i].as_str().into()).collect() };
        let fds: Vec<Dependency> = deps.iter().map(|&(l, r)| Dependency::fd(set(l), set(1 << r))).collect();
        let x = set(start);
        let c = attribute_closure(&fds, &x);
        prop_assert!(x.is_subset(&c));
        prop_assert_eq!(attribute_closure(&fds, &c), c.clone());
        for d in &fds {
            if d.lhs.is_subset(&c) {
                prop_assert!(d.rhs.is_subset(&c));
            }
        }
    }

    #[test]
    fn index_codes_round_trip(sizes in prop::collection::vec(1usize..=9, 1..=4)) {
        let mut seen = BTreeSet::new();
        for cfg in configurations(&sizes) {
            let code = encode_index(&cfg, &sizes).unwrap();
            prop_assert!(code.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
            prop_assert_eq!(decode_index(&code, &sizes).unwrap(), cfg);
            prop_assert!(seen.insert(code));
        }
    }

    #[test]
    fn minimal_sop_is_equivalent_and_no_larger(n in 1usize..=4, seed in any::<u64>()) {
        let vars: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
        let t = TruthTable::from_fn(vars, |m| seed >> (m % 64) & 1 == 1);
        let f = sop_minimize(&t).unwrap();
        prop_assert_eq!(f.truth_table(), t.clone());
        let naive = SopFormula::minterm_expansion(&t);
        prop_assert!(f.literals() <= naive.literals());
        // no single literal can be dropped from the result
        for (i, term) in f.terms.iter().enumerate() {
            for drop in 0..term.len() {
                let mut g = f.clone();
                g.terms[i].remove(drop);
                prop_assert_ne!(g.truth_table(), t.clone());
            }
        }
    }

    #[test]
    fn nnor_keeps_data_and_fills_everything(
        n in 1usize..=4,
        cells in prop::collection::vec(prop::option::weighted(0.6, prop_oneof![Just(0.0), Just(1.0)]), 16),
    ) {
        let parents = decls(&vec![2; n]);
        let cells: Vec<Option<f64>> = cells[..1 << n].to_vec();
        prop_assume!(cells.iter().any(Option::is_some));
        let map = KMap::new(parents, cells.clone()).unwrap();
        let r = nnor_learn(&map, 1 << 16).unwrap();
        for (k, c) in cells.iter().enumerate() {
            match c {
                Some(v) => {
                    prop_assert_eq!(r.map.cells[k], Some(*v));
                    prop_assert_eq!(r.provenance[k], Provenance::Data);
                }
                None => prop_assert!(r.map.cells[k].is_some()),
            }
        }
        let f = r.formula.clone().unwrap();
        prop_assert_eq!(f.truth_table(), r.map.truth_table().unwrap());
        if r.provenance.contains(&Provenance::OrFill) {
            let best = score_assignments(&map_after_phase1(&map, &r), 1 << 16).unwrap()
                .iter().map(|(_, g)| g.complexity()).min().unwrap();
            prop_assert_eq!(f.complexity(), best);
        }
    }

    #[test]
    fn dirichlet_rows_are_distributions(counts in prop::collection::vec(0u64..50, 1..6)) {
        let v = counts.len();
        let row = dirichlet_row(&counts, v).unwrap();
        prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(row.iter().all(|&p| p > 0.0 && p < 1.0 || v == 1));
    }

    #[test]
    fn hard_jeffrey_update_is_conditioning(seed in prop::collection::vec(0.0f64..1.0, 8), value in 0u32..2) {
        let d = decls(&[2, 2, 2]);
        let mut p = Distribution::from_values(d.clone(), seed.iter().map(|v| v + 0.01).collect()).unwrap();
        p.normalize();
        let mut q = Distribution::zeros(vec![d[0].clone()]);
        q.set(&[value], 1.0);
        let post = jeffrey_update(&p, &JeffreyConstraint::new(q).unwrap()).unwrap();
        let mass: f64 = p.iter().filter(|(c, _)| c[0] == value).map(|(_, v)| v).sum();
        for (cfg, v) in p.iter() {
            let want = if cfg[0] == value { v / mass } else { 0.0 };
            prop_assert!((post.get(&cfg) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn triangulation_is_chordal_with_maximal_cliques((g, sizes) in arb_graph(), seed in any::<u64>()) {
        let mut order: Vec<Attr> = g.nodes.iter().cloned().collect();
        let len = order.len();
        order.rotate_left(seed as usize % len);
        if seed & 1 == 1 {
            order.reverse();
        }
        for t in [
            triangulate(&g, &sizes, &EliminationOrder(order)).unwrap(),
            greedy_decompose(&g, &sizes, Objective::States).unwrap(),
        ] {
            let h = filled_graph(&g, &t);
            prop_assert!(is_chordal(&h));
            let got: BTreeSet<AttrSet> = t.cliques.iter().cloned().collect();
            prop_assert_eq!(got, maximal_cliques(&h));
            let tree = build_junction_tree(&t.cliques).unwrap();
            prop_assert!(tree.has_running_intersection());
            prop_assert_eq!(tree.edges.len() + 1, tree.cliques.len());
        }
    }
}

/// The map with only the unanimous-neighbor fills applied.
fn map_after_phase1(map: &KMap, r: &relbn_core::learn::NnorResult) -> KMap {
    let mut m = map.clone();
    for s in r.steps.iter().filter(|s| s.provenance == Provenance::NnFill) {
        m.cells[s.cell] = Some(s.value);
    }
    m
}
