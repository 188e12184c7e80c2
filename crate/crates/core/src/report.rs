//! Line-oriented text output. Keys are sorted, probabilities use
//! [`fmt_prob`], so repeated runs produce identical bytes.

use std::fmt::Write;

use crate::attr::{fmt_set, Attr, AttrSet};
use crate::datasets;
use crate::decompose::{build_junction_tree, total_states, DomainSizes, JunctionTree, Triangulation};
use crate::dependency::{decompose_4nf, Decomposition, Dependency};
use crate::error::Result;
use crate::inference::{compile_evidence, oracle_posterior, CalibratedModel, Engine, PropagateOptions};
use crate::io::fmt_prob;
use crate::learn::{encode_index, score_assignments, KMap, LearnedLc, SopFormula, DEFAULT_ASSIGNMENT_CAP};
use crate::network::{extract_ccs, BeliefNetwork, ConditionalTable, CountTable};
use crate::relation::{ProjectMode, Relation};
use crate::table::Distribution;

/// Schemes one per line, the key scheme marked.
pub fn decomposition_text(rho: &Decomposition) -> String {
    let mut out = String::new();
    for (i, s) in rho.schemes.iter().enumerate() {
        writeln!(out, "R{} {}", i + 1, fmt_set(s)).unwrap();
    }
    if let Some(k) = &rho.key_scheme {
        writeln!(out, "R{} {} key", rho.schemes.len() + 1, fmt_set(k)).unwrap();
    }
    for n in &rho.notes {
        writeln!(out, "note {n}").unwrap();
    }
    out
}

/// Distinct tuples with their multiplicities, in domain-index order.
pub fn relation_text(title: &str, r: &Relation) -> String {
    let names: Vec<&str> = r.scheme().iter().map(|d| d.name.as_str()).collect();
    let mut out = format!("{title} {}\n", names.join(","));
    for (values, m) in r.value_rows() {
        writeln!(out, "  {} {m}", values.join(",")).unwrap();
    }
    out
}

pub fn network_text(bn: &BeliefNetwork) -> String {
    let mut out = String::new();
    for n in bn.node_names() {
        let parents = bn.parents(&n);
        writeln!(out, "node {n} parents {}", if parents.is_empty() { "-".into() } else { fmt_set(&parents) }).unwrap();
    }
    for (a, b) in &bn.edges {
        writeln!(out, "edge {a} -> {b}").unwrap();
    }
    for (a, b) in &bn.neighborhood_graph().edges {
        writeln!(out, "neighbor {a} {b}").unwrap();
    }
    out
}

/// Names cliques `C1..Cn` in sorted order unless labels are given.
fn clique_label(labels: Option<&[(String, AttrSet)]>, c: &AttrSet, i: usize) -> String {
    labels
        .and_then(|l| l.iter().find(|(_, s)| s == c).map(|(n, _)| n.clone()))
        .unwrap_or_else(|| format!("C{}", i + 1))
}

pub fn bn_decomposition_text(t: &Triangulation, tree: &JunctionTree, sizes: &DomainSizes) -> Result<String> {
    let mut out = String::new();
    let order: Vec<&str> = t.order.0.iter().map(Attr::as_str).collect();
    writeln!(out, "order {}", order.join(",")).unwrap();
    for (a, b) in &t.fill {
        writeln!(out, "fill {a} {b}").unwrap();
    }
    for (i, c) in tree.cliques.iter().enumerate() {
        let s = total_states(std::slice::from_ref(c), sizes)?;
        writeln!(out, "clique C{} {} states {s}", i + 1, fmt_set(c)).unwrap();
    }
    for e in &tree.edges {
        writeln!(out, "tree C{} C{} separator {}", e.a + 1, e.b + 1, fmt_set(&e.separator)).unwrap();
    }
    writeln!(out, "total_states {}", t.total_states).unwrap();
    let all: AttrSet = sizes.keys().cloned().collect();
    writeln!(out, "network_states {}", total_states(&[all], sizes)?).unwrap();
    Ok(out)
}

/// Nonzero states of a clique table keyed by index code.
pub fn potential_text(label: &str, p: &Distribution) -> Result<String> {
    let mut out = format!("clique {label} {}\n", fmt_set(&p.scheme()));
    let sizes = p.sizes();
    let mut rows = Vec::new();
    for (cfg, v) in p.iter() {
        if v != 0.0 {
            rows.push((encode_index(&cfg, &sizes)?, p.render(&cfg).join(","), v));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    for (code, values, v) in rows {
        writeln!(out, "  {code} {values} {}", fmt_prob(v)).unwrap();
    }
    Ok(out)
}

/// Every configuration of a target marginal.
pub fn marginal_text(p: &Distribution) -> String {
    let mut out = format!("target {}\n", fmt_set(&p.scheme()));
    for (cfg, v) in p.iter() {
        writeln!(out, "  {} {}", p.render(&cfg).join(","), fmt_prob(v)).unwrap();
    }
    out
}

pub fn query_text(engine: Engine, marginals: &[Distribution]) -> String {
    let mut out = format!("engine {engine}\n");
    for m in marginals {
        out.push_str(&marginal_text(m));
    }
    out
}

pub fn formula_text(child: &Attr, value: &str, f: &SopFormula) -> String {
    format!("formula {child}={value} {} complexity {}\n", f, f.complexity())
}

fn header(t: &ConditionalTable) -> String {
    if t.parents.is_empty() {
        format!("P({})", t.child.name)
    } else {
        format!("P({} | {})", t.child.name, fmt_set(&t.parent_set()))
    }
}

/// Rows as `(parents) value:p ... provenance`.
pub fn learned_text(lcs: &[LearnedLc]) -> String {
    let mut out = String::new();
    for lc in lcs {
        let t = &lc.table;
        writeln!(out, "table {}", header(t)).unwrap();
        for (k, cfg) in t.parent_configs().iter().enumerate() {
            let row = match t.row_at(k) {
                Some(r) => r
                    .iter()
                    .enumerate()
                    .map(|(i, p)| format!("{}:{}", t.child.value(i as u32), fmt_prob(*p)))
                    .collect::<Vec<_>>()
                    .join(" "),
                None => "undefined".to_string(),
            };
            writeln!(out, "  ({}) {row} {}", t.render_parents(cfg).join(","), lc.provenance[k]).unwrap();
        }
        for (v, f) in &lc.formulas {
            out.push_str(&formula_text(&t.child.name, v, f));
        }
    }
    out
}

/// Only the defined, nonzero conditionals, one per line.
pub fn ccs_text(tables: &[ConditionalTable]) -> String {
    let mut out = String::new();
    for t in tables {
        for (k, cfg) in t.parent_configs().iter().enumerate() {
            if let Some(row) = t.row_at(k) {
                let given: Vec<String> = t
                    .parents
                    .iter()
                    .zip(t.render_parents(cfg))
                    .map(|(d, v)| format!("{}={v}", d.name))
                    .collect();
                for (i, p) in row.iter().enumerate() {
                    if *p > 0.0 {
                        writeln!(
                            out,
                            "P({}={} | {}) = {}",
                            t.child.name,
                            t.child.value(i as u32),
                            given.join(","),
                            fmt_prob(*p)
                        )
                        .unwrap();
                    }
                }
            }
        }
    }
    out
}

/// `MC1..MC6` labels for the sarcophagal cliques, in bundled file order.
pub fn sarcophagal_labels() -> Vec<(String, AttrSet)> {
    datasets::sarcophagal_cliques()
        .into_iter()
        .enumerate()
        .map(|(i, c)| (format!("MC{}", i + 1), c))
        .collect()
}

/// Clique potentials of a model, labeled.
pub fn model_text(m: &CalibratedModel, labels: Option<&[(String, AttrSet)]>) -> Result<String> {
    let mut blocks: Vec<(String, String)> = Vec::new();
    for (i, (c, p)) in m.tree.cliques.iter().zip(&m.potentials).enumerate() {
        let label = clique_label(labels, c, i);
        blocks.push((label.clone(), potential_text(&label, p)?));
    }
    blocks.sort_by(|a, b| natural_label(&a.0).cmp(&natural_label(&b.0)));
    Ok(blocks.into_iter().map(|(_, b)| b).collect())
}

fn natural_label(s: &str) -> (String, u64) {
    let digits = s.trim_start_matches(|c: char| !c.is_ascii_digit());
    let prefix = &s[..s.len() - digits.len()];
    (prefix.to_string(), digits.parse().unwrap_or(0))
}

/// Regenerates the reference tables from the two bundled samples.
pub fn reproduce() -> Result<String> {
    let mut out = String::new();
    let t1 = datasets::sarcophagal()?;
    let deps1 = datasets::sarcophagal_deps()?;
    let rho = decompose_4nf(&t1.attrs(), &deps1)?;
    let projections: Vec<Relation> = rho
        .all_schemes()
        .iter()
        .map(|s| t1.project(s, ProjectMode::Multiset))
        .collect::<Result<_>>()?;

    out.push_str("== 4NF decomposition of the sarcophagal sample\n");
    out.push_str(&decomposition_text(&rho));
    for (i, r) in projections.iter().enumerate() {
        out.push_str(&relation_text(&format!("R{}", i + 1), r));
    }

    out.push_str("\n== statistical sub-relations of the cancer sample\n");
    let t3 = datasets::cancer()?;
    let rho3 = decompose_4nf(&t3.attrs(), &datasets::cancer_deps()?)?;
    for (tag, s) in ["a", "b", "c", "d"].iter().zip(rho3.all_schemes()) {
        let r = t3.project(&s, ProjectMode::Multiset)?;
        out.push_str(&relation_text(&format!("({tag})"), &r));
    }

    out.push_str("\n== conditional constraints from the decomposition\n");
    out.push_str(&ccs_text(&extract_ccs(&projections, &deps1)?));

    out.push_str("\n== clique priors\n");
    let labels = sarcophagal_labels();
    let tree = build_junction_tree(&datasets::sarcophagal_cliques())?;
    let model = CalibratedModel::from_relation(tree, &t1)?;
    out.push_str(&model_text(&model, Some(&labels))?);

    out.push_str("\n== posteriors for u1=1, u3=1, u6=-1\n");
    let ev = compile_evidence(&datasets::recall_evidence()?, t1.scheme())?;
    let post = model.propagate(&ev, PropagateOptions::default())?;
    writeln!(out, "engine {}", Engine::CliquePropagation).unwrap();
    out.push_str(&model_text(&post, Some(&labels))?);
    writeln!(out, "engine {}", Engine::UniversalOracle).unwrap();
    let oracle = oracle_posterior(&t1, &ev)?;
    let mut blocks = Vec::new();
    for (label, c) in &labels {
        blocks.push(potential_text(label, &oracle.marginal(c)?)?);
    }
    out.extend(blocks);

    out.push_str("\n== assignments for the unseen cells of the u7 map\n");
    let sliced = projections[0].binary_slice();
    let counts = CountTable::from_relation(&sliced, &"u7".into(), &crate::attr::attr_set(&["u1", "u2", "u3"]))?;
    let freq = counts.frequency_table();
    let cells = (0..freq.num_rows()).map(|k| freq.row_at(k).map(|r| r[1])).collect();
    let map = KMap::new(counts.parents.clone(), cells)?;
    let unseen: Vec<String> = map.unseen().iter().map(|&k| map.render_cell(k)).collect();
    writeln!(out, "cells {}", unseen.join(" ")).unwrap();
    for (assignment, f) in score_assignments(&map, DEFAULT_ASSIGNMENT_CAP)? {
        let a: Vec<&str> = assignment.iter().map(|&v| if v { "1" } else { "0" }).collect();
        writeln!(out, "  {} {} complexity {}", a.join(","), f, f.complexity()).unwrap();
    }
    Ok(out)
}

/// Whether every dependency in `deps` holds on `r`, one line each.
pub fn dependency_checks_text(r: &Relation, deps: &[Dependency]) -> Result<String> {
    let mut out = String::new();
    for d in deps {
        let ok = match d.kind {
            crate::dependency::DepKind::Fd => r.fd_holds(&d.lhs, &d.rhs)?,
            crate::dependency::DepKind::Md => r.md_holds(&d.lhs, &d.rhs)?,
            crate::dependency::DepKind::Pd => r.pd_holds(&d.lhs, &d.rhs)?,
        };
        writeln!(out, "{d} {}", if ok { "holds" } else { "fails" }).unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduce_is_deterministic_and_contains_landmarks() {
        let a = reproduce().unwrap();
        assert_eq!(a, reproduce().unwrap());
        for needle in [
            "R6 u1,u2,u3,u4,u5,u6 key",
            "  0,0 76000",
            "clique MC1 u9,u10,u11\n  0 -1,-1,-1 0.500000000\n",
            "  22 1,-1,0,-1 0.125000000",
            "engine universal-oracle",
            "  0,1 u1~u2 + u1u3 + ~u2u3 complexity 5",
            "P(u7=1 | u1=1,u2=1,u3=1) = 1",
        ] {
            assert!(a.contains(needle), "missing {needle:?}");
        }
    }

    #[test]
    fn marginal_lists_every_configuration() {
        let t3 = datasets::cancer().unwrap();
        let m = t3.frequency(&crate::attr::attr_set(&["A"])).unwrap();
        assert_eq!(marginal_text(&m), "target A\n  0 0.800000000\n  1 0.200000000\n");
    }
}
