//! Bundled sample datasets: the eight-patient sarcophagal disease sample
//! (eleven attributes, five FDs) and the metastatic cancer occurrence table
//! (five binary attributes, four probabilistic dependencies).

use crate::attr::{attr_set, AttrSet};
use crate::dependency::Dependency;
use crate::error::Result;
use crate::io::{parse_dependencies, parse_domains, parse_evidence, parse_hyperedges, parse_relation, EvidenceItem};
use crate::relation::Relation;

pub const SARCOPHAGAL_CSV: &str = include_str!("../data/sarcophagal.csv");
pub const SARCOPHAGAL_DOMAINS: &str = include_str!("../data/sarcophagal.domains");
pub const SARCOPHAGAL_DEPS: &str = include_str!("../data/sarcophagal.deps");
pub const RECALL_EVIDENCE: &str = include_str!("../data/recall.evidence");
pub const SARCOPHAGAL_CLIQUES: &str = include_str!("../data/cliques.hyper");
pub const CANCER_CSV: &str = include_str!("../data/cancer.csv");
pub const CANCER_DOMAINS: &str = include_str!("../data/cancer.domains");
pub const CANCER_DEPS: &str = include_str!("../data/cancer.deps");

pub fn sarcophagal() -> Result<Relation> {
    let d = parse_domains(SARCOPHAGAL_DOMAINS, "sarcophagal.domains")?;
    parse_relation(SARCOPHAGAL_CSV, &d, "sarcophagal.csv")
}

pub fn sarcophagal_deps() -> Result<Vec<Dependency>> {
    parse_dependencies(SARCOPHAGAL_DEPS, "sarcophagal.deps")
}

pub fn recall_evidence() -> Result<Vec<EvidenceItem>> {
    parse_evidence(RECALL_EVIDENCE, "recall.evidence")
}

/// The six maximal cliques of the sarcophagal neighborhood graph.
pub fn sarcophagal_cliques() -> Vec<AttrSet> {
    parse_hyperedges(SARCOPHAGAL_CLIQUES, "cliques.hyper").expect("bundled hyperedges parse")
}

/// The 4NF schemes of the sarcophagal sample, key scheme last.
pub fn sarcophagal_schemes() -> Vec<AttrSet> {
    vec![
        attr_set(&["u1", "u2", "u3", "u7"]),
        attr_set(&["u3", "u4", "u5", "u8"]),
        attr_set(&["u6", "u7", "u8", "u9"]),
        attr_set(&["u3", "u7", "u8", "u10"]),
        attr_set(&["u9", "u10", "u11"]),
        attr_set(&["u1", "u2", "u3", "u4", "u5", "u6"]),
    ]
}

pub fn cancer() -> Result<Relation> {
    let d = parse_domains(CANCER_DOMAINS, "cancer.domains")?;
    parse_relation(CANCER_CSV, &d, "cancer.csv")
}

pub fn cancer_deps() -> Result<Vec<Dependency>> {
    parse_dependencies(CANCER_DEPS, "cancer.deps")
}
