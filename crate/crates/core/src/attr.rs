//! Attribute names, attribute sets and finite symbolic domains.
//!
//! Attribute names order *naturally*: runs of digits compare by numeric value,
//! so `u9 < u10`. Every deterministic tie-break in the crate uses this order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attr(String);

impl Attr {
    pub fn new(name: impl Into<String>) -> Self {
        Attr(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Attr {
    fn from(s: &str) -> Self {
        Attr(s.to_string())
    }
}

impl From<String> for Attr {
    fn from(s: String) -> Self {
        Attr(s)
    }
}

impl Ord for Attr {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.0, &other.0).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Attr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn chunks(s: &str) -> Vec<(bool, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = s.as_bytes();
    for i in 1..=bytes.len() {
        if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
            out.push((bytes[start].is_ascii_digit(), &s[start..i]));
            start = i;
        }
    }
    out
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    if a.is_empty() || b.is_empty() {
        return a.cmp(b);
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, sa), (db, sb)) in ca.iter().zip(cb.iter()) {
        let ord = match (da, db) {
            (true, true) => {
                let ta = sa.trim_start_matches('0');
                let tb = sb.trim_start_matches('0');
                ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb))
            }
            _ => sa.cmp(sb),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len())
}

pub type AttrSet = BTreeSet<Attr>;

/// Builds an attribute set from names.
pub fn attr_set<S: AsRef<str>>(names: &[S]) -> AttrSet {
    names.iter().map(|n| Attr::new(n.as_ref())).collect()
}

pub fn fmt_set(set: &AttrSet) -> String {
    set.iter().map(Attr::as_str).collect::<Vec<_>>().join(",")
}

/// An attribute together with its ordered domain. Domain order fixes both the
/// index encoding and K-map adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDecl {
    pub name: Attr,
    pub domain: Vec<String>,
}

impl AttributeDecl {
    pub fn new<S: AsRef<str>>(name: impl Into<Attr>, domain: &[S]) -> Result<Self> {
        let name = name.into();
        let domain: Vec<String> = domain.iter().map(|v| v.as_ref().to_string()).collect();
        if domain.is_empty() {
            return Err(Error::schema(format!("attribute {name} has an empty domain")));
        }
        for (i, v) in domain.iter().enumerate() {
            if domain[..i].contains(v) {
                return Err(Error::schema(format!(
                    "attribute {name} declares value {v:?} twice"
                )));
            }
        }
        Ok(AttributeDecl { name, domain })
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn index_of(&self, value: &str) -> Result<u32> {
        self.domain
            .iter()
            .position(|v| v == value)
            .map(|i| i as u32)
            .ok_or_else(|| {
                Error::schema(format!(
                    "value {value:?} is not in the domain of {}",
                    self.name
                ))
            })
    }

    pub fn value(&self, index: u32) -> &str {
        &self.domain[index as usize]
    }

    /// Restricts a domain with more than two values to its first and last
    /// value (`{-1, 0, 1}` becomes `{-1, 1}`).
    pub fn binary_slice(&self) -> AttributeDecl {
        if self.domain.len() <= 2 {
            return self.clone();
        }
        AttributeDecl {
            name: self.name.clone(),
            domain: vec![self.domain[0].clone(), self.domain[self.domain.len() - 1].clone()],
        }
    }
}

/// Checks that names are unique within a scheme.
pub(crate) fn check_unique(scheme: &[AttributeDecl]) -> Result<()> {
    for (i, a) in scheme.iter().enumerate() {
        if scheme[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::schema(format!("attribute {} declared twice", a.name)));
        }
    }
    Ok(())
}

/// Enumerates every configuration of a mixed-radix product, first position
/// most significant.
pub fn configurations(sizes: &[usize]) -> impl Iterator<Item = Vec<u32>> + '_ {
    let total: usize = sizes.iter().product();
    (0..total).map(move |mut k| {
        let mut cfg = vec![0u32; sizes.len()];
        for i in (0..sizes.len()).rev() {
            cfg[i] = (k % sizes[i]) as u32;
            k /= sizes[i];
        }
        cfg
    })
}

/// Row-major offset of a configuration, first position most significant.
pub fn offset(sizes: &[usize], cfg: &[u32]) -> usize {
    cfg.iter()
        .zip(sizes)
        .fold(0, |acc, (&c, &s)| acc * s + c as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_order_puts_u9_before_u10() {
        let set = attr_set(&["u10", "u9", "u11", "u1"]);
        let names: Vec<_> = set.iter().map(|a| a.as_str()).collect();
        assert_eq!(names, ["u1", "u9", "u10", "u11"]);
        assert!(Attr::from("A") < Attr::from("B"));
        assert!(Attr::from("x2y") < Attr::from("x10"));
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(AttributeDecl::new("a", &[] as &[&str]).is_err());
        assert!(AttributeDecl::new("a", &["1", "1"]).is_err());
    }

    #[test]
    fn configurations_are_row_major() {
        let sizes = [2, 3];
        let all: Vec<_> = configurations(&sizes).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[3], vec![1, 0]);
        for (k, c) in all.iter().enumerate() {
            assert_eq!(offset(&sizes, c), k);
        }
    }

    #[test]
    fn binary_slice_keeps_extremes() {
        let d = AttributeDecl::new("u3", &["-1", "0", "1"]).unwrap();
        assert_eq!(d.binary_slice().domain, vec!["-1", "1"]);
    }
}
