//! Exact two-level minimization: all prime implicants, then a minimum-literal
//! cover found by branch and bound.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest number of variables `sop_minimize` accepts.
pub const MAX_SOP_VARS: usize = 6;

/// A Boolean function given by its value on every minterm. Minterm `m` sets
/// variable `i` to the bit of weight `2^(n-1-i)`, so the first variable is
/// most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    vars: Vec<String>,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(vars: Vec<String>, bits: Vec<bool>) -> Result<Self> {
        if vars.len() >= usize::BITS as usize || bits.len() != 1usize << vars.len() {
            return Err(Error::schema(format!(
                "truth table over {} variables needs {} entries, got {}",
                vars.len(),
                1u128 << vars.len().min(127),
                bits.len()
            )));
        }
        Ok(TruthTable { vars, bits })
    }

    pub fn from_fn(vars: Vec<String>, f: impl Fn(usize) -> bool) -> Self {
        let bits = (0..1usize << vars.len()).map(f).collect();
        TruthTable { vars, bits }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn get(&self, m: usize) -> bool {
        self.bits[m]
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// A product of literals `(variable index, positive?)`, sorted by variable.
pub type Term = Vec<(usize, bool)>;

fn term_cmp(a: &Term, b: &Term) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Sum of products. No terms is constant false; a single empty term is
/// constant true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SopFormula {
    pub vars: Vec<String>,
    pub terms: Vec<Term>,
}

impl SopFormula {
    pub fn literals(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }

    /// Literal occurrences minus one; constants count zero.
    pub fn complexity(&self) -> usize {
        self.literals().saturating_sub(1)
    }

    pub fn eval(&self, m: usize) -> bool {
        let n = self.vars.len();
        self.terms
            .iter()
            .any(|t| t.iter().all(|&(v, pos)| ((m >> (n - 1 - v)) & 1 == 1) == pos))
    }

    pub fn truth_table(&self) -> TruthTable {
        TruthTable::from_fn(self.vars.clone(), |m| self.eval(m))
    }

    /// One term per true minterm.
    pub fn minterm_expansion(t: &TruthTable) -> SopFormula {
        let n = t.num_vars();
        let terms = (0..1usize << n)
            .filter(|&m| t.get(m))
            .map(|m| (0..n).map(|v| (v, (m >> (n - 1 - v)) & 1 == 1)).collect())
            .collect();
        SopFormula {
            vars: t.vars.clone(),
            terms,
        }
    }
}

impl fmt::Display for SopFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                if t.is_empty() {
                    return "1".to_string();
                }
                t.iter()
                    .map(|&(v, pos)| format!("{}{}", if pos { "" } else { "~" }, self.vars[v]))
                    .collect()
            })
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

/// Cube over `n` variables: `mask` marks the bound variables, `value` their
/// polarity, both in minterm bit positions.
#[derive(Clone, Copy)]
struct Cube {
    mask: usize,
    value: usize,
}

impl Cube {
    fn covers(&self, m: usize) -> bool {
        m & self.mask == self.value
    }

    fn term(&self, n: usize) -> Term {
        (0..n)
            .filter(|v| self.mask >> (n - 1 - v) & 1 == 1)
            .map(|v| (v, self.value >> (n - 1 - v) & 1 == 1))
            .collect()
    }
}

/// Minimal sum-of-products cover; among covers with the fewest literals the
/// one whose sorted term list is lexicographically smallest wins.
pub fn sop_minimize(t: &TruthTable) -> Result<SopFormula> {
    let n = t.num_vars();
    if n > MAX_SOP_VARS {
        return Err(Error::SizeLimit(format!(
            "logic minimization is limited to {MAX_SOP_VARS} variables, got {n}"
        )));
    }
    let vars = t.vars.clone();
    let full = (1usize << n) - 1;
    let implicant = |c: &Cube| (0..=full).all(|m| !c.covers(m) || t.get(m));

    let mut cubes = Vec::new();
    for mask in 0..=full {
        let mut value = mask;
        loop {
            // enumerate every subset of `mask` as the polarity pattern
            cubes.push(Cube { mask, value });
            if value == 0 {
                break;
            }
            value = (value - 1) & mask;
        }
    }
    let primes: Vec<(Term, u64)> = {
        let mut out: Vec<(Term, u64)> = cubes
            .iter()
            .filter(|c| implicant(c))
            .filter(|c| {
                (0..n).all(|b| {
                    let bit = 1 << b;
                    c.mask & bit == 0
                        || !implicant(&Cube {
                            mask: c.mask & !bit,
                            value: c.value & !bit,
                        })
                })
            })
            .map(|c| {
                let cover = (0..=full).filter(|&m| c.covers(m)).fold(0u64, |acc, m| acc | 1 << m);
                (c.term(n), cover)
            })
            .collect();
        out.sort_by(|a, b| term_cmp(&a.0, &b.0));
        out
    };

    let target = (0..=full).filter(|&m| t.get(m)).fold(0u64, |acc, m| acc | 1 << m);
    let mut best: Option<Vec<usize>> = None;
    let mut chosen = Vec::new();
    search(&primes, target, 0, &mut chosen, &mut best);
    let mut terms: Vec<Term> = best
        .unwrap_or_default()
        .into_iter()
        .map(|i| primes[i].0.clone())
        .collect();
    terms.sort_by(term_cmp);
    Ok(SopFormula { vars, terms })
}

fn cover_key(primes: &[(Term, u64)], idx: &[usize]) -> (usize, Vec<Term>) {
    let mut terms: Vec<Term> = idx.iter().map(|&i| primes[i].0.clone()).collect();
    terms.sort_by(term_cmp);
    (terms.iter().map(Vec::len).sum(), terms)
}

fn better(primes: &[(Term, u64)], a: &[usize], b: &[usize]) -> bool {
    let (la, ta) = cover_key(primes, a);
    let (lb, tb) = cover_key(primes, b);
    la < lb
        || (la == lb
            && ta
                .iter()
                .zip(&tb)
                .map(|(x, y)| term_cmp(x, y))
                .find(|o| o.is_ne())
                .unwrap_or(ta.len().cmp(&tb.len()))
                .is_lt())
}

fn search(primes: &[(Term, u64)], target: u64, covered: u64, chosen: &mut Vec<usize>, best: &mut Option<Vec<usize>>) {
    let lits: usize = chosen.iter().map(|&i| primes[i].0.len()).sum();
    if let Some(b) = best {
        let best_lits: usize = b.iter().map(|&i| primes[i].0.len()).sum();
        if lits > best_lits {
            return;
        }
    }
    let uncovered = target & !covered;
    if uncovered == 0 {
        if best.as_ref().map_or(true, |b| better(primes, chosen, b)) {
            *best = Some(chosen.clone());
        }
        return;
    }
    // branch on the uncovered minterm with the fewest covering primes
    let pick = (0..64)
        .filter(|m| uncovered >> m & 1 == 1)
        .min_by_key(|&m| primes.iter().filter(|p| p.1 >> m & 1 == 1).count())
        .unwrap();
    for (i, p) in primes.iter().enumerate() {
        if p.1 >> pick & 1 == 1 && !chosen.contains(&i) {
            chosen.push(i);
            search(primes, target, covered | p.1, chosen, best);
            chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn table(vars: &[&str], ones: &[usize]) -> TruthTable {
        TruthTable::from_fn(names(vars), |m| ones.contains(&m))
    }

    #[test]
    fn constants() {
        let f = sop_minimize(&table(&["a", "b"], &[])).unwrap();
        assert_eq!((f.to_string(), f.complexity()), ("0".into(), 0));
        let f = sop_minimize(&table(&["a", "b"], &[0, 1, 2, 3])).unwrap();
        assert_eq!((f.to_string(), f.complexity()), ("1".into(), 0));
        let f = sop_minimize(&table(&[], &[0])).unwrap();
        assert_eq!(f.to_string(), "1");
    }

    #[test]
    fn single_literal_and_xor() {
        let f = sop_minimize(&table(&["a", "b"], &[2, 3])).unwrap();
        assert_eq!((f.to_string(), f.complexity()), ("a".into(), 0));
        let f = sop_minimize(&table(&["a", "b"], &[1, 2])).unwrap();
        assert_eq!((f.to_string(), f.complexity()), ("~ab + a~b".into(), 3));
    }

    #[test]
    fn u7_map_with_p5_set() {
        // ones: 111, 001, 100, 101 over (u1, u2, u3)
        let f = sop_minimize(&table(&["u1", "u2", "u3"], &[7, 1, 4, 5])).unwrap();
        assert_eq!(f.to_string(), "u1~u2 + u1u3 + ~u2u3");
        assert_eq!(f.complexity(), 5);
    }

    #[test]
    fn cyclic_cover_is_exact() {
        // the classic cyclic core: ones at 0,1,2,5,6,7 over 3 variables
        let t = table(&["a", "b", "c"], &[0, 1, 2, 5, 6, 7]);
        let f = sop_minimize(&t).unwrap();
        assert_eq!(f.literals(), 6);
        assert_eq!(f.truth_table(), t);
    }

    #[test]
    fn size_limit() {
        let t = TruthTable::from_fn(names(&["a", "b", "c", "d", "e", "f", "g"]), |m| m % 3 == 0);
        assert!(matches!(sop_minimize(&t), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn truth_table_length_is_checked() {
        assert!(TruthTable::new(names(&["a"]), vec![true]).is_err());
    }
}
