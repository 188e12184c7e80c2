//! Dense probability tables over a small ordered set of attributes.

use crate::attr::{configurations, offset, AttrSet, AttributeDecl};
use crate::error::{Error, Result};

/// A table of nonnegative reals indexed by the joint configurations of `vars`,
/// stored row-major with the first variable most significant. Configuration
/// order therefore coincides with index-encoding order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    vars: Vec<AttributeDecl>,
    values: Vec<f64>,
}

/// Frequencies of an attribute subset (`F_X(r)`).
pub type FrequencyTable = Distribution;

/// A probability table over the joint states of one clique.
pub type CliquePotential = Distribution;

impl Distribution {
    pub fn zeros(vars: Vec<AttributeDecl>) -> Self {
        let n = vars.iter().map(AttributeDecl::size).product();
        Distribution {
            vars,
            values: vec![0.0; n],
        }
    }

    pub fn filled(vars: Vec<AttributeDecl>, value: f64) -> Self {
        let mut d = Self::zeros(vars);
        d.values.iter_mut().for_each(|v| *v = value);
        d
    }

    pub fn from_values(vars: Vec<AttributeDecl>, values: Vec<f64>) -> Result<Self> {
        let n: usize = vars.iter().map(AttributeDecl::size).product();
        if n != values.len() {
            return Err(Error::schema(format!(
                "table over {} configurations given {} values",
                n,
                values.len()
            )));
        }
        Ok(Distribution { vars, values })
    }

    pub fn vars(&self) -> &[AttributeDecl] {
        &self.vars
    }

    pub fn scheme(&self) -> AttrSet {
        self.vars.iter().map(|v| v.name.clone()).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.vars.iter().map(AttributeDecl::size).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, cfg: &[u32]) -> f64 {
        self.values[offset(&self.sizes(), cfg)]
    }

    pub fn set(&mut self, cfg: &[u32], value: f64) {
        let k = offset(&self.sizes(), cfg);
        self.values[k] = value;
    }

    /// Looks up a configuration given as symbolic values.
    pub fn prob_of(&self, values: &[&str]) -> Result<f64> {
        if values.len() != self.vars.len() {
            return Err(Error::schema("configuration arity mismatch"));
        }
        let cfg = self
            .vars
            .iter()
            .zip(values)
            .map(|(d, v)| d.index_of(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.get(&cfg))
    }

    /// Iterates `(configuration, value)` in configuration order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, f64)> + '_ {
        let sizes = self.sizes();
        configurations(&sizes)
            .collect::<Vec<_>>()
            .into_iter()
            .zip(self.values.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Scales to unit mass. A zero table is left as is.
    pub fn normalize(&mut self) -> f64 {
        let z = self.total();
        if z > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= z);
        }
        z
    }

    /// Positions of the given attributes within this table, in table order.
    pub fn positions(&self, attrs: &AttrSet) -> Result<Vec<usize>> {
        for a in attrs {
            if !self.vars.iter().any(|v| &v.name == a) {
                return Err(Error::Scope(format!("{a} is not in table scope")));
            }
        }
        Ok(self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| attrs.contains(&v.name))
            .map(|(i, _)| i)
            .collect())
    }

    /// Sums out everything outside `attrs`.
    pub fn marginal(&self, attrs: &AttrSet) -> Result<Distribution> {
        let pos = self.positions(attrs)?;
        let vars: Vec<AttributeDecl> = pos.iter().map(|&i| self.vars[i].clone()).collect();
        let sub_sizes: Vec<usize> = vars.iter().map(AttributeDecl::size).collect();
        let mut out = Distribution::zeros(vars);
        for (cfg, v) in self.iter() {
            let sub: Vec<u32> = pos.iter().map(|&i| cfg[i]).collect();
            out.values[offset(&sub_sizes, &sub)] += v;
        }
        Ok(out)
    }

    /// Largest absolute difference against a table over the same variables.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        debug_assert_eq!(self.vars, other.vars);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Renders a configuration as its symbolic values.
    pub fn render(&self, cfg: &[u32]) -> Vec<String> {
        self.vars
            .iter()
            .zip(cfg)
            .map(|(d, &c)| d.value(c).to_string())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attr::attr_set;

    fn bin(name: &str) -> AttributeDecl {
        AttributeDecl::new(name, &["0", "1"]).unwrap()
    }

    #[test]
    fn marginal_sums_out() {
        let d = Distribution::from_values(vec![bin("a"), bin("b")], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let m = d.marginal(&attr_set(&["a"])).unwrap();
        assert!((m.values()[0] - 0.3).abs() < 1e-12);
        assert!((m.values()[1] - 0.7).abs() < 1e-12);
        let m = d.marginal(&attr_set(&["b"])).unwrap();
        assert!((m.values()[1] - 0.6).abs() < 1e-12);
        assert!(d.marginal(&attr_set(&["c"])).is_err());
    }

    #[test]
    fn empty_marginal_is_total_mass() {
        let d = Distribution::filled(vec![bin("a")], 0.5);
        let m = d.marginal(&AttrSet::new()).unwrap();
        assert_eq!(m.values(), &[1.0]);
    }
}
