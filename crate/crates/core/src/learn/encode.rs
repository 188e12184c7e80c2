//! Index encoding of clique states: each attribute contributes its domain
//! position in `⌈log₂|D|⌉` bits, concatenated in scheme order and written as
//! lowercase hex.

use crate::attr::AttributeDecl;
use crate::error::{Error, Result};

fn width(size: usize) -> usize {
    if size <= 1 {
        0
    } else {
        (usize::BITS - (size - 1).leading_zeros()) as usize
    }
}

fn digits(total_bits: usize) -> usize {
    total_bits.div_ceil(4).max(1)
}

/// Encodes a configuration given as domain positions.
pub fn encode_index(cfg: &[u32], sizes: &[usize]) -> Result<String> {
    if cfg.len() != sizes.len() {
        return Err(Error::schema(format!(
            "configuration has {} values for {} attributes",
            cfg.len(),
            sizes.len()
        )));
    }
    let mut bits = Vec::new();
    for (&c, &s) in cfg.iter().zip(sizes) {
        if c as usize >= s {
            return Err(Error::schema(format!("domain position {c} out of range for size {s}")));
        }
        let w = width(s);
        bits.extend((0..w).rev().map(|b| (c >> b) & 1 == 1));
    }
    let pad = digits(bits.len()) * 4 - bits.len();
    let padded: Vec<bool> = std::iter::repeat(false).take(pad).chain(bits).collect();
    Ok(padded
        .chunks(4)
        .map(|nib| {
            let v = nib.iter().fold(0u32, |acc, &b| acc << 1 | b as u32);
            char::from_digit(v, 16).unwrap()
        })
        .collect())
}

/// Inverse of [`encode_index`].
pub fn decode_index(code: &str, sizes: &[usize]) -> Result<Vec<u32>> {
    let total: usize = sizes.iter().map(|&s| width(s)).sum();
    let bad = || Error::schema(format!("{code:?} is not a valid index for this scheme"));
    if code.len() != digits(total) {
        return Err(bad());
    }
    let mut bits = Vec::with_capacity(code.len() * 4);
    for ch in code.chars() {
        if ch.is_ascii_uppercase() {
            return Err(bad());
        }
        let v = ch.to_digit(16).ok_or_else(bad)?;
        bits.extend((0..4).rev().map(|b| (v >> b) & 1 == 1));
    }
    let pad = bits.len() - total;
    if bits[..pad].iter().any(|&b| b) {
        return Err(bad());
    }
    let mut pos = pad;
    let mut out = Vec::with_capacity(sizes.len());
    for &s in sizes {
        let w = width(s);
        let v = bits[pos..pos + w].iter().fold(0u32, |acc, &b| acc << 1 | b as u32);
        if v as usize >= s.max(1) {
            return Err(bad());
        }
        out.push(v);
        pos += w;
    }
    Ok(out)
}

/// Encodes a tuple of symbolic values.
pub fn encode_tuple<S: AsRef<str>>(values: &[S], scheme: &[AttributeDecl]) -> Result<String> {
    if values.len() != scheme.len() {
        return Err(Error::schema(format!(
            "tuple has {} values for {} attributes",
            values.len(),
            scheme.len()
        )));
    }
    let cfg = values
        .iter()
        .zip(scheme)
        .map(|(v, d)| d.index_of(v.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = scheme.iter().map(AttributeDecl::size).collect();
    encode_index(&cfg, &sizes)
}
