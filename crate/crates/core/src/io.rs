//! Text formats: relations, domain declarations, dependencies, evidence and
//! hyperedge lists, plus the fixed probability formatting used by every
//! serializer.

use std::collections::BTreeMap;

use crate::attr::{Attr, AttrSet, AttributeDecl};
use crate::dependency::{DepKind, Dependency};
use crate::error::{Error, Result};
use crate::relation::Relation;

/// Declared domains, attribute name to ordered values.
pub type DomainMap = BTreeMap<Attr, Vec<String>>;

/// Name of the optional multiplicity column in relation files.
pub const COUNT_COLUMN: &str = "__count";

fn parse_err(source: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: source.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Content lines with `#` comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn split_names(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

/// Parses `attr: v1,v2,...` lines.
pub fn parse_domains(text: &str, source: &str) -> Result<DomainMap> {
    let mut out = DomainMap::new();
    for (n, line) in content_lines(text) {
        let (name, values) = line
            .split_once(':')
            .ok_or_else(|| parse_err(source, n, "expected `attr: v1,v2,...`"))?;
        let name = Attr::new(name.trim());
        let values: Vec<String> = split_names(values).into_iter().map(String::from).collect();
        AttributeDecl::new(name.clone(), &values).map_err(|e| parse_err(source, n, e.to_string()))?;
        if out.insert(name.clone(), values).is_some() {
            return Err(parse_err(source, n, format!("domain of {name} declared twice")));
        }
    }
    Ok(out)
}

/// Parses a comma-delimited relation. Line 1 names the attributes, optionally
/// with a trailing `__count` column carrying multiplicities. Attributes without
/// a declared domain take their values in order of first appearance.
pub fn parse_relation(text: &str, domains: &DomainMap, source: &str) -> Result<Relation> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(source, 1, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let counted = header.last().map(String::as_str) == Some(COUNT_COLUMN);
    let names: Vec<Attr> = header[..header.len() - usize::from(counted)]
        .iter()
        .map(|h| Attr::new(h.as_str()))
        .collect();
    if names.is_empty() {
        return Err(parse_err(source, 1, "header names no attributes"));
    }
    if let Some(i) = names.iter().position(|a| a.as_str() == COUNT_COLUMN) {
        return Err(parse_err(source, 1, format!("{COUNT_COLUMN} must be the last column, found at {}", i + 1)));
    }

    let mut rows: Vec<(usize, Vec<String>, u64)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(source, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(parse_err(
                source,
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let values: Vec<String> = rec.iter().take(names.len()).map(String::from).collect();
        let count = if counted {
            rec[names.len()]
                .parse::<u64>()
                .map_err(|_| parse_err(source, line, format!("bad count {:?}", &rec[names.len()])))?
        } else {
            1
        };
        rows.push((line, values, count));
    }

    let mut scheme = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        let domain = match domains.get(name) {
            Some(d) => d.clone(),
            None => {
                let mut seen: Vec<String> = Vec::new();
                for (_, vals, _) in &rows {
                    if !seen.contains(&vals[i]) {
                        seen.push(vals[i].clone());
                    }
                }
                if seen.is_empty() {
                    return Err(parse_err(source, 1, format!("no domain for {name} and no rows")));
                }
                seen
            }
        };
        scheme.push(AttributeDecl::new(name.clone(), &domain).map_err(|e| parse_err(source, 1, e.to_string()))?);
    }
    let mut rel = Relation::new(scheme).map_err(|e| parse_err(source, 1, e.to_string()))?;
    for (line, values, count) in rows {
        let vals: Vec<&str> = values.iter().map(String::as_str).collect();
        rel.insert(&vals, count).map_err(|e| parse_err(source, line, e.to_string()))?;
    }
    Ok(rel)
}

/// Serializes a relation in the format read by [`parse_relation`]; a count
/// column is written when any multiplicity exceeds one.
pub fn write_relation(r: &Relation) -> String {
    let counted = r.rows().any(|(_, n)| n > 1);
    let mut out: Vec<String> = r.scheme().iter().map(|d| d.name.to_string()).collect();
    if counted {
        out.push(COUNT_COLUMN.to_string());
    }
    let mut s = out.join(",") + "\n";
    for (vals, n) in r.value_rows() {
        s += &vals.join(",");
        if counted {
            s += &format!(",{n}");
        }
        s += "\n";
    }
    s
}

/// Parses dependency lines: `X -> A` (FD), `X ->> Y` (MD), `X |-> Y` (PD).
pub fn parse_dependencies(text: &str, source: &str) -> Result<Vec<Dependency>> {
    let mut out = Vec::new();
    for (n, line) in content_lines(text) {
        let (kind, arrow) = if line.contains("|->") {
            (DepKind::Pd, "|->")
        } else if line.contains("->>") {
            (DepKind::Md, "->>")
        } else if line.contains("->") {
            (DepKind::Fd, "->")
        } else {
            return Err(parse_err(source, n, "expected `->`, `->>` or `|->`"));
        };
        let (lhs, rhs) = line.split_once(arrow).unwrap();
        let rhs: AttrSet = split_names(rhs).into_iter().map(Attr::from).collect();
        if rhs.is_empty() {
            return Err(parse_err(source, n, "empty right-hand side"));
        }
        let lhs: AttrSet = split_names(lhs).into_iter().map(Attr::from).collect();
        out.push(Dependency::new(kind, lhs, rhs));
    }
    Ok(out)
}

pub fn write_dependencies(deps: &[Dependency]) -> String {
    deps.iter().map(|d| format!("{d}\n")).collect()
}

/// One entry of an evidence file, before it is resolved against domains.
#[derive(Debug, Clone, PartialEq)]
pub enum EvidenceItem {
    /// `attr=value`
    Hard(Attr, String),
    /// `marginal X,Y { x,y : p ... }`
    Marginal(Vec<Attr>, Vec<(Vec<String>, f64)>),
}

/// Parses hard evidence lines and `marginal` blocks. Block entries are
/// separated by newlines or `;`.
pub fn parse_evidence(text: &str, source: &str) -> Result<Vec<EvidenceItem>> {
    let mut out = Vec::new();
    let lines: Vec<(usize, &str)> = content_lines(text).collect();
    let mut i = 0;
    while i < lines.len() {
        let (n, line) = lines[i];
        i += 1;
        if let Some(rest) = line.strip_prefix("marginal") {
            let (head, mut body) = rest
                .split_once('{')
                .ok_or_else(|| parse_err(source, n, "expected `{` after marginal attributes"))?;
            let attrs: Vec<Attr> = split_names(head).into_iter().map(Attr::from).collect();
            if attrs.is_empty() {
                return Err(parse_err(source, n, "marginal block names no attributes"));
            }
            let mut entries_text = Vec::new();
            let mut closed = false;
            let mut entry_line = n;
            loop {
                if let Some((inside, after)) = body.split_once('}') {
                    entries_text.push((entry_line, inside.to_string()));
                    if !after.trim().is_empty() {
                        return Err(parse_err(source, entry_line, "unexpected text after `}`"));
                    }
                    closed = true;
                    break;
                }
                entries_text.push((entry_line, body.to_string()));
                if i >= lines.len() {
                    break;
                }
                entry_line = lines[i].0;
                body = lines[i].1;
                i += 1;
            }
            if !closed {
                return Err(parse_err(source, n, "unterminated marginal block"));
            }
            let mut entries = Vec::new();
            for (ln, chunk) in entries_text {
                for entry in chunk.split(';').map(str::trim).filter(|e| !e.is_empty()) {
                    let (cfg, p) = entry
                        .split_once(':')
                        .ok_or_else(|| parse_err(source, ln, "expected `values : probability`"))?;
                    let cfg: Vec<String> = split_names(cfg).into_iter().map(String::from).collect();
                    if cfg.len() != attrs.len() {
                        return Err(parse_err(
                            source,
                            ln,
                            format!("entry has {} values for {} attributes", cfg.len(), attrs.len()),
                        ));
                    }
                    let p: f64 = p
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(source, ln, format!("bad probability {:?}", p.trim())))?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(parse_err(source, ln, format!("probability {p} outside [0,1]")));
                    }
                    entries.push((cfg, p));
                }
            }
            out.push(EvidenceItem::Marginal(attrs, entries));
        } else {
            let (a, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(source, n, "expected `attr=value` or a marginal block"))?;
            let (a, v) = (a.trim(), v.trim());
            if a.is_empty() || v.is_empty() {
                return Err(parse_err(source, n, "expected `attr=value`"));
            }
            out.push(EvidenceItem::Hard(Attr::new(a), v.to_string()));
        }
    }
    Ok(out)
}

/// One hyperedge per line, comma-separated attribute names.
pub fn parse_hyperedges(text: &str, source: &str) -> Result<Vec<AttrSet>> {
    let mut out = Vec::new();
    for (n, line) in content_lines(text) {
        let edge: AttrSet = split_names(line).into_iter().map(Attr::from).collect();
        if edge.is_empty() {
            return Err(parse_err(source, n, "empty hyperedge"));
        }
        out.push(edge);
    }
    Ok(out)
}

/// Fixed probability rendering: nine fractional digits, with exact 0 and 1
/// printed as `0` and `1`.
pub fn fmt_prob(p: f64) -> String {
    if p == 0.0 {
        "0".to_string()
    } else if p == 1.0 {
        "1".to_string()
    } else {
        let s = format!("{p:.9}");
        if s == "-0.000000000" {
            "0.000000000".to_string()
        } else {
            s
        }
    }
}
