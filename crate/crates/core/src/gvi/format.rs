//! Line-oriented text format for factor graphs.
//!
//! ```text
//! # comments start with '#'
//! VAR 3
//! FACTOR prior 0 20.0 9.0            # index, mean, variance
//! FACTOR odom 0 1 1.0 0.01           # from, to, delta, variance
//! FACTOR range 0 2 5.2 0.01 0.5      # a, b, range, variance, offset
//! FACTOR stereo 1 2.0 0.09 400 0.1   # index, z, variance, focal, baseline
//! FACTOR product 1 2 0.5 0.1         # a, b, value, variance
//! FACTOR custom:quartic 2 0.25       # registered type: indices then params
//! ```
//!
//! `VAR` must precede every `FACTOR` line. Numbers are written with Rust's
//! shortest round-trip formatting, so serialize/parse is lossless.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gvi::factor::{Factor, FactorGraph, FactorRegistry};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// `(index count, parameter count)` for a built-in type name.
fn builtin_shape(name: &str) -> Option<(usize, usize)> {
    match name {
        "prior" => Some((1, 2)),
        "odom" => Some((2, 2)),
        "range" => Some((2, 3)),
        "stereo" => Some((1, 4)),
        "product" => Some((2, 2)),
        _ => None,
    }
}

pub fn parse_graph(text: &str, registry: &FactorRegistry) -> Result<FactorGraph> {
    let mut graph: Option<FactorGraph> = None;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("VAR") => {
                if graph.is_some() {
                    return Err(parse_err(line_no, "duplicate VAR line"));
                }
                let n: usize = tokens
                    .next()
                    .ok_or_else(|| parse_err(line_no, "VAR needs a count"))?
                    .parse()
                    .map_err(|_| parse_err(line_no, "VAR count is not a non-negative integer"))?;
                if tokens.next().is_some() {
                    return Err(parse_err(line_no, "trailing tokens after VAR count"));
                }
                graph = Some(FactorGraph::new(n));
            }
            Some("FACTOR") => {
                let g = graph.as_mut().ok_or_else(|| parse_err(line_no, "FACTOR before VAR"))?;
                let name = tokens.next().ok_or_else(|| parse_err(line_no, "FACTOR needs a type"))?;
                let rest: Vec<&str> = tokens.collect();
                let custom = name.strip_prefix("custom:");
                let (n_idx, n_par) = match custom {
                    Some(id) => registry
                        .shape(id)
                        .ok_or_else(|| parse_err(line_no, format!("unregistered custom factor '{id}'")))?,
                    None => builtin_shape(name).ok_or_else(|| parse_err(line_no, format!("unknown factor type '{name}'")))?,
                };
                if rest.len() != n_idx + n_par {
                    return Err(parse_err(
                        line_no,
                        format!("'{name}' expects {n_idx} indices and {n_par} parameters, got {} tokens", rest.len()),
                    ));
                }
                let idx = rest[..n_idx]
                    .iter()
                    .map(|t| t.parse::<usize>().map_err(|_| parse_err(line_no, format!("bad index '{t}'"))))
                    .collect::<Result<Vec<_>>>()?;
                let par = rest[n_idx..]
                    .iter()
                    .map(|t| {
                        t.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| parse_err(line_no, format!("bad number '{t}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let built = match (custom, name) {
                    (Some(id), _) => registry.build(id, idx, &par),
                    (None, "prior") => Factor::prior(idx[0], par[0], par[1]),
                    (None, "odom") => Factor::odometry(idx[0], idx[1], par[0], par[1]),
                    (None, "range") => Factor::range(idx[0], idx[1], par[0], par[1], par[2]),
                    (None, "stereo") => Factor::stereo(idx[0], par[0], par[1], par[2], par[3]),
                    (None, "product") => Factor::product(idx[0], idx[1], par[0], par[1]),
                    _ => unreachable!("shape lookup accepted only known types"),
                };
                let factor = built.map_err(|e| parse_err(line_no, e.to_string()))?;
                g.push(factor).map_err(|e| parse_err(line_no, e.to_string()))?;
            }
            Some(other) => return Err(parse_err(line_no, format!("unknown directive '{other}'"))),
            None => {}
        }
    }
    graph.ok_or_else(|| parse_err(0, "missing VAR line"))
}

pub fn serialize_graph(graph: &FactorGraph) -> String {
    let mut out = String::new();
    writeln!(out, "VAR {}", graph.num_vars()).expect("write to string");
    for f in graph.factors() {
        let mut line = format!("FACTOR {}", f.kind().name());
        for i in f.indices() {
            write!(line, " {i}").expect("write to string");
        }
        for p in f.kind().params() {
            write!(line, " {p:?}").expect("write to string");
        }
        writeln!(out, "{line}").expect("write to string");
    }
    out
}

/// Whether two graphs have identical factor lists (types, indices,
/// parameters).
pub fn same_structure(a: &FactorGraph, b: &FactorGraph) -> bool {
    a.num_vars() == b.num_vars()
        && a.factors().len() == b.factors().len()
        && a.factors().iter().zip(b.factors()).all(|(x, y)| x.kind() == y.kind() && x.indices() == y.indices())
}
