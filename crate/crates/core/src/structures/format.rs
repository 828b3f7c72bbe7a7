//! The `crl-structure v1` text format.
//!
//! ```text
//! crl-structure v1
//! signature 1
//!   < 2
//! points 3
//!   1 2 3
//! dist            # lower triangle, row i lists d(i,0) .. d(i,i-1)
//!   1
//!   1 1
//! predicate < 3   # nonzero entries: tuple then value; others are 0
//!   1 2 1
//!   1 3 1
//!   2 3 1
//! end
//! ```

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{tuple_index, tuples, MetricStructure, Signature, StructureError, Symbol};
use crate::text::{TextError, Tokens};
use crate::Rational;
use num_traits::Zero;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

pub fn parse_structure(input: &str) -> Result<MetricStructure<Rational>, FormatError> {
    let mut tokens = Tokens::new(input);
    let s = parse_structure_tokens(&mut tokens)?;
    if let Some(extra) = tokens.peek() {
        return Err(TextError::Unexpected {
            index: tokens.position(),
            expected: "end of input".into(),
            found: extra.into(),
        }
        .into());
    }
    Ok(s)
}

/// Parse one structure from a token stream, consuming through its `end`.
pub fn parse_structure_tokens(
    t: &mut Tokens<'_>,
) -> Result<MetricStructure<Rational>, FormatError> {
    t.expect("crl-structure")?;
    t.expect("v1")?;
    t.expect("signature")?;
    let k: usize = t.parse("symbol count")?;
    let mut symbols = Vec::with_capacity(k);
    for _ in 0..k {
        let name = t.next_token("symbol name")?.to_string();
        let arity: usize = t.parse("arity")?;
        symbols.push(Symbol { name, arity });
    }
    let signature = Signature::new(symbols)?;
    t.expect("points")?;
    let n: usize = t.parse("point count")?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        points.push(t.next_token("point identifier")?.to_string());
    }
    t.expect("dist")?;
    let mut dist = vec![Rational::zero(); n * n];
    for i in 1..n {
        for j in 0..i {
            let d = t.rational()?;
            dist[i * n + j] = d.clone();
            dist[j * n + i] = d;
        }
    }
    let mut tables: Vec<Option<Vec<Rational>>> = vec![None; signature.symbols().len()];
    loop {
        let index = t.position();
        let tok = t.next_token("`predicate` or `end`")?;
        match tok {
            "end" => break,
            "predicate" => {
                let name = t.next_token("symbol name")?;
                let k = signature
                    .position(name)
                    .ok_or_else(|| StructureError::UnknownSymbol(name.to_string()))?;
                if tables[k].is_some() {
                    return Err(t.invalid(format!("predicate `{name}` listed twice")).into());
                }
                let arity = signature.symbols()[k].arity;
                let count: usize = t.parse("entry count")?;
                let mut table = vec![Rational::zero(); n.pow(arity as u32)];
                for _ in 0..count {
                    let mut tuple = Vec::with_capacity(arity);
                    for _ in 0..arity {
                        let id = t.next_token("point identifier")?;
                        let p = points
                            .iter()
                            .position(|q| q == id)
                            .ok_or_else(|| t.invalid(format!("unknown point `{id}`")))?;
                        tuple.push(p);
                    }
                    table[tuple_index(n, &tuple)] = t.rational()?;
                }
                tables[k] = Some(table);
            }
            other => {
                return Err(TextError::Unexpected {
                    index,
                    expected: "`predicate` or `end`".into(),
                    found: other.into(),
                }
                .into())
            }
        }
    }
    let predicates = signature
        .symbols()
        .iter()
        .zip(tables)
        .map(|(sym, t)| t.unwrap_or_else(|| vec![Rational::zero(); n.pow(sym.arity as u32)]))
        .collect();
    Ok(MetricStructure::new(signature, points, dist, predicates)?)
}

/// Canonical serialization; parsing it back yields an equal structure.
pub fn write_structure(s: &MetricStructure<Rational>) -> String {
    let mut out = String::from("crl-structure v1\n");
    let syms = s.signature().symbols();
    out.push_str(&format!("signature {}\n", syms.len()));
    for sym in syms {
        out.push_str(&format!("  {} {}\n", sym.name, sym.arity));
    }
    out.push_str(&format!("points {}\n", s.len()));
    if !s.is_empty() {
        out.push_str(&format!("  {}\n", s.points().join(" ")));
    }
    out.push_str("dist\n");
    for i in 1..s.len() {
        let row: Vec<String> = (0..i).map(|j| s.dist(i, j).to_string()).collect();
        out.push_str(&format!("  {}\n", row.join(" ")));
    }
    for (k, sym) in syms.iter().enumerate() {
        let table = s.predicate_table(k);
        let entries: Vec<(Vec<usize>, &Rational)> = tuples(s.len(), sym.arity)
            .zip(table)
            .filter(|(_, v)| !v.is_zero())
            .collect();
        out.push_str(&format!("predicate {} {}\n", sym.name, entries.len()));
        for (tuple, v) in entries {
            let ids: Vec<&str> = tuple.iter().map(|&i| s.points()[i].as_str()).collect();
            out.push_str(&format!("  {} {}\n", ids.join(" "), v));
        }
    }
    out.push_str("end\n");
    out
}

/// SHA-256 of the canonical serialization, hex encoded.
pub fn structure_hash(s: &MetricStructure<Rational>) -> String {
    hex::encode(Sha256::digest(write_structure(s).as_bytes()))
}
