//! Finite metric structures over a relational signature with `[0,1]`-valued,
//! 1-Lipschitz predicates.

mod format;
mod preset;

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

pub use format::{
    parse_structure, parse_structure_tokens, structure_hash, write_structure, FormatError,
};
pub use preset::{ClassPreset, PresetKind};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("relation symbol names must be nonempty")]
    EmptySymbolName,
    #[error("duplicate relation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("relation symbol `{0}` has arity 0")]
    ZeroArity(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("expected {expected} entries, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("duplicate point identifier `{0}`")]
    DuplicatePoint(String),
    #[error("preset {preset} supports sizes {min}..={max}, got {size}")]
    SizeOutOfRange {
        preset: String,
        min: usize,
        max: usize,
        size: usize,
    },
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, StructureError> {
        for (i, s) in symbols.iter().enumerate() {
            if s.name.is_empty() {
                return Err(StructureError::EmptySymbolName);
            }
            if s.arity == 0 {
                return Err(StructureError::ZeroArity(s.name.clone()));
            }
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(StructureError::DuplicateSymbol(s.name.clone()));
            }
        }
        Ok(Self { symbols })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }
}

/// A finite universe with a symmetric distance matrix and one value table per
/// relation symbol. Tables are indexed row-major by tuples of point indices.
///
/// Construction does not validate; call [`MetricStructure::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetricStructure<T> {
    signature: Signature,
    points: Vec<String>,
    dist: Vec<T>,
    predicates: Vec<Vec<T>>,
}

impl<T: Scalar> MetricStructure<T> {
    /// `dist` is the full `n×n` matrix, row-major. `predicates[k]` has
    /// `n^arity_k` entries.
    pub fn new(
        signature: Signature,
        points: Vec<String>,
        dist: Vec<T>,
        predicates: Vec<Vec<T>>,
    ) -> Result<Self, StructureError> {
        let n = points.len();
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(StructureError::DuplicatePoint(p.clone()));
            }
        }
        if dist.len() != n * n {
            return Err(StructureError::WrongLength {
                expected: n * n,
                found: dist.len(),
            });
        }
        if predicates.len() != signature.symbols.len() {
            return Err(StructureError::WrongLength {
                expected: signature.symbols.len(),
                found: predicates.len(),
            });
        }
        for (sym, table) in signature.symbols.iter().zip(&predicates) {
            let expected = n.pow(sym.arity as u32);
            if table.len() != expected {
                return Err(StructureError::WrongLength {
                    expected,
                    found: table.len(),
                });
            }
        }
        Ok(Self {
            signature,
            points,
            dist,
            predicates,
        })
    }

    /// Build from a distance function and per-symbol predicate functions.
    pub fn from_fns(
        signature: Signature,
        points: Vec<String>,
        dist: impl Fn(usize, usize) -> T,
        predicate: impl Fn(usize, &[usize]) -> T,
    ) -> Result<Self, StructureError> {
        let n = points.len();
        let mut d = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                d.push(if i == j { T::zero() } else { dist(i, j) });
            }
        }
        let preds = signature
            .symbols
            .iter()
            .enumerate()
            .map(|(k, sym)| {
                tuples(n, sym.arity)
                    .map(|t| predicate(k, &t))
                    .collect::<Vec<_>>()
            })
            .collect();
        Self::new(signature, points, d, preds)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn dist(&self, x: usize, y: usize) -> &T {
        &self.dist[x * self.len() + y]
    }

    pub fn predicate_table(&self, symbol: usize) -> &[T] {
        &self.predicates[symbol]
    }

    pub fn predicate(&self, symbol: usize, tuple: &[usize]) -> &T {
        &self.predicates[symbol][tuple_index(self.len(), tuple)]
    }

    pub fn diameter(&self) -> T {
        self.dist.iter().cloned().fold(T::zero(), T::max_of)
    }

    /// `true` when every off-diagonal distance is exactly 1.
    pub fn is_discrete(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.dist(i, j).approx_eq(&T::one())))
    }

    /// Same universe and predicates, distances capped at 1.
    pub fn truncated_metric(&self) -> Self {
        let one = T::one();
        Self {
            signature: self.signature.clone(),
            points: self.points.clone(),
            dist: self
                .dist
                .iter()
                .map(|d| T::min_of(d.clone(), one.clone()))
                .collect(),
            predicates: self.predicates.clone(),
        }
    }

    /// The substructure induced on `subset`, in the given order.
    pub fn induced(&self, subset: &[usize]) -> Result<Self, StructureError> {
        if let Some(&bad) = subset.iter().find(|&&p| p >= self.len()) {
            return Err(StructureError::PointOutOfRange(bad));
        }
        let points = subset.iter().map(|&p| self.points[p].clone()).collect();
        Self::from_fns(
            self.signature.clone(),
            points,
            |i, j| self.dist(subset[i], subset[j]).clone(),
            |k, t| {
                let mapped: Vec<usize> = t.iter().map(|&i| subset[i]).collect();
                self.predicate(k, &mapped).clone()
            },
        )
    }

    /// Check every metric and predicate axiom against `sig`.
    pub fn validate(&self, sig: &Signature) -> ValidationReport {
        let mut violations = Vec::new();
        if &self.signature != sig {
            violations.push(Violation::SignatureMismatch);
        }
        let n = self.len();
        for x in 0..n {
            if !self.dist(x, x).is_negligible() {
                violations.push(Violation::NonzeroDiagonal { x });
            }
            for y in 0..n {
                if x == y {
                    continue;
                }
                if x < y && !self.dist(x, y).approx_eq(self.dist(y, x)) {
                    violations.push(Violation::Asymmetric { x, y });
                }
                if !self.dist(x, y).is_pos() {
                    violations.push(Violation::NonPositive { x, y });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == z || x == y || y == z {
                        continue;
                    }
                    let via = self.dist(x, y).clone() + self.dist(y, z).clone();
                    if !self.dist(x, z).approx_le(&via) {
                        violations.push(Violation::Triangle { x, y, z });
                    }
                }
            }
        }
        for (k, sym) in self.signature.symbols.iter().enumerate() {
            let table = &self.predicates[k];
            let all: Vec<Vec<usize>> = tuples(n, sym.arity).collect();
            for (ti, t) in all.iter().enumerate() {
                let v = &table[ti];
                if v.is_neg() || !v.approx_le(&T::one()) {
                    violations.push(Violation::PredicateRange {
                        symbol: sym.name.clone(),
                        tuple: t.clone(),
                    });
                }
            }
            for (ti, t) in all.iter().enumerate() {
                for (ui, u) in all.iter().enumerate().skip(ti + 1) {
                    let gap = (table[ti].clone() - table[ui].clone()).abs();
                    let spread = t
                        .iter()
                        .zip(u)
                        .map(|(&a, &b)| self.dist(a, b).clone())
                        .fold(T::zero(), T::max_of);
                    if !gap.approx_le(&spread) {
                        violations.push(Violation::Lipschitz {
                            symbol: sym.name.clone(),
                            first: t.clone(),
                            second: u.clone(),
                        });
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// Apply `f` to every scalar entry.
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> MetricStructure<U> {
        MetricStructure {
            signature: self.signature.clone(),
            points: self.points.clone(),
            dist: self.dist.iter().map(&f).collect(),
            predicates: self
                .predicates
                .iter()
                .map(|t| t.iter().map(&f).collect())
                .collect(),
        }
    }
}

/// All `arity`-tuples over `0..n` in row-major order.
pub fn tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(arity as u32);
    (0..total).map(move |mut idx| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
        t
    })
}

pub fn tuple_index(n: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * n + x)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SignatureMismatch,
    NonzeroDiagonal {
        x: usize,
    },
    Asymmetric {
        x: usize,
        y: usize,
    },
    NonPositive {
        x: usize,
        y: usize,
    },
    Triangle {
        x: usize,
        y: usize,
        z: usize,
    },
    PredicateRange {
        symbol: String,
        tuple: Vec<usize>,
    },
    Lipschitz {
        symbol: String,
        first: Vec<usize>,
        second: Vec<usize>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Human-readable lines naming the witnessing points.
    pub fn describe<T>(&self, s: &MetricStructure<T>) -> Vec<String> {
        let name = |i: usize| s.points.get(i).cloned().unwrap_or_else(|| i.to_string());
        let names = |t: &[usize]| t.iter().map(|&i| name(i)).collect::<Vec<_>>().join(",");
        self.violations
            .iter()
            .map(|v| match v {
                Violation::SignatureMismatch => "signature mismatch".to_string(),
                Violation::NonzeroDiagonal { x } => {
                    format!("nonzero self-distance at ({})", name(*x))
                }
                Violation::Asymmetric { x, y } => {
                    format!("asymmetric distance at ({},{})", name(*x), name(*y))
                }
                Violation::NonPositive { x, y } => {
                    format!("non-positive distance at ({},{})", name(*x), name(*y))
                }
                Violation::Triangle { x, y, z } => format!(
                    "triangle violation at ({},{},{})",
                    name(*x),
                    name(*y),
                    name(*z)
                ),
                Violation::PredicateRange { symbol, tuple } => {
                    format!("{symbol}({}) outside [0,1]", names(tuple))
                }
                Violation::Lipschitz {
                    symbol,
                    first,
                    second,
                } => format!(
                    "Lipschitz violation for {symbol} at ({}) vs ({})",
                    names(first),
                    names(second)
                ),
            })
            .collect()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn signature_rules() {
        let sym = |n: &str, a| Symbol {
            name: n.into(),
            arity: a,
        };
        assert!(Signature::new(vec![sym("R", 1), sym("S", 2)]).is_ok());
        assert_eq!(
            Signature::new(vec![sym("R", 1), sym("R", 2)]),
            Err(StructureError::DuplicateSymbol("R".into()))
        );
        assert_eq!(
            Signature::new(vec![sym("", 1)]),
            Err(StructureError::EmptySymbolName)
        );
        assert_eq!(
            Signature::new(vec![sym("R", 0)]),
            Err(StructureError::ZeroArity("R".into()))
        );
    }

    #[test]
    fn linear_order_passes() {
        let s: MetricStructure<Rational> = ClassPreset::new(PresetKind::LinearOrders)
            .generate(3)
            .unwrap();
        assert!(s.validate(s.signature()).passed());
    }

    #[test]
    fn triangle_violation_is_named() {
        let d = [[0, 1, 3], [1, 0, 1], [3, 1, 0]];
        let s = MetricStructure::from_fns(
            Signature::empty(),
            vec!["a".into(), "b".into(), "c".into()],
            |i, j| q(d[i][j], 1),
            |_, _| unreachable!(),
        )
        .unwrap();
        let report = s.validate(&Signature::empty());
        assert!(report
            .violations
            .contains(&Violation::Triangle { x: 0, y: 1, z: 2 }));
        assert!(report.describe(&s)[0].contains("(a,b,c)"));
    }

    #[test]
    fn lipschitz_violation() {
        let sig = Signature::new(vec![Symbol {
            name: "R".into(),
            arity: 1,
        }])
        .unwrap();
        let s = MetricStructure::from_fns(
            sig.clone(),
            vec!["a".into(), "b".into()],
            |_, _| q(1, 2),
            |_, t| q(t[0] as i64, 1),
        )
        .unwrap();
        let report = s.validate(&sig);
        assert_eq!(
            report.violations,
            vec![Violation::Lipschitz {
                symbol: "R".into(),
                first: vec![0],
                second: vec![1]
            }]
        );
    }

    #[test]
    fn range_and_symmetry_violations() {
        let sig = Signature::new(vec![Symbol {
            name: "R".into(),
            arity: 1,
        }])
        .unwrap();
        let s = MetricStructure::new(
            sig.clone(),
            names(2),
            vec![q(0, 1), q(1, 1), q(1, 2), q(0, 1)],
            vec![vec![q(3, 2), q(0, 1)]],
        )
        .unwrap();
        let v = s.validate(&sig).violations;
        assert!(v.contains(&Violation::Asymmetric { x: 0, y: 1 }));
        assert!(v.contains(&Violation::PredicateRange {
            symbol: "R".into(),
            tuple: vec![0]
        }));
        assert!(!s.validate(&Signature::empty()).passed());
    }

    #[test]
    fn truncation() {
        let s = MetricStructure::from_fns(
            Signature::empty(),
            names(3),
            |i, j| {
                if i + j == 2 {
                    q(3, 1)
                } else {
                    q(1, 2) + q((i + j) as i64 % 2, 1)
                }
            },
            |_, _| unreachable!(),
        )
        .unwrap();
        let t = s.truncated_metric();
        assert_eq!(t.dist(0, 2), &q(1, 1));
        assert_eq!(t.truncated_metric(), t);
        let half = MetricStructure::from_fns(
            Signature::empty(),
            names(2),
            |_, _| q(1, 2),
            |_, _| unreachable!(),
        )
        .unwrap();
        assert_eq!(half.truncated_metric().dist(0, 1), &q(1, 2));
        let discrete: MetricStructure<Rational> =
            ClassPreset::new(PresetKind::PureSets).generate(4).unwrap();
        assert_eq!(discrete.truncated_metric(), discrete);
    }

    #[test]
    fn induced_substructure() {
        let s: MetricStructure<Rational> = ClassPreset::new(PresetKind::LinearOrders)
            .generate(4)
            .unwrap();
        let sub = s.induced(&[3, 1]).unwrap();
        assert_eq!(sub.predicate(0, &[0, 1]), &q(0, 1));
        assert_eq!(sub.predicate(0, &[1, 0]), &q(1, 1));
        assert!(s.induced(&[4]).is_err());
    }
}
