use std::fmt;
use std::str::FromStr;

use super::{MetricStructure, Signature, StructureError, Symbol};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetKind {
    PureSets,
    LinearOrders,
    Graphs,
    TwoLevelUltrametric,
}

impl PresetKind {
    pub const ALL: [PresetKind; 4] = [
        PresetKind::PureSets,
        PresetKind::LinearOrders,
        PresetKind::Graphs,
        PresetKind::TwoLevelUltrametric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetKind::PureSets => "pure-sets",
            PresetKind::LinearOrders => "linear-orders",
            PresetKind::Graphs => "graphs",
            PresetKind::TwoLevelUltrametric => "two-level-ultrametric",
        }
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

/// A generator of canonical finite members of a class.
///
/// * `pure-sets`: discrete metric, empty signature.
/// * `linear-orders`: discrete metric, `<` with `<(i,j) = 1` iff `i < j`.
/// * `graphs`: discrete metric, symmetric irreflexive `E`; vertices `i < j`
///   are adjacent iff bit `i` of `j` is set (the initial segment of the
///   binary-coded random graph).
/// * `two-level-ultrametric`: points split into consecutive blocks of size
///   `ceil(sqrt(n))`, distance 1/2 inside a block and 1 across blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassPreset {
    pub kind: PresetKind,
    pub min_size: usize,
    pub max_size: usize,
}

impl ClassPreset {
    pub fn new(kind: PresetKind) -> Self {
        Self {
            kind,
            min_size: 1,
            max_size: 16,
        }
    }

    pub fn signature(&self) -> Signature {
        let sym = |name: &str, arity| Symbol {
            name: name.to_string(),
            arity,
        };
        match self.kind {
            PresetKind::PureSets | PresetKind::TwoLevelUltrametric => Signature::empty(),
            PresetKind::LinearOrders => Signature::new(vec![sym("<", 2)]).unwrap(),
            PresetKind::Graphs => Signature::new(vec![sym("E", 2)]).unwrap(),
        }
    }

    pub fn generate<T: Scalar>(&self, n: usize) -> Result<MetricStructure<T>, StructureError> {
        if n < self.min_size || n > self.max_size {
            return Err(StructureError::SizeOutOfRange {
                preset: self.kind.name().to_string(),
                min: self.min_size,
                max: self.max_size,
                size: n,
            });
        }
        let points: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let indicator = |b: bool| if b { T::one() } else { T::zero() };
        let sig = self.signature();
        match self.kind {
            PresetKind::PureSets => {
                MetricStructure::from_fns(sig, points, |_, _| T::one(), |_, _| T::zero())
            }
            PresetKind::LinearOrders => MetricStructure::from_fns(
                sig,
                points,
                |_, _| T::one(),
                |_, t| indicator(t[0] < t[1]),
            ),
            PresetKind::Graphs => MetricStructure::from_fns(
                sig,
                points,
                |_, _| T::one(),
                |_, t| {
                    let (lo, hi) = (t[0].min(t[1]), t[0].max(t[1]));
                    indicator(lo != hi && (hi >> lo) & 1 == 1)
                },
            ),
            PresetKind::TwoLevelUltrametric => {
                let block = (1..=n).find(|b| b * b >= n).unwrap_or(1);
                MetricStructure::from_fns(
                    sig,
                    points,
                    |i, j| {
                        if i / block == j / block {
                            T::from_ratio(1, 2)
                        } else {
                            T::one()
                        }
                    },
                    |_, _| T::zero(),
                )
            }
        }
    }
}
