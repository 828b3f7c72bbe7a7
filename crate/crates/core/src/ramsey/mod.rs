//! Ramsey values of a triple `(A, B, C)`: how well a single measure on
//! `Emb(B,C)` can make every coloring of `Emb(A,C)` nearly constant on the
//! copies of `A` inside the copies of `B`.

mod adaptive;
mod certificate;
mod decide;
mod stabilize;
mod verify;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::embeddings::{EmbeddingError, EmbeddingSpace};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use crate::measures::{composition_table, Measure, MeasureError};
use crate::minimax::{solve_minimax, Response};
use crate::scalar::Scalar;
use crate::structures::MetricStructure;
use crate::transport::{kantorovich, kantorovich_raw, OscillationBound, OscillationError};

pub use adaptive::{
    adaptive_value, value_adaptive_lower, AdaptiveBound, AdaptiveOptions, AdaptiveValue,
};
pub use certificate::{
    parse_certificate, write_certificate, CertAdaptive, CertCut, CertMode, CertPair,
    WitnessCertificate,
};
pub use decide::{
    decide_witness, search_witness, CandidateResult, Decision, Mode, SearchOutcome, Verdict,
};
pub use stabilize::{stabilize_many, StabilizationReport, Step};
pub use verify::{
    verify_certificate, verify_certificate_text, FailureClass, VerifyFailure, VerifyReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// `Emb(A,B)` is empty: the property holds vacuously.
    NoCopiesOfA,
    /// `Emb(B,C)` is empty: there is no measure to choose.
    NoCopiesOfB,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RamseyError {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Oscillation(#[from] OscillationError),
    #[error("degenerate instance: {0:?}")]
    Degenerate(Degeneracy),
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("chain step {step}: {reason}")]
    Chain { step: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct RamseyInstance<T> {
    pub a: Arc<MetricStructure<T>>,
    pub b: Arc<MetricStructure<T>>,
    pub c: Arc<MetricStructure<T>>,
    pub eps: T,
}

impl<T: Scalar> RamseyInstance<T> {
    pub fn new(
        a: Arc<MetricStructure<T>>,
        b: Arc<MetricStructure<T>>,
        c: Arc<MetricStructure<T>>,
        eps: T,
    ) -> Result<Self, RamseyError> {
        if !eps.is_pos() {
            return Err(RamseyError::NonPositiveEpsilon);
        }
        Ok(Self { a, b, c, eps })
    }
}

/// The three embedding spaces of a triple and the composition table that
/// links them.
#[derive(Debug, Clone)]
pub struct Setup<T> {
    pub ab: Arc<EmbeddingSpace<T>>,
    pub bc: Arc<EmbeddingSpace<T>>,
    pub ac: Arc<EmbeddingSpace<T>>,
    /// `table[β][α]` is the index of `β ∘ α` in `ac`.
    pub table: Vec<Vec<usize>>,
    /// Unordered pairs `α < α'` of `Emb(A,B)`.
    pub pairs: Vec<(usize, usize)>,
}

impl<T: Scalar> Setup<T> {
    pub fn new(
        a: Arc<MetricStructure<T>>,
        b: Arc<MetricStructure<T>>,
        c: Arc<MetricStructure<T>>,
    ) -> Result<Self, RamseyError> {
        let ab = Arc::new(EmbeddingSpace::enumerate(a.clone(), b.clone())?);
        let bc = Arc::new(EmbeddingSpace::enumerate(b, c.clone())?);
        let ac = Arc::new(EmbeddingSpace::enumerate(a, c)?);
        let table = composition_table(&ab, &bc, &ac)?;
        let k = ab.len();
        let pairs = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .collect();
        Ok(Self {
            ab,
            bc,
            ac,
            table,
            pairs,
        })
    }

    pub fn degeneracy(&self) -> Option<Degeneracy> {
        if self.ab.is_empty() {
            Some(Degeneracy::NoCopiesOfA)
        } else if self.bc.is_empty() {
            Some(Degeneracy::NoCopiesOfB)
        } else {
            None
        }
    }

    fn require_nondegenerate(&self) -> Result<(), RamseyError> {
        match self.degeneracy() {
            Some(d) => Err(RamseyError::Degenerate(d)),
            None => Ok(()),
        }
    }

    /// Sorted distinct indices `{β ∘ α : β ∈ Emb(B,C)}` in `ac`.
    pub fn image(&self, alpha: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.table.iter().map(|row| row[alpha]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `ν ∘ δ_α` as merged sparse weights on `ac`, for `ν` sparse on `bc`.
    pub fn pushforward(&self, nu: &[(usize, T)], alpha: usize) -> Vec<(usize, T)> {
        let mut merged: BTreeMap<usize, T> = BTreeMap::new();
        for (beta, w) in nu {
            let e = merged
                .entry(self.table[*beta][alpha])
                .or_insert_with(T::zero);
            *e = e.clone() + w.clone();
        }
        merged.into_iter().collect()
    }

    pub fn pushforward_measure(
        &self,
        nu: &Measure<T>,
        alpha: usize,
    ) -> Result<Measure<T>, RamseyError> {
        if !nu.space().same_as(&self.bc) {
            return Err(MeasureError::SpaceMismatch.into());
        }
        let sparse: Vec<(usize, T)> = nu.atoms().map(|(i, w)| (i, w.clone())).collect();
        Ok(Measure::new(
            self.ac.clone(),
            self.pushforward(&sparse, alpha),
        )?)
    }

    /// Kantorovich bound for every unordered pair of the pushforward family
    /// of `nu`, in pair order.
    pub fn pair_bounds(&self, nu: &Measure<T>) -> Result<Vec<PairBound<T>>, RamseyError> {
        let family = (0..self.ab.len())
            .map(|a| self.pushforward_measure(nu, a))
            .collect::<Result<Vec<_>, _>>()?;
        self.pairs
            .par_iter()
            .map(|&(i, j)| {
                Ok(PairBound {
                    pair: (i, j),
                    bound: kantorovich(&family[i], &family[j])?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct PairBound<T> {
    pub pair: (usize, usize),
    pub bound: OscillationBound<T>,
}

/// A κ-uniform witness: one measure that works for every coloring at once.
#[derive(Debug, Clone)]
pub struct UniformWitness<T> {
    pub value: T,
    pub nu: Measure<T>,
    pub pairs: Vec<PairBound<T>>,
}

/// Largest pair bound; ties keep the earliest pair.
pub fn max_pair_value<T: Scalar>(pairs: &[PairBound<T>]) -> T {
    pairs
        .iter()
        .map(|p| p.bound.value.clone())
        .fold(T::zero(), T::max_of)
}

/// Variables: `λ` on `Emb(B,C)`, then `t`, then one coupling block per pair
/// over the product of the two image sets.
fn coupling_lp<T: Scalar>(setup: &Setup<T>) -> LinearProgram<T> {
    let m = setup.bc.len();
    let t = m;
    let images: Vec<Vec<usize>> = (0..setup.ab.len()).map(|a| setup.image(a)).collect();
    let mut blocks = Vec::with_capacity(setup.pairs.len());
    let mut next = m + 1;
    for &(i, j) in &setup.pairs {
        blocks.push(next);
        next += images[i].len() * images[j].len();
    }
    let mut lp = LinearProgram::new(next, Sense::Minimize);
    lp.set_objective(t, T::one());
    for (p, &(i, j)) in setup.pairs.iter().enumerate() {
        let (xs, ys) = (&images[i], &images[j]);
        let var = |x: usize, y: usize| blocks[p] + x * ys.len() + y;
        for (xi, &x) in xs.iter().enumerate() {
            let terms = (0..ys.len()).map(|yi| (var(xi, yi), T::one())).chain(
                (0..m)
                    .filter(|&b| setup.table[b][i] == x)
                    .map(|b| (b, -T::one())),
            );
            lp.add_sparse(terms, Relation::Eq, T::zero());
        }
        for (yi, &y) in ys.iter().enumerate() {
            let terms = (0..xs.len()).map(|xi| (var(xi, yi), T::one())).chain(
                (0..m)
                    .filter(|&b| setup.table[b][j] == y)
                    .map(|b| (b, -T::one())),
            );
            lp.add_sparse(terms, Relation::Eq, T::zero());
        }
        let cost = xs
            .iter()
            .enumerate()
            .flat_map(|(xi, &x)| {
                ys.iter()
                    .enumerate()
                    .map(move |(yi, &y)| (var(xi, yi), setup.ac.truncated_rho(x, y)))
            })
            .filter(|(_, c)| !c.is_zero())
            .chain([(t, -T::one())]);
        lp.add_sparse(cost, Relation::Le, T::zero());
    }
    lp.add_sparse((0..m).map(|b| (b, T::one())), Relation::Eq, T::one());

    lp
}

/// Discrete truncated metric: `W₁` is total variation, so each pair needs
/// `Σ_x (μ_i − μ_j)(x)^+ ≤ t` with one positive-part variable per point
/// in both image sets.
fn total_variation_lp<T: Scalar>(setup: &Setup<T>) -> LinearProgram<T> {
    let m = setup.bc.len();
    let t = m;
    let n = setup.ac.len();
    let mut rows: Vec<Vec<(usize, T)>> = Vec::new();
    let mut next = m + 1;
    for &(i, j) in &setup.pairs {
        // Signed incidence: λ_b enters μ_i at table[b][i] and μ_j at table[b][j].
        let mut net: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        let mut in_j = vec![false; n];
        for b in 0..m {
            net[setup.table[b][i]].push((b, T::one()));
            net[setup.table[b][j]].push((b, -T::one()));
            in_j[setup.table[b][j]] = true;
        }
        let mut total: Vec<(usize, T)> = vec![(t, -T::one())];
        for (x, terms) in net.into_iter().enumerate() {
            let mut merged: BTreeMap<usize, T> = BTreeMap::new();
            for (b, c) in terms {
                let e = merged.entry(b).or_insert_with(T::zero);
                *e = e.clone() + c;
            }
            merged.retain(|_, c| !c.is_zero());
            if merged.is_empty() {
                continue;
            }
            if in_j[x] {
                let mut row: Vec<(usize, T)> = merged.into_iter().collect();
                row.push((next, -T::one()));
                rows.push(row);
                total.push((next, T::one()));
                next += 1;
            } else {
                total.extend(merged);
            }
        }
        rows.push(total);
    }
    let mut lp = LinearProgram::new(next, Sense::Minimize);
    lp.set_objective(t, T::one());
    for row in rows {
        lp.add_sparse(row, Relation::Le, T::zero());
    }
    lp.add_sparse((0..m).map(|b| (b, T::one())), Relation::Eq, T::one());
    lp
}

/// `min_ν max_{α,α'} W₁(ν∘δ_α, ν∘δ_α')` as one LP: weights `λ` on
/// `Emb(B,C)`, a coupling block per unordered pair supported on the two image
/// sets, and the bound `t` above every block's transport cost.
pub fn value_uniform<T: Scalar>(setup: &Setup<T>) -> Result<UniformWitness<T>, RamseyError> {
    setup.require_nondegenerate()?;
    if setup.pairs.is_empty() {
        let nu = Measure::dirac(setup.bc.clone(), 0)?;
        return Ok(UniformWitness {
            value: T::zero(),
            nu,
            pairs: Vec::new(),
        });
    }
    let m = setup.bc.len();
    let lp = if setup.ac.is_discrete() {
        total_variation_lp(setup)
    } else {
        coupling_lp(setup)
    };

    let sol = solve_lp(&lp).expect("uniform-value LP is well formed");
    assert_eq!(
        sol.status,
        LpStatus::Optimal,
        "uniform-value LP is feasible and bounded"
    );
    let atoms: Vec<(usize, T)> = sol.primal[..m]
        .iter()
        .cloned()
        .enumerate()
        .filter(|(_, w)| w.is_pos())
        .collect();
    let nu = Measure::new(setup.bc.clone(), atoms)?;
    let pairs = setup.pair_bounds(&nu)?;
    let value = max_pair_value(&pairs);
    assert!(
        value.approx_eq(&sol.objective),
        "pair bounds {value} disagree with LP value {}",
        sol.objective
    );
    Ok(UniformWitness { value, nu, pairs })
}

/// Certificate that no measure does better than `value`: each cut is a
/// pair and a coloring, and the weighted cuts beat `value` on every
/// embedding of `B`.
#[derive(Debug, Clone)]
pub struct LowerBoundCut<T> {
    pub pair: (usize, usize),
    pub weight: T,
    /// Values on all of `Emb(A,C)`.
    pub potential: Vec<T>,
}

pub fn uniform_lower_bound<T: Scalar>(
    setup: &Setup<T>,
    witness: &UniformWitness<T>,
) -> Result<Vec<LowerBoundCut<T>>, RamseyError> {
    setup.require_nondegenerate()?;
    if setup.pairs.is_empty() {
        return Ok(Vec::new());
    }
    let m = setup.bc.len();
    let coeffs = |p: usize, phi: &[T]| -> Vec<T> {
        let (i, j) = setup.pairs[p];
        (0..m)
            .map(|b| phi[setup.table[b][i]].clone() - phi[setup.table[b][j]].clone())
            .collect()
    };
    let oracle = |lambda: &[T]| -> Vec<Response<T, Vec<T>>> {
        let nu: Vec<(usize, T)> = lambda
            .iter()
            .cloned()
            .enumerate()
            .filter(|(_, w)| w.is_pos())
            .collect();
        (0..setup.pairs.len())
            .into_par_iter()
            .map(|p| {
                let (i, j) = setup.pairs[p];
                let raw = kantorovich_raw(
                    setup.ac.len(),
                    |x, y| setup.ac.truncated_rho(x, y),
                    &setup.pushforward(&nu, i),
                    &setup.pushforward(&nu, j),
                );
                Response {
                    value: raw.value,
                    coeffs: coeffs(p, &raw.potential),
                    payload: raw.potential,
                }
            })
            .collect()
    };
    let seed = witness
        .pairs
        .iter()
        .enumerate()
        .map(|(p, pb)| {
            let phi = pb.bound.potential.values().to_vec();
            (
                p,
                Response {
                    value: pb.bound.value.clone(),
                    coeffs: coeffs(p, &phi),
                    payload: phi,
                },
            )
        })
        .collect();
    let sol = solve_minimax(m, oracle, seed);
    assert!(
        sol.value.approx_eq(&witness.value),
        "cutting planes reached {} but the LP gave {}",
        sol.value,
        witness.value
    );
    Ok(sol
        .cuts
        .into_iter()
        .map(|c| LowerBoundCut {
            pair: setup.pairs[c.pair],
            weight: c.weight,
            potential: c.payload,
        })
        .collect())
}

#[cfg(test)]
mod tests;
