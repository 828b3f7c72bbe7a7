//! Stabilize several colorings at once along a chain `B = C_0, C_1, …, C_N`.
//!
//! Working down from `μ_N = δ_id`, step `j` lifts the `(j+1)`-th coloring to
//! `Emb(A, C_{j+1})` through `μ_{j+1}`, picks `ν_j` on `Emb(C_j, C_{j+1})`
//! that stabilizes the lift, and sets `μ_j = μ_{j+1} ∘ ν_j`.

use std::sync::Arc;

use super::{adaptive_value, value_uniform, RamseyError, Setup};
use crate::embeddings::{Embedding, EmbeddingSpace};
use crate::measures::{compose_measures, evaluate_coloring, Coloring, Measure};
use crate::scalar::Scalar;
use crate::structures::MetricStructure;

#[derive(Debug, Clone)]
pub enum Step<T> {
    /// Use the κ-uniform optimal measure of `(A, C_j, C_{j+1})`.
    Uniform,
    /// Minimize the oscillation of the lifted coloring alone.
    Adaptive,
    /// A given measure on `Emb(C_j, C_{j+1})`.
    Supplied(Measure<T>),
}

#[derive(Debug, Clone)]
pub struct StabilizationReport<T> {
    /// `μ_0` on `Emb(B, C_N)`.
    pub mu: Measure<T>,
    /// `ν_0, …, ν_{N−1}`.
    pub steps: Vec<Measure<T>>,
    /// For each coloring, the largest `|κ(μ∘δ_α) − κ(μ∘δ_α')|` over
    /// `α, α' ∈ Emb(A,B)`.
    pub oscillations: Vec<T>,
}

pub fn stabilize_many<T: Scalar>(
    a: Arc<MetricStructure<T>>,
    chain: &[Arc<MetricStructure<T>>],
    steps: &[Step<T>],
    colorings: &[Coloring<T>],
) -> Result<StabilizationReport<T>, RamseyError> {
    let n = chain.len().checked_sub(1).ok_or(RamseyError::Chain {
        step: 0,
        reason: "chain is empty".into(),
    })?;
    if steps.len() != n || colorings.len() != n {
        return Err(RamseyError::Chain {
            step: 0,
            reason: format!(
                "chain of length {n} needs {n} steps and {n} colorings, got {} and {}",
                steps.len(),
                colorings.len()
            ),
        });
    }
    let top = chain[n].clone();
    let to_top: Vec<Arc<EmbeddingSpace<T>>> = chain
        .iter()
        .map(|cj| EmbeddingSpace::enumerate(cj.clone(), top.clone()).map(Arc::new))
        .collect::<Result<_, _>>()?;
    let ac = Arc::new(EmbeddingSpace::enumerate(a.clone(), top.clone())?);
    for (j, k) in colorings.iter().enumerate() {
        if !k.space().same_as(&ac) {
            return Err(RamseyError::Chain {
                step: j,
                reason: "coloring does not live on Emb(A, C_N)".into(),
            });
        }
    }

    let id = to_top[n]
        .index_of(&Embedding::identity(top.len()))
        .expect("identity embeds");
    let mut mu = Measure::dirac(to_top[n].clone(), id)?;
    let mut chosen = Vec::with_capacity(n);
    for j in (0..n).rev() {
        let setup = Setup::new(a.clone(), chain[j].clone(), chain[j + 1].clone())?;
        if setup.bc.is_empty() {
            return Err(RamseyError::Chain {
                step: j,
                reason: format!("C_{j} does not embed into C_{}", j + 1),
            });
        }
        // κ̃(α) = κ(μ_{j+1} ∘ δ_α) on Emb(A, C_{j+1}).
        let kappa = &colorings[j];
        let lift_space = Arc::new(EmbeddingSpace::enumerate(a.clone(), chain[j + 1].clone())?);
        let lifted = (0..lift_space.len())
            .map(|x| {
                let delta = Measure::dirac(lift_space.clone(), x)?;
                let image = compose_measures(&delta, &mu, &ac)?;
                evaluate_coloring(kappa, &image)
            })
            .collect::<Result<Vec<T>, _>>()?;
        let lifted = Coloring::new(setup.ac.clone(), lifted)?;
        let nu = match &steps[j] {
            Step::Uniform => value_uniform(&setup)?.nu,
            Step::Adaptive => {
                let v = adaptive_value(&setup, &lifted)?;
                Measure::new(setup.bc.clone(), v.nu)?
            }
            Step::Supplied(m) => {
                if !m.space().same_as(&setup.bc) {
                    return Err(RamseyError::Chain {
                        step: j,
                        reason: format!("supplied measure is not on Emb(C_{j}, C_{})", j + 1),
                    });
                }
                m.clone()
            }
        };
        mu = compose_measures(&nu, &mu, &to_top[j])?;
        chosen.push(nu);
    }
    chosen.reverse();

    let ab = Arc::new(EmbeddingSpace::enumerate(a.clone(), chain[0].clone())?);
    let family = (0..ab.len())
        .map(|x| compose_measures(&Measure::dirac(ab.clone(), x)?, &mu, &ac))
        .collect::<Result<Vec<_>, _>>()?;
    let oscillations = colorings
        .iter()
        .map(|k| {
            let vals = family
                .iter()
                .map(|m| evaluate_coloring(k, m))
                .collect::<Result<Vec<T>, _>>()?;
            let hi = vals
                .iter()
                .cloned()
                .reduce(T::max_of)
                .unwrap_or_else(T::zero);
            let lo = vals
                .iter()
                .cloned()
                .reduce(T::min_of)
                .unwrap_or_else(T::zero);
            Ok(hi - lo)
        })
        .collect::<Result<Vec<T>, RamseyError>>()?;
    Ok(StabilizationReport {
        mu,
        steps: chosen,
        oscillations,
    })
}
