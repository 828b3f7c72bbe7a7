//! `min_{λ ∈ Δ(S)} max_p F_p(λ)` for convex piecewise-linear `F_p` known only
//! through a best-response oracle, solved by cutting planes (double oracle).
//!
//! Each response at `λ` is a linear minorant `a·λ' ≤ F_p(λ')` that is tight at
//! `λ`. The master LP `min t, t ≥ a_c·λ` over collected cuts gives a lower
//! bound; the oracle at the master optimum gives an upper bound; they meet
//! after finitely many rounds when the oracle returns finitely many cuts.
//! The master duals are a mixed strategy over cuts that certifies the lower
//! bound without a solver.

use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Response<T, P> {
    pub value: T,
    /// Cut coefficients, one per strategy.
    pub coeffs: Vec<T>,
    pub payload: P,
}

#[derive(Debug, Clone)]
pub struct Cut<T, P> {
    pub pair: usize,
    pub coeffs: Vec<T>,
    pub payload: P,
    pub weight: T,
}

#[derive(Debug, Clone)]
pub struct MinimaxSolution<T, P> {
    pub value: T,
    pub weights: Vec<T>,
    /// Oracle responses at `weights`, one per pair.
    pub responses: Vec<Response<T, P>>,
    /// Cuts carrying positive dual weight; the weights sum to 1.
    pub cuts: Vec<Cut<T, P>>,
    pub rounds: usize,
}

const MAX_ROUNDS: usize = 100_000;

pub fn solve_minimax<T: Scalar, P: Clone>(
    strategies: usize,
    oracle: impl Fn(&[T]) -> Vec<Response<T, P>>,
    seed: Vec<(usize, Response<T, P>)>,
) -> MinimaxSolution<T, P> {
    assert!(strategies > 0, "minimax needs at least one strategy");
    let mut cuts: Vec<(usize, Response<T, P>)> = seed;
    if cuts.is_empty() {
        let uniform = vec![T::one() / T::from_usize(strategies); strategies];
        cuts.extend(oracle(&uniform).into_iter().enumerate());
    }
    if cuts.is_empty() {
        let mut weights = vec![T::zero(); strategies];
        weights[0] = T::one();
        return MinimaxSolution {
            value: T::zero(),
            weights,
            responses: Vec::new(),
            cuts: Vec::new(),
            rounds: 0,
        };
    }

    for round in 1..=MAX_ROUNDS {
        // Substituting λ_0 = 1 − Σ_{s≥1} λ_s and t = τ + t0, with t0 the
        // largest cut value at λ = e_0, makes the origin feasible, so the
        // master needs no phase one.
        let t0 = cuts
            .iter()
            .map(|(_, c)| c.coeffs[0].clone())
            .reduce(T::max_of)
            .expect("at least one cut");
        let tau = strategies - 1;
        let mut lp = LinearProgram::new(strategies, Sense::Minimize);
        lp.set_objective(tau, T::one());
        lp.set_bounds(tau, None, None);
        for (_, cut) in &cuts {
            let a0 = &cut.coeffs[0];
            let terms = cut.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(s, a)| (s, a.clone() - a0.clone()))
                .filter(|(_, a)| !a.is_zero())
                .chain([(tau, -T::one())]);
            lp.add_sparse(terms, Relation::Le, t0.clone() - a0.clone());
        }
        lp.add_sparse((0..tau).map(|s| (s, T::one())), Relation::Le, T::one());
        let sol = solve_lp(&lp).expect("master LP is well formed");
        assert_eq!(
            sol.status,
            LpStatus::Optimal,
            "master LP over the simplex is bounded"
        );
        let lower = sol.objective.clone() + t0;
        let rest = sol.primal[..tau]
            .iter()
            .fold(T::zero(), |acc, x| acc + x.clone());
        let weights: Vec<T> = std::iter::once(T::one() - rest)
            .chain(sol.primal[..tau].iter().cloned())
            .collect();
        let duals: Vec<T> = sol.dual[..cuts.len()].iter().map(|y| -y.clone()).collect();
        let responses = oracle(&weights);
        let upper = responses
            .iter()
            .map(|r| r.value.clone())
            .reduce(T::max_of)
            .unwrap_or_else(T::zero);
        if upper.approx_le(&lower) {
            let active = cuts
                .iter()
                .zip(&duals)
                .filter(|(_, w)| w.is_pos())
                .map(|((pair, r), w)| Cut {
                    pair: *pair,
                    coeffs: r.coeffs.clone(),
                    payload: r.payload.clone(),
                    weight: w.clone(),
                })
                .collect();
            return MinimaxSolution {
                value: upper,
                weights,
                responses,
                cuts: active,
                rounds: round,
            };
        }
        for (pair, r) in responses.into_iter().enumerate() {
            if !r.value.approx_le(&lower) {
                cuts.push((pair, r));
            }
        }
    }
    panic!("cutting planes did not converge in {MAX_ROUNDS} rounds");
}

/// `Σ_c w_c a_c[s] ≥ value` for every strategy `s`, with `w` a probability
/// vector: then every `λ` has some cut with `a_c·λ ≥ value`.
pub fn certifies_lower_bound<T: Scalar>(
    cuts: &[(Vec<T>, T)],
    strategies: usize,
    value: &T,
) -> bool {
    if cuts
        .iter()
        .any(|(a, w)| a.len() != strategies || w.is_neg())
    {
        return false;
    }
    let total = cuts.iter().fold(T::zero(), |acc, (_, w)| acc + w.clone());
    if !total.approx_eq(&T::one()) {
        return false;
    }
    (0..strategies).all(|s| {
        let mix = cuts
            .iter()
            .fold(T::zero(), |acc, (a, w)| acc + w.clone() * a[s].clone());
        value.approx_le(&mix)
    })
}
