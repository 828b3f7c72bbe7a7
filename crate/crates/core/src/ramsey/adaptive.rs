//! Lower bounds on the adaptive value `sup_κ min_ν max_{α,α'} |κ(ν∘δ_α) − κ(ν∘δ_α')|`.
//!
//! For fixed κ the inner minimum is an LP. The outer supremum is searched by
//! ascent from weighted mixes of the uniform dual's cut potentials, then
//! from random vertices of the Lipschitz polytope, moving one coordinate
//! at a time; the search runs in floating point and the best
//! colorings found are then evaluated exactly, so the reported number is
//! always a true lower bound.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{uniform_lower_bound, value_uniform, LowerBoundCut, RamseyError, Setup};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use crate::measures::Coloring;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptiveOptions {
    pub budget: usize,
    pub seed: u64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            budget: 200,
            seed: 0x5eed_c0de,
        }
    }
}

/// `g(κ)` with its minimizing measure and a dual certificate.
#[derive(Debug, Clone)]
pub struct AdaptiveValue<T> {
    pub value: T,
    /// Sparse weights on `Emb(B,C)`.
    pub nu: Vec<(usize, T)>,
    /// `(pair, positive sign, weight)`: for every `β`,
    /// `Σ w · ±(κ(β∘α) − κ(β∘α')) ≥ value`.
    pub weights: Vec<((usize, usize), bool, T)>,
}

#[derive(Debug, Clone)]
pub struct AdaptiveBound<T> {
    pub value: T,
    pub coloring: Coloring<T>,
    pub witness: AdaptiveValue<T>,
    /// Upper bound from the uniform value, for the sandwich.
    pub uniform: T,
    pub restarts: usize,
}

/// The inner problem only needs the composition table, so the search can
/// run it in a different scalar type.
struct Inner<'a> {
    strategies: usize,
    table: &'a [Vec<usize>],
    pairs: &'a [(usize, usize)],
}

impl<'a> Inner<'a> {
    fn of<T>(setup: &'a Setup<T>) -> Self {
        Self {
            strategies: setup.table.len(),
            table: &setup.table,
            pairs: &setup.pairs,
        }
    }

    fn differences<S: Scalar>(&self, kappa: &[S]) -> Vec<Vec<S>> {
        self.pairs
            .iter()
            .map(|&(i, j)| {
                self.table
                    .iter()
                    .map(|row| kappa[row[i]].clone() - kappa[row[j]].clone())
                    .collect()
            })
            .collect()
    }

    fn solve<S: Scalar>(&self, kappa: &[S]) -> AdaptiveValue<S> {
        let m = self.strategies;
        if self.pairs.is_empty() {
            return AdaptiveValue {
                value: S::zero(),
                nu: vec![(0, S::one())],
                weights: Vec::new(),
            };
        }
        let d = self.differences(kappa);
        if d.len() == 1 {
            return single_pair(self.pairs[0], &d[0]);
        }
        let t = m;
        let mut lp = LinearProgram::new(m + 1, Sense::Minimize);
        lp.set_objective(t, S::one());
        for row in &d {
            for sign in [true, false] {
                let terms = row
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(b, v)| (b, if sign { -v.clone() } else { v.clone() }))
                    .chain([(t, S::one())]);
                lp.add_sparse(terms, Relation::Ge, S::zero());
            }
        }
        lp.add_sparse((0..m).map(|b| (b, S::one())), Relation::Eq, S::one());
        let sol = solve_lp(&lp).expect("inner LP is well formed");
        assert_eq!(sol.status, LpStatus::Optimal);
        let nu = sol.primal[..m]
            .iter()
            .cloned()
            .enumerate()
            .filter(|(_, w)| w.is_pos())
            .collect();
        let weights = self
            .pairs
            .iter()
            .enumerate()
            .flat_map(|(p, &pair)| {
                [
                    (pair, true, sol.dual[2 * p].clone()),
                    (pair, false, sol.dual[2 * p + 1].clone()),
                ]
            })
            .filter(|(_, _, w)| w.is_pos())
            .collect();
        AdaptiveValue {
            value: sol.objective,
            nu,
            weights,
        }
    }
}

/// With one pair, `min_λ |λ·D|` is 0 when `D` takes both signs (mix the
/// extremes) and otherwise the smallest `|D|`, attained by a point mass.
fn single_pair<S: Scalar>(pair: (usize, usize), d: &[S]) -> AdaptiveValue<S> {
    let (lo, hi) = min_max(d);
    if d[lo].is_pos() {
        return AdaptiveValue {
            value: d[lo].clone(),
            nu: vec![(lo, S::one())],
            weights: vec![(pair, true, S::one())],
        };
    }
    if d[hi].is_neg() {
        return AdaptiveValue {
            value: -d[hi].clone(),
            nu: vec![(hi, S::one())],
            weights: vec![(pair, false, S::one())],
        };
    }
    if lo == hi || d[hi].is_zero() {
        return AdaptiveValue {
            value: S::zero(),
            nu: vec![(hi, S::one())],
            weights: Vec::new(),
        };
    }
    if d[lo].is_zero() {
        return AdaptiveValue {
            value: S::zero(),
            nu: vec![(lo, S::one())],
            weights: Vec::new(),
        };
    }
    let (a, b) = (d[lo].clone(), d[hi].clone());
    let wl = b.clone() / (b - a);
    let mut nu = vec![(lo, wl.clone()), (hi, S::one() - wl)];
    nu.sort_by_key(|e| e.0);
    AdaptiveValue {
        value: S::zero(),
        nu,
        weights: Vec::new(),
    }
}

fn min_max<T: Scalar>(d: &[T]) -> (usize, usize) {
    let (mut lo, mut hi) = (0, 0);
    for (b, v) in d.iter().enumerate() {
        if *v < d[lo] {
            lo = b;
        }
        if *v > d[hi] {
            hi = b;
        }
    }
    (lo, hi)
}

/// `g(κ) = min_ν max_{α,α'} |κ(ν∘δ_α) − κ(ν∘δ_α')|`, exactly.
pub fn adaptive_value<T: Scalar>(
    setup: &Setup<T>,
    kappa: &Coloring<T>,
) -> Result<AdaptiveValue<T>, RamseyError> {
    setup.require_nondegenerate()?;
    if !kappa.space().same_as(&setup.ac) {
        return Err(crate::measures::MeasureError::SpaceMismatch.into());
    }
    Ok(Inner::of(setup).solve(kappa.values()))
}

struct Search<'a, T> {
    inner: Inner<'a>,
    cost: Vec<Vec<T>>,
}

impl<T: Scalar> Search<'_, T> {
    fn score(&self, kappa: &[T]) -> f64 {
        let k: Vec<f64> = kappa.iter().map(Scalar::to_f64).collect();
        self.inner.solve(&k).value
    }

    /// Feasible interval for coordinate `i` given all the others.
    fn interval(&self, kappa: &[T], i: usize, assigned: impl Fn(usize) -> bool) -> (T, T) {
        let (mut lo, mut hi) = (T::zero(), T::one());
        for (j, v) in kappa.iter().enumerate() {
            if j == i || !assigned(j) {
                continue;
            }
            lo = T::max_of(lo, v.clone() - self.cost[i][j].clone());
            hi = T::min_of(hi, v.clone() + self.cost[i][j].clone());
        }
        (lo, hi)
    }

    fn random_vertex(&self, rng: &mut ChaCha8Rng) -> Vec<T> {
        let n = self.cost.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut kappa = vec![T::zero(); n];
        let mut done = vec![false; n];
        for &i in &order {
            let (lo, hi) = self.interval(&kappa, i, |j| done[j]);
            kappa[i] = if rng.gen_bool(0.5) { lo } else { hi };
            done[i] = true;
        }
        kappa
    }

    fn candidates(&self, kappa: &[T], i: usize) -> Vec<T> {
        let (lo, hi) = self.interval(kappa, i, |_| true);
        let mut out = vec![lo.clone(), hi.clone()];
        for k in 0..=16 {
            let g = T::from_ratio(k, 16);
            if lo <= g && g <= hi {
                out.push(g);
            }
        }
        for (j, v) in kappa.iter().enumerate() {
            if j != i {
                for c in [
                    v.clone() - self.cost[i][j].clone(),
                    v.clone() + self.cost[i][j].clone(),
                ] {
                    if lo <= c && c <= hi {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    fn ascend(&self, mut kappa: Vec<T>) -> (Vec<T>, f64) {
        let mut best = self.score(&kappa);
        loop {
            let mut improved = false;
            for i in 0..kappa.len() {
                for c in self.candidates(&kappa, i) {
                    let old = std::mem::replace(&mut kappa[i], c);
                    let s = self.score(&kappa);
                    if s > best + 1e-12 {
                        best = s;
                        improved = true;
                    } else {
                        kappa[i] = old;
                    }
                }
            }
            if !improved {
                return (kappa, best);
            }
        }
    }
}

/// `Σ w_k φ_k / Σ w_k`: a convex combination of colorings is a coloring.
fn mix<'c, T: Scalar + 'c>(
    n: usize,
    cuts: impl Iterator<Item = &'c LowerBoundCut<T>>,
) -> Option<Vec<T>> {
    let mut total = T::zero();
    let mut acc = vec![T::zero(); n];
    for c in cuts {
        total = total + c.weight.clone();
        for (a, p) in acc.iter_mut().zip(&c.potential) {
            *a = a.clone() + c.weight.clone() * p.clone();
        }
    }
    if !total.is_pos() {
        return None;
    }
    Some(acc.into_iter().map(|a| a / total.clone()).collect())
}

fn key<T: Scalar>(kappa: &[T]) -> Vec<u64> {
    kappa.iter().map(|v| v.to_f64().to_bits()).collect()
}

/// A certified lower bound on the adaptive value; never exceeds the
/// uniform value.
pub fn value_adaptive_lower<T: Scalar>(
    setup: &Setup<T>,
    options: AdaptiveOptions,
) -> Result<AdaptiveBound<T>, RamseyError> {
    setup.require_nondegenerate()?;
    let uniform = value_uniform(setup)?;
    let n = setup.ac.len();
    let cost: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| setup.ac.truncated_rho(i, j)).collect())
        .collect();
    let search = Search {
        inner: Inner::of(setup),
        cost,
    };
    let ceiling = uniform.value.to_f64();

    let mut pool: Vec<(Vec<T>, f64)> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut starts: Vec<Vec<T>> = uniform
        .pairs
        .iter()
        .map(|p| p.bound.potential.values().to_vec())
        .collect();
    if !uniform.value.is_zero() {
        // Popped last to first: the overall mix is tried before anything else.
        let cuts = uniform_lower_bound(setup, &uniform)?;
        let mut by_pair: Vec<(usize, usize)> = cuts.iter().map(|c| c.pair).collect();
        by_pair.sort_unstable();
        by_pair.dedup();
        for pair in by_pair {
            starts.extend(mix(n, cuts.iter().filter(|c| c.pair == pair)));
        }
        starts.extend(mix(n, cuts.iter()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut restarts = 0;
    while !uniform.value.is_zero() {
        let start = match starts.pop() {
            Some(s) => s,
            None if restarts < options.budget => {
                restarts += 1;
                search.random_vertex(&mut rng)
            }
            None => break,
        };
        if !seen.insert(key(&start)) {
            continue;
        }
        let (kappa, s) = search.ascend(start);
        pool.push((kappa, s));
        if s >= ceiling - 1e-12 {
            break;
        }
    }

    pool.sort_by(|a, b| b.1.total_cmp(&a.1));
    pool.dedup_by(|a, b| key(&a.0) == key(&b.0));
    pool.truncate(4);
    if pool.is_empty() {
        pool.push((vec![T::zero(); n], 0.0));
    }
    let mut best: Option<(Vec<T>, AdaptiveValue<T>)> = None;
    for (kappa, _) in pool {
        let exact = search.inner.solve(&kappa);
        if best.as_ref().is_none_or(|b| exact.value > b.1.value) {
            best = Some((kappa, exact));
        }
    }
    let (kappa, witness) = best.expect("pool is nonempty");
    assert!(
        witness.value.approx_le(&uniform.value),
        "adaptive lower bound {} exceeds uniform value {}",
        witness.value,
        uniform.value
    );
    Ok(AdaptiveBound {
        value: witness.value.clone(),
        coloring: Coloring::new(setup.ac.clone(), kappa)?,
        witness,
        uniform: uniform.value,
        restarts,
    })
}
