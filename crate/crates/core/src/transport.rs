//! Kantorovich distance between measures on an embedding space under the
//! truncated metric `min(ρ_A, 1)`, with an optimal coupling and an extremal
//! coloring attaining the coloring supremum.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lp::solve_transport;
use crate::measures::{Coloring, Measure, MeasureError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OscillationError {
    #[error("measures live on different embedding spaces")]
    SpaceMismatch,
    #[error("the truncated metric of the space is not discrete")]
    NotDiscrete,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Transport between two weight vectors over the points `0..n` of a finite
/// pseudometric space.
#[derive(Debug, Clone, PartialEq)]
pub struct RawBound<T> {
    pub value: T,
    /// `(source point, target point, mass)`, sorted.
    pub coupling: Vec<(usize, usize, T)>,
    /// One value per point, 1-Lipschitz for the cost, minimum 0, with
    /// `potential(μ) − potential(μ′) = value`.
    pub potential: Vec<T>,
}

/// W₁ between `mu` and `nu` (sparse `(point, weight)` lists) where
/// `cost(x, y)` is a pseudometric on `0..n` bounded by 1.
pub fn kantorovich_raw<T: Scalar>(
    n: usize,
    cost: impl Fn(usize, usize) -> T,
    mu: &[(usize, T)],
    nu: &[(usize, T)],
) -> RawBound<T> {
    let rows: Vec<usize> = mu.iter().map(|a| a.0).collect();
    let cols: Vec<usize> = nu.iter().map(|a| a.0).collect();
    let matrix: Vec<Vec<T>> = rows
        .iter()
        .map(|&x| cols.iter().map(|&y| cost(x, y)).collect())
        .collect();
    let supply: Vec<T> = mu.iter().map(|a| a.1.clone()).collect();
    let demand: Vec<T> = nu.iter().map(|a| a.1.clone()).collect();
    let sol = solve_transport(&matrix, &supply, &demand).expect("measures have equal mass");

    let mut coupling: Vec<(usize, usize, T)> = sol
        .plan
        .entries()
        .map(|(i, j, m)| (rows[i], cols[j], m.clone()))
        .collect();
    coupling.sort_by_key(|a| (a.0, a.1));

    // c-transform of the supply potential: a max of 1-Lipschitz functions,
    // at least u on supp μ and at most −v on supp ν.
    let mut potential: Vec<T> = (0..n)
        .map(|z| {
            rows.iter()
                .zip(&sol.supply_potential)
                .map(|(&x, u)| u.clone() - cost(x, z))
                .reduce(T::max_of)
                .unwrap_or_else(T::zero)
        })
        .collect();
    if let Some(low) = potential.iter().cloned().reduce(T::min_of) {
        for p in potential.iter_mut() {
            *p = p.clone() - low.clone();
        }
    }
    RawBound {
        value: sol.value,
        coupling,
        potential,
    }
}

/// Total variation with an optimal coupling (the common part stays put, the
/// excess is matched greedily) and the indicator of `{μ > ν}` as potential.
pub fn total_variation_raw<T: Scalar>(
    n: usize,
    mu: &[(usize, T)],
    nu: &[(usize, T)],
) -> RawBound<T> {
    let mut net: BTreeMap<usize, (T, T)> = BTreeMap::new();
    for (x, w) in mu {
        let e = net.entry(*x).or_insert((T::zero(), T::zero()));
        e.0 = e.0.clone() + w.clone();
    }
    for (y, w) in nu {
        let e = net.entry(*y).or_insert((T::zero(), T::zero()));
        e.1 = e.1.clone() + w.clone();
    }
    let mut coupling = Vec::new();
    let mut excess = Vec::new();
    let mut deficit = Vec::new();
    let mut potential = vec![T::zero(); n];
    let mut value = T::zero();
    for (&x, (a, b)) in &net {
        let common = T::min_of(a.clone(), b.clone());
        if common.is_pos() {
            coupling.push((x, x, common.clone()));
        }
        let d = a.clone() - b.clone();
        if d.is_pos() {
            potential[x] = T::one();
            value = value + d.clone();
            excess.push((x, d));
        } else if d.is_neg() {
            deficit.push((x, -d));
        }
    }
    let (mut i, mut j) = (0, 0);
    while i < excess.len() && j < deficit.len() {
        let m = T::min_of(excess[i].1.clone(), deficit[j].1.clone());
        coupling.push((excess[i].0, deficit[j].0, m.clone()));
        excess[i].1 = excess[i].1.clone() - m.clone();
        deficit[j].1 = deficit[j].1.clone() - m;
        if !excess[i].1.is_pos() {
            i += 1;
        }
        if !deficit[j].1.is_pos() {
            j += 1;
        }
    }
    coupling.sort_by_key(|a| (a.0, a.1));
    RawBound {
        value,
        coupling,
        potential,
    }
}

/// Kantorovich value of a pair of measures together with the witnesses that
/// make it checkable.
#[derive(Debug, Clone)]
pub struct OscillationBound<T> {
    pub value: T,
    /// `(index in space, index in space, mass)`.
    pub coupling: Vec<(usize, usize, T)>,
    pub potential: Coloring<T>,
}

fn sparse<T: Scalar>(m: &Measure<T>) -> Vec<(usize, T)> {
    m.atoms().map(|(i, w)| (i, w.clone())).collect()
}

pub fn kantorovich<T: Scalar>(
    mu: &Measure<T>,
    nu: &Measure<T>,
) -> Result<OscillationBound<T>, OscillationError> {
    if !mu.space().same_as(nu.space()) {
        return Err(OscillationError::SpaceMismatch);
    }
    let space = mu.space();
    let raw = kantorovich_raw(
        space.len(),
        |i, j| space.truncated_rho(i, j),
        &sparse(mu),
        &sparse(nu),
    );
    Ok(OscillationBound {
        value: raw.value,
        coupling: raw.coupling,
        potential: Coloring::new(space.clone(), raw.potential)?,
    })
}

/// `½ Σ |μ(α) − μ′(α)|`, valid only when the truncated metric is discrete.
pub fn total_variation<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<T, OscillationError> {
    Ok(total_variation_bound(mu, nu)?.value)
}

pub fn total_variation_bound<T: Scalar>(
    mu: &Measure<T>,
    nu: &Measure<T>,
) -> Result<OscillationBound<T>, OscillationError> {
    if !mu.space().same_as(nu.space()) {
        return Err(OscillationError::SpaceMismatch);
    }
    let space = mu.space();
    if !space.is_discrete() {
        return Err(OscillationError::NotDiscrete);
    }
    let raw = total_variation_raw(space.len(), &sparse(mu), &sparse(nu));
    Ok(OscillationBound {
        value: raw.value,
        coupling: raw.coupling,
        potential: Coloring::new(space.clone(), raw.potential)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::EmbeddingSpace;
    use crate::measures::evaluate_coloring;
    use crate::structures::{ClassPreset, MetricStructure, PresetKind, Signature};
    use crate::Rational;
    use num_traits::Signed;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn discrete_three() -> Arc<EmbeddingSpace<Rational>> {
        let p = ClassPreset::new(PresetKind::PureSets);
        let a = Arc::new(p.generate::<Rational>(1).unwrap());
        let c = Arc::new(p.generate::<Rational>(3).unwrap());
        Arc::new(EmbeddingSpace::enumerate(a, c).unwrap())
    }

    /// Points on a line at 0, 1/4, 1/2, 3/2 with the usual metric.
    fn line_space() -> Arc<EmbeddingSpace<Rational>> {
        let xs = [q(0, 1), q(1, 4), q(1, 2), q(3, 2)];
        let pts: Vec<String> = (0..4).map(|i| format!("p{i}")).collect();
        let c = MetricStructure::from_fns(
            Signature::empty(),
            pts,
            |i, j| (xs[i].clone() - xs[j].clone()).abs(),
            |_, _| q(0, 1),
        )
        .unwrap();
        let a = MetricStructure::from_fns(
            Signature::empty(),
            vec!["a".into()],
            |_, _| q(0, 1),
            |_, _| q(0, 1),
        )
        .unwrap();
        Arc::new(EmbeddingSpace::enumerate(Arc::new(a), Arc::new(c)).unwrap())
    }

    #[test]
    fn identical_measures() {
        let s = discrete_three();
        let m = Measure::uniform(s).unwrap();
        assert_eq!(kantorovich(&m, &m).unwrap().value, q(0, 1));
        assert_eq!(total_variation(&m, &m).unwrap(), q(0, 1));
    }

    #[test]
    fn diracs_pay_truncated_distance() {
        let s = line_space();
        for i in 0..4 {
            for j in 0..4 {
                let b = kantorovich(
                    &Measure::dirac(s.clone(), i).unwrap(),
                    &Measure::dirac(s.clone(), j).unwrap(),
                )
                .unwrap();
                assert_eq!(b.value, s.truncated_rho(i, j));
            }
        }
    }

    /// Brute force over the one-parameter family of couplings of the
    /// two-point-supported example.
    #[test]
    fn discrete_half_example() {
        let s = discrete_three();
        let mu = Measure::new(s.clone(), [(0, q(1, 2)), (1, q(1, 2))]).unwrap();
        let nu = Measure::new(s.clone(), [(1, q(1, 2)), (2, q(1, 2))]).unwrap();
        let b = kantorovich(&mu, &nu).unwrap();
        // couplings: π(0,1)=t, π(0,2)=1/2−t, π(1,1)=1/2−t, π(1,2)=t
        let best = (0..=64)
            .map(|k| {
                let t = q(k, 128);
                // only π(1,1) is free of cost
                t.clone() + (q(1, 2) - t.clone()) + t
            })
            .min()
            .unwrap();
        assert_eq!(b.value, best);
        assert_eq!(b.value, q(1, 2));
        assert_eq!(total_variation(&mu, &nu).unwrap(), q(1, 2));
        let gap = evaluate_coloring(&b.potential, &mu).unwrap()
            - evaluate_coloring(&b.potential, &nu).unwrap();
        assert_eq!(gap, b.value);
    }

    #[test]
    fn disjoint_supports() {
        let s = discrete_three();
        let mu = Measure::dirac(s.clone(), 0).unwrap();
        let nu = Measure::new(s.clone(), [(1, q(1, 3)), (2, q(2, 3))]).unwrap();
        assert_eq!(total_variation(&mu, &nu).unwrap(), q(1, 1));
    }

    #[test]
    fn tv_rejects_non_discrete() {
        let s = line_space();
        let m = Measure::dirac(s.clone(), 0).unwrap();
        assert_eq!(total_variation(&m, &m), Err(OscillationError::NotDiscrete));
    }

    #[test]
    fn space_mismatch() {
        let a = Measure::<Rational>::dirac(discrete_three(), 0).unwrap();
        let b = Measure::dirac(line_space(), 0).unwrap();
        assert_eq!(
            kantorovich(&a, &b).unwrap_err(),
            OscillationError::SpaceMismatch
        );
    }

    fn weights(raw: &[u8]) -> Vec<(usize, Rational)> {
        let total: i64 = raw.iter().map(|&w| w as i64).sum();
        raw.iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(i, &w)| (i, q(w as i64, total)))
            .collect()
    }

    /// Grid search over 1-Lipschitz potentials with values in {0, 1/g, …, 1}.
    fn grid_sup(
        s: &EmbeddingSpace<Rational>,
        mu: &Measure<Rational>,
        nu: &Measure<Rational>,
        g: i64,
    ) -> Rational {
        let n = s.len();
        let mut best = q(0, 1);
        let mut vals = vec![0i64; n];
        loop {
            let f: Vec<Rational> = vals.iter().map(|&v| q(v, g)).collect();
            let lip = (0..n).all(|i| {
                (0..n).all(|j| (f[i].clone() - f[j].clone()).abs() <= s.truncated_rho(i, j))
            });
            if lip {
                let k = Coloring::new(Arc::new(s.clone()), f).unwrap();
                let d =
                    (evaluate_coloring(&k, mu).unwrap() - evaluate_coloring(&k, nu).unwrap()).abs();
                best = best.max(d);
            }
            let mut i = 0;
            while i < n && vals[i] == g {
                vals[i] = 0;
                i += 1;
            }
            if i == n {
                return best;
            }
            vals[i] += 1;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn supremum_identity_and_axioms(
            a in proptest::collection::vec(0u8..4, 4),
            b in proptest::collection::vec(0u8..4, 4),
            c in proptest::collection::vec(0u8..4, 4),
            probe in proptest::collection::vec(0u8..9, 4),
        ) {
            prop_assume!(a.iter().any(|&x| x > 0) && b.iter().any(|&x| x > 0) && c.iter().any(|&x| x > 0));
            let s = line_space();
            let mu = Measure::new(s.clone(), weights(&a)).unwrap();
            let nu = Measure::new(s.clone(), weights(&b)).unwrap();
            let xi = Measure::new(s.clone(), weights(&c)).unwrap();
            let ab = kantorovich(&mu, &nu).unwrap();
            let ba = kantorovich(&nu, &mu).unwrap();
            let ac = kantorovich(&mu, &xi).unwrap();
            let cb = kantorovich(&xi, &nu).unwrap();
            prop_assert_eq!(&ab.value, &ba.value);
            prop_assert!(ab.value <= ac.value.clone() + cb.value.clone());
            prop_assert_eq!(ab.value == q(0, 1), mu == nu);

            let phi = &ab.potential;
            prop_assert!(phi.values().iter().all(|v| *v >= q(0, 1) && *v <= q(1, 1)));
            let gap = evaluate_coloring(phi, &mu).unwrap() - evaluate_coloring(phi, &nu).unwrap();
            prop_assert_eq!(&gap, &ab.value);
            let cost: Rational = ab.coupling.iter().map(|(i, j, m)| m * s.truncated_rho(*i, *j)).sum();
            prop_assert_eq!(&cost, &ab.value);

            // Any sampled coloring is dominated.
            let f: Vec<Rational> = probe.iter().map(|&v| q(v as i64, 8)).collect();
            let lip = (0..4).all(|i| (0..4).all(|j| (f[i].clone() - f[j].clone()).abs() <= s.truncated_rho(i, j)));
            if lip {
                let k = Coloring::new(s.clone(), f).unwrap();
                let d = (evaluate_coloring(&k, &mu).unwrap() - evaluate_coloring(&k, &nu).unwrap()).abs();
                prop_assert!(d <= ab.value);
            }

            let g = 8;
            let grid = grid_sup(&s, &mu, &nu, g);
            prop_assert!(grid <= ab.value && grid >= ab.value.clone() - q(1, g));
        }

        #[test]
        fn tv_matches_kantorovich_on_discrete(
            a in proptest::collection::vec(0u8..5, 3),
            b in proptest::collection::vec(0u8..5, 3),
        ) {
            prop_assume!(a.iter().any(|&x| x > 0) && b.iter().any(|&x| x > 0));
            let s = discrete_three();
            let mu = Measure::new(s.clone(), weights(&a)).unwrap();
            let nu = Measure::new(s.clone(), weights(&b)).unwrap();
            let tv = total_variation_bound(&mu, &nu).unwrap();
            prop_assert_eq!(&tv.value, &kantorovich(&mu, &nu).unwrap().value);
            let gap = evaluate_coloring(&tv.potential, &mu).unwrap() - evaluate_coloring(&tv.potential, &nu).unwrap();
            prop_assert_eq!(&gap, &tv.value);
            let half_l1: Rational = (0..3).map(|i| (mu.weight(i) - nu.weight(i)).abs()).sum::<Rational>() / q(2, 1);
            prop_assert_eq!(&half_l1, &tv.value);
        }
    }
}
