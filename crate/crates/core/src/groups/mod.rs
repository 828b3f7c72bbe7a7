//! Groups, the pseudometrics `d_A` of an action, and the Reiter-type value
//! `W(F, S) = min_{λ ∈ Δ(S)} max_{h,h' ∈ F} W₁(λ·h, λ·h')` where `λ·h` is the
//! pushforward of `λ` under right translation `g ↦ gh`.
//!
//! In discrete mode distinct elements sit at distance 1, which is also what
//! the truncated word metric gives on distinct elements of a finitely
//! generated group, so `W₁` is total variation there. Finer word-metric
//! structure is invisible to `[0,1]`-valued 1-Lipschitz functions after
//! truncation.
//!
//! Finite supports only ever bound the value over the whole group from
//! above, so a positive value is evidence, never a proof of nonamenability.

mod oracle;
mod table;

use std::collections::HashMap;
use std::fmt::{Debug, Write as _};
use std::hash::Hash;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

pub use oracle::{FGGroupOracle, OracleKind, Word};
pub use table::{parse_group_table, write_group_table, FiniteGroupTable, GroupAction};

use crate::embeddings::Embedding;
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use crate::minimax::{certifies_lower_bound, solve_minimax, Response};
use crate::scalar::{convert, to_decimal, Scalar};
use crate::structures::FormatError;
use crate::text::TextError;
use crate::{Rational, Structure};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("group axiom violated: {0}")]
    Axiom(String),
    #[error("invalid action: {0}")]
    Action(String),
    #[error("`{0}` is not an element of the group")]
    Element(String),
    #[error("bad group spec: {0}")]
    Spec(String),
    #[error("the group carries no action")]
    NoAction,
    #[error("{0} must be nonempty")]
    Empty(&'static str),
    #[error("bad subset of the acted-on structure: {0}")]
    Subset(String),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

pub trait Group {
    type Elem: Clone + Eq + Hash + Ord + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;
    fn parse_element(&self, s: &str) -> Result<Self::Elem, GroupError>;
    fn format_element(&self, e: &Self::Elem) -> String;

    fn contains(&self, _e: &Self::Elem) -> bool {
        true
    }

    /// Image of point `x` of the acted-on structure under `g`.
    fn act(&self, _g: &Self::Elem, _x: usize) -> Option<usize> {
        None
    }

    fn action_structure(&self) -> Option<&Arc<Structure>> {
        None
    }
}

fn checked_subset<'g, G: Group>(
    group: &'g G,
    subset: &[usize],
) -> Result<&'g Arc<Structure>, GroupError> {
    let s = group.action_structure().ok_or(GroupError::NoAction)?;
    for (i, &x) in subset.iter().enumerate() {
        if x >= s.len() {
            return Err(GroupError::Subset(format!("point {x} out of range")));
        }
        if subset[..i].contains(&x) {
            return Err(GroupError::Subset(format!("point {x} repeated")));
        }
    }
    Ok(s)
}

/// `d_A(g, h) = max_{a ∈ A} d(g(a), h(a))` for the finite subset `A` of the
/// acted-on structure.
pub fn pseudometric_da<G: Group>(
    group: &G,
    g: &G::Elem,
    h: &G::Elem,
    subset: &[usize],
) -> Result<Rational, GroupError> {
    let s = checked_subset(group, subset)?;
    let mut best = Rational::default();
    for &a in subset {
        let (x, y) = (
            group.act(g, a).expect("action"),
            group.act(h, a).expect("action"),
        );
        best = best.max(s.dist(x, y).clone());
    }
    Ok(best)
}

/// `Φ_A(g) = g↾A` as an embedding of the induced substructure on `subset`
/// (in the given order) into the acted-on structure.
pub fn restriction_map<G: Group>(
    group: &G,
    g: &G::Elem,
    subset: &[usize],
) -> Result<Embedding, GroupError> {
    checked_subset(group, subset)?;
    Ok(Embedding(
        subset
            .iter()
            .map(|&a| group.act(g, a).expect("action"))
            .collect(),
    ))
}

/// Values `f_k(x) = min_y (f(y) + k·d(x, y))`: the largest `k`-Lipschitz
/// function below `f`.
pub fn lipschitz_approximation<T: Scalar>(
    f: &[T],
    k: &T,
    dist: impl Fn(usize, usize) -> T,
) -> Vec<T> {
    (0..f.len())
        .map(|x| {
            f.iter()
                .enumerate()
                .map(|(y, fy)| fy.clone() + k.clone() * dist(x, y))
                .reduce(T::min_of)
                .expect("nonempty table")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricMode {
    /// Distinct elements at distance 1.
    Discrete,
    /// `min(d_A, 1)` for the listed points `A` of the acted-on structure.
    Action(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct GroupCriterionInstance<'a, G: Group> {
    pub group: &'a G,
    pub f: Vec<G::Elem>,
    pub s: Vec<G::Elem>,
    pub metric: MetricMode,
}

impl<'a, G: Group> GroupCriterionInstance<'a, G> {
    /// Duplicates in `f` and `s` are dropped, keeping first occurrences.
    pub fn new(
        group: &'a G,
        f: Vec<G::Elem>,
        s: Vec<G::Elem>,
        metric: MetricMode,
    ) -> Result<Self, GroupError> {
        let dedup = |v: Vec<G::Elem>| {
            let mut out: Vec<G::Elem> = Vec::with_capacity(v.len());
            for x in v {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
            out
        };
        let (f, s) = (dedup(f), dedup(s));
        if let Some(bad) = f.iter().chain(&s).find(|e| !group.contains(e)) {
            return Err(GroupError::Element(format!("{bad:?}")));
        }
        if f.is_empty() {
            return Err(GroupError::Empty("F"));
        }
        if s.is_empty() {
            return Err(GroupError::Empty("S"));
        }
        if let MetricMode::Action(subset) = &metric {
            checked_subset(group, subset)?;
            if subset.is_empty() {
                return Err(GroupError::Empty("the subset A"));
            }
        }
        Ok(Self {
            group,
            f,
            s,
            metric,
        })
    }
}

/// Optimal weights over `S` and an extremal function for the worst pair.
#[derive(Debug, Clone)]
pub struct GroupValue<E, T> {
    pub value: T,
    /// Positive weights only, in `S` order.
    pub weights: Vec<(E, T)>,
    /// The pair of `F` attaining the value, if `F` has two elements.
    pub pair: Option<(E, E)>,
    /// A `[0,1]`-valued 1-Lipschitz function on the translates with
    /// `Σ λ_g f(g h) − Σ λ_g f(g h') = value` for the worst pair.
    pub extremal: Vec<(E, T)>,
    /// Cutting-plane rounds; 1 for the direct LP.
    pub rounds: usize,
}

struct Translates<E, T> {
    points: Vec<E>,
    /// `at[h][g]`: index of `s[g]·f[h]` in `points`.
    at: Vec<Vec<usize>>,
    cost: Option<Vec<T>>,
}

impl<E, T: Scalar> Translates<E, T> {
    fn new<G: Group<Elem = E>>(inst: &GroupCriterionInstance<'_, G>) -> Result<Self, GroupError>
    where
        E: Clone + Eq + Hash,
    {
        let mut index: HashMap<E, usize> = HashMap::new();
        let mut points = Vec::new();
        let at = inst
            .f
            .iter()
            .map(|h| {
                inst.s
                    .iter()
                    .map(|g| {
                        let p = inst.group.mul(g, h);
                        *index.entry(p.clone()).or_insert_with(|| {
                            points.push(p);
                            points.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let cost = match &inst.metric {
            MetricMode::Discrete => None,
            MetricMode::Action(subset) => {
                let m = points.len();
                let mut c = Vec::with_capacity(m * m);
                for x in &points {
                    for y in &points {
                        let d = pseudometric_da(inst.group, x, y, subset)?;
                        c.push(T::min_of(convert::<Rational, T>(&d), T::one()));
                    }
                }
                Some(c)
            }
        };
        Ok(Self { points, at, cost })
    }

    fn measure(&self, h: usize, weights: &[T]) -> Vec<(usize, T)> {
        let mut m: Vec<(usize, T)> = self.at[h]
            .iter()
            .zip(weights)
            .filter(|(_, w)| !w.is_zero())
            .map(|(&p, w)| (p, w.clone()))
            .collect();
        m.sort_by_key(|a| a.0);
        m
    }

    fn bound(&self, h: usize, h2: usize, weights: &[T]) -> crate::transport::RawBound<T> {
        let (mu, nu) = (self.measure(h, weights), self.measure(h2, weights));
        let m = self.points.len();
        match &self.cost {
            None => crate::transport::total_variation_raw(m, &mu, &nu),
            Some(c) => crate::transport::kantorovich_raw(m, |x, y| c[x * m + y].clone(), &mu, &nu),
        }
    }
}

fn pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect()
}

/// `max_{h,h'} W₁(λ·h, λ·h')` for given weights on `S`.
pub fn evaluate_weights<G: Group, T: Scalar>(
    inst: &GroupCriterionInstance<'_, G>,
    weights: &[T],
) -> Result<T, GroupError> {
    assert_eq!(
        weights.len(),
        inst.s.len(),
        "one weight per support element"
    );
    let tr = Translates::<G::Elem, T>::new(inst)?;
    Ok(pairs(inst.f.len())
        .into_iter()
        .map(|(h, h2)| tr.bound(h, h2, weights).value)
        .fold(T::zero(), T::max_of))
}

/// Discrete mode as one LP: `min t` with `Σ_z (λ·h − λ·h')(z)^+ ≤ t` per
/// pair, the positive part carried by one variable per point that both
/// translates reach.
fn discrete_weights<E, T: Scalar>(
    tr: &Translates<E, T>,
    pairs: &[(usize, usize)],
    n: usize,
) -> (T, Vec<T>) {
    let m = tr.points.len();
    let mut lp_rows: Vec<(Vec<(usize, T)>, T)> = Vec::new();
    let mut next = n + 1;
    let t = n;
    for &(h, h2) in pairs {
        let mut second: Vec<Option<usize>> = vec![None; m];
        for (g, &z) in tr.at[h2].iter().enumerate() {
            second[z] = Some(g);
        }
        let mut total: Vec<(usize, T)> = vec![(t, -T::one())];
        for (g, &z) in tr.at[h].iter().enumerate() {
            match second[z] {
                None => total.push((g, T::one())),
                Some(g2) if g2 == g => {}
                Some(g2) => {
                    // s ≥ λ_g − λ_g2
                    lp_rows.push((
                        vec![(g, T::one()), (g2, -T::one()), (next, -T::one())],
                        T::zero(),
                    ));
                    total.push((next, T::one()));
                    next += 1;
                }
            }
        }
        lp_rows.push((total, T::zero()));
    }
    let mut lp = LinearProgram::new(next, Sense::Minimize);
    lp.set_objective(t, T::one());
    for (terms, rhs) in lp_rows {
        lp.add_sparse(terms, Relation::Le, rhs);
    }
    lp.add_sparse((0..n).map(|g| (g, T::one())), Relation::Eq, T::one());
    let sol = solve_lp(&lp).expect("well-formed LP");
    assert_eq!(
        sol.status,
        LpStatus::Optimal,
        "weights on S always exist and t ≥ 0"
    );
    if T::EXACT {
        sol.verify(&lp).expect("optimality certificate");
    }
    (sol.objective, sol.primal[..n].to_vec())
}

/// The exact value with optimal weights. Discrete mode solves one LP;
/// action mode uses cutting planes over extremal potentials, whose dual
/// cuts are checked to certify the lower bound. Either way the value is
/// re-evaluated pair by pair at the returned weights.
pub fn group_value<G: Group, T: Scalar>(
    inst: &GroupCriterionInstance<'_, G>,
) -> Result<GroupValue<G::Elem, T>, GroupError> {
    let tr = Translates::<G::Elem, T>::new(inst)?;
    let pairs = pairs(inst.f.len());
    let n = inst.s.len();
    let (value, lambda, rounds) = if pairs.is_empty() {
        let mut w = vec![T::zero(); n];
        w[0] = T::one();
        (T::zero(), w, 0)
    } else if inst.metric == MetricMode::Discrete {
        let (v, w) = discrete_weights(&tr, &pairs, n);
        (v, w, 1)
    } else {
        let oracle = |weights: &[T]| -> Vec<Response<T, ()>> {
            pairs
                .iter()
                .map(|&(h, h2)| {
                    let b = tr.bound(h, h2, weights);
                    let coeffs = (0..n)
                        .map(|g| {
                            b.potential[tr.at[h][g]].clone() - b.potential[tr.at[h2][g]].clone()
                        })
                        .collect();
                    Response {
                        value: b.value,
                        coeffs,
                        payload: (),
                    }
                })
                .collect()
        };
        let sol = solve_minimax(n, oracle, Vec::new());
        let cuts: Vec<(Vec<T>, T)> = sol
            .cuts
            .iter()
            .map(|c| (c.coeffs.clone(), c.weight.clone()))
            .collect();
        assert!(
            certifies_lower_bound(&cuts, n, &sol.value),
            "cutting-plane duals do not certify the group value"
        );
        (sol.value, sol.weights, sol.rounds)
    };

    let bounds: Vec<_> = pairs
        .iter()
        .map(|&(h, h2)| tr.bound(h, h2, &lambda))
        .collect();
    let worst = bounds.iter().enumerate().max_by(|a, b| {
        a.1.value
            .partial_cmp(&b.1.value)
            .expect("ordered")
            .then(b.0.cmp(&a.0))
    });
    let (pair, extremal) = match worst {
        None => (None, Vec::new()),
        Some((p, b)) => {
            assert!(
                b.value.approx_eq(&value),
                "worst pair does not attain the value"
            );
            let (h, h2) = pairs[p];
            let mut touched: Vec<usize> = tr.at[h].iter().chain(&tr.at[h2]).copied().collect();
            touched.sort_unstable();
            touched.dedup();
            (
                Some((inst.f[h].clone(), inst.f[h2].clone())),
                touched
                    .into_iter()
                    .map(|x| (tr.points[x].clone(), b.potential[x].clone()))
                    .collect(),
            )
        }
    };
    let weights = inst
        .s
        .iter()
        .zip(&lambda)
        .filter(|(_, w)| w.is_pos())
        .map(|(g, w)| (g.clone(), w.clone()))
        .collect();
    Ok(GroupValue {
        value,
        weights,
        pair,
        extremal,
        rounds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow<T> {
    pub radius: usize,
    pub support: usize,
    pub value: T,
}

/// `W(F, Ball(r))` in discrete mode for `r = 1..=radius`, computed in
/// parallel. Balls nest, so the sequence is nonincreasing; this is asserted.
pub fn decay_profile<T: Scalar + Send + Sync>(
    group: &FGGroupOracle,
    f: &[Word],
    radius: usize,
) -> Result<Vec<DecayRow<T>>, GroupError> {
    let rows = (1..=radius)
        .into_par_iter()
        .map(|r| {
            let ball = group.ball(r);
            let support = ball.len();
            let inst = GroupCriterionInstance::new(group, f.to_vec(), ball, MetricMode::Discrete)?;
            let v = group_value::<_, T>(&inst)?;
            Ok(DecayRow {
                radius: r,
                support,
                value: v.value,
            })
        })
        .collect::<Result<Vec<_>, GroupError>>()?;
    for w in rows.windows(2) {
        assert!(
            w[1].value.approx_le(&w[0].value),
            "decay profile increased from radius {} to {}",
            w[0].radius,
            w[1].radius
        );
    }
    Ok(rows)
}

/// `radius,value,decimal` with the value as `p/q` and to 12 digits.
pub fn write_decay_csv(rows: &[DecayRow<Rational>]) -> String {
    let mut out = String::from("radius,value,decimal\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.radius, r.value, to_decimal(&r.value, 12));
    }
    out
}
