use thiserror::Error;

use super::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("cost matrix is {rows}x{cols} but marginals have lengths {supply} and {demand}")]
    Shape {
        rows: usize,
        cols: usize,
        supply: usize,
        demand: usize,
    },
    #[error("marginals must be nonnegative")]
    NegativeMass,
    #[error("supply mass {supply} differs from demand mass {demand}")]
    MassMismatch { supply: String, demand: String },
}

/// A coupling between `rows` sources and `cols` sinks, dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<T> {
    pub rows: usize,
    pub cols: usize,
    pub mass: Vec<T>,
}

impl<T: Scalar> TransportPlan<T> {
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.mass[i * self.cols + j]
    }

    /// Nonzero entries as `(row, col, mass)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(move |(k, m)| (k / self.cols, k % self.cols, m))
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(T::zero(), |a, j| a + self.get(i, j).clone()))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |a, i| a + self.get(i, j).clone()))
            .collect()
    }

    pub fn cost(&self, cost: &[Vec<T>]) -> T {
        self.entries()
            .fold(T::zero(), |a, (i, j, m)| a + m.clone() * cost[i][j].clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution<T> {
    pub plan: TransportPlan<T>,
    pub value: T,
    /// Supply-side potentials `f` and demand-side potentials `g` with
    /// `f_x + g_y ≤ cost_xy` and `f·supply + g·demand = value`.
    pub supply_potential: Vec<T>,
    pub demand_potential: Vec<T>,
}

/// Optimal transport between `supply` and `demand` under `cost`, solved as a
/// generic LP.
pub fn solve_transport<T: Scalar>(
    cost: &[Vec<T>],
    supply: &[T],
    demand: &[T],
) -> Result<TransportSolution<T>, TransportError> {
    let (rows, cols) = (supply.len(), demand.len());
    if cost.len() != rows || cost.iter().any(|r| r.len() != cols) {
        return Err(TransportError::Shape {
            rows: cost.len(),
            cols: cost.first().map_or(0, Vec::len),
            supply: rows,
            demand: cols,
        });
    }
    if supply.iter().chain(demand).any(Scalar::is_neg) {
        return Err(TransportError::NegativeMass);
    }
    let s_total = supply.iter().cloned().fold(T::zero(), |a, b| a + b);
    let d_total = demand.iter().cloned().fold(T::zero(), |a, b| a + b);
    if !s_total.approx_eq(&d_total) {
        return Err(TransportError::MassMismatch {
            supply: s_total.to_string(),
            demand: d_total.to_string(),
        });
    }

    let var = |i: usize, j: usize| i * cols + j;
    let mut lp = LinearProgram::new(rows * cols, Sense::Minimize);
    for i in 0..rows {
        for j in 0..cols {
            lp.set_objective(var(i, j), cost[i][j].clone());
        }
    }
    for (i, s) in supply.iter().enumerate() {
        lp.add_sparse(
            (0..cols).map(|j| (var(i, j), T::one())),
            Relation::Eq,
            s.clone(),
        );
    }
    for (j, d) in demand.iter().enumerate() {
        lp.add_sparse(
            (0..rows).map(|i| (var(i, j), T::one())),
            Relation::Eq,
            d.clone(),
        );
    }
    let sol = solve_lp(&lp).expect("transport LP is well formed");
    assert_eq!(
        sol.status,
        LpStatus::Optimal,
        "balanced transport is always feasible and bounded"
    );
    Ok(TransportSolution {
        plan: TransportPlan {
            rows,
            cols,
            mass: sol.primal,
        },
        value: sol.objective,
        supply_potential: sol.dual[..rows].to_vec(),
        demand_potential: sol.dual[rows..].to_vec(),
    })
}
