//! Linear programming over any [`Scalar`]: a dense two-phase tableau simplex
//! with Bland's rule, returning primal, dual and (on failure) Farkas or ray
//! certificates that can be checked independently.

mod dump;
mod simplex;
mod transport;

use thiserror::Error;

use crate::scalar::Scalar;

pub use dump::{parse_lp, write_lp};
pub use transport::{solve_transport, TransportError, TransportPlan, TransportSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("row {row} has {found} coefficients, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("objective has {found} coefficients, expected {expected}")]
    ObjectiveMismatch { expected: usize, found: usize },
    #[error("variable {0} has lower bound above upper bound")]
    InvertedBounds(usize),
    #[error("variable index {0} out of range")]
    VariableOutOfRange(usize),
}

/// `optimize c·x  s.t.  rows rel rhs,  lower ≤ x ≤ upper`.
/// Variables default to `0 ≤ x` with no upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub lower: Vec<Option<T>>,
    pub upper: Vec<Option<T>>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        Self {
            num_vars,
            sense,
            objective: vec![T::zero(); num_vars],
            constraints: Vec::new(),
            lower: vec![Some(T::zero()); num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn set_objective(&mut self, var: usize, c: T) {
        self.objective[var] = c;
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<T>, upper: Option<T>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Add a row given as `(variable, coefficient)` terms; repeated
    /// variables accumulate.
    pub fn add_sparse(
        &mut self,
        terms: impl IntoIterator<Item = (usize, T)>,
        relation: Relation,
        rhs: T,
    ) {
        let mut coeffs = vec![T::zero(); self.num_vars];
        for (j, c) in terms {
            coeffs[j] = coeffs[j].clone() + c;
        }
        self.add_constraint(coeffs, relation, rhs);
    }

    pub fn check(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars {
            return Err(LpError::ObjectiveMismatch {
                expected: self.num_vars,
                found: self.objective.len(),
            });
        }
        if self.lower.len() != self.num_vars || self.upper.len() != self.num_vars {
            return Err(LpError::VariableOutOfRange(
                self.lower.len().max(self.upper.len()),
            ));
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(LpError::DimensionMismatch {
                    row,
                    expected: self.num_vars,
                    found: c.coeffs.len(),
                });
            }
        }
        for j in 0..self.num_vars {
            if let (Some(l), Some(u)) = (&self.lower[j], &self.upper[j]) {
                if l > u {
                    return Err(LpError::InvertedBounds(j));
                }
            }
        }
        Ok(())
    }

    pub fn row_activity(&self, row: usize, x: &[T]) -> T {
        dot(&self.constraints[row].coeffs, x)
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        dot(&self.objective, x)
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output.
///
/// * `Optimal`: `primal`, `dual` (one multiplier per constraint, the rate of
///   change of the optimum in the right-hand side), `reduced_costs` and
///   `objective` are filled.
/// * `Infeasible`: `farkas` holds constraint multipliers `y` whose aggregate
///   row cannot reach `y·b` anywhere in the variable box.
/// * `Unbounded`: `ray` is a feasible direction that improves the objective
///   without limit; `primal` is a feasible point.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub primal: Vec<T>,
    pub dual: Vec<T>,
    pub reduced_costs: Vec<T>,
    pub objective: T,
    pub farkas: Option<Vec<T>>,
    pub ray: Option<Vec<T>>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("primal point violates constraint {0}")]
    PrimalRow(usize),
    #[error("primal point violates the bounds of variable {0}")]
    PrimalBound(usize),
    #[error("dual multiplier {0} has the wrong sign")]
    DualSign(usize),
    #[error("reduced cost of variable {0} has the wrong sign")]
    ReducedCostSign(usize),
    #[error("complementary slackness fails at constraint {0}")]
    Slackness(usize),
    #[error("primal objective {primal} differs from dual objective {dual}")]
    DualityGap { primal: String, dual: String },
    #[error("Farkas multipliers do not prove infeasibility")]
    Farkas,
    #[error("ray is not an improving feasible direction")]
    Ray,
    #[error("certificate missing for status {0:?}")]
    Missing(LpStatus),
}

impl<T: Scalar> LpSolution<T> {
    /// Recheck the returned certificate against `lp` from scratch.
    pub fn verify(&self, lp: &LinearProgram<T>) -> Result<(), CertificateError> {
        match self.status {
            LpStatus::Optimal => verify_optimal(lp, self),
            LpStatus::Infeasible => {
                let y = self
                    .farkas
                    .as_ref()
                    .ok_or(CertificateError::Missing(self.status))?;
                verify_farkas(lp, y)
            }
            LpStatus::Unbounded => {
                let r = self
                    .ray
                    .as_ref()
                    .ok_or(CertificateError::Missing(self.status))?;
                verify_primal(lp, &self.primal)?;
                verify_ray(lp, r)
            }
        }
    }

    /// Dual objective `y·b + Σ z_j·x_j` over bounded variables.
    pub fn dual_objective(&self, lp: &LinearProgram<T>) -> T {
        let yb = lp
            .constraints
            .iter()
            .zip(&self.dual)
            .fold(T::zero(), |acc, (c, y)| acc + c.rhs.clone() * y.clone());
        self.reduced_costs
            .iter()
            .zip(&self.primal)
            .fold(yb, |acc, (z, x)| acc + z.clone() * x.clone())
    }
}

fn verify_primal<T: Scalar>(lp: &LinearProgram<T>, x: &[T]) -> Result<(), CertificateError> {
    for j in 0..lp.num_vars {
        if let Some(l) = &lp.lower[j] {
            if !l.approx_le(&x[j]) {
                return Err(CertificateError::PrimalBound(j));
            }
        }
        if let Some(u) = &lp.upper[j] {
            if !x[j].approx_le(u) {
                return Err(CertificateError::PrimalBound(j));
            }
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let a = lp.row_activity(i, x);
        let ok = match c.relation {
            Relation::Le => a.approx_le(&c.rhs),
            Relation::Ge => c.rhs.approx_le(&a),
            Relation::Eq => a.approx_eq(&c.rhs),
        };
        if !ok {
            return Err(CertificateError::PrimalRow(i));
        }
    }
    Ok(())
}

/// Sign of a multiplier or reduced cost in minimization form.
fn orient<T: Scalar>(sense: Sense, v: &T) -> T {
    match sense {
        Sense::Minimize => v.clone(),
        Sense::Maximize => -v.clone(),
    }
}

fn verify_optimal<T: Scalar>(
    lp: &LinearProgram<T>,
    sol: &LpSolution<T>,
) -> Result<(), CertificateError> {
    let x = &sol.primal;
    verify_primal(lp, x)?;
    // In minimization form: ≤ rows carry y ≤ 0, ≥ rows y ≥ 0.
    for (i, c) in lp.constraints.iter().enumerate() {
        let y = orient(lp.sense, &sol.dual[i]);
        let sign_ok = match c.relation {
            Relation::Le => !y.is_pos(),
            Relation::Ge => !y.is_neg(),
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(CertificateError::DualSign(i));
        }
        if !y.is_negligible() && !lp.row_activity(i, x).approx_eq(&c.rhs) {
            return Err(CertificateError::Slackness(i));
        }
    }
    for j in 0..lp.num_vars {
        let mut z = lp.objective[j].clone();
        for (c, y) in lp.constraints.iter().zip(&sol.dual) {
            if !c.coeffs[j].is_zero() {
                z = z - c.coeffs[j].clone() * y.clone();
            }
        }
        if !z.approx_eq(&sol.reduced_costs[j]) {
            return Err(CertificateError::ReducedCostSign(j));
        }
        let z = orient(lp.sense, &z);
        let at_lower = lp.lower[j].as_ref().is_some_and(|l| l.approx_eq(&x[j]));
        let at_upper = lp.upper[j].as_ref().is_some_and(|u| u.approx_eq(&x[j]));
        let ok = match (at_lower, at_upper) {
            (true, true) => true,
            (true, false) => !z.is_neg(),
            (false, true) => !z.is_pos(),
            (false, false) => z.is_negligible(),
        };
        if !ok {
            return Err(CertificateError::ReducedCostSign(j));
        }
    }
    let primal = lp.objective_value(x);
    let dual = sol.dual_objective(lp);
    if !primal.approx_eq(&dual) || !primal.approx_eq(&sol.objective) {
        return Err(CertificateError::DualityGap {
            primal: primal.to_string(),
            dual: dual.to_string(),
        });
    }
    Ok(())
}

/// `y` with signs `≤`→`y ≤ 0`, `≥`→`y ≥ 0` makes `Σ y_i row_i(x) ≥ y·b` hold
/// for every feasible `x`; the box maximum of the aggregate row must fall
/// short of `y·b`.
fn verify_farkas<T: Scalar>(lp: &LinearProgram<T>, y: &[T]) -> Result<(), CertificateError> {
    if y.len() != lp.constraints.len() {
        return Err(CertificateError::Farkas);
    }
    let mut target = T::zero();
    let mut agg = vec![T::zero(); lp.num_vars];
    for (c, yi) in lp.constraints.iter().zip(y) {
        let sign_ok = match c.relation {
            Relation::Le => !yi.is_pos(),
            Relation::Ge => !yi.is_neg(),
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(CertificateError::Farkas);
        }
        target = target + yi.clone() * c.rhs.clone();
        for (a, cj) in agg.iter_mut().zip(&c.coeffs) {
            if !cj.is_zero() {
                *a = a.clone() + yi.clone() * cj.clone();
            }
        }
    }
    let mut best = T::zero();
    for (j, a) in agg.iter().enumerate() {
        if a.is_negligible() {
            continue;
        }
        let bound = if a.is_pos() {
            &lp.upper[j]
        } else {
            &lp.lower[j]
        };
        match bound {
            Some(b) => best = best + a.clone() * b.clone(),
            None => return Err(CertificateError::Farkas),
        }
    }
    if best.approx_le(&target) && !best.approx_eq(&target) {
        Ok(())
    } else {
        Err(CertificateError::Farkas)
    }
}

fn verify_ray<T: Scalar>(lp: &LinearProgram<T>, r: &[T]) -> Result<(), CertificateError> {
    for j in 0..lp.num_vars {
        if lp.lower[j].is_some() && r[j].is_neg() {
            return Err(CertificateError::Ray);
        }
        if lp.upper[j].is_some() && r[j].is_pos() {
            return Err(CertificateError::Ray);
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let a = lp.row_activity(i, r);
        let ok = match c.relation {
            Relation::Le => !a.is_pos(),
            Relation::Ge => !a.is_neg(),
            Relation::Eq => a.is_negligible(),
        };
        if !ok {
            return Err(CertificateError::Ray);
        }
    }
    let gain = orient(lp.sense, &lp.objective_value(r));
    if gain.is_neg() {
        Ok(())
    } else {
        Err(CertificateError::Ray)
    }
}

/// Solve `lp` exactly (for exact scalars). The optimality certificate is
/// rechecked before returning; a failing recheck on an exact scalar type is
/// a solver bug and panics.
pub fn solve_lp<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
    lp.check()?;
    let sol = simplex::solve(lp);
    if T::EXACT {
        if let Err(e) = sol.verify(lp) {
            panic!("simplex certificate failed its own recheck: {e}");
        }
    }
    Ok(sol)
}
