use super::{LinearProgram, LpSolution, LpStatus, Relation, Sense};
use crate::scalar::Scalar;

/// How an original variable is expressed through nonnegative columns:
/// `x = offset + Σ sign·s_col`.
struct VarMap<T> {
    offset: T,
    cols: Vec<(usize, bool)>,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    width: usize,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, i: usize) -> &T {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let p = self.rows[r][q].clone();
        let nz: Vec<usize> = (0..=self.width)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        if !p.is_one() {
            for &j in &nz {
                let v = std::mem::replace(&mut self.rows[r][j], T::zero());
                self.rows[r][j] = v / p.clone();
            }
        }
        self.rows[r][q] = T::one();
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<T>| {
            let f = row[q].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                let v = std::mem::replace(&mut row[j], T::zero());
                row[j] = v - f.clone() * pivot_row[j].clone();
            }
            row[q] = T::zero();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = q;
    }

    fn price(&mut self, cost: &[T]) {
        let mut obj: Vec<T> = cost.to_vec();
        obj.push(T::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                if !v.is_zero() {
                    *o = o.clone() - cb.clone() * v.clone();
                }
            }
        }
        self.obj = obj;
    }

    /// Dantzig pricing, switching to Bland's rule after a run of degenerate
    /// pivots and back after the first strict improvement. Bland's rule
    /// cannot cycle and strict improvements never revisit a basis, so this
    /// terminates. Returns `Err(q)` when column `q` is an unbounded direction.
    fn run(&mut self, allowed: usize) -> Result<(), usize> {
        const DEGENERATE_RUN: usize = 32;
        let mut streak = 0;
        loop {
            let bland = streak >= DEGENERATE_RUN;
            let entering = if bland {
                (0..allowed).find(|&j| self.obj[j].is_neg())
            } else {
                (0..allowed).filter(|&j| self.obj[j].is_neg()).fold(
                    None,
                    |best: Option<usize>, j| match best {
                        Some(b) if self.obj[b] <= self.obj[j] => Some(b),
                        _ => Some(j),
                    },
                )
            };
            let Some(q) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][q];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                let better = match &leave {
                    None => true,
                    Some((r, best)) => {
                        if ratio.approx_eq(best) {
                            if bland {
                                self.basis[i] < self.basis[*r]
                            } else {
                                *a > self.rows[*r][q]
                            }
                        } else {
                            ratio < *best
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, ratio)) => {
                    if ratio.is_negligible() {
                        streak += 1;
                    } else {
                        streak = 0;
                    }
                    self.pivot(r, q);
                }
                None => return Err(q),
            }
        }
    }
}

pub(super) fn solve<T: Scalar>(lp: &LinearProgram<T>) -> LpSolution<T> {
    let n = lp.num_vars;
    let m_orig = lp.constraints.len();

    let mut maps: Vec<VarMap<T>> = Vec::with_capacity(n);
    let mut ns = 0;
    let mut bound_rows: Vec<(usize, T)> = Vec::new();
    for j in 0..n {
        match (&lp.lower[j], &lp.upper[j]) {
            (Some(l), hi) => {
                if let Some(u) = hi {
                    bound_rows.push((ns, u.clone() - l.clone()));
                }
                maps.push(VarMap {
                    offset: l.clone(),
                    cols: vec![(ns, true)],
                });
                ns += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap {
                    offset: u.clone(),
                    cols: vec![(ns, false)],
                });
                ns += 1;
            }
            (None, None) => {
                maps.push(VarMap {
                    offset: T::zero(),
                    cols: vec![(ns, true), (ns + 1, false)],
                });
                ns += 2;
            }
        }
    }

    // Rows over structural columns, normalized to nonnegative right-hand sides.
    let mut std_rows: Vec<(Vec<T>, Relation, T, bool)> = Vec::new();
    for c in &lp.constraints {
        let mut row = vec![T::zero(); ns];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            rhs = rhs - a.clone() * maps[j].offset.clone();
            for &(col, pos) in &maps[j].cols {
                row[col] = if pos { a.clone() } else { -a.clone() };
            }
        }
        std_rows.push((row, c.relation, rhs, false));
    }
    for (col, cap) in &bound_rows {
        let mut row = vec![T::zero(); ns];
        row[*col] = T::one();
        std_rows.push((row, Relation::Le, cap.clone(), false));
    }
    // Negative right-hand sides are flipped; so are `≥ 0` rows, whose slack
    // then starts basic instead of needing an artificial column.
    for (row, rel, rhs, flipped) in std_rows.iter_mut() {
        if rhs.is_neg() || (rhs.is_zero() && *rel == Relation::Ge) {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            *rhs = -rhs.clone();
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            *flipped = true;
        }
    }

    let m = std_rows.len();
    let n_slack = std_rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = std_rows.iter().filter(|r| r.1 != Relation::Le).count();
    let art_start = ns + n_slack;
    let width = art_start + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut identity = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (ns, art_start);
    for (row, rel, rhs, _) in &std_rows {
        let mut t = row.clone();
        t.resize(width + 1, T::zero());
        t[width] = rhs.clone();
        match rel {
            Relation::Le => {
                t[next_slack] = T::one();
                basis.push(next_slack);
                identity.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                t[next_slack] = -T::one();
                next_slack += 1;
                t[next_art] = T::one();
                basis.push(next_art);
                identity.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                t[next_art] = T::one();
                basis.push(next_art);
                identity.push(next_art);
                next_art += 1;
            }
        }
        rows.push(t);
    }
    let mut tab = Tableau {
        rows,
        obj: Vec::new(),
        basis,
        width,
    };

    let original_flip: Vec<T> = std_rows
        .iter()
        .take(m_orig)
        .map(|r| if r.3 { -T::one() } else { T::one() })
        .collect();

    // Phase 1.
    if n_art > 0 {
        let mut cost1 = vec![T::zero(); width];
        for c in cost1.iter_mut().skip(art_start) {
            *c = T::one();
        }
        tab.price(&cost1);
        tab.run(width).expect("phase one is bounded below by zero");
        let infeasibility = -tab.obj[width].clone();
        if infeasibility.is_pos() {
            let farkas = (0..m_orig)
                .map(|i| {
                    let id = identity[i];
                    let y = cost1[id].clone() - tab.obj[id].clone();
                    original_flip[i].clone() * y
                })
                .collect();
            return LpSolution {
                status: LpStatus::Infeasible,
                primal: Vec::new(),
                dual: Vec::new(),
                reduced_costs: Vec::new(),
                objective: T::zero(),
                farkas: Some(farkas),
                ray: None,
            };
        }
        for r in 0..m {
            if tab.basis[r] < art_start {
                continue;
            }
            tab.rows[r][width] = T::zero();
            if let Some(q) = (0..art_start).find(|&j| !tab.rows[r][j].is_negligible()) {
                tab.pivot(r, q);
            }
        }
    }

    // Phase 2 in minimization form.
    let mut cost2 = vec![T::zero(); width];
    for (j, map) in maps.iter().enumerate() {
        let c = match lp.sense {
            Sense::Minimize => lp.objective[j].clone(),
            Sense::Maximize => -lp.objective[j].clone(),
        };
        for &(col, pos) in &map.cols {
            cost2[col] = if pos { c.clone() } else { -c.clone() };
        }
    }
    tab.price(&cost2);
    let outcome = tab.run(art_start);

    let std_values = |tab: &Tableau<T>| {
        let mut s = vec![T::zero(); width];
        for (i, &b) in tab.basis.iter().enumerate() {
            s[b] = tab.rhs(i).clone();
        }
        s
    };
    let to_original = |s: &[T], with_offset: bool| -> Vec<T> {
        maps.iter()
            .map(|map| {
                let base = if with_offset {
                    map.offset.clone()
                } else {
                    T::zero()
                };
                map.cols.iter().fold(base, |acc, &(col, pos)| {
                    if pos {
                        acc + s[col].clone()
                    } else {
                        acc - s[col].clone()
                    }
                })
            })
            .collect()
    };

    let s = std_values(&tab);
    let primal = to_original(&s, true);
    let objective = lp.objective_value(&primal);

    if let Err(q) = outcome {
        let mut dir = vec![T::zero(); width];
        dir[q] = T::one();
        for (i, &b) in tab.basis.iter().enumerate() {
            dir[b] = -tab.rows[i][q].clone();
        }
        return LpSolution {
            status: LpStatus::Unbounded,
            primal,
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            objective,
            farkas: None,
            ray: Some(to_original(&dir, false)),
        };
    }

    let dual: Vec<T> = (0..m_orig)
        .map(|i| {
            let y_min = original_flip[i].clone() * (-tab.obj[identity[i]].clone());
            match lp.sense {
                Sense::Minimize => y_min,
                Sense::Maximize => -y_min,
            }
        })
        .collect();
    let reduced_costs = (0..n)
        .map(|j| {
            lp.constraints
                .iter()
                .zip(&dual)
                .fold(lp.objective[j].clone(), |acc, (c, y)| {
                    if c.coeffs[j].is_zero() {
                        acc
                    } else {
                        acc - c.coeffs[j].clone() * y.clone()
                    }
                })
        })
        .collect();
    LpSolution {
        status: LpStatus::Optimal,
        primal,
        dual,
        reduced_costs,
        objective,
        farkas: None,
        ray: None,
    }
}
