//! Two-phase simplex over exact rationals with Bland's rule.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

/// `maximize objective · x` subject to the constraints and `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<BigRational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: BigRational,
        solution: Vec<BigRational>,
    },
    Infeasible,
    Unbounded,
}

pub fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl LinearProgram {
    pub fn new(num_vars: usize, objective: Vec<BigRational>) -> Self {
        assert_eq!(objective.len(), num_vars);
        LinearProgram {
            num_vars,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<BigRational>, relation: Relation, rhs: BigRational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn maximize(&self) -> LpOutcome {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    /// Rows of `[coefficients | rhs]`.
    rows: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    num_vars: usize,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_vars;
        let slack_count = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let first_artificial = n + slack_count;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_slack = n;
        let mut next_artificial = first_artificial;
        let artificial_count = lp
            .constraints
            .iter()
            .filter(|c| {
                let flip = c.rhs.is_negative();
                !matches!((c.relation, flip), (Relation::Le, false) | (Relation::Ge, true))
            })
            .count();
        let width = first_artificial + artificial_count + 1;
        for c in &lp.constraints {
            let flip = c.rhs.is_negative();
            let sign = if flip { -BigRational::one() } else { BigRational::one() };
            let relation = match (c.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            let mut row = vec![BigRational::zero(); width];
            for (j, a) in c.coeffs.iter().enumerate() {
                row[j] = a * &sign;
            }
            row[width - 1] = &c.rhs * &sign;
            match relation {
                Relation::Le => {
                    row[next_slack] = BigRational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -BigRational::one();
                    next_slack += 1;
                    row[next_artificial] = BigRational::one();
                    basis.push(next_artificial);
                    next_artificial += 1;
                }
                Relation::Eq => {
                    row[next_artificial] = BigRational::one();
                    basis.push(next_artificial);
                    next_artificial += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            num_vars: n,
            first_artificial,
        }
    }

    fn width(&self) -> usize {
        self.rows.first().map_or(self.first_artificial + 1, Vec::len)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for x in self.rows[row].iter_mut() {
            *x /= &p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (x, y) in r.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost · x` over columns `< limit`. Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[BigRational], limit: usize) -> bool {
        let rhs = self.width() - 1;
        loop {
            // Bland: lowest-index column with positive reduced cost.
            let entering = (0..limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() {
                        reduced -= &cost[b] * &self.rows[i][j];
                    }
                }
                reduced.is_positive()
            });
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[i][rhs] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(row, col);
        }
    }

    fn solve(mut self, objective: &[BigRational]) -> LpOutcome {
        let width = self.width();
        let rhs = width - 1;
        if width - 1 > self.first_artificial {
            // Phase one: maximize minus the sum of artificials.
            let mut cost = vec![BigRational::zero(); width - 1];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = -BigRational::one();
            }
            self.optimize(&cost, width - 1);
            let infeasible = self
                .basis
                .iter()
                .enumerate()
                .any(|(i, &b)| b >= self.first_artificial && !self.rows[i][rhs].is_zero());
            if infeasible {
                return LpOutcome::Infeasible;
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut cost = vec![BigRational::zero(); width - 1];
        cost[..self.num_vars].clone_from_slice(objective);
        if !self.optimize(&cost, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut solution = vec![BigRational::zero(); self.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                solution[b] = self.rows[i][rhs].clone();
            }
        }
        let value = solution
            .iter()
            .zip(objective)
            .fold(BigRational::zero(), |acc, (x, c)| acc + x * c);
        LpOutcome::Optimal { value, solution }
    }
}
