//! Dense two-phase simplex over exact rationals, with Bland's rule.
//!
//! Sized for desk-scale problems (tens of rows, a few hundred columns). All
//! variables are nonnegative; free variables are modelled by the caller as a
//! difference of two columns.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Self { coeffs, relation, rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Optimal { value: Rational, solution: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl Outcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, Outcome::Infeasible)
    }
}

/// Maximizes `objective · x` subject to `constraints` and `x >= 0`.
pub fn maximize(objective: &[Rational], constraints: &[Constraint]) -> Outcome {
    let n = objective.len();
    let m = constraints.len();
    for c in constraints {
        assert_eq!(c.coeffs.len(), n, "constraint width must match objective");
    }

    // Columns: originals, one slack/surplus per inequality, one artificial
    // per row that lacks a slack basis, then the right-hand side.
    let slack_count = constraints.iter().filter(|c| c.relation != Relation::Eq).count();
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut needs_artificial = vec![false; m];
    let mut slack_col = n;
    for (r, c) in constraints.iter().enumerate() {
        let flip = c.rhs.is_negative();
        let sign = |v: &Rational| if flip { -v } else { v.clone() };
        let mut row: Vec<Rational> = c.coeffs.iter().map(sign).collect();
        row.resize(n + slack_count, Rational::zero());
        let relation = match (c.relation, flip) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (rel, _) => rel,
        };
        match relation {
            Relation::Le => {
                row[slack_col] = Rational::one();
                basis[r] = slack_col;
                slack_col += 1;
            }
            Relation::Ge => {
                row[slack_col] = -Rational::one();
                slack_col += 1;
                needs_artificial[r] = true;
            }
            Relation::Eq => needs_artificial[r] = true,
        }
        row.push(sign(&c.rhs));
        rows.push(row);
    }
    let first_artificial = n + slack_count;
    let artificial_count = needs_artificial.iter().filter(|&&b| b).count();
    let width = first_artificial + artificial_count;
    let mut next_art = first_artificial;
    for (r, row) in rows.iter_mut().enumerate() {
        let rhs = row.pop().expect("rhs");
        row.resize(width, Rational::zero());
        if needs_artificial[r] {
            row[next_art] = Rational::one();
            basis[r] = next_art;
            next_art += 1;
        }
        row.push(rhs);
    }
    let mut tableau = Tableau { rows, basis, width };

    if artificial_count > 0 {
        let mut phase_one = vec![Rational::zero(); width];
        for v in phase_one.iter_mut().skip(first_artificial) {
            *v = -Rational::one();
        }
        if tableau.optimize(&phase_one, width).is_none() {
            unreachable!("phase one is bounded");
        }
        if tableau.objective_value(&phase_one).is_negative() {
            return Outcome::Infeasible;
        }
        tableau.expel_artificials(first_artificial);
    }

    let mut costs = objective.to_vec();
    costs.resize(width, Rational::zero());
    if tableau.optimize(&costs, first_artificial).is_none() {
        return Outcome::Unbounded;
    }
    let mut solution = vec![Rational::zero(); n];
    for (r, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            solution[b] = tableau.rhs(r).clone();
        }
    }
    let value = objective
        .iter()
        .zip(&solution)
        .map(|(c, x)| c * x)
        .fold(Rational::zero(), |a, b| a + b);
    Outcome::Optimal { value, solution }
}

/// Whether the constraints admit any nonnegative solution.
pub fn feasible(width: usize, constraints: &[Constraint]) -> bool {
    maximize(&vec![Rational::zero(); width], constraints).is_feasible()
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.width]
    }

    fn objective_value(&self, costs: &[Rational]) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .map(|(r, &b)| &costs[b] * self.rhs(r))
            .fold(Rational::zero(), |a, b| a + b)
    }

    fn reduced_cost(&self, costs: &[Rational], col: usize) -> Rational {
        let mut z = Rational::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            if !self.rows[r][col].is_zero() {
                z += &costs[b] * &self.rows[r][col];
            }
        }
        &costs[col] - z
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (v, pv) in other.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs primal simplex over columns `< allowed`. `None` if unbounded.
    fn optimize(&mut self, costs: &[Rational], allowed: usize) -> Option<()> {
        loop {
            let entering = (0..allowed)
                .filter(|c| !self.basis.contains(c))
                .find(|&c| self.reduced_cost(costs, c).is_positive());
            let Some(col) = entering else {
                return Some(());
            };
            let mut leaving: Option<(Rational, usize)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &leaving {
                    None => true,
                    Some((best, br)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*br]),
                };
                if better {
                    leaving = Some((ratio, r));
                }
            }
            let (_, row) = leaving?;
            self.pivot(row, col);
        }
    }

    /// Pivots zero-level artificials out of the basis; rows where that is
    /// impossible are redundant and dropped.
    fn expel_artificials(&mut self, first_artificial: usize) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < first_artificial {
                r += 1;
                continue;
            }
            match (0..first_artificial).find(|&c| !self.rows[r][c].is_zero()) {
                Some(col) => {
                    self.pivot(r, col);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn c(coeffs: &[i64], rel: Relation, rhs: i64) -> Constraint {
        Constraint::new(coeffs.iter().map(|&v| int(v)).collect(), rel, int(rhs))
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let out = maximize(
            &[int(3), int(5)],
            &[c(&[1, 0], Relation::Le, 4), c(&[0, 2], Relation::Le, 12), c(&[3, 2], Relation::Le, 18)],
        );
        assert_eq!(out, Outcome::Optimal { value: int(36), solution: vec![int(2), int(6)] });
    }

    #[test]
    fn equality_and_ge_rows() {
        // max -x - y, x + y = 3, x >= 1, y >= 1/2 scaled: 2y >= 1
        let out = maximize(
            &[int(-1), int(-1)],
            &[c(&[1, 1], Relation::Eq, 3), c(&[1, 0], Relation::Ge, 1), c(&[0, 2], Relation::Ge, 1)],
        );
        match out {
            Outcome::Optimal { value, .. } => assert_eq!(value, int(-3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fractional_optimum() {
        // max x + y, 2x + y <= 1, x + 2y <= 1 -> 2/3
        let out = maximize(&[int(1), int(1)], &[c(&[2, 1], Relation::Le, 1), c(&[1, 2], Relation::Le, 1)]);
        assert_eq!(
            out,
            Outcome::Optimal { value: ratio(2, 3), solution: vec![ratio(1, 3), ratio(1, 3)] }
        );
    }

    #[test]
    fn infeasible_and_unbounded() {
        assert_eq!(
            maximize(&[int(1)], &[c(&[1], Relation::Le, 1), c(&[1], Relation::Ge, 2)]),
            Outcome::Infeasible
        );
        assert_eq!(maximize(&[int(1)], &[c(&[1], Relation::Ge, 2)]), Outcome::Unbounded);
        assert_eq!(maximize(&[int(1), int(1)], &[c(&[1, -1], Relation::Le, 1)]), Outcome::Unbounded);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x <= -2  means x >= 2; min x -> 2
        let out = maximize(&[int(-1)], &[c(&[-1], Relation::Le, -2)]);
        assert_eq!(out, Outcome::Optimal { value: int(-2), solution: vec![int(2)] });
    }

    #[test]
    fn redundant_equalities() {
        let out = maximize(
            &[int(1), int(0)],
            &[c(&[1, 1], Relation::Eq, 2), c(&[2, 2], Relation::Eq, 4), c(&[0, 1], Relation::Le, 5)],
        );
        assert_eq!(out, Outcome::Optimal { value: int(2), solution: vec![int(2), int(0)] });
        assert!(feasible(2, &[c(&[1, 1], Relation::Eq, 2)]));
        assert!(!feasible(2, &[c(&[1, 1], Relation::Eq, -2)]));
    }
}
