//! Exact rational linear programming.
//!
//! Textbook two-phase simplex on a dense `BigRational` tableau with Bland's
//! pivoting rule, which rules out cycling. All certificates (feasibility,
//! implication, optimality) are exact; nothing here touches floating point.

use super::{LinIneqSystem, Row};
use crate::{Error, Result};
use num::{BigRational, One, Signed, Zero};

/// Result of an exact minimization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    /// No feasible point.
    Infeasible,
    /// Objective unbounded below.
    Unbounded,
    /// Minimum attained; carries the value and one attaining point.
    Optimal(BigRational, Vec<BigRational>),
}

/// Dense simplex tableau in equality form `A x = b`, `x >= 0`, `b >= 0`,
/// with one basic (unit) column per row.
struct Tableau {
    a: Vec<Vec<BigRational>>,
    b: Vec<BigRational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    /// Reduced costs of `obj` in the current dictionary.
    fn reduced_costs(&self, obj: &[BigRational]) -> Vec<BigRational> {
        let mut r: Vec<BigRational> = obj.to_vec();
        r.resize(self.cols, BigRational::zero());
        for (i, row) in self.a.iter().enumerate() {
            let y = &r[self.basis[i]];
            if y.is_zero() {
                continue;
            }
            let y = y.clone();
            for (j, v) in row.iter().enumerate() {
                if j != self.basis[i] && !v.is_zero() {
                    let delta = &y * v;
                    r[j] -= delta;
                }
            }
            r[self.basis[i]] = BigRational::zero();
        }
        r
    }

    fn objective_value(&self, obj: &[BigRational]) -> BigRational {
        self.a
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let c = obj.get(self.basis[i]).cloned().unwrap_or_else(BigRational::zero);
                c * &self.b[i]
            })
            .sum()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.a[row][col].recip();
        for v in &mut self.a[row] {
            *v *= &inv;
        }
        self.b[row] *= &inv;
        for i in 0..self.a.len() {
            if i == row || self.a[i][col].is_zero() {
                continue;
            }
            let f = self.a[i][col].clone();
            for j in 0..self.cols {
                let delta = &f * &self.a[row][j];
                self.a[i][j] -= delta;
            }
            let delta = &f * &self.b[row];
            self.b[i] -= delta;
            self.a[i][col] = BigRational::zero();
        }
        self.basis[row] = col;
    }

    /// Minimizes `obj` over columns `< limit` with Bland's rule. Returns
    /// `None` when unbounded.
    fn run(&mut self, obj: &[BigRational], limit: usize) -> Option<BigRational> {
        loop {
            let r = self.reduced_costs(obj);
            // Bland: entering = lowest-index column with negative reduced cost.
            let Some(enter) = (0..limit).find(|&j| r[j].is_negative()) else {
                return Some(self.objective_value(obj));
            };
            // Leaving: minimum ratio, ties by lowest basic variable index.
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][enter].is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / &self.a[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let (row, _) = leave?;
            self.pivot(row, enter);
        }
    }

    /// Value of a structural variable in the current basic solution.
    fn solution_value(&self, col: usize) -> BigRational {
        self.basis
            .iter()
            .position(|&v| v == col)
            .map(|i| self.b[i].clone())
            .unwrap_or_else(BigRational::zero)
    }
}

/// Minimizes `objective . x` subject to `ineqs` (`a.x >= b`) and `eqs`
/// (`a.x = b`). When `nonneg` is set the variables are constrained to
/// `x >= 0`; otherwise they are free.
pub(crate) fn solve_raw(
    ineqs: &[(Vec<BigRational>, BigRational)],
    eqs: &[(Vec<BigRational>, BigRational)],
    objective: &[BigRational],
    nonneg: bool,
) -> LpOutcome {
    let n = objective.len();
    let structural = if nonneg { n } else { 2 * n };
    let m = ineqs.len() + eqs.len();
    let slack_base = structural;
    let art_base = structural + ineqs.len();
    // Columns: structural | slacks | artificials (allocated lazily).
    let mut a: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut b: Vec<BigRational> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut artificials = 0usize;
    let mut art_cols: Vec<(usize, usize)> = Vec::new(); // (row, column)

    let expand = |coeffs: &[BigRational], flip: bool| -> Vec<BigRational> {
        let mut row = vec![BigRational::zero(); structural];
        for (j, c) in coeffs.iter().enumerate() {
            let c = if flip { -c } else { c.clone() };
            if nonneg {
                row[j] = c;
            } else {
                row[2 * j] = c.clone();
                row[2 * j + 1] = -c;
            }
        }
        row
    };

    for (k, (coeffs, rhs)) in ineqs.iter().enumerate() {
        // a.x - s = b with s >= 0; flip whenever b <= 0 so the slack column
        // enters with +1 and a nonnegative rhs, making it a free initial
        // basic variable that needs no artificial.
        let flip = !rhs.is_positive();
        let mut row = expand(coeffs, flip);
        row.resize(art_base, BigRational::zero());
        row[slack_base + k] = if flip {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        let rb = if flip { -rhs } else { rhs.clone() };
        if flip {
            // Slack column is +1: usable as the initial basic variable.
            basis.push(slack_base + k);
        } else {
            art_cols.push((a.len(), art_base + artificials));
            basis.push(art_base + artificials);
            artificials += 1;
        }
        a.push(row);
        b.push(rb);
    }
    for (coeffs, rhs) in eqs {
        let flip = rhs.is_negative();
        let mut row = expand(coeffs, flip);
        row.resize(art_base, BigRational::zero());
        let rb = if flip { -rhs } else { rhs.clone() };
        art_cols.push((a.len(), art_base + artificials));
        basis.push(art_base + artificials);
        artificials += 1;
        a.push(row);
        b.push(rb);
    }
    let cols = art_base + artificials;
    for row in &mut a {
        row.resize(cols, BigRational::zero());
    }
    for (i, j) in art_cols {
        a[i][j] = BigRational::one();
    }

    let mut t = Tableau { a, b, basis, cols };

    if artificials > 0 {
        let mut phase1 = vec![BigRational::zero(); cols];
        for c in &mut phase1[art_base..] {
            *c = BigRational::one();
        }
        let v = t.run(&phase1, cols).expect("phase 1 is bounded below by 0");
        if v.is_positive() {
            return LpOutcome::Infeasible;
        }
        // Pivot leftover artificials out; a row with no real entries is a
        // redundant constraint and can be dropped.
        let mut i = 0;
        while i < t.a.len() {
            if t.basis[i] >= art_base {
                match (0..art_base).find(|&j| !t.a[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.a.remove(i);
                        t.b.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for row in &mut t.a {
            row.truncate(art_base);
        }
        t.cols = art_base;
    }

    let mut obj = vec![BigRational::zero(); t.cols];
    for (j, c) in objective.iter().enumerate() {
        if nonneg {
            obj[j] = c.clone();
        } else {
            obj[2 * j] = c.clone();
            obj[2 * j + 1] = -c;
        }
    }
    match t.run(&obj, t.cols) {
        None => LpOutcome::Unbounded,
        Some(value) => {
            let point: Vec<BigRational> = (0..n)
                .map(|j| {
                    if nonneg {
                        t.solution_value(j)
                    } else {
                        t.solution_value(2 * j) - t.solution_value(2 * j + 1)
                    }
                })
                .collect();
            LpOutcome::Optimal(value, point)
        }
    }
}

fn system_rows(sys: &LinIneqSystem) -> (Vec<(Vec<BigRational>, BigRational)>, Vec<(Vec<BigRational>, BigRational)>) {
    let conv = |r: &Row| -> (Vec<BigRational>, BigRational) {
        (
            r.coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
            BigRational::from_integer(r.rhs.clone()),
        )
    };
    (
        sys.ineqs().iter().map(conv).collect(),
        sys.eqs().iter().map(conv).collect(),
    )
}

/// Minimizes an objective over the system's solution set.
pub fn minimize(sys: &LinIneqSystem, objective: &[BigRational]) -> LpOutcome {
    assert_eq!(objective.len(), sys.coords().len(), "objective width mismatch");
    let (ineqs, eqs) = system_rows(sys);
    solve_raw(&ineqs, &eqs, objective, false)
}

/// Maximizes an objective; outcome value is the maximum.
pub fn maximize(sys: &LinIneqSystem, objective: &[BigRational]) -> LpOutcome {
    let neg: Vec<BigRational> = objective.iter().map(|c| -c).collect();
    match minimize(sys, &neg) {
        LpOutcome::Optimal(v, p) => LpOutcome::Optimal(-v, p),
        other => other,
    }
}

/// Exact feasibility test.
pub fn feasible(sys: &LinIneqSystem) -> bool {
    feasible_point(sys).is_some()
}

/// One exact feasible point, if any.
pub fn feasible_point(sys: &LinIneqSystem) -> Option<Vec<BigRational>> {
    let zero = vec![BigRational::zero(); sys.coords().len()];
    match minimize(sys, &zero) {
        LpOutcome::Optimal(_, p) => Some(p),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

/// True when every solution of `sys` satisfies `row . x >= rhs`.
/// Vacuously true for infeasible systems.
pub fn implies_ineq(sys: &LinIneqSystem, row: &Row) -> bool {
    let obj: Vec<BigRational> = row
        .coeffs
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    match minimize(sys, &obj) {
        LpOutcome::Infeasible => true,
        LpOutcome::Unbounded => false,
        LpOutcome::Optimal(v, _) => v >= BigRational::from_integer(row.rhs.clone()),
    }
}

/// True when every solution of `sys` satisfies `row . x = rhs`.
pub fn implies_eq(sys: &LinIneqSystem, row: &Row) -> bool {
    implies_ineq(sys, row) && implies_ineq(sys, &row.negated())
}

/// Mutual implication of two systems over identical coords.
pub fn equivalent(a: &LinIneqSystem, b: &LinIneqSystem) -> Result<bool> {
    if a.coords() != b.coords() {
        return Err(Error::InvalidInput(
            "systems compare only over identical coordinates".into(),
        ));
    }
    match (feasible(a), feasible(b)) {
        (false, false) => return Ok(true),
        (false, _) | (_, false) => return Ok(false),
        _ => {}
    }
    let covers = |outer: &LinIneqSystem, inner: &LinIneqSystem| {
        inner.ineqs().iter().all(|r| implies_ineq(outer, r))
            && inner.eqs().iter().all(|r| implies_eq(outer, r))
    };
    Ok(covers(a, b) && covers(b, a))
}

/// Whether `target` is a nonnegative combination of `columns` (exact).
pub fn nonneg_combination_exists(columns: &[Vec<BigRational>], target: &[BigRational]) -> bool {
    let dim = target.len();
    debug_assert!(columns.iter().all(|c| c.len() == dim));
    // One equality row per dimension: sum_i lambda_i columns[i][d] = target[d].
    let eqs: Vec<(Vec<BigRational>, BigRational)> = (0..dim)
        .map(|d| {
            (
                columns.iter().map(|c| c[d].clone()).collect(),
                target[d].clone(),
            )
        })
        .collect();
    let zero = vec![BigRational::zero(); columns.len()];
    !matches!(solve_raw(&[], &eqs, &zero, true), LpOutcome::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::Coord;
    use crate::vars::node;
    use num::BigInt;

    fn coords(n: usize) -> Vec<Coord> {
        // Distinct singleton entropy coords V0 < V1 < ... in canonical order.
        (0..n)
            .map(|i| Coord::entropy([node(&format!("V{i}"))]))
            .collect()
    }

    fn sys(n: usize, ineqs: &[(&[i64], i64)], eqs: &[(&[i64], i64)]) -> LinIneqSystem {
        let mut s = LinIneqSystem::new(coords(n)).unwrap();
        for (c, b) in ineqs {
            s.add_ineq(c.iter().map(|&x| BigInt::from(x)).collect(), BigInt::from(*b));
        }
        for (c, b) in eqs {
            s.add_eq(c.iter().map(|&x| BigInt::from(x)).collect(), BigInt::from(*b));
        }
        s
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn feasibility_of_interval_and_empty_interval() {
        let good = sys(1, &[(&[1], 0), (&[-1], -1)], &[]);
        assert!(feasible(&good));
        let bad = sys(1, &[(&[1], 1), (&[-1], 0)], &[]);
        assert!(!feasible(&bad));
    }

    #[test]
    fn minimize_over_halfline() {
        let s = sys(1, &[(&[2], 3)], &[]);
        match minimize(&s, &[rat(1, 1)]) {
            LpOutcome::Optimal(v, p) => {
                assert_eq!(v, rat(3, 2));
                assert_eq!(p, vec![rat(3, 2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(maximize(&s, &[rat(1, 1)]), LpOutcome::Unbounded);
    }

    #[test]
    fn minimize_sum_over_shifted_quadrant() {
        let s = sys(2, &[(&[1, 0], 0), (&[0, 1], 0), (&[1, 1], 2)], &[]);
        match minimize(&s, &[rat(1, 1), rat(1, 1)]) {
            LpOutcome::Optimal(v, p) => {
                assert_eq!(v, rat(2, 1));
                assert!(s.satisfied_by(&p));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn equalities_pin_values() {
        let s = sys(2, &[(&[0, 1], 0)], &[(&[3, 0], 2)]);
        match minimize(&s, &[rat(1, 1), rat(0, 1)]) {
            LpOutcome::Optimal(v, _) => assert_eq!(v, rat(2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match maximize(&s, &[rat(1, 1), rat(0, 1)]) {
            LpOutcome::Optimal(v, _) => assert_eq!(v, rat(2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn implication_tests() {
        let quadrant = sys(2, &[(&[1, 0], 0), (&[0, 1], 0)], &[]);
        let holds = Row::new(vec![BigInt::one(), BigInt::one()], BigInt::zero());
        let fails = Row::new(vec![BigInt::one(), BigInt::zero()], BigInt::one());
        assert!(implies_ineq(&quadrant, &holds));
        assert!(!implies_ineq(&quadrant, &fails));
        let line = sys(2, &[], &[(&[1, -1], 0)]);
        let eq_row = Row::new(vec![BigInt::from(2), BigInt::from(-2)], BigInt::zero());
        assert!(implies_eq(&line, &eq_row));
        assert!(!implies_eq(&quadrant, &eq_row));
    }

    #[test]
    fn infeasible_system_implies_everything() {
        let bad = sys(1, &[(&[1], 1), (&[-1], 0)], &[]);
        let anything = Row::new(vec![BigInt::from(-5)], BigInt::from(7));
        assert!(implies_ineq(&bad, &anything));
    }

    #[test]
    fn empty_system_is_all_of_space() {
        let s = sys(2, &[], &[]);
        assert!(feasible(&s));
        assert_eq!(minimize(&s, &[rat(1, 1), rat(0, 1)]), LpOutcome::Unbounded);
    }

    #[test]
    fn equivalence_of_scaled_systems() {
        let a = sys(2, &[(&[1, 0], 0), (&[0, 1], 0)], &[]);
        let b = sys(2, &[(&[0, 3], 0), (&[2, 0], 0), (&[1, 1], 0)], &[]);
        assert!(equivalent(&a, &b).unwrap());
        let c = sys(2, &[(&[1, 0], 0)], &[]);
        assert!(!equivalent(&a, &c).unwrap());
    }

    #[test]
    fn feasible_point_satisfies_system() {
        let s = sys(
            3,
            &[(&[1, 2, -1], 4), (&[-1, 1, 0], -10), (&[0, 0, 1], -2)],
            &[(&[1, 1, 1], 5)],
        );
        let p = feasible_point(&s).unwrap();
        assert!(s.satisfied_by(&p));
    }

    #[test]
    fn nonneg_combination_membership() {
        let cols = vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(1, 1), rat(1, 1)],
        ];
        assert!(nonneg_combination_exists(&cols, &[rat(2, 1), rat(1, 1)]));
        assert!(nonneg_combination_exists(&cols, &[rat(0, 1), rat(0, 1)]));
        assert!(!nonneg_combination_exists(&cols, &[rat(0, 1), rat(1, 1)]));
        assert!(!nonneg_combination_exists(&cols, &[rat(-1, 1), rat(0, 1)]));
    }

    #[test]
    fn degenerate_ties_terminate() {
        // Highly degenerate: many constraints active at the optimum.
        let s = sys(
            2,
            &[
                (&[1, 0], 0),
                (&[0, 1], 0),
                (&[1, 1], 0),
                (&[2, 1], 0),
                (&[1, 2], 0),
                (&[-1, -1], -1),
            ],
            &[],
        );
        match minimize(&s, &[rat(1, 1), rat(1, 1)]) {
            LpOutcome::Optimal(v, _) => assert_eq!(v, rat(0, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
