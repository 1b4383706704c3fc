//! LP-certified redundancy removal.
//!
//! The pipeline is: echelon the equalities and reduce every inequality modulo
//! them, promote implicit equalities (inequalities whose reverse is also
//! valid), then drop each inequality implied by the others. The implication
//! tests run in multiplier space: a row of a feasible system follows from the
//! rest exactly when it is a nonnegative combination of them plus a free
//! combination of the equalities, so each LP has one constraint per
//! coordinate rather than per row, and certified-redundant rows leave the
//! pool immediately.

use super::lp::{self, LpOutcome};
use super::{LinIneqSystem, Row};
use crate::{Error, Result};
use num::{BigInt, BigRational, One, Signed, Zero};

/// Output of [`lp_remove_redundant`]: the pruned system and whether the input
/// was satisfiable at all. Unsatisfiable inputs collapse to the canonical
/// `0 >= 1` system.
#[derive(Debug, Clone)]
pub struct PruneResult {
    /// Equivalent system with no redundant rows.
    pub system: LinIneqSystem,
    /// False when the input had no solutions.
    pub feasible: bool,
}

/// Reduced row echelon form of the equality rows. Returns the canonical rows
/// with their pivot columns, or `None` on an inconsistent subsystem.
fn echelon(eqs: &[Row], width: usize) -> Option<(Vec<Row>, Vec<usize>)> {
    let mut rows: Vec<(Vec<BigRational>, BigRational)> = eqs
        .iter()
        .map(|r| {
            (
                r.coeffs
                    .iter()
                    .map(|c| BigRational::from_integer(c.clone()))
                    .collect(),
                BigRational::from_integer(r.rhs.clone()),
            )
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut done = 0;
    for col in 0..width {
        let Some(pick) = (done..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
            continue;
        };
        rows.swap(done, pick);
        let inv = rows[done].0[col].recip();
        for v in &mut rows[done].0 {
            *v *= &inv;
        }
        rows[done].1 *= &inv;
        for i in 0..rows.len() {
            if i == done || rows[i].0[col].is_zero() {
                continue;
            }
            let f = rows[i].0[col].clone();
            for j in 0..width {
                let delta = &f * &rows[done].0[j];
                rows[i].0[j] -= delta;
            }
            let delta = &f * &rows[done].1;
            rows[i].1 -= delta;
        }
        pivots.push(col);
        done += 1;
    }
    if rows[done..].iter().any(|(_, b)| !b.is_zero()) {
        return None;
    }
    let out = rows[..done]
        .iter()
        .map(|(c, b)| Row::from_rationals(c, b))
        .collect();
    Some((out, pivots))
}

/// Eliminates the pivot columns of `eqs` from `row`, preserving direction.
fn reduce_modulo(row: &Row, eqs: &[Row], pivots: &[usize]) -> Row {
    let mut cur = row.clone();
    for (eq, &col) in eqs.iter().zip(pivots) {
        if cur.coeffs[col].is_zero() {
            continue;
        }
        // Pivot coefficients are positive, so scaling by them keeps the
        // inequality's direction.
        debug_assert!(eq.coeffs[col].is_positive());
        let (p, f) = (eq.coeffs[col].clone(), cur.coeffs[col].clone());
        for (c, e) in cur.coeffs.iter_mut().zip(&eq.coeffs) {
            *c = &*c * &p - &f * e;
        }
        cur.rhs = &cur.rhs * &p - &f * &eq.rhs;
    }
    Row::new(cur.coeffs, cur.rhs)
}

/// Whether `pool[skip]` follows from the remaining pool rows and the
/// equalities. Uses the Farkas certificate for a feasible system: implied
/// rows are exactly the nonnegative combinations of the other inequalities
/// plus free multiples of the equalities, with combined rhs at least the
/// target rhs. The multiplier LP has one equality per coordinate in use.
fn implied_by_rest(pool: &[Row], skip: usize, eqs: &[Row], width: usize) -> bool {
    let target = &pool[skip];
    let lambdas: Vec<usize> = (0..pool.len()).filter(|&i| i != skip).collect();
    let nvars = lambdas.len() + 2 * eqs.len();
    let rat = |c: &BigInt| BigRational::from_integer(c.clone());
    let used: Vec<usize> = (0..width)
        .filter(|&c| {
            !target.coeffs[c].is_zero()
                || lambdas.iter().any(|&i| !pool[i].coeffs[c].is_zero())
                || eqs.iter().any(|e| !e.coeffs[c].is_zero())
        })
        .collect();
    let fill = |take: &dyn Fn(&Row) -> BigInt| -> Vec<BigRational> {
        let mut v = Vec::with_capacity(nvars);
        for &i in &lambdas {
            v.push(rat(&take(&pool[i])));
        }
        for e in eqs {
            let x = rat(&take(e));
            v.push(x.clone());
            v.push(-x);
        }
        v
    };
    let eq_rows: Vec<(Vec<BigRational>, BigRational)> = used
        .iter()
        .map(|&c| (fill(&|r: &Row| r.coeffs[c].clone()), rat(&target.coeffs[c])))
        .collect();
    let ineq_rows = vec![(fill(&|r: &Row| r.rhs.clone()), rat(&target.rhs))];
    let zero = vec![BigRational::zero(); nvars];
    !matches!(
        lp::solve_raw(&ineq_rows, &eq_rows, &zero, true),
        LpOutcome::Infeasible
    )
}

/// Maximal uniform slack: maximize `t <= 1` with every inequality shifted by
/// `t`. Returns `None` when infeasible, else the optimum and its point.
fn interior_probe(sys: &LinIneqSystem) -> Option<(BigRational, Vec<BigRational>)> {
    let n = sys.coords().len();
    let ext = |r: &Row, t_coeff: i64| -> (Vec<BigRational>, BigRational) {
        let mut v: Vec<BigRational> = r
            .coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        v.push(BigRational::from_integer(BigInt::from(t_coeff)));
        (v, BigRational::from_integer(r.rhs.clone()))
    };
    let mut ineqs: Vec<(Vec<BigRational>, BigRational)> =
        sys.ineqs().iter().map(|r| ext(r, -1)).collect();
    let mut cap = vec![BigRational::zero(); n + 1];
    cap[n] = -BigRational::one();
    ineqs.push((cap, -BigRational::one()));
    let eqs: Vec<(Vec<BigRational>, BigRational)> = sys.eqs().iter().map(|r| ext(r, 0)).collect();
    let mut obj = vec![BigRational::zero(); n + 1];
    obj[n] = -BigRational::one();
    match lp::solve_raw(&ineqs, &eqs, &obj, false) {
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("slack objective is capped"),
        LpOutcome::Optimal(v, mut p) => {
            p.truncate(n);
            Some((-v, p))
        }
    }
}

/// Removes every row implied by the rest, promotes implicit equalities, and
/// reports infeasibility. The result has the same solution set as the input.
pub fn lp_remove_redundant(sys: &LinIneqSystem) -> PruneResult {
    let width = sys.coords().len();
    let infeasible = || {
        let mut out = LinIneqSystem::new(sys.coords().to_vec()).expect("coords were valid");
        out.mark_infeasible();
        PruneResult {
            system: out,
            feasible: false,
        }
    };

    let mut eq_rows: Vec<Row> = sys.eqs().to_vec();
    let mut ineq_rows: Vec<Row> = sys.ineqs().to_vec();
    loop {
        // Quotient by the equalities and drop degenerate rows.
        let Some((eqs, pivots)) = echelon(&eq_rows, width) else {
            return infeasible();
        };
        let mut reduced: Vec<Row> = Vec::with_capacity(ineq_rows.len());
        for r in &ineq_rows {
            let r = reduce_modulo(r, &eqs, &pivots);
            if r.is_zero_coeffs() {
                if r.rhs.is_positive() {
                    return infeasible();
                }
                continue;
            }
            reduced.push(r);
        }
        reduced.sort();
        reduced.dedup();
        eq_rows = eqs;
        ineq_rows = reduced;

        let mut probe = LinIneqSystem::new(sys.coords().to_vec()).expect("coords were valid");
        probe.set_rows(ineq_rows.clone(), eq_rows.clone());
        let Some((slack, point)) = interior_probe(&probe) else {
            return infeasible();
        };
        if slack.is_negative() {
            // The shifted system only closes with t < 0: no feasible point.
            return infeasible();
        }
        if slack.is_positive() {
            break;
        }
        // Zero slack: some inequality is an implicit equality. Candidates are
        // the rows tight at the probe point.
        let tight: Vec<usize> = (0..ineq_rows.len())
            .filter(|&k| {
                let r = &ineq_rows[k];
                r.eval(&point) == BigRational::from_integer(r.rhs.clone())
            })
            .collect();
        let confirmed: Vec<usize> = tight
            .into_iter()
            .filter(|&k| match lp::maximize(&probe, &to_objective(&ineq_rows[k])) {
                LpOutcome::Optimal(v, _) => {
                    v == BigRational::from_integer(ineq_rows[k].rhs.clone())
                }
                _ => false,
            })
            .collect();
        debug_assert!(!confirmed.is_empty(), "zero slack without implicit equality");
        for &k in confirmed.iter().rev() {
            let row = ineq_rows.remove(k);
            eq_rows.push(row);
        }
    }

    // Facet sieve: drop each row expressible from the others. Deletions only
    // remove implied rows, so the surviving facet set is order-independent.
    let mut k = 0;
    while k < ineq_rows.len() {
        if implied_by_rest(&ineq_rows, k, &eq_rows, width) {
            ineq_rows.remove(k);
        } else {
            k += 1;
        }
    }

    let mut out = LinIneqSystem::new(sys.coords().to_vec()).expect("coords were valid");
    out.set_rows(ineq_rows, eq_rows);
    out.canonicalize();
    PruneResult {
        system: out,
        feasible: true,
    }
}

fn to_objective(row: &Row) -> Vec<BigRational> {
    row.coeffs
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect()
}

/// Intersection of finitely many systems over identical coordinates:
/// concatenate rows, then prune.
pub fn intersect(systems: &[LinIneqSystem]) -> Result<PruneResult> {
    let first = systems
        .first()
        .ok_or_else(|| Error::InvalidInput("intersection of no systems".into()))?;
    let mut all = first.clone();
    for s in &systems[1..] {
        if s.coords() != first.coords() {
            return Err(Error::InvalidInput(
                "systems intersect only over identical coordinates".into(),
            ));
        }
        for r in s.ineqs() {
            all.add_ineq(r.coeffs.clone(), r.rhs.clone());
        }
        for r in s.eqs() {
            all.add_eq(r.coeffs.clone(), r.rhs.clone());
        }
    }
    Ok(lp_remove_redundant(&all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::Coord;
    use crate::vars::node;

    fn coords(n: usize) -> Vec<Coord> {
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

    #[test]
    fn dominated_row_is_dropped() {
        let s = sys(1, &[(&[1], 0), (&[1], -1)], &[]);
        let out = lp_remove_redundant(&s);
        assert!(out.feasible);
        assert_eq!(out.system.ineqs().len(), 1);
        assert_eq!(out.system.ineqs()[0].rhs, BigInt::zero());
    }

    #[test]
    fn opposite_rows_promote_to_equality() {
        let s = sys(1, &[(&[1], 0), (&[-1], 0)], &[]);
        let out = lp_remove_redundant(&s);
        assert!(out.feasible);
        assert!(out.system.ineqs().is_empty());
        assert_eq!(out.system.eqs().len(), 1);
        assert_eq!(out.system.eqs()[0].coeffs, vec![BigInt::one()]);
        assert_eq!(out.system.eqs()[0].rhs, BigInt::zero());
    }

    #[test]
    fn nonnegative_combination_is_redundant() {
        // x + y >= 0 follows from the two axes.
        let s = sys(2, &[(&[1, 0], 0), (&[0, 1], 0), (&[1, 1], 0)], &[]);
        let out = lp_remove_redundant(&s);
        assert_eq!(out.system.ineqs().len(), 2);
    }

    #[test]
    fn infeasible_input_collapses() {
        let s = sys(1, &[(&[1], 1), (&[-1], 0)], &[]);
        let out = lp_remove_redundant(&s);
        assert!(!out.feasible);
        assert!(out.system.is_trivially_infeasible());
        let contradictory_eqs = sys(1, &[], &[(&[1], 1), (&[1], 2)]);
        assert!(!lp_remove_redundant(&contradictory_eqs).feasible);
    }

    #[test]
    fn equalities_substitute_into_inequalities() {
        // x = y, x >= 3, y >= 5 collapses to the single bound y >= 5.
        let s = sys(2, &[(&[1, 0], 3), (&[0, 1], 5)], &[(&[1, -1], 0)]);
        let out = lp_remove_redundant(&s);
        assert!(out.feasible);
        assert_eq!(out.system.eqs().len(), 1);
        assert_eq!(out.system.ineqs().len(), 1);
        assert_eq!(out.system.ineqs()[0].rhs, BigInt::from(5));
    }

    #[test]
    fn implicit_equality_face_is_found() {
        // The triangle x,y >= 0, x+y >= 1, -(x+y) >= -1 is the segment x+y=1.
        let s = sys(
            2,
            &[(&[1, 0], 0), (&[0, 1], 0), (&[1, 1], 1), (&[-1, -1], -1)],
            &[],
        );
        let out = lp_remove_redundant(&s);
        assert!(out.feasible);
        assert_eq!(out.system.eqs().len(), 1);
        assert_eq!(out.system.ineqs().len(), 2, "segment has two endpoints");
    }

    #[test]
    fn pruning_preserves_membership() {
        let s = sys(
            2,
            &[
                (&[1, 0], 0),
                (&[0, 1], 0),
                (&[1, 1], 0),
                (&[2, 3], -1),
                (&[-1, -1], -10),
                (&[-2, -2], -20),
            ],
            &[],
        );
        let out = lp_remove_redundant(&s);
        let probes = [
            [BigRational::zero(), BigRational::zero()],
            [BigRational::one(), BigRational::one()],
            [BigRational::from_integer(7.into()), BigRational::from_integer(4.into())],
            [-BigRational::one(), BigRational::zero()],
            [BigRational::from_integer(20.into()), BigRational::zero()],
        ];
        for p in &probes {
            assert_eq!(s.satisfied_by(p), out.system.satisfied_by(p), "at {p:?}");
        }
    }

    #[test]
    fn intersect_with_itself_is_identity() {
        let s = sys(2, &[(&[1, 0], 0), (&[0, 1], 0)], &[]);
        let out = intersect(&[s.clone(), s.clone()]).unwrap();
        assert!(out.feasible);
        let mut expect = s;
        expect.canonicalize();
        assert_eq!(out.system, expect);
    }

    #[test]
    fn intersect_rejects_mismatched_coords() {
        let a = sys(2, &[(&[1, 0], 0)], &[]);
        let mut b = LinIneqSystem::new(coords(3)).unwrap();
        b.add_ineq(vec![BigInt::one(), BigInt::zero(), BigInt::zero()], BigInt::zero());
        assert!(intersect(&[a, b]).is_err());
    }
}
