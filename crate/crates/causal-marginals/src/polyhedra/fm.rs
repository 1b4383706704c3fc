//! Fourier-Motzkin projection with exact redundancy control.
//!
//! Equalities are always consumed first by Gaussian substitution (each one
//! eliminates a variable at linear cost), and opposite inequality pairs are
//! promoted to equalities between rounds so later rounds can substitute too.
//! Only then are strict-sign pairs combined, with Imbert's derivation-count
//! bound, Chernikov's ancestor-set deletion rule, syntactic deduplication,
//! and threshold-triggered LP pruning holding the row growth down. The final
//! system is always LP-pruned.

use super::redundancy::lp_remove_redundant;
use super::{Coord, LinIneqSystem, Row};
use crate::{par, Error, Result};
use num::{BigInt, Signed, Zero};
use std::collections::{BTreeSet, HashMap};

/// Tuning knobs for [`fm_eliminate_with`].
#[derive(Debug, Clone)]
pub struct FmOptions {
    /// Row count above which a full LP prune runs between elimination rounds.
    pub lp_prune_threshold: usize,
}

impl Default for FmOptions {
    fn default() -> Self {
        FmOptions {
            lp_prune_threshold: 2000,
        }
    }
}

/// Derivation history as a bitset over the rows at the last rebase.
type Hist = Vec<u64>;

fn hist_singleton(words: usize, i: usize) -> Hist {
    let mut h = vec![0u64; words];
    h[i / 64] |= 1 << (i % 64);
    h
}

fn hist_union(a: &Hist, b: &Hist) -> Hist {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

fn hist_count(h: &Hist) -> u32 {
    h.iter().map(|w| w.count_ones()).sum()
}

fn hist_subset(a: &Hist, b: &Hist) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn hist_intersection_count(a: &Hist, b: &Hist) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

struct WorkRow {
    row: Row,
    hist: Hist,
    /// Union of ancestor coefficient supports, as a bitset over columns.
    sup: Hist,
}

fn support_mask(row: &Row, words: usize) -> Hist {
    let mut m = vec![0u64; words];
    for (i, c) in row.coeffs.iter().enumerate() {
        if !c.is_zero() {
            m[i / 64] |= 1 << (i % 64);
        }
    }
    m
}

enum StepOutcome {
    Progress,
    Infeasible,
}

struct Eliminator {
    ineqs: Vec<WorkRow>,
    eqs: Vec<Row>,
    /// Coordinate columns still to eliminate.
    remaining: BTreeSet<usize>,
    /// Columns eliminated by pair combination since the last history rebase.
    elim_mask: Hist,
    col_words: usize,
}

impl Eliminator {
    fn rebase(&mut self) {
        let words = self.ineqs.len().div_ceil(64).max(1);
        for (i, wr) in self.ineqs.iter_mut().enumerate() {
            wr.hist = hist_singleton(words, i);
            wr.sup = support_mask(&wr.row, self.col_words);
        }
        self.elim_mask = vec![0u64; self.col_words];
    }

    /// Substitutes equalities into every row until none touches a dropped
    /// coordinate. Returns false on a detected contradiction.
    fn substitute_equalities(&mut self) -> Option<bool> {
        let mut used_any = false;
        loop {
            let Some((ei, col)) = self.eqs.iter().enumerate().find_map(|(i, e)| {
                self.remaining
                    .iter()
                    .find(|&&d| !e.coeffs[d].is_zero())
                    .map(|&d| (i, d))
            }) else {
                return Some(used_any);
            };
            used_any = true;
            let eq = self.eqs.swap_remove(ei);
            self.remaining.remove(&col);
            let p = eq.coeffs[col].abs();
            let combine = |r: &Row| -> Row {
                if r.coeffs[col].is_zero() {
                    return r.clone();
                }
                // Scale the target row by |eq[col]| (direction-preserving)
                // and cancel the column with the equality.
                let f = if eq.coeffs[col].is_positive() {
                    r.coeffs[col].clone()
                } else {
                    -&r.coeffs[col]
                };
                let coeffs = r
                    .coeffs
                    .iter()
                    .zip(&eq.coeffs)
                    .map(|(c, e)| c * &p - &f * e)
                    .collect();
                Row::new(coeffs, &r.rhs * &p - &f * &eq.rhs)
            };
            let mut next_ineqs = Vec::with_capacity(self.ineqs.len());
            for wr in &self.ineqs {
                let row = combine(&wr.row);
                if row.is_zero_coeffs() {
                    if row.rhs.is_positive() {
                        return None;
                    }
                    continue;
                }
                next_ineqs.push(WorkRow {
                    row,
                    hist: wr.hist.clone(),
                    sup: wr.sup.clone(),
                });
            }
            self.ineqs = next_ineqs;
            let mut next_eqs = Vec::with_capacity(self.eqs.len());
            for e in &self.eqs {
                let row = combine(e);
                if row.is_zero_coeffs() {
                    if !row.rhs.is_zero() {
                        return None;
                    }
                    continue;
                }
                next_eqs.push(row);
            }
            self.eqs = next_eqs;
        }
    }

    /// Moves opposite inequality pairs `a.x >= b`, `-a.x >= -b` into the
    /// equality list. Returns how many pairs were promoted.
    fn promote_opposites(&mut self) -> usize {
        let mut index: HashMap<Row, usize> = HashMap::new();
        for (i, wr) in self.ineqs.iter().enumerate() {
            index.entry(wr.row.clone()).or_insert(i);
        }
        let mut dead: BTreeSet<usize> = BTreeSet::new();
        let mut promoted = 0;
        for (i, wr) in self.ineqs.iter().enumerate() {
            if dead.contains(&i) {
                continue;
            }
            if let Some(&j) = index.get(&wr.row.negated()) {
                if j != i && !dead.contains(&j) {
                    dead.insert(i);
                    dead.insert(j);
                    let mut eq = wr.row.clone();
                    eq.sign_normalize();
                    self.eqs.push(eq);
                    promoted += 1;
                }
            }
        }
        if promoted > 0 {
            let mut k = 0;
            self.ineqs.retain(|_| {
                let keep = !dead.contains(&k);
                k += 1;
                keep
            });
            self.eqs.sort();
            self.eqs.dedup();
        }
        promoted
    }

    /// One pair-combination elimination of the cheapest remaining coordinate.
    fn eliminate_round(&mut self) -> StepOutcome {
        let col = *self
            .remaining
            .iter()
            .min_by_key(|&&d| {
                let pos = self.ineqs.iter().filter(|w| w.row.coeffs[d].is_positive()).count();
                let neg = self.ineqs.iter().filter(|w| w.row.coeffs[d].is_negative()).count();
                (pos * neg, d)
            })
            .expect("called with work left");
        self.remaining.remove(&col);
        self.elim_mask[col / 64] |= 1 << (col % 64);

        let (mut keep, pos, neg): (Vec<WorkRow>, Vec<WorkRow>, Vec<WorkRow>) = {
            let (mut k, mut p, mut n) = (Vec::new(), Vec::new(), Vec::new());
            for wr in self.ineqs.drain(..) {
                match wr.row.coeffs[col].sign() {
                    num::bigint::Sign::NoSign => k.push(wr),
                    num::bigint::Sign::Plus => p.push(wr),
                    num::bigint::Sign::Minus => n.push(wr),
                }
            }
            (k, p, n)
        };

        let elim = &self.elim_mask;
        let combos: Vec<(Row, Hist, Hist)> = par::flat_map_vec(&pos, |pw| {
            let mut out = Vec::with_capacity(neg.len());
            for nw in &neg {
                let hist = hist_union(&pw.hist, &nw.hist);
                let sup = hist_union(&pw.sup, &nw.sup);
                // Imbert's bound: an irredundant row combines at most one
                // more ancestor than it has eliminated columns in them.
                if hist_count(&hist) > 1 + hist_intersection_count(&sup, elim) {
                    continue;
                }
                let (a, b) = (&pw.row, &nw.row);
                let (pa, nb) = (a.coeffs[col].clone(), -&b.coeffs[col]);
                let coeffs: Vec<BigInt> = a
                    .coeffs
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(x, y)| x * &nb + y * &pa)
                    .collect();
                let row = Row::new(coeffs, &a.rhs * &nb + &b.rhs * &pa);
                out.push((row, hist, sup));
            }
            out
        });

        let mut seen: HashMap<Row, usize> = HashMap::new();
        for wr in &keep {
            seen.entry(wr.row.clone()).or_insert(usize::MAX);
        }
        for (row, hist, sup) in combos {
            if row.is_zero_coeffs() {
                if row.rhs.is_positive() {
                    return StepOutcome::Infeasible;
                }
                continue;
            }
            match seen.get(&row) {
                Some(&usize::MAX) => {}
                Some(&at) => {
                    // Keep the sparser derivation history for later drops.
                    if hist_count(&hist) < hist_count(&keep[at].hist) {
                        keep[at].hist = hist;
                        keep[at].sup = sup;
                    }
                }
                None => {
                    seen.insert(row.clone(), keep.len());
                    keep.push(WorkRow { row, hist, sup });
                }
            }
        }
        self.ineqs = keep;
        self.drop_dominated();
        StepOutcome::Progress
    }

    /// Chernikov's deletion rule: a row whose ancestor set strictly contains
    /// another current row's ancestor set is redundant.
    fn drop_dominated(&mut self) {
        let n = self.ineqs.len();
        let counts: Vec<u32> = self.ineqs.iter().map(|w| hist_count(&w.hist)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| counts[i]);
        let mut dead = vec![false; n];
        for (a, &i) in order.iter().enumerate() {
            if dead[i] {
                continue;
            }
            for &j in &order[a + 1..] {
                if dead[j] || counts[j] == counts[i] {
                    continue;
                }
                if hist_subset(&self.ineqs[i].hist, &self.ineqs[j].hist) {
                    dead[j] = true;
                }
            }
        }
        if dead.iter().any(|&d| d) {
            let mut k = 0;
            self.ineqs.retain(|_| {
                let keep = !dead[k];
                k += 1;
                keep
            });
        }
    }
}

/// Projects the system onto the complement of `drop` using default options.
pub fn fm_eliminate(sys: &LinIneqSystem, drop: &[Coord]) -> Result<LinIneqSystem> {
    fm_eliminate_with(sys, drop, &FmOptions::default())
}

/// Projects the system onto the complement of `drop`.
pub fn fm_eliminate_with(
    sys: &LinIneqSystem,
    drop: &[Coord],
    opts: &FmOptions,
) -> Result<LinIneqSystem> {
    let mut remaining: BTreeSet<usize> = BTreeSet::new();
    for c in drop {
        let i = sys
            .coord_index(c)
            .ok_or_else(|| Error::InvalidInput(format!("cannot drop unknown coordinate {c}")))?;
        remaining.insert(i);
    }
    let kept: Vec<usize> = (0..sys.coords().len())
        .filter(|i| !remaining.contains(i))
        .collect();
    let finish = |ineqs: Vec<WorkRow>, eqs: Vec<Row>| -> LinIneqSystem {
        let mut full = LinIneqSystem::new(sys.coords().to_vec()).expect("coords were valid");
        full.set_rows(ineqs.into_iter().map(|w| w.row).collect(), eqs);
        let pruned = lp_remove_redundant(&full);
        let mut out = pruned.system.restricted_to(&kept);
        out.canonicalize();
        out
    };
    let infeasible_out = || {
        let mut out = LinIneqSystem::new(kept.iter().map(|&i| sys.coords()[i].clone()).collect())
            .expect("coords were valid");
        out.mark_infeasible();
        out
    };

    let col_words = sys.coords().len().div_ceil(64).max(1);
    let mut st = Eliminator {
        ineqs: sys
            .ineqs()
            .iter()
            .map(|r| WorkRow {
                row: r.clone(),
                hist: Vec::new(),
                sup: Vec::new(),
            })
            .collect(),
        eqs: sys.eqs().to_vec(),
        remaining,
        elim_mask: Vec::new(),
        col_words,
    };
    st.rebase();

    loop {
        match st.substitute_equalities() {
            None => return Ok(infeasible_out()),
            Some(true) => st.rebase(),
            Some(false) => {}
        }
        if st.remaining.is_empty() {
            break;
        }
        if st.promote_opposites() > 0 {
            // New equalities may free up cheap substitutions.
            continue;
        }
        if let StepOutcome::Infeasible = st.eliminate_round() {
            return Ok(infeasible_out());
        }
        if st.ineqs.len() > opts.lp_prune_threshold {
            let mut full =
                LinIneqSystem::new(sys.coords().to_vec()).expect("coords were valid");
            full.set_rows(
                st.ineqs.iter().map(|w| w.row.clone()).collect(),
                st.eqs.clone(),
            );
            let pruned = lp_remove_redundant(&full);
            if !pruned.feasible {
                return Ok(infeasible_out());
            }
            st.ineqs = pruned
                .system
                .ineqs()
                .iter()
                .map(|r| WorkRow {
                    row: r.clone(),
                    hist: Vec::new(),
                    sup: Vec::new(),
                })
                .collect();
            st.eqs = pruned.system.eqs().to_vec();
            st.rebase();
        }
    }

    Ok(finish(st.ineqs, st.eqs))
}
