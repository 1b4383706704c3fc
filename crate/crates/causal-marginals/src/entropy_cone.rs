//! Entropy-space systems: the cone cut out by the elemental polymatroid
//! inequalities, conditional-independence hyperplanes, clique-local
//! embeddings, and the coordinate sets a marginal scenario can see.
//!
//! Coordinates are the subset entropies H(S) of a variable universe,
//! including H() pinned to zero by an explicit equality, so a system over n
//! variables has 2^n coordinates. Marginal coordinate sets drop the empty
//! set. Entropies are in bits; float evaluation of a system happens here
//! (with a pinned tolerance) and nowhere else.

use crate::causal::CiSet;
use crate::distributions::EntropyVector;
use crate::hypergraph::Hypergraph;
use crate::polyhedra::{Coord, LinIneqSystem, Row};
use crate::vars::{Mask, NodeId, Universe};
use crate::{Error, Result};
use num::BigInt;

/// Relative tolerance for float evaluation of exact systems.
pub const FLOAT_TOL: f64 = 1e-9;

/// All 2^n subset-entropy coordinates of a universe, including `H()`.
pub fn entropy_coords(u: &Universe) -> Vec<Coord> {
    crate::vars::subsets_of(u.full_mask())
        .into_iter()
        .map(|m| coord_of(u, m))
        .collect()
}

/// The coordinate `H(S)` for a subset mask.
pub fn coord_of(u: &Universe, mask: Mask) -> Coord {
    Coord::entropy(u.set_of(mask))
}

/// Key of an elemental submodularity row: unordered variable pair indices
/// plus the conditioning mask.
type ElementalKey = (usize, usize, Mask);

fn elemental_key(i: usize, j: usize, cond: Mask) -> ElementalKey {
    (i.min(j), i.max(j), cond)
}

fn add_terms(sys: &mut LinIneqSystem, u: &Universe, terms: &[(Mask, i64)], eq: bool) {
    let mut coeffs = vec![BigInt::from(0); sys.coords().len()];
    for &(mask, c) in terms {
        let idx = sys
            .coord_index(&coord_of(u, mask))
            .expect("entropy coordinate present by construction");
        coeffs[idx] += BigInt::from(c);
    }
    if eq {
        sys.add_eq(coeffs, BigInt::from(0));
    } else {
        sys.add_ineq(coeffs, BigInt::from(0));
    }
}

/// Shannon cone rows restricted to subsets of `scope`, written over the
/// full coordinate set of `u`. Skips the elemental keys in `dropped`.
fn shannon_rows_into(
    sys: &mut LinIneqSystem,
    u: &Universe,
    scope: Mask,
    dropped: &std::collections::HashSet<ElementalKey>,
) {
    add_terms(sys, u, &[(0, 1)], true);
    let members: Vec<usize> = (0..u.len()).filter(|&i| scope >> i & 1 == 1).collect();
    for &i in &members {
        let bit = 1u64 << i;
        add_terms(sys, u, &[(scope, 1), (scope & !bit, -1)], false);
    }
    for (pi, &i) in members.iter().enumerate() {
        for &j in &members[pi + 1..] {
            let (bi, bj) = (1u64 << i, 1u64 << j);
            let rest = scope & !(bi | bj);
            for s in crate::vars::subsets_of(rest) {
                if dropped.contains(&elemental_key(i, j, s)) {
                    continue;
                }
                add_terms(
                    sys,
                    u,
                    &[(s | bi, 1), (s | bj, 1), (s | bi | bj, -1), (s, -1)],
                    false,
                );
            }
        }
    }
    sys.canonicalize();
}

/// The elemental inequalities of n variables plus the `H() = 0` equality:
/// n monotonicity rows against the full set and 2^{n-2}*C(n,2)
/// submodularity rows.
pub fn shannon_cone(u: &Universe) -> LinIneqSystem {
    let mut sys = LinIneqSystem::new(entropy_coords(u)).expect("subset coords are distinct");
    shannon_rows_into(&mut sys, u, u.full_mask(), &Default::default());
    sys
}

/// Translates a statement's masks from its own universe into `u`.
fn translate_mask(from: &Universe, to: &Universe, mask: Mask) -> Result<Mask> {
    let mut out = 0u64;
    for n in from.iter_mask(mask) {
        let idx = to
            .index_of(n)
            .ok_or_else(|| Error::InvalidInput(format!("variable {n} not in this space")))?;
        out |= 1 << idx;
    }
    Ok(out)
}

/// The equality rows `I(A:B|C) = 0` for every statement, over the
/// coordinates of `sys`. With empty C the three-term form
/// `H(A) + H(B) - H(AB) = 0` is used (H() is pinned elsewhere).
pub fn ci_hyperplanes(ci: &CiSet, sys: &LinIneqSystem) -> Result<Vec<Row>> {
    let u = ci.universe();
    let mut rows = Vec::with_capacity(ci.len());
    for s in ci.iter() {
        let (a, b, c) = (s.a(), s.b(), s.c());
        let mut terms: Vec<(Vec<NodeId>, i64)> = vec![
            (u.set_of(a | c), 1),
            (u.set_of(b | c), 1),
            (u.set_of(a | b | c), -1),
        ];
        if c != 0 {
            terms.push((u.set_of(c), -1));
        }
        let mut coeffs = vec![BigInt::from(0); sys.coords().len()];
        for (labels, w) in terms {
            let coord = Coord::entropy(labels);
            let idx = sys.coord_index(&coord).ok_or_else(|| {
                Error::InvalidInput(format!("coordinate {coord} not in the system"))
            })?;
            coeffs[idx] += BigInt::from(w);
        }
        rows.push(Row::new(coeffs, BigInt::from(0)));
    }
    Ok(rows)
}

/// A copy of `sys` with the CI hyperplanes appended as equalities.
pub fn with_ci(sys: &LinIneqSystem, ci: &CiSet) -> Result<LinIneqSystem> {
    let rows = ci_hyperplanes(ci, sys)?;
    let mut out = sys.clone();
    for r in rows {
        out.add_eq(r.coeffs, r.rhs);
    }
    out.canonicalize();
    Ok(out)
}

/// Shannon cone with the elemental rows made redundant by the CI
/// statements removed. Together with [`ci_hyperplanes`] the solution set is
/// unchanged.
///
/// For a statement (A indep B | C) with singleton A = {a}, the row
/// I(a:e|BC) >= 0 is implied by I(a:e|C) >= 0 and I(a:B|eC) >= 0 once
/// I(a:B|C) = 0 holds (chain rule both ways); symmetrically for singleton
/// B. A drop is skipped if any row of its justification was itself already
/// dropped, so every removal stays certified.
pub fn reduced_shannon_cone(u: &Universe, ci: &CiSet) -> Result<LinIneqSystem> {
    let cu = ci.universe();
    let mut dropped: std::collections::HashSet<ElementalKey> = Default::default();
    for s in ci.iter() {
        let a = translate_mask(cu, u, s.a())?;
        let b = translate_mask(cu, u, s.b())?;
        let c = translate_mask(cu, u, s.c())?;
        for (one, other) in [(a, b), (b, a)] {
            if one.count_ones() != 1 {
                continue;
            }
            let v = one.trailing_zeros() as usize;
            let outside = u.full_mask() & !(a | b | c);
            for e in (0..u.len()).filter(|&e| outside >> e & 1 == 1) {
                let candidate = elemental_key(v, e, other | c);
                if dropped.contains(&candidate) {
                    continue;
                }
                // I(v:e|other,c) = I(v:e|c) + sum_k I(v:b_k|c,e,prefix).
                let mut justification = vec![elemental_key(v, e, c)];
                let mut cond = c | (1 << e);
                for k in (0..u.len()).filter(|&k| other >> k & 1 == 1) {
                    justification.push(elemental_key(v, k, cond));
                    cond |= 1 << k;
                }
                if justification.iter().any(|k| dropped.contains(k)) {
                    continue;
                }
                dropped.insert(candidate);
            }
        }
    }
    let mut sys = LinIneqSystem::new(entropy_coords(u)).expect("subset coords are distinct");
    shannon_rows_into(&mut sys, u, u.full_mask(), &dropped);
    Ok(sys)
}

/// Shannon cone of the clique's variables embedded in the full coordinate
/// space of `u`; coordinates outside the clique's subsets are untouched.
pub fn clique_cone_embedded(u: &Universe, clique: &[NodeId]) -> Result<LinIneqSystem> {
    let scope = u.mask_of(clique)?;
    let mut sys = LinIneqSystem::new(entropy_coords(u)).expect("subset coords are distinct");
    shannon_rows_into(&mut sys, u, scope, &Default::default());
    Ok(sys)
}

/// The nonempty subset coordinates a scenario can observe: every H(S) with
/// S inside some edge.
pub fn marginal_coords(m: &Hypergraph, u: &Universe) -> Result<Vec<Coord>> {
    let mut masks: Vec<Mask> = Vec::new();
    for &edge in m.edge_masks() {
        let translated = translate_mask(m.universe(), u, edge)?;
        for s in crate::vars::subsets_of(translated) {
            if s != 0 {
                masks.push(s);
            }
        }
    }
    masks.sort_unstable();
    masks.dedup();
    let mut coords: Vec<Coord> = masks.into_iter().map(|s| coord_of(u, s)).collect();
    coords.sort();
    Ok(coords)
}

/// Reads the listed coordinates out of an entropy vector, in order.
pub fn entropy_point(coords: &[Coord], v: &EntropyVector) -> Result<Vec<f64>> {
    coords
        .iter()
        .map(|c| match c {
            Coord::Entropy(labels) => {
                let mask = v.universe().mask_of(labels.iter())?;
                Ok(v.value(mask))
            }
            other => Err(Error::InvalidInput(format!(
                "{other} is not an entropy coordinate"
            ))),
        })
        .collect()
}

/// Float satisfaction with relative tolerance [`FLOAT_TOL`]; the only place
/// float points meet exact systems.
pub fn satisfies_f64(sys: &LinIneqSystem, point: &[f64]) -> bool {
    assert_eq!(point.len(), sys.coords().len(), "point width mismatch");
    let eval = |row: &Row| -> (f64, f64, f64) {
        let mut lhs = 0.0;
        let mut scale = 1.0f64;
        for (c, x) in row.coeffs.iter().zip(point) {
            let term = big_to_f64(c) * x;
            lhs += term;
            scale = scale.max(term.abs());
        }
        let rhs = big_to_f64(&row.rhs);
        (lhs, rhs, scale.max(rhs.abs()))
    };
    sys.ineqs().iter().all(|r| {
        let (lhs, rhs, scale) = eval(r);
        lhs >= rhs - FLOAT_TOL * scale
    }) && sys.eqs().iter().all(|r| {
        let (lhs, rhs, scale) = eval(r);
        (lhs - rhs).abs() <= FLOAT_TOL * scale
    })
}

fn big_to_f64(x: &BigInt) -> f64 {
    num::ToPrimitive::to_f64(x).expect("row coefficients fit in f64")
}

/// Rewrites a row over `from` coordinates as a row over the coordinates of
/// `to` (zero elsewhere). Fails if a used coordinate is missing in `to`.
pub fn embed_row(row: &Row, from: &[Coord], to: &LinIneqSystem) -> Result<Row> {
    assert_eq!(row.coeffs.len(), from.len(), "row width mismatch");
    let mut coeffs = vec![BigInt::from(0); to.coords().len()];
    for (c, coord) in row.coeffs.iter().zip(from) {
        if num::Zero::is_zero(c) {
            continue;
        }
        let idx = to.coord_index(coord).ok_or_else(|| {
            Error::InvalidInput(format!("coordinate {coord} not in the target system"))
        })?;
        coeffs[idx] = c.clone();
    }
    Ok(Row::new(coeffs, row.rhs.clone()))
}
