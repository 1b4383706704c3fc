//! Correlation polytopes in probability coordinates: the simplex over joint
//! outcomes, clique-wise simplex systems coupled by shared marginals, and the
//! projection onto observable coordinates that turns either into a Bell
//! inequality system.
//!
//! Observable coordinates are raw outcome probabilities `p(M, o)`, one per
//! outcome tuple of each scenario edge. Correlator form (for binary
//! outcomes) is a presentation-layer change of basis; see
//! [`correlator_text`].

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::hypergraph::{
    self, maximal_cliques_chordal, minimal_triangulation, rio_ordering, two_section, Hypergraph,
};
use crate::polyhedra::{fm_eliminate_with, Coord, FmOptions, LinIneqSystem};
use crate::vars::{NodeId, Universe};
use crate::{Error, Result};

/// Default cap on the outcome count of any one simplex.
pub const MAX_OUTCOMES: usize = 4096;

/// How [`bell_project`] builds the pre-projection system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellMode {
    /// One simplex over the full joint outcome space.
    Direct,
    /// One simplex per clique of a minimal acyclic extension, coupled by
    /// shared-marginal equalities. Much smaller elimination problems for
    /// sparse scenarios; same solution set.
    ViaTriangulation,
}

/// Knobs for [`bell_project`].
#[derive(Clone, Debug)]
pub struct BellOptions {
    /// Cap on the outcome count of any one simplex.
    pub max_outcomes: usize,
    /// Passed through to the elimination pass.
    pub fm: FmOptions,
}

impl Default for BellOptions {
    fn default() -> Self {
        BellOptions {
            max_outcomes: MAX_OUTCOMES,
            fm: FmOptions::default(),
        }
    }
}

/// Sorted, validated (variable, cardinality) list.
fn sorted_cards(vars: &[(NodeId, usize)]) -> Result<Vec<(NodeId, usize)>> {
    if vars.is_empty() {
        return Err(Error::InvalidInput(
            "need at least one variable with a cardinality".into(),
        ));
    }
    let mut v = vars.to_vec();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    for w in v.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidInput(format!(
                "repeated variable {} in cardinality list",
                w[0].0.as_str()
            )));
        }
    }
    if let Some((n, _)) = v.iter().find(|(_, c)| *c == 0) {
        return Err(Error::InvalidInput(format!(
            "variable {} has cardinality 0",
            n.as_str()
        )));
    }
    Ok(v)
}

fn guarded_count(cards: &[(NodeId, usize)], limit: usize) -> Result<usize> {
    let count = cards
        .iter()
        .try_fold(1usize, |acc, (_, c)| acc.checked_mul(*c));
    match count {
        Some(n) if n <= limit => Ok(n),
        other => Err(Error::GuardExceeded {
            what: "outcome count",
            actual: other.unwrap_or(usize::MAX),
            limit,
        }),
    }
}

/// All outcome tuples of `cards`, row-major: the first variable's digit
/// varies slowest. This is the canonical coordinate order for a fixed
/// variable set.
fn outcome_tuples(cards: &[(NodeId, usize)]) -> Vec<Vec<usize>> {
    let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
    for (_, c) in cards {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..*c).map(move |d| {
                    let mut e = t.clone();
                    e.push(d);
                    e
                })
            })
            .collect();
    }
    tuples
}

fn coord_for(cards: &[(NodeId, usize)], tuple: &[usize]) -> Coord {
    Coord::prob(
        cards
            .iter()
            .zip(tuple)
            .map(|((n, _), d)| (n.clone(), *d)),
    )
    .expect("sorted distinct nonempty variable list")
}

/// The simplex over the joint outcomes of `vars`: one nonnegativity row per
/// outcome plus the normalization equality.
pub fn simplex_system(vars: &[(NodeId, usize)]) -> Result<LinIneqSystem> {
    simplex_system_with(vars, MAX_OUTCOMES)
}

/// [`simplex_system`] with an explicit outcome-count cap.
pub fn simplex_system_with(vars: &[(NodeId, usize)], max_outcomes: usize) -> Result<LinIneqSystem> {
    let cards = sorted_cards(vars)?;
    let count = guarded_count(&cards, max_outcomes)?;
    let tuples = outcome_tuples(&cards);
    let coords: Vec<Coord> = tuples.iter().map(|t| coord_for(&cards, t)).collect();
    let mut sys = LinIneqSystem::new(coords)?;
    for i in 0..count {
        let mut row = vec![BigInt::zero(); count];
        row[i] = BigInt::one();
        sys.add_ineq(row, BigInt::zero());
    }
    sys.add_eq(vec![BigInt::one(); count], BigInt::one());
    sys.canonicalize();
    Ok(sys)
}

/// Looks up cardinalities for a node set, in sorted node order.
fn cards_of<'a, I: IntoIterator<Item = &'a NodeId>>(
    nodes: I,
    cards: &BTreeMap<NodeId, usize>,
) -> Result<Vec<(NodeId, usize)>> {
    let mut v = Vec::new();
    for n in nodes {
        let c = cards
            .get(n)
            .ok_or_else(|| Error::InvalidInput(format!("no cardinality for variable {n}")))?;
        v.push((n.clone(), *c));
    }
    v.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(v)
}

/// The marginalization map from a joint outcome space onto the observable
/// coordinates of `m`: one equality per observable coordinate, expressing
/// it as the sum of the consistent joint coordinates.
///
/// The result is an equality-only system over the union of joint and
/// observable coordinates. An edge equal to the full joint variable set
/// contributes nothing: its observable coordinates already *are* joint
/// coordinates.
pub fn marginal_map(joint: &[(NodeId, usize)], m: &Hypergraph) -> Result<LinIneqSystem> {
    let joint = sorted_cards(joint)?;
    guarded_count(&joint, MAX_OUTCOMES)?;
    let card_map: BTreeMap<NodeId, usize> = joint.iter().cloned().collect();
    for n in m.universe().labels() {
        if !card_map.contains_key(n) {
            return Err(Error::InvalidInput(format!(
                "scenario node {n} is not a joint variable"
            )));
        }
    }
    let joint_tuples = outcome_tuples(&joint);
    let joint_coords: Vec<Coord> = joint_tuples.iter().map(|t| coord_for(&joint, t)).collect();

    let mut coords: BTreeSet<Coord> = joint_coords.iter().cloned().collect();
    let mut edge_cards = Vec::new();
    for mask in m.edge_masks() {
        let cards = cards_of(m.universe().iter_mask(*mask), &card_map)?;
        for t in outcome_tuples(&cards) {
            coords.insert(coord_for(&cards, &t));
        }
        edge_cards.push(cards);
    }
    let mut sys = LinIneqSystem::new(coords.into_iter().collect())?;
    for cards in &edge_cards {
        if cards.len() == joint.len() {
            continue;
        }
        add_map_eqs(&mut sys, &joint, &joint_tuples, &joint_coords, cards);
    }
    sys.canonicalize();
    Ok(sys)
}

/// Adds `p(M,o) - Σ consistent joint = 0` for every outcome of the variable
/// subset `sub`. `tuples`/`coords` enumerate the joint space of `joint`.
fn add_map_eqs(
    sys: &mut LinIneqSystem,
    joint: &[(NodeId, usize)],
    tuples: &[Vec<usize>],
    coords: &[Coord],
    sub: &[(NodeId, usize)],
) {
    let positions: Vec<usize> = sub
        .iter()
        .map(|(n, _)| joint.iter().position(|(m, _)| m == n).expect("subset"))
        .collect();
    let width = sys.coords().len();
    let mut rows: BTreeMap<Coord, Vec<BigInt>> = BTreeMap::new();
    for (t, c) in tuples.iter().zip(coords) {
        let restricted: Vec<usize> = positions.iter().map(|&p| t[p]).collect();
        let obs = coord_for(sub, &restricted);
        let ji = sys.coord_index(c).expect("joint coordinate present");
        rows.entry(obs).or_insert_with(|| vec![BigInt::zero(); width])[ji] -= 1;
    }
    for (obs, mut coeffs) in rows {
        let oi = sys.coord_index(&obs).expect("observable coordinate present");
        coeffs[oi] += 1;
        sys.add_eq(coeffs, BigInt::zero());
    }
}

/// Observable coordinates of a scenario: every outcome coordinate of every
/// edge (after reduction), in canonical order.
pub fn observable_coords(
    scenario: &Hypergraph,
    cards: &[(NodeId, usize)],
) -> Result<Vec<Coord>> {
    let red = hypergraph::reduce(scenario);
    let card_map = scenario_cards(&red, cards)?;
    let mut coords = BTreeSet::new();
    for mask in red.edge_masks() {
        let edge = cards_of(red.universe().iter_mask(*mask), &card_map)?;
        for t in outcome_tuples(&edge) {
            coords.insert(coord_for(&edge, &t));
        }
    }
    Ok(coords.into_iter().collect())
}

/// Validates that `cards` covers the scenario's nodes exactly.
fn scenario_cards(
    scenario: &Hypergraph,
    cards: &[(NodeId, usize)],
) -> Result<BTreeMap<NodeId, usize>> {
    let sorted = sorted_cards(cards)?;
    let map: BTreeMap<NodeId, usize> = sorted.into_iter().collect();
    for n in scenario.universe().labels() {
        if !map.contains_key(n) {
            return Err(Error::InvalidInput(format!(
                "no cardinality for scenario node {n}"
            )));
        }
    }
    if map.len() != scenario.universe().len() {
        return Err(Error::InvalidInput(
            "cardinality list mentions variables outside the scenario".into(),
        ));
    }
    Ok(map)
}

/// Facet system of the correlation polytope of a marginal scenario: the set
/// of observable coordinate vectors reachable from a single joint
/// distribution.
///
/// `Direct` builds the full joint simplex and eliminates the joint
/// coordinates. `ViaTriangulation` builds one simplex per clique of a
/// minimal acyclic extension of the scenario, couples overlapping cliques
/// by shared-marginal equalities, and eliminates the clique coordinates.
/// Both produce the same solution set; the clique route is the cheap one.
pub fn bell_project(
    scenario: &Hypergraph,
    cards: &[(NodeId, usize)],
    mode: BellMode,
) -> Result<LinIneqSystem> {
    bell_project_with(scenario, cards, mode, &BellOptions::default())
}

/// [`bell_project`] with explicit guards and elimination options.
pub fn bell_project_with(
    scenario: &Hypergraph,
    cards: &[(NodeId, usize)],
    mode: BellMode,
    opts: &BellOptions,
) -> Result<LinIneqSystem> {
    let red = hypergraph::reduce(scenario);
    let card_map = scenario_cards(&red, cards)?;

    let mut obs: BTreeSet<Coord> = BTreeSet::new();
    let mut edge_cards = Vec::new();
    for mask in red.edge_masks() {
        let edge = cards_of(red.universe().iter_mask(*mask), &card_map)?;
        for t in outcome_tuples(&edge) {
            obs.insert(coord_for(&edge, &t));
        }
        edge_cards.push(edge);
    }

    // Blocks: variable sets carrying a simplex (the full joint, or one per
    // clique), each with its outcome tuples and coordinates.
    struct Block {
        cards: Vec<(NodeId, usize)>,
        tuples: Vec<Vec<usize>>,
        coords: Vec<Coord>,
    }
    let block_of = |vars: Vec<(NodeId, usize)>| -> Result<Block> {
        guarded_count(&vars, opts.max_outcomes)?;
        let tuples = outcome_tuples(&vars);
        let coords = tuples.iter().map(|t| coord_for(&vars, t)).collect();
        Ok(Block {
            cards: vars,
            tuples,
            coords,
        })
    };

    let blocks: Vec<Block>;
    // For each block, the scenario edges it must marginalize to, and for
    // coupled blocks the (separator, witness block) pair.
    let mut couplings: Vec<(usize, usize, Vec<(NodeId, usize)>)> = Vec::new();
    let mut edge_home: Vec<(usize, Vec<(NodeId, usize)>)> = Vec::new();

    match mode {
        BellMode::Direct => {
            let all = cards_of(red.universe().labels(), &card_map)?;
            blocks = vec![block_of(all)?];
            for edge in &edge_cards {
                if edge.len() != red.universe().len() {
                    edge_home.push((0, edge.clone()));
                }
            }
        }
        BellMode::ViaTriangulation => {
            let cliques = maximal_cliques_chordal(&minimal_triangulation(&two_section(&red)))?;
            let rio = rio_ordering(&cliques)
                .expect("cliques of a chordal graph admit a running intersection ordering");
            let u = rio.universe().clone();
            let mut bs = Vec::new();
            for (i, cm) in rio.edge_masks().iter().enumerate() {
                bs.push(block_of(cards_of(u.iter_mask(*cm), &card_map)?)?);
                let sep = rio.separator_masks()[i];
                if sep != 0 {
                    let w = rio.witness(i).expect("nonempty separator has a witness");
                    couplings.push((i, w, cards_of(u.iter_mask(sep), &card_map)?));
                }
            }
            for edge in &edge_cards {
                let em = edge_mask(&u, edge)?;
                let home = rio
                    .edge_masks()
                    .iter()
                    .position(|cm| em & cm == em)
                    .expect("triangulation cliques cover every scenario edge");
                if bs[home].cards.len() != edge.len() {
                    edge_home.push((home, edge.clone()));
                }
            }
            blocks = bs;
        }
    }

    let mut coords: BTreeSet<Coord> = obs.clone();
    for b in &blocks {
        coords.extend(b.coords.iter().cloned());
    }
    let mut sys = LinIneqSystem::new(coords.into_iter().collect())?;
    let width = sys.coords().len();

    for b in &blocks {
        let mut norm = vec![BigInt::zero(); width];
        for c in &b.coords {
            let i = sys.coord_index(c).expect("block coordinate present");
            let mut row = vec![BigInt::zero(); width];
            row[i] = BigInt::one();
            sys.add_ineq(row, BigInt::zero());
            norm[i] = BigInt::one();
        }
        sys.add_eq(norm, BigInt::one());
    }
    // Shared-marginal coupling along the running intersection tree: with the
    // per-block simplexes this forces one consistent family, hence a global
    // joint on the acyclic extension.
    for (i, w, sep) in &couplings {
        for s in outcome_tuples(sep) {
            let mut row = vec![BigInt::zero(); width];
            accumulate_marginal(&mut row, &sys, &blocks[*i].cards, &blocks[*i].tuples, sep, &s, 1);
            accumulate_marginal(&mut row, &sys, &blocks[*w].cards, &blocks[*w].tuples, sep, &s, -1);
            sys.add_eq(row, BigInt::zero());
        }
    }
    for (home, edge) in &edge_home {
        let b = &blocks[*home];
        add_map_eqs(&mut sys, &b.cards, &b.tuples, &b.coords, edge);
    }
    sys.canonicalize();

    let drop: Vec<Coord> = blocks
        .iter()
        .flat_map(|b| b.coords.iter())
        .filter(|c| !obs.contains(*c))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    fm_eliminate_with(&sys, &drop, &opts.fm)
}

fn edge_mask(u: &Universe, edge: &[(NodeId, usize)]) -> Result<crate::vars::Mask> {
    u.mask_of(edge.iter().map(|(n, _)| n))
}

/// Adds `sign` times the block's marginal on `sub = s` into `row`.
fn accumulate_marginal(
    row: &mut [BigInt],
    sys: &LinIneqSystem,
    cards: &[(NodeId, usize)],
    tuples: &[Vec<usize>],
    sub: &[(NodeId, usize)],
    s: &[usize],
    sign: i64,
) {
    let positions: Vec<usize> = sub
        .iter()
        .map(|(n, _)| cards.iter().position(|(m, _)| m == n).expect("subset"))
        .collect();
    for t in tuples {
        if positions.iter().zip(s).all(|(&p, &d)| t[p] == d) {
            let c = coord_for(cards, t);
            let i = sys.coord_index(&c).expect("block coordinate present");
            row[i] += sign;
        }
    }
}

/// The observable image of every deterministic global assignment, in the
/// coordinate order of [`observable_coords`] (which is also the coordinate
/// order of [`bell_project`]'s output). Assignments are enumerated
/// row-major over the sorted variable list.
pub fn deterministic_points(
    scenario: &Hypergraph,
    cards: &[(NodeId, usize)],
) -> Result<Vec<Vec<BigRational>>> {
    let red = hypergraph::reduce(scenario);
    let card_map = scenario_cards(&red, cards)?;
    let all = cards_of(red.universe().labels(), &card_map)?;
    guarded_count(&all, MAX_OUTCOMES)?;
    let obs = observable_coords(scenario, cards)?;

    // Positions of each observable coordinate's variables in the global list.
    let indexed: Vec<(Vec<usize>, Vec<usize>)> = obs
        .iter()
        .map(|c| match c {
            Coord::Prob(pairs) => {
                let pos = pairs
                    .iter()
                    .map(|(n, _)| all.iter().position(|(m, _)| m == n).expect("scenario node"))
                    .collect();
                let want = pairs.iter().map(|(_, d)| *d).collect();
                (pos, want)
            }
            Coord::Entropy(_) => unreachable!("observable coordinates are probabilities"),
        })
        .collect();

    let mut points = Vec::new();
    for t in outcome_tuples(&all) {
        points.push(
            indexed
                .iter()
                .map(|(pos, want)| {
                    let hit = pos.iter().zip(want).all(|(&p, &d)| t[p] == d);
                    if hit {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect(),
        );
    }
    Ok(points)
}

/// Renders a system over binary probability coordinates in the correlator
/// basis: `p` coordinates of an edge {X,Y} become `1, <X>, <Y>, <X,Y>` with
/// `<X> = p(X=0) - p(X=1)`. Equalities first, then inequalities, matching
/// the text format's row order. Only defined for edges of at most two
/// binary variables.
pub fn correlator_text(sys: &LinIneqSystem) -> Result<Vec<String>> {
    let mut blocks: BTreeMap<Vec<NodeId>, Vec<(usize, Vec<usize>)>> = BTreeMap::new();
    for (i, c) in sys.coords().iter().enumerate() {
        match c {
            Coord::Prob(pairs) if pairs.len() <= 2 => {
                if pairs.iter().any(|(_, d)| *d > 1) {
                    return Err(Error::InvalidInput(format!(
                        "correlator form needs binary outcomes, got {c}"
                    )));
                }
                let vars: Vec<NodeId> = pairs.iter().map(|(n, _)| n.clone()).collect();
                let digits: Vec<usize> = pairs.iter().map(|(_, d)| *d).collect();
                blocks.entry(vars).or_default().push((i, digits));
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "correlator form needs probability coordinates on at most two variables, got {c}"
                )))
            }
        }
    }

    let render = |coeffs: &[BigInt], rhs: &BigInt, rel: &str| -> String {
        // Per block the map {outcomes} -> {1, <X>, <Y>, <X,Y>} is a bijection;
        // sum the parity-weighted quarter (or half) contributions.
        let mut terms: BTreeMap<(usize, Vec<NodeId>), BigRational> = BTreeMap::new();
        let mut constant = BigRational::zero();
        for (vars, entries) in &blocks {
            let denom = BigInt::from(1 << vars.len());
            for (i, digits) in entries {
                let q = BigRational::new(coeffs[*i].clone(), denom.clone());
                if q.is_zero() {
                    continue;
                }
                for sel in 0..(1usize << vars.len()) {
                    let mut key = Vec::new();
                    let mut parity = 0usize;
                    for (k, v) in vars.iter().enumerate() {
                        if sel >> k & 1 == 1 {
                            key.push(v.clone());
                            parity += digits[k];
                        }
                    }
                    let signed = if parity % 2 == 0 { q.clone() } else { -q.clone() };
                    if key.is_empty() {
                        constant += signed;
                    } else {
                        *terms.entry((key.len(), key)).or_default() += signed;
                    }
                }
            }
        }
        let mut out = String::new();
        for ((_, vars), c) in &terms {
            if c.is_zero() {
                continue;
            }
            let label = vars
                .iter()
                .map(|n| n.as_str())
                .collect::<Vec<_>>()
                .join(",");
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else if c.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&format!("{}*<{label}>", c.abs()));
        }
        if out.is_empty() {
            out.push('0');
        }
        let rhs = BigRational::from(rhs.clone()) - constant;
        format!("{out} {rel} {rhs}")
    };

    let mut lines = Vec::new();
    for r in sys.eqs() {
        lines.push(render(&r.coeffs, &r.rhs, "="));
    }
    for r in sys.ineqs() {
        lines.push(render(&r.coeffs, &r.rhs, ">="));
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::lp;

    fn n(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn binary(names: &[&str]) -> Vec<(NodeId, usize)> {
        names.iter().map(|s| (n(s), 2)).collect()
    }

    fn chsh() -> Hypergraph {
        Hypergraph::new(&[
            vec![n("A1"), n("B1")],
            vec![n("A1"), n("B2")],
            vec![n("A2"), n("B1")],
            vec![n("A2"), n("B2")],
        ])
        .unwrap()
    }

    #[test]
    fn two_binary_simplex_has_four_nonneg_rows_and_one_equality() {
        let s = simplex_system(&binary(&["A", "B"])).unwrap();
        assert_eq!(s.coords().len(), 4);
        assert_eq!(s.ineqs().len(), 4);
        assert_eq!(s.eqs().len(), 1);
        assert_eq!(
            s.eqs()[0].coeffs,
            vec![1.into(), 1.into(), 1.into(), 1.into()]
        );
        assert_eq!(s.eqs()[0].rhs, 1.into());
    }

    #[test]
    fn chsh_joint_simplex_has_sixteen_coords() {
        let s = simplex_system(&binary(&["A1", "A2", "B1", "B2"])).unwrap();
        assert_eq!(s.coords().len(), 16);
        assert_eq!(s.ineqs().len(), 16);
        assert_eq!(s.eqs().len(), 1);
    }

    #[test]
    fn single_binary_variable_simplex() {
        let s = simplex_system(&binary(&["A"])).unwrap();
        let text = s.to_text();
        assert_eq!(
            text,
            "1*p(A=0) + 1*p(A=1) = 1\n1*p(A=1) >= 0\n1*p(A=0) >= 0"
        );
    }

    #[test]
    fn outcome_guard_trips() {
        let vars = binary(&[
            "V01", "V02", "V03", "V04", "V05", "V06", "V07", "V08", "V09", "V10", "V11", "V12",
            "V13",
        ]);
        let err = simplex_system(&vars).unwrap_err();
        assert!(matches!(err, Error::GuardExceeded { .. }));
    }

    #[test]
    fn marginal_map_rows_sum_consistent_joints() {
        let joint = binary(&["A1", "A2", "B1", "B2"]);
        let map = marginal_map(&joint, &chsh()).unwrap();
        // 4 edges x 4 outcomes.
        assert_eq!(map.eqs().len(), 16);
        assert!(map.ineqs().is_empty());
        let obs = Coord::prob([(n("A1"), 0), (n("B1"), 0)]).unwrap();
        let oi = map.coord_index(&obs).unwrap();
        let row = map
            .eqs()
            .iter()
            .find(|r| !r.coeffs[oi].is_zero())
            .unwrap();
        let nonzero = row.coeffs.iter().filter(|c| !c.is_zero()).count();
        assert_eq!(nonzero, 5);
        assert_eq!(row.coeffs[oi], 1.into());
    }

    #[test]
    fn full_set_edge_maps_identically() {
        let joint = binary(&["A", "B"]);
        let m = Hypergraph::new(&[vec![n("A"), n("B")]]).unwrap();
        let map = marginal_map(&joint, &m).unwrap();
        assert_eq!(map.row_count(), 0);
        assert_eq!(map.coords().len(), 4);
    }

    #[test]
    fn marginal_map_rejects_foreign_nodes() {
        let joint = binary(&["A", "B"]);
        let m = Hypergraph::new(&[vec![n("A"), n("C")]]).unwrap();
        assert!(matches!(
            marginal_map(&joint, &m),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn single_edge_scenario_projects_to_its_simplex() {
        let m = Hypergraph::new(&[vec![n("A"), n("B")]]).unwrap();
        let cards = binary(&["A", "B"]);
        let simplex = simplex_system(&cards).unwrap();
        for mode in [BellMode::Direct, BellMode::ViaTriangulation] {
            let out = bell_project(&m, &cards, mode).unwrap();
            assert_eq!(out.coords(), simplex.coords());
            assert!(lp::equivalent(&out, &simplex).unwrap());
        }
    }

    #[test]
    fn acyclic_scenario_has_no_facets_beyond_consistency() {
        // A path-shaped scenario: three edges through the hub B.
        let m = Hypergraph::new(&[
            vec![n("A"), n("B")],
            vec![n("B"), n("D")],
            vec![n("B"), n("C")],
        ])
        .unwrap();
        let cards = binary(&["A", "B", "C", "D"]);
        let direct = bell_project(&m, &cards, BellMode::Direct).unwrap();
        let via = bell_project(&m, &cards, BellMode::ViaTriangulation).unwrap();
        assert!(lp::equivalent(&direct, &via).unwrap());

        // Expected: nonnegativity plus whatever affine hull the projection
        // itself found. Equivalence then says there is no Bell facet.
        let mut expected = LinIneqSystem::new(direct.coords().to_vec()).unwrap();
        let width = direct.coords().len();
        for i in 0..width {
            let mut row = vec![BigInt::zero(); width];
            row[i] = BigInt::one();
            expected.add_ineq(row, BigInt::zero());
        }
        for r in direct.eqs() {
            expected.add_eq(r.coeffs.clone(), r.rhs.clone());
        }
        expected.canonicalize();
        assert!(lp::equivalent(&direct, &expected).unwrap());
    }

    #[test]
    fn chsh_modes_agree_and_deterministic_points_are_inside() {
        let m = chsh();
        let cards = binary(&["A1", "A2", "B1", "B2"]);
        let direct = bell_project(&m, &cards, BellMode::Direct).unwrap();
        let via = bell_project(&m, &cards, BellMode::ViaTriangulation).unwrap();
        assert_eq!(direct.coords().len(), 16);
        assert_eq!(direct.coords(), via.coords());
        assert!(lp::equivalent(&direct, &via).unwrap());
        for p in deterministic_points(&m, &cards).unwrap() {
            assert!(direct.satisfied_by(&p));
            assert!(via.satisfied_by(&p));
        }
    }

    #[test]
    fn deterministic_points_of_an_edge_are_the_unit_vectors() {
        let m = Hypergraph::new(&[vec![n("A"), n("B")]]).unwrap();
        let pts = deterministic_points(&m, &binary(&["A", "B"])).unwrap();
        assert_eq!(pts.len(), 4);
        for (i, p) in pts.iter().enumerate() {
            for (j, v) in p.iter().enumerate() {
                assert_eq!(*v == BigRational::one(), i == j);
            }
        }
    }

    #[test]
    fn correlator_text_renders_pair_and_constant_terms() {
        let coords: Vec<Coord> = outcome_tuples(&binary(&["X", "Y"]))
            .iter()
            .map(|t| coord_for(&binary(&["X", "Y"]), t))
            .collect();
        let mut sys = LinIneqSystem::new(coords).unwrap();
        // <X,Y> >= -1 in probability coordinates.
        sys.add_ineq(
            vec![1.into(), (-1).into(), (-1).into(), 1.into()],
            (-1).into(),
        );
        // p(X=0,Y=0) >= 0.
        sys.add_ineq(
            vec![1.into(), 0.into(), 0.into(), 0.into()],
            0.into(),
        );
        let lines = correlator_text(&sys).unwrap();
        assert_eq!(
            lines,
            vec![
                "1*<X,Y> >= -1".to_string(),
                "1/4*<X> + 1/4*<Y> + 1/4*<X,Y> >= -1/4".to_string(),
            ]
        );
    }

    #[test]
    fn correlator_text_rejects_wide_or_nonbinary_coords() {
        let sys = simplex_system(&binary(&["A", "B", "C"])).unwrap();
        assert!(correlator_text(&sys).is_err());
        let sys = simplex_system(&[(n("A"), 3)]).unwrap();
        assert!(correlator_text(&sys).is_err());
    }
}
