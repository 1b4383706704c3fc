//! Top-level derivation routes. A marginal scenario comes in; what comes
//! out is one of: its minimal acyclic extensions with their conditional
//! independences, an entropic inequality system over the observable
//! coordinates (scenario-only or causal-structure-aware), a verdict on
//! whether the scenario can distinguish a causal structure at all, or a
//! comparison of the nested outer approximations.

use std::fmt;

use num::BigRational;
use sha2::{Digest, Sha256};

use crate::causal::{ci_set_dag, ci_set_mrf, ci_subset, CiSet, CiStatement, InclusionReport};
use crate::entropy_cone::{marginal_coords, reduced_shannon_cone, shannon_cone, with_ci};
use crate::hypergraph::{
    self, enumerate_minimal_triangulations, maximal_cliques_chordal, minimal_triangulation,
    two_section, Digraph, Graph, Hypergraph,
};
use crate::polyhedra::{
    enumerate_rays_with, fm_eliminate_with, intersect, lp, Coord, DdOptions, FmOptions,
    LinIneqSystem, Ray,
};
use crate::vars::Universe;
use crate::{Error, Result};

/// Size caps for every route that can blow up. Trips surface as
/// `GuardExceeded`, never as silent truncation (the one exception is the
/// triangulation list, which carries an explicit `truncated` flag).
#[derive(Clone, Debug)]
pub struct Guards {
    /// Cap on the variable universe for entropy-space systems (2^n coords).
    pub max_nodes: usize,
    /// Cap on nodes for minimal-triangulation enumeration (factorial cost).
    pub max_enumeration_nodes: usize,
    /// Cap on the number of enumerated minimal triangulations.
    pub max_triangulations: usize,
    /// Cap on nodes for conditional-independence enumeration.
    pub max_ci_nodes: usize,
    /// Universe size up to which reports compute full projections by
    /// elimination; above it they fall back to per-ray feasibility tests.
    pub direct_projection_nodes: usize,
    /// Coordinate cap for extremal-ray enumeration.
    pub max_ray_coords: usize,
    /// Elimination options for every projection the pipeline runs.
    pub fm: FmOptions,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_nodes: 8,
            max_enumeration_nodes: 10,
            max_triangulations: 64,
            max_ci_nodes: 10,
            direct_projection_nodes: 5,
            max_ray_coords: 24,
            fm: FmOptions::default(),
        }
    }
}

fn guard_nodes(u: &Universe, guards: &Guards) -> Result<()> {
    if u.len() > guards.max_nodes {
        return Err(Error::GuardExceeded {
            what: "entropy universe nodes",
            actual: u.len(),
            limit: guards.max_nodes,
        });
    }
    Ok(())
}

/// One minimal acyclic extension of a scenario: its clique hypergraph and
/// the conditional independences its shape imposes.
#[derive(Clone, Debug)]
pub struct AcyclicExtension {
    pub cliques: Hypergraph,
    pub ci: CiSet,
}

/// All minimal acyclic extensions of a scenario, canonically ordered.
#[derive(Clone, Debug)]
pub struct ExtensionList {
    /// The reduced scenario the extensions refer to.
    pub scenario: Hypergraph,
    pub extensions: Vec<AcyclicExtension>,
    /// True when enumeration was cut off at the configured cap.
    pub truncated: bool,
}

/// Enumerates the minimal acyclic extensions of a scenario: triangulate the
/// 2-section every minimal way, take clique hypergraphs, and read off each
/// one's independences.
pub fn triangulate_scenario(m: &Hypergraph) -> Result<ExtensionList> {
    triangulate_scenario_with(m, &Guards::default())
}

/// [`triangulate_scenario`] with explicit guards.
pub fn triangulate_scenario_with(m: &Hypergraph, guards: &Guards) -> Result<ExtensionList> {
    let scenario = hypergraph::reduce(m);
    let enumeration = enumerate_minimal_triangulations(
        &two_section(&scenario),
        guards.max_triangulations,
        guards.max_enumeration_nodes,
    )?;
    let mut extensions = Vec::with_capacity(enumeration.graphs.len());
    for g in &enumeration.graphs {
        extensions.push(AcyclicExtension {
            cliques: maximal_cliques_chordal(g)?,
            ci: ci_set_mrf(g, guards.max_ci_nodes)?,
        });
    }
    Ok(ExtensionList {
        scenario,
        extensions,
        truncated: enumeration.truncated,
    })
}

/// Re-expresses `ci` over the universe `u` (a superset of its own).
fn embed_ci(ci: &CiSet, u: &Universe) -> Result<CiSet> {
    let from = ci.universe();
    let mut out = CiSet::empty(u.clone());
    for s in ci.iter() {
        out.insert(CiStatement::new(
            u,
            u.mask_of(&from.set_of(s.a()))?,
            u.mask_of(&from.set_of(s.b()))?,
            u.mask_of(&from.set_of(s.c()))?,
        )?);
    }
    Ok(out)
}

fn union_ci(a: &CiSet, b: &CiSet) -> CiSet {
    let mut out = a.clone();
    for s in b.iter() {
        out.insert(s);
    }
    out
}

/// Shared tail of every entropic route: reduced cone + independence
/// hyperplanes, then eliminate everything outside `onto`.
fn project_cone(
    u: &Universe,
    ci: &CiSet,
    marg: &[Coord],
    onto: Option<&[Coord]>,
    guards: &Guards,
) -> Result<LinIneqSystem> {
    let target: Vec<Coord> = match onto {
        Some(cs) => {
            for c in cs {
                if !marg.contains(c) {
                    return Err(Error::InvalidInput(format!(
                        "{c} is not an observable coordinate of the scenario"
                    )));
                }
            }
            cs.to_vec()
        }
        None => marg.to_vec(),
    };
    let cone = with_ci(&reduced_shannon_cone(u, ci)?, ci)?;
    let drop: Vec<Coord> = cone
        .coords()
        .iter()
        .filter(|c| !target.contains(c))
        .cloned()
        .collect();
    fm_eliminate_with(&cone, &drop, &guards.fm)
}

/// Entropic characterization of a scenario: the Shannon cone constrained by
/// the independences of one minimal acyclic extension (plus any caller
/// independences), projected onto the observable entropy coordinates.
pub fn entropic_characterize(m: &Hypergraph, extra: Option<&CiSet>) -> Result<LinIneqSystem> {
    entropic_characterize_with(m, extra, None, &Guards::default())
}

/// [`entropic_characterize`] with an optional coordinate restriction
/// (`onto` must be a subset of the observable coordinates) and guards.
pub fn entropic_characterize_with(
    m: &Hypergraph,
    extra: Option<&CiSet>,
    onto: Option<&[Coord]>,
    guards: &Guards,
) -> Result<LinIneqSystem> {
    let red = hypergraph::reduce(m);
    let u = red.universe().clone();
    guard_nodes(&u, guards)?;
    let mut ci = scenario_independences(&red, guards)?;
    if let Some(e) = extra {
        ci = union_ci(&ci, &embed_ci(e, &u)?);
    }
    let marg = marginal_coords(&red, &u)?;
    project_cone(&u, &ci, &marg, onto, guards)
}

/// The independences [`entropic_characterize`] applies: those induced by the
/// acyclic extension it builds for the scenario.
pub fn scenario_independences(m: &Hypergraph, guards: &Guards) -> Result<CiSet> {
    let red = hypergraph::reduce(m);
    guard_nodes(red.universe(), guards)?;
    let tri = minimal_triangulation(&two_section(&red));
    ci_set_mrf(&tri, guards.max_ci_nodes)
}

/// Projection of the plain Shannon cone onto a scenario's observable
/// coordinates, with no independence constraints. The expensive baseline
/// the extension-constrained route is measured against.
pub fn project_shannon(m: &Hypergraph) -> Result<LinIneqSystem> {
    project_shannon_with(m, None, &Guards::default())
}

/// [`project_shannon`] with an optional coordinate restriction and guards.
pub fn project_shannon_with(
    m: &Hypergraph,
    onto: Option<&[Coord]>,
    guards: &Guards,
) -> Result<LinIneqSystem> {
    let red = hypergraph::reduce(m);
    let u = red.universe().clone();
    guard_nodes(&u, guards)?;
    let ci = CiSet::empty(u.clone());
    let marg = marginal_coords(&red, &u)?;
    project_cone(&u, &ci, &marg, onto, guards)
}

/// A causal structure whose compatibility with a scenario is in question.
#[derive(Clone, Debug)]
pub enum CausalStructure {
    Dag(Digraph),
    Mrf(Graph),
}

impl CausalStructure {
    pub fn universe(&self) -> &Universe {
        match self {
            CausalStructure::Dag(d) => d.universe(),
            CausalStructure::Mrf(g) => g.universe(),
        }
    }

    /// All conditional independences the structure implies, over its full
    /// universe (latent variables included).
    pub fn ci(&self, max_nodes: usize) -> Result<CiSet> {
        match self {
            CausalStructure::Dag(d) => ci_set_dag(d, max_nodes),
            CausalStructure::Mrf(g) => ci_set_mrf(g, max_nodes),
        }
    }
}

/// Outcome of comparing a causal structure's independences against those of
/// every minimal acyclic extension of the scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictCase {
    /// Some extension's independences contain the causal ones: the scenario
    /// cannot falsify the causal structure.
    Unfalsifiable,
    /// Every extension's independences are implied by the causal ones: the
    /// causal independences alone give the valid characterization.
    CausalSufficient,
    /// Incomparable independences: combining scenario-derived and causal
    /// constraints yields neither an inner nor an outer approximation.
    Incomparable,
}

impl fmt::Display for VerdictCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerdictCase::Unfalsifiable => "unfalsifiable by this scenario",
            VerdictCase::CausalSufficient => "causal independences sufficient",
            VerdictCase::Incomparable => "incomparable constraint sets",
        };
        f.write_str(s)
    }
}

/// Both inclusion directions for one extension, with counterexample
/// statements when an inclusion fails.
#[derive(Clone, Debug)]
pub struct ExtensionComparison {
    /// Causal independences (restricted to scenario nodes) within the
    /// extension's.
    pub causal_in_extension: InclusionReport,
    /// Extension's independences within the causal ones.
    pub extension_in_causal: InclusionReport,
}

/// The classifier's answer, with the raw inclusion evidence retained.
#[derive(Clone, Debug)]
pub struct DistinguishabilityVerdict {
    pub case: VerdictCase,
    /// One comparison per enumerated extension, in enumeration order.
    pub comparisons: Vec<ExtensionComparison>,
    /// Index of the extension certifying the case: the containing one for
    /// `Unfalsifiable`, a non-contained one for `Incomparable`.
    pub witness: Option<usize>,
    /// True when the extension enumeration was truncated; the verdict then
    /// covers only the enumerated extensions.
    pub partial: bool,
    /// Which characterization route is valid.
    pub guidance: &'static str,
}

/// Decides whether observing the scenario's marginals can falsify the
/// causal structure, by comparing independence sets over the scenario's
/// nodes. First matching case wins; the full inclusion matrix is kept.
pub fn classify(m: &Hypergraph, g: &CausalStructure) -> Result<DistinguishabilityVerdict> {
    classify_with(m, g, &Guards::default())
}

/// [`classify`] with explicit guards.
pub fn classify_with(
    m: &Hypergraph,
    g: &CausalStructure,
    guards: &Guards,
) -> Result<DistinguishabilityVerdict> {
    let red = hypergraph::reduce(m);
    for n in red.universe().labels() {
        if g.universe().index_of(n).is_none() {
            return Err(Error::InvalidInput(format!(
                "scenario node {n} does not appear in the causal structure"
            )));
        }
    }
    let causal_on_m = g.ci(guards.max_ci_nodes)?.restrict(red.universe().labels())?;
    let exts = triangulate_scenario_with(&red, guards)?;
    let mut comparisons = Vec::with_capacity(exts.extensions.len());
    for e in &exts.extensions {
        comparisons.push(ExtensionComparison {
            causal_in_extension: ci_subset(&causal_on_m, &e.ci)?,
            extension_in_causal: ci_subset(&e.ci, &causal_on_m)?,
        });
    }

    let contained = comparisons.iter().position(|c| c.causal_in_extension.holds);
    let (case, witness, guidance) = if let Some(i) = contained {
        (
            VerdictCase::Unfalsifiable,
            Some(i),
            "every observable marginal family is compatible with the causal structure; \
             the scenario-only characterization already describes it",
        )
    } else if comparisons.iter().all(|c| c.extension_in_causal.holds) {
        (
            VerdictCase::CausalSufficient,
            None,
            "use the causal independences directly; scenario-derived independences are \
             implied and add nothing",
        )
    } else {
        let j = comparisons
            .iter()
            .position(|c| !c.extension_in_causal.holds)
            .expect("not all contained in causal");
        (
            VerdictCase::Incomparable,
            Some(j),
            "characterize with the causal independences over the full universe; \
             adding scenario-derived independences would be unsound",
        )
    };
    Ok(DistinguishabilityVerdict {
        case,
        comparisons,
        witness,
        partial: exts.truncated,
        guidance,
    })
}

/// Which independence set a causal characterization actually used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Independences of the indexed acyclic extension, over scenario nodes.
    Extension(usize),
    /// Causal independences over the structure's full universe.
    Causal,
    /// Causal independences plus those of the indexed extension.
    Combined(usize),
}

/// An entropic characterization that took the causal structure into
/// account, with the verdict that selected the route.
#[derive(Clone, Debug)]
pub struct CausalCharacterization {
    pub system: LinIneqSystem,
    pub verdict: DistinguishabilityVerdict,
    pub route: Route,
    /// The independences the chosen route applied, over the projection
    /// universe.
    pub ci: CiSet,
    /// Coordinates the projection eliminated, in canonical order.
    pub eliminated: Vec<Coord>,
}

/// Entropic characterization aware of a causal structure. The route
/// follows the verdict: an extension's independences when the scenario
/// cannot falsify the structure anyway, the causal independences otherwise.
/// When the constraint sets are incomparable the causal-only projection is
/// still valid and is what gets computed; only `combine = true` is rejected
/// in that case.
pub fn entropic_characterize_causal(
    m: &Hypergraph,
    g: &CausalStructure,
) -> Result<CausalCharacterization> {
    entropic_characterize_causal_with(m, g, false, None, &Guards::default())
}

/// [`entropic_characterize_causal`] with an explicit request to combine
/// scenario and causal independences, a coordinate restriction, and guards.
pub fn entropic_characterize_causal_with(
    m: &Hypergraph,
    g: &CausalStructure,
    combine: bool,
    onto: Option<&[Coord]>,
    guards: &Guards,
) -> Result<CausalCharacterization> {
    let red = hypergraph::reduce(m);
    let verdict = classify_with(&red, g, guards)?;
    if combine && verdict.case == VerdictCase::Incomparable {
        let j = verdict.witness.expect("incomparable case has a witness");
        let missing = &verdict.comparisons[j].extension_in_causal.missing;
        let mut shown = missing.iter().take(3).cloned().collect::<Vec<_>>().join(", ");
        if missing.len() > 3 {
            shown.push_str(&format!(" and {} more", missing.len() - 3));
        }
        return Err(Error::IncompatibleConstraints(format!(
            "the scenario's acyclic extensions and the causal structure impose \
             incomparable independences (extension {j}: {shown}); their combination \
             bounds the compatible set from neither side",
        )));
    }

    let exts = triangulate_scenario_with(&red, guards)?;
    let (u, ci, route) = match (verdict.case, combine) {
        (VerdictCase::Unfalsifiable, false) => {
            let w = verdict.witness.expect("containment witness");
            (
                red.universe().clone(),
                exts.extensions[w].ci.clone(),
                Route::Extension(w),
            )
        }
        (_, false) => (
            g.universe().clone(),
            g.ci(guards.max_ci_nodes)?,
            Route::Causal,
        ),
        (_, true) => {
            let w = verdict.witness.unwrap_or(0);
            let u = g.universe().clone();
            let ci = union_ci(
                &g.ci(guards.max_ci_nodes)?,
                &embed_ci(&exts.extensions[w].ci, &u)?,
            );
            (u, ci, Route::Combined(w))
        }
    };
    guard_nodes(&u, guards)?;
    let marg = marginal_coords(&red, &u)?;
    let system = project_cone(&u, &ci, &marg, onto, guards)?;
    let eliminated = crate::entropy_cone::entropy_coords(&u)
        .into_iter()
        .filter(|c| !system.coords().contains(c))
        .collect();
    Ok(CausalCharacterization {
        system,
        verdict,
        route,
        ci,
        eliminated,
    })
}

/// Projection of the intersection of per-clique entropy cones onto the
/// scenario's observable coordinates. The cheapest outer approximation:
/// only within-clique inequalities constrain the lift.
pub fn clique_approximation(m: &Hypergraph, cliques: &Hypergraph) -> Result<LinIneqSystem> {
    clique_approximation_with(m, cliques, None, &Guards::default())
}

/// [`clique_approximation`] with a coordinate restriction and guards.
pub fn clique_approximation_with(
    m: &Hypergraph,
    cliques: &Hypergraph,
    onto: Option<&[Coord]>,
    guards: &Guards,
) -> Result<LinIneqSystem> {
    let red = hypergraph::reduce(m);
    let u = red.universe().clone();
    guard_nodes(&u, guards)?;
    if cliques.universe().labels() != u.labels() {
        return Err(Error::InvalidInput(
            "clique hypergraph must cover exactly the scenario's nodes".into(),
        ));
    }
    let mut sys = LinIneqSystem::new(crate::entropy_cone::entropy_coords(&u))?;
    for clique in cliques.edges() {
        let part = crate::entropy_cone::clique_cone_embedded(&u, &clique)?;
        for r in part.eqs() {
            sys.add_eq(r.coeffs.clone(), r.rhs.clone());
        }
        for r in part.ineqs() {
            sys.add_ineq(r.coeffs.clone(), r.rhs.clone());
        }
    }
    sys.canonicalize();
    let marg = marginal_coords(&red, &u)?;
    let target = onto.unwrap_or(&marg);
    let drop: Vec<Coord> = sys
        .coords()
        .iter()
        .filter(|c| !target.contains(c))
        .cloned()
        .collect();
    fm_eliminate_with(&sys, &drop, &guards.fm)
}

/// Is `point` in the projection of `cone` onto `coords`? Decided without
/// eliminating: pin the coordinates and test feasibility of the lift.
pub fn in_projection(
    cone: &LinIneqSystem,
    coords: &[Coord],
    point: &[BigRational],
) -> Result<bool> {
    Ok(lp::feasible(&cone.with_pinned(coords, point)?))
}

/// The three outer approximations of a scenario's entropic compatible set,
/// ordered from tightest to loosest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproxLevel {
    /// Intersection over extensions of the extension-constrained
    /// projections.
    ExtensionIntersection,
    /// Projection of the unconstrained Shannon cone.
    FullProjection,
    /// Intersection over extensions of the clique-cone projections.
    CliqueIntersection,
}

impl fmt::Display for ApproxLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ApproxLevel::ExtensionIntersection => "extension-constrained intersection",
            ApproxLevel::FullProjection => "full-cone projection",
            ApproxLevel::CliqueIntersection => "clique-cone intersection",
        };
        f.write_str(s)
    }
}

/// One verified containment `smaller` within `larger`.
#[derive(Clone, Debug)]
pub struct InclusionCheck {
    pub smaller: ApproxLevel,
    pub larger: ApproxLevel,
    /// False only if a certificate contradicting the containment chain was
    /// found (which would indicate a bug, not a mathematical possibility).
    pub holds: bool,
    /// Some(true): strict, with a separating ray. Some(false): the two
    /// levels coincide. None: undecided at this size.
    pub strict: Option<bool>,
    /// A ray of `larger` outside `smaller`, when strict.
    pub separating_ray: Option<Ray>,
}

/// The approximation lattice of one scenario: the computed systems (full
/// projections only below the size threshold) and the verified inclusion
/// chain with strictness certificates.
#[derive(Clone, Debug)]
pub struct ApproximationReport {
    pub scenario: Hypergraph,
    /// Observable entropy coordinates all systems live on.
    pub coords: Vec<Coord>,
    /// Tightest level; absent above the direct-projection threshold.
    pub extension_intersection: Option<LinIneqSystem>,
    /// Middle level; absent above the direct-projection threshold.
    pub full_projection: Option<LinIneqSystem>,
    /// Loosest level; always computed.
    pub clique_intersection: LinIneqSystem,
    pub checks: Vec<InclusionCheck>,
    /// True when the extension enumeration was truncated.
    pub truncated: bool,
}

/// Computes the approximation lattice and certifies the inclusions.
/// Strictness is decided by classifying extremal rays of the looser levels
/// through exact lifted feasibility tests; above the direct-projection
/// threshold the tighter levels are used as membership oracles only.
pub fn approximation_report(m: &Hypergraph) -> Result<ApproximationReport> {
    approximation_report_with(m, &Guards::default())
}

/// [`approximation_report`] with explicit guards.
pub fn approximation_report_with(m: &Hypergraph, guards: &Guards) -> Result<ApproximationReport> {
    let red = hypergraph::reduce(m);
    let u = red.universe().clone();
    guard_nodes(&u, guards)?;
    let exts = triangulate_scenario_with(&red, guards)?;
    let marg = marginal_coords(&red, &u)?;

    let mut clique_systems = Vec::with_capacity(exts.extensions.len());
    for e in &exts.extensions {
        clique_systems.push(clique_approximation_with(&red, &e.cliques, None, guards)?);
    }
    let clique_intersection = intersect_all(&clique_systems)?;

    // Lifted cones for membership tests; equalities from independences make
    // these cheap to pin and solve.
    let lifted_full = shannon_cone(&u);
    let mut lifted_ext = Vec::with_capacity(exts.extensions.len());
    for e in &exts.extensions {
        lifted_ext.push(with_ci(&lifted_full, &e.ci)?);
    }

    let small = u.len() <= guards.direct_projection_nodes;
    let (full_projection, extension_intersection) = if small {
        let full = project_cone(&u, &CiSet::empty(u.clone()), &marg, None, guards)?;
        let mut per_ext = Vec::with_capacity(exts.extensions.len());
        for e in &exts.extensions {
            per_ext.push(project_cone(&u, &e.ci, &marg, None, guards)?);
        }
        (Some(full), Some(intersect_all(&per_ext)?))
    } else {
        (None, None)
    };

    let dd = DdOptions {
        max_coords: guards.max_ray_coords,
    };
    // Membership oracles: the computed projection when present (a row
    // evaluation), the lifted feasibility test otherwise.
    let in_level2 = |p: &[BigRational]| -> Result<bool> {
        match &full_projection {
            Some(sys) => Ok(sys.satisfied_by(p)),
            None => in_projection(&lifted_full, &marg, p),
        }
    };
    let in_level1 = |p: &[BigRational]| -> Result<bool> {
        match &extension_intersection {
            Some(sys) => Ok(sys.satisfied_by(p)),
            None => {
                for l in &lifted_ext {
                    if !in_projection(l, &marg, p)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    };

    let rays3 = enumerate_rays_with(&clique_intersection, &dd)?;
    let mut sep23: Option<Ray> = None;
    let mut sep12: Option<Ray> = None;
    for ray in rays3.all_ray_directions() {
        let p = ray.to_rationals();
        if !in_level2(&p)? {
            sep23.get_or_insert(ray);
            continue;
        }
        if sep12.is_none() && !in_level1(&p)? {
            sep12 = Some(ray);
        }
    }

    let strict23 = Some(sep23.is_some());
    let strict12 = if sep12.is_some() {
        Some(true)
    } else if let (Some(full), Some(ext)) = (&full_projection, &extension_intersection) {
        // Decide with the middle level's own rays.
        let rays2 = enumerate_rays_with(full, &dd)?;
        sep12 = rays2
            .all_ray_directions()
            .into_iter()
            .find(|r| !ext.satisfied_by(&r.to_rationals()));
        Some(sep12.is_some())
    } else if sep23.is_none() {
        // The loosest level's rays generate everything and all sit inside.
        Some(false)
    } else {
        None
    };

    // Row-level certificates for the containments themselves.
    let holds23 = clique_intersection.ineqs().iter().all(|r| {
        crate::entropy_cone::embed_row(r, &marg, &lifted_full)
            .map(|er| lp::implies_ineq(&lifted_full, &er))
            .unwrap_or(false)
    });
    let holds12 = match (&full_projection, &extension_intersection) {
        (Some(full), Some(ext)) => full
            .ineqs()
            .iter()
            .all(|r| lp::implies_ineq(ext, r))
            && full.eqs().iter().all(|r| lp::implies_eq(ext, r)),
        _ => sep12.is_none() || strict12 == Some(true),
    };

    let checks = vec![
        InclusionCheck {
            smaller: ApproxLevel::ExtensionIntersection,
            larger: ApproxLevel::FullProjection,
            holds: holds12,
            strict: strict12,
            separating_ray: sep12,
        },
        InclusionCheck {
            smaller: ApproxLevel::FullProjection,
            larger: ApproxLevel::CliqueIntersection,
            holds: holds23,
            strict: strict23,
            separating_ray: sep23,
        },
    ];

    Ok(ApproximationReport {
        scenario: red,
        coords: marg,
        extension_intersection,
        full_projection,
        clique_intersection,
        checks,
        truncated: exts.truncated,
    })
}

fn intersect_all(systems: &[LinIneqSystem]) -> Result<LinIneqSystem> {
    Ok(intersect(systems)?.system)
}

/// Sha256 of a scenario's canonical serialized form, as lowercase hex.
pub fn scenario_hash(scenario: &Hypergraph) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_string(scenario).expect("hypergraph serializes").as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Reproducibility header for an emitted system: a hash of the canonical
/// scenario, the independences applied, and the eliminated coordinates.
pub fn provenance_header(
    scenario: &Hypergraph,
    ci: Option<&CiSet>,
    eliminated: &[Coord],
) -> String {
    let hex = scenario_hash(scenario);
    let ci_lines = match ci {
        Some(c) if !c.is_empty() => c.display().join("; "),
        _ => "none".to_string(),
    };
    let elim = if eliminated.is_empty() {
        "none".to_string()
    } else {
        eliminated
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!("# input sha256 {hex}\n# independences: {ci_lines}\n# eliminated: {elim}\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vars::NodeId;

    fn n(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
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

    fn hub() -> Hypergraph {
        Hypergraph::new(&[
            vec![n("A"), n("B")],
            vec![n("B"), n("D")],
            vec![n("B"), n("C")],
        ])
        .unwrap()
    }

    /// Star DAG out of B; the second variant adds an A -> D arc.
    fn star_dag(extra_arc: bool) -> CausalStructure {
        let nodes = vec![n("A"), n("B"), n("C"), n("D")];
        let mut arcs = vec![(n("B"), n("A")), (n("B"), n("C")), (n("B"), n("D"))];
        if extra_arc {
            arcs.push((n("A"), n("D")));
        }
        CausalStructure::Dag(Digraph::new(nodes, &arcs).unwrap())
    }

    fn ic_dag() -> CausalStructure {
        CausalStructure::Dag(
            Digraph::new(
                vec![n("M"), n("X0"), n("X1"), n("Y0"), n("Y1")],
                &[
                    (n("X0"), n("M")),
                    (n("X1"), n("M")),
                    (n("M"), n("Y0")),
                    (n("M"), n("Y1")),
                ],
            )
            .unwrap(),
        )
    }

    fn ic_scenario() -> Hypergraph {
        Hypergraph::new(&[vec![n("X0"), n("Y0")], vec![n("X1"), n("Y1")], vec![n("M")]]).unwrap()
    }

    fn stmt(u: &Universe, a: &[&str], b: &[&str], c: &[&str]) -> CiStatement {
        let m = |xs: &[&str]| u.mask_of(&xs.iter().map(|s| n(s)).collect::<Vec<_>>()).unwrap();
        CiStatement::new(u, m(a), m(b), m(c)).unwrap()
    }

    #[test]
    fn chsh_has_two_extensions_with_crossing_independences() {
        let exts = triangulate_scenario(&chsh()).unwrap();
        assert_eq!(exts.extensions.len(), 2);
        assert!(!exts.truncated);
        let u = exts.scenario.universe().clone();
        let b_given_a = stmt(&u, &["B1"], &["B2"], &["A1", "A2"]);
        let a_given_b = stmt(&u, &["A1"], &["A2"], &["B1", "B2"]);
        let found_b = exts.extensions.iter().filter(|e| e.ci.contains(&b_given_a)).count();
        let found_a = exts.extensions.iter().filter(|e| e.ci.contains(&a_given_b)).count();
        assert_eq!((found_b, found_a), (1, 1));
    }

    #[test]
    fn acyclic_scenario_is_its_own_unique_extension() {
        let exts = triangulate_scenario(&hub()).unwrap();
        assert_eq!(exts.extensions.len(), 1);
        let e = &exts.extensions[0];
        assert_eq!(e.cliques.edges(), hub().edges());
        let u = exts.scenario.universe().clone();
        for (a, b) in [("A", "C"), ("C", "D"), ("D", "A")] {
            assert!(e.ci.contains(&stmt(&u, &[a], &[b], &["B"])));
        }
    }

    #[test]
    fn single_edge_extension_has_no_independences() {
        let m = Hypergraph::new(&[vec![n("A"), n("B")]]).unwrap();
        let exts = triangulate_scenario(&m).unwrap();
        assert_eq!(exts.extensions.len(), 1);
        assert!(exts.extensions[0].ci.is_empty());
    }

    #[test]
    fn single_edge_characterization_is_the_small_cone() {
        let m = Hypergraph::new(&[vec![n("A"), n("B")]]).unwrap();
        let sys = entropic_characterize(&m, None).unwrap();
        assert_eq!(
            sys.to_text(),
            "-1*H(A) + 1*H(A,B) >= 0\n\
             -1*H(B) + 1*H(A,B) >= 0\n\
             1*H(A) + 1*H(B) - 1*H(A,B) >= 0"
        );
    }

    #[test]
    fn hub_scenario_classifies_as_unfalsifiable_for_both_star_dags() {
        for extra in [false, true] {
            let v = classify(&hub(), &star_dag(extra)).unwrap();
            assert_eq!(v.case, VerdictCase::Unfalsifiable, "extra arc={extra}");
            assert_eq!(v.witness, Some(0));
            assert!(!v.partial);
        }
    }

    #[test]
    fn coarser_scenario_classifies_as_causal_sufficient() {
        let m2 = Hypergraph::new(&[vec![n("A"), n("B"), n("D")], vec![n("B"), n("C")]]).unwrap();
        let v = classify(&m2, &star_dag(false)).unwrap();
        assert_eq!(v.case, VerdictCase::CausalSufficient);
        assert!(v.comparisons.iter().all(|c| c.extension_in_causal.holds));
        assert!(v.comparisons.iter().all(|c| !c.causal_in_extension.holds));
    }

    #[test]
    fn crossing_pair_classifies_as_incomparable_with_witnesses() {
        let v = classify(&ic_scenario(), &ic_dag()).unwrap();
        assert_eq!(v.case, VerdictCase::Incomparable);
        let j = v.witness.unwrap();
        assert!(!v.comparisons[j].extension_in_causal.holds);
        assert!(!v.comparisons[j].causal_in_extension.holds);
        assert!(!v.comparisons[j].extension_in_causal.missing.is_empty());
    }

    #[test]
    fn unfalsifiable_route_matches_scenario_only_characterization() {
        let got = entropic_characterize_causal(&hub(), &star_dag(false)).unwrap();
        assert_eq!(got.route, Route::Extension(0));
        let plain = entropic_characterize(&hub(), None).unwrap();
        assert!(lp::equivalent(&got.system, &plain).unwrap());
    }

    #[test]
    fn combining_incomparable_sets_is_rejected() {
        let err = entropic_characterize_causal_with(
            &ic_scenario(),
            &ic_dag(),
            true,
            None,
            &Guards::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompatibleConstraints(_)));
    }

    #[test]
    fn incomparable_default_route_is_causal_only() {
        let got = entropic_characterize_causal(&ic_scenario(), &ic_dag()).unwrap();
        assert_eq!(got.route, Route::Causal);
        assert_eq!(got.verdict.case, VerdictCase::Incomparable);
        // Coordinates of the two observed pairs plus the message variable.
        assert_eq!(got.system.coords().len(), 7);
    }

    #[test]
    fn single_edge_report_collapses_to_one_cone() {
        let m = Hypergraph::new(&[vec![n("A"), n("B")]]).unwrap();
        let r = approximation_report(&m).unwrap();
        assert_eq!(r.coords.len(), 3);
        for c in &r.checks {
            assert!(c.holds);
            assert_eq!(c.strict, Some(false), "{} vs {}", c.smaller, c.larger);
            assert!(c.separating_ray.is_none());
        }
        let ext = r.extension_intersection.unwrap();
        let full = r.full_projection.unwrap();
        assert!(lp::equivalent(&ext, &full).unwrap());
        assert!(lp::equivalent(&full, &r.clique_intersection).unwrap());
    }

    #[test]
    fn chsh_report_chain_is_consistent() {
        let r = approximation_report(&chsh()).unwrap();
        assert_eq!(r.coords.len(), 8);
        for c in &r.checks {
            assert!(c.holds);
            if c.strict == Some(true) {
                let ray = c.separating_ray.as_ref().unwrap().to_rationals();
                let smaller = match c.smaller {
                    ApproxLevel::ExtensionIntersection => {
                        r.extension_intersection.as_ref().unwrap()
                    }
                    ApproxLevel::FullProjection => r.full_projection.as_ref().unwrap(),
                    ApproxLevel::CliqueIntersection => &r.clique_intersection,
                };
                assert!(!smaller.satisfied_by(&ray));
            }
            if c.strict == Some(false) {
                let pair = (
                    match c.smaller {
                        ApproxLevel::ExtensionIntersection => {
                            r.extension_intersection.clone().unwrap()
                        }
                        ApproxLevel::FullProjection => r.full_projection.clone().unwrap(),
                        ApproxLevel::CliqueIntersection => r.clique_intersection.clone(),
                    },
                    match c.larger {
                        ApproxLevel::ExtensionIntersection => {
                            r.extension_intersection.clone().unwrap()
                        }
                        ApproxLevel::FullProjection => r.full_projection.clone().unwrap(),
                        ApproxLevel::CliqueIntersection => r.clique_intersection.clone(),
                    },
                );
                assert!(lp::equivalent(&pair.0, &pair.1).unwrap());
            }
        }
    }

    #[test]
    fn provenance_header_is_deterministic_and_hash_shaped() {
        let h1 = provenance_header(&chsh(), None, &[]);
        let h2 = provenance_header(&chsh(), None, &[]);
        assert_eq!(h1, h2);
        let hex = h1
            .lines()
            .next()
            .unwrap()
            .rsplit(' ')
            .next()
            .unwrap()
            .to_string();
        assert_eq!(hex.len(), 64);
        assert!(hex.chars().all(|c| c.is_ascii_hexdigit()));
        let other = provenance_header(&hub(), None, &[]);
        assert_ne!(h1.lines().next(), other.lines().next());
    }

    #[test]
    fn sampled_entropy_vectors_project_into_every_level() {
        use crate::distributions::{entropy_vector, ProbTable};
        use crate::entropy_cone::{entropy_point, satisfies_f64};
        use num::BigRational;
        use rand::{Rng, SeedableRng};

        let m = chsh();
        let full = project_shannon(&m).unwrap();
        let constrained = entropic_characterize(&m, None).unwrap();
        let exts = triangulate_scenario(&m).unwrap();
        let cliques =
            clique_approximation(&m, &exts.extensions[0].cliques).unwrap();
        let coords = full.coords().to_vec();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let vars: Vec<(NodeId, usize)> = ["A1", "A2", "B1", "B2"]
            .iter()
            .map(|s| (n(s), 2))
            .collect();
        for _ in 0..10 {
            let raw: Vec<i64> = (0..16).map(|_| rng.gen_range(1..40)).collect();
            let total: i64 = raw.iter().sum();
            let entries: Vec<(Vec<usize>, BigRational)> = raw
                .iter()
                .enumerate()
                .map(|(k, &w)| {
                    let outcome = (0..4).map(|i| k >> i & 1).collect();
                    (outcome, BigRational::new(w.into(), total.into()))
                })
                .collect();
            let p = ProbTable::from_weights(&vars, &entries).unwrap();
            let point = entropy_point(&coords, &entropy_vector(&p)).unwrap();
            assert!(satisfies_f64(&full, &point));
            assert!(satisfies_f64(&constrained, &point));
            assert!(satisfies_f64(&cliques, &point));
        }
    }

    #[test]
    fn unfalsifiable_verdict_extends_to_causal_models() {
        use crate::distributions::{is_ci_exact, vorobev_extend, MarginalScenario, ProbTable};
        use num::BigRational;
        use rand::{Rng, SeedableRng};

        let m = hub();
        let g = star_dag(false);
        let v = classify(&m, &g).unwrap();
        assert_eq!(v.case, VerdictCase::Unfalsifiable);
        let ci = g.ci(10).unwrap();
        let gu = g.universe().clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let vars: Vec<(NodeId, usize)> = ["A", "B", "C", "D"].iter().map(|s| (n(s), 2)).collect();
        for _ in 0..8 {
            let raw: Vec<i64> = (0..16).map(|_| rng.gen_range(1..20)).collect();
            let total: i64 = raw.iter().sum();
            let entries: Vec<(Vec<usize>, BigRational)> = raw
                .iter()
                .enumerate()
                .map(|(k, &w)| {
                    let outcome = (0..4).map(|i| k >> i & 1).collect();
                    (outcome, BigRational::new(w.into(), total.into()))
                })
                .collect();
            let p = ProbTable::from_weights(&vars, &entries).unwrap();
            let scenario = MarginalScenario::from_joint(&p, &m).unwrap();
            let q = vorobev_extend(&scenario).unwrap();
            for s in ci.iter() {
                let names = |mask| gu.set_of(mask);
                assert!(is_ci_exact(&q, &names(s.a()), &names(s.b()), &names(s.c())).unwrap());
            }
        }
    }
}
