//! Bundled example inputs and runs for the CLI's `reproduce` subcommand.
//!
//! Each entry builds a small scenario or causal structure, runs the relevant
//! pipeline stage, and renders the headline results as printable lines. The
//! same builders back the integration tests, so the CLI and the test suite
//! agree on what these examples are.

use crate::entropy_cone::{entropy_coords, marginal_coords, shannon_cone, with_ci};
use crate::hypergraph::{Digraph, Hypergraph};
use crate::pipeline::{
    classify_with, clique_approximation_with, entropic_characterize_causal_with,
    entropic_characterize_with, in_projection, provenance_header, triangulate_scenario_with,
    CausalStructure, DistinguishabilityVerdict, Guards, Route,
};
use crate::polyhedra::{enumerate_rays_with, intersect, Coord, DdOptions};
use crate::vars::NodeId;
use crate::{Error, Result};

/// Every id `reproduce` accepts, in display order.
pub const EXAMPLE_IDS: [&str; 6] = ["chsh", "eq29", "bell33", "m1g1", "m2g1", "infocausality"];

fn n(label: &str) -> NodeId {
    NodeId::new(label).expect("catalog labels are valid")
}

/// Two-party Bell scenario, two binary settings per side.
pub fn chsh_scenario() -> Hypergraph {
    Hypergraph::new(&[
        vec![n("A1"), n("B1")],
        vec![n("A1"), n("B2")],
        vec![n("A2"), n("B1")],
        vec![n("A2"), n("B2")],
    ])
    .expect("valid edges")
}

/// All-binary cardinalities for the CHSH observables.
pub fn chsh_cards() -> Vec<(NodeId, usize)> {
    ["A1", "A2", "B1", "B2"].iter().map(|s| (n(s), 2)).collect()
}

/// Bipartite Bell scenario with three settings per party.
pub fn bell33_scenario() -> Hypergraph {
    let edges: Vec<Vec<NodeId>> = (1..=3)
        .flat_map(|i| (1..=3).map(move |j| vec![n(&format!("A{i}")), n(&format!("B{j}"))]))
        .collect();
    Hypergraph::new(&edges).expect("valid edges")
}

/// Five-variable scenario whose 2-section is already chordal, so it has the
/// single acyclic extension {ABCD, ABCE} and the induced independence
/// (D _||_ E | A,B,C). Its constrained projection carries non-Shannon rows.
pub fn nonshannon_scenario() -> Hypergraph {
    Hypergraph::new(&[
        vec![n("A"), n("B"), n("C")],
        vec![n("B"), n("C"), n("D")],
        vec![n("A"), n("E")],
        vec![n("B"), n("E")],
        vec![n("C"), n("E")],
        vec![n("A"), n("D")],
    ])
    .expect("valid edges")
}

/// The eleven observable entropies the non-Shannon rows are stated over.
pub fn nonshannon_coords() -> Vec<Coord> {
    let sets: [&[&str]; 11] = [
        &["B"],
        &["C"],
        &["D"],
        &["A", "D"],
        &["A", "E"],
        &["B", "D"],
        &["B", "E"],
        &["C", "D"],
        &["C", "E"],
        &["A", "B", "C"],
        &["B", "C", "D"],
    ];
    sets.iter()
        .map(|s| Coord::entropy(s.iter().map(|x| n(x))))
        .collect()
}

/// Hub scenario: three pair edges sharing the node B.
pub fn hub_scenario() -> Hypergraph {
    Hypergraph::new(&[
        vec![n("A"), n("B")],
        vec![n("B"), n("D")],
        vec![n("B"), n("C")],
    ])
    .expect("valid edges")
}

/// Coarser hub scenario: A, B, D observed jointly.
pub fn coarse_hub_scenario() -> Hypergraph {
    Hypergraph::new(&[vec![n("A"), n("B"), n("D")], vec![n("B"), n("C")]]).expect("valid edges")
}

/// Star DAG: B a common parent of A, C and D.
pub fn star_dag() -> CausalStructure {
    CausalStructure::Dag(
        Digraph::new(
            vec![n("A"), n("B"), n("C"), n("D")],
            &[(n("B"), n("A")), (n("B"), n("C")), (n("B"), n("D"))],
        )
        .expect("valid arcs"),
    )
}

/// Star DAG with the extra arc A -> D.
pub fn star_dag_extended() -> CausalStructure {
    CausalStructure::Dag(
        Digraph::new(
            vec![n("A"), n("B"), n("C"), n("D")],
            &[
                (n("B"), n("A")),
                (n("B"), n("C")),
                (n("B"), n("D")),
                (n("A"), n("D")),
            ],
        )
        .expect("valid arcs"),
    )
}

/// Information-causality structure: two senders X0, X1 feed a message M,
/// which both receivers Y0, Y1 read.
pub fn info_causality_dag() -> CausalStructure {
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
        .expect("valid arcs"),
    )
}

/// Observables of the information-causality protocol: each sender jointly
/// with its receiver, the message alone.
pub fn info_causality_scenario() -> Hypergraph {
    Hypergraph::new(&[
        vec![n("X0"), n("Y0")],
        vec![n("X1"), n("Y1")],
        vec![n("M")],
    ])
    .expect("valid edges")
}

fn fmt_edge(edge: &[NodeId]) -> String {
    let labels: Vec<&str> = edge.iter().map(|x| x.as_str()).collect();
    format!("{{{}}}", labels.join(","))
}

fn fmt_edges(h: &Hypergraph) -> String {
    h.edges()
        .iter()
        .map(|e| fmt_edge(e))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders a classifier verdict, one fact per line.
pub fn verdict_lines(title: &str, v: &DistinguishabilityVerdict) -> Vec<String> {
    let mut out = vec![title.to_string(), format!("case: {}", v.case)];
    if let Some(w) = v.witness {
        out.push(format!("witness extension: {w}"));
    }
    if v.partial {
        out.push("verdict partial: extension enumeration was truncated".into());
    }
    for (i, c) in v.comparisons.iter().enumerate() {
        let side = |report: &crate::causal::InclusionReport| {
            if report.holds {
                "yes".to_string()
            } else {
                format!("no, missing {}", report.missing.join(" "))
            }
        };
        out.push(format!(
            "extension {i}: causal within extension: {}; extension within causal: {}",
            side(&c.causal_in_extension),
            side(&c.extension_in_causal)
        ));
    }
    out.push(format!("guidance: {}", v.guidance));
    out
}

fn chsh_lines(guards: &Guards) -> Result<Vec<String>> {
    let m = chsh_scenario();
    let exts = triangulate_scenario_with(&m, guards)?;
    let mut out = vec![format!("scenario: {}", fmt_edges(&m))];
    for (i, e) in exts.extensions.iter().enumerate() {
        out.push(format!(
            "extension {i}: cliques {}; independences: {}",
            fmt_edges(&e.cliques),
            e.ci.display().join(" ")
        ));
    }
    Ok(out)
}

fn nonshannon_lines(guards: &Guards) -> Result<Vec<String>> {
    let m = nonshannon_scenario();
    let exts = triangulate_scenario_with(&m, guards)?;
    let target = nonshannon_coords();
    let sys = entropic_characterize_with(&m, None, Some(&target), guards)?;
    let u = m.universe().clone();
    let eliminated: Vec<Coord> = entropy_coords(&u)
        .into_iter()
        .filter(|c| !target.contains(c))
        .collect();
    let header = provenance_header(&m, Some(&exts.extensions[0].ci), &eliminated);
    let mut out: Vec<String> = header.lines().map(str::to_string).collect();
    out.extend(sys.to_text().lines().map(str::to_string));
    Ok(out)
}

fn bell33_lines(guards: &Guards) -> Result<Vec<String>> {
    let m = bell33_scenario();
    let u = m.universe().clone();
    let exts = triangulate_scenario_with(&m, guards)?;
    let marg = marginal_coords(&m, &u)?;
    let dd = DdOptions {
        max_coords: guards.max_ray_coords,
    };

    let systems: Vec<_> = exts
        .extensions
        .iter()
        .map(|e| clique_approximation_with(&m, &e.cliques, None, guards))
        .collect::<Result<_>>()?;
    let first_rays = enumerate_rays_with(&systems[0], &dd)?.all_ray_directions();
    let full = shannon_cone(&u);
    let mut outside = 0usize;
    for r in &first_rays {
        if !in_projection(&full, &marg, &r.to_rationals())? {
            outside += 1;
        }
    }
    let mut out = vec![
        format!(
            "clique-cone projection of extension 0 ({}): {} extremal rays",
            fmt_edges(&exts.extensions[0].cliques),
            first_rays.len()
        ),
        format!("rays outside the full-cone projection: {outside}"),
    ];

    let inter = intersect(&systems)?.system;
    let inter_rays = enumerate_rays_with(&inter, &dd)?.all_ray_directions();
    let mut all_inside = true;
    for r in &inter_rays {
        let p = r.to_rationals();
        if !in_projection(&full, &marg, &p)? {
            all_inside = false;
        }
        for e in &exts.extensions {
            let constrained = with_ci(&full, &e.ci)?;
            if !in_projection(&constrained, &marg, &p)? {
                all_inside = false;
            }
        }
    }
    out.push(format!(
        "intersection over all extensions: {} rays, all inside the full and every \
         extension-constrained projection: {all_inside}",
        inter_rays.len()
    ));
    Ok(out)
}

fn info_causality_lines(guards: &Guards) -> Result<Vec<String>> {
    let m = info_causality_scenario();
    let g = info_causality_dag();
    let ch = entropic_characterize_causal_with(&m, &g, false, None, guards)?;
    let mut out = verdict_lines("information-causality scenario vs its structure", &ch.verdict);
    let route = match ch.route {
        Route::Extension(i) => format!("route: independences of extension {i}"),
        Route::Causal => "route: causal independences over the full universe".to_string(),
        Route::Combined(i) => format!("route: causal independences combined with extension {i}"),
    };
    out.push(route);
    let header = provenance_header(&m, Some(&ch.ci), &ch.eliminated);
    out.extend(header.lines().map(str::to_string));
    out.extend(ch.system.to_text().lines().map(str::to_string));
    Ok(out)
}

/// Runs one bundled example end to end; lines are stable across runs.
pub fn reproduce(id: &str, guards: &Guards) -> Result<Vec<String>> {
    match id {
        "chsh" => chsh_lines(guards),
        "eq29" => nonshannon_lines(guards),
        "bell33" => bell33_lines(guards),
        "m1g1" => Ok(verdict_lines(
            "hub scenario vs star DAG",
            &classify_with(&hub_scenario(), &star_dag(), guards)?,
        )),
        "m2g1" => Ok(verdict_lines(
            "coarse hub scenario vs star DAG",
            &classify_with(&coarse_hub_scenario(), &star_dag(), guards)?,
        )),
        "infocausality" => info_causality_lines(guards),
        other => Err(Error::InvalidInput(format!(
            "unknown example \"{other}\"; available: {}",
            EXAMPLE_IDS.join(", ")
        ))),
    }
}
