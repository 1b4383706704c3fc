//! Command-line front end: triangulation, classification, inequality
//! derivation and the approximation report over JSON-described inputs.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use causal_marginals::catalog;
use causal_marginals::corr_polytope::{bell_project_with, BellMode, BellOptions};
use causal_marginals::entropy_cone::entropy_coords;
use causal_marginals::hypergraph::{self, Digraph, Graph, Hypergraph};
use causal_marginals::pipeline::{
    approximation_report_with, classify_with, entropic_characterize_causal_with,
    entropic_characterize_with, provenance_header, scenario_hash, scenario_independences,
    ApproximationReport, CausalStructure, DistinguishabilityVerdict, Guards, Route,
};
use causal_marginals::polyhedra::{Coord, LinIneqSystem};
use causal_marginals::vars::NodeId;
use causal_marginals::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "causal-marginals", version, about = "Marginal scenarios, their acyclic extensions and exact Bell-type inequality systems")]
struct Cli {
    /// Worker threads for the data-parallel stages (0 keeps the default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct StructureArgs {
    /// Causal DAG as JSON {"nodes": [..], "arcs": [["X","Y"], ..]}.
    #[arg(long, conflicts_with = "mrf")]
    dag: Option<PathBuf>,
    /// Markov random field as JSON {"nodes": [..], "edges": [["X","Y"], ..]}.
    #[arg(long)]
    mrf: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbMode {
    /// Project the full joint simplex.
    Direct,
    /// Per-clique simplexes coupled along a junction tree, then project.
    Cliques,
}

#[derive(Subcommand)]
enum Cmd {
    /// List a scenario's minimal acyclic extensions and their independences.
    Triangulate {
        /// Scenario hypergraph as JSON {"nodes": [..], "edges": [[..], ..]}.
        #[arg(long)]
        scenario: PathBuf,
        /// Override the node-count guard.
        #[arg(long)]
        max_nodes: Option<usize>,
    },
    /// Decide whether a scenario can falsify a causal structure.
    Classify {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        structure: StructureArgs,
        #[arg(long)]
        max_nodes: Option<usize>,
    },
    /// Entropic inequality system of a scenario, optionally aware of a
    /// causal structure.
    DeriveEntropic {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        structure: StructureArgs,
        /// Keep only these entropy coordinates: sets split by ';', nodes by
        /// ',', e.g. "B;C;A,D".
        #[arg(long)]
        coords: Option<String>,
        /// With a causal structure: also impose the scenario's own
        /// extension independences (rejected when the sets are
        /// incomparable).
        #[arg(long)]
        scenario_ci: bool,
        #[arg(long)]
        max_nodes: Option<usize>,
    },
    /// Probability-space inequality system of a pairwise scenario.
    DeriveProb {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = ProbMode::Cliques)]
        mode: ProbMode,
        /// Outcome counts as "A=2,B=3"; unlisted variables are binary.
        #[arg(long)]
        cards: Option<String>,
    },
    /// Compute the three outer approximations of a scenario and certify
    /// their inclusion chain.
    Report {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        max_nodes: Option<usize>,
    },
    /// Run a bundled example end to end.
    Reproduce {
        /// One of: chsh, eq29, bell33, m1g1, m2g1, infocausality.
        id: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_pool(cli.jobs);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::GuardExceeded { .. } => 2,
        Error::IncompatibleConstraints(_) => 3,
        Error::InvalidInput(_) | Error::Inconsistent(_) | Error::Json(_) => 4,
        Error::Io(_) => 1,
    }
}

#[cfg(feature = "parallel")]
fn init_pool(jobs: usize) {
    if jobs > 0 {
        // Ignored if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_pool(_: usize) {}

fn guards_with(max_nodes: Option<usize>) -> Guards {
    let mut g = Guards::default();
    if let Some(n) = max_nodes {
        g.max_nodes = n;
        g.max_enumeration_nodes = n;
        g.max_ci_nodes = n;
    }
    g
}

fn load_scenario(path: &PathBuf) -> Result<Hypergraph> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn load_structure(args: &StructureArgs) -> Result<Option<CausalStructure>> {
    match (&args.dag, &args.mrf) {
        (Some(p), None) => {
            let d: Digraph = serde_json::from_str(&fs::read_to_string(p)?)?;
            Ok(Some(CausalStructure::Dag(d)))
        }
        (None, Some(p)) => {
            let g: Graph = serde_json::from_str(&fs::read_to_string(p)?)?;
            Ok(Some(CausalStructure::Mrf(g)))
        }
        (None, None) => Ok(None),
        (Some(_), Some(_)) => unreachable!("clap rejects --dag with --mrf"),
    }
}

fn require_structure(args: &StructureArgs) -> Result<CausalStructure> {
    load_structure(args)?.ok_or_else(|| {
        Error::InvalidInput("a causal structure is required: pass --dag or --mrf".into())
    })
}

fn parse_coords(list: &str) -> Result<Vec<Coord>> {
    let mut out = Vec::new();
    for part in list.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let inner = part
            .strip_prefix("H(")
            .and_then(|s| s.strip_suffix(')'))
            .unwrap_or(part);
        let nodes: Vec<NodeId> = inner
            .split(',')
            .map(|s| NodeId::new(s.trim()))
            .collect::<Result<_>>()?;
        out.push(Coord::entropy(nodes));
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("--coords selected nothing".into()));
    }
    Ok(out)
}

fn parse_cards(spec: Option<&String>, m: &Hypergraph) -> Result<Vec<(NodeId, usize)>> {
    let mut cards: Vec<(NodeId, usize)> = m
        .universe()
        .labels()
        .iter()
        .map(|n| (n.clone(), 2))
        .collect();
    if let Some(s) = spec {
        for part in s.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (name, k) = part.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("bad --cards entry \"{part}\", want NAME=COUNT"))
            })?;
            let id = NodeId::new(name.trim())?;
            let k: usize = k.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("bad outcome count in \"{part}\""))
            })?;
            let slot = cards.iter_mut().find(|(n, _)| *n == id).ok_or_else(|| {
                Error::InvalidInput(format!("--cards names unknown variable {name}"))
            })?;
            slot.1 = k;
        }
    }
    Ok(cards)
}

fn emit(cli: &Cli, text: String, value: serde_json::Value) -> Result<()> {
    let body = match cli.format {
        Format::Text => text,
        Format::Json => format!("{:#}\n", value),
    };
    match &cli.out {
        Some(path) => fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn system_json(header: &str, sys: &LinIneqSystem) -> serde_json::Value {
    json!({
        "header": header.lines().collect::<Vec<_>>(),
        "coords": sys.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "rows": sys.to_text().lines().collect::<Vec<_>>(),
    })
}

fn verdict_json(v: &DistinguishabilityVerdict) -> serde_json::Value {
    json!({
        "case": v.case.to_string(),
        "witness": v.witness,
        "partial": v.partial,
        "comparisons": v.comparisons.iter().map(|c| json!({
            "causal_in_extension": {
                "holds": c.causal_in_extension.holds,
                "missing": c.causal_in_extension.missing,
            },
            "extension_in_causal": {
                "holds": c.extension_in_causal.holds,
                "missing": c.extension_in_causal.missing,
            },
        })).collect::<Vec<_>>(),
        "guidance": v.guidance,
    })
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Triangulate { scenario, max_nodes } => {
            let m = load_scenario(scenario)?;
            let guards = guards_with(*max_nodes);
            let exts = causal_marginals::pipeline::triangulate_scenario_with(&m, &guards)?;
            let mut lines = Vec::new();
            for (i, e) in exts.extensions.iter().enumerate() {
                let cliques: Vec<String> = e
                    .cliques
                    .edges()
                    .iter()
                    .map(|c| {
                        let ls: Vec<&str> = c.iter().map(|x| x.as_str()).collect();
                        format!("{{{}}}", ls.join(","))
                    })
                    .collect();
                lines.push(format!(
                    "extension {i}: cliques {}; independences: {}",
                    cliques.join(" "),
                    if e.ci.is_empty() {
                        "none".to_string()
                    } else {
                        e.ci.display().join(" ")
                    }
                ));
            }
            if exts.truncated {
                lines.push("enumeration truncated at the configured cap".into());
            }
            let value = json!({
                "extensions": exts.extensions.iter().map(|e| json!({
                    "cliques": e.cliques.edges().iter().map(|c| {
                        c.iter().map(|x| x.as_str().to_string()).collect::<Vec<_>>()
                    }).collect::<Vec<_>>(),
                    "independences": e.ci.display(),
                })).collect::<Vec<_>>(),
                "truncated": exts.truncated,
            });
            emit(cli, lines.join("\n") + "\n", value)
        }
        Cmd::Classify { scenario, structure, max_nodes } => {
            let m = load_scenario(scenario)?;
            let g = require_structure(structure)?;
            let guards = guards_with(*max_nodes);
            let v = classify_with(&m, &g, &guards)?;
            let lines = catalog::verdict_lines("classification", &v);
            emit(cli, lines.join("\n") + "\n", verdict_json(&v))
        }
        Cmd::DeriveEntropic { scenario, structure, coords, scenario_ci, max_nodes } => {
            let m = load_scenario(scenario)?;
            let guards = guards_with(*max_nodes);
            let onto = coords.as_deref().map(parse_coords).transpose()?;
            match load_structure(structure)? {
                None => {
                    if *scenario_ci {
                        return Err(Error::InvalidInput(
                            "--scenario-ci needs a causal structure to combine with".into(),
                        ));
                    }
                    let sys =
                        entropic_characterize_with(&m, None, onto.as_deref(), &guards)?;
                    let red = hypergraph::reduce(&m);
                    let ci = scenario_independences(&red, &guards)?;
                    let eliminated: Vec<Coord> = entropy_coords(red.universe())
                        .into_iter()
                        .filter(|c| !sys.coords().contains(c))
                        .collect();
                    let header = provenance_header(&m, Some(&ci), &eliminated);
                    let text = format!("{header}{}\n", sys.to_text());
                    emit(cli, text, system_json(&header, &sys))
                }
                Some(g) => {
                    let ch = entropic_characterize_causal_with(
                        &m,
                        &g,
                        *scenario_ci,
                        onto.as_deref(),
                        &guards,
                    )?;
                    let header = provenance_header(&m, Some(&ch.ci), &ch.eliminated);
                    let route = match ch.route {
                        Route::Extension(i) => format!("extension {i}"),
                        Route::Causal => "causal".to_string(),
                        Route::Combined(i) => format!("combined with extension {i}"),
                    };
                    let text = format!(
                        "# route: {route}\n{header}{}\n",
                        ch.system.to_text()
                    );
                    let mut value = system_json(&header, &ch.system);
                    value["route"] = json!(route);
                    value["verdict"] = verdict_json(&ch.verdict);
                    emit(cli, text, value)
                }
            }
        }
        Cmd::DeriveProb { scenario, mode, cards } => {
            let m = load_scenario(scenario)?;
            let cards = parse_cards(cards.as_ref(), &m)?;
            let mode = match mode {
                ProbMode::Direct => BellMode::Direct,
                ProbMode::Cliques => BellMode::ViaTriangulation,
            };
            let sys = bell_project_with(&m, &cards, mode, &BellOptions::default())?;
            let header = format!(
                "# input sha256 {}\n# mode: {}\n",
                scenario_hash(&m),
                match mode {
                    BellMode::Direct => "direct joint-simplex projection",
                    BellMode::ViaTriangulation => "coupled per-clique projection",
                }
            );
            let text = format!("{header}{}\n", sys.to_text());
            emit(cli, text, system_json(&header, &sys))
        }
        Cmd::Report { scenario, max_nodes } => {
            let m = load_scenario(scenario)?;
            let guards = guards_with(*max_nodes);
            let r = approximation_report_with(&m, &guards)?;
            emit(cli, report_text(&r), report_json(&r))
        }
        Cmd::Reproduce { id } => {
            let lines = catalog::reproduce(id, &Guards::default())?;
            let value = json!({ "id": id, "lines": lines });
            emit(cli, lines.join("\n") + "\n", value)
        }
    }
}

fn report_text(r: &ApproximationReport) -> String {
    let mut out = Vec::new();
    for c in &r.checks {
        let strict = match c.strict {
            Some(true) => "strict".to_string(),
            Some(false) => "the two coincide".to_string(),
            None => "strictness undecided at this size".to_string(),
        };
        out.push(format!(
            "{} within {}: {}; {}",
            c.smaller,
            c.larger,
            if c.holds { "holds" } else { "VIOLATED" },
            strict
        ));
        if let Some(ray) = &c.separating_ray {
            let dir: Vec<String> = ray.direction.iter().map(|x| x.to_string()).collect();
            out.push(format!("  separating ray: [{}]", dir.join(", ")));
        }
    }
    if r.truncated {
        out.push("extension enumeration truncated; report covers the enumerated ones".into());
    }
    let mut sections = vec![out.join("\n")];
    if let Some(s) = &r.extension_intersection {
        sections.push(format!("== extension-constrained intersection ==\n{}", s.to_text()));
    }
    if let Some(s) = &r.full_projection {
        sections.push(format!("== full-cone projection ==\n{}", s.to_text()));
    }
    sections.push(format!(
        "== clique-cone intersection ==\n{}",
        r.clique_intersection.to_text()
    ));
    sections.join("\n") + "\n"
}

fn report_json(r: &ApproximationReport) -> serde_json::Value {
    let sys = |s: &LinIneqSystem| s.to_text().lines().map(str::to_string).collect::<Vec<_>>();
    json!({
        "coords": r.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "checks": r.checks.iter().map(|c| json!({
            "smaller": c.smaller.to_string(),
            "larger": c.larger.to_string(),
            "holds": c.holds,
            "strict": c.strict,
            "separating_ray": c.separating_ray.as_ref().map(|ray| {
                ray.direction.iter().map(|x| x.to_string()).collect::<Vec<_>>()
            }),
        })).collect::<Vec<_>>(),
        "extension_intersection": r.extension_intersection.as_ref().map(sys),
        "full_projection": r.full_projection.as_ref().map(sys),
        "clique_intersection": sys(&r.clique_intersection),
        "truncated": r.truncated,
    })
}
