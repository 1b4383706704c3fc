use std::time::Instant;

use causal_marginals::catalog;
use causal_marginals::corr_polytope::{bell_project, BellMode};
use causal_marginals::pipeline::{entropic_characterize_with, project_shannon_with, Guards};
use causal_marginals::vars::NodeId;

fn main() {
    let guards = Guards::default();
    let which: Vec<String> = std::env::args().skip(1).collect();
    let want = |k: &str| which.is_empty() || which.iter().any(|w| w == k);

    if want("chsh") {
        let m = catalog::chsh_scenario();
        let cards: Vec<(NodeId, usize)> = m
            .universe()
            .labels()
            .iter()
            .map(|n| (n.clone(), 2))
            .collect();
        let t = Instant::now();
        let a = bell_project(&m, &cards, BellMode::ViaTriangulation).unwrap();
        println!("chsh cliques: {:?} rows={} ineqs={}", t.elapsed(), a.eqs().len(), a.ineqs().len());
        let t = Instant::now();
        let b = bell_project(&m, &cards, BellMode::Direct).unwrap();
        println!("chsh direct: {:?} rows={} ineqs={}", t.elapsed(), b.eqs().len(), b.ineqs().len());
    }

    if want("eq29") {
        let m = catalog::nonshannon_scenario();
        let coords = catalog::nonshannon_coords();
        let t = Instant::now();
        let c = entropic_characterize_with(&m, None, Some(&coords), &guards).unwrap();
        println!("eq29 constrained: {:?} rows={}", t.elapsed(), c.ineqs().len());
        let t = Instant::now();
        let u = project_shannon_with(&m, Some(&coords), &guards).unwrap();
        println!("eq29 unconstrained: {:?} rows={}", t.elapsed(), u.ineqs().len());
    }

    if want("bell33") {
        let t = Instant::now();
        let lines = catalog::reproduce("bell33", &guards).unwrap();
        println!("bell33: {:?}", t.elapsed());
        for l in &lines {
            println!("  {l}");
        }
    }

    if want("ic") {
        let t = Instant::now();
        let lines = catalog::reproduce("infocausality", &guards).unwrap();
        println!("ic: {:?} ({} lines)", t.elapsed(), lines.len());
    }
}
