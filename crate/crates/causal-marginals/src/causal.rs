//! Conditional independence structures of causal models.
//!
//! A directed acyclic graph induces independences through d-separation; an
//! undirected model induces them through plain graph separation. Both are
//! enumerated into [`CiSet`]s over a common universe so that implication
//! between models reduces to set inclusion. Enumeration materializes the full
//! closure over all disjoint triples, which both separation criteria support
//! (they are compositional), so no symbolic closure pass is needed.

use crate::hypergraph::{separates_masks, Digraph, Graph};
use crate::vars::{Mask, NodeId, Universe};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// One conditional independence statement `a` independent of `b` given `c`.
///
/// Canonical form: `a` and `b` nonempty and disjoint from each other and from
/// `c`, with `a <= b` in the canonical set order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CiStatement {
    a: Mask,
    b: Mask,
    c: Mask,
}

impl CiStatement {
    /// Builds a canonicalized statement; swaps sides if needed.
    pub fn new(u: &Universe, a: Mask, b: Mask, c: Mask) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidInput(
                "independence statement needs nonempty sides".into(),
            ));
        }
        if a & b != 0 || a & c != 0 || b & c != 0 {
            return Err(Error::InvalidInput(
                "independence statement sets must be pairwise disjoint".into(),
            ));
        }
        let (a, b) = if u.cmp_sets(a, b) == Ordering::Greater {
            (b, a)
        } else {
            (a, b)
        };
        Ok(CiStatement { a, b, c })
    }

    /// Left side mask.
    pub fn a(&self) -> Mask {
        self.a
    }

    /// Right side mask.
    pub fn b(&self) -> Mask {
        self.b
    }

    /// Conditioning mask.
    pub fn c(&self) -> Mask {
        self.c
    }

    /// All mentioned variables.
    pub fn support(&self) -> Mask {
        self.a | self.b | self.c
    }

    /// Renders as `(A _||_ B | C)` with label lists.
    pub fn display(&self, u: &Universe) -> String {
        format!(
            "({} _||_ {} | {})",
            u.format_set(self.a),
            u.format_set(self.b),
            u.format_set(self.c)
        )
    }
}

/// A set of conditional independence statements over a fixed universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiSet {
    universe: Universe,
    statements: BTreeSet<(u32, Mask, Mask, Mask)>,
}

impl CiSet {
    /// Empty set over `universe`.
    pub fn empty(universe: Universe) -> Self {
        CiSet {
            universe,
            statements: BTreeSet::new(),
        }
    }

    /// The universe of discourse.
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Inserts a statement.
    pub fn insert(&mut self, s: CiStatement) {
        self.statements
            .insert((s.support().count_ones(), s.a, s.b, s.c));
    }

    /// Number of statements.
    pub fn len(&self) -> usize {
        self.statements.len()
    }

    /// True when no statement is present.
    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Iterates statements in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = CiStatement> + '_ {
        self.statements
            .iter()
            .map(|&(_, a, b, c)| CiStatement { a, b, c })
    }

    /// Membership test for a canonicalized statement.
    pub fn contains(&self, s: &CiStatement) -> bool {
        self.statements
            .contains(&(s.support().count_ones(), s.a, s.b, s.c))
    }

    /// Keeps only statements whose variables all lie in `keep`, re-indexed to
    /// the sub-universe of `keep`.
    pub fn restrict(&self, keep: &[NodeId]) -> Result<CiSet> {
        let sub = Universe::new(keep.to_vec())?;
        let keep_mask = self.universe.mask_of(sub.labels())?;
        let mut to_sub = vec![usize::MAX; self.universe.len()];
        for (i, label) in sub.labels().iter().enumerate() {
            to_sub[self.universe.index_of(label).expect("label in superset")] = i;
        }
        let remap = |m: Mask| -> Mask {
            let mut rest = m;
            let mut out = 0;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                out |= 1 << to_sub[j];
            }
            out
        };
        let mut out = CiSet::empty(sub);
        for s in self.iter() {
            if s.support() & !keep_mask == 0 {
                let t = CiStatement {
                    a: remap(s.a),
                    b: remap(s.b),
                    c: remap(s.c),
                };
                // Canonical side order is preserved: remapping keeps sizes and
                // relative label order.
                out.insert(t);
            }
        }
        Ok(out)
    }

    /// Human-readable listing.
    pub fn display(&self) -> Vec<String> {
        self.iter().map(|s| s.display(&self.universe)).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct CiStatementDto {
    a: Vec<NodeId>,
    b: Vec<NodeId>,
    c: Vec<NodeId>,
}

impl Serialize for CiSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let items: Vec<CiStatementDto> = self
            .iter()
            .map(|st| CiStatementDto {
                a: self.universe.set_of(st.a),
                b: self.universe.set_of(st.b),
                c: self.universe.set_of(st.c),
            })
            .collect();
        items.serialize(s)
    }
}

/// Deserializes a CI set given its intended universe.
pub fn ci_set_from_json(universe: Universe, json: &str) -> Result<CiSet> {
    let items: Vec<CiStatementDto> = serde_json::from_str(json)?;
    let mut out = CiSet::empty(universe);
    for it in items {
        let a = out.universe.mask_of(&it.a)?;
        let b = out.universe.mask_of(&it.b)?;
        let c = out.universe.mask_of(&it.c)?;
        let s = CiStatement::new(&out.universe, a, b, c)?;
        out.insert(s);
    }
    Ok(out)
}

/// d-separation in a DAG: every path between `a` and `b` is blocked by `c`.
///
/// Implemented on the moralized ancestral subgraph of the mentioned variables,
/// which is equivalent to the path-blocking definition (chains and forks block
/// when their middle vertex is conditioned, colliders block unless they or a
/// descendant are conditioned).
pub fn d_separated(d: &Digraph, a: &[NodeId], b: &[NodeId], c: &[NodeId]) -> Result<bool> {
    if !d.is_dag() {
        return Err(Error::InvalidInput("digraph has a directed cycle".into()));
    }
    let u = d.universe();
    let (ma, mb, mc) = (u.mask_of(a)?, u.mask_of(b)?, u.mask_of(c)?);
    if ma == 0 || mb == 0 {
        return Err(Error::InvalidInput(
            "d-separation needs nonempty sides".into(),
        ));
    }
    if ma & mb != 0 || ma & mc != 0 || mb & mc != 0 {
        return Err(Error::InvalidInput(
            "d-separation sets must be pairwise disjoint".into(),
        ));
    }
    Ok(d_separated_masks(d, ma, mb, mc))
}

pub(crate) fn d_separated_masks(d: &Digraph, a: Mask, b: Mask, c: Mask) -> bool {
    let closure = d.ancestral_closure(a | b | c);
    let moral = moral_graph_restricted(d, closure);
    separates_masks(&moral, a, b, c)
}

/// Moral graph: the skeleton plus an edge between every pair of nodes sharing
/// a child.
pub fn moral_graph(d: &Digraph) -> Result<Graph> {
    if !d.is_dag() {
        return Err(Error::InvalidInput("digraph has a directed cycle".into()));
    }
    Ok(moral_graph_restricted(d, d.universe().full_mask()))
}

/// Moralization of the induced subgraph on `keep`.
fn moral_graph_restricted(d: &Digraph, keep: Mask) -> Graph {
    let u = d.universe();
    let mut g = Graph::new(u.labels().to_vec(), &[]).expect("universe is valid");
    for i in 0..u.len() {
        if keep >> i & 1 == 0 {
            continue;
        }
        let mut m = d.parents(i) & keep;
        while m != 0 {
            let p = m.trailing_zeros() as usize;
            m &= m - 1;
            g.add_edge(p, i);
            // Marry p to every remaining (higher-indexed) co-parent.
            let mut k = m;
            while k != 0 {
                let q = k.trailing_zeros() as usize;
                k &= k - 1;
                g.add_edge(p, q);
            }
        }
    }
    g
}

fn enumeration_guard(n: usize, max_nodes: usize) -> Result<()> {
    if n > max_nodes {
        return Err(Error::GuardExceeded {
            what: "independence enumeration nodes",
            actual: n,
            limit: max_nodes,
        });
    }
    Ok(())
}

/// Enumerates every disjoint-triple assignment `(a, b, c)` over `n` variables
/// and keeps those passing `sep`. Assignments map each variable to one of
/// side a, side b, conditioning or absent.
fn enumerate_ci<F: Fn(Mask, Mask, Mask) -> bool>(u: &Universe, sep: F) -> CiSet {
    let n = u.len();
    let mut out = CiSet::empty(u.clone());
    let mut assign = vec![0u8; n];
    loop {
        let (mut a, mut b, mut c) = (0 as Mask, 0 as Mask, 0 as Mask);
        for (i, &x) in assign.iter().enumerate() {
            match x {
                1 => a |= 1 << i,
                2 => b |= 1 << i,
                3 => c |= 1 << i,
                _ => {}
            }
        }
        if a != 0 && b != 0 && u.cmp_sets(a, b) != Ordering::Greater && sep(a, b, c) {
            out.insert(CiStatement { a, b, c });
        }
        // Next assignment in base 4.
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            assign[i] += 1;
            if assign[i] < 4 {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

/// All d-separation statements of a DAG. Guarded by node count.
pub fn ci_set_dag(d: &Digraph, max_nodes: usize) -> Result<CiSet> {
    if !d.is_dag() {
        return Err(Error::InvalidInput("digraph has a directed cycle".into()));
    }
    enumeration_guard(d.universe().len(), max_nodes)?;
    Ok(enumerate_ci(d.universe(), |a, b, c| {
        d_separated_masks(d, a, b, c)
    }))
}

/// All graph-separation statements of an undirected model. Guarded by node
/// count.
pub fn ci_set_mrf(g: &Graph, max_nodes: usize) -> Result<CiSet> {
    enumeration_guard(g.universe().len(), max_nodes)?;
    Ok(enumerate_ci(g.universe(), |a, b, c| {
        separates_masks(g, a, b, c)
    }))
}

/// Witnessed inclusion test between two CI sets over the same universe.
#[derive(Debug, Clone)]
pub struct InclusionReport {
    /// True when every statement of the left set is in the right set.
    pub holds: bool,
    /// Statements of the left set missing from the right set (canonical
    /// order), as display strings.
    pub missing: Vec<String>,
}

/// Checks `inner` included in `outer`; both must share a universe.
pub fn ci_subset(inner: &CiSet, outer: &CiSet) -> Result<InclusionReport> {
    if inner.universe != outer.universe {
        return Err(Error::InvalidInput(
            "independence sets compare only over a common universe".into(),
        ));
    }
    let missing: Vec<String> = inner
        .iter()
        .filter(|s| !outer.contains(s))
        .map(|s| s.display(&inner.universe))
        .collect();
    Ok(InclusionReport {
        holds: missing.is_empty(),
        missing,
    })
}
