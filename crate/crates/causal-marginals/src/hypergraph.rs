//! Hypergraphs, graphs and digraphs over named variables.
//!
//! The central notions are acyclicity of a hypergraph (tested by Graham
//! reduction), running intersection orderings, chordality of its 2-section and
//! minimal triangulations. A hypergraph here always covers its node set: the
//! nodes are derived as the union of the edges. Graphs and digraphs may carry
//! isolated nodes.

use crate::vars::{Mask, NodeId, Universe};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Undirected loop-free graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    universe: Universe,
    /// Adjacency mask per node index.
    adj: Vec<Mask>,
}

/// Finite hypergraph; node set equals the union of its edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    universe: Universe,
    /// Edge masks in canonical set order, deduplicated.
    edges: Vec<Mask>,
}

/// Directed graph with named arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    universe: Universe,
    parents: Vec<Mask>,
    children: Vec<Mask>,
}

impl Graph {
    /// Builds a graph from explicit nodes and edges. Isolated nodes are kept.
    pub fn new(nodes: Vec<NodeId>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let universe = Universe::new(nodes)?;
        let mut adj = vec![0 as Mask; universe.len()];
        for (a, b) in edges {
            let i = universe
                .index_of(a)
                .ok_or_else(|| Error::InvalidInput(format!("unknown node {a}")))?;
            let j = universe
                .index_of(b)
                .ok_or_else(|| Error::InvalidInput(format!("unknown node {b}")))?;
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at {a}")));
            }
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        Ok(Graph { universe, adj })
    }

    /// The node universe.
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Node labels in canonical order.
    pub fn nodes(&self) -> &[NodeId] {
        self.universe.labels()
    }

    /// Neighbor mask of node index `i`.
    pub fn adj(&self, i: usize) -> Mask {
        self.adj[i]
    }

    /// True when nodes `i` and `j` are adjacent.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i] >> j & 1 == 1
    }

    /// Edge list as canonical label pairs.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for i in 0..self.adj.len() {
            let mut m = self.adj[i] & !((1 << (i + 1)) - 1);
            while m != 0 {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                out.push((
                    self.universe.labels()[i].clone(),
                    self.universe.labels()[j].clone(),
                ));
            }
        }
        out
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    /// Adds the undirected edge `(i, j)` in place.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.adj[i] |= 1 << j;
        self.adj[j] |= 1 << i;
    }

    /// Removes the undirected edge `(i, j)` in place.
    pub fn remove_edge(&mut self, i: usize, j: usize) {
        self.adj[i] &= !(1 << j);
        self.adj[j] &= !(1 << i);
    }

    /// True when `other` has the same universe and an edge superset.
    pub fn contains_subgraph(&self, other: &Graph) -> bool {
        self.universe == other.universe
            && self
                .adj
                .iter()
                .zip(&other.adj)
                .all(|(big, small)| small & !big == 0)
    }

    /// Mask of nodes reachable from `start` without entering `forbidden`.
    /// Nodes of `start` are reported even when forbidden-adjacent.
    fn reachable(&self, start: Mask, forbidden: Mask) -> Mask {
        let mut seen = start & !forbidden;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0;
            let mut m = frontier;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                next |= self.adj[i];
            }
            next &= !forbidden & !seen;
            seen |= next;
            frontier = next;
        }
        seen
    }
}

impl Hypergraph {
    /// Builds a hypergraph from edges given as label sets. The node set is the
    /// union of the edges; edges are deduplicated and canonically ordered.
    /// Empty edges are rejected.
    pub fn new(edges: &[Vec<NodeId>]) -> Result<Self> {
        if edges.iter().any(|e| e.is_empty()) {
            return Err(Error::InvalidInput("empty hyperedge".into()));
        }
        let mut labels: Vec<NodeId> = edges.iter().flatten().cloned().collect();
        labels.sort();
        labels.dedup();
        let universe = Universe::new(labels)?;
        let mut masks: Vec<Mask> = edges
            .iter()
            .map(|e| universe.mask_of(e))
            .collect::<Result<_>>()?;
        masks.sort_by(|a, b| universe.cmp_sets(*a, *b));
        masks.dedup();
        Ok(Hypergraph {
            universe,
            edges: masks,
        })
    }

    /// Builds from masks over an existing universe. Nodes outside the union of
    /// the edges are dropped and the result is re-canonicalized.
    pub fn from_masks(universe: &Universe, masks: &[Mask]) -> Result<Self> {
        let edges: Vec<Vec<NodeId>> = masks.iter().map(|m| universe.set_of(*m)).collect();
        Hypergraph::new(&edges)
    }

    /// The node universe.
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Node labels in canonical order.
    pub fn nodes(&self) -> &[NodeId] {
        self.universe.labels()
    }

    /// Edge masks in canonical order.
    pub fn edge_masks(&self) -> &[Mask] {
        &self.edges
    }

    /// Edges as label sets, canonical order.
    pub fn edges(&self) -> Vec<Vec<NodeId>> {
        self.edges.iter().map(|m| self.universe.set_of(*m)).collect()
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// True when every edge is maximal under inclusion.
    pub fn is_reduced(&self) -> bool {
        self.edges.iter().all(|e| {
            !self
                .edges
                .iter()
                .any(|f| f != e && e & f == *e)
        })
    }
}

impl Digraph {
    /// Builds a digraph from nodes and arcs `(from, to)`.
    pub fn new(nodes: Vec<NodeId>, arcs: &[(NodeId, NodeId)]) -> Result<Self> {
        let universe = Universe::new(nodes)?;
        let mut parents = vec![0 as Mask; universe.len()];
        let mut children = vec![0 as Mask; universe.len()];
        for (a, b) in arcs {
            let i = universe
                .index_of(a)
                .ok_or_else(|| Error::InvalidInput(format!("unknown node {a}")))?;
            let j = universe
                .index_of(b)
                .ok_or_else(|| Error::InvalidInput(format!("unknown node {b}")))?;
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at {a}")));
            }
            children[i] |= 1 << j;
            parents[j] |= 1 << i;
        }
        Ok(Digraph {
            universe,
            parents,
            children,
        })
    }

    /// The node universe.
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Node labels in canonical order.
    pub fn nodes(&self) -> &[NodeId] {
        self.universe.labels()
    }

    /// Parent mask of node index `i`.
    pub fn parents(&self, i: usize) -> Mask {
        self.parents[i]
    }

    /// Child mask of node index `i`.
    pub fn children(&self, i: usize) -> Mask {
        self.children[i]
    }

    /// Arc list as label pairs, canonical order.
    pub fn arcs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for i in 0..self.children.len() {
            let mut m = self.children[i];
            while m != 0 {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                out.push((
                    self.universe.labels()[i].clone(),
                    self.universe.labels()[j].clone(),
                ));
            }
        }
        out
    }

    /// True when the digraph has no directed cycle.
    pub fn is_dag(&self) -> bool {
        let n = self.universe.len();
        let mut remaining: Mask = if n == 0 { 0 } else { (!0u64) >> (64 - n) };
        loop {
            if remaining == 0 {
                return true;
            }
            // Peel nodes whose remaining parents are all gone.
            let mut peeled = false;
            let mut m = remaining;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                if self.parents[i] & remaining == 0 {
                    remaining &= !(1 << i);
                    peeled = true;
                }
            }
            if !peeled {
                return false;
            }
        }
    }

    /// Mask of ancestors of `set` (including `set` itself).
    pub fn ancestral_closure(&self, set: Mask) -> Mask {
        let mut seen = set;
        loop {
            let mut next = seen;
            let mut m = seen;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                next |= self.parents[i];
            }
            if next == seen {
                return seen;
            }
            seen = next;
        }
    }

    /// Mask of descendants of node `i` (excluding `i`).
    pub fn descendants(&self, i: usize) -> Mask {
        let mut seen = self.children[i];
        loop {
            let mut next = seen;
            let mut m = seen;
            while m != 0 {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                next |= self.children[j];
            }
            if next == seen {
                return seen & !(1 << i);
            }
            seen = next;
        }
    }

    /// Underlying undirected skeleton.
    pub fn skeleton(&self) -> Graph {
        let mut g = Graph {
            universe: self.universe.clone(),
            adj: vec![0; self.universe.len()],
        };
        for i in 0..self.universe.len() {
            let mut m = self.children[i];
            while m != 0 {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                g.add_edge(i, j);
            }
        }
        g
    }
}

// ---------------------------------------------------------------------------
// JSON forms
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EdgeListDto {
    nodes: Vec<NodeId>,
    edges: Vec<Vec<NodeId>>,
}

#[derive(Serialize, Deserialize)]
struct ArcListDto {
    nodes: Vec<NodeId>,
    arcs: Vec<[NodeId; 2]>,
}

impl Serialize for Hypergraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EdgeListDto {
            nodes: self.nodes().to_vec(),
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hypergraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dto = EdgeListDto::deserialize(d)?;
        let h = Hypergraph::new(&dto.edges).map_err(serde::de::Error::custom)?;
        let mut declared = dto.nodes;
        declared.sort();
        declared.dedup();
        if declared != h.nodes() {
            return Err(serde::de::Error::custom(
                "hypergraph node list must equal the union of its edges",
            ));
        }
        Ok(h)
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EdgeListDto {
            nodes: self.nodes().to_vec(),
            edges: self
                .edges()
                .into_iter()
                .map(|(a, b)| vec![a, b])
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dto = EdgeListDto::deserialize(d)?;
        let mut pairs = Vec::with_capacity(dto.edges.len());
        for e in &dto.edges {
            match e.as_slice() {
                [a, b] => pairs.push((a.clone(), b.clone())),
                _ => {
                    return Err(serde::de::Error::custom(
                        "graph edges must have exactly two endpoints",
                    ))
                }
            }
        }
        Graph::new(dto.nodes, &pairs).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Digraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ArcListDto {
            nodes: self.nodes().to_vec(),
            arcs: self.arcs().into_iter().map(|(a, b)| [a, b]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Digraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dto = ArcListDto::deserialize(d)?;
        let arcs: Vec<(NodeId, NodeId)> = dto
            .arcs
            .into_iter()
            .map(|[a, b]| (a, b))
            .collect();
        Digraph::new(dto.nodes, &arcs).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// 2-section: nodes of `h`, with an edge wherever two nodes share a hyperedge.
pub fn two_section(h: &Hypergraph) -> Graph {
    let mut g = Graph {
        universe: h.universe.clone(),
        adj: vec![0; h.universe.len()],
    };
    for &e in &h.edges {
        let mut m = e;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            g.adj[i] |= e & !(1 << i);
        }
    }
    g
}

/// Removes edges contained in other edges; the node set is re-derived from the
/// surviving edges.
pub fn reduce(h: &Hypergraph) -> Hypergraph {
    let kept: Vec<Mask> = h
        .edges
        .iter()
        .copied()
        .filter(|e| !h.edges.iter().any(|f| f != e && e & f == *e))
        .collect();
    Hypergraph::from_masks(&h.universe, &kept).expect("reduction of a valid hypergraph")
}

/// Result of running Graham reduction to a fixed point.
#[derive(Debug, Clone)]
pub struct GrahamResult {
    /// True when the reduction emptied the hypergraph.
    pub acyclic: bool,
    /// Surviving edges at the fixed point (empty when acyclic).
    pub residual: Vec<Vec<NodeId>>,
}

/// Graham reduction: repeatedly delete nodes that lie in exactly one edge and
/// edges contained in other edges, until neither rule applies. The hypergraph
/// is acyclic exactly when the fixed point is empty.
pub fn graham(h: &Hypergraph) -> GrahamResult {
    let u = &h.universe;
    let mut edges: Vec<Mask> = h.edges.clone();
    loop {
        let mut changed = false;

        // Rule (a): drop nodes occurring in exactly one edge.
        let mut once: Mask = 0;
        let mut more: Mask = 0;
        for &e in &edges {
            more |= once & e;
            once |= e;
        }
        let lonely = once & !more;
        if lonely != 0 {
            for e in edges.iter_mut() {
                if *e & lonely != 0 {
                    *e &= !lonely;
                    changed = true;
                }
            }
        }

        // Rule (b): drop duplicates, emptied edges and edges contained in
        // another surviving edge.
        let before = edges.len();
        edges.sort_by(|a, b| u.cmp_sets(*a, *b));
        edges.dedup();
        let snapshot = edges.clone();
        edges.retain(|e| *e != 0 && !snapshot.iter().any(|f| f != e && e & f == *e));
        if edges.len() != before {
            changed = true;
        }

        if edges.is_empty() {
            return GrahamResult {
                acyclic: true,
                residual: Vec::new(),
            };
        }
        if !changed {
            return GrahamResult {
                acyclic: false,
                residual: edges.iter().map(|m| u.set_of(*m)).collect(),
            };
        }
    }
}

/// A running intersection ordering of the edges of a hypergraph.
///
/// Position `i` holds edge `E_i` with separator `S_i = E_i \cap (E_1 \cup ...
/// \cup E_{i-1})` and residual `R_i = E_i \setminus S_i`; each `S_i` with
/// `i > 0` is contained in some single earlier edge, recorded as the witness.
#[derive(Debug, Clone)]
pub struct RioOrdering {
    universe: Universe,
    edge_order: Vec<Mask>,
    separators: Vec<Mask>,
    witnesses: Vec<Option<usize>>,
}

impl RioOrdering {
    /// Edges in running intersection order, as masks over [`Self::universe`].
    pub fn edge_masks(&self) -> &[Mask] {
        &self.edge_order
    }

    /// Separator masks aligned with the edge order; the first entry is empty.
    pub fn separator_masks(&self) -> &[Mask] {
        &self.separators
    }

    /// Residual mask at position `i`.
    pub fn residual_mask(&self, i: usize) -> Mask {
        self.edge_order[i] & !self.separators[i]
    }

    /// Index of an earlier edge containing separator `i`, if `i > 0`.
    pub fn witness(&self, i: usize) -> Option<usize> {
        self.witnesses[i]
    }

    /// The node universe the masks refer to.
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Edges as label sets in order.
    pub fn edges(&self) -> Vec<Vec<NodeId>> {
        self.edge_order
            .iter()
            .map(|m| self.universe.set_of(*m))
            .collect()
    }

    /// Separators as label sets in order.
    pub fn separators(&self) -> Vec<Vec<NodeId>> {
        self.separators
            .iter()
            .map(|m| self.universe.set_of(*m))
            .collect()
    }
}

/// Searches for a running intersection ordering of the edges of `h`.
///
/// Returns `None` exactly when `h` is cyclic. Disconnected hypergraphs are
/// ordered component by component (an empty separator is contained in every
/// edge). Candidates are tried in canonical edge order, so the result is the
/// lexicographically first valid ordering.
pub fn rio_ordering(h: &Hypergraph) -> Option<RioOrdering> {
    let n = h.edges.len();
    if n == 0 {
        return Some(RioOrdering {
            universe: h.universe.clone(),
            edge_order: Vec::new(),
            separators: Vec::new(),
            witnesses: Vec::new(),
        });
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    if !rio_search(&h.edges, &mut chosen, &mut used) {
        return None;
    }
    let mut union: Mask = 0;
    let mut edge_order = Vec::with_capacity(n);
    let mut separators = Vec::with_capacity(n);
    let mut witnesses = Vec::with_capacity(n);
    for (pos, &idx) in chosen.iter().enumerate() {
        let e = h.edges[idx];
        let s = e & union;
        let witness = if pos == 0 {
            None
        } else {
            (0..pos).find(|&j| s & !h.edges[chosen[j]] == 0)
        };
        edge_order.push(e);
        separators.push(s);
        witnesses.push(witness);
        union |= e;
    }
    Some(RioOrdering {
        universe: h.universe.clone(),
        edge_order,
        separators,
        witnesses,
    })
}

fn rio_search(edges: &[Mask], chosen: &mut Vec<usize>, used: &mut [bool]) -> bool {
    if chosen.len() == edges.len() {
        return true;
    }
    let union: Mask = chosen.iter().fold(0, |acc, &i| acc | edges[i]);
    for i in 0..edges.len() {
        if used[i] {
            continue;
        }
        let s = edges[i] & union;
        let ok = chosen.is_empty()
            || s == 0
            || chosen.iter().any(|&j| s & !edges[j] == 0);
        if !ok {
            continue;
        }
        used[i] = true;
        chosen.push(i);
        if rio_search(edges, chosen, used) {
            return true;
        }
        chosen.pop();
        used[i] = false;
    }
    false
}

/// Maximum cardinality search visit order (ties broken toward smaller labels).
fn mcs_order(g: &Graph) -> Vec<usize> {
    let n = g.universe.len();
    let mut weight = vec![0usize; n];
    let mut visited: Mask = 0;
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if visited >> i & 1 == 1 {
                continue;
            }
            if best.map_or(true, |b| weight[i] > weight[b]) {
                best = Some(i);
            }
        }
        let v = best.expect("unvisited node");
        visited |= 1 << v;
        order.push(v);
        let mut m = g.adj[v] & !visited;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            weight[j] += 1;
        }
    }
    order
}

/// Checks whether the reverse of `order` is a perfect elimination ordering.
fn is_peo(g: &Graph, elimination: &[usize]) -> bool {
    let mut later: Mask = 0;
    for &v in elimination {
        later |= 1 << v;
    }
    for &v in elimination {
        later &= !(1 << v);
        let nb = g.adj[v] & later;
        // Later neighbors must be pairwise adjacent.
        let mut m = nb;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            if nb & !(g.adj[i] | (1 << i)) != 0 {
                return false;
            }
        }
    }
    true
}

/// Chordality test by maximum cardinality search.
pub fn is_chordal(g: &Graph) -> bool {
    let visit = mcs_order(g);
    let elimination: Vec<usize> = visit.into_iter().rev().collect();
    is_peo(g, &elimination)
}

/// Clique hypergraph of a chordal graph: its inclusion-maximal cliques.
/// Errors when `g` is not chordal.
pub fn maximal_cliques_chordal(g: &Graph) -> Result<Hypergraph> {
    let visit = mcs_order(g);
    let elimination: Vec<usize> = visit.into_iter().rev().collect();
    if !is_peo(g, &elimination) {
        return Err(Error::InvalidInput("graph is not chordal".into()));
    }
    let mut later: Mask = 0;
    for &v in &elimination {
        later |= 1 << v;
    }
    let mut cliques: Vec<Mask> = Vec::new();
    for &v in &elimination {
        later &= !(1 << v);
        cliques.push((g.adj[v] & later) | (1 << v));
    }
    let maximal: Vec<Mask> = cliques
        .iter()
        .copied()
        .filter(|c| !cliques.iter().any(|d| d != c && c & d == *c))
        .collect();
    Hypergraph::from_masks(&g.universe, &maximal)
}

/// Minimal triangulation by maximum cardinality search with fill.
///
/// At each step the unnumbered vertex of maximum weight is selected (ties
/// broken toward the larger label); every unnumbered vertex reachable through
/// strictly lighter unnumbered vertices gets a weight bump and, if not already
/// adjacent, a fill edge to the selected vertex. Already chordal graphs come
/// back unchanged.
pub fn minimal_triangulation(g: &Graph) -> Graph {
    let n = g.universe.len();
    let mut weight = vec![0usize; n];
    let mut unnumbered: Mask = if n == 0 { 0 } else { (!0u64) >> (64 - n) };
    let mut filled = g.clone();
    for _ in 0..n {
        let mut best: Option<usize> = None;
        let mut m = unnumbered;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            // `>=` moves ties to the larger index, hence the larger label.
            if best.map_or(true, |b| weight[i] >= weight[b]) {
                best = Some(i);
            }
        }
        let v = best.expect("unnumbered node");
        unnumbered &= !(1 << v);

        // Reachability in the original graph through unnumbered vertices of
        // weight strictly below w(u), evaluated against frozen weights.
        let mut bumped: Vec<usize> = Vec::new();
        let mut m = unnumbered;
        while m != 0 {
            let u = m.trailing_zeros() as usize;
            m &= m - 1;
            let mut allowed: Mask = 0;
            let mut k = unnumbered & !(1 << u);
            while k != 0 {
                let x = k.trailing_zeros() as usize;
                k &= k - 1;
                if weight[x] < weight[u] {
                    allowed |= 1 << x;
                }
            }
            let reach = g.reachable(1 << u, !(allowed | (1 << u) | (1 << v)));
            if reach >> v & 1 == 1 {
                bumped.push(u);
            }
        }
        for u in bumped {
            weight[u] += 1;
            if !filled.has_edge(u, v) {
                filled.add_edge(u, v);
            }
        }
    }
    filled
}

/// Result of exhaustively enumerating minimal triangulations.
#[derive(Debug, Clone)]
pub struct TriangulationEnumeration {
    /// Distinct minimal triangulations, canonically ordered by fill edge set.
    pub graphs: Vec<Graph>,
    /// True when the list was cut off at the requested cap.
    pub truncated: bool,
}

/// Enumerates all distinct minimal triangulations of `g` by running the
/// elimination game over every vertex ordering, deduplicating fill sets and
/// keeping the inclusion-minimal ones. Refuses graphs above `max_nodes`
/// (factorial cost); `cap` truncates the returned list.
pub fn enumerate_minimal_triangulations(
    g: &Graph,
    cap: usize,
    max_nodes: usize,
) -> Result<TriangulationEnumeration> {
    let n = g.universe.len();
    if n > max_nodes {
        return Err(Error::GuardExceeded {
            what: "triangulation enumeration nodes",
            actual: n,
            limit: max_nodes,
        });
    }
    // Branch on the first eliminated vertex, then recurse sequentially.
    let branches = crate::par::map_range(n.max(1), |first| {
        let mut fills: HashSet<Vec<(usize, usize)>> = HashSet::new();
        if n == 0 {
            fills.insert(Vec::new());
            return fills;
        }
        let mut adj = g.adj.clone();
        let mut fill = Vec::new();
        let mut alive: Mask = (!0u64) >> (64 - n);
        eliminate_vertex(&mut adj, &mut fill, &mut alive, first);
        elimination_game(&mut adj, &mut fill, alive, &mut fills);
        fills
    });
    let mut all: HashSet<Vec<(usize, usize)>> = HashSet::new();
    for b in branches {
        all.extend(b);
    }
    let mut fills: Vec<Vec<(usize, usize)>> = all.into_iter().collect();
    // Keep inclusion-minimal fill sets only.
    let sets: Vec<HashSet<(usize, usize)>> = fills
        .iter()
        .map(|f| f.iter().copied().collect())
        .collect();
    let minimal: Vec<bool> = (0..fills.len())
        .map(|i| {
            !(0..fills.len()).any(|j| {
                j != i && sets[j].len() < sets[i].len() && sets[j].is_subset(&sets[i])
            })
        })
        .collect();
    let mut kept: Vec<Vec<(usize, usize)>> = fills
        .drain(..)
        .zip(minimal)
        .filter_map(|(f, keep)| keep.then_some(f))
        .collect();
    kept.sort();
    let truncated = kept.len() > cap;
    kept.truncate(cap);
    let graphs = kept
        .into_iter()
        .map(|f| {
            let mut t = g.clone();
            for (i, j) in f {
                t.add_edge(i, j);
            }
            t
        })
        .collect();
    Ok(TriangulationEnumeration { graphs, truncated })
}

fn eliminate_vertex(
    adj: &mut [Mask],
    fill: &mut Vec<(usize, usize)>,
    alive: &mut Mask,
    v: usize,
) {
    let nb = adj[v] & *alive & !(1 << v);
    let mut m = nb;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        let missing = nb & !adj[i] & !(1 << i) & !((1 << (i + 1)) - 1);
        let mut k = missing;
        while k != 0 {
            let j = k.trailing_zeros() as usize;
            k &= k - 1;
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
            fill.push((i, j));
        }
    }
    *alive &= !(1 << v);
}

fn elimination_game(
    adj: &mut Vec<Mask>,
    fill: &mut Vec<(usize, usize)>,
    alive: Mask,
    out: &mut HashSet<Vec<(usize, usize)>>,
) {
    if alive == 0 {
        let mut f = fill.clone();
        f.sort();
        f.dedup();
        out.insert(f);
        return;
    }
    let mut m = alive;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        m &= m - 1;
        let saved_adj = adj.clone();
        let saved_fill_len = fill.len();
        let mut next_alive = alive;
        eliminate_vertex(adj, fill, &mut next_alive, v);
        elimination_game(adj, fill, next_alive, out);
        *adj = saved_adj;
        fill.truncate(saved_fill_len);
    }
}

/// True when `t` and `m` share a node set and every edge of `m` is contained
/// in some edge of `t`.
pub fn extends(t: &Hypergraph, m: &Hypergraph) -> bool {
    if t.nodes() != m.nodes() {
        return false;
    }
    m.edges.iter().all(|e| t.edges.iter().any(|f| e & !f == 0))
}

/// Graph separation: no path from `a` to `b` avoids `c`. The three sets must
/// be pairwise disjoint and `a`, `b` nonempty.
pub fn separates(g: &Graph, a: &[NodeId], b: &[NodeId], c: &[NodeId]) -> Result<bool> {
    let u = g.universe();
    let (ma, mb, mc) = (u.mask_of(a)?, u.mask_of(b)?, u.mask_of(c)?);
    if ma == 0 || mb == 0 {
        return Err(Error::InvalidInput("separation needs nonempty sides".into()));
    }
    if ma & mb != 0 || ma & mc != 0 || mb & mc != 0 {
        return Err(Error::InvalidInput(
            "separation sets must be pairwise disjoint".into(),
        ));
    }
    Ok(g.reachable(ma, mc) & mb == 0)
}

/// Mask-level variant of [`separates`] for internal callers that already hold
/// disjoint masks.
pub(crate) fn separates_masks(g: &Graph, a: Mask, b: Mask, c: Mask) -> bool {
    g.reachable(a, c) & b == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vars::node;

    fn n(s: &str) -> NodeId {
        node(s)
    }

    fn hg(edges: &[&[&str]]) -> Hypergraph {
        let e: Vec<Vec<NodeId>> = edges
            .iter()
            .map(|edge| edge.iter().map(|s| n(s)).collect())
            .collect();
        Hypergraph::new(&e).unwrap()
    }

    /// Three triangles overlapping in a cycle; the classic cyclic example.
    fn tricycle() -> Hypergraph {
        hg(&[&["A", "B", "C"], &["B", "D", "E"], &["C", "E", "F"]])
    }

    /// Clique hypergraph of the 2-section of `tricycle`; acyclic.
    fn tricycle_cliques() -> Hypergraph {
        hg(&[
            &["A", "B", "C"],
            &["B", "C", "E"],
            &["B", "D", "E"],
            &["C", "E", "F"],
        ])
    }

    fn chsh_scenario() -> Hypergraph {
        hg(&[&["A1", "B1"], &["A1", "B2"], &["A2", "B1"], &["A2", "B2"]])
    }

    #[test]
    fn hypergraph_nodes_are_union_of_edges() {
        let h = tricycle();
        let want: Vec<NodeId> = ["A", "B", "C", "D", "E", "F"].iter().map(|s| n(s)).collect();
        assert_eq!(h.nodes(), want.as_slice());
        assert!(Hypergraph::new(&[vec![]]).is_err());
    }

    #[test]
    fn hypergraph_json_roundtrip_rejects_stray_nodes() {
        let h = chsh_scenario();
        let s = serde_json::to_string(&h).unwrap();
        let back: Hypergraph = serde_json::from_str(&s).unwrap();
        assert_eq!(h, back);
        let bad = r#"{"nodes":["A1","A2","B1","B2","Z"],"edges":[["A1","B1"]]}"#;
        assert!(serde_json::from_str::<Hypergraph>(bad).is_err());
    }

    #[test]
    fn two_section_of_pair_scenario_is_the_four_cycle() {
        let g = two_section(&chsh_scenario());
        assert_eq!(g.edge_count(), 4);
        let u = g.universe();
        let a1 = u.index_of(&n("A1")).unwrap();
        let a2 = u.index_of(&n("A2")).unwrap();
        let b1 = u.index_of(&n("B1")).unwrap();
        let b2 = u.index_of(&n("B2")).unwrap();
        assert!(g.has_edge(a1, b1) && g.has_edge(a1, b2));
        assert!(g.has_edge(a2, b1) && g.has_edge(a2, b2));
        assert!(!g.has_edge(a1, a2) && !g.has_edge(b1, b2));
    }

    #[test]
    fn two_section_of_overlapping_triangles() {
        let g = two_section(&tricycle());
        assert_eq!(g.edge_count(), 9);
        let cliques = maximal_cliques_chordal(&g).unwrap();
        assert_eq!(cliques, tricycle_cliques());
    }

    #[test]
    fn reduce_drops_contained_edges() {
        let h = hg(&[&["B", "C", "E"], &["B", "C"], &["B", "E"], &["C", "E"]]);
        let r = reduce(&h);
        assert_eq!(r, hg(&[&["B", "C", "E"]]));
        assert!(r.is_reduced());
        assert!(!h.is_reduced());
    }

    #[test]
    fn reduce_rederives_node_set() {
        let h = hg(&[&["A", "B"], &["A"], &["C"]]);
        let r = reduce(&h);
        assert_eq!(r, hg(&[&["A", "B"], &["C"]]));
    }

    #[test]
    fn graham_stalls_on_cyclic_triangle_overlap() {
        let res = graham(&tricycle());
        assert!(!res.acyclic);
        let want: Vec<Vec<NodeId>> = vec![
            vec![n("B"), n("C")],
            vec![n("B"), n("E")],
            vec![n("C"), n("E")],
        ];
        assert_eq!(res.residual, want);
    }

    #[test]
    fn graham_empties_the_clique_hypergraph() {
        let res = graham(&tricycle_cliques());
        assert!(res.acyclic);
        assert!(res.residual.is_empty());
    }

    #[test]
    fn graham_handles_singletons_and_disconnected_pieces() {
        assert!(graham(&hg(&[&["A"]])).acyclic);
        assert!(graham(&hg(&[&["A"], &["B"]])).acyclic);
        assert!(graham(&hg(&[&["A", "B"], &["C", "D"]])).acyclic);
        assert!(!graham(&chsh_scenario()).acyclic);
    }

    #[test]
    fn rio_exists_iff_graham_accepts() {
        for h in [
            tricycle(),
            tricycle_cliques(),
            chsh_scenario(),
            hg(&[&["A", "B"], &["B", "C"], &["C", "D"]]),
            hg(&[&["A"], &["B"]]),
        ] {
            assert_eq!(graham(&h).acyclic, rio_ordering(&h).is_some());
        }
    }

    #[test]
    fn rio_on_clique_hypergraph_has_single_edge_separators() {
        let h = tricycle_cliques();
        let rio = rio_ordering(&h).unwrap();
        for i in 1..rio.edge_masks().len() {
            let s = rio.separator_masks()[i];
            let j = rio.witness(i).unwrap();
            assert!(s & !rio.edge_masks()[j] == 0);
            assert!(s != 0, "clique hypergraph is connected");
        }
    }

    #[test]
    fn rio_separator_for_shared_pair() {
        let t = hg(&[&["A1", "A2", "B1"], &["A1", "A2", "B2"]]);
        let rio = rio_ordering(&t).unwrap();
        assert_eq!(
            rio.separators()[1],
            vec![n("A1"), n("A2")],
        );
    }

    #[test]
    fn rio_separators_separate_residual_from_history_in_two_section() {
        let h = tricycle_cliques();
        let rio = rio_ordering(&h).unwrap();
        let g = two_section(&h);
        for i in 1..rio.edge_masks().len() {
            let s = rio.separator_masks()[i];
            let r = rio.residual_mask(i);
            let earlier: Mask = rio.edge_masks()[..i].iter().fold(0, |a, e| a | e);
            let other = earlier & !s;
            if r != 0 && other != 0 {
                assert!(separates_masks(&g, r, other, s));
            }
        }
    }

    #[test]
    fn chordality_recognizes_cycles_and_trees() {
        let cycle = two_section(&chsh_scenario());
        assert!(!is_chordal(&cycle));
        let tree = Graph::new(
            vec![n("A"), n("B"), n("C"), n("D")],
            &[(n("B"), n("A")), (n("B"), n("C")), (n("B"), n("D"))],
        )
        .unwrap();
        assert!(is_chordal(&tree));
        let empty = Graph::new(vec![n("A")], &[]).unwrap();
        assert!(is_chordal(&empty));
    }

    #[test]
    fn separation_in_two_triangle_graph() {
        // Cliques {A,B,C} and {A,C,D}: B and D are separated by {A,C}.
        let g = Graph::new(
            vec![n("A"), n("B"), n("C"), n("D")],
            &[
                (n("A"), n("B")),
                (n("B"), n("C")),
                (n("A"), n("C")),
                (n("A"), n("D")),
                (n("C"), n("D")),
            ],
        )
        .unwrap();
        assert!(separates(&g, &[n("B")], &[n("D")], &[n("A"), n("C")]).unwrap());
        assert!(!separates(&g, &[n("B")], &[n("D")], &[n("A")]).unwrap());
        assert!(!separates(&g, &[n("A")], &[n("B")], &[]).unwrap());
    }

    #[test]
    fn minimal_separator_in_skewed_graph() {
        // {C} alone separates B from D here, and is minimal.
        let g = Graph::new(
            vec![n("A"), n("B"), n("C"), n("D")],
            &[
                (n("A"), n("B")),
                (n("A"), n("C")),
                (n("B"), n("C")),
                (n("C"), n("D")),
            ],
        )
        .unwrap();
        assert!(separates(&g, &[n("B")], &[n("D")], &[n("C")]).unwrap());
        assert!(!separates(&g, &[n("B")], &[n("D")], &[]).unwrap());
    }

    #[test]
    fn separation_rejects_overlap() {
        let g = two_section(&chsh_scenario());
        assert!(separates(&g, &[n("A1")], &[n("A1")], &[]).is_err());
        assert!(separates(&g, &[n("A1")], &[n("A2")], &[n("A1")]).is_err());
        assert!(separates(&g, &[], &[n("A2")], &[]).is_err());
    }

    #[test]
    fn cliques_of_edgeless_graph_are_singletons() {
        let g = Graph::new(vec![n("A")], &[]).unwrap();
        let h = maximal_cliques_chordal(&g).unwrap();
        assert_eq!(h, hg(&[&["A"]]));
    }

    #[test]
    fn cliques_require_chordal_input() {
        let cycle = two_section(&chsh_scenario());
        assert!(maximal_cliques_chordal(&cycle).is_err());
    }

    #[test]
    fn triangulating_the_four_cycle_adds_measurement_side_chord() {
        let g = two_section(&chsh_scenario());
        let t = minimal_triangulation(&g);
        assert!(is_chordal(&t));
        assert!(t.contains_subgraph(&g));
        assert_eq!(t.edge_count(), 5);
        let u = t.universe();
        let a1 = u.index_of(&n("A1")).unwrap();
        let a2 = u.index_of(&n("A2")).unwrap();
        assert!(t.has_edge(a1, a2), "fill goes to the A side");
    }

    #[test]
    fn triangulation_leaves_chordal_graphs_alone() {
        let g = two_section(&hg(&[
            &["A", "B", "C"],
            &["B", "C", "D"],
            &["A", "E"],
            &["B", "E"],
            &["C", "E"],
            &["A", "D"],
        ]));
        assert!(is_chordal(&g));
        let t = minimal_triangulation(&g);
        assert_eq!(t, g);
        let cliques = maximal_cliques_chordal(&t).unwrap();
        assert_eq!(
            cliques,
            hg(&[&["A", "B", "C", "D"], &["A", "B", "C", "E"]])
        );
    }

    #[test]
    fn minimal_triangulation_fill_is_irreducible() {
        // Removing any single fill edge must break chordality.
        let g = two_section(&hg(&[
            &["A1", "B1"],
            &["A1", "B2"],
            &["A1", "B3"],
            &["A2", "B1"],
            &["A2", "B2"],
            &["A2", "B3"],
            &["A3", "B1"],
            &["A3", "B2"],
            &["A3", "B3"],
        ]));
        let t = minimal_triangulation(&g);
        assert!(is_chordal(&t));
        for (a, b) in t.edges() {
            let i = t.universe().index_of(&a).unwrap();
            let j = t.universe().index_of(&b).unwrap();
            if !g.has_edge(i, j) {
                let mut weaker = t.clone();
                weaker.remove_edge(i, j);
                assert!(!is_chordal(&weaker), "fill edge {a}-{b} is necessary");
            }
        }
    }

    #[test]
    fn four_cycle_has_exactly_two_minimal_triangulations() {
        let g = two_section(&chsh_scenario());
        let res = enumerate_minimal_triangulations(&g, 64, 12).unwrap();
        assert!(!res.truncated);
        assert_eq!(res.graphs.len(), 2);
        let u = g.universe();
        let a = (
            u.index_of(&n("A1")).unwrap(),
            u.index_of(&n("A2")).unwrap(),
        );
        let b = (
            u.index_of(&n("B1")).unwrap(),
            u.index_of(&n("B2")).unwrap(),
        );
        let chords: Vec<bool> = res
            .graphs
            .iter()
            .map(|t| t.has_edge(a.0, a.1))
            .collect();
        assert!(chords.contains(&true));
        assert!(res.graphs.iter().any(|t| t.has_edge(b.0, b.1)));
        for t in &res.graphs {
            assert!(is_chordal(t));
            assert_eq!(t.edge_count(), 5);
        }
    }

    #[test]
    fn three_by_three_bipartite_has_the_two_side_completions() {
        let edges: Vec<Vec<NodeId>> = (1..=3)
            .flat_map(|i| (1..=3).map(move |j| vec![n(&format!("A{i}")), n(&format!("B{j}"))]))
            .collect();
        let h = Hypergraph::new(&edges).unwrap();
        let g = two_section(&h);
        let res = enumerate_minimal_triangulations(&g, 64, 12).unwrap();
        assert_eq!(res.graphs.len(), 2);
        let mut clique_sets: Vec<Hypergraph> = res
            .graphs
            .iter()
            .map(|t| maximal_cliques_chordal(t).unwrap())
            .collect();
        clique_sets.sort_by_key(|h| format!("{:?}", h.edges()));
        let a_side = hg(&[
            &["A1", "A2", "A3", "B1"],
            &["A1", "A2", "A3", "B2"],
            &["A1", "A2", "A3", "B3"],
        ]);
        let b_side = hg(&[
            &["A1", "B1", "B2", "B3"],
            &["A2", "B1", "B2", "B3"],
            &["A3", "B1", "B2", "B3"],
        ]);
        assert!(clique_sets.contains(&a_side));
        assert!(clique_sets.contains(&b_side));
    }

    #[test]
    fn triangulation_enumeration_guard_trips() {
        let nodes: Vec<NodeId> = (0..13).map(|i| n(&format!("N{i:02}"))).collect();
        let g = Graph::new(nodes, &[]).unwrap();
        match enumerate_minimal_triangulations(&g, 64, 12) {
            Err(Error::GuardExceeded { actual, limit, .. }) => {
                assert_eq!((actual, limit), (13, 12));
            }
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn extends_needs_same_nodes_and_covering_edges() {
        let m = chsh_scenario();
        let t = hg(&[&["A1", "A2", "B1"], &["A1", "A2", "B2"]]);
        assert!(extends(&t, &m));
        assert!(!extends(&m, &t));
        let other = hg(&[&["A1", "B1"]]);
        assert!(!extends(&other, &m));
    }

    #[test]
    fn dag_detection_and_closures() {
        let d = Digraph::new(
            vec![n("X0"), n("X1"), n("M"), n("Y0"), n("Y1")],
            &[
                (n("X0"), n("M")),
                (n("X1"), n("M")),
                (n("M"), n("Y0")),
                (n("M"), n("Y1")),
            ],
        )
        .unwrap();
        assert!(d.is_dag());
        let u = d.universe();
        let m = u.index_of(&n("M")).unwrap();
        let y0 = u.index_of(&n("Y0")).unwrap();
        assert_eq!(
            d.ancestral_closure(1 << y0),
            u.mask_of(&[n("X0"), n("X1"), n("M"), n("Y0")]).unwrap()
        );
        assert_eq!(
            d.descendants(m),
            u.mask_of(&[n("Y0"), n("Y1")]).unwrap()
        );

        let cyclic = Digraph::new(
            vec![n("A"), n("B")],
            &[(n("A"), n("B")), (n("B"), n("A"))],
        )
        .unwrap();
        assert!(!cyclic.is_dag());
    }

    #[test]
    fn digraph_json_roundtrip() {
        let d = Digraph::new(
            vec![n("X"), n("Y")],
            &[(n("X"), n("Y"))],
        )
        .unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("arcs"));
        let back: Digraph = serde_json::from_str(&s).unwrap();
        assert_eq!(d, back);
    }
}
