//! Exact probability tables and the gluing construction for acyclic scenarios.
//!
//! Tables are dense over mixed-radix outcome tuples with arbitrary-precision
//! rational weights, so marginal equality, gluing and conditional independence
//! are decided exactly. Entropies are the one deliberately floating-point
//! quantity; zero tests of mutual information therefore go through the exact
//! factorization criterion instead.

use crate::hypergraph::{reduce, rio_ordering, Hypergraph};
use crate::vars::{Mask, NodeId, Universe};
use crate::{par, Error, Result};
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Joint distribution over finitely many variables with exact weights.
///
/// Variables are kept in canonical universe order; outcome tuples index
/// variables in that order. Weights sum to exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbTable {
    universe: Universe,
    cards: Vec<usize>,
    weights: Vec<BigRational>,
}

fn mixed_radix_len(cards: &[usize]) -> usize {
    cards.iter().product()
}

fn outcome_of(mut idx: usize, cards: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(cards.len());
    for &c in cards {
        out.push(idx % c);
        idx /= c;
    }
    out
}

fn index_of(outcome: &[usize], cards: &[usize]) -> usize {
    let mut idx = 0;
    let mut stride = 1;
    for (&x, &c) in outcome.iter().zip(cards) {
        idx += x * stride;
        stride *= c;
    }
    idx
}

fn format_outcome(labels: &[NodeId], outcome: &[usize]) -> String {
    labels
        .iter()
        .zip(outcome)
        .map(|(n, x)| format!("{}={}", n.as_str(), x))
        .collect::<Vec<_>>()
        .join(",")
}

impl ProbTable {
    /// Builds a table from sparse `(outcome, weight)` entries; unlisted
    /// outcomes are zero. Variables may come in any order and are
    /// canonicalized, permuting the outcome tuples accordingly.
    pub fn from_weights(
        vars: &[(NodeId, usize)],
        entries: &[(Vec<usize>, BigRational)],
    ) -> Result<Self> {
        let universe = Universe::new(vars.iter().map(|(n, _)| n.clone()).collect())?;
        if universe.len() != vars.len() {
            return Err(Error::InvalidInput("duplicate variable".into()));
        }
        let mut cards = vec![0usize; vars.len()];
        for (n, c) in vars {
            if *c < 2 {
                return Err(Error::InvalidInput(format!(
                    "variable {} has cardinality {}, need at least 2",
                    n.as_str(),
                    c
                )));
            }
            cards[universe.index_of(n).expect("own label")] = *c;
        }
        // Input tuple position -> canonical position.
        let perm: Vec<usize> = vars
            .iter()
            .map(|(n, _)| universe.index_of(n).expect("own label"))
            .collect();
        let mut weights = vec![BigRational::zero(); mixed_radix_len(&cards)];
        let mut seen = vec![false; weights.len()];
        for (tuple, w) in entries {
            if tuple.len() != vars.len() {
                return Err(Error::InvalidInput(format!(
                    "outcome tuple has {} entries, expected {}",
                    tuple.len(),
                    vars.len()
                )));
            }
            let mut outcome = vec![0usize; vars.len()];
            for (pos, &x) in tuple.iter().enumerate() {
                let i = perm[pos];
                if x >= cards[i] {
                    return Err(Error::InvalidInput(format!(
                        "outcome {} out of range for {}",
                        x,
                        universe.labels()[i].as_str()
                    )));
                }
                outcome[i] = x;
            }
            if w.is_negative() {
                return Err(Error::InvalidInput(format!(
                    "negative weight {} at ({})",
                    w,
                    format_outcome(universe.labels(), &outcome)
                )));
            }
            let idx = index_of(&outcome, &cards);
            if seen[idx] {
                return Err(Error::InvalidInput(format!(
                    "duplicate entry for ({})",
                    format_outcome(universe.labels(), &outcome)
                )));
            }
            seen[idx] = true;
            weights[idx] = w.clone();
        }
        let table = ProbTable {
            universe,
            cards,
            weights,
        };
        let total: BigRational = table.weights.iter().sum();
        if !total.is_one() {
            return Err(Error::Inconsistent(format!(
                "weights sum to {}, expected 1",
                total
            )));
        }
        Ok(table)
    }

    /// Internal constructor for already-normalized data in canonical order.
    fn from_parts(universe: Universe, cards: Vec<usize>, weights: Vec<BigRational>) -> Self {
        debug_assert_eq!(weights.len(), mixed_radix_len(&cards));
        debug_assert!(weights.iter().sum::<BigRational>().is_one());
        ProbTable {
            universe,
            cards,
            weights,
        }
    }

    /// The variable universe, in canonical order.
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Cardinalities aligned with the universe.
    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    /// Number of outcome tuples.
    pub fn outcome_count(&self) -> usize {
        self.weights.len()
    }

    /// Weight of one outcome tuple (canonical variable order).
    pub fn prob(&self, outcome: &[usize]) -> &BigRational {
        &self.weights[index_of(outcome, &self.cards)]
    }

    /// Iterates `(outcome, weight)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &BigRational)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| (outcome_of(i, &self.cards), w))
    }

    /// Exact marginal onto `keep`.
    pub fn marginalize<'a, I: IntoIterator<Item = &'a NodeId>>(&self, keep: I) -> Result<ProbTable> {
        let mask = self.universe.mask_of(keep)?;
        Ok(self.marginalize_mask(mask))
    }

    pub(crate) fn marginalize_mask(&self, keep: Mask) -> ProbTable {
        if keep == self.universe.full_mask() {
            return self.clone();
        }
        let sub_universe = Universe::new(self.universe.set_of(keep)).expect("subset of universe");
        let sub_cards: Vec<usize> = (0..self.universe.len())
            .filter(|&i| keep >> i & 1 == 1)
            .map(|i| self.cards[i])
            .collect();
        // Per full-table variable: stride into the sub-table, zero if dropped.
        let mut sub_strides = vec![0usize; self.universe.len()];
        let mut stride = 1;
        for i in 0..self.universe.len() {
            if keep >> i & 1 == 1 {
                sub_strides[i] = stride;
                stride *= self.cards[i];
            }
        }
        let mut weights = vec![BigRational::zero(); mixed_radix_len(&sub_cards)];
        for (i, w) in self.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let mut idx = i;
            let mut sub = 0;
            for (v, &c) in self.cards.iter().enumerate() {
                sub += (idx % c) * sub_strides[v];
                idx /= c;
            }
            weights[sub] += w;
        }
        ProbTable::from_parts(sub_universe, sub_cards, weights)
    }

    /// Entropy in bits of the marginal on `mask`.
    pub(crate) fn subset_entropy(&self, mask: Mask) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        let m = self.marginalize_mask(mask);
        m.weights
            .iter()
            .filter(|w| !w.is_zero())
            .map(|w| {
                let p = w.to_f64().expect("probability fits f64");
                -p * p.log2()
            })
            .sum()
    }
}

#[derive(Serialize, Deserialize)]
struct VarDto {
    name: NodeId,
    card: usize,
}

#[derive(Serialize, Deserialize)]
struct EntryDto {
    outcome: Vec<usize>,
    p: String,
}

#[derive(Serialize, Deserialize)]
struct ProbTableDto {
    vars: Vec<VarDto>,
    probs: Vec<EntryDto>,
}

impl Serialize for ProbTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = ProbTableDto {
            vars: self
                .universe
                .labels()
                .iter()
                .zip(&self.cards)
                .map(|(n, &c)| VarDto {
                    name: n.clone(),
                    card: c,
                })
                .collect(),
            probs: self
                .iter()
                .filter(|(_, w)| !w.is_zero())
                .map(|(outcome, w)| EntryDto {
                    outcome,
                    p: w.to_string(),
                })
                .collect(),
        };
        dto.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProbTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let dto = ProbTableDto::deserialize(d)?;
        let vars: Vec<(NodeId, usize)> = dto.vars.into_iter().map(|v| (v.name, v.card)).collect();
        let entries: Result<Vec<(Vec<usize>, BigRational)>> = dto
            .probs
            .into_iter()
            .map(|e| {
                let w: BigRational = e
                    .p
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad rational '{}'", e.p)))?;
                Ok((e.outcome, w))
            })
            .collect();
        ProbTable::from_weights(&vars, &entries.map_err(DeError::custom)?)
            .map_err(DeError::custom)
    }
}

/// Entropies in bits of every marginal of one table, indexed by subset mask
/// over the table's universe. `value(0) == 0`.
#[derive(Debug, Clone)]
pub struct EntropyVector {
    universe: Universe,
    values: Vec<f64>,
}

impl EntropyVector {
    /// The variable universe.
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Entropy of the subset `mask`.
    pub fn value(&self, mask: Mask) -> f64 {
        self.values[mask as usize]
    }

    /// All `2^n` coordinates in mask order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Computes all `2^n` subset entropies of `p`, fanned out across subsets.
pub fn entropy_vector(p: &ProbTable) -> EntropyVector {
    let n = p.universe.len();
    let values = par::map_range(1 << n, |m| p.subset_entropy(m as Mask));
    EntropyVector {
        universe: p.universe.clone(),
        values,
    }
}

fn disjoint_triple(p: &ProbTable, a: &[NodeId], b: &[NodeId], c: &[NodeId]) -> Result<(Mask, Mask, Mask)> {
    let (ma, mb, mc) = (
        p.universe.mask_of(a)?,
        p.universe.mask_of(b)?,
        p.universe.mask_of(c)?,
    );
    if ma == 0 || mb == 0 {
        return Err(Error::InvalidInput(
            "mutual information needs nonempty sides".into(),
        ));
    }
    if ma & mb != 0 || ma & mc != 0 || mb & mc != 0 {
        return Err(Error::InvalidInput(
            "mutual information sets must be pairwise disjoint".into(),
        ));
    }
    Ok((ma, mb, mc))
}

/// Conditional mutual information `I(a : b | c)` in bits, from floating-point
/// entropies of exact marginals. Use [`is_ci_exact`] for zero tests.
pub fn mutual_information(p: &ProbTable, a: &[NodeId], b: &[NodeId], c: &[NodeId]) -> Result<f64> {
    let (ma, mb, mc) = disjoint_triple(p, a, b, c)?;
    Ok(p.subset_entropy(ma | mc) + p.subset_entropy(mb | mc)
        - p.subset_entropy(ma | mb | mc)
        - p.subset_entropy(mc))
}

/// Exact conditional independence test via the factorization criterion:
/// `P(abc) * P(c) == P(ac) * P(bc)` for every outcome over `a`, `b`, `c`.
pub fn is_ci_exact(p: &ProbTable, a: &[NodeId], b: &[NodeId], c: &[NodeId]) -> Result<bool> {
    let (ma, mb, mc) = disjoint_triple(p, a, b, c)?;
    Ok(is_ci_exact_masks(p, ma, mb, mc))
}

pub(crate) fn is_ci_exact_masks(p: &ProbTable, a: Mask, b: Mask, c: Mask) -> bool {
    let abc = p.marginalize_mask(a | b | c);
    let ac = abc.marginalize_mask(abc.universe.mask_of(p.universe.iter_mask(a | c)).unwrap());
    let bc = abc.marginalize_mask(abc.universe.mask_of(p.universe.iter_mask(b | c)).unwrap());
    let cc = abc.marginalize_mask(abc.universe.mask_of(p.universe.iter_mask(c)).unwrap());
    // Digit projections from abc's outcome tuples onto the three marginals.
    let proj = |target: &ProbTable| -> Vec<usize> {
        let mut strides = vec![0usize; abc.universe.len()];
        let mut stride = 1;
        for (i, n) in abc.universe.labels().iter().enumerate() {
            if target.universe.index_of(n).is_some() {
                strides[i] = stride;
                stride *= abc.cards[i];
            }
        }
        strides
    };
    let (sa, sb, sc) = (proj(&ac), proj(&bc), proj(&cc));
    for (i, w) in abc.weights.iter().enumerate() {
        let (mut ia, mut ib, mut ic) = (0, 0, 0);
        let mut idx = i;
        for (v, &card) in abc.cards.iter().enumerate() {
            let x = idx % card;
            idx /= card;
            ia += x * sa[v];
            ib += x * sb[v];
            ic += x * sc[v];
        }
        if w * &cc.weights[ic] != &ac.weights[ia] * &bc.weights[ib] {
            return false;
        }
    }
    true
}

/// Glues two overlap-consistent tables into one over the union of their
/// variables: `P = p * q / m` with `m` the shared marginal and `0/0 := 0`.
/// The result reproduces both inputs as marginals and makes the two private
/// parts independent given the overlap.
pub fn adhesive_glue(p: &ProbTable, q: &ProbTable) -> Result<ProbTable> {
    for n in p.universe.labels() {
        if let Some(j) = q.universe.index_of(n) {
            let i = p.universe.index_of(n).expect("own label");
            if p.cards[i] != q.cards[j] {
                return Err(Error::InvalidInput(format!(
                    "variable {} has cardinality {} in one table and {} in the other",
                    n.as_str(),
                    p.cards[i],
                    q.cards[j]
                )));
            }
        }
    }
    let shared: Vec<NodeId> = p
        .universe
        .labels()
        .iter()
        .filter(|n| q.universe.index_of(n).is_some())
        .cloned()
        .collect();
    let mp = p.marginalize(&shared)?;
    let mq = q.marginalize(&shared)?;
    if mp.weights != mq.weights {
        let i = (0..mp.weights.len())
            .find(|&i| mp.weights[i] != mq.weights[i])
            .expect("some entry differs");
        return Err(Error::Inconsistent(format!(
            "tables disagree on shared marginal at ({}): {} vs {}",
            format_outcome(mp.universe.labels(), &outcome_of(i, &mp.cards)),
            mp.weights[i],
            mq.weights[i]
        )));
    }

    let mut union: Vec<NodeId> = p.universe.labels().to_vec();
    union.extend(
        q.universe
            .labels()
            .iter()
            .filter(|n| p.universe.index_of(n).is_none())
            .cloned(),
    );
    let universe = Universe::new(union)?;
    let cards: Vec<usize> = universe
        .labels()
        .iter()
        .map(|n| match p.universe.index_of(n) {
            Some(i) => p.cards[i],
            None => q.cards[q.universe.index_of(n).expect("label from q")],
        })
        .collect();
    // Strides from a union outcome into each factor table.
    let strides_into = |t: &ProbTable| -> Vec<usize> {
        let mut strides = vec![0usize; universe.len()];
        let mut stride = 1;
        // Factor tables are in canonical order themselves, so walking the
        // union in canonical order visits their variables in order too.
        for (i, n) in universe.labels().iter().enumerate() {
            if t.universe.index_of(n).is_some() {
                strides[i] = stride;
                stride *= cards[i];
            }
        }
        strides
    };
    let (sp, sq, sm) = (strides_into(p), strides_into(q), strides_into(&mp));
    let mut weights = vec![BigRational::zero(); mixed_radix_len(&cards)];
    for (i, slot) in weights.iter_mut().enumerate() {
        let (mut ip, mut iq, mut im) = (0, 0, 0);
        let mut idx = i;
        for (v, &card) in cards.iter().enumerate() {
            let x = idx % card;
            idx /= card;
            ip += x * sp[v];
            iq += x * sq[v];
            im += x * sm[v];
        }
        let m = &mp.weights[im];
        if !m.is_zero() {
            *slot = &p.weights[ip] * &q.weights[iq] / m;
        }
    }
    Ok(ProbTable::from_parts(universe, cards, weights))
}

/// Consistent marginal tables over the edges of a reduced hypergraph.
#[derive(Debug, Clone)]
pub struct MarginalScenario {
    hypergraph: Hypergraph,
    tables: Vec<ProbTable>,
}

impl MarginalScenario {
    /// Builds a scenario, checking that the hypergraph is reduced, each table
    /// covers exactly its edge's nodes, and overlapping tables agree exactly
    /// on shared sub-marginals.
    pub fn new(hypergraph: Hypergraph, tables: Vec<ProbTable>) -> Result<Self> {
        if !hypergraph.is_reduced() {
            return Err(Error::InvalidInput(
                "scenario hypergraph must contain only maximal edges".into(),
            ));
        }
        if tables.len() != hypergraph.edge_count() {
            return Err(Error::InvalidInput(format!(
                "{} tables for {} edges",
                tables.len(),
                hypergraph.edge_count()
            )));
        }
        let u = hypergraph.universe();
        let mut cards: HashMap<usize, usize> = HashMap::new();
        for (edge, t) in hypergraph.edge_masks().iter().zip(&tables) {
            let table_mask = u.mask_of(t.universe.labels()).map_err(|_| {
                Error::InvalidInput("table variable outside the scenario".into())
            })?;
            if table_mask != *edge {
                return Err(Error::InvalidInput(format!(
                    "table over {{{}}} does not match edge {{{}}}",
                    u.format_set(table_mask),
                    u.format_set(*edge)
                )));
            }
            for (i, n) in t.universe.labels().iter().enumerate() {
                let g = u.index_of(n).expect("checked above");
                if let Some(&c) = cards.get(&g) {
                    if c != t.cards[i] {
                        return Err(Error::InvalidInput(format!(
                            "variable {} has cardinality {} in one table and {} in another",
                            n.as_str(),
                            c,
                            t.cards[i]
                        )));
                    }
                } else {
                    cards.insert(g, t.cards[i]);
                }
            }
        }
        for i in 0..tables.len() {
            for j in i + 1..tables.len() {
                let overlap = hypergraph.edge_masks()[i] & hypergraph.edge_masks()[j];
                if overlap == 0 {
                    continue;
                }
                let labels = u.set_of(overlap);
                let mi = tables[i].marginalize(&labels)?;
                let mj = tables[j].marginalize(&labels)?;
                if let Some(k) = (0..mi.weights.len()).find(|&k| mi.weights[k] != mj.weights[k]) {
                    return Err(Error::Inconsistent(format!(
                        "edges {{{}}} and {{{}}} disagree on shared marginal at ({}): {} vs {}",
                        u.format_set(hypergraph.edge_masks()[i]),
                        u.format_set(hypergraph.edge_masks()[j]),
                        format_outcome(mi.universe.labels(), &outcome_of(k, &mi.cards)),
                        mi.weights[k],
                        mj.weights[k]
                    )));
                }
            }
        }
        Ok(MarginalScenario { hypergraph, tables })
    }

    /// Scenario holding the marginals of a single joint on the reduction of
    /// `h`. Consistency holds by construction.
    pub fn from_joint(p: &ProbTable, h: &Hypergraph) -> Result<Self> {
        let reduced = reduce(h);
        let tables: Result<Vec<ProbTable>> = reduced
            .edges()
            .iter()
            .map(|edge| p.marginalize(edge))
            .collect();
        MarginalScenario::new(reduced, tables?)
    }

    /// The reduced scenario hypergraph.
    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    /// Tables aligned with the hypergraph's edges.
    pub fn tables(&self) -> &[ProbTable] {
        &self.tables
    }
}

/// Extends an acyclic scenario to a single joint table by gluing along a
/// running-intersection ordering. The result reproduces every input table as
/// a marginal and is Markov with respect to the scenario's 2-section.
pub fn vorobev_extend(m: &MarginalScenario) -> Result<ProbTable> {
    let rio = rio_ordering(m.hypergraph()).ok_or_else(|| {
        Error::InvalidInput("scenario hypergraph is cyclic, no gluing order exists".into())
    })?;
    let table_of = |mask: Mask| -> &ProbTable {
        let pos = m
            .hypergraph()
            .edge_masks()
            .iter()
            .position(|&e| e == mask)
            .expect("ordering permutes the edges");
        &m.tables[pos]
    };
    let order = rio.edge_masks();
    let mut acc = table_of(order[0]).clone();
    for &edge in &order[1..] {
        acc = adhesive_glue(&acc, table_of(edge))?;
    }
    Ok(acc)
}
