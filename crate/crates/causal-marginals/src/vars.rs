//! Variable labels, ordered universes and subset masks.
//!
//! Every structure in this crate works over a small, explicitly ordered set of
//! named variables. Subsets are represented as bitmasks over that order, which
//! keeps set algebra cheap and gives every collection a single canonical
//! ordering: sets are compared by cardinality first, then lexicographically by
//! their sorted member labels.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// A variable (node) label.
///
/// Labels are nonempty and must not contain commas, parentheses or whitespace;
/// they appear verbatim inside coordinate labels such as `H(A,B)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    /// Validates and wraps a label.
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::InvalidInput("empty node label".into()));
        }
        if label
            .chars()
            .any(|c| c == ',' || c == '(' || c == ')' || c == '=' || c.is_whitespace())
        {
            return Err(Error::InvalidInput(format!(
                "node label {label:?} contains a reserved character"
            )));
        }
        Ok(NodeId(label))
    }

    /// The label text.
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for NodeId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        NodeId::new(s)
    }
}

impl From<NodeId> for String {
    fn from(n: NodeId) -> String {
        n.0
    }
}

/// Convenience constructor used pervasively in tests.
pub fn node(label: &str) -> NodeId {
    NodeId::new(label).expect("valid node label")
}

/// Subset of a universe, as a bitmask over its variable order.
pub type Mask = u64;

/// An ordered, deduplicated set of variable labels.
///
/// The order is always ascending by label, so mask bit `i` refers to the
/// `i`-th smallest label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Universe {
    labels: Vec<NodeId>,
}

impl Universe {
    /// Builds a universe from labels, sorting and rejecting duplicates.
    pub fn new(mut labels: Vec<NodeId>) -> Result<Self> {
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate node label".into()));
        }
        if labels.len() > Mask::BITS as usize {
            return Err(Error::GuardExceeded {
                what: "universe size",
                actual: labels.len(),
                limit: Mask::BITS as usize,
            });
        }
        Ok(Universe { labels })
    }

    /// Number of variables.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// True when the universe is empty.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// All labels in canonical order.
    pub fn labels(&self) -> &[NodeId] {
        &self.labels
    }

    /// Index of a label.
    pub fn index_of(&self, n: &NodeId) -> Option<usize> {
        self.labels.binary_search(n).ok()
    }

    /// Mask with every variable present.
    pub fn full_mask(&self) -> Mask {
        if self.labels.is_empty() {
            0
        } else {
            (Mask::MAX) >> (Mask::BITS as usize - self.labels.len())
        }
    }

    /// Translates labels into a mask, rejecting unknown labels.
    pub fn mask_of<'a, I: IntoIterator<Item = &'a NodeId>>(&self, nodes: I) -> Result<Mask> {
        let mut m = 0;
        for n in nodes {
            let i = self
                .index_of(n)
                .ok_or_else(|| Error::InvalidInput(format!("unknown node {n}")))?;
            m |= 1 << i;
        }
        Ok(m)
    }

    /// Materializes a mask as sorted labels.
    pub fn set_of(&self, mask: Mask) -> Vec<NodeId> {
        self.iter_mask(mask).cloned().collect()
    }

    /// Iterates the labels of a mask in canonical order.
    pub fn iter_mask(&self, mask: Mask) -> impl Iterator<Item = &NodeId> {
        let mut m = mask;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(&self.labels[i])
            }
        })
    }

    /// Canonical set order: cardinality first, then lexicographic member order.
    pub fn cmp_sets(&self, a: Mask, b: Mask) -> Ordering {
        a.count_ones()
            .cmp(&b.count_ones())
            .then_with(|| {
                // Same size: compare sorted index sequences, which matches
                // lexicographic comparison of sorted label vectors.
                let (mut x, mut y) = (a, b);
                while x != 0 && y != 0 {
                    let (i, j) = (x.trailing_zeros(), y.trailing_zeros());
                    match i.cmp(&j) {
                        Ordering::Equal => {
                            x &= x - 1;
                            y &= y - 1;
                        }
                        other => return other,
                    }
                }
                Ordering::Equal
            })
    }

    /// Renders a mask as a comma-joined label list.
    pub fn format_set(&self, mask: Mask) -> String {
        self.set_of(mask)
            .iter()
            .map(|n| n.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// All 2^n subset masks of `full`, in ascending numeric (bitmask) order.
pub fn subsets_of(full: Mask) -> Vec<Mask> {
    let mut out = Vec::with_capacity(1 << full.count_ones());
    let mut s: Mask = 0;
    loop {
        out.push(s);
        if s == full {
            break;
        }
        s = (s.wrapping_sub(full)) & full;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_reject_reserved_characters() {
        assert!(NodeId::new("A1").is_ok());
        assert!(NodeId::new("").is_err());
        assert!(NodeId::new("A,B").is_err());
        assert!(NodeId::new("H(").is_err());
        assert!(NodeId::new("a b").is_err());
    }

    #[test]
    fn universe_sorts_and_masks() {
        let u = Universe::new(vec![node("B"), node("A"), node("C")]).unwrap();
        assert_eq!(u.labels(), &[node("A"), node("B"), node("C")]);
        let m = u.mask_of(&[node("C"), node("A")]).unwrap();
        assert_eq!(u.set_of(m), vec![node("A"), node("C")]);
        assert_eq!(u.full_mask(), 0b111);
    }

    #[test]
    fn set_order_is_size_then_lex() {
        let u = Universe::new(vec![node("A"), node("B"), node("C")]).unwrap();
        let a = u.mask_of(&[node("C")]).unwrap();
        let b = u.mask_of(&[node("A"), node("B")]).unwrap();
        assert_eq!(u.cmp_sets(a, b), Ordering::Less);
        let c = u.mask_of(&[node("A"), node("C")]).unwrap();
        assert_eq!(u.cmp_sets(b, c), Ordering::Less);
    }

    #[test]
    fn subset_enumeration_is_complete() {
        let subs = subsets_of(0b1011);
        assert_eq!(subs.len(), 8);
        assert!(subs.contains(&0b0010));
        assert!(subs.iter().all(|s| s & !0b1011 == 0));
    }
}
