//! Exact rational linear-inequality systems and the operations on them:
//! Fourier-Motzkin projection, LP-certified redundancy removal, and
//! double-description ray enumeration.
//!
//! Everything in this module is integer/rational arithmetic; no floating
//! point. Rows are stored with integer coefficients in lowest terms, so row
//! identity is literal equality and systems can be compared textually.

pub mod dd;
pub mod fm;
pub mod lp;
pub mod redundancy;

pub use dd::{
    contains_ray, enumerate_rays, enumerate_rays_with, in_cone_hull, rays_to_constraints,
    ConeGenerators, DdOptions,
};
pub use fm::{fm_eliminate, fm_eliminate_with, FmOptions};
pub use lp::LpOutcome;
pub use redundancy::{intersect, lp_remove_redundant, PruneResult};

use crate::vars::NodeId;
use crate::{Error, Result};
use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

/// One axis of a system: an entropy coordinate `H(S)` or a probability
/// coordinate `p(X=x,Y=y,...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Coord {
    /// Joint entropy of a variable set, sorted; `H()` is the empty set.
    Entropy(Vec<NodeId>),
    /// Probability of one joint outcome of a variable set, sorted by variable.
    Prob(Vec<(NodeId, usize)>),
}

impl Coord {
    /// Entropy coordinate over `labels` (sorted, deduplicated).
    pub fn entropy<I: IntoIterator<Item = NodeId>>(labels: I) -> Coord {
        let mut v: Vec<NodeId> = labels.into_iter().collect();
        v.sort();
        v.dedup();
        Coord::Entropy(v)
    }

    /// Probability coordinate for one outcome of a variable set.
    pub fn prob<I: IntoIterator<Item = (NodeId, usize)>>(pairs: I) -> Result<Coord> {
        let mut v: Vec<(NodeId, usize)> = pairs.into_iter().collect();
        v.sort();
        for w in v.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!(
                    "repeated variable {} in probability coordinate",
                    w[0].0.as_str()
                )));
            }
        }
        if v.is_empty() {
            return Err(Error::InvalidInput(
                "probability coordinate needs at least one variable".into(),
            ));
        }
        Ok(Coord::Prob(v))
    }
}

impl Ord for Coord {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Coord::Entropy(a), Coord::Entropy(b)) => {
                a.len().cmp(&b.len()).then_with(|| a.cmp(b))
            }
            (Coord::Entropy(_), Coord::Prob(_)) => Ordering::Less,
            (Coord::Prob(_), Coord::Entropy(_)) => Ordering::Greater,
            (Coord::Prob(a), Coord::Prob(b)) => a
                .len()
                .cmp(&b.len())
                .then_with(|| {
                    a.iter()
                        .map(|(n, _)| n)
                        .cmp(b.iter().map(|(n, _)| n))
                })
                .then_with(|| a.iter().map(|(_, x)| x).cmp(b.iter().map(|(_, x)| x))),
        }
    }
}

impl PartialOrd for Coord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Entropy(s) => {
                let inner = s.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(",");
                write!(f, "H({inner})")
            }
            Coord::Prob(pairs) => {
                let inner = pairs
                    .iter()
                    .map(|(n, x)| format!("{}={}", n.as_str(), x))
                    .collect::<Vec<_>>()
                    .join(",");
                write!(f, "p({inner})")
            }
        }
    }
}

impl FromStr for Coord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Coord> {
        let bad = || Error::InvalidInput(format!("bad coordinate '{s}'"));
        let inner = |prefix: &str| -> Option<&str> {
            s.strip_prefix(prefix)?.strip_suffix(')')
        };
        if let Some(body) = inner("H(") {
            if body.is_empty() {
                return Ok(Coord::Entropy(Vec::new()));
            }
            let labels: Result<Vec<NodeId>> =
                body.split(',').map(NodeId::new).collect();
            Ok(Coord::entropy(labels?))
        } else if let Some(body) = inner("p(") {
            let pairs: Result<Vec<(NodeId, usize)>> = body
                .split(',')
                .map(|part| {
                    let (name, val) = part.split_once('=').ok_or_else(bad)?;
                    let x: usize = val.parse().map_err(|_| bad())?;
                    Ok((NodeId::new(name)?, x))
                })
                .collect();
            Coord::prob(pairs?)
        } else {
            Err(bad())
        }
    }
}

impl Serialize for Coord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_string().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One row `coeffs . x >= rhs` (or `= rhs`), integer and in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Row {
    /// Integer coefficients aligned with the system's coords.
    pub coeffs: Vec<BigInt>,
    /// Integer right-hand side.
    pub rhs: BigInt,
}

impl Row {
    /// Builds a normalized row from integer data: divides through by the gcd.
    pub fn new(coeffs: Vec<BigInt>, rhs: BigInt) -> Row {
        let mut row = Row { coeffs, rhs };
        row.normalize();
        row
    }

    /// Builds a normalized row from rational data: clears denominators first.
    pub fn from_rationals(coeffs: &[BigRational], rhs: &BigRational) -> Row {
        let mut lcm = rhs.denom().clone();
        for c in coeffs {
            lcm = lcm.lcm(c.denom());
        }
        let scale = |q: &BigRational| -> BigInt { q.numer() * (&lcm / q.denom()) };
        Row::new(coeffs.iter().map(scale).collect(), scale(rhs))
    }

    /// All coefficients zero.
    pub fn is_zero_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Exact value of `coeffs . x`.
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        self.coeffs
            .iter()
            .zip(point)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, x)| BigRational::from_integer(c.clone()) * x)
            .sum()
    }

    fn normalize(&mut self) {
        let mut g = self.rhs.abs();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        if g > BigInt::one() {
            for c in &mut self.coeffs {
                *c /= &g;
            }
            self.rhs /= &g;
        }
    }

    /// Flips the sign of every entry (reverses an inequality's direction).
    pub fn negated(&self) -> Row {
        Row {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            rhs: -&self.rhs,
        }
    }

    /// Sign-normalizes so the first nonzero coefficient is positive; only
    /// meaningful for equalities.
    fn sign_normalize(&mut self) {
        let lead = self.coeffs.iter().find(|c| !c.is_zero());
        let flip = match lead {
            Some(c) => c.sign() == Sign::Minus,
            None => self.rhs.is_negative(),
        };
        if flip {
            for c in &mut self.coeffs {
                *c = -&*c;
            }
            self.rhs = -&self.rhs;
        }
    }
}

/// A finite system `{x : A x >= b, C x = d}` over named coordinates.
///
/// Coordinates are unique and kept in canonical order. Rows are normalized;
/// trivially true rows are dropped on insertion and a trivially false row is
/// stored as the canonical `0 >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinIneqSystem {
    coords: Vec<Coord>,
    ineqs: Vec<Row>,
    eqs: Vec<Row>,
}

#[derive(Serialize, Deserialize)]
struct RowDto {
    coeffs: Vec<String>,
    rhs: String,
}

#[derive(Serialize, Deserialize)]
struct SystemDto {
    coords: Vec<Coord>,
    ineqs: Vec<RowDto>,
    eqs: Vec<RowDto>,
}

impl Serialize for LinIneqSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let row = |r: &Row| RowDto {
            coeffs: r.coeffs.iter().map(|c| c.to_string()).collect(),
            rhs: r.rhs.to_string(),
        };
        SystemDto {
            coords: self.coords.clone(),
            ineqs: self.ineqs.iter().map(row).collect(),
            eqs: self.eqs.iter().map(row).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinIneqSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let dto = SystemDto::deserialize(d)?;
        let width = dto.coords.len();
        let mut sys = LinIneqSystem::new(dto.coords).map_err(DeError::custom)?;
        let parse_row = |r: &RowDto| -> Result<(Vec<BigInt>, BigInt)> {
            if r.coeffs.len() != width {
                return Err(Error::InvalidInput(format!(
                    "row has {} coefficients, expected {}",
                    r.coeffs.len(),
                    width
                )));
            }
            let coeffs: Result<Vec<BigInt>> = r
                .coeffs
                .iter()
                .map(|c| {
                    c.parse()
                        .map_err(|_| Error::InvalidInput(format!("bad integer '{c}'")))
                })
                .collect();
            let rhs = r
                .rhs
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad integer '{}'", r.rhs)))?;
            Ok((coeffs?, rhs))
        };
        for r in &dto.ineqs {
            let (coeffs, rhs) = parse_row(r).map_err(DeError::custom)?;
            sys.add_ineq(coeffs, rhs);
        }
        for r in &dto.eqs {
            let (coeffs, rhs) = parse_row(r).map_err(DeError::custom)?;
            sys.add_eq(coeffs, rhs);
        }
        Ok(sys)
    }
}

impl LinIneqSystem {
    /// New empty system; coords are sorted canonically and must be unique.
    pub fn new(mut coords: Vec<Coord>) -> Result<Self> {
        coords.sort();
        for w in coords.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput(format!(
                    "duplicate coordinate {}",
                    w[0]
                )));
            }
        }
        Ok(LinIneqSystem {
            coords,
            ineqs: Vec::new(),
            eqs: Vec::new(),
        })
    }

    /// The coordinate axes in canonical order.
    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    /// Position of a coordinate.
    pub fn coord_index(&self, c: &Coord) -> Option<usize> {
        self.coords.binary_search(c).ok()
    }

    /// Inequality rows.
    pub fn ineqs(&self) -> &[Row] {
        &self.ineqs
    }

    /// Equality rows.
    pub fn eqs(&self) -> &[Row] {
        &self.eqs
    }

    /// Total row count.
    pub fn row_count(&self) -> usize {
        self.ineqs.len() + self.eqs.len()
    }

    /// Adds `coeffs . x >= rhs`.
    pub fn add_ineq(&mut self, coeffs: Vec<BigInt>, rhs: BigInt) {
        assert_eq!(coeffs.len(), self.coords.len(), "row width mismatch");
        let row = Row::new(coeffs, rhs);
        if row.is_zero_coeffs() {
            if row.rhs.is_positive() {
                self.mark_infeasible();
            }
            return;
        }
        self.ineqs.push(row);
    }

    /// Adds `coeffs . x = rhs`.
    pub fn add_eq(&mut self, coeffs: Vec<BigInt>, rhs: BigInt) {
        assert_eq!(coeffs.len(), self.coords.len(), "row width mismatch");
        let mut row = Row::new(coeffs, rhs);
        if row.is_zero_coeffs() {
            if !row.rhs.is_zero() {
                self.mark_infeasible();
            }
            return;
        }
        row.sign_normalize();
        self.eqs.push(row);
    }

    /// Adds an inequality given as rationals.
    pub fn add_ineq_rat(&mut self, coeffs: &[BigRational], rhs: &BigRational) {
        let row = Row::from_rationals(coeffs, rhs);
        self.add_ineq(row.coeffs, row.rhs);
    }

    /// Adds an equality given as rationals.
    pub fn add_eq_rat(&mut self, coeffs: &[BigRational], rhs: &BigRational) {
        let row = Row::from_rationals(coeffs, rhs);
        self.add_eq(row.coeffs, row.rhs);
    }

    /// Replaces the rows wholesale with already-normalized ones.
    pub(crate) fn set_rows(&mut self, ineqs: Vec<Row>, eqs: Vec<Row>) {
        self.ineqs = ineqs;
        self.eqs = eqs;
    }

    /// Replaces all rows with the canonical unsatisfiable row `0 >= 1`.
    pub(crate) fn mark_infeasible(&mut self) {
        self.ineqs = vec![Row {
            coeffs: vec![BigInt::zero(); self.coords.len()],
            rhs: BigInt::one(),
        }];
        self.eqs.clear();
    }

    /// True when the system is the canonical unsatisfiable form.
    pub fn is_trivially_infeasible(&self) -> bool {
        self.ineqs.iter().any(|r| r.is_zero_coeffs() && r.rhs.is_positive())
    }

    /// All right-hand sides zero (a cone, when there are no equalities with
    /// nonzero rhs either).
    pub fn is_homogeneous(&self) -> bool {
        self.ineqs
            .iter()
            .chain(&self.eqs)
            .all(|r| r.rhs.is_zero())
    }

    /// Exact membership test.
    pub fn satisfied_by(&self, point: &[BigRational]) -> bool {
        assert_eq!(point.len(), self.coords.len(), "point width mismatch");
        self.ineqs.iter().all(|r| {
            r.eval(point) >= BigRational::from_integer(r.rhs.clone())
        }) && self.eqs.iter().all(|r| {
            r.eval(point) == BigRational::from_integer(r.rhs.clone())
        })
    }

    /// A copy with the listed coordinates pinned to fixed values by
    /// equality rows. Used for lifted membership tests: a point lies in a
    /// projection iff pinning the projected coordinates leaves the source
    /// system feasible.
    pub fn with_pinned(&self, coords: &[Coord], values: &[BigRational]) -> Result<LinIneqSystem> {
        if coords.len() != values.len() {
            return Err(Error::InvalidInput(
                "pinned coords and values differ in length".into(),
            ));
        }
        let mut out = self.clone();
        for (c, v) in coords.iter().zip(values) {
            let idx = self
                .coord_index(c)
                .ok_or_else(|| Error::InvalidInput(format!("coordinate {c} not in the system")))?;
            let mut coeffs = vec![BigRational::zero(); self.coords.len()];
            coeffs[idx] = BigRational::one();
            out.add_eq_rat(&coeffs, v);
        }
        Ok(out)
    }

    /// Sorts rows canonically and removes duplicates.
    pub fn canonicalize(&mut self) {
        self.ineqs.sort();
        self.ineqs.dedup();
        self.eqs.sort();
        self.eqs.dedup();
    }

    /// New system over a subset of coords; rows must not touch dropped coords.
    pub(crate) fn restricted_to(&self, keep: &[usize]) -> LinIneqSystem {
        let kept: HashSet<usize> = keep.iter().copied().collect();
        let shrink = |r: &Row| -> Row {
            debug_assert!(r
                .coeffs
                .iter()
                .enumerate()
                .all(|(i, c)| kept.contains(&i) || c.is_zero()));
            Row {
                coeffs: keep.iter().map(|&i| r.coeffs[i].clone()).collect(),
                rhs: r.rhs.clone(),
            }
        };
        LinIneqSystem {
            coords: keep.iter().map(|&i| self.coords[i].clone()).collect(),
            ineqs: self.ineqs.iter().map(shrink).collect(),
            eqs: self.eqs.iter().map(shrink).collect(),
        }
    }

    fn row_to_text(&self, row: &Row, op: &str) -> String {
        let mut out = String::new();
        for (c, coord) in row.coeffs.iter().zip(&self.coords) {
            if c.is_zero() {
                continue;
            }
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else if c.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&format!("{}*{}", c.abs(), coord));
        }
        if out.is_empty() {
            out.push('0');
        }
        out.push_str(&format!(" {op} {}", row.rhs));
        out
    }

    /// Renders the system in the line-per-row text format. Rows come out in
    /// stored order; call [`canonicalize`](Self::canonicalize) first for a
    /// deterministic golden form.
    pub fn to_text(&self) -> String {
        let mut lines = Vec::with_capacity(self.row_count());
        for r in &self.eqs {
            lines.push(self.row_to_text(r, "="));
        }
        for r in &self.ineqs {
            lines.push(self.row_to_text(r, ">="));
        }
        lines.join("\n")
    }

    /// Parses the text format. Coordinates are the union of those mentioned,
    /// in canonical order; `#` lines are comments.
    pub fn from_text(text: &str) -> Result<LinIneqSystem> {
        struct Parsed {
            terms: Vec<(BigRational, Coord)>,
            rhs: BigRational,
            eq: bool,
        }
        let mut rows: Vec<Parsed> = Vec::new();
        let mut coords: Vec<Coord> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            // Relations are space-delimited; the '=' inside probability
            // coordinate labels like p(A=0) never has surrounding spaces.
            let (lhs, rhs_str, eq, flip) = if let Some((l, r)) = line.split_once(" >= ") {
                (l, r, false, false)
            } else if let Some((l, r)) = line.split_once(" <= ") {
                (l, r, false, true)
            } else if let Some((l, r)) = line.split_once(" = ") {
                (l, r, true, false)
            } else {
                return Err(Error::InvalidInput(format!("no relation in '{line}'")));
            };
            let rhs: BigRational = rhs_str
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad rhs in '{line}'")))?;
            let mut terms = Vec::new();
            // Tokenize on +/- connectives surrounded by spaces; a leading
            // '-' binds to the first term.
            let mut rest = lhs.trim();
            let mut sign = BigRational::one();
            if let Some(r) = rest.strip_prefix('-') {
                sign = -sign;
                rest = r.trim_start();
            }
            loop {
                let (term, tail) = match rest.find(" + ").into_iter().chain(rest.find(" - ")).min()
                {
                    Some(pos) => {
                        let next_sign = if &rest[pos..pos + 3] == " + " {
                            BigRational::one()
                        } else {
                            -BigRational::one()
                        };
                        let (t, rem) = (&rest[..pos], &rest[pos + 3..]);
                        (t, Some((rem, next_sign)))
                    }
                    None => (rest, None),
                };
                let term = term.trim();
                if term != "0" {
                    let (coeff, coord_str) = match term.split_once('*') {
                        Some((c, k)) => {
                            let q: BigRational = c.trim().parse().map_err(|_| {
                                Error::InvalidInput(format!("bad coefficient in '{term}'"))
                            })?;
                            (q, k.trim())
                        }
                        None => (BigRational::one(), term),
                    };
                    let coord: Coord = coord_str.parse()?;
                    terms.push((&sign * coeff, coord));
                }
                match tail {
                    Some((rem, s)) => {
                        rest = rem;
                        sign = s;
                    }
                    None => break,
                }
            }
            let (terms, rhs) = if flip {
                (
                    terms.into_iter().map(|(q, c)| (-q, c)).collect(),
                    -rhs,
                )
            } else {
                (terms, rhs)
            };
            for (_, c) in &terms {
                if !coords.contains(c) {
                    coords.push(c.clone());
                }
            }
            rows.push(Parsed { terms, rhs, eq });
        }
        let mut sys = LinIneqSystem::new(coords)?;
        for p in rows {
            let mut coeffs = vec![BigRational::zero(); sys.coords.len()];
            for (q, c) in p.terms {
                let i = sys.coord_index(&c).expect("collected above");
                coeffs[i] += q;
            }
            if p.eq {
                sys.add_eq_rat(&coeffs, &p.rhs);
            } else {
                sys.add_ineq_rat(&coeffs, &p.rhs);
            }
        }
        Ok(sys)
    }
}

/// A direction vector of a cone, integer and in lowest terms with positive
/// scaling fixed (rays are only scalable by positive factors).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ray {
    /// Integer direction aligned with a system's coords.
    pub direction: Vec<BigInt>,
}

impl Ray {
    /// Normalizes by the (positive) gcd; rejects the zero vector.
    pub fn new(direction: Vec<BigInt>) -> Result<Ray> {
        if direction.iter().all(|c| c.is_zero()) {
            return Err(Error::InvalidInput("zero ray".into()));
        }
        let mut g = BigInt::zero();
        for c in &direction {
            g = g.gcd(c);
        }
        let direction = direction.iter().map(|c| c / &g).collect();
        Ok(Ray { direction })
    }

    /// Builds from rationals by clearing denominators.
    pub fn from_rationals(direction: &[BigRational]) -> Result<Ray> {
        let mut lcm = BigInt::one();
        for c in direction {
            lcm = lcm.lcm(c.denom());
        }
        Ray::new(
            direction
                .iter()
                .map(|q| q.numer() * (&lcm / q.denom()))
                .collect(),
        )
    }

    /// The direction as rationals.
    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.direction
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vars::node;

    fn ent(labels: &[&str]) -> Coord {
        Coord::entropy(labels.iter().map(|s| node(s)))
    }

    fn int_row(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn coord_order_is_size_then_lex_then_kind() {
        let mut cs = vec![
            Coord::prob([(node("A"), 1)].into_iter()).unwrap(),
            ent(&["B"]),
            ent(&["A", "B"]),
            ent(&["A"]),
            Coord::prob([(node("A"), 0)].into_iter()).unwrap(),
        ];
        cs.sort();
        let shown: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["H(A)", "H(B)", "H(A,B)", "p(A=0)", "p(A=1)"]);
    }

    #[test]
    fn coord_display_parse_roundtrip() {
        for s in ["H()", "H(A)", "H(A,B1)", "p(A=0)", "p(A1=0,B1=3)"] {
            let c: Coord = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!("H(A".parse::<Coord>().is_err());
        assert!("q(A=0)".parse::<Coord>().is_err());
        assert!("p(A)".parse::<Coord>().is_err());
        assert!("p(A=0,A=1)".parse::<Coord>().is_err());
    }

    #[test]
    fn rows_are_gcd_normalized() {
        let r = Row::new(int_row(&[2, -4]), BigInt::from(6));
        assert_eq!(r.coeffs, int_row(&[1, -2]));
        assert_eq!(r.rhs, BigInt::from(3));
        let q = Row::from_rationals(
            &[BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 3.into())],
            &BigRational::zero(),
        );
        assert_eq!(q.coeffs, int_row(&[3, 2]));
    }

    #[test]
    fn trivial_rows_fold_into_feasibility() {
        let mut sys = LinIneqSystem::new(vec![ent(&["A"])]).unwrap();
        sys.add_ineq(int_row(&[0]), BigInt::from(-3));
        assert_eq!(sys.row_count(), 0);
        sys.add_ineq(int_row(&[0]), BigInt::from(2));
        assert!(sys.is_trivially_infeasible());
        assert_eq!(sys.ineqs()[0].rhs, BigInt::one());
    }

    #[test]
    fn equalities_are_sign_normalized() {
        let mut sys = LinIneqSystem::new(vec![ent(&["A"]), ent(&["B"])]).unwrap();
        sys.add_eq(int_row(&[-2, 2]), BigInt::zero());
        assert_eq!(sys.eqs()[0].coeffs, int_row(&[1, -1]));
    }

    #[test]
    fn membership_is_exact() {
        let mut sys = LinIneqSystem::new(vec![ent(&["A"]), ent(&["B"])]).unwrap();
        sys.add_ineq(int_row(&[1, 0]), BigInt::zero());
        sys.add_eq(int_row(&[1, -1]), BigInt::zero());
        let third = BigRational::new(1.into(), 3.into());
        assert!(sys.satisfied_by(&[third.clone(), third.clone()]));
        assert!(!sys.satisfied_by(&[third.clone(), BigRational::zero()]));
        assert!(!sys.satisfied_by(&[-third.clone(), -third]));
    }

    #[test]
    fn text_roundtrip_preserves_rows() {
        let mut sys = LinIneqSystem::new(vec![ent(&["A"]), ent(&["B"]), ent(&["A", "B"])]).unwrap();
        sys.add_ineq(int_row(&[1, 1, -1]), BigInt::zero());
        sys.add_ineq(int_row(&[-1, 0, 1]), BigInt::zero());
        sys.add_eq(int_row(&[1, -1, 0]), BigInt::from(2));
        sys.canonicalize();
        let text = sys.to_text();
        assert_eq!(
            text,
            "1*H(A) - 1*H(B) = 2\n-1*H(A) + 1*H(A,B) >= 0\n1*H(A) + 1*H(B) - 1*H(A,B) >= 0"
        );
        let back = LinIneqSystem::from_text(&text).unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn text_parse_handles_comments_flips_and_bare_terms() {
        let sys = LinIneqSystem::from_text(
            "# provenance\n2*H(A) <= 1\nH(A) + H(B) >= 1/2\n",
        )
        .unwrap();
        assert_eq!(sys.ineqs().len(), 2);
        // 2 H(A) <= 1 became -2 H(A) >= -1.
        let r = &sys.ineqs()[0];
        assert!(
            r.coeffs == vec![BigInt::from(-2), BigInt::zero()] && r.rhs == BigInt::from(-1)
                || r.coeffs == vec![BigInt::from(2), BigInt::from(2)]
        );
    }

    #[test]
    fn text_roundtrip_with_probability_coords() {
        let c00 = Coord::prob([(node("A"), 0), (node("B"), 0)].into_iter()).unwrap();
        let c01 = Coord::prob([(node("A"), 0), (node("B"), 1)].into_iter()).unwrap();
        let mut sys = LinIneqSystem::new(vec![c00, c01]).unwrap();
        sys.add_ineq(int_row(&[1, 0]), BigInt::zero());
        sys.add_eq(int_row(&[1, 1]), BigInt::one());
        let text = sys.to_text();
        assert_eq!(
            text,
            "1*p(A=0,B=0) + 1*p(A=0,B=1) = 1\n1*p(A=0,B=0) >= 0"
        );
        assert_eq!(LinIneqSystem::from_text(&text).unwrap(), sys);
    }

    #[test]
    fn infeasible_row_text_form() {
        let mut sys = LinIneqSystem::new(vec![ent(&["A"])]).unwrap();
        sys.mark_infeasible();
        assert_eq!(sys.to_text(), "0 >= 1");
        let back = LinIneqSystem::from_text("0 >= 1").unwrap();
        assert!(back.is_trivially_infeasible());
    }

    #[test]
    fn json_roundtrip() {
        let mut sys = LinIneqSystem::new(vec![ent(&["A"]), ent(&["B"])]).unwrap();
        sys.add_ineq(int_row(&[3, -1]), BigInt::one());
        let json = serde_json::to_string(&sys).unwrap();
        let back: LinIneqSystem = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn rays_normalize_by_positive_gcd_only() {
        let r = Ray::new(int_row(&[-2, 4])).unwrap();
        assert_eq!(r.direction, int_row(&[-1, 2]));
        assert!(Ray::new(int_row(&[0, 0])).is_err());
        let q = Ray::from_rationals(&[
            BigRational::new((-1).into(), 2.into()),
            BigRational::new(3.into(), 4.into()),
        ])
        .unwrap();
        assert_eq!(q.direction, int_row(&[-2, 3]));
    }
}
