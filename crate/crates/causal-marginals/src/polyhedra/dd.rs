//! Double description: exact conversion between the constraint and the
//! generator view of a polyhedral cone.
//!
//! Constraints are inserted one at a time into a generator pair (lineality
//! basis, extreme rays). While a constraint's normal has a component inside
//! the lineality space the update is a cheap basis exchange; once it is
//! orthogonal to the lineality the classic adjacent-pair combination step
//! runs, with adjacency decided by zero-set inclusion over the inequalities
//! processed so far. Equalities are processed first so the saturation
//! bookkeeping only ever tracks inequalities.

use super::{lp, Coord, LinIneqSystem, Ray};
use crate::{par, Error, Result};
use num::{BigInt, Integer, Signed, Zero};
use std::collections::HashSet;

/// Tuning knobs for [`enumerate_rays`].
#[derive(Debug, Clone)]
pub struct DdOptions {
    /// Hard cap on the coordinate count; ray counts explode in the dimension.
    pub max_coords: usize,
}

impl Default for DdOptions {
    fn default() -> Self {
        DdOptions { max_coords: 24 }
    }
}

/// Generator view of a cone: conic hull of `rays` plus the span of
/// `lineality`. Lineality vectors are sign-fixed (first nonzero positive),
/// rays only up to positive scale; both lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeGenerators {
    pub lineality: Vec<Ray>,
    pub rays: Vec<Ray>,
}

impl ConeGenerators {
    /// Every generator as a plain ray, with both signs for lineality
    /// vectors. The conic hull of the result is the whole cone.
    pub fn all_ray_directions(&self) -> Vec<Ray> {
        let mut out = self.rays.clone();
        for b in &self.lineality {
            out.push(b.clone());
            out.push(Ray::new(b.direction.iter().map(|c| -c).collect()).expect("nonzero"));
        }
        out
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }
}

type ZeroSet = Vec<u64>;

fn zs_meet(a: &ZeroSet, b: &ZeroSet) -> ZeroSet {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn zs_superset(big: &ZeroSet, small: &ZeroSet) -> bool {
    small.iter().zip(big).all(|(s, b)| s & b == *s)
}

fn zs_set(zs: &mut ZeroSet, bit: usize) {
    zs[bit / 64] |= 1 << (bit % 64);
}

struct DdRay {
    v: Vec<BigInt>,
    zs: ZeroSet,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Divides out the gcd; returns None for the zero vector.
fn reduce(v: Vec<BigInt>) -> Option<Vec<BigInt>> {
    let mut g = BigInt::zero();
    for c in &v {
        g = g.gcd(c);
    }
    if g.is_zero() {
        return None;
    }
    Some(v.iter().map(|c| c / &g).collect())
}

/// `s*x - t*y`, the direction-preserving combination used everywhere below.
fn combine(s: &BigInt, x: &[BigInt], t: &BigInt, y: &[BigInt]) -> Vec<BigInt> {
    x.iter().zip(y).map(|(a, b)| a * s - b * t).collect()
}

fn sign_fix(mut v: Vec<BigInt>) -> Vec<BigInt> {
    if let Some(first) = v.iter().find(|c| !c.is_zero()) {
        if first.is_negative() {
            for c in &mut v {
                *c = -&*c;
            }
        }
    }
    v
}

/// Core incremental step loop over integer constraint normals.
fn dd_core(dim: usize, eqs: &[Vec<BigInt>], ineqs: &[Vec<BigInt>]) -> ConeGenerators {
    let words = ineqs.len().div_ceil(64).max(1);
    let mut lin: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| {
            let mut e = vec![BigInt::zero(); dim];
            e[i] = BigInt::from(1);
            e
        })
        .collect();
    let mut rays: Vec<DdRay> = Vec::new();

    let all = eqs
        .iter()
        .map(|a| (a, true))
        .chain(ineqs.iter().map(|a| (a, false)));
    for (k, (a, is_eq)) in all.enumerate() {
        if a.iter().all(|c| c.is_zero()) {
            continue;
        }
        let ineq_bit = if is_eq { None } else { Some(k - eqs.len()) };

        if let Some(pos) = lin.iter().position(|b| !dot(a, b).is_zero()) {
            // Basis exchange: b0 carries the normal component, everything
            // else is projected into the new hyperplane.
            let mut b0 = lin.swap_remove(pos);
            if dot(a, &b0).is_negative() {
                b0 = b0.iter().map(|c| -c).collect();
            }
            let ab0 = dot(a, &b0);
            lin = lin
                .iter()
                .filter_map(|b| reduce(combine(&ab0, b, &dot(a, b), &b0)))
                .collect();
            let mut next = Vec::with_capacity(rays.len() + 1);
            for r in &rays {
                let Some(v) = reduce(combine(&ab0, &r.v, &dot(a, &r.v), &b0)) else {
                    continue;
                };
                let mut zs = r.zs.clone();
                if let Some(bit) = ineq_bit {
                    zs_set(&mut zs, bit);
                }
                next.push(DdRay { v, zs });
            }
            if let Some(bit) = ineq_bit {
                // b0 satisfied every earlier constraint with equality.
                let mut zs = vec![0u64; words];
                for earlier in 0..bit {
                    zs_set(&mut zs, earlier);
                }
                next.push(DdRay {
                    v: reduce(b0).expect("b0 nonzero"),
                    zs,
                });
            }
            rays = dedup_rays(next);
            continue;
        }

        let sg: Vec<i8> = rays
            .iter()
            .map(|r| match dot(a, &r.v).sign() {
                num::bigint::Sign::Plus => 1,
                num::bigint::Sign::NoSign => 0,
                num::bigint::Sign::Minus => -1,
            })
            .collect();
        let pos_idx: Vec<usize> = (0..rays.len()).filter(|&i| sg[i] > 0).collect();
        let neg_idx: Vec<usize> = (0..rays.len()).filter(|&i| sg[i] < 0).collect();

        let combos: Vec<DdRay> = par::flat_map_vec(&pos_idx, |&i| {
            let mut out = Vec::new();
            for &j in &neg_idx {
                let meet = zs_meet(&rays[i].zs, &rays[j].zs);
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(t, r)| t != i && t != j && zs_superset(&r.zs, &meet));
                if blocked {
                    continue;
                }
                let (ai, aj) = (dot(a, &rays[i].v), dot(a, &rays[j].v));
                // ai > 0 > aj, so both scales below are positive.
                let v = combine(&ai, &rays[j].v, &aj, &rays[i].v);
                let Some(v) = reduce(v) else { continue };
                let mut zs = meet;
                if let Some(bit) = ineq_bit {
                    zs_set(&mut zs, bit);
                }
                out.push(DdRay { v, zs });
            }
            out
        });

        let mut next = Vec::new();
        for (i, r) in rays.iter().enumerate() {
            let keep = if is_eq { sg[i] == 0 } else { sg[i] >= 0 };
            if !keep {
                continue;
            }
            let mut zs = r.zs.clone();
            if sg[i] == 0 {
                if let Some(bit) = ineq_bit {
                    zs_set(&mut zs, bit);
                }
            }
            next.push(DdRay {
                v: r.v.clone(),
                zs,
            });
        }
        next.extend(combos);
        rays = dedup_rays(next);
    }

    let mut lineality: Vec<Ray> = lin
        .into_iter()
        .map(|b| Ray::new(sign_fix(b)).expect("basis vectors are nonzero"))
        .collect();
    lineality.sort();
    let mut out_rays: Vec<Ray> = rays
        .into_iter()
        .map(|r| Ray::new(r.v).expect("reduced rays are nonzero"))
        .collect();
    out_rays.sort();
    ConeGenerators {
        lineality,
        rays: out_rays,
    }
}

fn dedup_rays(rays: Vec<DdRay>) -> Vec<DdRay> {
    let mut seen: HashSet<Vec<BigInt>> = HashSet::with_capacity(rays.len());
    rays.into_iter()
        .filter(|r| seen.insert(r.v.clone()))
        .collect()
}

/// Enumerates the generator view of a homogeneous system with default
/// options.
pub fn enumerate_rays(sys: &LinIneqSystem) -> Result<ConeGenerators> {
    enumerate_rays_with(sys, &DdOptions::default())
}

/// Enumerates the generator view of a homogeneous system.
pub fn enumerate_rays_with(sys: &LinIneqSystem, opts: &DdOptions) -> Result<ConeGenerators> {
    if !sys.is_homogeneous() {
        return Err(Error::InvalidInput(
            "ray enumeration needs a homogeneous system".into(),
        ));
    }
    let dim = sys.coords().len();
    if dim > opts.max_coords {
        return Err(Error::GuardExceeded {
            what: "ray enumeration coordinates".into(),
            actual: dim,
            limit: opts.max_coords,
        });
    }
    let eqs: Vec<Vec<BigInt>> = sys.eqs().iter().map(|r| r.coeffs.clone()).collect();
    let ineqs: Vec<Vec<BigInt>> = sys.ineqs().iter().map(|r| r.coeffs.clone()).collect();
    Ok(dd_core(dim, &eqs, &ineqs))
}

/// Exact membership of a direction in a homogeneous system's cone.
pub fn contains_ray(sys: &LinIneqSystem, ray: &Ray) -> Result<bool> {
    if !sys.is_homogeneous() {
        return Err(Error::InvalidInput(
            "cone membership needs a homogeneous system".into(),
        ));
    }
    if ray.direction.len() != sys.coords().len() {
        return Err(Error::InvalidInput(format!(
            "ray has {} components, system has {} coordinates",
            ray.direction.len(),
            sys.coords().len()
        )));
    }
    let ok_eqs = sys.eqs().iter().all(|r| dot(&r.coeffs, &ray.direction).is_zero());
    let ok_ineqs = sys
        .ineqs()
        .iter()
        .all(|r| !dot(&r.coeffs, &ray.direction).is_negative());
    Ok(ok_eqs && ok_ineqs)
}

/// Whether `target` is a nonnegative combination of `rays` (exact LP).
pub fn in_cone_hull(rays: &[Ray], target: &Ray) -> Result<bool> {
    for r in rays {
        if r.direction.len() != target.direction.len() {
            return Err(Error::InvalidInput(
                "mixed dimensions in cone hull test".into(),
            ));
        }
    }
    let columns: Vec<Vec<num::BigRational>> = rays.iter().map(|r| r.to_rationals()).collect();
    Ok(lp::nonneg_combination_exists(&columns, &target.to_rationals()))
}

/// Converts a generator view back to an irredundant constraint system over
/// the given coordinates, via the polar cone.
pub fn rays_to_constraints(gens: &ConeGenerators, coords: Vec<Coord>) -> Result<LinIneqSystem> {
    let dim = coords.len();
    for v in gens.lineality.iter().chain(&gens.rays) {
        if v.direction.len() != dim {
            return Err(Error::InvalidInput(format!(
                "generator has {} components, expected {dim}",
                v.direction.len()
            )));
        }
    }
    // The polar cone {a : a.r >= 0 on rays, a.b = 0 on lineality} has the
    // facet normals of the original cone as its extreme rays and the
    // equality normals as its lineality.
    let eqs: Vec<Vec<BigInt>> = gens.lineality.iter().map(|b| b.direction.clone()).collect();
    let ineqs: Vec<Vec<BigInt>> = gens.rays.iter().map(|r| r.direction.clone()).collect();
    let polar = dd_core(dim, &eqs, &ineqs);
    let mut sys = LinIneqSystem::new(coords)?;
    for b in &polar.lineality {
        sys.add_eq(b.direction.clone(), BigInt::zero());
    }
    for r in &polar.rays {
        sys.add_ineq(r.direction.clone(), BigInt::zero());
    }
    sys.canonicalize();
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vars::node;
    use proptest::prelude::*;

    fn coords(n: usize) -> Vec<Coord> {
        (0..n)
            .map(|i| Coord::entropy([node(&format!("V{i}"))]))
            .collect()
    }

    fn sys(n: usize, ineqs: &[&[i64]], eqs: &[&[i64]]) -> LinIneqSystem {
        let mut s = LinIneqSystem::new(coords(n)).unwrap();
        for c in ineqs {
            s.add_ineq(c.iter().map(|&x| BigInt::from(x)).collect(), BigInt::zero());
        }
        for c in eqs {
            s.add_eq(c.iter().map(|&x| BigInt::from(x)).collect(), BigInt::zero());
        }
        s
    }

    fn ray(xs: &[i64]) -> Ray {
        Ray::new(xs.iter().map(|&x| BigInt::from(x)).collect()).unwrap()
    }

    #[test]
    fn quadrant_has_two_axis_rays() {
        let g = enumerate_rays(&sys(2, &[&[1, 0], &[0, 1]], &[])).unwrap();
        assert!(g.is_pointed());
        assert_eq!(g.rays, vec![ray(&[0, 1]), ray(&[1, 0])]);
    }

    #[test]
    fn unconstrained_space_is_pure_lineality() {
        let g = enumerate_rays(&sys(3, &[], &[])).unwrap();
        assert_eq!(g.lineality.len(), 3);
        assert!(g.rays.is_empty());
    }

    #[test]
    fn half_space_keeps_a_lineality_direction() {
        let g = enumerate_rays(&sys(2, &[&[1, 0]], &[])).unwrap();
        assert_eq!(g.lineality, vec![ray(&[0, 1])]);
        assert_eq!(g.rays, vec![ray(&[1, 0])]);
    }

    #[test]
    fn hyperplane_is_lineality_only() {
        let g = enumerate_rays(&sys(2, &[], &[&[1, 0]])).unwrap();
        assert_eq!(g.lineality, vec![ray(&[0, 1])]);
        assert!(g.rays.is_empty());
    }

    #[test]
    fn two_variable_entropy_cone_has_three_rays() {
        // Coordinates (H(A), H(B), H(AB)); rows are the two monotonicity
        // and one submodularity constraints.
        let s = sys(3, &[&[-1, 0, 1], &[0, -1, 1], &[1, 1, -1]], &[]);
        let g = enumerate_rays(&s).unwrap();
        assert!(g.is_pointed());
        assert_eq!(
            g.rays,
            vec![ray(&[0, 1, 1]), ray(&[1, 0, 1]), ray(&[1, 1, 1])]
        );
    }

    #[test]
    fn membership_checks_agree_with_generators() {
        let s = sys(2, &[&[1, 0], &[0, 1]], &[]);
        let g = enumerate_rays(&s).unwrap();
        assert!(contains_ray(&s, &ray(&[2, 3])).unwrap());
        assert!(!contains_ray(&s, &ray(&[-1, 0])).unwrap());
        assert!(in_cone_hull(&g.rays, &ray(&[2, 3])).unwrap());
        assert!(!in_cone_hull(&g.rays, &ray(&[-1, 0])).unwrap());
        assert!(!in_cone_hull(&g.rays, &ray(&[1, -1])).unwrap());
    }

    #[test]
    fn constraints_from_quadrant_rays_round_trip() {
        let g = ConeGenerators {
            lineality: vec![],
            rays: vec![ray(&[0, 1]), ray(&[1, 0])],
        };
        let back = rays_to_constraints(&g, coords(2)).unwrap();
        let expect = {
            let mut s = sys(2, &[&[1, 0], &[0, 1]], &[]);
            s.canonicalize();
            s
        };
        assert_eq!(back, expect);
    }

    #[test]
    fn zero_cone_round_trips_to_all_equalities() {
        let g = ConeGenerators {
            lineality: vec![],
            rays: vec![],
        };
        let back = rays_to_constraints(&g, coords(2)).unwrap();
        assert_eq!(back.eqs().len(), 2);
        assert!(back.ineqs().is_empty());
    }

    #[test]
    fn nonhomogeneous_systems_are_rejected() {
        let mut s = LinIneqSystem::new(coords(1)).unwrap();
        s.add_ineq(vec![BigInt::from(1)], BigInt::from(1));
        assert!(enumerate_rays(&s).is_err());
    }

    #[test]
    fn dimension_guard_trips() {
        let s = sys(2, &[&[1, 0]], &[]);
        let err = enumerate_rays_with(&s, &DdOptions { max_coords: 1 }).unwrap_err();
        assert!(matches!(err, Error::GuardExceeded { .. }));
    }

    #[test]
    fn lineality_directions_round_trip() {
        // x >= 0 with y free: lineality (0,1), ray (1,0).
        let s = sys(2, &[&[1, 0]], &[]);
        let g = enumerate_rays(&s).unwrap();
        let back = rays_to_constraints(&g, coords(2)).unwrap();
        assert!(lp::equivalent(&s, &back).unwrap());
        let dirs = g.all_ray_directions();
        assert!(in_cone_hull(&dirs, &ray(&[1, 5])).unwrap());
        assert!(in_cone_hull(&dirs, &ray(&[1, -5])).unwrap());
        assert!(!in_cone_hull(&dirs, &ray(&[-1, 0])).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn generator_view_round_trips(
            ineq_rows in prop::collection::vec(prop::collection::vec(-3i64..4, 3), 0..6),
            eq_rows in prop::collection::vec(prop::collection::vec(-2i64..3, 3), 0..2),
        ) {
            let ineq_refs: Vec<&[i64]> = ineq_rows.iter().map(|r| r.as_slice()).collect();
            let eq_refs: Vec<&[i64]> = eq_rows.iter().map(|r| r.as_slice()).collect();
            let s = sys(3, &ineq_refs, &eq_refs);
            let g = enumerate_rays(&s).unwrap();
            for r in g.all_ray_directions() {
                prop_assert!(contains_ray(&s, &r).unwrap(), "generator {:?} outside", r);
            }
            let back = rays_to_constraints(&g, coords(3)).unwrap();
            prop_assert!(lp::equivalent(&s, &back).unwrap());
            // A couple of cheap interior probes through the hull test.
            let dirs = g.all_ray_directions();
            if dirs.len() >= 2 {
                let mix: Vec<BigInt> = dirs[0]
                    .direction
                    .iter()
                    .zip(&dirs[1].direction)
                    .map(|(a, b)| a + b)
                    .collect();
                if !mix.iter().all(|c| c.is_zero()) {
                    let mix = Ray::new(mix).unwrap();
                    prop_assert!(in_cone_hull(&dirs, &mix).unwrap());
                    prop_assert!(contains_ray(&s, &mix).unwrap());
                }
            }
        }
    }
}
