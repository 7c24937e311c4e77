//! Periodic orbits: Newton solver, monodromy, classification, symmetry
//! detection and orbit inventories.

mod classify;
mod search;

pub use classify::{classify, OrbitClass, TOL_UNIT};
pub(crate) use search::dedup_orbits;
pub use search::{grid_seed, pair_match, symmetric_search, symmetry_line_residual, GridOptions, PairReport};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Point};
use crate::maps::{involution, PlanarMap};

/// Points closer than this are the same point of an orbit inventory.
pub const DEDUP_TOL: f64 = 1e-8;
/// Distance to `Fix(h)` or `Fix(h∘f)` below which an orbit is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 50, max_halvings: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub q: usize,
    /// Cycle in iteration order, starting at the lexicographically smallest point.
    pub points: Vec<Point>,
    pub monodromy: Mat2,
    /// Eigenvalues of the monodromy, ordered by modulus.
    pub multipliers: [Complex64; 2],
    /// Determinant of the monodromy.
    pub jacobian_product: f64,
    pub symmetric: bool,
    /// `‖f^q(p₀) - p₀‖`
    pub residual: f64,
    pub class: OrbitClass,
}

impl Orbit {
    pub fn start(&self) -> Point {
        self.points[0]
    }

    /// Whether the two orbits consist of the same points, up to a cyclic
    /// shift.
    pub fn same_as(&self, other: &Orbit, tol: f64) -> bool {
        let q = self.q;
        q == other.q
            && (0..q).any(|k| (0..q).all(|i| self.points[i].dist(other.points[(i + k) % q]) < tol))
    }

    /// Distance between the orbit and its image under the involution.
    pub fn symmetry_defect(&self) -> f64 {
        hausdorff(&self.points.iter().map(|&p| involution(p)).collect::<Vec<_>>(), &self.points)
    }

    pub fn centroid(&self) -> Point {
        let n = self.points.len() as f64;
        let s = self.points.iter().fold(Point::ORIGIN, |acc, &p| acc + p);
        (1.0 / n) * s
    }
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let directed = |u: &[Point], v: &[Point]| {
        u.iter()
            .map(|p| v.iter().map(|w| p.dist(*w)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Iterates `q` times, returning the visited points (including the start)
/// and the accumulated Jacobian.
pub fn iterate_with_jacobian<M: PlanarMap + ?Sized>(map: &M, p: Point, q: usize) -> Result<(Vec<Point>, Mat2)> {
    let mut pts = Vec::with_capacity(q + 1);
    let mut m = Mat2::IDENTITY;
    let mut cur = p;
    pts.push(cur);
    for _ in 0..q {
        m = map.jacobian(cur)? * m;
        cur = map.forward(cur)?;
        pts.push(cur);
    }
    Ok((pts, m))
}

/// Ordered product of Jacobians along the cycle starting at `points[0]`.
pub fn monodromy<M: PlanarMap + ?Sized>(map: &M, orbit: &Orbit) -> Result<Mat2> {
    orbit
        .points
        .iter()
        .try_fold(Mat2::IDENTITY, |acc, &p| Ok(map.jacobian(p)? * acc))
}

/// Newton iteration on `f^q(p) - p` with step halving whenever the
/// residual grows.
pub fn newton_periodic<M: PlanarMap + ?Sized>(
    map: &M,
    q: usize,
    seed: Point,
    settings: &NewtonSettings,
) -> Result<Point> {
    if q == 0 {
        return Err(Error::Invalid("period must be positive".into()));
    }
    if !seed.is_finite() {
        return Err(Error::Invalid("seed must be finite".into()));
    }
    let residual_at = |p: Point| -> Result<(f64, Point, Mat2)> {
        let (pts, m) = iterate_with_jacobian(map, p, q)?;
        let g = pts[q] - p;
        Ok((g.norm(), g, m))
    };
    let mut p = seed;
    let (mut res, mut g, mut m) = residual_at(p)?;
    for _ in 0..settings.max_iter {
        if res < settings.tol {
            return Ok(p);
        }
        let a = m.sub_identity();
        let det = a.det();
        if det.abs() < 1e-14 * (1.0 + a.max_abs()).powi(2) {
            return Err(Error::SingularJacobian { det });
        }
        let step = a.solve(-g).ok_or(Error::SingularJacobian { det })?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let trial = p + lambda * step;
            if let Ok(r) = residual_at(trial) {
                if r.0 < res || r.0 < settings.tol {
                    accepted = Some((trial, r));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, r)) => {
                p = trial;
                (res, g, m) = r;
            }
            None => break,
        }
    }
    if res < settings.tol {
        Ok(p)
    } else {
        Err(Error::NoConvergence { iterations: settings.max_iter, residual: res })
    }
}

/// Smallest `k` dividing `q` such that `p_k = p_0`.
pub fn minimal_period(points: &[Point], q: usize, tol: f64) -> usize {
    (1..q)
        .filter(|k| q % k == 0)
        .find(|&k| points[k].dist(points[0]) < tol)
        .unwrap_or(q)
}

/// Lexicographic order in which coordinates closer than [`DEDUP_TOL`]
/// count as equal, so that the canonical start survives round-off.
pub fn canonical_cmp(a: &Point, b: &Point) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    if (a.x - b.x).abs() >= DEDUP_TOL {
        a.x.total_cmp(&b.x)
    } else if (a.y - b.y).abs() >= DEDUP_TOL {
        a.y.total_cmp(&b.y)
    } else {
        Ordering::Equal
    }
}

/// Builds the canonical orbit record through a converged periodic point.
pub fn orbit_through<M: PlanarMap + ?Sized>(map: &M, q: usize, p: Point) -> Result<Orbit> {
    let (pts, _) = iterate_with_jacobian(map, p, q)?;
    let cycle = &pts[..q];
    let start = (0..q).fold(0, |best, i| {
        if canonical_cmp(&cycle[i], &cycle[best]).is_lt() {
            i
        } else {
            best
        }
    });
    let mut p0 = cycle[start];
    if start != 0 {
        let polish = NewtonSettings { max_iter: 5, ..NewtonSettings::default() };
        if let Ok(polished) = newton_periodic(map, q, p0, &polish) {
            p0 = polished;
        }
    }
    orbit_starting_at(map, q, p0)
}

/// Orbit record whose cycle starts at `p0` rather than at the canonical
/// point.
pub fn orbit_starting_at<M: PlanarMap + ?Sized>(map: &M, q: usize, p0: Point) -> Result<Orbit> {
    let (pts, m) = iterate_with_jacobian(map, p0, q)?;
    let points: Vec<Point> = pts[..q].to_vec();
    let residual = pts[q].dist(p0);
    let symmetric = points
        .iter()
        .zip(pts.iter().skip(1))
        .any(|(&a, &fa)| (a.x - a.y).abs() < SYMMETRY_TOL || fa.dist(involution(a)) < SYMMETRY_TOL);
    Ok(Orbit {
        q,
        points,
        monodromy: m,
        multipliers: m.eigenvalues(),
        jacobian_product: m.det(),
        symmetric,
        residual,
        class: classify(&m, TOL_UNIT),
    })
}

/// Finds a period-`q` orbit from `seed`.
pub fn find_periodic<M: PlanarMap + ?Sized>(
    map: &M,
    q: usize,
    seed: Point,
    settings: &NewtonSettings,
) -> Result<Orbit> {
    let p = newton_periodic(map, q, seed, settings)?;
    orbit_through(map, q, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{CubicSign::*, MapSpec};
    use std::f64::consts::PI;

    #[test]
    fn origin_fixed_point() {
        let spec = MapSpec::h3(Plus, 0.0, -1.0);
        let o = find_periodic(&spec, 1, Point::new(0.1, 0.1), &NewtonSettings::default()).unwrap();
        assert!(o.start().norm() < 1e-12);
        assert!(o.residual < 1e-12);
        assert!(o.symmetric);
        assert_eq!(o.class, OrbitClass::Elliptic);
    }

    #[test]
    fn resonant_fixed_point_of_h3_minus() {
        let spec = MapSpec::h3(Minus, 0.0, 3.5);
        let o = find_periodic(&spec, 1, Point::new(1.1, 1.3), &NewtonSettings::default()).unwrap();
        let s = 1.5f64.sqrt();
        assert!(o.start().dist(Point::new(s, s)) < 1e-12);
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((o.multipliers[1] - w).norm() < 1e-8);
    }

    #[test]
    fn fixed_point_monodromy_is_the_jacobian() {
        let spec = MapSpec::h3(Plus, 0.3, -1.25);
        let o = find_periodic(&spec, 1, Point::new(0.2, 0.2), &NewtonSettings::default()).unwrap();
        let y = o.start().y;
        let expected = Mat2::new(0.0, 1.0, -1.0, -1.25 + 3.0 * y * y);
        let m = monodromy(&spec, &o).unwrap();
        assert!((m.d - expected.d).abs() < 1e-14 && m.b == 1.0 && m.c == -1.0 && m.a == 0.0);
    }

    #[test]
    fn canonical_start_and_cyclic_consistency() {
        let spec = MapSpec::qr(Minus, -0.364, -0.5, 0.3);
        let o = find_periodic(&spec, 3, Point::new(-0.79, 0.29), &NewtonSettings::default()).unwrap();
        for i in 0..3 {
            let next = spec.forward(o.points[i]).unwrap();
            assert!(next.dist(o.points[(i + 1) % 3]) < 1e-11);
            assert!(!canonical_cmp(&o.points[i], &o.points[0]).is_lt());
        }
        let prod: Complex64 = o.multipliers[0] * o.multipliers[1];
        assert!((prod.re - o.jacobian_product).abs() < 1e-9);
        assert!(!o.symmetric);
    }

    #[test]
    fn invalid_period_and_seed() {
        let spec = MapSpec::h3(Plus, 0.0, -1.0);
        assert!(find_periodic(&spec, 0, Point::ORIGIN, &NewtonSettings::default()).is_err());
        assert!(find_periodic(&spec, 1, Point::new(f64::NAN, 0.0), &NewtonSettings::default()).is_err());
    }

    #[test]
    fn escaping_seed_does_not_converge() {
        let spec = MapSpec::h3(Plus, 0.0, -1.0);
        let r = find_periodic(&spec, 3, Point::new(50.0, -70.0), &NewtonSettings { max_iter: 5, ..Default::default() });
        assert!(r.is_err());
    }

    #[test]
    fn minimal_period_detects_fixed_points() {
        let spec = MapSpec::h3(Plus, 0.0, -1.0);
        let o = orbit_through(&spec, 3, Point::ORIGIN).unwrap();
        assert_eq!(minimal_period(&o.points, 3, DEDUP_TOL), 1);
    }
}
