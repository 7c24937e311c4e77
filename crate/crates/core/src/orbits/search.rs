use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{find_periodic, hausdorff, minimal_period, NewtonSettings, Orbit, DEDUP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{Point, Region};
use crate::maps::{involution, iterate, MapSpec, PlanarMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub newton: NewtonSettings,
    /// Keep orbits whose minimal period is a proper divisor of `q`.
    pub keep_lower_periods: bool,
    /// Drop orbits with a point outside the seeding region.
    pub restrict_to_region: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { newton: NewtonSettings::default(), keep_lower_periods: false, restrict_to_region: true }
    }
}

/// Deduplicates orbits after sorting by canonical start point.
pub(crate) fn dedup_orbits(mut orbits: Vec<Orbit>) -> Vec<Orbit> {
    orbits.sort_by(|a, b| a.start().lex_cmp(&b.start()));
    // sorting only fixes the order of the output; duplicates are caught by
    // the pairwise comparison below
    let mut out: Vec<Orbit> = Vec::new();
    for o in orbits {
        if !out.iter().any(|k| k.same_as(&o, DEDUP_TOL)) {
            out.push(o);
        }
    }
    out
}

/// Runs the periodic-orbit solver from every node of an `nx` by `ny`
/// lattice and returns the distinct orbits found.
pub fn grid_seed<M: PlanarMap + ?Sized>(
    map: &M,
    q: usize,
    region: &Region,
    (nx, ny): (usize, usize),
    opts: &GridOptions,
) -> Vec<Orbit> {
    let nodes: Vec<Point> = (0..nx)
        .flat_map(|i| (0..ny).map(move |j| (i, j)))
        .map(|(i, j)| region.lattice_point(i, j, nx, ny))
        .collect();
    let found: Vec<Orbit> = nodes
        .par_iter()
        .filter_map(|&seed| find_periodic(map, q, seed, &opts.newton).ok())
        .filter(|o| opts.keep_lower_periods || minimal_period(&o.points, q, DEDUP_TOL) == q)
        .filter(|o| !opts.restrict_to_region || o.points.iter().all(|&p| region.contains(p)))
        .collect();
    dedup_orbits(found)
}

/// Signed residual of the half-period symmetry condition for the orbit
/// through `(s, s)`.
///
/// For odd `q` the point `f^{(q-1)/2}(s, s)` must lie on `Fix(h∘f)`; for even
/// `q` the point `f^{q/2}(s, s)` must return to the diagonal.
pub fn symmetry_line_residual(map: &MapSpec, q: usize, s: f64) -> Result<f64> {
    let p = Point::new(s, s);
    if q % 2 == 1 {
        let a = iterate(map, p, ((q - 1) / 2) as i64)?;
        map.fix_hf_residual(a)
    } else {
        let a = iterate(map, p, (q / 2) as i64)?;
        Ok(a.y - a.x)
    }
}

/// Finds symmetric period-`q` orbits by scanning the diagonal segment
/// `s ∈ [lo, hi]` for sign changes of [`symmetry_line_residual`], refining
/// each by bisection and polishing with [`find_periodic`].
pub fn symmetric_search(
    map: &MapSpec,
    q: usize,
    (lo, hi): (f64, f64),
    n: usize,
    settings: &NewtonSettings,
) -> Result<Vec<Orbit>> {
    if q == 0 || n < 2 || !(lo < hi) {
        return Err(Error::Invalid("symmetric search needs q >= 1, n >= 2 and lo < hi".into()));
    }
    let r = |s: f64| symmetry_line_residual(map, q, s).ok().filter(|v| v.is_finite());
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let values: Vec<Option<f64>> = grid.par_iter().map(|&s| r(s)).collect();
    let mut roots = Vec::new();
    for i in 0..n - 1 {
        let (Some(va), Some(vb)) = (values[i], values[i + 1]) else { continue };
        if va == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if va * vb > 0.0 {
            continue;
        }
        let (mut a, mut b, mut fa) = (grid[i], grid[i + 1], va);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let Some(fm) = r(m) else { break };
            if fa * fm <= 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if let Some(v) = values[n - 1] {
        if v == 0.0 {
            roots.push(grid[n - 1]);
        }
    }
    let found: Vec<Orbit> = roots
        .par_iter()
        .filter_map(|&s| find_periodic(map, q, Point::new(s, s), settings).ok())
        .filter(|o| o.symmetric && minimal_period(&o.points, q, DEDUP_TOL) == q)
        .collect();
    Ok(dedup_orbits(found))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub is_pair: bool,
    /// Hausdorff distance between `h(a)` and `b`.
    pub point_distance: f64,
    /// `max |λᵢ(a)·λⱼ(b) - 1|` under the best matching of multipliers.
    pub multiplier_reciprocity_error: f64,
}

/// Tests whether `b` is the image of `a` under the involution, with
/// reciprocal multipliers.
pub fn pair_match(a: &Orbit, b: &Orbit, tol: f64) -> PairReport {
    if a.q != b.q {
        return PairReport {
            is_pair: false,
            point_distance: f64::INFINITY,
            multiplier_reciprocity_error: f64::INFINITY,
        };
    }
    let image: Vec<Point> = a.points.iter().map(|&p| involution(p)).collect();
    let point_distance = hausdorff(&image, &b.points);
    let [a0, a1] = a.multipliers;
    let [b0, b1] = b.multipliers;
    let crossed = ((a0 * b1 - 1.0).norm()).max((a1 * b0 - 1.0).norm());
    let straight = ((a0 * b0 - 1.0).norm()).max((a1 * b1 - 1.0).norm());
    let multiplier_reciprocity_error = crossed.min(straight);
    PairReport {
        is_pair: point_distance < tol && multiplier_reciprocity_error < tol,
        point_distance,
        multiplier_reciprocity_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::CubicSign::{self, *};
    use crate::orbits::OrbitClass;

    fn inventory(spec: &MapSpec, q: usize) -> Vec<Orbit> {
        grid_seed(spec, q, &Region::square(2.0), (50, 50), &GridOptions::default())
    }

    /// Real roots of `(2 - M2) y - d y³ = M1` by a sign-change scan.
    fn fixed_point_oracle(d: CubicSign, m1: f64, m2: f64) -> Vec<f64> {
        let g = |y: f64| (2.0 - m2) * y - d.value() * y * y * y - m1;
        let mut roots = Vec::new();
        let n = 40_000;
        for i in 0..n {
            let (a, b) = (-2.0 + 4.0 * i as f64 / n as f64, -2.0 + 4.0 * (i + 1) as f64 / n as f64);
            if g(a) * g(b) <= 0.0 && g(a) != 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..80 {
                    let m = 0.5 * (lo + hi);
                    if g(lo) * g(m) <= 0.0 { hi = m } else { lo = m }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        roots
    }

    #[test]
    fn fixed_points_match_cubic_roots() {
        for (d, m1, m2) in [(Plus, 0.3, -1.25), (Plus, 0.0, 2.5), (Minus, 0.2, 3.5), (Minus, 0.5, -0.8)] {
            let spec = MapSpec::h3(d, m1, m2);
            let mut ys: Vec<f64> = inventory(&spec, 1).iter().map(|o| o.start().y).collect();
            ys.sort_by(f64::total_cmp);
            let oracle = fixed_point_oracle(d, m1, m2);
            assert_eq!(ys.len(), oracle.len(), "{d:?} {m1} {m2}: {ys:?} vs {oracle:?}");
            for (a, b) in ys.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9);
            }
            let diag = symmetric_search(&spec, 1, (-2.0, 2.0), 401, &NewtonSettings::default()).unwrap();
            assert_eq!(diag.len(), oracle.len());
        }
    }

    #[test]
    fn no_three_orbits_right_of_the_parabolic_curve() {
        assert!(inventory(&MapSpec::h3(Plus, 1.5, -1.25), 3).is_empty());
    }

    #[test]
    fn conservative_garland_after_pitchfork() {
        let orbits = inventory(&MapSpec::h3(Plus, 0.03, -1.25), 3);
        assert_eq!(orbits.len(), 4);
        let sym: Vec<_> = orbits.iter().filter(|o| o.symmetric).collect();
        let non: Vec<_> = orbits.iter().filter(|o| !o.symmetric).collect();
        assert_eq!(sym.len(), 2);
        assert!(sym.iter().all(|o| o.class == OrbitClass::SaddleConservative));
        assert_eq!(non.len(), 2);
        assert!(non.iter().all(|o| o.class == OrbitClass::Elliptic));
        assert!(pair_match(non[0], non[1], 1e-6).is_pair);
    }

    #[test]
    fn symmetric_search_finds_the_symmetric_orbits() {
        let spec = MapSpec::h3(Plus, 0.98, -1.25);
        let found = symmetric_search(&spec, 3, (-2.0, 2.0), 801, &NewtonSettings::default()).unwrap();
        let classes: Vec<_> = found.iter().map(|o| o.class).collect();
        assert_eq!(found.len(), 2, "{classes:?}");
        assert!(classes.contains(&OrbitClass::Elliptic));
        assert!(classes.contains(&OrbitClass::SaddleConservative));
    }

    #[test]
    fn symmetric_search_misses_nonsymmetric_saddles() {
        let spec = MapSpec::qr(Minus, 0.5, -0.8, 0.05).with_m1(-0.025);
        let grid = inventory(&spec, 3);
        let diag = symmetric_search(&spec, 3, (-2.0, 2.0), 801, &NewtonSettings::default()).unwrap();
        let nonsym = grid.iter().filter(|o| !o.symmetric).count();
        assert_eq!(nonsym, 2);
        assert_eq!(diag.len(), grid.len() - nonsym);
        for o in &diag {
            assert!(grid.iter().any(|g| g.same_as(o, 1e-8)));
        }
    }

    #[test]
    fn symmetric_orbits_satisfy_both_half_period_conditions() {
        let spec = MapSpec::qr(Plus, 0.08, -1.25, 0.05);
        let found = symmetric_search(&spec, 3, (-2.0, 2.0), 801, &NewtonSettings::default()).unwrap();
        assert!(!found.is_empty());
        for o in &found {
            let on_diag = o.points.iter().position(|p| (p.x - p.y).abs() < 1e-8).unwrap();
            let a = o.points[(on_diag + 1) % 3];
            let b = o.points[(on_diag + 2) % 3];
            // p₁ ∈ Fix(h∘f) and p₂ = h(p₁)
            assert!(spec.forward(a).unwrap().dist(involution(a)) < 1e-8);
            assert!(b.dist(involution(a)) < 1e-8);
        }
    }

    #[test]
    fn even_period_search_returns_to_the_diagonal() {
        let spec = MapSpec::h3(Plus, 0.05, -0.1);
        let found = symmetric_search(&spec, 4, (-2.0, 2.0), 801, &NewtonSettings::default()).unwrap();
        assert!(!found.is_empty());
        let grid = inventory(&spec, 4);
        for o in &found {
            assert_eq!(o.points.iter().filter(|p| (p.x - p.y).abs() < 1e-8).count(), 2, "{o:?}");
            assert!(grid.iter().any(|g| g.same_as(o, 1e-8)));
        }
    }

    #[test]
    fn pair_match_self_and_reciprocity() {
        let spec = MapSpec::qr(Minus, -0.364, -0.5, 0.3);
        let orbits = inventory(&spec, 3);
        let non: Vec<_> = orbits.iter().filter(|o| !o.symmetric).collect();
        assert_eq!(non.len(), 2);
        let r = pair_match(non[0], non[1], 1e-6);
        assert!(r.is_pair, "{r:?}");
        assert!((non[0].jacobian_product * non[1].jacobian_product - 1.0).abs() < 1e-6);
        let sym = orbits.iter().find(|o| o.symmetric).unwrap();
        let s = pair_match(sym, sym, 1e-6);
        assert!(s.is_pair && s.point_distance < 1e-9);
        assert!(!pair_match(non[0], non[0], 1e-6).is_pair);
    }

    #[test]
    fn inventory_is_closed_under_the_involution() {
        for spec in [MapSpec::qr(Plus, 0.08, -1.25, 0.05), MapSpec::h3(Minus, 0.025, -0.8)] {
            let orbits = inventory(&spec, 3);
            for o in orbits.iter().filter(|o| !o.symmetric) {
                assert!(orbits.iter().any(|b| !std::ptr::eq(b, o) && pair_match(o, b, 1e-6).is_pair));
            }
        }
    }
}
