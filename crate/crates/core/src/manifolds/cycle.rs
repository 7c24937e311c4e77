use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{component_image, find_intersections, grow_manifold, refine_crossing, Crossing, GrowthSettings, ManifoldBranch, Side};
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::maps::{iterate, MapSpec, PlanarMap};
use crate::orbits::{find_periodic, NewtonSettings, Orbit};

/// Which manifold pair of a two-saddle cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairKind {
    /// `W^u(s1)` against `W^s(s2)`.
    Forward,
    /// `W^u(s2)` against `W^s(s1)`.
    Return,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleThresholds {
    /// Crossings at a larger angle count as transversal.
    pub transversal: f64,
    /// A minimal angle below this marks a near-tangency.
    pub near_tangent: f64,
    pub heteroclinic_iterations: usize,
    pub heteroclinic_distance: f64,
}

impl Default for CycleThresholds {
    fn default() -> Self {
        Self { transversal: 0.05, near_tangent: 0.05, heteroclinic_iterations: 200, heteroclinic_distance: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub transversal_crossings: usize,
    pub min_angle: f64,
    /// `J(s1) < 1 < J(s2)`
    pub jacobian_condition: bool,
    pub lamb_stenkin_candidate: bool,
    pub jacobians: [f64; 2],
    pub forward_crossings: Vec<Crossing>,
    pub return_crossings: Vec<Crossing>,
    /// Point on the orbit of a transversal crossing that is closest, in
    /// iterations, to both saddles.
    pub heteroclinic_point: Option<Point>,
    /// Distances to `s2` after forward and to `s1` after backward iteration
    /// of `heteroclinic_point`.
    pub heteroclinic_check: Option<[f64; 2]>,
    pub heteroclinic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencyReport {
    pub m1_lo: f64,
    pub m1_hi: f64,
    pub count_lo: usize,
    pub count_hi: usize,
    /// Crossing counts at every scanned parameter.
    pub counts: Vec<(f64, usize)>,
}

impl TangencyReport {
    pub fn estimate(&self) -> f64 {
        0.5 * (self.m1_lo + self.m1_hi)
    }
}

/// Component-0 unstable branches of `from` and all stable branches of `to`.
fn pair_branches<M: PlanarMap + ?Sized>(
    map: &M,
    from: &Orbit,
    to: &Orbit,
    settings: &GrowthSettings,
) -> Result<(Vec<ManifoldBranch>, Vec<ManifoldBranch>)> {
    let jobs: Vec<(Side, i8)> = vec![(Side::Unstable, 1), (Side::Unstable, -1), (Side::Stable, 1), (Side::Stable, -1)];
    let grown: Vec<ManifoldBranch> = jobs
        .par_iter()
        .map(|&(side, sign)| grow_manifold(map, if side == Side::Unstable { from } else { to }, side, sign, settings))
        .collect::<Result<_>>()?;
    let (unstable, stable0): (Vec<_>, Vec<_>) = grown.into_iter().partition(|b| b.side == Side::Unstable);
    let mut stable = Vec::new();
    for b in stable0 {
        for j in 1..to.q {
            stable.push(component_image(map, &b, j, settings)?);
        }
        stable.push(b);
    }
    Ok((unstable, stable))
}

/// All refined crossings between every unstable and every stable branch.
fn pair_crossings<M: PlanarMap + ?Sized>(
    map: &M,
    unstable: &[ManifoldBranch],
    stable: &[ManifoldBranch],
) -> Result<Vec<Crossing>> {
    let pairs: Vec<(usize, usize)> =
        (0..unstable.len()).flat_map(|i| (0..stable.len()).map(move |j| (i, j))).collect();
    let found: Vec<Vec<Crossing>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&unstable[i], &stable[j]);
            find_intersections(a, b, 1e-12)
                .iter()
                // the saddle itself is not a heteroclinic point
                .filter(|c| c.segment_a > 0 && c.segment_b > 0)
                .map(|c| refine_crossing(map, a, b, c))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Crossing> = Vec::new();
    for c in found.into_iter().flatten() {
        if !out.iter().any(|k| k.point.dist(c.point) < 1e-10) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Refined crossings of the selected manifold pair.
pub fn manifold_pair_crossings<M: PlanarMap + ?Sized>(
    map: &M,
    s1: &Orbit,
    s2: &Orbit,
    kind: PairKind,
    settings: &GrowthSettings,
) -> Result<Vec<Crossing>> {
    let (from, to) = match kind {
        PairKind::Forward => (s1, s2),
        PairKind::Return => (s2, s1),
    };
    let (u, s) = pair_branches(map, from, to, settings)?;
    pair_crossings(map, &u, &s)
}

fn set_distance(p: Point, orbit: &Orbit) -> f64 {
    orbit.points.iter().map(|&o| p.dist(o)).fold(f64::INFINITY, f64::min)
}

/// Iterates a candidate heteroclinic point forward and backward and
/// returns its final distances to `to` and to `from`.
pub fn heteroclinic_distances<M: PlanarMap + ?Sized>(
    map: &M,
    p: Point,
    from: &Orbit,
    to: &Orbit,
    iterations: usize,
) -> Result<[f64; 2]> {
    let fwd = iterate(map, p, iterations as i64)?;
    let bwd = iterate(map, p, -(iterations as i64))?;
    Ok([set_distance(fwd, to), set_distance(bwd, from)])
}

/// Follows a periodic orbit to a nearby parameter by Newton iteration from
/// its old points, keeping the orbit point closest to the old start first.
pub fn track_orbit<M: PlanarMap + ?Sized>(map: &M, orbit: &Orbit) -> Result<Orbit> {
    let o = find_periodic(map, orbit.q, orbit.points[0], &NewtonSettings::default())?;
    let k = (0..o.q)
        .min_by(|&i, &j| o.points[i].dist(orbit.points[0]).total_cmp(&o.points[j].dist(orbit.points[0])))
        .unwrap_or(0);
    crate::orbits::orbit_starting_at(map, o.q, o.points[k])
}

fn iterations_per_domain(orbit: &Orbit, side: Side) -> Result<f64> {
    let (ls, _, lu, _) = super::saddle_eigen(&orbit.monodromy)?;
    let lambda = if side == Side::Unstable { lu } else { ls };
    Ok(orbit.q as f64 * if lambda < 0.0 { 2.0 } else { 1.0 })
}

/// Transversal crossings close to a saddle lie many iterations away from the
/// other one. Their orbits also appear among the crossings further along the
/// branches, shifted by whole fundamental domains; this returns the orbit
/// point needing the fewest iterations to reach either saddle.
fn shallowest_orbit_point<M: PlanarMap + ?Sized>(
    map: &M,
    transversal: &[&Crossing],
    all: &[Crossing],
    (u_steps, s_steps): (f64, f64),
) -> Option<Point> {
    let depth = |c: &Crossing| (c.tau_a * u_steps).max(c.tau_b * s_steps);
    let shift = |t: &Crossing, c: &Crossing| {
        let k = (c.tau_a - t.tau_a).round();
        let same = (c.tau_a - t.tau_a - k).abs() < 1e-6 && (c.tau_b - t.tau_b + k * u_steps / s_steps).abs() < 1e-6;
        same.then_some(k as i64)
    };
    transversal
        .par_iter()
        .filter(|t| t.refined)
        .filter_map(|t| {
            let (k, c) = all
                .iter()
                .filter(|c| c.refined)
                .filter_map(|c| shift(t, c).map(|k| (k, c)))
                .min_by(|a, b| depth(a.1).total_cmp(&depth(b.1)))?;
            let image = iterate(map, t.point, k * u_steps as i64).ok()?;
            (image.dist(c.point) < 1e-6).then_some((depth(c), c.point))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, p)| p)
}

/// Checks the Jacobian condition and the manifold geometry of a two-saddle
/// heteroclinic cycle.
pub fn certify_lamb_stenkin<M: PlanarMap + ?Sized>(
    map: &M,
    s1: &Orbit,
    s2: &Orbit,
    settings: &GrowthSettings,
    thresholds: &CycleThresholds,
) -> Result<CycleReport> {
    let (j1, j2) = (s1.jacobian_product, s2.jacobian_product);
    let jacobian_condition = j1 < 1.0 && 1.0 < j2;
    let (fwd, ret) = rayon::join(
        || manifold_pair_crossings(map, s1, s2, PairKind::Forward, settings),
        || manifold_pair_crossings(map, s1, s2, PairKind::Return, settings),
    );
    let (forward_crossings, return_crossings) = (fwd?, ret?);
    let transversal: Vec<&Crossing> = forward_crossings.iter().filter(|c| c.angle > thresholds.transversal).collect();
    let min_angle = return_crossings.iter().map(|c| c.angle).fold(f64::INFINITY, f64::min);
    let steps = (iterations_per_domain(s1, Side::Unstable)?, iterations_per_domain(s2, Side::Stable)?);
    let heteroclinic_point = shallowest_orbit_point(map, &transversal, &forward_crossings, steps);
    let heteroclinic_check = heteroclinic_point
        .map(|p| heteroclinic_distances(map, p, s1, s2, thresholds.heteroclinic_iterations))
        .transpose()?;
    let heteroclinic = heteroclinic_check.is_some_and(|d| d.iter().all(|&x| x < thresholds.heteroclinic_distance));
    Ok(CycleReport {
        transversal_crossings: transversal.len(),
        min_angle,
        jacobian_condition,
        lamb_stenkin_candidate: jacobian_condition && !transversal.is_empty() && min_angle < thresholds.near_tangent,
        jacobians: [j1, j2],
        forward_crossings,
        return_crossings,
        heteroclinic_point,
        heteroclinic_check,
        heteroclinic,
    })
}

/// Counts crossings of one manifold pair along a sweep of `M1` and brackets
/// the first parameter where the count changes by two, refined by bisection
/// to width `1e-4`. `s1`, `s2` are the saddles at `base.m1`.
pub fn scan_tangency(
    base: &MapSpec,
    (lo, hi): (f64, f64),
    s1: &Orbit,
    s2: &Orbit,
    kind: PairKind,
    steps: usize,
    settings: &GrowthSettings,
) -> Result<TangencyReport> {
    if !(lo < hi) || steps < 1 {
        return Err(Error::Invalid("scan interval must be nonempty".into()));
    }
    // saddles are carried along with the parameter they belong to
    let count_at = |from: &Tracked, m1: f64| -> Result<(usize, Tracked)> {
        let a = walk_orbit(base, &from.1, from.0, m1)?;
        let b = walk_orbit(base, &from.2, from.0, m1)?;
        let n = manifold_pair_crossings(&base.with_m1(m1), &a, &b, kind, settings)?.len();
        Ok((n, (m1, a, b)))
    };
    let mut counts = Vec::with_capacity(steps + 1);
    let mut cur: Tracked = (base.m1, s1.clone(), s2.clone());
    let mut prev: Option<(usize, Tracked)> = None;
    for i in 0..=steps {
        let m1 = lo + (hi - lo) * i as f64 / steps as f64;
        let (n, here) = count_at(&cur, m1)?;
        counts.push((m1, n));
        if let Some((n0, left)) = prev.take() {
            if n.abs_diff(n0) == 2 {
                let (mut left, mut r, mut nr) = (left, m1, n);
                while r - left.0 > 1e-4 {
                    let mid = 0.5 * (left.0 + r);
                    let (nm, at_mid) = count_at(&left, mid)?;
                    if nm == n0 {
                        left = at_mid;
                    } else {
                        r = mid;
                        nr = nm;
                    }
                }
                return Ok(TangencyReport { m1_lo: left.0, m1_hi: r, count_lo: n0, count_hi: nr, counts });
            }
        }
        cur = here.clone();
        prev = Some((n, here));
    }
    Err(Error::NoEvent)
}

type Tracked = (f64, Orbit, Orbit);

/// Moves an orbit from parameter `from` to `to` in small Newton steps.
fn walk_orbit(base: &MapSpec, orbit: &Orbit, from: f64, to: f64) -> Result<Orbit> {
    let n = ((to - from).abs() / 5e-3).ceil().max(1.0) as usize;
    let mut o = orbit.clone();
    for k in 1..=n {
        let spec = base.with_m1(from + (to - from) * k as f64 / n as f64);
        o = track_orbit(&spec, &o)?;
    }
    Ok(o)
}
