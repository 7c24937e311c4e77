//! One-dimensional stable and unstable manifolds of saddle periodic orbits,
//! their intersections, tangency scans and heteroclinic-cycle certification.

mod cycle;
mod intersect;

pub use cycle::{
    certify_lamb_stenkin, heteroclinic_distances, manifold_pair_crossings, scan_tangency, track_orbit, CycleReport, CycleThresholds, PairKind,
    TangencyReport,
};
pub use intersect::{find_intersections, polyline_distance, refine_crossing, Crossing};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Point};
use crate::maps::{iterate, PlanarMap};
use crate::orbits::Orbit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    Stable,
    Unstable,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Stable => "STABLE",
            Side::Unstable => "UNSTABLE",
        }
    }
}

/// How growth of a branch ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BranchStatus {
    /// The arclength budget was reached.
    Complete,
    /// The branch left the escape disc or hit a singular line.
    Escaped,
    /// The vertex cap was reached first; the polyline is partial.
    BudgetExhausted,
    /// Round-off dominated the branch: a gap could not be closed at the
    /// finest parameter resolution.
    ResolutionLost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSettings {
    pub delta: f64,
    pub max_gap: f64,
    pub max_angle: f64,
    pub escape_radius: f64,
    /// Arclength budget.
    pub budget: f64,
    pub max_vertices: usize,
    /// Cap on the number of fundamental domains iterated.
    pub max_domains: usize,
    /// Vertices placed on the first fundamental segment before refinement;
    /// thinning never leaves fewer than this many per segment.
    pub initial_vertices: usize,
}

impl Default for GrowthSettings {
    fn default() -> Self {
        Self {
            delta: 1e-6,
            max_gap: 1e-3,
            max_angle: 0.2,
            escape_radius: 1e3,
            budget: 20.0,
            max_vertices: 2_000_000,
            max_domains: 5000,
            initial_vertices: 32,
        }
    }
}

/// Linearised seed of a branch: `τ = n + t` maps to
/// `f^component(F^n(base + delta·mu^t·dir))` with `F = f^steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSeed {
    pub base: Point,
    pub dir: Point,
    pub mu: f64,
    pub delta: f64,
    /// Signed number of map iterations per fundamental domain.
    pub steps: i64,
    pub component: usize,
}

impl BranchSeed {
    fn local(&self, t: f64) -> Point {
        self.base + (self.delta * self.mu.powf(t)) * self.dir
    }

    pub fn eval<M: PlanarMap + ?Sized>(&self, map: &M, tau: f64) -> Result<Point> {
        let n = tau.floor().max(0.0);
        let p = iterate(map, self.local(tau - n), self.steps * n as i64)?;
        iterate(map, p, self.component as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldBranch {
    pub owner: Orbit,
    pub side: Side,
    pub branch_sign: i8,
    /// Index of the orbit point the branch emanates from.
    pub component: usize,
    pub polyline: Vec<Point>,
    /// Seed parameter of every vertex.
    pub params: Vec<f64>,
    pub arclength: f64,
    pub status: BranchStatus,
    pub seed: BranchSeed,
}

impl ManifoldBranch {
    pub fn point_at<M: PlanarMap + ?Sized>(&self, map: &M, tau: f64) -> Result<Point> {
        self.seed.eval(map, tau)
    }

    /// Forward tangent `dP/dτ` by central differences.
    pub fn tangent_at<M: PlanarMap + ?Sized>(&self, map: &M, tau: f64) -> Result<Point> {
        let h = 1e-7;
        let lo = (tau - h).max(0.0);
        let hi = tau + h;
        let a = self.point_at(map, lo)?;
        let b = self.point_at(map, hi)?;
        Ok((1.0 / (hi - lo)) * (b - a))
    }
}

/// Real eigenpairs `(λs, vs, λu, vu)` of a saddle matrix.
pub fn saddle_eigen(m: &Mat2) -> Result<(f64, Point, f64, Point)> {
    let [l0, l1] = m.eigenvalues();
    if l0.im != 0.0 || l1.im != 0.0 {
        return Err(Error::NotSaddle("complex multipliers".into()));
    }
    let (ls, lu) = (l0.re, l1.re);
    if !(ls.abs() < 1.0 && lu.abs() > 1.0) {
        return Err(Error::NotSaddle(format!("multipliers {ls} and {lu}")));
    }
    Ok((ls, eigenvector(m, ls), lu, eigenvector(m, lu)))
}

fn eigenvector(m: &Mat2, l: f64) -> Point {
    let u = Point::new(m.b, l - m.a);
    let w = Point::new(l - m.d, m.c);
    let v = if u.norm() >= w.norm() { u } else { w };
    let v = if v.norm() == 0.0 { Point::new(1.0, 0.0) } else { v.normalized() };
    let flip = if v.x.abs() > 1e-15 { v.x < 0.0 } else { v.y < 0.0 };
    if flip {
        -v
    } else {
        v
    }
}

/// Unit stable and unstable eigenvectors, each with positive first nonzero
/// component.
pub fn eigen_directions(m: &Mat2) -> Result<(Point, Point)> {
    saddle_eigen(m).map(|(_, vs, _, vu)| (vs, vu))
}

fn turn_angle(a: Point, b: Point) -> f64 {
    a.cross(b).abs().atan2(a.dot(b))
}

/// Drops vertices whose removal keeps the polyline within a quarter of the
/// gap bound and well inside the angle bound, so that contracting parts of
/// a branch do not accumulate vertices. The parameter spacing never exceeds
/// that of the initial sampling: a segment that looks straight after
/// contraction may still carry a splitting wave that grows later.
fn thin(verts: Vec<(f64, Point)>, s: &GrowthSettings) -> Vec<(f64, Point)> {
    let max_dtau = 1.0 / s.initial_vertices.max(2) as f64;
    if verts.len() < 3 {
        return verts;
    }
    let last = verts.len() - 1;
    let mut out: Vec<(f64, Point)> = Vec::with_capacity(verts.len());
    out.push(verts[0]);
    for i in 1..last {
        let keep = out[out.len() - 1];
        let next = verts[i + 1];
        let short = keep.1.dist(next.1) < 0.25 * s.max_gap;
        let straight = turn_angle(verts[i].1 - keep.1, next.1 - verts[i].1) < 0.25 * s.max_angle;
        let sparse = next.0 - keep.0 > max_dtau * (1.0 + 1e-9);
        if !(short && straight) || sparse {
            out.push(verts[i]);
        }
    }
    out.push(verts[last]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    No,
    Escaped,
    Unresolved,
}

/// Inserts vertices until every gap is below `max_gap` and every turning
/// angle below `max_angle`. Stops early at the first vertex that cannot be
/// evaluated or leaves the escape disc, at the first gap that cannot be
/// closed, and once the refined part is longer than `max_len`.
fn refine<F>(
    verts: Vec<(f64, Point)>,
    prev: Option<Point>,
    eval: &F,
    s: &GrowthSettings,
    max_len: f64,
) -> (Vec<(f64, Point)>, Stop)
where
    F: Fn(f64) -> Result<Point>,
{
    // below this the seed offset is lost in the rounding of the base point
    const MIN_DTAU: f64 = 1e-9;
    // a smooth arc never needs this many insertions in one original gap
    const MAX_INSERTIONS: usize = 4096;
    let mut pending: Vec<(f64, Point)> = verts.into_iter().rev().collect();
    let mut inserted = 0usize;
    let mut out: Vec<(f64, Point)> = Vec::new();
    let mut len = 0.0;
    match pending.pop() {
        Some(v) => out.push(v),
        None => return (out, Stop::No),
    }
    // inserted vertices sit above the remaining originals on the stack
    let mut originals = pending.len();
    while let Some(&next) = pending.last() {
        let cur = out[out.len() - 1];
        let before = if out.len() >= 2 { Some(out[out.len() - 2].1) } else { prev };
        let seg = next.1 - cur.1;
        let too_long = seg.norm() > s.max_gap;
        let too_sharp = match before {
            Some(b) => seg.norm() > 1e-3 * s.max_gap && turn_angle(cur.1 - b, seg) > s.max_angle,
            None => false,
        };
        let resolvable = next.0 - cur.0 > MIN_DTAU;
        // a sharp turn below the parameter resolution is round-off noise
        if (too_long || too_sharp) && !resolvable {
            return (out, Stop::Unresolved);
        }
        if (too_long || too_sharp) && resolvable {
            inserted += 1;
            if inserted > MAX_INSERTIONS {
                return (out, Stop::Unresolved);
            }
            let tau = 0.5 * (cur.0 + next.0);
            match eval(tau) {
                Ok(p) if p.is_finite() && p.norm() <= s.escape_radius => pending.push((tau, p)),
                _ => return (out, Stop::Escaped),
            }
        } else {
            if pending.len() == originals {
                originals -= 1;
                inserted = 0;
            }
            pending.pop();
            if !next.1.is_finite() || next.1.norm() > s.escape_radius {
                return (out, Stop::Escaped);
            }
            len += seg.norm();
            out.push(next);
            if len >= max_len || out.len() >= s.max_vertices {
                break;
            }
        }
    }
    (out, Stop::No)
}

/// Grows one branch of `W^s` or `W^u` of the saddle orbit through
/// `orbit.points[0]`, iterating a fundamental segment under `f^q` (or its
/// inverse), until the arclength budget is spent.
pub fn grow_manifold<M: PlanarMap + ?Sized>(
    map: &M,
    orbit: &Orbit,
    side: Side,
    branch_sign: i8,
    settings: &GrowthSettings,
) -> Result<ManifoldBranch> {
    if branch_sign != 1 && branch_sign != -1 {
        return Err(Error::Invalid("branch sign must be +1 or -1".into()));
    }
    let (ls, vs, lu, vu) = saddle_eigen(&orbit.monodromy)?;
    let (lambda, v, dir_sign) = match side {
        Side::Unstable => (lu, vu, 1i64),
        Side::Stable => (1.0 / ls, vs, -1i64),
    };
    let q = orbit.q as i64;
    let (mu, steps) = if lambda < 0.0 { (lambda * lambda, 2 * q) } else { (lambda, q) };
    let seed = BranchSeed {
        base: orbit.points[0],
        dir: f64::from(branch_sign) * v,
        mu,
        delta: settings.delta,
        steps: dir_sign * steps,
        component: 0,
    };
    let eval = |tau: f64| seed.eval(map, tau);
    let n0 = settings.initial_vertices.max(2);
    let first: Vec<(f64, Point)> = (0..=n0)
        .map(|i| {
            let t = i as f64 / n0 as f64;
            Ok((t, eval(t)?))
        })
        .collect::<Result<_>>()?;
    let (mut domain, mut stop) = refine(first, None, &eval, settings, settings.budget);
    let mut polyline: Vec<Point> = vec![orbit.points[0]];
    let mut params: Vec<f64> = vec![f64::NEG_INFINITY];
    let mut arclength = 0.0;
    let mut status = BranchStatus::Complete;
    let mut n = 0usize;
    'grow: loop {
        let skip = usize::from(n > 0);
        for &(tau, p) in domain.iter().skip(skip) {
            arclength += p.dist(polyline[polyline.len() - 1]);
            polyline.push(p);
            params.push(tau);
            if arclength >= settings.budget {
                break 'grow;
            }
            if polyline.len() >= settings.max_vertices {
                status = BranchStatus::BudgetExhausted;
                break 'grow;
            }
        }
        match stop {
            Stop::No => {}
            Stop::Escaped => {
                status = BranchStatus::Escaped;
                break;
            }
            Stop::Unresolved => {
                status = BranchStatus::ResolutionLost;
                break;
            }
        }
        n += 1;
        let mut image = Vec::with_capacity(domain.len());
        for &(tau, p) in &domain {
            match iterate(map, p, seed.steps) {
                Ok(fp) if fp.is_finite() && fp.norm() <= settings.escape_radius => image.push((tau + 1.0, fp)),
                _ => {
                    stop = Stop::Escaped;
                    break;
                }
            }
        }
        let prev = polyline.len().checked_sub(2).map(|i| polyline[i]);
        let (next, refined_stop) = refine(thin(image, settings), prev, &eval, settings, settings.budget - arclength);
        if stop == Stop::No {
            stop = refined_stop;
        }
        if next.len() <= 1 {
            status = if stop == Stop::Unresolved { BranchStatus::ResolutionLost } else { BranchStatus::Escaped };
            break;
        }
        if n >= settings.max_domains {
            status = BranchStatus::BudgetExhausted;
            break;
        }
        domain = next;
    }
    Ok(ManifoldBranch {
        owner: orbit.clone(),
        side,
        branch_sign,
        component: 0,
        polyline,
        params,
        arclength,
        status,
        seed,
    })
}

/// The branch emanating from `orbit.points[j]`, obtained as the image of a
/// component-0 branch under `f^j` and re-refined.
pub fn component_image<M: PlanarMap + ?Sized>(
    map: &M,
    branch: &ManifoldBranch,
    j: usize,
    settings: &GrowthSettings,
) -> Result<ManifoldBranch> {
    if branch.component != 0 {
        return Err(Error::Invalid("images are taken from component 0".into()));
    }
    let q = branch.owner.q;
    let j = j % q;
    let seed = BranchSeed { component: j, ..branch.seed };
    let eval = |tau: f64| seed.eval(map, tau);
    let base = branch.owner.points[j];
    let mut verts = Vec::with_capacity(branch.polyline.len());
    let mut stopped = false;
    for (&tau, &p) in branch.params.iter().zip(&branch.polyline).skip(1) {
        match iterate(map, p, j as i64) {
            Ok(fp) if fp.is_finite() && fp.norm() <= settings.escape_radius => verts.push((tau, fp)),
            _ => {
                stopped = true;
                break;
            }
        }
    }
    let (refined, stop) = refine(verts, Some(base), &eval, settings, f64::INFINITY);
    let mut polyline = vec![base];
    let mut params = vec![f64::NEG_INFINITY];
    let mut arclength = 0.0;
    for (tau, p) in refined {
        arclength += p.dist(polyline[polyline.len() - 1]);
        polyline.push(p);
        params.push(tau);
    }
    let status = match stop {
        _ if stopped => BranchStatus::Escaped,
        Stop::Escaped => BranchStatus::Escaped,
        Stop::Unresolved => BranchStatus::ResolutionLost,
        Stop::No => branch.status,
    };
    Ok(ManifoldBranch {
        owner: branch.owner.clone(),
        side: branch.side,
        branch_sign: branch.branch_sign,
        component: j,
        polyline,
        params,
        arclength,
        status,
        seed,
    })
}
