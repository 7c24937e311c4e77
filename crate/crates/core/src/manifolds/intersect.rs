use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ManifoldBranch;
use crate::error::Result;
use crate::linalg::{Mat2, Point};
use crate::maps::PlanarMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub point: Point,
    /// Angle between the tangent lines, in `[0, π/2]`.
    pub angle: f64,
    pub segment_a: usize,
    pub segment_b: usize,
    pub tau_a: f64,
    pub tau_b: f64,
    /// Whether the point was refined on the exact branches.
    pub refined: bool,
}

fn line_angle(u: Point, v: Point) -> f64 {
    u.cross(v).abs().atan2(u.dot(v).abs())
}

fn segment_hit(p0: Point, p1: Point, q0: Point, q1: Point) -> Option<(f64, f64)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let den = r.cross(s);
    if den == 0.0 {
        return None;
    }
    let w = q0 - p0;
    let t = w.cross(s) / den;
    let u = w.cross(r) / den;
    // half-open in both parameters so a crossing through a vertex counts once
    ((0.0..1.0).contains(&t) && (0.0..1.0).contains(&u)).then_some((t, u))
}

struct Grid {
    cell: f64,
    bins: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn key(&self, p: Point) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn cells(&self, a: Point, b: Point) -> impl Iterator<Item = (i64, i64)> {
        let (i0, j0) = self.key(Point::new(a.x.min(b.x), a.y.min(b.y)));
        let (i1, j1) = self.key(Point::new(a.x.max(b.x), a.y.max(b.y)));
        (i0..=i1).flat_map(move |i| (j0..=j1).map(move |j| (i, j)))
    }

    fn build(poly: &[Point]) -> Grid {
        let longest = poly.windows(2).map(|w| w[0].dist(w[1])).fold(0.0, f64::max);
        let mut g = Grid { cell: longest.max(1e-9) * 2.0, bins: HashMap::new() };
        for (k, w) in poly.windows(2).enumerate() {
            let cells: Vec<_> = g.cells(w[0], w[1]).collect();
            for c in cells {
                g.bins.entry(c).or_default().push(k);
            }
        }
        g
    }
}

/// All crossings between the polylines of two branches, with the crossing
/// point interpolated on the segments and the angle between segment
/// directions. `tol` merges crossings closer than it.
pub fn find_intersections(a: &ManifoldBranch, b: &ManifoldBranch, tol: f64) -> Vec<Crossing> {
    let (pa, pb) = (&a.polyline, &b.polyline);
    if pa.len() < 2 || pb.len() < 2 {
        return Vec::new();
    }
    let grid = Grid::build(pb);
    let mut out: Vec<Crossing> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, w) in pa.windows(2).enumerate() {
        seen.clear();
        for c in grid.cells(w[0], w[1]) {
            let Some(cands) = grid.bins.get(&c) else { continue };
            for &j in cands {
                if !seen.insert(j) {
                    continue;
                }
                let (q0, q1) = (pb[j], pb[j + 1]);
                if let Some((t, u)) = segment_hit(w[0], w[1], q0, q1) {
                    let point = w[0] + t * (w[1] - w[0]);
                    let lerp = |p: &[f64], k: usize, s: f64| {
                        if p[k].is_finite() {
                            p[k] + s * (p[k + 1] - p[k])
                        } else {
                            p[k + 1]
                        }
                    };
                    out.push(Crossing {
                        point,
                        angle: line_angle(w[1] - w[0], q1 - q0),
                        segment_a: i,
                        segment_b: j,
                        tau_a: lerp(&a.params, i, t),
                        tau_b: lerp(&b.params, j, u),
                        refined: false,
                    });
                }
            }
        }
    }
    out.sort_by(|x, y| (x.segment_a, x.segment_b).cmp(&(y.segment_a, y.segment_b)));
    let mut merged: Vec<Crossing> = Vec::new();
    for c in out {
        if !merged.iter().any(|m| m.point.dist(c.point) < tol) {
            merged.push(c);
        }
    }
    merged
}

/// Re-solves a polyline crossing on the exact branches by Newton iteration
/// in the two seed parameters, and recomputes the angle from the exact
/// tangents. Falls back to the polyline crossing if Newton leaves the
/// neighbourhood of the segments.
pub fn refine_crossing<M: PlanarMap + ?Sized>(
    map: &M,
    a: &ManifoldBranch,
    b: &ManifoldBranch,
    c: &Crossing,
) -> Result<Crossing> {
    let window = |br: &ManifoldBranch, k: usize| {
        let lo = br.params[k.saturating_sub(2).max(1)];
        let hi = br.params[(k + 3).min(br.params.len() - 1)];
        (lo, hi)
    };
    let (alo, ahi) = window(a, c.segment_a);
    let (blo, bhi) = window(b, c.segment_b);
    if !(c.tau_a.is_finite() && c.tau_b.is_finite()) {
        return Ok(*c);
    }
    let (mut ta, mut tb) = (c.tau_a, c.tau_b);
    for _ in 0..30 {
        let g = a.point_at(map, ta)? - b.point_at(map, tb)?;
        if g.norm() < 1e-14 {
            break;
        }
        let da = a.tangent_at(map, ta)?;
        let db = b.tangent_at(map, tb)?;
        let jac = Mat2::new(da.x, -db.x, da.y, -db.y);
        let Some(step) = jac.solve(-g) else { return Ok(*c) };
        ta += step.x;
        tb += step.y;
        if !(alo..=ahi).contains(&ta) || !(blo..=bhi).contains(&tb) {
            return Ok(*c);
        }
    }
    let pa = a.point_at(map, ta)?;
    if pa.dist(b.point_at(map, tb)?) > 1e-10 {
        return Ok(*c);
    }
    let angle = line_angle(a.tangent_at(map, ta)?, b.tangent_at(map, tb)?);
    Ok(Crossing { point: pa, angle, tau_a: ta, tau_b: tb, refined: true, ..*c })
}

/// Distance from a point to a polyline.
pub fn polyline_distance(p: Point, poly: &[Point]) -> f64 {
    if poly.len() == 1 {
        return p.dist(poly[0]);
    }
    poly.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let l2 = d.dot(d);
            let t = if l2 > 0.0 { ((p - w[0]).dot(d) / l2).clamp(0.0, 1.0) } else { 0.0 };
            p.dist(w[0] + t * d)
        })
        .fold(f64::INFINITY, f64::min)
}
