use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::CurveRow;
use crate::bifurcation::{
    analytic_curve, continue_codim1, solve_at_m2, Condition, Continuation, ContinuationSettings, CurveId, CurveSample,
};
use crate::error::{Error, Result};
use crate::linalg::{Point, Region};
use crate::manifolds::polyline_distance;
use crate::orbits::minimal_period;
use crate::maps::{CubicSign, MapSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DiagramJob {
    /// Closed-form sweep of `P1`, `PD1` or `L13` over `n` values of `M2`.
    Analytic { curve: CurveId, d: CubicSign, m2: (f64, f64), n: usize },
    /// Numerical continuation in both directions from a seed at fixed `M2`.
    Continued {
        base: MapSpec,
        q: usize,
        condition: Condition,
        m2: f64,
        m1: f64,
        point: Point,
        settings: ContinuationSettings,
    },
}

fn row(curve: CurveId, m1: f64, m2: f64, p: Point, residual: f64) -> CurveRow {
    CurveRow { curve_id: curve.name().to_string(), m1, m2, px: p.x, py: p.y, residual }
}

fn sample_row(s: &CurveSample) -> CurveRow {
    row(s.curve, s.m1, s.m2, s.point, s.condition_residual)
}

/// Residual of the fixed-point equation and the curve's condition at `p`.
fn analytic_residual(curve: CurveId, spec: &MapSpec, p: Point) -> Result<f64> {
    let j = spec.jacobian(p)?;
    let cond = match curve {
        CurveId::P1 => (j.a - 1.0) * (j.d - 1.0) - j.b * j.c,
        CurveId::PD1 => (j.a + 1.0) * (j.d + 1.0) - j.b * j.c,
        _ => j.trace() + 1.0,
    };
    Ok(spec.forward(p)?.dist(p).max(cond.abs()))
}

fn analytic_rows(curve: CurveId, d: CubicSign, (lo, hi): (f64, f64), n: usize) -> Result<Vec<CurveRow>> {
    if n < 2 || !(lo < hi) {
        return Err(Error::Invalid("analytic sweep needs n >= 2 and an increasing M2 range".into()));
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for k in 0..n {
        let m2 = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let c = analytic_curve(curve, d, m2)?;
        let Some(pts) = c.resonant_points else { continue };
        for (m1, p, out) in [(c.m1_plus, pts[0], &mut plus), (c.m1_minus, pts[1], &mut minus)] {
            if let Some(m1) = m1 {
                let r = analytic_residual(curve, &MapSpec::h3(d, m1, m2), p)?;
                out.push(row(curve, m1, m2, p, r));
            }
        }
    }
    plus.extend(minus);
    Ok(plus)
}

/// Continues from `start` both ways and joins the halves into one ordered
/// curve.
pub fn continue_both_ways(
    base: &MapSpec,
    q: usize,
    condition: Condition,
    start: &CurveSample,
    settings: &ContinuationSettings,
) -> Result<Vec<CurveSample>> {
    let (a, b) = settings.direction;
    let back = ContinuationSettings { direction: (-a, -b), ..*settings };
    let (one, two) = rayon::join(
        || continue_codim1(base, q, condition, start, &back),
        || continue_codim1(base, q, condition, start, settings),
    );
    let (one, two): (Continuation, Continuation) = (one?, two?);
    let mut out: Vec<CurveSample> = one.samples.into_iter().rev().collect();
    out.extend(two.samples.into_iter().skip(1));
    Ok(out)
}

fn run_job(job: &DiagramJob) -> Result<Vec<CurveRow>> {
    match job {
        DiagramJob::Analytic { curve, d, m2, n } => analytic_rows(*curve, *d, *m2, *n),
        DiagramJob::Continued { base, q, condition, m2, m1, point, settings } => {
            let start = solve_at_m2(base, *q, *condition, *m2, *point, *m1)?;
            Ok(continue_both_ways(base, *q, *condition, &start, settings)?.iter().map(sample_row).collect())
        }
    }
}

/// Runs every job and concatenates the labelled curves in job order. A
/// continued curve whose seed lies on an earlier continued curve of the same
/// period is the same curve and is dropped.
pub fn assemble_diagram(jobs: &[DiagramJob]) -> Result<Vec<CurveRow>> {
    let parts: Vec<Vec<CurveRow>> = jobs.par_iter().map(run_job).collect::<Result<_>>()?;
    let mut kept: Vec<(usize, Vec<Point>)> = Vec::new();
    let mut out = Vec::new();
    for (job, rows) in jobs.iter().zip(parts) {
        if let DiagramJob::Continued { q, m1, m2, .. } = job {
            let seed = Point::new(*m1, *m2);
            if kept.iter().any(|(k, poly)| k == q && polyline_distance(seed, poly) < 1e-6) {
                continue;
            }
            kept.push((*q, rows.iter().map(|r| Point::new(r.m1, r.m2)).collect()));
        }
        out.extend(rows);
    }
    Ok(out)
}

/// Seeds of codimension-one curves crossing the line `M2 = m2`, found by
/// solving the defining system from a lattice of `(s, M1)` guesses with
/// `point = (s, s)`.
pub fn discover_seeds(
    base: &MapSpec,
    q: usize,
    condition: Condition,
    m2: f64,
    window: Region,
    lattice: (usize, usize),
) -> Vec<CurveSample> {
    let (ns, nm) = lattice;
    let guesses: Vec<(f64, f64)> = (0..ns)
        .flat_map(|i| (0..nm).map(move |j| (i, j)))
        .map(|(i, j)| {
            let p = window.lattice_point(i, j, ns, nm);
            (p.x, p.y)
        })
        .collect();
    let found: Vec<CurveSample> = guesses
        .par_iter()
        .filter_map(|&(s, m1)| solve_at_m2(base, q, condition, m2, Point::new(s, s), m1).ok())
        .filter(|c| c.point.x.abs() <= window.x_max.abs().max(window.x_min.abs()) && c.m1.is_finite())
        // a fixed point with Df^q = I solves the period-q system trivially
        .filter(|c| minimal_period(&c.orbit.points, q, 1e-4) == q)
        .collect();
    let mut out: Vec<CurveSample> = Vec::new();
    for c in found {
        // the same curve crossing is found from many guesses and, for
        // q > 1, from every orbit point on the diagonal
        if !out.iter().any(|k| (k.m1 - c.m1).abs() < 1e-7) {
            out.push(c);
        }
    }
    out.sort_by(|a, b| a.m1.total_cmp(&b.m1));
    out
}

/// The five-curve diagram of a family: `P1`, `PD1`, `L13` and the period-3
/// curves `P3`/`PF3` through the line `M2 = m2_seed`. Closed forms are used
/// for the conservative map. For perturbed maps the fixed-point curves are
/// continued from the conservative closed form, corrected to the map.
pub fn default_jobs(base: &MapSpec, m2_range: (f64, f64), m2_seed: f64, bounds: Region) -> Vec<DiagramJob> {
    let settings = ContinuationSettings { bounds: Some(bounds), arclength: 40.0, steps: 5000, ..Default::default() };
    let mut jobs = Vec::new();
    let window = Region::new(-1.5, 1.5, bounds.x_min, bounds.x_max);
    let fixed_point_curves = [(CurveId::P1, Condition::Parabolic), (CurveId::PD1, Condition::PeriodDoubling), (CurveId::L13, Condition::L13)];
    for (curve, condition) in fixed_point_curves {
        if base.strength() == 0.0 {
            jobs.push(DiagramJob::Analytic { curve, d: base.d, m2: m2_range, n: 400 });
            continue;
        }
        let (lo, hi) = m2_range;
        let present: Vec<f64> = (0..=50)
            .map(|k| lo + (hi - lo) * k as f64 / 50.0)
            .filter(|&m2| analytic_curve(curve, base.d, m2).is_ok_and(|c| c.m1_plus.is_some()))
            .collect();
        let Some(&m2) = present.get(present.len() / 2) else { continue };
        let Ok(c) = analytic_curve(curve, base.d, m2) else { continue };
        let Some(pts) = c.resonant_points else { continue };
        for (m1, p) in [(c.m1_plus, pts[0]), (c.m1_minus, pts[1])] {
            let Some(m1) = m1 else { continue };
            if let Ok(s) = solve_at_m2(base, 1, condition, m2, p, m1) {
                jobs.push(DiagramJob::Continued { base: *base, q: 1, condition, m2, m1: s.m1, point: s.point, settings });
            }
        }
    }
    for s in discover_seeds(base, 3, Condition::Pitchfork, m2_seed, window, (31, 21)) {
        jobs.push(DiagramJob::Continued {
            base: *base,
            q: 3,
            condition: Condition::Pitchfork,
            m2: s.m2,
            m1: s.m1,
            point: s.point,
            settings,
        });
    }
    jobs
}
