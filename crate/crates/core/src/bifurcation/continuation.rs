use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::CurveId;
use crate::error::{Error, Result};
use crate::linalg::{Point, Region};
use crate::maps::MapSpec;
use crate::orbits::{
    find_periodic, iterate_with_jacobian, minimal_period, orbit_starting_at, symmetry_line_residual, NewtonSettings, Orbit,
    DEDUP_TOL,
};

/// Defining condition added to `f^q(p) = p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Condition {
    /// `det(Df^q - I) = 0`, unknowns `(x, y, M1, M2)`.
    Parabolic,
    /// `det(Df^q + I) = 0`, unknowns `(x, y, M1, M2)`.
    PeriodDoubling,
    /// `trace(Df^q) = -1`, unknowns `(x, y, M1, M2)`.
    L13,
    /// Multiplier `+1` on the symmetric orbit through `(s, s)`, unknowns
    /// `(s, M1, M2)`. Folds of symmetric orbits solve the same system and
    /// are told apart by local orbit counts.
    Pitchfork,
}

impl Condition {
    pub fn parse(s: &str) -> Option<Condition> {
        match s.to_ascii_uppercase().as_str() {
            "PARABOLIC" => Some(Condition::Parabolic),
            "PERIOD_DOUBLING" | "PD" => Some(Condition::PeriodDoubling),
            "L13" | "TRACE" => Some(Condition::L13),
            "PITCHFORK" => Some(Condition::Pitchfork),
            _ => None,
        }
    }

    fn curve(self, q: usize) -> CurveId {
        match self {
            Condition::Parabolic if q == 1 => CurveId::P1,
            Condition::Parabolic => CurveId::P3,
            Condition::PeriodDoubling => CurveId::PD1,
            Condition::L13 => CurveId::L13,
            Condition::Pitchfork => CurveId::PF3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub curve: CurveId,
    pub m1: f64,
    pub m2: f64,
    /// The point solving the defining system: an orbit point, or `(s, s)`
    /// for the symmetric system.
    pub point: Point,
    pub orbit: Orbit,
    /// Max-norm of the defining system.
    pub condition_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSettings {
    pub steps: usize,
    /// Total arclength in the space of unknowns.
    pub arclength: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub tol: f64,
    /// Preferred initial direction in the `(M1, M2)` plane.
    pub direction: (f64, f64),
    /// Stop on leaving this box of the `(M1, M2)` plane.
    pub bounds: Option<Region>,
    /// Distance stepped back before jumping over a singular point; 0
    /// disables jumps.
    pub jump: f64,
    /// Classify every k-th sample of the symmetric system by local orbit
    /// counts; 0 disables.
    pub probe_every: usize,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self {
            steps: 2000,
            arclength: 10.0,
            initial_step: 1e-2,
            min_step: 1e-6,
            max_step: 0.1,
            tol: 1e-10,
            direction: (0.0, 1.0),
            bounds: None,
            jump: 0.02,
            probe_every: 10,
        }
    }
}

/// Reversal of the curve's direction in the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cusp {
    /// Index of the first sample after the reversal.
    pub index: usize,
    pub m1: f64,
    pub m2: f64,
    pub point: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EndReason {
    Steps,
    Arclength,
    Bounds,
    /// The map or the orbit could not be evaluated ahead.
    Domain,
    /// The corrector failed at the minimum step.
    StepFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Continuation {
    pub base: MapSpec,
    pub q: usize,
    pub condition: Condition,
    pub samples: Vec<CurveSample>,
    pub cusps: Vec<Cusp>,
    pub end: EndReason,
}

struct System<'a> {
    base: &'a MapSpec,
    q: usize,
    condition: Condition,
}

impl System<'_> {
    fn dim(&self) -> usize {
        if self.condition == Condition::Pitchfork {
            3
        } else {
            4
        }
    }

    fn unpack(&self, u: &DVector<f64>) -> (Point, f64, f64) {
        match self.dim() {
            3 => (Point::new(u[0], u[0]), u[1], u[2]),
            _ => (Point::new(u[0], u[1]), u[2], u[3]),
        }
    }

    fn pack(&self, p: Point, m1: f64, m2: f64) -> DVector<f64> {
        match self.dim() {
            3 => DVector::from_vec(vec![p.x, m1, m2]),
            _ => DVector::from_vec(vec![p.x, p.y, m1, m2]),
        }
    }

    fn residual(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let (p, m1, m2) = self.unpack(u);
        let spec = self.base.with_params(m1, m2);
        let (pts, m) = iterate_with_jacobian(&spec, p, self.q)?;
        let g = match self.condition {
            Condition::Parabolic | Condition::Pitchfork => m.sub_identity().det(),
            Condition::PeriodDoubling => (m.a + 1.0) * (m.d + 1.0) - m.b * m.c,
            Condition::L13 => m.trace() + 1.0,
        };
        let r = if self.condition == Condition::Pitchfork {
            vec![symmetry_line_residual(&spec, self.q, p.x)?, g]
        } else {
            let e = pts[self.q] - p;
            vec![e.x, e.y, g]
        };
        let r = DVector::from_vec(r);
        if r.iter().all(|v| v.is_finite()) {
            Ok(r)
        } else {
            Err(Error::NonFinite)
        }
    }

    fn jacobian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut jac = DMatrix::zeros(n - 1, n);
        for j in 0..n {
            let h = 1e-7 * (1.0 + u[j].abs());
            let (mut a, mut b) = (u.clone(), u.clone());
            a[j] += h;
            b[j] -= h;
            let col = (self.residual(&a)? - self.residual(&b)?) / (2.0 * h);
            jac.set_column(j, &col);
        }
        Ok(jac)
    }

    /// Null vector of the `(n-1) x n` Jacobian by signed maximal minors.
    fn null_vector(jac: &DMatrix<f64>) -> DVector<f64> {
        let n = jac.ncols();
        DVector::from_iterator(
            n,
            (0..n).map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * jac.clone().remove_column(i).determinant()
            }),
        )
    }

    /// Tangent at `u` oriented along `prev`.
    fn tangent(&self, u: &DVector<f64>, prev: &DVector<f64>) -> Result<DVector<f64>> {
        let jac = self.jacobian(u)?;
        let n = self.dim();
        let mut a = jac.insert_row(n - 1, 0.0);
        a.set_row(n - 1, &prev.transpose());
        let mut rhs = DVector::zeros(n);
        rhs[n - 1] = 1.0;
        let t = a.lu().solve(&rhs).ok_or(Error::SingularJacobian { det: 0.0 })?;
        let norm = t.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonFinite);
        }
        Ok(t / norm)
    }

    /// Newton on `{F(v) = 0, t·(v - pred) = 0}`. Returns the corrected point
    /// and the iteration count.
    fn correct(&self, pred: &DVector<f64>, t: &DVector<f64>, tol: f64, max_it: usize) -> Result<(DVector<f64>, usize)> {
        let n = self.dim();
        let mut v = pred.clone();
        for it in 0..max_it {
            let f = self.residual(&v)?;
            let mut g = f.clone().insert_row(n - 1, 0.0);
            g[n - 1] = t.dot(&(&v - pred));
            let mut a = self.jacobian(&v)?.insert_row(n - 1, 0.0);
            a.set_row(n - 1, &t.transpose());
            let dv = a.lu().solve(&(-g)).ok_or(Error::SingularJacobian { det: 0.0 })?;
            v += &dv;
            if dv.norm() < 1e-11 * (1.0 + v.norm()) {
                let r = self.residual(&v)?.amax();
                if r < tol {
                    return Ok((v, it + 1));
                }
            }
        }
        let r = self.residual(&v)?.amax();
        if r < tol {
            Ok((v, max_it))
        } else {
            Err(Error::NoConvergence { iterations: max_it, residual: r })
        }
    }

    fn sample(&self, u: &DVector<f64>, curve: CurveId) -> Result<CurveSample> {
        let (p, m1, m2) = self.unpack(u);
        let spec = self.base.with_params(m1, m2);
        Ok(CurveSample {
            curve,
            m1,
            m2,
            point: p,
            orbit: orbit_starting_at(&spec, self.q, p)?,
            condition_residual: self.residual(u)?.amax(),
        })
    }
}

fn projected(t: &DVector<f64>) -> (f64, f64) {
    let n = t.len();
    (t[n - 2], t[n - 1])
}

fn pdot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

/// Counts period-`q` orbits with a point within `r` of `p`, seeded from a
/// small lattice around `p`; `None` when an orbit of lower period is that
/// close too, since the count then says nothing about the curve.
fn local_count(spec: &MapSpec, q: usize, p: Point, r: f64) -> Option<usize> {
    let ns = NewtonSettings { max_iter: 30, ..NewtonSettings::default() };
    let mut found: Vec<Orbit> = Vec::new();
    let n = 9;
    for i in 0..n {
        for j in 0..n {
            let s = Point::new(
                p.x + r * (2.0 * i as f64 / (n - 1) as f64 - 1.0),
                p.y + r * (2.0 * j as f64 / (n - 1) as f64 - 1.0),
            );
            let Ok(o) = find_periodic(spec, q, s, &ns) else { continue };
            if o.points.iter().all(|&x| x.dist(p) > 2.0 * r) {
                continue;
            }
            if minimal_period(&o.points, q, DEDUP_TOL) != q {
                return None;
            }
            if !found.iter().any(|k| k.same_as(&o, 1e-7)) {
                found.push(o);
            }
        }
    }
    Some(found.len())
}

/// Pitchforks keep an odd number of nearby orbits on both sides of the
/// curve (1 and 3); folds an even one (0 and 2). `None` when undecided.
fn probe(system: &System, u: &DVector<f64>, t: &DVector<f64>) -> Option<CurveId> {
    let (p, m1, m2) = system.unpack(u);
    let (a, b) = projected(t);
    let norm = a.hypot(b);
    if norm == 0.0 {
        return None;
    }
    let delta: f64 = 1e-4;
    let r = 4.0 * delta.sqrt();
    let mut odd = false;
    for side in [1.0, -1.0] {
        let spec = system.base.with_params(m1 - side * delta * b / norm, m2 + side * delta * a / norm);
        odd |= local_count(&spec, system.q, p, r)? % 2 == 1;
    }
    Some(if odd { CurveId::PF3 } else { CurveId::P3 })
}

/// Pseudo-arclength continuation of a codimension-one degeneracy of
/// `q`-periodic orbits in the `(M1, M2)` plane of `base`.
pub fn continue_codim1(
    base: &MapSpec,
    q: usize,
    condition: Condition,
    start: &CurveSample,
    settings: &ContinuationSettings,
) -> Result<Continuation> {
    if q == 0 {
        return Err(Error::Invalid("period must be positive".into()));
    }
    let sys = System { base, q, condition };
    let mut u = sys.pack(start.point, start.m1, start.m2);
    let r0 = sys.residual(&u)?.amax();
    if !(r0 <= 1e-6) {
        return Err(Error::Invalid(format!("start residual {r0:e} exceeds 1e-6")));
    }
    let mut t = initial_tangent(&sys, &u, settings.direction)?;
    u = sys.correct(&u, &t, settings.tol, 12)?.0;
    t = sys.tangent(&u, &t)?;

    let probing = condition == Condition::Pitchfork && settings.probe_every > 0;
    let mut label = probing.then(|| probe(&sys, &u, &t)).flatten().unwrap_or(condition.curve(q));
    let mut samples = vec![sys.sample(&u, label)?];
    let mut history = vec![(u.clone(), t.clone())];
    let mut cusps = Vec::new();
    let mut h = settings.initial_step.clamp(settings.min_step, settings.max_step);
    let mut travelled = 0.0;
    let mut jumps = 0;
    let end = loop {
        if samples.len() > settings.steps {
            break EndReason::Steps;
        }
        if travelled >= settings.arclength {
            break EndReason::Arclength;
        }
        let pred = &u + h * &t;
        let step = sys.correct(&pred, &t, settings.tol, 12).and_then(|(v, it)| {
            let tv = sys.tangent(&v, &t)?;
            Ok((v, tv, it))
        });
        let accepted = match step {
            Ok((v, tv, it)) if (&v - &u).norm() < 2.0 * h && tv.dot(&t) > 0.9 => Some((v, tv, it, &t)),
            Ok(_) | Err(Error::NoConvergence { .. }) | Err(Error::SingularJacobian { .. }) => None,
            Err(_) if h > settings.min_step => None,
            Err(_) => break EndReason::Domain,
        };
        let mut jumped = None;
        let (v, tv, it, t_ref) = match accepted {
            Some(a) => a,
            None if h * 0.5 >= settings.min_step => {
                h *= 0.5;
                continue;
            }
            None => {
                // the corrector stalls at singular points of the defining
                // system; try to land beyond one from further back
                jumps += 1;
                match (jumps <= 4).then(|| jump(&sys, &history, settings)).flatten() {
                    Some((v, tv, k)) => {
                        jumped = Some(k);
                        (v, tv, 0, &history[k].1)
                    }
                    None => break EndReason::StepFailure,
                }
            }
        };
        travelled += (&v - &u).norm();
        let (_, m1, m2) = sys.unpack(&v);
        if probing && samples.len() % settings.probe_every == 0 {
            label = probe(&sys, &v, &tv).unwrap_or(label);
        }
        let Ok(sample) = sys.sample(&v, label) else { break EndReason::Domain };
        if pdot(projected(&tv), projected(t_ref)) < 0.0 {
            let cusp = match jumped {
                // the last sample before the singular point is the best estimate
                Some(_) => {
                    let (point, m1, m2) = sys.unpack(&u);
                    Cusp { index: samples.len(), m1, m2, point }
                }
                None => locate_cusp(&sys, &u, &t, h, settings.tol, samples.len()).unwrap_or(Cusp {
                    index: samples.len(),
                    m1,
                    m2,
                    point: sample.point,
                }),
            };
            cusps.push(cusp);
        }
        samples.push(sample);
        history.push((v.clone(), tv.clone()));
        u = v;
        t = tv;
        if let Some(b) = settings.bounds {
            if !b.contains(Point::new(m1, m2)) {
                break EndReason::Bounds;
            }
        }
        if jumped.is_some() {
            h = settings.initial_step.clamp(settings.min_step, settings.max_step);
        } else if it <= 3 {
            h = (h * 1.5).min(settings.max_step);
        } else if it >= 6 {
            h *= 0.7;
        }
        h = h.max(settings.min_step);
    };
    Ok(Continuation { base: *base, q, condition, samples, cusps, end })
}

impl Continuation {
    /// Samples solving the defining system exactly at `M2 = m2`, one per
    /// crossing of the sampled curve.
    pub fn crossings_m2(&self, m2: f64) -> Vec<CurveSample> {
        self.samples
            .windows(2)
            .filter(|w| (w[0].m2 - m2) * (w[1].m2 - m2) <= 0.0 && w[0].m2 != w[1].m2)
            .filter_map(|w| {
                let s = (m2 - w[0].m2) / (w[1].m2 - w[0].m2);
                let lerp = |a: f64, b: f64| a + s * (b - a);
                let p = Point::new(lerp(w[0].point.x, w[1].point.x), lerp(w[0].point.y, w[1].point.y));
                let m1 = lerp(w[0].m1, w[1].m1);
                solve_at_m2(&self.base, self.q, self.condition, m2, p, m1)
                    .ok()
                    .map(|c| CurveSample { curve: w[0].curve, ..c })
            })
            .collect()
    }

    /// Smallest distance from the sampled curve and its cusps to a point of
    /// the parameter plane.
    pub fn distance_to(&self, m1: f64, m2: f64) -> f64 {
        let target = Point::new(m1, m2);
        let poly: Vec<Point> = self.samples.iter().map(|s| Point::new(s.m1, s.m2)).collect();
        crate::manifolds::polyline_distance(target, &poly)
    }
}

fn initial_tangent(sys: &System, u: &DVector<f64>, direction: (f64, f64)) -> Result<DVector<f64>> {
    let t = System::null_vector(&sys.jacobian(u)?);
    let norm = t.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::SingularJacobian { det: 0.0 });
    }
    let t = t / norm;
    Ok(if pdot(projected(&t), direction) < 0.0 { -t } else { t })
}

/// Steps over a singular point of the defining system. The branch is
/// extrapolated quadratically in its dominant coordinate from three samples
/// spanning at least `settings.jump` before the last one, reflected through
/// the last one, and corrected with that coordinate pinned.
fn jump(
    sys: &System,
    history: &[(DVector<f64>, DVector<f64>)],
    settings: &ContinuationSettings,
) -> Option<(DVector<f64>, DVector<f64>, usize)> {
    let last = &history.last()?.0;
    [0.5, 1.0, 2.0, 4.0].iter().find_map(|&f| {
        let reach = f * settings.jump;
        let k = (0..history.len()).rev().find(|&k| (&history[k].0 - last).norm() >= reach)?;
        let m = (k + history.len()) / 2;
        let uk = &history[k].0;
        let um = &history[m].0;
        let i = (uk - last).iamax();
        let xs = [uk[i], um[i], last[i]];
        let x = 2.0 * last[i] - uk[i];
        let w = |a: usize, b: usize, c: usize| (x - xs[b]) * (x - xs[c]) / ((xs[a] - xs[b]) * (xs[a] - xs[c]));
        let (wk, wm, wl) = (w(0, 1, 2), w(1, 0, 2), w(2, 0, 1));
        if !(wk.is_finite() && wm.is_finite() && wl.is_finite()) {
            return None;
        }
        let pred = wk * uk + wm * um + wl * last;
        let pin = DVector::from_fn(uk.len(), |j, _| if j == i { 1.0 } else { 0.0 });
        let (v, _) = sys.correct(&pred, &pin, settings.tol, 60).ok()?;
        let sign = (last[i] - uk[i]).signum();
        let tv = sys.tangent(&v, &(sign * &pin)).ok()?;
        // several branches meet at such points; lower periods are the wrong one
        let orbit = sys.sample(&v, CurveId::P3).ok()?.orbit;
        let full = minimal_period(&orbit.points, sys.q, 1e-6) == sys.q;
        let d = (uk - last).norm();
        let beyond = full && (&v - last).norm() > 0.5 * d && (&v - last).norm() < 3.0 * d;
        beyond.then_some((v, tv, k))
    })
}

/// Bisects along the secant from `u` for the point where the projected
/// tangent turns against its value at `u`.
fn locate_cusp(sys: &System, u: &DVector<f64>, t: &DVector<f64>, h: f64, tol: f64, index: usize) -> Option<Cusp> {
    let t0 = projected(t);
    let (mut lo, mut hi) = (0.0, h);
    let mut best = None;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let (v, _) = sys.correct(&(u + mid * t), t, tol, 12).ok()?;
        let tv = sys.tangent(&v, t).ok()?;
        if pdot(projected(&tv), t0) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        best = Some(v);
        if hi - lo < 1e-9 {
            break;
        }
    }
    let v = best?;
    let (point, m1, m2) = sys.unpack(&v);
    Some(Cusp { index, m1, m2, point })
}

/// Solves the defining system at fixed `M2` from a guess of the point and
/// `M1`.
pub fn solve_at_m2(base: &MapSpec, q: usize, condition: Condition, m2: f64, p: Point, m1: f64) -> Result<CurveSample> {
    let sys = System { base, q, condition };
    let n = sys.dim();
    let mut u = sys.pack(p, m1, m2);
    let mut res = sys.residual(&u)?.amax();
    for _ in 0..50 {
        if res < 1e-13 {
            break;
        }
        let jac = sys.jacobian(&u)?.remove_column(n - 1);
        let f = sys.residual(&u)?;
        let step = jac.lu().solve(&(-f)).ok_or(Error::SingularJacobian { det: 0.0 })?;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let mut trial = u.clone();
            for i in 0..n - 1 {
                trial[i] += lambda * step[i];
            }
            if let Ok(r) = sys.residual(&trial) {
                if r.amax() < res {
                    u = trial;
                    res = r.amax();
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if res > 1e-10 {
        return Err(Error::NoConvergence { iterations: 50, residual: res });
    }
    sys.sample(&u, condition.curve(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::CubicSign::{self, *};

    fn settings(direction: (f64, f64)) -> ContinuationSettings {
        ContinuationSettings {
            bounds: Some(Region::new(-3.0, 3.0, -3.0, 4.0)),
            arclength: 6.0,
            steps: 3000,
            direction,
            ..Default::default()
        }
    }

    fn pf3(sign: CubicSign, m2: f64, s: f64, m1: f64) -> Continuation {
        let base = MapSpec::h3(sign, 0.0, 0.0);
        let start = solve_at_m2(&base, 3, Condition::Pitchfork, m2, Point::new(s, s), m1).unwrap();
        let dir = if sign == Plus { (0.0, 1.0) } else { (0.0, -1.0) };
        continue_codim1(&base, 3, Condition::Pitchfork, &start, &settings(dir)).unwrap()
    }

    #[test]
    fn pf3_has_a_cusp_at_the_degenerate_resonance() {
        for c in [pf3(Plus, -1.25, 0.2887, 0.048), pf3(Minus, -0.8, 0.2582, -0.0344)] {
            let cusp = c.cusps.first().expect("no cusp");
            assert!(cusp.m1.hypot(cusp.m2 + 1.0) < 1e-3, "{cusp:?}");
            assert!(c.samples.iter().all(|s| s.curve == CurveId::PF3));
        }
    }

    #[test]
    fn pf3_passes_the_cusp_onto_the_mirrored_half() {
        let c = pf3(Plus, -1.25, 0.2887, 0.048);
        let start = c.samples[0].m1;
        assert!(0.03 < start && start < 0.83);
        let m1s: Vec<f64> = c.crossings_m2(-1.25).iter().map(|s| s.m1).collect();
        assert!(m1s.iter().any(|m| (m + start).abs() < 1e-8), "{m1s:?}");
    }

    #[test]
    fn pitchfork_samples_are_symmetric_with_a_unit_multiplier() {
        let c = pf3(Plus, -1.25, 0.2887, 0.048);
        for s in &c.samples {
            assert!(s.orbit.symmetric);
            let m = s.orbit.monodromy;
            let g = (m.a - 1.0) * (m.d - 1.0) - m.b * m.c;
            assert!(g.abs() < 1e-8, "{g}");
        }
    }

    #[test]
    fn parabolic_samples_carry_a_unit_multiplier() {
        let base = MapSpec::h3(Plus, 0.0, 0.0);
        let start = solve_at_m2(&base, 3, Condition::Parabolic, -1.25, Point::new(0.457, 0.457), 1.0099).unwrap();
        let c = continue_codim1(&base, 3, Condition::Parabolic, &start, &settings((0.0, 1.0))).unwrap();
        assert!(c.samples.len() > 20);
        assert!(c.distance_to(0.0, -1.0) < 1e-3);
        for s in &c.samples {
            let nearest = s.orbit.multipliers.iter().map(|l| (l - 1.0).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-6, "{nearest} at {} {}", s.m1, s.m2);
        }
    }

    #[test]
    fn conservative_curves_are_mirror_symmetric_in_m1() {
        let base = MapSpec::h3(Plus, 0.0, 0.0);
        let run = |p: Point, m1: f64| {
            let start = solve_at_m2(&base, 3, Condition::Parabolic, -1.25, p, m1).unwrap();
            continue_codim1(&base, 3, Condition::Parabolic, &start, &settings((0.0, 1.0))).unwrap()
        };
        let right = run(Point::new(0.457, 0.457), 1.0099);
        let left = run(Point::new(-0.457, -0.457), -1.0099);
        for s in right.samples.iter().step_by(5) {
            assert!(left.distance_to(-s.m1, s.m2) < 1e-6, "{} {}", s.m1, s.m2);
        }
    }

    #[test]
    fn perturbed_l13_crossing() {
        let base = MapSpec::qr(Plus, 0.0, 0.0, 0.05);
        let start = solve_at_m2(&base, 1, Condition::L13, -1.1, Point::new(0.183, 0.183), 0.56).unwrap();
        let c = continue_codim1(&base, 1, Condition::L13, &start, &settings((0.0, -1.0))).unwrap();
        let m1s: Vec<f64> = c.crossings_m2(-1.25).iter().map(|s| s.m1).collect();
        assert!(m1s.iter().any(|m| (m - 0.882737).abs() < 1e-3), "{m1s:?}");
    }

    #[test]
    fn solve_at_m2_lands_on_the_analytic_l13() {
        let base = MapSpec::h3(Plus, 0.0, 0.0);
        let s = solve_at_m2(&base, 1, Condition::L13, -1.25, Point::new(0.29, 0.29), 0.9).unwrap();
        let exact = super::super::analytic_curve(CurveId::L13, Plus, -1.25).unwrap();
        assert!((s.m1 - exact.m1_plus.unwrap()).abs() < 1e-9);
    }
}
