use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Point, Region};
use crate::maps::MapSpec;
use crate::orbits::{
    find_periodic, grid_seed, hausdorff, minimal_period, pair_match, symmetric_search, GridOptions, NewtonSettings, Orbit,
    OrbitClass, PairReport, DEDUP_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PitchforkKind {
    /// An elliptic orbit turns saddle and sheds a non-saddle pair.
    Supercritical,
    /// A saddle turns elliptic and sheds a pair of saddles.
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchforkSettings {
    /// Margin of the inventory box around the seed orbit.
    pub radius: f64,
    pub grid: (usize, usize),
    pub newton: NewtonSettings,
}

impl Default for PitchforkSettings {
    fn default() -> Self {
        Self { radius: 0.3, grid: (41, 41), newton: NewtonSettings::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchforkReport {
    pub kind: PitchforkKind,
    /// Parameter at which the emergent pair merges into the central orbit.
    pub m1_star: f64,
    pub central_before: OrbitClass,
    pub central_after: OrbitClass,
    /// The central orbit shortly before and after `m1_star`, in bracket order.
    pub central: [Orbit; 2],
    pub emergent: [Orbit; 2],
    pub pair: PairReport,
    /// Nonsymmetric orbits found near the central one on each side.
    pub counts: [usize; 2],
}

/// One step of following an orbit in `M1`; `None` once it is lost or has
/// merged into a symmetric one.
fn follow(base: &MapSpec, q: usize, o: &Orbit, m1: f64, ns: &NewtonSettings) -> Option<Orbit> {
    let next = find_periodic(&base.with_m1(m1), q, o.start(), ns).ok()?;
    let ok = next.start().dist(o.start()) < 0.05
        && next.symmetric == o.symmetric
        && minimal_period(&next.points, q, DEDUP_TOL) == q;
    ok.then_some(next)
}

/// Steps `o` from `from` towards `to`; returns the last parameter and orbit
/// it was followed to, and whether it reached `to`.
fn follow_until_lost(base: &MapSpec, q: usize, o: &Orbit, (from, to): (f64, f64), ns: &NewtonSettings) -> (f64, Orbit, bool) {
    const STEP: f64 = 2e-3;
    let n = ((to - from).abs() / STEP).ceil().max(1.0) as usize;
    let (mut m, mut cur) = (from, o.clone());
    for k in 1..=n {
        let next_m = from + (to - from) * k as f64 / n as f64;
        match follow(base, q, &cur, next_m, ns) {
            Some(next) => (m, cur) = (next_m, next),
            None => {
                // bisect the step in which the orbit disappears
                let mut bad = next_m;
                for _ in 0..30 {
                    let mid = 0.5 * (m + bad);
                    match follow(base, q, &cur, mid, ns) {
                        Some(next) => (m, cur) = (mid, next),
                        None => bad = mid,
                    }
                }
                return (m, cur, false);
            }
        }
    }
    (m, cur, true)
}

fn bounding_region(o: &Orbit, margin: f64) -> Region {
    let (lo, hi) = o.points.iter().fold((o.start(), o.start()), |(lo, hi), p| {
        (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y)))
    });
    Region::new(lo.x - margin, hi.x + margin, lo.y - margin, hi.y + margin)
}

fn nearby_asymmetric(spec: &MapSpec, q: usize, region: &Region, s: &PitchforkSettings) -> Vec<Orbit> {
    let opts = GridOptions { newton: s.newton, keep_lower_periods: false, restrict_to_region: false };
    grid_seed(spec, q, region, s.grid, &opts)
        .into_iter()
        .filter(|o| !o.symmetric && minimal_period(&o.points, q, DEDUP_TOL) == q)
        .filter(|o| o.points.iter().any(|&p| region.contains(p)))
        .collect()
}

/// Classifies a pitchfork of a symmetric `q`-periodic orbit bracketed by
/// `M1_before` and `M1_after`. The nonsymmetric pair present on one side
/// only is followed until it merges; the symmetric orbit it merges into is
/// the central one, classified just on either side of that parameter.
pub fn pitchfork_local_analysis(
    base: &MapSpec,
    q: usize,
    (m1_before, m1_after): (f64, f64),
    central_seed: Point,
    settings: &PitchforkSettings,
) -> Result<PitchforkReport> {
    let ns = settings.newton;
    let seed = find_periodic(&base.with_m1(m1_before), q, central_seed, &ns)?;
    if !seed.symmetric {
        return Err(Error::Invalid("the central orbit must be symmetric".into()));
    }
    let region = bounding_region(&seed, settings.radius);
    let params = [m1_before, m1_after];
    let sides = params.map(|m1| nearby_asymmetric(&base.with_m1(m1), q, &region, settings));
    let counts = [sides[0].len(), sides[1].len()];
    if counts[0] == counts[1] {
        return Err(Error::Inconclusive);
    }
    let k = usize::from(counts[1] > counts[0]);
    let mut fresh: Vec<Orbit> =
        sides[k].iter().filter(|o| !sides[1 - k].iter().any(|x| x.same_as(o, 1e-3))).cloned().collect();
    if fresh.len() != 2 {
        return Err(Error::Inconclusive);
    }
    let pair = pair_match(&fresh[0], &fresh[1], 1e-6);
    let (m_star, merged, reached) = follow_until_lost(base, q, &fresh[0], (params[k], params[1 - k]), &ns);
    if reached {
        return Err(Error::Inconclusive);
    }
    let near = base.with_m1(m_star);
    let hull = bounding_region(&merged, 0.0);
    let central = symmetric_search(&near, q, (hull.x_min - 0.1, hull.x_max + 0.1), 401, &ns)?
        .into_iter()
        .min_by(|a, b| hausdorff(&a.points, &merged.points).total_cmp(&hausdorff(&b.points, &merged.points)))
        .ok_or(Error::Inconclusive)?;
    if hausdorff(&central.points, &merged.points) > 0.05 {
        return Err(Error::Inconclusive);
    }
    // classify away from the degenerate parameter, a short way into each side
    let delta = (0.05 * (m1_after - m1_before).abs()).min(0.01);
    let toward = |m_end: f64| {
        let target = m_star + delta * (m_end - m_star).signum();
        let (m, o, ok) = follow_until_lost(base, q, &central, (m_star, target), &ns);
        (ok || (m - m_star).abs() > 0.5 * delta).then_some(o).ok_or(Error::Inconclusive)
    };
    let rich = toward(params[k])?;
    let poor = toward(params[1 - k])?;
    let emergent_saddles = fresh.iter().all(|o| o.class.is_saddle());
    let emergent_plain = fresh.iter().all(|o| !o.class.is_saddle());
    let kind = match (rich.class.is_saddle(), poor.class.is_saddle()) {
        (true, false) if emergent_plain => PitchforkKind::Supercritical,
        (false, true) if emergent_saddles => PitchforkKind::Subcritical,
        _ => return Err(Error::Inconclusive),
    };
    let b = fresh.pop().ok_or(Error::Inconclusive)?;
    let a = fresh.pop().ok_or(Error::Inconclusive)?;
    let central = if k == 1 { [poor, rich] } else { [rich, poor] };
    Ok(PitchforkReport {
        kind,
        m1_star: m_star,
        central_before: central[0].class,
        central_after: central[1].class,
        central,
        emergent: [a, b],
        pair,
        counts,
    })
}
