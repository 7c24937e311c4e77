use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::maps::{MapSpec, PlanarMap};
use crate::orbits::{dedup_orbits, find_periodic, minimal_period, pair_match, NewtonSettings, Orbit, OrbitClass, DEDUP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IslandSettings {
    /// Seed for the central elliptic fixed point.
    pub center: Point,
    /// Radii of the seeding annulus around the center.
    pub annulus: (f64, f64),
    pub rays: usize,
    pub radii: usize,
    pub newton: NewtonSettings,
}

impl Default for IslandSettings {
    fn default() -> Self {
        Self { center: Point::ORIGIN, annulus: (0.05, 1.5), rays: 24, radii: 40, newton: NewtonSettings::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFindings {
    pub p: u32,
    pub q: usize,
    pub m2: f64,
    pub center: Point,
    pub orbits: Vec<Orbit>,
    pub symmetric_count: usize,
    /// Number of symmetric pairs among the nonsymmetric orbits.
    pub pair_count: usize,
}

/// Net number of turns around `center` made by one pass of the orbit,
/// taken positive.
pub fn rotation_number<M: PlanarMap + ?Sized>(map: &M, orbit: &Orbit, center: Point) -> Result<u32> {
    let mut total = 0.0;
    for &p in &orbit.points {
        let fp = map.forward(p)?;
        let a = (p - center).y.atan2((p - center).x);
        let b = (fp - center).y.atan2((fp - center).x);
        let mut d = b - a;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d <= -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round().abs() as u32)
}

/// Period-`q` orbits of the garland around an elliptic fixed point, seeded
/// along rays through the annulus.
pub fn island_scan(spec: &MapSpec, q: usize, settings: &IslandSettings) -> Result<ResonanceFindings> {
    let (r_lo, r_hi) = settings.annulus;
    if q == 0 || !(0.0 <= r_lo && r_lo < r_hi) || settings.rays == 0 || settings.radii < 2 {
        return Err(Error::Invalid("island scan needs q >= 1, a nonempty annulus, rays and radii".into()));
    }
    let center = find_periodic(spec, 1, settings.center, &settings.newton)?;
    if center.class != OrbitClass::Elliptic {
        return Err(Error::Domain(format!("central fixed point is {}, not elliptic", center.class.name())));
    }
    let c = center.start();
    let seeds: Vec<Point> = (0..settings.rays)
        .flat_map(|k| (0..settings.radii).map(move |j| (k, j)))
        .map(|(k, j)| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / settings.rays as f64;
            let r = r_lo + (r_hi - r_lo) * j as f64 / (settings.radii - 1) as f64;
            c + r * Point::new(theta.cos(), theta.sin())
        })
        .collect();
    let found: Vec<(Orbit, u32)> = seeds
        .par_iter()
        .filter_map(|&s| find_periodic(spec, q, s, &settings.newton).ok())
        .filter(|o| minimal_period(&o.points, q, DEDUP_TOL) == q)
        .filter(|o| o.points.iter().all(|&p| (r_lo..=r_hi).contains(&p.dist(c))))
        .filter_map(|o| {
            let p = rotation_number(spec, &o, c).ok()?;
            (p > 0).then_some((o, p))
        })
        .collect();
    let mut p_counts: Vec<(u32, usize)> = Vec::new();
    for (_, p) in &found {
        match p_counts.iter_mut().find(|(k, _)| k == p) {
            Some(e) => e.1 += 1,
            None => p_counts.push((*p, 1)),
        }
    }
    let p = p_counts.iter().max_by_key(|(k, n)| (*n, std::cmp::Reverse(*k))).map_or(0, |e| e.0);
    let orbits = dedup_orbits(found.into_iter().filter(|(_, k)| *k == p).map(|(o, _)| o).collect());
    let symmetric_count = orbits.iter().filter(|o| o.symmetric).count();
    let asym: Vec<&Orbit> = orbits.iter().filter(|o| !o.symmetric).collect();
    let mut used = vec![false; asym.len()];
    let mut pair_count = 0;
    for i in 0..asym.len() {
        if used[i] {
            continue;
        }
        if let Some(j) = (i + 1..asym.len()).find(|&j| !used[j] && pair_match(asym[i], asym[j], 1e-6).is_pair) {
            used[i] = true;
            used[j] = true;
            pair_count += 1;
        }
    }
    Ok(ResonanceFindings { p, q, m2: spec.m2, center: c, orbits, symmetric_count, pair_count })
}
