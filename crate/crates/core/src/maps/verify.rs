//! Sampling verifiers for the structural identities of the map families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{involution, CubicSign, MapSpec, PlanarMap};
use crate::error::Result;
use crate::linalg::{Point, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyKind {
    Reversibility,
    Conservativity,
    SecondIterateIdentity,
    CentralSymmetry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: PropertyKind,
    /// Samples that were evaluated.
    pub samples: usize,
    /// Samples dropped because they hit a singular line or overflowed.
    pub skipped: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    /// `max_residual < tolerance`, and at least one sample was evaluated.
    pub pass: bool,
    /// Sample attaining `max_residual`.
    pub witness: Option<Point>,
}

/// Uniform random sample points in a box, reproducible from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub region: Region,
    pub n: usize,
    pub seed: u64,
}

impl Sampler {
    pub fn new(region: Region, n: usize) -> Self {
        Self { region, n, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn points(&self) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let r = self.region;
        (0..self.n)
            .map(|_| Point::new(rng.gen_range(r.x_min..=r.x_max), rng.gen_range(r.y_min..=r.y_max)))
            .collect()
    }
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::new(Region::default(), 10_000)
    }
}

/// Evaluates `residual` on every sample and reduces by maximum; ties keep
/// the earliest sample so the report does not depend on thread scheduling.
fn run<F>(property: PropertyKind, sampler: &Sampler, tol: f64, residual: F) -> PropertyReport
where
    F: Fn(Point) -> Result<f64> + Sync,
{
    let points = sampler.points();
    let values: Vec<Option<f64>> = points
        .par_iter()
        .map(|&p| residual(p).ok().filter(|r| r.is_finite()))
        .collect();
    let mut samples = 0;
    let mut skipped = 0;
    let mut worst: Option<(f64, Point)> = None;
    for (p, v) in points.iter().zip(values) {
        match v {
            Some(r) => {
                samples += 1;
                if worst.map_or(true, |(w, _)| r > w) {
                    worst = Some((r, *p));
                }
            }
            None => skipped += 1,
        }
    }
    let max_residual = worst.map_or(0.0, |(w, _)| w);
    PropertyReport {
        property,
        samples,
        skipped,
        max_residual,
        tolerance: tol,
        pass: samples > 0 && max_residual < tol,
        witness: worst.map(|(_, p)| p),
    }
}

/// Max of `‖(h∘f∘h∘f)(p) - p‖` over the samples.
pub fn verify_reversibility<M: PlanarMap + ?Sized>(map: &M, sampler: &Sampler, tol: f64) -> PropertyReport {
    run(PropertyKind::Reversibility, sampler, tol, |p| {
        let q = map.forward(p)?;
        let back = involution(map.forward(involution(q))?);
        Ok(back.dist(p))
    })
}

/// Max of `|det Df(p) - 1|`; passing means conservative within `tol`.
pub fn verify_conservativity<M: PlanarMap + ?Sized>(map: &M, sampler: &Sampler, tol: f64) -> PropertyReport {
    run(PropertyKind::Conservativity, sampler, tol, |p| Ok((map.jacobian(p)?.det() - 1.0).abs()))
}

/// Compares the cross-form second iterate against two applications of the
/// inverse cubic map.
pub fn verify_second_iterate_identity(
    d: CubicSign,
    m1: f64,
    m2: f64,
    eps: f64,
    sampler: &Sampler,
    tol: f64,
) -> PropertyReport {
    let cross = MapSpec::crossform(d, m1, m2, eps);
    let inverse = MapSpec::h3_inverse(d, m1, m2);
    run(PropertyKind::SecondIterateIdentity, sampler, tol, |p| {
        let a = cross.forward(p)?;
        let b = inverse.forward(inverse.forward(p)?)?;
        Ok(a.dist(b))
    })
}

/// Max of `‖f(-p) + f(p)‖`.
pub fn verify_central_symmetry<M: PlanarMap + ?Sized>(map: &M, sampler: &Sampler, tol: f64) -> PropertyReport {
    run(PropertyKind::CentralSymmetry, sampler, tol, |p| {
        let a = map.forward(p)?;
        let b = map.forward(-p)?;
        Ok((a + b).norm())
    })
}
