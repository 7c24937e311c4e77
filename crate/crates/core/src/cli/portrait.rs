use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::{write_csv, PortraitRow};
use crate::error::{Error, Result};
use crate::linalg::{Point, Region};
use crate::maps::MapSpec;

/// Largest seed grid side.
pub const GRID_CAP: usize = 800;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    Forward,
    Backward,
    Both,
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            "both" => Ok(Direction::Both),
            other => Err(Error::Invalid(format!("unknown direction `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortraitJob {
    pub spec: MapSpec,
    pub region: Region,
    pub grid: (usize, usize),
    pub iters_per_seed: usize,
    pub escape_radius: f64,
    pub direction: Direction,
}

impl PortraitJob {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let (nx, ny) = self.grid;
        if nx < 2 || ny < 2 || nx > GRID_CAP || ny > GRID_CAP {
            return Err(Error::Invalid(format!("grid must be between 2 and {GRID_CAP} per side")));
        }
        if !self.region.is_valid() {
            return Err(Error::Invalid("empty region".into()));
        }
        if !(self.escape_radius > self.region.diameter()) {
            return Err(Error::Invalid("escape radius must exceed the region diameter".into()));
        }
        Ok(())
    }

    fn seeds(&self) -> Vec<Point> {
        let (nx, ny) = self.grid;
        (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| self.region.lattice_point(i, j, nx, ny)).collect()
    }

    /// Spacing of the seed lattice.
    pub fn resolution(&self) -> (f64, f64) {
        let r = self.region;
        ((r.x_max - r.x_min) / (self.grid.0 - 1) as f64, (r.y_max - r.y_min) / (self.grid.1 - 1) as f64)
    }
}

/// Iterates one seed; the rows of an escaping seed are all flagged.
fn seed_rows(map: &MapSpec, seed: Point, iters: usize, escape: f64, forward: bool) -> Vec<PortraitRow> {
    let mut out = Vec::with_capacity(iters);
    let mut p = seed;
    let mut escaped = false;
    for n in 1..=iters {
        let next = if forward { map.forward(p) } else { map.backward(p) };
        match next {
            Ok(q) if q.is_finite() && q.norm() <= escape => {
                p = q;
                out.push(PortraitRow { seed_x: seed.x, seed_y: seed.y, iter: n as u64, x: q.x, y: q.y, escaped: false });
            }
            _ => {
                escaped = true;
                break;
            }
        }
    }
    if escaped {
        out.iter_mut().for_each(|r| r.escaped = true);
        if out.is_empty() {
            out.push(PortraitRow { seed_x: seed.x, seed_y: seed.y, iter: 0, x: seed.x, y: seed.y, escaped: true });
        }
    }
    out
}

/// Occupied cells of the seed lattice's resolution, for symmetry checks of
/// clouds too large to compare point by point.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<bool>,
}

impl Raster {
    pub fn new(region: Region, nx: usize, ny: usize) -> Self {
        Raster { region, nx, ny, cells: vec![false; nx * ny] }
    }

    fn cell(&self, p: Point) -> Option<(usize, usize)> {
        let r = self.region;
        if !r.contains(p) {
            return None;
        }
        let i = (((p.x - r.x_min) / (r.x_max - r.x_min)) * self.nx as f64).floor() as usize;
        let j = (((p.y - r.y_min) / (r.y_max - r.y_min)) * self.ny as f64).floor() as usize;
        Some((i.min(self.nx - 1), j.min(self.ny - 1)))
    }

    fn center(&self, i: usize, j: usize) -> Point {
        let r = self.region;
        Point::new(
            r.x_min + (i as f64 + 0.5) * (r.x_max - r.x_min) / self.nx as f64,
            r.y_min + (j as f64 + 0.5) * (r.y_max - r.y_min) / self.ny as f64,
        )
    }

    pub fn mark(&mut self, p: Point) {
        if let Some((i, j)) = self.cell(p) {
            self.cells[j * self.nx + i] = true;
        }
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Fraction of occupied cells of `self` whose image under `g` has no
    /// occupied cell of `other` within one cell. Images leaving the region
    /// are not counted.
    pub fn image_defect(&self, other: &Raster, g: impl Fn(Point) -> Point + Sync) -> f64 {
        let (mut total, mut missed) = (0usize, 0usize);
        for j in 0..self.ny {
            for i in 0..self.nx {
                if !self.cells[j * self.nx + i] {
                    continue;
                }
                let Some((a, b)) = other.cell(g(self.center(i, j))) else { continue };
                total += 1;
                let hit = (a.saturating_sub(1)..=(a + 1).min(other.nx - 1))
                    .any(|x| (b.saturating_sub(1)..=(b + 1).min(other.ny - 1)).any(|y| other.cells[y * other.nx + x]));
                if !hit {
                    missed += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            missed as f64 / total as f64
        }
    }
}

/// Point clouds of a portrait job held in memory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PortraitClouds {
    pub forward: Vec<PortraitRow>,
    pub backward: Vec<PortraitRow>,
}

fn directions(d: Direction) -> &'static [bool] {
    match d {
        Direction::Forward => &[true],
        Direction::Backward => &[false],
        Direction::Both => &[true, false],
    }
}

pub fn render_portrait(job: &PortraitJob) -> Result<PortraitClouds> {
    job.validate()?;
    let seeds = job.seeds();
    let mut clouds = PortraitClouds::default();
    for &fwd in directions(job.direction) {
        let rows: Vec<PortraitRow> = seeds
            .par_iter()
            .flat_map_iter(|&s| seed_rows(&job.spec, s, job.iters_per_seed, job.escape_radius, fwd))
            .collect();
        if fwd {
            clouds.forward = rows;
        } else {
            clouds.backward = rows;
        }
    }
    Ok(clouds)
}

/// Renders one direction straight to `out` in seed order, in bounded
/// memory, and returns the occupancy raster of the cloud.
pub fn stream_portrait<W: Write>(job: &PortraitJob, forward: bool, mut out: W) -> Result<Raster> {
    job.validate()?;
    let (nx, ny) = job.grid;
    let mut raster = Raster::new(job.region, nx, ny);
    let io = |e: std::io::Error| Error::Invalid(format!("write: {e}"));
    write_csv::<PortraitRow, _>(&mut out, &[])?;
    let seeds = job.seeds();
    let chunk = (1 << 22) / job.iters_per_seed.max(1);
    for block in seeds.chunks(chunk.max(1)) {
        let rows: Vec<Vec<PortraitRow>> = block
            .par_iter()
            .map(|&s| seed_rows(&job.spec, s, job.iters_per_seed, job.escape_radius, forward))
            .collect();
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
        for r in rows.iter().flatten() {
            if !r.escaped {
                raster.mark(Point::new(r.x, r.y));
            }
            w.serialize(r).map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        }
        w.flush().map_err(io)?;
    }
    Ok(raster)
}
