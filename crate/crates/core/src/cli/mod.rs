//! Command-line front end: experiment configuration, portraits, diagrams
//! and the file formats of every output.
//!
//! Exit codes: 0 success, 1 validation error (bad flags, config or
//! parameters), 2 numerical failure.

mod config;
mod diagram;
mod output;
mod portrait;

pub use config::{ConfigFile, Section};
pub use diagram::{assemble_diagram, continue_both_ways, default_jobs, discover_seeds, DiagramJob};
pub use output::{read_csv, sig17, to_json, write_csv, CurveRow, ManifoldRow, OrbitRecord, PortraitRow, Schema};
pub use portrait::{render_portrait, stream_portrait, Direction, PortraitClouds, PortraitJob, Raster, GRID_CAP};

use std::ffi::OsString;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use crate::bifurcation::{
    analytic_curve, island_scan, solve_at_m2, Condition, ContinuationSettings, CurveId, IslandSettings,
};
use crate::error::{Error, Result};
use crate::linalg::{Point, Region};
use crate::manifolds::{certify_lamb_stenkin, component_image, grow_manifold, CycleThresholds, GrowthSettings, Side};
use crate::maps::{
    involution, verify_central_symmetry, verify_conservativity, verify_reversibility, verify_second_iterate_identity,
    CubicSign, Family, MapSpec, Perturbation, PropertyReport, Sampler,
};
use crate::orbits::{find_periodic, grid_seed, symmetric_search, GridOptions, NewtonSettings};

/// Worker count for the parallel parts.
pub const THREADS_ENV: &str = "HENLAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "henlab", version, about = "Numerical laboratory for cubic Henon maps and their reversible perturbations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat key-value config file; keys are these long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed of the random sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct MapArgs {
    /// h3, h3-inverse, qr or crossform
    #[arg(long, default_value = "h3")]
    map: Family,
    /// Sign of the cubic term, +1 or -1.
    #[arg(long, default_value = "+1")]
    d: CubicSign,
    #[arg(long, default_value_t = 0.0)]
    m1: f64,
    #[arg(long, default_value_t = 0.0)]
    m2: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// xy or x-arctan-y
    #[arg(long, default_value = "xy")]
    perturbation: Perturbation,
}

impl MapArgs {
    fn spec(&self) -> Result<MapSpec> {
        let s = MapSpec::new(self.map, self.d, self.m1, self.m2, self.eps).with_perturbation(self.perturbation);
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args, Debug, Clone)]
struct RegionArgs {
    #[arg(long, default_value_t = -2.0)]
    x_min: f64,
    #[arg(long, default_value_t = 2.0)]
    x_max: f64,
    #[arg(long, default_value_t = -2.0)]
    y_min: f64,
    #[arg(long, default_value_t = 2.0)]
    y_max: f64,
}

impl RegionArgs {
    fn region(&self) -> Result<Region> {
        let r = Region::new(self.x_min, self.x_max, self.y_min, self.y_max);
        if r.is_valid() {
            Ok(r)
        } else {
            Err(Error::Invalid("region bounds must be finite and increasing".into()))
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ParamBox {
    #[arg(long, default_value_t = -3.0)]
    m1_min: f64,
    #[arg(long, default_value_t = 3.0)]
    m1_max: f64,
    #[arg(long, default_value_t = -3.0)]
    m2_min: f64,
    #[arg(long, default_value_t = 4.0)]
    m2_max: f64,
}

impl ParamBox {
    fn region(&self) -> Result<Region> {
        let r = Region::new(self.m1_min, self.m1_max, self.m2_min, self.m2_max);
        if r.is_valid() {
            Ok(r)
        } else {
            Err(Error::Invalid("parameter bounds must be finite and increasing".into()))
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Point clouds of orbits seeded on a grid.
    Portrait {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 200)]
        nx: usize,
        #[arg(long, default_value_t = 200)]
        ny: usize,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
        #[arg(long, default_value_t = 1e3)]
        escape: f64,
        /// forward, backward or both
        #[arg(long, default_value = "forward")]
        direction: Direction,
        #[arg(long, default_value = "portrait.csv")]
        output: String,
    },
    /// Periodic orbit inventory as JSON.
    Orbits {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 81)]
        nx: usize,
        #[arg(long, default_value_t = 81)]
        ny: usize,
        /// Search the diagonal between x-min and x-max instead of the grid.
        #[arg(long)]
        symmetric: bool,
        /// Keep orbits whose minimal period divides q.
        #[arg(long)]
        keep_lower: bool,
        #[arg(long, default_value = "orbits.json")]
        output: String,
    },
    /// Closed-form P1, PD1 and L13 curves of the conservative map.
    Curve {
        #[command(flatten)]
        common: Common,
        /// p1, pd1 or l13
        #[arg(long, value_parser = parse_curve)]
        kind: CurveId,
        #[arg(long, default_value = "+1")]
        d: CubicSign,
        /// Single value; prints the M1 values.
        #[arg(long)]
        m2: Option<f64>,
        #[arg(long, default_value_t = -2.0)]
        m2_min: f64,
        #[arg(long, default_value_t = 3.5)]
        m2_max: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value = "curve.csv")]
        output: String,
    },
    /// Pseudo-arclength continuation of a codimension-one curve.
    Continue {
        #[command(flatten)]
        common: Common,
        /// The start is sought at this map's M2, from M1 = m1.
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        bounds: ParamBox,
        #[arg(long, default_value_t = 3)]
        q: usize,
        /// parabolic, period-doubling, l13 or pitchfork
        #[arg(long, default_value = "pitchfork", value_parser = parse_condition)]
        condition: Condition,
        #[arg(long)]
        px: f64,
        #[arg(long)]
        py: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, default_value_t = 10.0)]
        arclength: f64,
        /// up, down (in M2) or both
        #[arg(long, default_value = "both")]
        direction: String,
        /// Report where the curve crosses this M2.
        #[arg(long)]
        cross_m2: Option<f64>,
        #[arg(long, default_value = "continue.csv")]
        output: String,
    },
    /// Stable and unstable manifolds of a saddle orbit.
    Manifold {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        px: f64,
        #[arg(long)]
        py: f64,
        /// stable, unstable or both
        #[arg(long, default_value = "both")]
        side: String,
        /// +1, -1 or both
        #[arg(long, default_value = "both")]
        sign: String,
        #[arg(long, default_value_t = 20.0)]
        budget: f64,
        #[arg(long, default_value_t = 1e-3)]
        max_gap: f64,
        #[arg(long, default_value_t = 0.2)]
        max_angle: f64,
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        /// Certify a Lamb-Stenkin cycle with the mirror-image saddle.
        #[arg(long)]
        cycle: bool,
        #[arg(long, default_value = "manifold.csv")]
        output: String,
        #[arg(long, default_value = "cycle.json")]
        report: String,
    },
    /// Period-q garland around an elliptic fixed point.
    ResonanceScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 0.0)]
        cx: f64,
        #[arg(long, default_value_t = 0.0)]
        cy: f64,
        #[arg(long, default_value_t = 0.05)]
        r_min: f64,
        #[arg(long, default_value_t = 1.5)]
        r_max: f64,
        #[arg(long, default_value_t = 24)]
        rays: usize,
        #[arg(long, default_value_t = 40)]
        radii: usize,
        #[arg(long, default_value = "resonance.json")]
        output: String,
    },
    /// Structural identities of the map on random samples.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol_rev: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol_cons: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol_identity: f64,
        /// Also write the reports as JSON.
        #[arg(long)]
        output: Option<String>,
    },
    /// Bifurcation diagram bundle of a family.
    Diagram {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        bounds: ParamBox,
        /// M2 range of the closed-form sweeps.
        #[arg(long, default_value_t = -2.0)]
        sweep_min: f64,
        #[arg(long, default_value_t = 3.5)]
        sweep_max: f64,
        /// Line on which period-3 curves are sought; defaults to -1.25 for
        /// d = +1 and -0.8 for d = -1.
        #[arg(long)]
        m2_seed: Option<f64>,
        /// Only run the curve.* and continue.* jobs of the config file.
        #[arg(long)]
        no_defaults: bool,
        #[arg(long, default_value = "diagram.csv")]
        output: String,
    },
}

fn parse_curve(s: &str) -> std::result::Result<CurveId, String> {
    CurveId::parse(s).ok_or_else(|| format!("unknown curve `{s}`"))
}

fn parse_condition(s: &str) -> std::result::Result<Condition, String> {
    Condition::parse(&s.replace('-', "_")).ok_or_else(|| format!("unknown condition `{s}`"))
}

fn command() -> clap::Command {
    Cli::command().mut_subcommands(|s| s.allow_negative_numbers(true).args_override_self(true))
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invalid(_) | Error::Domain(_) => 1,
        _ => 2,
    }
}

/// Inserts the config file's `[global]` and `[<subcommand>]` entries right
/// after the subcommand name, so that flags given on the command line,
/// which come later, override them.
fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let Some(sub_at) = strs.iter().skip(1).position(|a| !a.starts_with('-')).map(|i| i + 1) else {
        return Ok(argv);
    };
    let path = strs.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            strs.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    });
    let Some(path) = path else { return Ok(argv) };
    let file = ConfigFile::load(Path::new(&path))?;
    let sub = &strs[sub_at];
    let cmd = command();
    let Some(sc) = cmd.find_subcommand(sub) else { return Ok(argv) };
    let mut extra: Vec<OsString> = Vec::new();
    for (section, strict) in [("global", false), (sub.as_str(), true)] {
        let Some(sec) = file.section(section) else { continue };
        extra.extend(section_args(sc, sec, strict)?);
    }
    let mut out = argv[..=sub_at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub_at + 1..]);
    Ok(out)
}

/// Flags for the entries of a section; unknown keys are an error when
/// `strict`.
fn section_args(sc: &clap::Command, sec: &Section, strict: bool) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (k, v) in &sec.entries {
        if k == "config" {
            continue;
        }
        let Some(arg) = sc.get_arguments().find(|a| a.get_long() == Some(k.as_str())) else {
            if strict {
                return Err(Error::Invalid(format!("config [{}]: unknown key `{k}`", sec.name)));
            }
            continue;
        };
        if arg.get_action().takes_values() {
            out.push(format!("--{k}").into());
            out.push(v.into());
        } else {
            match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => out.push(format!("--{k}").into()),
                "false" | "no" | "0" => {}
                _ => return Err(Error::Invalid(format!("config [{}]: `{k}` expects true or false", sec.name))),
            }
        }
    }
    Ok(out)
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 1;
    }
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let header = format!(
        "# {}",
        argv.iter().skip(1).map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" ")
    );
    let cli = match command().try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli.cmd, &header) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Log lines go to stdout, or stderr when stdout carries data, and are
/// appended to `run.log` in the output directory.
struct Log {
    file: Option<File>,
    to_stderr: bool,
}

impl Log {
    /// Appends to `out/run.log`, starting with `header` in the file only.
    fn open(out: &Path, to_stderr: bool, header: &str) -> Result<Log> {
        let mut file = OpenOptions::new().create(true).append(true).open(out.join("run.log")).map_err(io_err)?;
        writeln!(file, "{header}").map_err(io_err)?;
        Ok(Log { file: Some(file), to_stderr })
    }

    fn line(&mut self, s: &str) {
        if self.to_stderr {
            eprintln!("{s}");
        } else {
            println!("{s}");
        }
        if let Some(f) = self.file.as_mut() {
            let _ = writeln!(f, "{s}");
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Invalid(format!("i/o: {e}"))
}

fn prepare(common: &Common) -> Result<()> {
    std::fs::create_dir_all(&common.out).map_err(io_err)
}

fn is_stdout(name: &str) -> bool {
    name == "-"
}

fn open_output(common: &Common, name: &str) -> Result<Box<dyn Write>> {
    if is_stdout(name) {
        Ok(Box::new(std::io::stdout().lock()))
    } else {
        let f = File::create(common.out.join(name)).map_err(io_err)?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn write_text(common: &Common, name: &str, text: &str) -> Result<()> {
    let mut w = open_output(common, name)?;
    w.write_all(text.as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn write_json<T: Serialize + ?Sized>(common: &Common, name: &str, value: &T) -> Result<()> {
    write_text(common, name, &to_json(value)?)
}

fn write_rows<R: Serialize + Schema>(common: &Common, name: &str, rows: &[R]) -> Result<()> {
    let mut w = open_output(common, name)?;
    write_csv(&mut w, rows)?;
    w.flush().map_err(io_err)
}

/// `file.csv` becomes `file_<tag>.csv`.
fn tagged(name: &str, tag: &str) -> String {
    match name.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_{tag}.{ext}"),
        None => format!("{name}_{tag}"),
    }
}

fn run(cmd: Cmd, header: &str) -> Result<()> {
    match cmd {
        Cmd::Portrait { common, map, region, nx, ny, iters, escape, direction, output } => {
            prepare(&common)?;
            let job = PortraitJob {
                spec: map.spec()?,
                region: region.region()?,
                grid: (nx, ny),
                iters_per_seed: iters,
                escape_radius: escape,
                direction,
            };
            job.validate()?;
            let mut log = Log::open(&common.out, is_stdout(&output), header)?;
            let mut rasters = Vec::new();
            for (fwd, tag) in [(true, "forward"), (false, "backward")] {
                let wanted = match direction {
                    Direction::Forward => fwd,
                    Direction::Backward => !fwd,
                    Direction::Both => true,
                };
                if !wanted {
                    continue;
                }
                let name = if direction == Direction::Both && !is_stdout(&output) { tagged(&output, tag) } else { output.clone() };
                let mut w = open_output(&common, &name)?;
                let raster = stream_portrait(&job, fwd, &mut w)?;
                w.flush().map_err(io_err)?;
                log.line(&format!("portrait {tag}: {} occupied cells -> {name}", raster.occupied()));
                rasters.push((tag, raster));
            }
            let swap = |p: Point| Point::new(p.y, p.x);
            if job.spec.strength() == 0.0 {
                for (tag, r) in &rasters {
                    let defect = r.image_defect(r, swap);
                    log.line(&format!(
                        "h-symmetry check ({tag}): {:.4}% of cells without a mirror within one cell: {}",
                        100.0 * defect,
                        if defect < 0.01 { "pass" } else { "fail" }
                    ));
                }
            }
            if let [(_, f), (_, b)] = rasters.as_slice() {
                let defect = f.image_defect(b, swap).max(b.image_defect(f, swap));
                log.line(&format!(
                    "forward/backward mirror check: {:.4}% of cells unmatched: {}",
                    100.0 * defect,
                    if defect < 0.01 { "pass" } else { "fail" }
                ));
            }
            Ok(())
        }
        Cmd::Orbits { common, map, region, q, nx, ny, symmetric, keep_lower, output } => {
            prepare(&common)?;
            if q == 0 {
                return Err(Error::Invalid("q must be positive".into()));
            }
            let spec = map.spec()?;
            let ns = NewtonSettings::default();
            let orbits = if symmetric {
                symmetric_search(&spec, q, (region.x_min, region.x_max), nx.max(2) * ny.max(1), &ns)?
            } else {
                let opts = GridOptions { newton: ns, keep_lower_periods: keep_lower, restrict_to_region: false };
                grid_seed(&spec, q, &region.region()?, (nx, ny), &opts)
            };
            let records: Vec<OrbitRecord> = orbits.iter().map(OrbitRecord::from).collect();
            write_json(&common, &output, &records)?;
            let mut log = Log::open(&common.out, is_stdout(&output), header)?;
            log.line(&format!("{} orbits of period {q}", records.len()));
            for o in &orbits {
                log.line(&format!(
                    "  {:<20} symmetric={:<5} jacobian={:.9} start=({:.6}, {:.6})",
                    o.class.name(),
                    o.symmetric,
                    o.jacobian_product,
                    o.start().x,
                    o.start().y
                ));
            }
            Ok(())
        }
        Cmd::Curve { common, kind, d, m2, m2_min, m2_max, n, output } => {
            prepare(&common)?;
            if matches!(kind, CurveId::P3 | CurveId::PF3) {
                return Err(Error::Invalid("P3 and PF3 have no closed form; use `continue`".into()));
            }
            if let Some(m2) = m2 {
                let c = analytic_curve(kind, d, m2)?;
                let fmt = |m: Option<f64>| m.map_or("none".to_string(), |v| format!("{v:+.10}"));
                println!("{} d={d} M2={m2}: M1 = {} , {}", kind.name(), fmt(c.m1_plus), fmt(c.m1_minus));
                return Ok(());
            }
            let rows = assemble_diagram(&[DiagramJob::Analytic { curve: kind, d, m2: (m2_min, m2_max), n }])?;
            write_rows(&common, &output, &rows)?;
            let mut log = Log::open(&common.out, is_stdout(&output), header)?;
            log.line(&format!("{} rows of {} -> {output}", rows.len(), kind.name()));
            Ok(())
        }
        Cmd::Continue { common, map, bounds, q, condition, px, py, steps, arclength, direction, cross_m2, output } => {
            prepare(&common)?;
            let spec = map.spec()?;
            let settings = ContinuationSettings {
                steps,
                arclength,
                bounds: Some(bounds.region()?),
                direction: if direction == "down" { (0.0, -1.0) } else { (0.0, 1.0) },
                ..Default::default()
            };
            if !matches!(direction.as_str(), "up" | "down" | "both") {
                return Err(Error::Invalid(format!("direction must be up, down or both, got `{direction}`")));
            }
            let point = Point::new(px, py.unwrap_or(px));
            let start = solve_at_m2(&spec, q, condition, spec.m2, point, spec.m1)?;
            let samples = if direction == "both" {
                continue_both_ways(&spec, q, condition, &start, &settings)?
            } else {
                crate::bifurcation::continue_codim1(&spec, q, condition, &start, &settings)?.samples
            };
            let rows: Vec<CurveRow> = samples
                .iter()
                .map(|s| CurveRow {
                    curve_id: s.curve.name().into(),
                    m1: s.m1,
                    m2: s.m2,
                    px: s.point.x,
                    py: s.point.y,
                    residual: s.condition_residual,
                })
                .collect();
            write_rows(&common, &output, &rows)?;
            let mut log = Log::open(&common.out, is_stdout(&output), header)?;
            log.line(&format!("start M1={} M2={} point=({}, {})", start.m1, start.m2, start.point.x, start.point.y));
            log.line(&format!("{} samples -> {output}", rows.len()));
            for w in samples.windows(3) {
                let a = (w[1].m1 - w[0].m1, w[1].m2 - w[0].m2);
                let b = (w[2].m1 - w[1].m1, w[2].m2 - w[1].m2);
                if a.0 * b.0 + a.1 * b.1 < 0.0 {
                    log.line(&format!("cusp near M1={:.6} M2={:.6}", w[1].m1, w[1].m2));
                }
            }
            if let Some(m2) = cross_m2 {
                for w in samples.windows(2).filter(|w| (w[0].m2 - m2) * (w[1].m2 - m2) <= 0.0 && w[0].m2 != w[1].m2) {
                    let s = (m2 - w[0].m2) / (w[1].m2 - w[0].m2);
                    let m1 = w[0].m1 + s * (w[1].m1 - w[0].m1);
                    let p = Point::new(w[0].point.x + s * (w[1].point.x - w[0].point.x), w[0].point.y + s * (w[1].point.y - w[0].point.y));
                    if let Ok(c) = solve_at_m2(&spec, q, condition, m2, p, m1) {
                        log.line(&format!("crosses M2={m2} at M1={:.10}", c.m1));
                    }
                }
            }
            Ok(())
        }
        Cmd::Manifold { common, map, q, px, py, side, sign, budget, max_gap, max_angle, delta, cycle, output, report } => {
            prepare(&common)?;
            let spec = map.spec()?;
            let settings = GrowthSettings { budget, max_gap, max_angle, delta, ..Default::default() };
            let sides: Vec<Side> = match side.as_str() {
                "stable" => vec![Side::Stable],
                "unstable" => vec![Side::Unstable],
                "both" => vec![Side::Unstable, Side::Stable],
                other => return Err(Error::Invalid(format!("side must be stable, unstable or both, got `{other}`"))),
            };
            let signs: Vec<i8> = match sign.as_str() {
                "+1" | "1" => vec![1],
                "-1" => vec![-1],
                "both" => vec![1, -1],
                other => return Err(Error::Invalid(format!("sign must be +1, -1 or both, got `{other}`"))),
            };
            let ns = NewtonSettings::default();
            let s1 = find_periodic(&spec, q, Point::new(px, py), &ns)?;
            let mut owners = vec![("s1", s1.clone())];
            if cycle {
                let s2 = find_periodic(&spec, q, involution(s1.start()), &ns)?;
                owners.push(("s2", s2));
                owners.sort_by(|a, b| a.1.jacobian_product.total_cmp(&b.1.jacobian_product));
                owners[0].0 = "s1";
                owners[1].0 = "s2";
            }
            let mut rows = Vec::new();
            let mut log = Log::open(&common.out, is_stdout(&output), header)?;
            for (id, o) in &owners {
                log.line(&format!("{id}: {} jacobian={:.9} start=({}, {})", o.class.name(), o.jacobian_product, o.start().x, o.start().y));
                for &sd in &sides {
                    for &sg in &signs {
                        let b = grow_manifold(&spec, o, sd, sg, &settings)?;
                        let mut parts = vec![b.clone()];
                        for j in 1..o.q {
                            parts.push(component_image(&spec, &b, j, &settings)?);
                        }
                        log.line(&format!(
                            "  {} {:+} arclength {:.4} status {:?}",
                            sd.name(),
                            sg,
                            b.arclength,
                            b.status
                        ));
                        for part in parts {
                            rows.extend(part.polyline.iter().map(|p| ManifoldRow {
                                owner_id: id.to_string(),
                                side: sd.name().into(),
                                branch_sign: sg,
                                x: p.x,
                                y: p.y,
                            }));
                        }
                    }
                }
            }
            write_rows(&common, &output, &rows)?;
            if cycle {
                let r = certify_lamb_stenkin(&spec, &owners[0].1, &owners[1].1, &settings, &CycleThresholds::default())?;
                log.line(&format!(
                    "cycle: jacobians {:.6}/{:.6} transversal {} min angle {:.3e} heteroclinic {} candidate {}",
                    r.jacobians[0], r.jacobians[1], r.transversal_crossings, r.min_angle, r.heteroclinic, r.lamb_stenkin_candidate
                ));
                write_json(&common, &report, &r)?;
            }
            Ok(())
        }
        Cmd::ResonanceScan { common, map, q, cx, cy, r_min, r_max, rays, radii, output } => {
            prepare(&common)?;
            let spec = map.spec()?;
            let settings = IslandSettings {
                center: Point::new(cx, cy),
                annulus: (r_min, r_max),
                rays,
                radii,
                newton: NewtonSettings::default(),
            };
            let f = island_scan(&spec, q, &settings)?;
            #[derive(Serialize)]
            struct Findings<'a> {
                p: u32,
                q: usize,
                m2: f64,
                center: [f64; 2],
                symmetric_count: usize,
                pair_count: usize,
                orbits: &'a [OrbitRecord],
            }
            let records: Vec<OrbitRecord> = f.orbits.iter().map(OrbitRecord::from).collect();
            let doc = Findings {
                p: f.p,
                q: f.q,
                m2: f.m2,
                center: [f.center.x, f.center.y],
                symmetric_count: f.symmetric_count,
                pair_count: f.pair_count,
                orbits: &records,
            };
            write_json(&common, &output, &doc)?;
            let mut log = Log::open(&common.out, is_stdout(&output), header)?;
            log.line(&format!(
                "{}:{} garland: {} orbits, {} symmetric, {} symmetric pairs",
                f.p,
                f.q,
                f.orbits.len(),
                f.symmetric_count,
                f.pair_count
            ));
            for o in &f.orbits {
                log.line(&format!("  {:<20} symmetric={}", o.class.name(), o.symmetric));
            }
            Ok(())
        }
        Cmd::Verify { common, map, region, samples, tol_rev, tol_cons, tol_identity, output } => {
            prepare(&common)?;
            let spec = map.spec()?;
            let sampler = Sampler::new(region.region()?, samples).with_seed(common.seed);
            let mut reports: Vec<PropertyReport> =
                vec![verify_reversibility(&spec, &sampler, tol_rev), verify_conservativity(&spec, &sampler, tol_cons)];
            if spec.m1 == 0.0 {
                reports.push(verify_central_symmetry(&spec, &sampler, tol_identity));
            }
            if spec.family == Family::CrossformSq {
                reports.push(verify_second_iterate_identity(spec.d, spec.m1, spec.m2, spec.eps, &sampler, tol_identity));
            }
            let mut log = Log::open(&common.out, false, header)?;
            for r in &reports {
                log.line(&format!(
                    "{:<24} {}  max_residual={:.3e} tolerance={:.1e} samples={} skipped={}",
                    format!("{:?}", r.property).to_lowercase(),
                    if r.pass { "PASS" } else { "FAIL" },
                    r.max_residual,
                    r.tolerance,
                    r.samples,
                    r.skipped
                ));
            }
            if let Some(name) = output {
                write_json(&common, &name, &reports)?;
            }
            Ok(())
        }
        Cmd::Diagram { common, map, bounds, sweep_min, sweep_max, m2_seed, no_defaults, output } => {
            prepare(&common)?;
            let spec = map.spec()?;
            let bounds = bounds.region()?;
            let seed = m2_seed.unwrap_or(if spec.d == CubicSign::Plus { -1.25 } else { -0.8 });
            let mut jobs = if no_defaults { Vec::new() } else { default_jobs(&spec, (sweep_min, sweep_max), seed, bounds) };
            if let Some(path) = &common.config {
                jobs.extend(config_jobs(&ConfigFile::load(path)?)?);
            }
            let rows = assemble_diagram(&jobs)?;
            write_rows(&common, &output, &rows)?;
            let mut log = Log::open(&common.out, is_stdout(&output), header)?;
            let mut ids: Vec<&str> = rows.iter().map(|r| r.curve_id.as_str()).collect();
            ids.dedup();
            let mut labels: Vec<&str> = ids.clone();
            labels.sort_unstable();
            labels.dedup();
            log.line(&format!("{} jobs, {} rows, curves {:?} -> {output}", jobs.len(), rows.len(), labels));
            Ok(())
        }
    }
}

/// Diagram jobs from `curve.*` and `continue.*` sections, read with the
/// flags of the matching subcommand.
fn config_jobs(file: &ConfigFile) -> Result<Vec<DiagramJob>> {
    let cmd = command();
    let mut jobs = Vec::new();
    for prefix in ["curve", "continue"] {
        for sec in file.jobs(prefix) {
            if sec.name == prefix {
                continue;
            }
            let sc = cmd.find_subcommand(prefix).ok_or_else(|| Error::Invalid(prefix.into()))?;
            let mut argv: Vec<OsString> = vec!["henlab".into(), prefix.into()];
            argv.extend(section_args(sc, sec, true)?);
            let m = command()
                .try_get_matches_from(argv)
                .and_then(|m| Cli::from_arg_matches(&m))
                .map_err(|e| Error::Invalid(format!("config [{}]: {e}", sec.name)))?;
            match m.cmd {
                Cmd::Curve { kind, d, m2_min, m2_max, n, .. } => {
                    jobs.push(DiagramJob::Analytic { curve: kind, d, m2: (m2_min, m2_max), n })
                }
                Cmd::Continue { map, bounds, q, condition, px, py, steps, arclength, .. } => {
                    let spec = map.spec()?;
                    jobs.push(DiagramJob::Continued {
                        base: spec,
                        q,
                        condition,
                        m2: spec.m2,
                        m1: spec.m1,
                        point: Point::new(px, py.unwrap_or(px)),
                        settings: ContinuationSettings {
                            steps,
                            arclength,
                            bounds: Some(bounds.region()?),
                            ..Default::default()
                        },
                    })
                }
                _ => unreachable!("only curve and continue sections are read"),
            }
        }
    }
    Ok(jobs)
}
