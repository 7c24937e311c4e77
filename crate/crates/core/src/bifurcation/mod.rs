//! Bifurcation curves of the 1:3 resonance: closed forms, normal-form
//! coefficients, numerical continuation of 3-periodic degeneracies,
//! resonance garlands and pitchfork classification.

mod continuation;
mod island;
mod pitchfork;

pub use continuation::{
    continue_codim1, solve_at_m2, Condition, Continuation, ContinuationSettings, Cusp, CurveSample, EndReason,
};
pub use island::{island_scan, rotation_number, IslandSettings, ResonanceFindings};
pub use pitchfork::{pitchfork_local_analysis, PitchforkKind, PitchforkReport, PitchforkSettings};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::maps::CubicSign;

/// `|a02|` below this marks the degenerate resonance.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CurveId {
    /// Fixed point with multiplier `+1`.
    P1,
    /// Fixed point with multiplier `-1`.
    PD1,
    /// Fixed point with multipliers `e^{±2πi/3}`.
    L13,
    /// Fold of 3-periodic orbits.
    P3,
    /// Pitchfork of a symmetric 3-periodic orbit.
    PF3,
}

impl CurveId {
    pub fn name(self) -> &'static str {
        match self {
            CurveId::P1 => "P1",
            CurveId::PD1 => "PD1",
            CurveId::L13 => "L13",
            CurveId::P3 => "P3",
            CurveId::PF3 => "PF3",
        }
    }

    pub fn parse(s: &str) -> Option<CurveId> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Some(CurveId::P1),
            "PD1" => Some(CurveId::PD1),
            "L13" => Some(CurveId::L13),
            "P3" => Some(CurveId::P3),
            "PF3" => Some(CurveId::PF3),
            _ => None,
        }
    }
}

/// Both roots `±√(M1²)` of a closed-form curve at fixed `M2`, with the
/// degenerate fixed point belonging to each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCurve {
    pub m1_plus: Option<f64>,
    pub m1_minus: Option<f64>,
    /// `[at m1_plus, at m1_minus]`; the points lie on the diagonal.
    pub resonant_points: Option<[Point; 2]>,
}

/// Closed-form curves of fixed-point degeneracies. A fixed point `(y, y)`
/// has trace `M2 + 3d·y²` and satisfies `M1 = (2 - M2)·y - d·y³`.
pub fn analytic_curve(kind: CurveId, d: CubicSign, m2: f64) -> Result<AnalyticCurve> {
    let dv = d.value();
    let trace = match kind {
        CurveId::P1 => 2.0,
        CurveId::PD1 => -2.0,
        CurveId::L13 => -1.0,
        CurveId::P3 | CurveId::PF3 => {
            return Err(Error::Invalid(format!("{} has no closed form", kind.name())));
        }
    };
    let m1_sq = match kind {
        CurveId::P1 => 4.0 * dv / 27.0 * (2.0 - m2).powi(3),
        CurveId::PD1 => -4.0 * dv / 27.0 * (2.0 + m2) * (4.0 - m2).powi(2),
        _ => -dv / 27.0 * (1.0 + m2) * (2.0 * m2 - 7.0).powi(2),
    };
    let y_sq = (trace - m2) / (3.0 * dv);
    // a double root of m1_sq with complex resonant points is not on the curve
    if !(m1_sq >= 0.0) || y_sq < 0.0 {
        return Ok(AnalyticCurve { m1_plus: None, m1_minus: None, resonant_points: None });
    }
    let y = y_sq.sqrt();
    let m1_of = |y: f64| (2.0 - m2) * y - dv * y * y * y;
    let (a, b) = if m1_of(y) >= 0.0 { (y, -y) } else { (-y, y) };
    let m1 = m1_sq.sqrt();
    Ok(AnalyticCurve {
        m1_plus: Some(m1),
        m1_minus: Some(-m1),
        resonant_points: Some([Point::new(a, a), Point::new(b, b)]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    M1Pos,
    M1Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceCoefficients {
    pub a02: Complex64,
    pub a21: Complex64,
    pub degenerate: bool,
}

/// Coefficients of the 1:3 normal form `a02·(z*)² + a21·z²·z*` at the
/// resonant fixed point on the branch `branch` of the 1:3 curve.
pub fn nf13_coefficients(d: CubicSign, m2: f64, branch: Branch) -> Result<ResonanceCoefficients> {
    let dv = d.value();
    let r = -dv * (1.0 + m2);
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("-d(1+M2) = {r} is negative: no resonant fixed point")));
    }
    let sign = match branch {
        Branch::M1Pos => -1.0,
        Branch::M1Neg => 1.0,
    };
    let a02 = Complex64::new(0.0, sign * 2.0 * r.sqrt());
    let a21 = Complex64::new(-4.0 * dv * (1.0 + m2), 4.0 * 3f64.sqrt() * dv * m2);
    Ok(ResonanceCoefficients { a02, a21, degenerate: a02.norm() < DEGENERACY_TOL })
}

/// `M2 = 2cos(2πp/q)`: the origin of the map at `M1 = 0` has multipliers
/// `e^{±2πip/q}` there.
pub fn fixed_point_resonance(p: u32, q: u32) -> Result<f64> {
    if !(0 < p && p < q) || gcd(p, q) != 1 {
        return Err(Error::Invalid(format!("need coprime 0 < p < q, got {p}:{q}")));
    }
    Ok(2.0 * (2.0 * std::f64::consts::PI * f64::from(p) / f64::from(q)).cos())
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
