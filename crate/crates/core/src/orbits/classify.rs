use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::Mat2;

/// Default tolerance on multiplier moduli and determinants.
pub const TOL_UNIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClass {
    Elliptic,
    Sink,
    Source,
    /// Saddle with Jacobian below one.
    SaddleContracting,
    /// Saddle with Jacobian above one.
    SaddleExpanding,
    SaddleConservative,
    Parabolic,
    Unresolved,
}

impl OrbitClass {
    pub fn is_saddle(self) -> bool {
        matches!(
            self,
            OrbitClass::SaddleContracting | OrbitClass::SaddleExpanding | OrbitClass::SaddleConservative
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            OrbitClass::Elliptic => "elliptic",
            OrbitClass::Sink => "sink",
            OrbitClass::Source => "source",
            OrbitClass::SaddleContracting => "saddle_contracting",
            OrbitClass::SaddleExpanding => "saddle_expanding",
            OrbitClass::SaddleConservative => "saddle_conservative",
            OrbitClass::Parabolic => "parabolic",
            OrbitClass::Unresolved => "unresolved",
        }
    }
}

/// Classifies a monodromy matrix by its multipliers.
///
/// Multipliers within `tol_unit` of `±1` are never guessed at: they yield
/// [`OrbitClass::Parabolic`] for a Jordan block and
/// [`OrbitClass::Unresolved`] otherwise.
pub fn classify(m: &Mat2, tol_unit: f64) -> OrbitClass {
    if !m.is_finite() {
        return OrbitClass::Unresolved;
    }
    let ev = m.eigenvalues();
    let det = m.det();
    let near_unit_root = |l: Complex64| (l - 1.0).norm() < tol_unit || (l + 1.0).norm() < tol_unit;
    if let Some(&l) = ev.iter().find(|&&l| near_unit_root(l)) {
        let target = if l.re > 0.0 { 1.0 } else { -1.0 };
        let a = Mat2::new(m.a - target, m.b, m.c, m.d - target);
        let scale = 1.0 + m.max_abs();
        let other = if near_unit_root(ev[0]) { ev[1] } else { ev[0] };
        // a non-semisimple multiplier needs both multipliers at the same root
        let double = (other - target).norm() < tol_unit;
        return if double && a.max_abs() > tol_unit * scale {
            OrbitClass::Parabolic
        } else {
            OrbitClass::Unresolved
        };
    }
    let moduli = [ev[0].norm(), ev[1].norm()];
    if ev[0].im != 0.0 {
        let r = det.max(0.0).sqrt();
        return if (r - 1.0).abs() < tol_unit {
            OrbitClass::Elliptic
        } else if r < 1.0 {
            OrbitClass::Sink
        } else {
            OrbitClass::Source
        };
    }
    let (small, large) = (moduli[0].min(moduli[1]), moduli[0].max(moduli[1]));
    if large < 1.0 - tol_unit {
        OrbitClass::Sink
    } else if small > 1.0 + tol_unit {
        OrbitClass::Source
    } else if small < 1.0 - tol_unit && large > 1.0 + tol_unit {
        let jac = det.abs();
        if (jac - 1.0).abs() < tol_unit {
            OrbitClass::SaddleConservative
        } else if jac < 1.0 {
            OrbitClass::SaddleContracting
        } else {
            OrbitClass::SaddleExpanding
        }
    } else {
        OrbitClass::Unresolved
    }
}
