//! Map families: the conservative cubic Hénon maps, their inverses, and
//! the two reversible non-conservative perturbations (cross-form second
//! iterate and Quispel–Roberts form).
//!
//! All families are reversible with respect to the coordinate swap
//! [`involution`]. The perturbed inverses are evaluated as `h ∘ f ∘ h`.

mod verify;

pub use verify::{
    verify_central_symmetry, verify_conservativity, verify_reversibility,
    verify_second_iterate_identity, PropertyKind, PropertyReport, Sampler,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Point};

/// Denominators smaller than this in magnitude are treated as singular.
pub const SINGULAR_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `x̄ = y, ȳ = -x + M1 + M2 y + d y³`
    H3,
    /// `x̄ = -y + M1 + M2 x + d x³, ȳ = x`
    H3Inverse,
    /// Perturbed second iterate of the inverse map, written in cross form.
    CrossformSq,
    /// Quispel–Roberts perturbation of the map itself.
    Qr,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::H3 => "h3",
            Family::H3Inverse => "h3-inverse",
            Family::CrossformSq => "crossform",
            Family::Qr => "qr",
        }
    }

    pub fn is_perturbed(self) -> bool {
        matches!(self, Family::CrossformSq | Family::Qr)
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h3" => Ok(Family::H3),
            "h3-inverse" | "h3_inverse" | "h3inv" => Ok(Family::H3Inverse),
            "crossform" | "crossform-sq" | "crossform_sq" | "cf" => Ok(Family::CrossformSq),
            "qr" => Ok(Family::Qr),
            other => Err(Error::Invalid(format!("unknown map family `{other}`"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sign `d` of the cubic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum CubicSign {
    Plus,
    Minus,
}

impl CubicSign {
    pub fn value(self) -> f64 {
        match self {
            CubicSign::Plus => 1.0,
            CubicSign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> CubicSign {
        match self {
            CubicSign::Plus => CubicSign::Minus,
            CubicSign::Minus => CubicSign::Plus,
        }
    }
}

impl TryFrom<i8> for CubicSign {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(CubicSign::Plus),
            -1 => Ok(CubicSign::Minus),
            other => Err(Error::Invalid(format!("cubic sign must be +1 or -1, got {other}"))),
        }
    }
}

impl From<CubicSign> for i8 {
    fn from(s: CubicSign) -> i8 {
        match s {
            CubicSign::Plus => 1,
            CubicSign::Minus => -1,
        }
    }
}

impl FromStr for CubicSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" | "+" | "plus" => Ok(CubicSign::Plus),
            "-1" | "-" | "minus" => Ok(CubicSign::Minus),
            other => Err(Error::Invalid(format!("cubic sign must be +1 or -1, got `{other}`"))),
        }
    }
}

impl fmt::Display for CubicSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CubicSign::Plus => "+1",
            CubicSign::Minus => "-1",
        })
    }
}

/// The perturbation function `φ(x, y) = x·g(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    #[default]
    Xy,
    XArctanY,
}

impl Perturbation {
    /// `g(y)` in `φ(x, y) = x·g(y)`.
    fn g(self, y: f64) -> f64 {
        match self {
            Perturbation::Xy => y,
            Perturbation::XArctanY => y.atan(),
        }
    }

    fn dg(self, y: f64) -> f64 {
        match self {
            Perturbation::Xy => 1.0,
            Perturbation::XArctanY => 1.0 / (1.0 + y * y),
        }
    }
}

impl FromStr for Perturbation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xy" => Ok(Perturbation::Xy),
            "x-arctan-y" | "x_arctan_y" | "xarctany" | "arctan" => Ok(Perturbation::XArctanY),
            other => Err(Error::Invalid(format!("unknown perturbation `{other}`"))),
        }
    }
}

/// Anything that can be iterated forwards and backwards in the plane.
///
/// [`MapSpec`] is the production implementation; tests plug in doubles
/// such as linear saddles or deliberately non-reversible variants.
pub trait PlanarMap: Sync {
    fn forward(&self, p: Point) -> Result<Point>;
    fn backward(&self, p: Point) -> Result<Point>;
    fn jacobian(&self, p: Point) -> Result<Mat2>;
}

/// A fully parameterised member of one of the map families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub family: Family,
    pub d: CubicSign,
    pub m1: f64,
    pub m2: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub perturbation: Perturbation,
}

fn guard(den: f64) -> Result<f64> {
    if den.abs() < SINGULAR_GUARD {
        Err(Error::SingularDenominator { value: den })
    } else {
        Ok(den)
    }
}

fn finite(p: Point) -> Result<Point> {
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Error::NonFinite)
    }
}

impl MapSpec {
    pub fn new(family: Family, d: CubicSign, m1: f64, m2: f64, eps: f64) -> Self {
        Self { family, d, m1, m2, eps, perturbation: Perturbation::Xy }
    }

    pub fn h3(d: CubicSign, m1: f64, m2: f64) -> Self {
        Self::new(Family::H3, d, m1, m2, 0.0)
    }

    pub fn h3_inverse(d: CubicSign, m1: f64, m2: f64) -> Self {
        Self::new(Family::H3Inverse, d, m1, m2, 0.0)
    }

    pub fn qr(d: CubicSign, m1: f64, m2: f64, eps: f64) -> Self {
        Self::new(Family::Qr, d, m1, m2, eps)
    }

    pub fn crossform(d: CubicSign, m1: f64, m2: f64, eps: f64) -> Self {
        Self::new(Family::CrossformSq, d, m1, m2, eps)
    }

    pub fn with_perturbation(mut self, perturbation: Perturbation) -> Self {
        self.perturbation = perturbation;
        self
    }

    pub fn with_m1(mut self, m1: f64) -> Self {
        self.m1 = m1;
        self
    }

    pub fn with_params(mut self, m1: f64, m2: f64) -> Self {
        self.m1 = m1;
        self.m2 = m2;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// Effective perturbation strength (zero for the unperturbed families).
    pub fn strength(&self) -> f64 {
        if self.family.is_perturbed() {
            self.eps
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m1.is_finite() && self.m2.is_finite() && self.eps.is_finite()) {
            return Err(Error::Invalid("map parameters must be finite".into()));
        }
        if self.family == Family::Qr && self.perturbation == Perturbation::XArctanY {
            return Err(Error::Invalid(
                "the arctan perturbation is only available for the cross-form family".into(),
            ));
        }
        Ok(())
    }

    /// `P(t) = M1 + M2 t + d t³`
    pub fn cubic(&self, t: f64) -> f64 {
        self.m1 + self.m2 * t + self.d.value() * t * t * t
    }

    pub fn cubic_prime(&self, t: f64) -> f64 {
        self.m2 + 3.0 * self.d.value() * t * t
    }

    fn crossform_yb(&self, p: Point) -> Result<f64> {
        let den = guard(1.0 - self.eps * self.perturbation.g(p.x))?;
        Ok((self.cubic(p.x) - p.y) / den)
    }

    fn forward_raw(&self, p: Point) -> Result<Point> {
        let Point { x, y } = p;
        match self.family {
            Family::H3 => Ok(Point::new(y, -x + self.cubic(y))),
            Family::H3Inverse => Ok(Point::new(-y + self.cubic(x), x)),
            Family::CrossformSq => {
                let yb = self.crossform_yb(p)?;
                let xb = -x + self.cubic(yb) + self.eps * x * self.perturbation.g(yb);
                Ok(Point::new(xb, yb))
            }
            Family::Qr => {
                let u = y + self.eps * x * y;
                let yb = -x + self.cubic(u);
                let den = guard(1.0 + self.eps * yb)?;
                Ok(Point::new(u / den, yb))
            }
        }
    }

    pub fn forward(&self, p: Point) -> Result<Point> {
        finite(self.forward_raw(p)?)
    }

    pub fn backward(&self, p: Point) -> Result<Point> {
        match self.family {
            Family::H3 => finite(Point::new(-p.y + self.cubic(p.x), p.x)),
            Family::H3Inverse => finite(Point::new(p.y, -p.x + self.cubic(p.y))),
            Family::CrossformSq | Family::Qr => Ok(involution(self.forward(involution(p))?)),
        }
    }

    /// Analytic Jacobian of [`MapSpec::forward`].
    pub fn jacobian(&self, p: Point) -> Result<Mat2> {
        let Point { x, y } = p;
        let m = match self.family {
            Family::H3 => Mat2::new(0.0, 1.0, -1.0, self.cubic_prime(y)),
            Family::H3Inverse => Mat2::new(self.cubic_prime(x), -1.0, 1.0, 0.0),
            Family::CrossformSq => {
                let phi = self.perturbation;
                let den = guard(1.0 - self.eps * phi.g(x))?;
                let yb = (self.cubic(x) - y) / den;
                let dyb_dx = (self.cubic_prime(x) + self.eps * yb * phi.dg(x)) / den;
                let dyb_dy = -1.0 / den;
                let k = self.cubic_prime(yb) + self.eps * x * phi.dg(yb);
                Mat2::new(
                    -1.0 + self.eps * phi.g(yb) + k * dyb_dx,
                    k * dyb_dy,
                    dyb_dx,
                    dyb_dy,
                )
            }
            Family::Qr => {
                let e = self.eps;
                let u = y + e * x * y;
                let slope = self.cubic_prime(u);
                let yb = -x + self.cubic(u);
                let den = guard(1.0 + e * yb)?;
                let dyb_dx = -1.0 + slope * e * y;
                let dyb_dy = slope * (1.0 + e * x);
                let den2 = den * den;
                Mat2::new(
                    (e * y * den - u * e * dyb_dx) / den2,
                    ((1.0 + e * x) * den - u * e * dyb_dy) / den2,
                    dyb_dx,
                    dyb_dy,
                )
            }
        };
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Closed-form Jacobian determinant of the family.
    pub fn jacobian_det_closed_form(&self, p: Point) -> Result<f64> {
        match self.family {
            Family::H3 | Family::H3Inverse => Ok(1.0),
            Family::CrossformSq => {
                let yb = self.crossform_yb(p)?;
                let g = |t| self.perturbation.g(t);
                Ok((1.0 - self.eps * g(yb)) / (1.0 - self.eps * g(p.x)))
            }
            Family::Qr => {
                let yb = self.forward(p)?.y;
                Ok((1.0 + self.eps * p.x) / (1.0 + self.eps * yb))
            }
        }
    }

    /// Signed scalar that vanishes exactly on `Fix(h ∘ f)`.
    ///
    /// For every family one component of `f(a) - h(a)` vanishes identically
    /// once the other does, so the remaining component is used.
    pub fn fix_hf_residual(&self, a: Point) -> Result<f64> {
        let fa = self.forward(a)?;
        Ok(match self.family {
            Family::H3Inverse => fa.x - a.y,
            _ => fa.y - a.x,
        })
    }

    /// The same map with the central symmetry applied: `M1 → -M1`.
    pub fn centrally_reflected(&self) -> MapSpec {
        self.with_m1(-self.m1)
    }
}

impl PlanarMap for MapSpec {
    fn forward(&self, p: Point) -> Result<Point> {
        MapSpec::forward(self, p)
    }
    fn backward(&self, p: Point) -> Result<Point> {
        MapSpec::backward(self, p)
    }
    fn jacobian(&self, p: Point) -> Result<Mat2> {
        MapSpec::jacobian(self, p)
    }
}

/// The reversing involution `h(x, y) = (y, x)`.
pub fn involution(p: Point) -> Point {
    Point::new(p.y, p.x)
}

/// `f^n(p)`; negative `n` iterates the inverse.
pub fn iterate<M: PlanarMap + ?Sized>(map: &M, mut p: Point, n: i64) -> Result<Point> {
    if n >= 0 {
        for _ in 0..n {
            p = map.forward(p)?;
        }
    } else {
        for _ in 0..(-n) {
            p = map.backward(p)?;
        }
    }
    Ok(p)
}

/// Central finite-difference Jacobian, used as an independent oracle.
pub fn finite_difference_jacobian<M: PlanarMap + ?Sized>(map: &M, p: Point, h: f64) -> Result<Mat2> {
    let fxp = map.forward(Point::new(p.x + h, p.y))?;
    let fxm = map.forward(Point::new(p.x - h, p.y))?;
    let fyp = map.forward(Point::new(p.x, p.y + h))?;
    let fym = map.forward(Point::new(p.x, p.y - h))?;
    let s = 0.5 / h;
    Ok(Mat2::new(
        (fxp.x - fxm.x) * s,
        (fyp.x - fym.x) * s,
        (fxp.y - fxm.y) * s,
        (fyp.y - fym.y) * s,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PLUS: CubicSign = CubicSign::Plus;
    const MINUS: CubicSign = CubicSign::Minus;

    fn all_specs() -> Vec<MapSpec> {
        let mut v = Vec::new();
        for d in [PLUS, MINUS] {
            v.push(MapSpec::h3(d, 0.3, -1.1));
            v.push(MapSpec::h3_inverse(d, -0.2, 0.7));
            for eps in [0.05, 0.3] {
                v.push(MapSpec::qr(d, -0.364, -0.5, eps));
                v.push(MapSpec::crossform(d, 0.1, -1.25, eps));
                v.push(MapSpec::crossform(d, 0.1, -1.25, eps).with_perturbation(Perturbation::XArctanY));
            }
        }
        v
    }

    #[test]
    fn origin_is_fixed_at_zero_m1() {
        let spec = MapSpec::qr(PLUS, 0.0, -1.0, 0.0);
        assert_eq!(spec.forward(Point::ORIGIN).unwrap(), Point::ORIGIN);
    }

    #[test]
    fn resonant_point_of_h3_minus_is_fixed() {
        let s = 1.5f64.sqrt();
        let spec = MapSpec::h3(MINUS, 0.0, 3.5);
        let q = spec.forward(Point::new(s, s)).unwrap();
        assert!((q.x - s).abs() < 1e-15 && (q.y - s).abs() < 1e-14);
    }

    #[test]
    fn qr_evaluation_order() {
        let spec = MapSpec::qr(PLUS, 0.0, -1.0, 0.1);
        let yb: f64 = -1.0 - 1.1 + 1.1f64.powi(3);
        let xb = 1.1 / (1.0 + 0.1 * yb);
        let q = spec.forward(Point::new(1.0, 1.0)).unwrap();
        assert!((q.x - xb).abs() < 1e-15 && (q.y - yb).abs() < 1e-15);
        let back = spec.backward(q).unwrap();
        assert!(back.dist(Point::new(1.0, 1.0)) < 1e-14);
    }

    #[test]
    fn qr_at_zero_eps_is_h3_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [PLUS, MINUS] {
            let qr = MapSpec::qr(d, 0.4, -0.9, 0.0);
            let h3 = MapSpec::h3(d, 0.4, -0.9);
            for _ in 0..100 {
                let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                assert_eq!(qr.forward(p).unwrap(), h3.forward(p).unwrap());
            }
        }
    }

    #[test]
    fn backward_inverts_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in all_specs() {
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let Ok(q) = spec.forward(p) else { continue };
                let Ok(back) = spec.backward(q) else { continue };
                let scale = 1.0 + q.norm();
                worst = worst.max(back.dist(p) / scale);
            }
            assert!(worst < 1e-10, "{spec:?}: {worst:e}");
        }
    }

    #[test]
    fn inverse_family_is_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [PLUS, MINUS] {
            let h = MapSpec::h3(d, 0.2, 1.3);
            let hi = MapSpec::h3_inverse(d, 0.2, 1.3);
            for _ in 0..200 {
                let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                assert_eq!(hi.forward(p).unwrap(), h.backward(p).unwrap());
                assert_eq!(hi.backward(p).unwrap(), h.forward(p).unwrap());
            }
        }
    }

    #[test]
    fn involution_conjugates_forward_to_backward() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(involution(Point::new(1.0, 2.0)), Point::new(2.0, 1.0));
        for spec in all_specs() {
            for _ in 0..200 {
                let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                assert_eq!(involution(involution(p)), p);
                let (Ok(a), Ok(b)) = (spec.forward(involution(p)), spec.backward(p)) else {
                    continue;
                };
                assert!(involution(a).dist(b) < 1e-12 * (1.0 + b.norm()));
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for spec in all_specs() {
            for _ in 0..100 {
                let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let (Ok(j), Ok(fd)) = (spec.jacobian(p), finite_difference_jacobian(&spec, p, 1e-6)) else {
                    continue;
                };
                let scale = 1.0 + j.max_abs();
                for (a, b) in [(j.a, fd.a), (j.b, fd.b), (j.c, fd.c), (j.d, fd.d)] {
                    assert!((a - b).abs() < 1e-5 * scale, "{spec:?} at {p}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn determinant_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for spec in all_specs() {
            for _ in 0..500 {
                let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let (Ok(j), Ok(det)) = (spec.jacobian(p), spec.jacobian_det_closed_form(p)) else {
                    continue;
                };
                assert!((j.det() - det).abs() < 1e-12 * (1.0 + j.max_abs().powi(2)), "{spec:?} at {p}");
            }
        }
    }

    #[test]
    fn crossform_determinant_example() {
        let spec = MapSpec::crossform(PLUS, 0.1, -1.25, 0.05);
        let p = Point::new(0.3, 0.1);
        let yb = spec.forward(p).unwrap().y;
        let expected = (1.0 - 0.05 * yb) / (1.0 - 0.05 * 0.3);
        assert!((spec.jacobian(p).unwrap().det() - expected).abs() < 1e-12);
    }

    #[test]
    fn singular_line_is_reported() {
        let spec = MapSpec::crossform(PLUS, 0.0, -1.0, 0.5);
        assert!(matches!(spec.forward(Point::new(2.0, 0.0)), Err(Error::SingularDenominator { .. })));
        assert!(matches!(spec.jacobian(Point::new(2.0, 0.0)), Err(Error::SingularDenominator { .. })));
    }

    #[test]
    fn overflow_is_nonfinite() {
        let spec = MapSpec::h3(PLUS, 0.0, 0.0);
        assert_eq!(spec.forward(Point::new(0.0, 1e200)), Err(Error::NonFinite));
    }

    #[test]
    fn arctan_qr_is_rejected() {
        let spec = MapSpec::qr(PLUS, 0.0, 0.0, 0.1).with_perturbation(Perturbation::XArctanY);
        assert!(spec.validate().is_err());
        assert!(MapSpec::crossform(PLUS, 0.0, 0.0, 0.1)
            .with_perturbation(Perturbation::XArctanY)
            .validate()
            .is_ok());
    }

    #[test]
    fn parses_names() {
        assert_eq!("qr".parse::<Family>().unwrap(), Family::Qr);
        assert_eq!("-1".parse::<CubicSign>().unwrap(), MINUS);
        assert_eq!("+1".parse::<CubicSign>().unwrap(), PLUS);
        assert!("2".parse::<CubicSign>().is_err());
    }

    #[test]
    fn fix_hf_residual_vanishes_on_symmetric_points() {
        // On Fix(h∘f) the image equals the swapped point.
        for spec in all_specs() {
            // find a root of the residual along the line x = t, y = 0.2 by bisection
            let r = |t: f64| spec.fix_hf_residual(Point::new(t, 0.2)).unwrap_or(f64::NAN);
            let (mut lo, mut hi) = (-1.0, 1.0);
            if !(r(lo) * r(hi) < 0.0) {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if r(lo) * r(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let a = Point::new(lo, 0.2);
            let fa = spec.forward(a).unwrap();
            assert!(fa.dist(involution(a)) < 1e-10, "{spec:?}");
        }
    }
}
