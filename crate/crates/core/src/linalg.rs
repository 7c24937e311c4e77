//! Planar points and 2x2 matrices.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    /// Lexicographic comparison on (x, y).
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        Point::new(self * p.x, self * p.y)
    }
}

/// Row-major 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn diag(p: f64, q: f64) -> Self {
        Self::new(p, 0.0, 0.0, q)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(self.a * p.x + self.b * p.y, self.c * p.x + self.d * p.y)
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    /// Solves `self * v = rhs`.
    pub fn solve(&self, rhs: Point) -> Option<Point> {
        self.inverse().map(|inv| inv.apply(rhs))
    }

    pub fn sub_identity(&self) -> Mat2 {
        Mat2::new(self.a - 1.0, self.b, self.c, self.d - 1.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Eigenvalues ordered by increasing modulus (real part breaks ties).
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let tr = self.trace();
        let det = self.det();
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            let s = disc.sqrt();
            // avoid cancellation in the smaller root
            let big = if tr >= 0.0 { 0.5 * (tr + s) } else { 0.5 * (tr - s) };
            let small = if big != 0.0 { det / big } else { 0.0 };
            let (l1, l2) = if small.abs() <= big.abs() { (small, big) } else { (big, small) };
            [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
        } else {
            let im = 0.5 * (-disc).sqrt();
            [Complex64::new(0.5 * tr, -im), Complex64::new(0.5 * tr, im)]
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Axis-aligned box in the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    /// `[-r, r]²`
    pub const fn square(r: f64) -> Self {
        Self::new(-r, r, -r, r)
    }

    pub fn centered(c: Point, r: f64) -> Self {
        Self::new(c.x - r, c.x + r, c.y - r, c.y + r)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn diameter(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }

    pub fn is_valid(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    /// Node `(i, j)` of an `nx` by `ny` lattice spanning the box.
    pub fn lattice_point(&self, i: usize, j: usize, nx: usize, ny: usize) -> Point {
        let fx = if nx > 1 { i as f64 / (nx - 1) as f64 } else { 0.5 };
        let fy = if ny > 1 { j as f64 / (ny - 1) as f64 } else { 0.5 };
        Point::new(
            self.x_min + fx * (self.x_max - self.x_min),
            self.y_min + fy * (self.y_max - self.y_min),
        )
    }
}

impl Default for Region {
    fn default() -> Self {
        Region::square(2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_rotation_by_third_turn() {
        let m = Mat2::new(0.0, 1.0, -1.0, -1.0);
        let [l1, l2] = m.eigenvalues();
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((l2 - w).norm() < 1e-14);
        assert!((l1 - w.conj()).norm() < 1e-14);
    }

    #[test]
    fn real_eigenvalues_sorted_by_modulus() {
        let [l1, l2] = Mat2::new(0.0, 1.0, -1.0, 2.5).eigenvalues();
        assert!((l1.re - 0.5).abs() < 1e-15 && (l2.re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn solve_inverts() {
        let m = Mat2::new(2.0, 1.0, -1.0, 3.0);
        let v = m.solve(Point::new(1.0, 2.0)).unwrap();
        let back = m.apply(v);
        assert!((back.x - 1.0).abs() < 1e-15 && (back.y - 2.0).abs() < 1e-15);
        assert!(Mat2::new(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }
}
