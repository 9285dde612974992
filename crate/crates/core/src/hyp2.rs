//! Hyperbolic plane primitives in the hyperboloid model.
//!
//! Points live on the upper sheet `-x0^2 + x1^2 + x2^2 = -1` of Minkowski
//! 3-space. The Klein view `(x1/x0, x2/x0)` coincides with the unit disc of
//! the affine anti-de Sitter chart; the Poincaré view is only used for
//! cross-checks and mesh layout.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the hyperboloid constraint after renormalization.
pub const HYPERBOLOID_TOL: f64 = 1e-12;
/// Relative slack below which a triangle counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Minkowski pairing `-a0 b0 + a1 b1 + a2 b2`.
#[inline]
pub fn minkowski(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct H2Point {
    x: [f64; 3],
}

impl TryFrom<[f64; 3]> for H2Point {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        H2Point::new(v[0], v[1], v[2])
    }
}

impl From<H2Point> for [f64; 3] {
    fn from(p: H2Point) -> Self {
        p.x
    }
}

impl H2Point {
    /// Projects a future time-like vector onto the hyperboloid.
    pub fn new(x0: f64, x1: f64, x2: f64) -> Result<Self> {
        let v = [x0, x1, x2];
        let q = minkowski(&v, &v);
        if !(q < 0.0) || x0 <= 0.0 || !q.is_finite() {
            return Err(Error::NotOnHyperboloid(q));
        }
        Ok(Self::normalized(v))
    }

    pub(crate) fn normalized(v: [f64; 3]) -> Self {
        let q = -minkowski(&v, &v);
        // Far from the origin q carries cancellation error of order
        // eps * x0^2; rescaling would then only inject that error.
        let s = if (q - 1.0).abs() <= 1e-8 * v[0] * v[0] { 1.0 } else { q.sqrt() };
        let mut x = [v[0] / s, v[1] / s, v[2] / s];
        // x0 is recomputed from the spatial part so that the constraint holds
        // to rounding even far from the origin.
        x[0] = (1.0 + x[1] * x[1] + x[2] * x[2]).sqrt();
        Self { x }
    }

    pub fn origin() -> Self {
        Self { x: [1.0, 0.0, 0.0] }
    }

    /// Point at hyperbolic distance `r` from the origin in direction `angle`.
    pub fn from_polar(r: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::normalized([r.cosh(), r.sinh() * c, r.sinh() * s])
    }

    /// Point with Klein (projective) disc coordinates `k`, `|k| < 1`.
    pub fn from_klein(k: [f64; 2]) -> Result<Self> {
        let r2 = k[0] * k[0] + k[1] * k[1];
        if !(r2 < 1.0) {
            return Err(Error::OutOfRange { name: "klein radius", value: r2.sqrt() });
        }
        let x0 = 1.0 / (1.0 - r2).sqrt();
        Ok(Self::normalized([x0, k[0] * x0, k[1] * x0]))
    }

    pub fn from_poincare(z: [f64; 2]) -> Result<Self> {
        let r2 = z[0] * z[0] + z[1] * z[1];
        if !(r2 < 1.0) {
            return Err(Error::OutOfRange { name: "poincare radius", value: r2.sqrt() });
        }
        let d = 1.0 - r2;
        Ok(Self::normalized([(1.0 + r2) / d, 2.0 * z[0] / d, 2.0 * z[1] / d]))
    }

    #[inline]
    pub fn coords(&self) -> [f64; 3] {
        self.x
    }

    #[inline]
    pub fn x0(&self) -> f64 {
        self.x[0]
    }

    /// Klein coordinates, i.e. the disc of the affine chart.
    pub fn klein(&self) -> [f64; 2] {
        [self.x[1] / self.x[0], self.x[2] / self.x[0]]
    }

    pub fn poincare(&self) -> [f64; 2] {
        let d = 1.0 + self.x[0];
        [self.x[1] / d, self.x[2] / d]
    }

    /// Hyperbolic distance from the origin.
    pub fn radius(&self) -> f64 {
        self.x[0].max(1.0).acosh()
    }

    pub fn distance(&self, other: &H2Point) -> f64 {
        h2_distance(self, other)
    }

    /// Orthonormal tangent frame `(e1, e2)` at this point, positively oriented.
    pub fn tangent_frame(&self) -> ([f64; 3], [f64; 3]) {
        let x = self.x;
        // e1: boost of (0,1,0); e2 completes the frame.
        let e1 = {
            let v = [0.0, 1.0, 0.0];
            let p = minkowski(&v, &x);
            let w = [v[0] + p * x[0], v[1] + p * x[1], v[2] + p * x[2]];
            let n = minkowski(&w, &w).sqrt();
            [w[0] / n, w[1] / n, w[2] / n]
        };
        let e2 = {
            let v = [0.0, 0.0, 1.0];
            let p = minkowski(&v, &x);
            let q = minkowski(&v, &e1);
            let w = [
                v[0] + p * x[0] - q * e1[0],
                v[1] + p * x[1] - q * e1[1],
                v[2] + p * x[2] - q * e1[2],
            ];
            let n = minkowski(&w, &w).sqrt();
            [w[0] / n, w[1] / n, w[2] / n]
        };
        (e1, e2)
    }

    /// Exponential map of a tangent vector `v` (Minkowski-orthogonal to self).
    pub fn exp(&self, v: &[f64; 3]) -> H2Point {
        let n2 = minkowski(v, v).max(0.0);
        let n = n2.sqrt();
        if n < 1e-300 {
            return *self;
        }
        let (c, s) = (n.cosh(), n.sinh() / n);
        Self::normalized([
            c * self.x[0] + s * v[0],
            c * self.x[1] + s * v[1],
            c * self.x[2] + s * v[2],
        ])
    }

    /// Unit tangent at self pointing toward `q`, with the distance.
    pub fn direction_to(&self, q: &H2Point) -> ([f64; 3], f64) {
        let d = h2_distance(self, q);
        let p = minkowski(&self.x, &q.x);
        let w = [q.x[0] + p * self.x[0], q.x[1] + p * self.x[1], q.x[2] + p * self.x[2]];
        let n = minkowski(&w, &w).max(0.0).sqrt();
        if n < 1e-300 {
            return ([0.0; 3], 0.0);
        }
        ([w[0] / n, w[1] / n, w[2] / n], d)
    }

    /// Point at fraction `t` along the geodesic segment from self to `q`.
    pub fn lerp(&self, q: &H2Point, t: f64) -> H2Point {
        let (dir, d) = self.direction_to(q);
        let s = t * d;
        self.exp(&[dir[0] * s, dir[1] * s, dir[2] * s])
    }
}

/// Hyperbolic distance, with the pairing clamped to `<= -1` before `acosh`.
pub fn h2_distance(p: &H2Point, q: &H2Point) -> f64 {
    let a = p.x;
    let b = q.x;
    // Spatial form avoids cancellation for close points.
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    let chord2 = -d0 * d0 + d1 * d1 + d2 * d2;
    if chord2 <= 0.0 {
        return 0.0;
    }
    // -<a,b> = 1 + chord2/2 ; d = 2 asinh(sqrt(chord2)/2)
    2.0 * (chord2.sqrt() / 2.0).asinh()
}

/// Constant-speed parameterization of a geodesic segment on `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicSegment {
    pub start: H2Point,
    pub end: H2Point,
    dir: [f64; 3],
    length: f64,
}

impl GeodesicSegment {
    pub fn new(start: H2Point, end: H2Point) -> Self {
        let (dir, length) = start.direction_to(&end);
        Self { start, end, dir, length }
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Position and velocity (d/dt, speed equal to the length) at `t`.
    pub fn eval(&self, t: f64) -> (H2Point, [f64; 3]) {
        let s = t * self.length;
        let (ch, sh) = (s.cosh(), s.sinh());
        let p = self.start.x;
        let v = self.dir;
        let pos = [ch * p[0] + sh * v[0], ch * p[1] + sh * v[1], ch * p[2] + sh * v[2]];
        let l = self.length;
        let vel = [
            l * (sh * p[0] + ch * v[0]),
            l * (sh * p[1] + ch * v[1]),
            l * (sh * p[2] + ch * v[2]),
        ];
        (H2Point::normalized(pos), vel)
    }
}

/// Piecewise-geodesic curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Polyline {
    points: Vec<H2Point>,
}

impl H2Polyline {
    /// Consecutive points must be distinct.
    pub fn new(points: Vec<H2Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::OutOfRange { name: "polyline points", value: points.len() as f64 });
        }
        for w in points.windows(2) {
            if h2_distance(&w[0], &w[1]) <= 0.0 {
                return Err(Error::CoincidentPoints);
            }
        }
        Ok(Self { points })
    }

    /// The geodesic segment from `a` to `b` subdivided into `pieces` parts.
    pub fn geodesic(a: H2Point, b: H2Point, pieces: usize) -> Result<Self> {
        let n = pieces.max(1);
        Self::new((0..=n).map(|k| a.lerp(&b, k as f64 / n as f64)).collect())
    }

    pub fn points(&self) -> &[H2Point] {
        &self.points
    }

    pub fn segments(&self) -> impl Iterator<Item = GeodesicSegment> + '_ {
        self.points.windows(2).map(|w| GeodesicSegment::new(w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| h2_distance(&w[0], &w[1])).sum()
    }
}

/// A hyperbolic triangle given by side lengths and opposite angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleShape {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl TriangleShape {
    pub fn sides(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// `alpha + beta + gamma - pi`, negative for hyperbolic triangles.
    pub fn excess(&self) -> f64 {
        self.alpha + self.beta + self.gamma - PI
    }

    /// Cosine-law residuals `cos(A) sinh(b) sinh(c) - (cosh b cosh c - cosh a)`, cyclically.
    pub fn cosine_residuals(&self) -> [f64; 3] {
        let r = |a: f64, b: f64, c: f64, al: f64| {
            al.cos() * b.sinh() * c.sinh() - (b.cosh() * c.cosh() - a.cosh())
        };
        [
            r(self.a, self.b, self.c, self.alpha),
            r(self.b, self.c, self.a, self.beta),
            r(self.c, self.a, self.b, self.gamma),
        ]
    }
}

fn check_sides(d: [f64; 3]) -> Result<()> {
    let per = d[0] + d[1] + d[2];
    let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let degenerate = !per.is_finite()
        || min < DEGENERACY_TOL
        || (0..3).any(|i| d[(i + 1) % 3] + d[(i + 2) % 3] - d[i] < DEGENERACY_TOL * per);
    if degenerate {
        Err(Error::DegenerateTriangle(d[0], d[1], d[2]))
    } else {
        Ok(())
    }
}

/// Angle opposite `a` in the hyperbolic triangle with sides `a, b, c`.
///
/// Half-angle form `tan(A/2) = sqrt(sinh(s-b) sinh(s-c) / (sinh s sinh(s-a)))`,
/// accurate for thin and for nearly flat triangles.
fn opposite_angle(a: f64, b: f64, c: f64) -> f64 {
    let s = 0.5 * (a + b + c);
    let num = ((s - b).max(0.0).sinh() * (s - c).max(0.0).sinh()).sqrt();
    let den = (s.sinh() * (s - a).max(0.0).sinh()).sqrt();
    2.0 * num.atan2(den)
}

/// The hyperbolic triangle with the given side lengths: `d01` joins vertices
/// 0 and 1, and so on. Angle `alpha` sits at vertex 0 (opposite `d12`).
pub fn comparison_triangle(d01: f64, d02: f64, d12: f64) -> Result<TriangleShape> {
    check_sides([d12, d02, d01])?;
    let (a, b, c) = (d12, d02, d01);
    Ok(TriangleShape {
        a,
        b,
        c,
        alpha: opposite_angle(a, b, c),
        beta: opposite_angle(b, c, a),
        gamma: opposite_angle(c, a, b),
    })
}

/// `pi - (alpha + beta + gamma)`.
pub fn triangle_area(t: &TriangleShape) -> f64 {
    PI - (t.alpha + t.beta + t.gamma)
}

/// Base of the isosceles triangle with legs `x` and apex angle `theta`:
/// `sinh(l/2) = sinh(x) sin(theta/2)`.
pub fn isosceles_chord(x: f64, theta: f64) -> f64 {
    2.0 * (x.sinh() * (0.5 * theta).sin()).asinh()
}

/// Comparison angle at `x` for the configuration with pairwise distances
/// `d_xy`, `d_xz`, `d_yz`. Collinear configurations give `pi`.
pub fn comparison_angle(d_xy: f64, d_xz: f64, d_yz: f64) -> Result<f64> {
    let per = d_xy + d_xz + d_yz;
    let slack = DEGENERACY_TOL * per;
    if !(d_xy > 0.0 && d_xz > 0.0 && d_yz >= 0.0)
        || d_yz > d_xy + d_xz + slack
        || d_xy > d_xz + d_yz + slack
        || d_xz > d_xy + d_yz + slack
    {
        return Err(Error::DegenerateTriangle(d_xy, d_xz, d_yz));
    }
    Ok(opposite_angle(d_yz, d_xy, d_xz))
}

/// Sides from angles via the dual cosine law
/// `cosh a = (cos B cos C + cos A) / (sin B sin C)`.
pub fn sides_from_angles(alpha: f64, beta: f64, gamma: f64) -> Result<[f64; 3]> {
    if !(alpha > 0.0 && beta > 0.0 && gamma > 0.0 && alpha + beta + gamma < PI) {
        return Err(Error::OutOfRange { name: "angle sum", value: alpha + beta + gamma });
    }
    let side = |a: f64, b: f64, c: f64| ((b.cos() * c.cos() + a.cos()) / (b.sin() * c.sin())).max(1.0).acosh();
    Ok([side(alpha, beta, gamma), side(beta, gamma, alpha), side(gamma, alpha, beta)])
}

/// Places a triangle with the given side lengths: vertex 0 at the origin,
/// vertex 1 on the positive x1-axis, vertex 2 in the upper half.
pub fn place_triangle(d01: f64, d02: f64, d12: f64) -> Result<[H2Point; 3]> {
    let t = comparison_triangle(d01, d02, d12)?;
    Ok([
        H2Point::origin(),
        H2Point::from_polar(d01, 0.0),
        H2Point::from_polar(d02, t.alpha),
    ])
}

/// The point at distance `dp` from `p` and `dq` from `q`, on the side of the
/// oriented geodesic `p -> q` selected by `left`.
pub fn third_point(p: &H2Point, q: &H2Point, dp: f64, dq: f64, left: bool) -> Result<H2Point> {
    let (t, d) = p.direction_to(q);
    let angle = comparison_angle(d, dp, dq)?;
    let x = p.coords();
    // normal in the tangent plane at p: n = x ^ t (Minkowski cross product)
    let n = lorentz_cross(&x, &t);
    let sign = if left { 1.0 } else { -1.0 };
    let (s, c) = angle.sin_cos();
    let dir = [
        c * t[0] + sign * s * n[0],
        c * t[1] + sign * s * n[1],
        c * t[2] + sign * s * n[2],
    ];
    Ok(p.exp(&[dir[0] * dp, dir[1] * dp, dir[2] * dp]))
}

/// Minkowski cross product `J (a x b)` with `J = diag(-1, 1, 1)`; for a point
/// `a` and unit tangent `b` it returns the unit tangent turning left of `b`.
pub fn lorentz_cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    let c = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    [-c[0], c[1], c[2]]
}

/// Signed side of `r` relative to the oriented geodesic `p -> q`
/// (positive on the left).
pub fn side_of(p: &H2Point, q: &H2Point, r: &H2Point) -> f64 {
    let (a, b, c) = (p.coords(), q.coords(), r.coords());
    let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]);
    det
}
