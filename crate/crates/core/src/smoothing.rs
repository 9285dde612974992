//! Smooth convex caps replacing cone apexes, and the Gaussian curvature of
//! induced metrics computed with the Brioschi formula.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyp2::H2Point;
use crate::surface::{mesh_tolerance, CConvexFunction, ChartCone, ChartProfile, GeodesicMesh, InducedDistanceField};

/// The cone over the boundary circle with apex at chart height
/// `apex_height < 0` over the disc center: `ubar = apex_height (1 - |xbar|)`.
pub fn build_cone(apex_height: f64) -> Result<CConvexFunction> {
    let cone = ChartCone::new(apex_height, [0.0, 0.0])?;
    CConvexFunction::from_profile(Arc::new(cone), (-apex_height).atan(), &format!("cone:{apex_height}"))
}

/// Exponent `k` of the cap's second derivative `c (rho^2 - s^2)^k`.
pub const CAP_ORDER: i32 = 8;

// Gauss-Legendre nodes and weights on [-1, 1], exact to degree 19.
const GL_NODES: [f64; 5] =
    [0.1488743389816312, 0.4333953941292472, 0.6794095682990244, 0.8650633666889845, 0.9739065285171717];
const GL_WEIGHTS: [f64; 5] =
    [0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806, 0.0666713443086881];

/// `int_0^b g(t) dt` for polynomial `g` of degree at most 19.
fn gauss_legendre(b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let half = b / 2.0;
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * (g(half * (1.0 - x)) + g(half * (1.0 + x)));
    }
    acc * half
}

/// A cone with its apex replaced by a convex cap.
///
/// Writing the cone as `ubar = h0 + m s` with `m = -h0` and `s` the gauge of
/// the disc seen from the apex, the capped function is `f(s)` with `f = h0 + m s`
/// for `s >= rho` and, below `rho`, `f'' = c (rho^2 - s^2)^CAP_ORDER`, `f'(0) = 0`.
/// The cap matches the cone to order `CAP_ORDER + 1` at `s = rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedCone {
    cone: ChartCone,
    rho: f64,
    slope: f64,
    c: f64,
    base: f64,
}

impl SmoothedCone {
    pub fn new(cone: ChartCone, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::RhoTooLarge { rho, limit: 1.0 });
        }
        let m = -cone.apex_height;
        let kernel = |t: f64| (rho * rho - t * t).powi(CAP_ORDER);
        let c = m / gauss_legendre(rho, kernel);
        let lift = c * gauss_legendre(rho, |t| (rho - t) * kernel(t));
        let base = cone.apex_height + m * rho - lift;
        Ok(Self { cone, rho, slope: m, c, base })
    }

    pub fn cone(&self) -> &ChartCone {
        &self.cone
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `(f, f', f'')` at gauge value `s`.
    pub fn radial(&self, s: f64) -> (f64, f64, f64) {
        if s >= self.rho {
            return (self.cone.apex_height + self.slope * s, self.slope, 0.0);
        }
        let kernel = |t: f64| (self.rho * self.rho - t * t).powi(CAP_ORDER);
        let f = self.base + self.c * gauss_legendre(s, |t| (s - t) * kernel(t));
        let df = self.c * gauss_legendre(s, kernel);
        (f, df, self.c * kernel(s))
    }
}

impl ChartProfile for SmoothedCone {
    fn value(&self, xbar: [f64; 2]) -> f64 {
        let s = self.cone.gauge(xbar);
        if s >= self.rho {
            self.cone.value(xbar)
        } else {
            self.radial(s).0
        }
    }
    fn gradient(&self, xbar: [f64; 2]) -> [f64; 2] {
        let s = self.cone.gauge(xbar);
        if s >= self.rho {
            return self.cone.gradient(xbar);
        }
        if s == 0.0 {
            return [0.0, 0.0];
        }
        // the cone gradient is m grad(s)
        let g = self.cone.gradient(xbar);
        let k = self.radial(s).1 / self.slope;
        [k * g[0], k * g[1]]
    }
}

/// Caps the apex of `cone` at gauge radius `rho`.
pub fn smooth_cone(cone: &ChartCone, rho: f64) -> Result<CConvexFunction> {
    let capped = SmoothedCone::new(*cone, rho)?;
    CConvexFunction::from_profile(
        Arc::new(capped),
        (-cone.apex_height).atan(),
        &format!("smoothed-cone:{},{rho}", cone.apex_height),
    )
}

/// Square grid in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Patch {
    pub center: [f64; 2],
    pub half_width: f64,
    pub step: f64,
}

impl Patch {
    pub fn new(center: [f64; 2], half_width: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && half_width >= 4.0 * step) {
            return Err(Error::OutOfRange { name: "patch step", value: step });
        }
        let far = center[0].abs().hypot(center[1].abs()) + half_width * std::f64::consts::SQRT_2;
        if far >= 1.0 {
            return Err(Error::OutOfRange { name: "patch extent", value: far });
        }
        Ok(Self { center, half_width, step })
    }

    fn size(&self) -> usize {
        (2.0 * self.half_width / self.step).round() as usize + 1
    }

    fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.center[0] - self.half_width + i as f64 * self.step,
            self.center[1] - self.half_width + j as f64 * self.step,
        ]
    }
}

/// Gaussian curvature of an induced metric on a chart grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    patch: Patch,
    n: usize,
    coefficients: Vec<[f64; 3]>,
    curvature: Vec<f64>,
}

/// Metric coefficients `E, F, G` of `cos^2(u) g_H2 - du^2` in chart
/// coordinates at `xbar`.
pub fn metric_coefficients(u: &CConvexFunction, xbar: [f64; 2]) -> Result<[f64; 3]> {
    let x = H2Point::from_klein(xbar)?;
    let s = x.x0();
    let s3 = s * s * s;
    // partial derivatives of (1, xbar) / sqrt(1 - |xbar|^2)
    let d = |i: usize| {
        let mut v = [xbar[i] * s3, xbar[i] * s3 * xbar[0], xbar[i] * s3 * xbar[1]];
        v[i + 1] += s;
        v
    };
    let (d1, d2) = (d(0), d(1));
    let g11 = s * s + xbar[0] * xbar[0] * s * s * s * s;
    let g12 = xbar[0] * xbar[1] * s * s * s * s;
    let g22 = s * s + xbar[1] * xbar[1] * s * s * s * s;
    let c2 = u.height(&x).cos().powi(2);
    let (u1, u2) = (u.differential(&x, &d1), u.differential(&x, &d2));
    Ok([c2 * g11 - u1 * u1, c2 * g12 - u1 * u2, c2 * g22 - u2 * u2])
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Width of the border without curvature values.
const BORDER: usize = 3;

// sixth-order central weights of f(x + o h), o = -3..=3
const D1: [f64; 7] = [-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0];
const D2: [f64; 7] =
    [2.0 / 180.0, -27.0 / 180.0, 270.0 / 180.0, -490.0 / 180.0, 270.0 / 180.0, -27.0 / 180.0, 2.0 / 180.0];

/// Brioschi curvature on an `n x n` grid of coefficients, from sixth-order
/// central differences; nodes within `BORDER` of the edge are NaN.
fn brioschi(coef: &[[f64; 3]], n: usize, h: f64) -> Vec<f64> {
    let at = |i: usize, j: usize, k: usize| coef[j * n + i][k];
    let w = 2 * BORDER + 1;
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            if i < BORDER || j < BORDER || i + BORDER >= n || j + BORDER >= n {
                return f64::NAN;
            }
            let (i0, j0) = (i - BORDER, j - BORDER);
            let line = |wt: &[f64; 7], k: usize, along_u: bool| {
                (0..w)
                    .map(|o| wt[o] * if along_u { at(i0 + o, j, k) } else { at(i, j0 + o, k) })
                    .sum::<f64>()
            };
            let du = |k| line(&D1, k, true) / h;
            let dv = |k| line(&D1, k, false) / h;
            let duu = |k| line(&D2, k, true) / (h * h);
            let dvv = |k| line(&D2, k, false) / (h * h);
            let duv = |k| {
                let mut acc = 0.0;
                for a in 0..w {
                    for b in 0..w {
                        acc += D1[a] * D1[b] * at(i0 + a, j0 + b, k);
                    }
                }
                acc / (h * h)
            };
            let (e, f, g) = (at(i, j, 0), at(i, j, 1), at(i, j, 2));
            let (eu, ev, fu, fv, gu, gv) = (du(0), dv(0), du(1), dv(1), du(2), dv(2));
            let top = -dvv(0) / 2.0 + duv(1) - duu(2) / 2.0;
            let a = det3([[top, eu / 2.0, fu - ev / 2.0], [fv - gu / 2.0, e, f], [gv / 2.0, f, g]]);
            let b = det3([[0.0, ev / 2.0, gu / 2.0], [ev / 2.0, e, f], [gu / 2.0, f, g]]);
            let w2 = e * g - f * f;
            (a - b) / (w2 * w2)
        })
        .collect()
}

/// Induced metric coefficients and Brioschi curvature of `u` over `patch`.
pub fn induced_curvature(u: &CConvexFunction, patch: &Patch) -> Result<CurvatureField> {
    let n = patch.size();
    let coefficients = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let xbar = patch.node(idx % n, idx / n);
            let c = metric_coefficients(u, xbar)?;
            if !(c[0] > 0.0 && c[0] * c[2] - c[1] * c[1] > 0.0) {
                return Err(Error::DegenerateMetric(xbar[0], xbar[1]));
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let curvature = brioschi(&coefficients, n, patch.step);
    Ok(CurvatureField { patch: *patch, n, coefficients, curvature })
}

impl CurvatureField {
    pub fn patch(&self) -> &Patch {
        &self.patch
    }

    /// `10 step^2`.
    pub fn tolerance(&self) -> f64 {
        10.0 * self.patch.step * self.patch.step
    }

    /// Curvature at node `(i, j)`; NaN within `BORDER` nodes of the edge.
    pub fn curvature(&self, i: usize, j: usize) -> f64 {
        self.curvature[j * self.n + i]
    }

    pub fn coefficients(&self, i: usize, j: usize) -> [f64; 3] {
        self.coefficients[j * self.n + i]
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Node with the largest curvature and its chart position.
    pub fn argmax(&self) -> ([f64; 2], f64) {
        let (idx, k) = self
            .curvature
            .iter()
            .enumerate()
            .filter(|(_, k)| !k.is_nan())
            .fold((0, f64::NEG_INFINITY), |acc, (i, &k)| if k > acc.1 { (i, k) } else { acc });
        (self.patch.node(idx % self.n, idx / self.n), k)
    }

    pub fn max_curvature(&self) -> f64 {
        self.curvature.iter().filter(|k| !k.is_nan()).cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_curvature(&self) -> f64 {
        self.curvature.iter().filter(|k| !k.is_nan()).cloned().fold(f64::INFINITY, f64::min)
    }

    /// PASS iff the maximal curvature is at most `bound + 10 step^2`.
    pub fn bounded_by(&self, bound: f64) -> bool {
        self.max_curvature() <= bound + self.tolerance()
    }

    /// Brioschi recomputed on the coefficients scaled by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> CurvatureField {
        let coefficients: Vec<[f64; 3]> = self.coefficients.iter().map(|c| c.map(|v| lambda * v)).collect();
        let curvature = brioschi(&coefficients, self.n, self.patch.step);
        CurvatureField { patch: self.patch, n: self.n, coefficients, curvature }
    }

    /// Rows `x,y,K` over the nodes carrying a curvature value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,K\n");
        for j in BORDER..self.n - BORDER {
            for i in BORDER..self.n - BORDER {
                let p = self.patch.node(i, j);
                let _ = writeln!(out, "{:.9},{:.9},{:.12e}", p[0], p[1], self.curvature(i, j));
            }
        }
        out
    }
}

/// An induced metric multiplied by `lambda in (0, 1)`: curvatures are divided
/// by `lambda` and distances multiplied by `sqrt(lambda)`.
#[derive(Debug, Clone)]
pub struct ScaledMetric {
    function: CConvexFunction,
    lambda: f64,
}

pub fn strictify(u: &CConvexFunction, lambda: f64) -> Result<ScaledMetric> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::BadLambda(lambda));
    }
    Ok(ScaledMetric { function: u.clone(), lambda })
}

impl ScaledMetric {
    pub fn function(&self) -> &CConvexFunction {
        &self.function
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn distance_factor(&self) -> f64 {
        self.lambda.sqrt()
    }

    pub fn scale_distance(&self, d: f64) -> f64 {
        self.distance_factor() * d
    }

    /// Brioschi curvature of the scaled coefficients.
    pub fn curvature(&self, patch: &Patch) -> Result<CurvatureField> {
        Ok(induced_curvature(&self.function, patch)?.rescaled(self.lambda))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingDistanceReport {
    pub rhos: Vec<f64>,
    /// `max |d_smoothed - d_cone|` over the pairs, per cap radius.
    pub gaps: Vec<f64>,
    pub tolerance: f64,
    /// Gaps are non-increasing as `rho` decreases, up to the tolerance.
    pub monotone: bool,
}

/// Mesh distances of capped cones against the cone, for decreasing `rhos`.
pub fn smoothing_distance_study(
    apex_height: f64,
    rhos: &[f64],
    mesh: Arc<GeodesicMesh>,
    pairs: &[(usize, usize)],
) -> Result<SmoothingDistanceReport> {
    let cone = ChartCone::new(apex_height, [0.0, 0.0])?;
    let sources: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let distances = |u: &CConvexFunction| -> Result<Vec<f64>> {
        let mut field = InducedDistanceField::new(u, mesh.clone())?;
        field.compute_sources(&sources);
        Ok(pairs.iter().map(|&(a, b)| field.distance(a, b).expect("row computed")).collect())
    };
    let base = distances(&build_cone(apex_height)?)?;
    let mut gaps = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let d = distances(&smooth_cone(&cone, rho)?)?;
        gaps.push(d.iter().zip(&base).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let tolerance = mesh_tolerance(&mesh);
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + tolerance);
    Ok(SmoothingDistanceReport { rhos: rhos.to_vec(), gaps, tolerance, monotone })
}
