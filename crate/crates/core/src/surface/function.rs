use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ads3::height_to_chart;
use crate::error::{Error, Result};
use crate::hyp2::H2Point;

const FD_STEP: f64 = 1e-5;

/// A convex chart function `ubar` on the open unit disc, `ubar <= 0`.
///
/// Implementors only need [`value`](ChartProfile::value); the remaining
/// methods have finite-difference defaults that closed forms may override.
pub trait ChartProfile: Send + Sync + fmt::Debug {
    fn value(&self, xbar: [f64; 2]) -> f64;

    /// Euclidean gradient of `ubar`; non-finite where `ubar` has a corner.
    fn gradient(&self, xbar: [f64; 2]) -> [f64; 2] {
        let h = FD_STEP;
        let gx = (self.value([xbar[0] + h, xbar[1]]) - self.value([xbar[0] - h, xbar[1]])) / (2.0 * h);
        let gy = (self.value([xbar[0], xbar[1] + h]) - self.value([xbar[0], xbar[1] - h])) / (2.0 * h);
        [gx, gy]
    }

    /// Height `u(x) = arctan(-ubar(xbar) x0)`.
    fn height(&self, x: &H2Point) -> f64 {
        (-self.value(x.klein()) * x.x0()).atan()
    }

    /// `du_x(v)` for a tangent vector `v` at `x`.
    fn differential(&self, x: &H2Point, v: &[f64; 3]) -> f64 {
        chain_differential(self.value(x.klein()), self.gradient(x.klein()), x, v)
    }
}

/// Pushes a chart gradient through `u = arctan(-ubar x0)`.
pub fn chain_differential(ubar: f64, grad: [f64; 2], x: &H2Point, v: &[f64; 3]) -> f64 {
    let p = x.coords();
    let x0 = p[0];
    let w = -ubar * x0;
    let dk1 = (v[1] * x0 - p[1] * v[0]) / (x0 * x0);
    let dk2 = (v[2] * x0 - p[2] * v[0]) / (x0 * x0);
    let dw = -(grad[0] * dk1 + grad[1] * dk2) * x0 - ubar * v[0];
    dw / (1.0 + w * w)
}

#[derive(Debug, Clone, Copy)]
struct ZeroProfile;

impl ChartProfile for ZeroProfile {
    fn value(&self, _: [f64; 2]) -> f64 {
        0.0
    }
    fn gradient(&self, _: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn height(&self, _: &H2Point) -> f64 {
        0.0
    }
    fn differential(&self, _: &H2Point, _: &[f64; 3]) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct ConstantProfile(f64);

impl ChartProfile for ConstantProfile {
    fn value(&self, xbar: [f64; 2]) -> f64 {
        height_to_chart(self.0, xbar)
    }
    fn gradient(&self, xbar: [f64; 2]) -> [f64; 2] {
        let r2 = xbar[0] * xbar[0] + xbar[1] * xbar[1];
        let k = self.0.tan() / (1.0 - r2).sqrt();
        [k * xbar[0], k * xbar[1]]
    }
    fn height(&self, _: &H2Point) -> f64 {
        self.0
    }
    fn differential(&self, _: &H2Point, _: &[f64; 3]) -> f64 {
        0.0
    }
}

type HeightCallback = dyn Fn(&H2Point) -> f64 + Send + Sync;

struct CallbackProfile(Arc<HeightCallback>);

impl fmt::Debug for CallbackProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CallbackProfile")
    }
}

impl ChartProfile for CallbackProfile {
    fn value(&self, xbar: [f64; 2]) -> f64 {
        match H2Point::from_klein(xbar) {
            Ok(x) => height_to_chart((self.0)(&x), xbar),
            Err(_) => 0.0,
        }
    }
    fn height(&self, x: &H2Point) -> f64 {
        (self.0)(x)
    }
    fn differential(&self, x: &H2Point, v: &[f64; 3]) -> f64 {
        let n = crate::hyp2::minkowski(v, v).max(0.0).sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let s = FD_STEP / n;
        let fwd = x.exp(&[v[0] * s, v[1] * s, v[2] * s]);
        let bwd = x.exp(&[-v[0] * s, -v[1] * s, -v[2] * s]);
        ((self.0)(&fwd) - (self.0)(&bwd)) / (2.0 * FD_STEP) * n
    }
}

/// Chart cone: convex hull of the apex `(center, apex_height)` and the
/// boundary circle of the disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartCone {
    pub apex_height: f64,
    pub center: [f64; 2],
}

impl ChartCone {
    pub fn new(apex_height: f64, center: [f64; 2]) -> Result<Self> {
        let c2 = center[0] * center[0] + center[1] * center[1];
        if !(apex_height < 0.0 && apex_height.is_finite()) || !(c2 < 1.0) {
            return Err(Error::ApexOutsideCylinder);
        }
        Ok(Self { apex_height, center })
    }

    /// Cone whose apex sits over `x` at height `u0`.
    pub fn over_point(x: &H2Point, u0: f64) -> Result<Self> {
        if !(u0 > 0.0 && u0 < std::f64::consts::FRAC_PI_2) {
            return Err(Error::ApexOutsideCylinder);
        }
        let k = x.klein();
        Self::new(height_to_chart(u0, k), k)
    }

    /// Gauge of the disc seen from the center: 0 at the apex, 1 on the circle.
    pub fn gauge(&self, xbar: [f64; 2]) -> f64 {
        let c = self.center;
        let d = [xbar[0] - c[0], xbar[1] - c[1]];
        let a = 1.0 - (c[0] * c[0] + c[1] * c[1]);
        let cd = c[0] * d[0] + c[1] * d[1];
        let dd = d[0] * d[0] + d[1] * d[1];
        (cd + (cd * cd + a * dd).sqrt()) / a
    }

    pub fn value(&self, xbar: [f64; 2]) -> f64 {
        self.apex_height * (1.0 - self.gauge(xbar))
    }

    pub fn gradient(&self, xbar: [f64; 2]) -> [f64; 2] {
        let c = self.center;
        let d = [xbar[0] - c[0], xbar[1] - c[1]];
        if d[0] == 0.0 && d[1] == 0.0 {
            return [f64::NAN, f64::NAN];
        }
        let a = 1.0 - (c[0] * c[0] + c[1] * c[1]);
        let s = self.gauge(xbar);
        let cd = c[0] * d[0] + c[1] * d[1];
        let den = a * s - cd;
        let gs = [(s * c[0] + d[0]) / den, (s * c[1] + d[1]) / den];
        [-self.apex_height * gs[0], -self.apex_height * gs[1]]
    }
}

/// One piece of an upper envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportPiece {
    /// Affine function `offset + slope . xbar`.
    Plane { offset: f64, slope: [f64; 2] },
    Cone(ChartCone),
}

impl SupportPiece {
    /// The plane dual to `p` with weight `c > 0`: it lifts to
    /// `u(x) = arctan(c cosh d(x, p))`.
    pub fn dual_plane(p: &H2Point, c: f64) -> Self {
        let q = p.coords();
        SupportPiece::Plane { offset: -c * q[0], slope: [c * q[1], c * q[2]] }
    }

    pub fn horizontal(level: f64) -> Self {
        SupportPiece::Plane { offset: level, slope: [0.0, 0.0] }
    }

    pub fn value(&self, xbar: [f64; 2]) -> f64 {
        match self {
            SupportPiece::Plane { offset, slope } => offset + slope[0] * xbar[0] + slope[1] * xbar[1],
            SupportPiece::Cone(c) => c.value(xbar),
        }
    }

    pub fn gradient(&self, xbar: [f64; 2]) -> [f64; 2] {
        match self {
            SupportPiece::Plane { slope, .. } => *slope,
            SupportPiece::Cone(c) => c.gradient(xbar),
        }
    }
}

/// Pointwise maximum of support pieces; the gradient is the one of the
/// active piece (lowest index on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pieces: Vec<SupportPiece>,
}

impl Envelope {
    pub fn new(pieces: Vec<SupportPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::OutOfRange { name: "envelope pieces", value: 0.0 });
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[SupportPiece] {
        &self.pieces
    }

    fn active(&self, xbar: [f64; 2]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, p) in self.pieces.iter().enumerate() {
            let v = p.value(xbar);
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }
}

impl ChartProfile for Envelope {
    fn value(&self, xbar: [f64; 2]) -> f64 {
        self.active(xbar).1
    }
    fn gradient(&self, xbar: [f64; 2]) -> [f64; 2] {
        let (i, _) = self.active(xbar);
        self.pieces[i].gradient(xbar)
    }
}

impl ChartProfile for ChartCone {
    fn value(&self, xbar: [f64; 2]) -> f64 {
        ChartCone::value(self, xbar)
    }
    fn gradient(&self, xbar: [f64; 2]) -> [f64; 2] {
        ChartCone::gradient(self, xbar)
    }
}

/// A height function `u: H2 -> [0, R]` whose chart graph is convex and
/// vanishes on the boundary circle.
#[derive(Clone)]
pub struct CConvexFunction {
    profile: Arc<dyn ChartProfile>,
    bound: f64,
    label: String,
}

impl fmt::Debug for CConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CConvexFunction")
            .field("label", &self.label)
            .field("bound", &self.bound)
            .field("profile", &self.profile)
            .finish()
    }
}

fn check_bound(r: f64) -> Result<()> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&r) {
        return Err(Error::OutOfRange { name: "height bound", value: r });
    }
    Ok(())
}

impl CConvexFunction {
    pub fn zero() -> Self {
        Self { profile: Arc::new(ZeroProfile), bound: 0.0, label: "zero".into() }
    }

    pub fn constant(r: f64) -> Result<Self> {
        check_bound(r)?;
        Ok(Self { profile: Arc::new(ConstantProfile(r)), bound: r, label: format!("const:{r}") })
    }

    /// Wraps a closed-form height map; convexity of the chart graph is the
    /// caller's responsibility (see [`CConvexFunction::invariant_report`]).
    pub fn from_height_fn<F>(f: F, bound: f64, label: &str) -> Result<Self>
    where
        F: Fn(&H2Point) -> f64 + Send + Sync + 'static,
    {
        check_bound(bound)?;
        Ok(Self { profile: Arc::new(CallbackProfile(Arc::new(f))), bound, label: label.into() })
    }

    pub fn envelope(pieces: Vec<SupportPiece>, bound: f64, label: &str) -> Result<Self> {
        check_bound(bound)?;
        Ok(Self { profile: Arc::new(Envelope::new(pieces)?), bound, label: label.into() })
    }

    pub fn from_profile(profile: Arc<dyn ChartProfile>, bound: f64, label: &str) -> Result<Self> {
        check_bound(bound)?;
        Ok(Self { profile, bound, label: label.into() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn profile(&self) -> &dyn ChartProfile {
        self.profile.as_ref()
    }

    #[inline]
    pub fn height(&self, x: &H2Point) -> f64 {
        self.profile.height(x)
    }

    #[inline]
    pub fn chart_value(&self, xbar: [f64; 2]) -> f64 {
        self.profile.value(xbar)
    }

    #[inline]
    pub fn differential(&self, x: &H2Point, v: &[f64; 3]) -> f64 {
        self.profile.differential(x, v)
    }

    /// `(cos u, |grad u|)` at `x`, the gradient measured in the H2 metric.
    pub fn slope(&self, x: &H2Point) -> (f64, f64) {
        let (e1, e2) = x.tangent_frame();
        let a = self.differential(x, &e1);
        let b = self.differential(x, &e2);
        (self.height(x).cos(), a.hypot(b))
    }

    /// Samples the defining invariants inside the chart disc of radius
    /// `max_klein`.
    pub fn invariant_report(&self, samples: usize, max_klein: f64, seed: u64) -> InvariantReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pick = |rng: &mut ChaCha8Rng| {
            let r = max_klein * rng.gen::<f64>().sqrt();
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            [r * t.cos(), r * t.sin()]
        };
        let mut rep = InvariantReport {
            min_height: f64::INFINITY,
            max_height: f64::NEG_INFINITY,
            max_convexity_defect: f64::NEG_INFINITY,
            boundary_value: 0.0,
        };
        for _ in 0..samples {
            let a = pick(&mut rng);
            let b = pick(&mut rng);
            let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let (ua, ub, um) = (self.chart_value(a), self.chart_value(b), self.chart_value(m));
            rep.max_convexity_defect = rep.max_convexity_defect.max(um - (ua + ub) / 2.0);
            if let Ok(x) = H2Point::from_klein(a) {
                let h = self.height(&x);
                rep.min_height = rep.min_height.min(h);
                rep.max_height = rep.max_height.max(h);
            }
        }
        for k in 0..32 {
            let t = k as f64 * std::f64::consts::TAU / 32.0;
            let r = 1.0 - 1e-9;
            let v = self.chart_value([r * t.cos(), r * t.sin()]).abs();
            rep.boundary_value = rep.boundary_value.max(v);
        }
        rep
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub min_height: f64,
    pub max_height: f64,
    /// `max ubar(mid) - (ubar(a) + ubar(b))/2`; convexity means `<= 0`.
    pub max_convexity_defect: f64,
    /// Largest `|ubar|` just inside the unit circle.
    pub boundary_value: f64,
}

impl InvariantReport {
    pub fn holds(&self, bound: f64) -> bool {
        self.min_height >= -1e-12 && self.max_height <= bound + 1e-12 && self.max_convexity_defect <= 1e-10
    }
}
