use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::CConvexFunction;
use crate::error::{Error, Result};
use crate::hyp2::{minkowski, GeodesicSegment, H2Point, H2Polyline};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, five points.
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Default hyperbolic length of one quadrature panel.
pub const PANEL_LENGTH: f64 = 0.25;
/// Integrand values below this count as time-like.
pub const SPACELIKE_SLACK: f64 = 1e-10;
const KINK_SHIFT: f64 = 1e-7;

/// Lorentzian length of the lift of `c` to the graph of `u`.
pub fn curve_length(u: &CConvexFunction, c: &H2Polyline) -> Result<f64> {
    c.segments().enumerate().map(|(i, s)| segment_length(u, &s, i, PANEL_LENGTH)).sum()
}

/// Length of one lifted geodesic segment with panels of at most `panel` length.
pub fn segment_length(u: &CConvexFunction, seg: &GeodesicSegment, index: usize, panel: f64) -> Result<f64> {
    let len = seg.length();
    if len == 0.0 {
        return Ok(0.0);
    }
    let panels = (len / panel).ceil().max(1.0) as usize;
    let w = 1.0 / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * w;
        for &(node, weight) in &GL5 {
            let t = mid + 0.5 * w * node;
            total += 0.5 * w * weight * integrand(u, seg, t, index)?;
        }
    }
    Ok(total)
}

/// `sqrt(cos^2(u) |c'|^2 - (u o c)'^2)` at parameter `t`.
fn integrand(u: &CConvexFunction, seg: &GeodesicSegment, t: f64, index: usize) -> Result<f64> {
    let (mut p, mut v) = seg.eval(t);
    let mut du = u.differential(&p, &v);
    if !du.is_finite() {
        let t2 = if t < 0.5 { t + KINK_SHIFT } else { t - KINK_SHIFT };
        (p, v) = seg.eval(t2);
        du = u.differential(&p, &v);
    }
    let cu = u.height(&p).cos();
    let val = cu * cu * minkowski(&v, &v) - du * du;
    if val < -SPACELIKE_SLACK || !val.is_finite() {
        return Err(Error::NonSpacelikeSegment { segment: index, value: val });
    }
    Ok(val.max(0.0).sqrt())
}

/// Where sample points are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleRegion {
    /// Hyperbolic disc, uniform in area.
    Disc { center: H2Point, radius: f64 },
    /// Convex polygon given by its vertices in counter-clockwise order.
    Polygon(Vec<H2Point>),
}

impl SampleRegion {
    pub fn disc(radius: f64) -> Self {
        SampleRegion::Disc { center: H2Point::origin(), radius }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> H2Point {
        match self {
            SampleRegion::Disc { center, radius } => {
                let r = (1.0 + rng.gen::<f64>() * (radius.cosh() - 1.0)).acosh();
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                let (e1, e2) = center.tangent_frame();
                let (s, c) = t.sin_cos();
                center.exp(&[
                    r * (c * e1[0] + s * e2[0]),
                    r * (c * e1[1] + s * e2[1]),
                    r * (c * e1[2] + s * e2[2]),
                ])
            }
            SampleRegion::Polygon(vs) => {
                let ks: Vec<[f64; 2]> = vs.iter().map(|v| v.klein()).collect();
                let rmax = vs.iter().map(|v| v.radius()).fold(0.0, f64::max);
                loop {
                    let r = (1.0 + rng.gen::<f64>() * (rmax.cosh() - 1.0)).acosh();
                    let x = H2Point::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
                    if klein_polygon_contains(&ks, x.klein()) {
                        return x;
                    }
                }
            }
        }
    }
}

/// Counter-clockwise convex polygon test in Klein coordinates, where
/// hyperbolic geodesics are straight.
pub fn klein_polygon_contains(ks: &[[f64; 2]], p: [f64; 2]) -> bool {
    (0..ks.len()).all(|i| {
        let a = ks[i];
        let b = ks[(i + 1) % ks.len()];
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpacelikeWitness {
    pub point: [f64; 3],
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpacelikeReport {
    /// `inf |v|_u / |v|_H2` over sampled points, minimized exactly over
    /// directions; negative values encode time-like directions.
    pub min_ratio: f64,
    pub samples: usize,
    pub skipped: usize,
    /// The lowest-ratio samples, best first.
    pub witnesses: Vec<SpacelikeWitness>,
    pub pass: bool,
}

/// Minimal stretch of the graph metric against the H2 metric.
pub fn spacelike_check(u: &CConvexFunction, samples: usize, region: &SampleRegion, seed: u64) -> SpacelikeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witnesses: Vec<SpacelikeWitness> = Vec::new();
    let mut skipped = 0;
    for _ in 0..samples {
        let x = region.sample(&mut rng);
        let (cu, g) = u.slope(&x);
        let q = cu * cu - g * g;
        if !q.is_finite() {
            skipped += 1;
            continue;
        }
        let ratio = q.signum() * q.abs().sqrt();
        witnesses.push(SpacelikeWitness { point: x.coords(), ratio });
        if witnesses.len() > 64 {
            witnesses.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
            witnesses.truncate(8);
        }
    }
    witnesses.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    witnesses.truncate(8);
    let min_ratio = witnesses.first().map_or(f64::NAN, |w| w.ratio);
    SpacelikeReport { min_ratio, samples, skipped, witnesses, pass: min_ratio > 0.0 }
}

#[derive(Debug, Clone, Serialize)]
pub struct LengthConvergenceReport {
    pub limit_length: f64,
    pub lengths: Vec<f64>,
    /// `|L_n - L|` per sequence index.
    pub differences: Vec<f64>,
    /// Largest `|u_n - u|` sampled on the curve for the last function.
    pub last_pointwise_gap: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Compares lengths of `c` under `u_seq` with the limit, whose bound serves
/// as the common bound of the sequence. Passes when the
/// last difference is below `threshold` and the differences over the
/// second half of the sequence never increase.
pub fn length_convergence_check(
    u_seq: &[CConvexFunction],
    u_limit: &CConvexFunction,
    c: &H2Polyline,
    threshold: f64,
) -> Result<LengthConvergenceReport> {
    let bound = u_limit.bound();
    let probes: Vec<H2Point> = c
        .segments()
        .flat_map(|s| (0..=16).map(move |k| s.eval(k as f64 / 16.0).0))
        .collect();
    for (i, u) in u_seq.iter().enumerate() {
        if u.bound() > bound + 1e-12 {
            return Err(Error::NotUniformlyBounded { index: i, bound, value: u.bound() });
        }
        for p in &probes {
            let h = u.height(p);
            if h > bound + 1e-12 {
                return Err(Error::NotUniformlyBounded { index: i, bound, value: h });
            }
        }
    }
    let limit_length = curve_length(u_limit, c)?;
    let lengths = u_seq.iter().map(|u| curve_length(u, c)).collect::<Result<Vec<_>>>()?;
    let differences: Vec<f64> = lengths.iter().map(|l| (l - limit_length).abs()).collect();
    let last_pointwise_gap = u_seq.last().map_or(0.0, |u| {
        probes.iter().map(|p| (u.height(p) - u_limit.height(p)).abs()).fold(0.0, f64::max)
    });
    let tail = &differences[differences.len() / 2..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    let pass = monotone && differences.last().is_some_and(|d| *d < threshold);
    Ok(LengthConvergenceReport { limit_length, lengths, differences, last_pointwise_gap, threshold, pass })
}
