//! Cocompact Fuchsian groups acting on the hyperboloid, invariant C-convex
//! functions built as orbit envelopes, and quotient distances.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp2::{h2_distance, minkowski, H2Point};
use crate::surface::{
    spacelike_check, CConvexFunction, ChartProfile, InducedDistanceField, SampleRegion,
};

/// `SL(2, R)` element acting on H2 as `X -> A X A^T` on
/// `X = [[x0 + x1, x2], [x2, x0 - x1]]`, i.e. as `w -> (a w + b)/(c w + d)`
/// on the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    m: [[f64; 2]; 2],
    abs_trace: f64,
}

impl Mobius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if (det - 1.0).abs() >= 1e-12 {
            return Err(Error::NotUnimodular(det));
        }
        Ok(Self::raw([[a, b], [c, d]]))
    }

    fn raw(m: [[f64; 2]; 2]) -> Self {
        Self { m, abs_trace: (m[0][0] + m[1][1]).abs() }
    }

    /// Rescales by `sqrt(det)` to undo drift in long products.
    fn renormalized(m: [[f64; 2]; 2]) -> Self {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let s = det.sqrt();
        Self::raw([[m[0][0] / s, m[0][1] / s], [m[1][0] / s, m[1][1] / s]])
    }

    pub fn identity() -> Self {
        Self::raw([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Translation by `s` along the `x1` axis.
    pub fn diagonal(s: f64) -> Self {
        Self::raw([[(s / 2.0).exp(), 0.0], [0.0, (-s / 2.0).exp()]])
    }

    /// Rotation about the origin by angle `2 phi`.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::raw([[c, -s], [s, c]])
    }

    /// Translation by `t` along the geodesic through the origin at angle `theta`.
    pub fn translation(t: f64, theta: f64) -> Self {
        Self::rotation(theta / 2.0).compose(&Self::diagonal(t)).compose(&Self::rotation(-theta / 2.0))
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn abs_trace(&self) -> f64 {
        self.abs_trace
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &Mobius) -> Mobius {
        let (a, b) = (self.m, other.m);
        Self::renormalized([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    pub fn inverse(&self) -> Mobius {
        let m = self.m;
        Self::raw([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
    }

    pub fn act(&self, x: &H2Point) -> H2Point {
        H2Point::normalized(self.act_vector(&x.coords()))
    }

    /// The linear Lorentz transformation underlying [`Mobius::act`], applied
    /// to any vector of Minkowski space.
    pub fn act_vector(&self, p: &[f64; 3]) -> [f64; 3] {
        let xm = [[p[0] + p[1], p[2]], [p[2], p[0] - p[1]]];
        let a = self.m;
        // Y = A X A^T
        let ax = [
            [a[0][0] * xm[0][0] + a[0][1] * xm[1][0], a[0][0] * xm[0][1] + a[0][1] * xm[1][1]],
            [a[1][0] * xm[0][0] + a[1][1] * xm[1][0], a[1][0] * xm[0][1] + a[1][1] * xm[1][1]],
        ];
        let y00 = ax[0][0] * a[0][0] + ax[0][1] * a[0][1];
        let y01 = ax[0][0] * a[1][0] + ax[0][1] * a[1][1];
        let y11 = ax[1][0] * a[1][0] + ax[1][1] * a[1][1];
        [(y00 + y11) / 2.0, (y00 - y11) / 2.0, y01]
    }

    /// Frobenius distance between `self` and `other` up to the sign of `other`.
    pub fn projective_distance(&self, other: &Mobius) -> f64 {
        let f = |s: f64| {
            let mut acc = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let d = self.m[i][j] - s * other.m[i][j];
                    acc += d * d;
                }
            }
            acc.sqrt()
        };
        f(1.0).min(f(-1.0))
    }

    /// Representative with nonnegative trace.
    fn sign_normalized(&self) -> Mobius {
        if self.trace() < 0.0 {
            Self::raw([[-self.m[0][0], -self.m[0][1]], [-self.m[1][0], -self.m[1][1]]])
        } else {
            *self
        }
    }
}

/// `2 arccosh(|tr| / 2)`, the minimal displacement of a hyperbolic element.
pub fn translation_length(sigma: &Mobius) -> Result<f64> {
    let t = sigma.abs_trace();
    if t <= 2.0 + 1e-10 {
        return Err(Error::NotHyperbolic(t));
    }
    Ok(2.0 * (t / 2.0).acosh())
}

const MAX_REDUCTION_STEPS: usize = 256;

/// Greedy descent toward the origin: repeatedly applies the element of
/// `gens` that most decreases the distance to the origin. Returns the image
/// and the accumulated element `g` with `g x` equal to the image.
fn descend(gens: &[Mobius], x: &H2Point) -> (H2Point, Mobius) {
    let mut cur = *x;
    let mut acc = Mobius::identity();
    for _ in 0..MAX_REDUCTION_STEPS {
        let mut best: Option<(H2Point, Mobius)> = None;
        let mut best_x0 = cur.x0() * (1.0 - 1e-12);
        for g in gens {
            let y = g.act(&cur);
            if y.x0() < best_x0 {
                best_x0 = y.x0();
                best = Some((y, *g));
            }
        }
        match best {
            Some((y, g)) => {
                cur = y;
                acc = g.compose(&acc);
            }
            None => break,
        }
    }
    (cur, acc)
}

/// Sign-normalized matrix entries rounded for hashing.
fn element_key(m: &Mobius) -> [i64; 4] {
    let n = m.sign_normalized().m;
    [n[0][0], n[0][1], n[1][0], n[1][1]].map(|v| (v * 1e6).round() as i64)
}

/// Largest word-ball radius accepted by [`FuchsianGroup::ball`].
pub const DEFAULT_BALL_CAP: usize = 8;
const DEDUP_TOL: f64 = 1e-8;

type BallCache = Arc<Mutex<BTreeMap<usize, Arc<Vec<Mobius>>>>>;

/// A surface group given by generators and an optional defining relator.
#[derive(Debug, Clone)]
pub struct FuchsianGroup {
    generators: Vec<Mobius>,
    genus: usize,
    relator: Option<Vec<i32>>,
    domain: Option<Vec<H2Point>>,
    ball_cap: usize,
    cache: BallCache,
}

/// Evaluates a signed 1-based generator word.
fn eval_word(gens: &[Mobius], word: &[i32]) -> Result<Mobius> {
    let mut acc = Mobius::identity();
    for &w in word {
        let i = w.unsigned_abs() as usize;
        if w == 0 || i > gens.len() {
            return Err(Error::Schema(format!("relator letter {w} out of range")));
        }
        let g = if w > 0 { gens[i - 1] } else { gens[i - 1].inverse() };
        acc = acc.compose(&g);
    }
    Ok(acc)
}

impl FuchsianGroup {
    pub fn new(generators: Vec<Mobius>, genus: usize, relator: Option<Vec<i32>>) -> Result<Self> {
        if genus < 2 {
            return Err(Error::OutOfRange { name: "genus", value: genus as f64 });
        }
        for g in &generators {
            if (g.det() - 1.0).abs() >= 1e-12 {
                return Err(Error::NotUnimodular(g.det()));
            }
            translation_length(g)?;
        }
        if let Some(word) = &relator {
            let r = eval_word(&generators, word)?;
            let err = r.projective_distance(&Mobius::identity());
            if err >= 1e-8 {
                return Err(Error::RelatorMismatch(err));
            }
        }
        Ok(Self {
            generators,
            genus,
            relator,
            domain: None,
            ball_cap: DEFAULT_BALL_CAP,
            cache: Arc::new(Mutex::new(BTreeMap::new())),
        })
    }

    pub fn with_domain(mut self, polygon: Vec<H2Point>) -> Self {
        self.domain = Some(polygon);
        self
    }

    pub fn with_ball_cap(mut self, cap: usize) -> Self {
        self.ball_cap = cap;
        self
    }

    pub fn generators(&self) -> &[Mobius] {
        &self.generators
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn relator(&self) -> Option<&[i32]> {
        self.relator.as_deref()
    }

    /// Fundamental polygon, counter-clockwise, when known.
    pub fn domain(&self) -> Option<&[H2Point]> {
        self.domain.as_deref()
    }

    /// Generators followed by their inverses.
    pub fn symmetric_generators(&self) -> Vec<Mobius> {
        let mut out = self.generators.clone();
        out.extend(self.generators.iter().map(Mobius::inverse));
        out
    }

    /// All elements of word length at most `radius`, up to sign, in order of
    /// first appearance (so the ball of radius `r` is a prefix of `r + 1`).
    pub fn ball(&self, radius: usize) -> Result<Arc<Vec<Mobius>>> {
        if radius > self.ball_cap {
            return Err(Error::BallTooLarge { radius, cap: self.ball_cap });
        }
        if let Some(b) = self.cache.lock().expect("ball cache").get(&radius) {
            return Ok(b.clone());
        }
        let gens = self.symmetric_generators();
        let mut elems = vec![Mobius::identity()];
        let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let key = |m: &Mobius| {
            let n = m.sign_normalized().m;
            ((n[0][0] * 1e4).floor() as i64, (n[0][1] * 1e4).floor() as i64)
        };
        index.entry(key(&elems[0])).or_default().push(0);
        let mut frontier = 0..1;
        for _ in 0..radius {
            let start = elems.len();
            for i in frontier.clone() {
                for g in &gens {
                    let cand = elems[i].compose(g).sign_normalized();
                    let (k0, k1) = key(&cand);
                    let mut dup = false;
                    'outer: for d0 in -1..=1 {
                        for d1 in -1..=1 {
                            if let Some(list) = index.get(&(k0 + d0, k1 + d1)) {
                                if list.iter().any(|&j| elems[j].projective_distance(&cand) < DEDUP_TOL) {
                                    dup = true;
                                    break 'outer;
                                }
                            }
                        }
                    }
                    if !dup {
                        index.entry((k0, k1)).or_default().push(elems.len());
                        elems.push(cand);
                    }
                }
            }
            frontier = start..elems.len();
        }
        let ball = Arc::new(elems);
        self.cache.lock().expect("ball cache").insert(radius, ball.clone());
        Ok(ball)
    }

    /// Largest distance from the origin to a vertex of the fundamental polygon.
    pub fn domain_radius(&self) -> Option<f64> {
        self.domain.as_ref().map(|d| d.iter().map(H2Point::radius).fold(0.0, f64::max))
    }

    /// Moves `x` into the fundamental polygon, which must be the Dirichlet
    /// domain of the origin. Returns the image and the element mapping `x`
    /// to it.
    pub fn reduce(&self, x: &H2Point) -> Result<(H2Point, Mobius)> {
        if self.domain.is_none() {
            return Err(Error::UnsupportedSource("group has no fundamental polygon".into()));
        }
        Ok(descend(&self.symmetric_generators(), x))
    }

    /// Distance in the quotient surface, `min_sigma d(x, sigma y)`.
    ///
    /// Both points are reduced into the fundamental polygon, then tiles are
    /// explored through side pairings; a tile `sigma D` is expanded only if
    /// it can meet the ball of the current best radius around `x`, which it
    /// cannot once `d(x, sigma 0)` exceeds that radius plus the domain radius.
    pub fn quotient_h2_distance(&self, x: &H2Point, y: &H2Point) -> Result<f64> {
        let radius = self
            .domain_radius()
            .ok_or_else(|| Error::UnsupportedSource("group has no fundamental polygon".into()))?;
        let gens = self.symmetric_generators();
        let (x, _) = descend(&gens, x);
        let (y, _) = descend(&gens, y);
        let origin = H2Point::origin();
        let mut best = h2_distance(&x, &y);
        let mut seen = std::collections::HashSet::new();
        seen.insert(element_key(&Mobius::identity()));
        let mut queue = std::collections::VecDeque::from([Mobius::identity()]);
        while let Some(s) = queue.pop_front() {
            for g in &gens {
                let t = s.compose(g);
                if !seen.insert(element_key(&t)) {
                    continue;
                }
                if h2_distance(&x, &t.act(&origin)) > best + radius + 1e-9 {
                    continue;
                }
                best = best.min(h2_distance(&x, &t.act(&y)));
                queue.push_back(t);
            }
        }
        Ok(best)
    }

    /// Shortest translation length over the nontrivial elements of a ball.
    pub fn systole_estimate(&self, radius: usize) -> Result<f64> {
        let ball = self.ball(radius)?;
        let mut best = f64::INFINITY;
        for g in ball.iter().skip(1) {
            best = best.min(translation_length(g)?);
        }
        Ok(best)
    }

    pub fn to_json(&self) -> String {
        let doc = GroupDoc {
            schema: "adscurv.group".into(),
            version: 1,
            genus: self.genus,
            generators: self
                .generators
                .iter()
                .map(|g| {
                    let m = g.matrix();
                    [m[0][0], m[0][1], m[1][0], m[1][1]].map(sig16)
                })
                .collect(),
            relator: self.relator.as_ref().map(|w| w.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")),
        };
        serde_json::to_string_pretty(&doc).expect("group serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GroupDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if doc.schema != "adscurv.group" {
            return Err(Error::Schema(format!("unexpected schema {}", doc.schema)));
        }
        let gens = doc
            .generators
            .iter()
            .map(|m| {
                // stored digits are rounded; restore det = 1 exactly
                let det = m[0] * m[3] - m[1] * m[2];
                if (det - 1.0).abs() > 1e-12 * (1.0 + m.iter().map(|v| v * v).sum::<f64>()) {
                    return Err(Error::NotUnimodular(det));
                }
                Ok(Mobius::renormalized([[m[0], m[1]], [m[2], m[3]]]))
            })
            .collect::<Result<Vec<_>>>()?;
        let relator = doc
            .relator
            .map(|s| {
                s.split_whitespace()
                    .map(|t| t.parse::<i32>().map_err(|e| Error::Schema(e.to_string())))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        FuchsianGroup::new(gens, doc.genus, relator)
    }
}

fn sig16(x: f64) -> f64 {
    format!("{x:.15e}").parse().expect("formatted float parses")
}

#[derive(Debug, Serialize, Deserialize)]
struct GroupDoc {
    schema: String,
    version: u32,
    genus: usize,
    generators: Vec<[f64; 4]>,
    relator: Option<String>,
}

/// Circumradius of the regular octagon with interior angles `pi/4`:
/// `cosh R = cot^2(pi/8)`.
pub fn octagon_circumradius() -> f64 {
    let c = 1.0 / FRAC_PI_8.tan();
    (c * c).acosh()
}

/// Inradius: `cosh r = cot(pi/8)`.
pub fn octagon_inradius() -> f64 {
    (1.0 / FRAC_PI_8.tan()).acosh()
}

/// Side length: `cosh(s/2) = cos(pi/8) / sin(pi/8)`.
pub fn octagon_side_length() -> f64 {
    2.0 * (FRAC_PI_8.cos() / FRAC_PI_8.sin()).acosh()
}

/// The regular octagon with vertices at angles `k pi/4`, counter-clockwise.
pub fn octagon_vertices() -> Vec<H2Point> {
    let r = octagon_circumradius();
    (0..8).map(|k| H2Point::from_polar(r, k as f64 * FRAC_PI_4)).collect()
}

/// Genus-2 group pairing opposite sides of the regular octagon: generator
/// `k` translates by twice the inradius toward the midpoint of side `k`.
pub fn genus2_octagon_group() -> FuchsianGroup {
    let t = 2.0 * octagon_inradius();
    let gens = (0..4).map(|k| Mobius::translation(t, k as f64 * FRAC_PI_4 + FRAC_PI_8)).collect();
    FuchsianGroup::new(gens, 2, Some(vec![1, -2, 3, -4, -1, 2, -3, 4]))
        .expect("octagon group is valid")
        .with_domain(octagon_vertices())
}

/// Chart profile `ubar = max_i` of the planes dual to the orbit points
/// `sigma p_i` with weights `c_i`; the height is
/// `u(x) = arctan(min_i c_i cosh d(x, sigma p_i))`.
///
/// When the group carries a fundamental polygon (assumed to be the
/// Dirichlet domain of the origin), points are first moved into it by
/// generators, so the truncated envelope is invariant to rounding.
#[derive(Debug, Clone)]
pub struct OrbitEnvelope {
    /// `(point, weight, distance to origin)`, sorted by distance.
    points: Vec<([f64; 3], f64, f64)>,
    min_weight: f64,
    reducers: Vec<Mobius>,
}


impl OrbitEnvelope {
    pub fn new(group: &FuchsianGroup, seeds: &[(H2Point, f64)], ball_radius: usize) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::OutOfRange { name: "orbit seeds", value: 0.0 });
        }
        for &(_, c) in seeds {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::OutOfRange { name: "orbit weight", value: c });
            }
        }
        let ball = group.ball(ball_radius)?;
        let mut points: Vec<([f64; 3], f64, f64)> = ball
            .iter()
            .flat_map(|g| {
                seeds.iter().map(move |(p, c)| {
                    let q = g.act(p);
                    (q.coords(), *c, q.radius())
                })
            })
            .collect();
        points.sort_by(|a, b| a.2.total_cmp(&b.2));
        let min_weight = seeds.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let reducers = if group.domain().is_some() { group.symmetric_generators() } else { Vec::new() };
        Ok(Self { points, min_weight, reducers })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `w = min c cosh d(x, q)` with the minimizing point (in the frame of
    /// `x`) and its weight.
    fn best(&self, x: &H2Point) -> (f64, [f64; 3], f64) {
        let (xr, g) = if self.reducers.is_empty() { (*x, Mobius::identity()) } else { descend(&self.reducers, x) };
        let p = xr.coords();
        let rho = xr.radius();
        let mut best = (f64::INFINITY, 0);
        for (i, (q, c, dq)) in self.points.iter().enumerate() {
            // triangle inequality: d(x, q) >= dq - rho
            let gap = dq - rho;
            if gap > 0.0 && self.min_weight * gap.cosh() >= best.0 {
                break;
            }
            let w = -c * minkowski(&p, q);
            if w < best.0 {
                best = (w, i);
            }
        }
        let (q, c, _) = self.points[best.1];
        let q = if self.reducers.is_empty() { q } else { g.inverse().act_vector(&q) };
        (best.0, q, c)
    }
}

impl ChartProfile for OrbitEnvelope {
    fn value(&self, xbar: [f64; 2]) -> f64 {
        match H2Point::from_klein(xbar) {
            Ok(x) => -self.best(&x).0 / x.x0(),
            Err(_) => 0.0,
        }
    }
    fn gradient(&self, xbar: [f64; 2]) -> [f64; 2] {
        match H2Point::from_klein(xbar) {
            Ok(x) => {
                let (_, q, c) = self.best(&x);
                [c * q[1], c * q[2]]
            }
            Err(_) => [0.0, 0.0],
        }
    }
    fn height(&self, x: &H2Point) -> f64 {
        self.best(x).0.atan()
    }
    fn differential(&self, x: &H2Point, v: &[f64; 3]) -> f64 {
        let (w, q, c) = self.best(x);
        -c * minkowski(v, &q) / (1.0 + w * w)
    }
}

/// Orbit envelope of weighted seed points over a word ball.
pub fn orbit_envelope(group: &FuchsianGroup, seeds: &[(H2Point, f64)], ball_radius: usize) -> Result<CConvexFunction> {
    let env = OrbitEnvelope::new(group, seeds, ball_radius)?;
    // every point lies within the circumradius of some translate of each seed
    // as long as the seeds sit in the fundamental polygon
    let reach = group.domain().map_or(octagon_circumradius(), |d| d.iter().map(|v| v.radius()).fold(0.0, f64::max));
    let cmax = seeds.iter().map(|s| s.1).fold(0.0, f64::max);
    let bound = (cmax * (2.0 * reach).cosh()).atan();
    CConvexFunction::from_profile(Arc::new(env), bound, &format!("orbit-envelope:{}", seeds.len()))
}

/// Random orbit envelope: one to three seeds inside the fundamental
/// polygon, weights in `[0.3, 1.0]`.
pub fn random_orbit_envelope(group: &FuchsianGroup, seed: u64, ball_radius: usize) -> Result<CConvexFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = match group.domain() {
        Some(d) => SampleRegion::Polygon(d.to_vec()),
        None => SampleRegion::disc(1.0),
    };
    let n = rng.gen_range(1..=3);
    let seeds: Vec<(H2Point, f64)> = (0..n).map(|_| (region.sample(&mut rng), rng.gen_range(0.3..1.0))).collect();
    orbit_envelope(group, &seeds, ball_radius)
}

/// A C-convex function declared invariant under a Fuchsian group.
#[derive(Debug, Clone)]
pub struct FuchsianCConvex {
    pub function: CConvexFunction,
    pub group: FuchsianGroup,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub sup_violation: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

impl FuchsianCConvex {
    pub fn new(function: CConvexFunction, group: FuchsianGroup, tolerance: f64) -> Self {
        Self { function, group, tolerance }
    }

    fn sampler(&self) -> SampleRegion {
        match self.group.domain() {
            Some(d) => SampleRegion::Polygon(d.to_vec()),
            None => SampleRegion::disc(1.0),
        }
    }

    /// Largest sampled height over the fundamental polygon.
    pub fn sup_height(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let region = self.sampler();
        (0..samples).map(|_| self.function.height(&region.sample(&mut rng))).fold(0.0, f64::max)
    }

    /// Minimal stretch `K` over the fundamental polygon.
    pub fn stretch_bound(&self, samples: usize, seed: u64) -> f64 {
        spacelike_check(&self.function, samples, &self.sampler(), seed).min_ratio
    }
}

/// `sup |u(x) - u(sigma x)|` over sampled `x` in the fundamental polygon and
/// all generators and their inverses.
pub fn invariance_check(fc: &FuchsianCConvex, samples: usize, seed: u64) -> InvarianceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = fc.sampler();
    let gens = fc.group.symmetric_generators();
    let mut sup: f64 = 0.0;
    for _ in 0..samples {
        let x = region.sample(&mut rng);
        let ux = fc.function.height(&x);
        for g in &gens {
            sup = sup.max((ux - fc.function.height(&g.act(&x))).abs());
        }
    }
    InvarianceReport { sup_violation: sup, tolerance: fc.tolerance, samples, pass: sup < fc.tolerance }
}

/// Outcome of a truncated quotient-distance minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientEstimate {
    pub value: f64,
    /// Index of the minimizing element in the ball.
    pub witness: usize,
    /// Every omitted translate is provably no closer.
    pub certified: bool,
}

/// `min_sigma d_u(x, sigma y)` over the covered translates of `y` in the ball
/// of radius `ball_radius`. Certification requires `K d_H2(x, sigma y)` to
/// exceed the minimum for every uncovered translate in the ball and every
/// element of the next word level, where `K` is the stretch bound.
pub fn quotient_estimate(
    group: &FuchsianGroup,
    field: &InducedDistanceField,
    stretch: f64,
    x: &H2Point,
    y: &H2Point,
    ball_radius: usize,
) -> Result<QuotientEstimate> {
    let mesh = field.mesh();
    let covered = |p: &H2Point| mesh.nearest_vertex(p).is_some_and(|(_, d)| d <= 2.0 * mesh.covering_radius());
    if !covered(x) || !covered(y) {
        return Err(Error::OutsideCoverage);
    }
    let ball = group.ball(ball_radius)?;
    let translates: Vec<H2Point> = ball.iter().map(|g| g.act(y)).collect();
    let (inside, outside): (Vec<usize>, Vec<usize>) = (0..translates.len()).partition(|&i| covered(&translates[i]));
    let targets: Vec<H2Point> = inside.iter().map(|&i| translates[i]).collect();
    let dists = field.point_distances(x, &targets)?;
    let (mut value, mut witness) = (f64::INFINITY, 0);
    for (&i, &d) in inside.iter().zip(&dists) {
        if d < value {
            value = d;
            witness = i;
        }
    }
    let beats = |p: &H2Point| stretch * h2_distance(x, p) > value;
    let mut certified = outside.iter().all(|&i| beats(&translates[i]));
    if certified && ball_radius < group.ball_cap {
        let next = group.ball(ball_radius + 1)?;
        certified = next[ball.len()..].iter().all(|g| beats(&g.act(y)));
    }
    Ok(QuotientEstimate { value, witness, certified })
}

/// Certified quotient distance `dbar_u(x, y)`.
pub fn quotient_distance(
    fc: &FuchsianCConvex,
    field: &InducedDistanceField,
    stretch: f64,
    x: &H2Point,
    y: &H2Point,
    ball_radius: usize,
) -> Result<f64> {
    let est = quotient_estimate(&fc.group, field, stretch, x, y, ball_radius)?;
    if !est.certified {
        return Err(Error::BallInsufficient { radius: ball_radius });
    }
    Ok(est.value)
}

/// `min(dbar(x, y), dbar(y, x))`, symmetric by construction.
pub fn symmetric_quotient_distance(
    fc: &FuchsianCConvex,
    field: &InducedDistanceField,
    stretch: f64,
    x: &H2Point,
    y: &H2Point,
    ball_radius: usize,
) -> Result<f64> {
    let a = quotient_distance(fc, field, stretch, x, y, ball_radius)?;
    let b = quotient_distance(fc, field, stretch, y, x, ball_radius)?;
    Ok(a.min(b))
}
