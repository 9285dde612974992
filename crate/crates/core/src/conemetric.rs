//! Hyperbolic cone metrics glued from comparison triangles: construction
//! from metric triangulations, cone angles and excesses, Steiner-graph
//! distances, and the quantitative checks comparing them with a source
//! metric.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuchsian::FuchsianGroup;
use crate::graph::Graph;
use crate::hyp2::{comparison_angle, comparison_triangle, h2_distance, isosceles_chord, place_triangle, third_point, H2Point, TriangleShape};

/// Tolerance of the per-vertex cone-angle test.
pub const ANGLE_TOL: f64 = 1e-8;

/// Triangulated surface carrying one length per edge.
///
/// Side `i` of a triangle joins corners `i` and `i + 1`. Edges have their own
/// ids so that loops and multiple edges between two vertices can occur; each
/// side records whether it runs along its edge's canonical direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTriangulation {
    genus: usize,
    vertex_count: usize,
    triangles: Vec<[usize; 3]>,
    sides: Vec<[(usize, bool); 3]>,
    edge_lengths: Vec<f64>,
    epsilon: f64,
    closed: bool,
}

impl MetricTriangulation {
    /// Validates the combinatorics and the diameter bound. A surface in which
    /// every edge borders two triangles must satisfy the Euler relation for
    /// `genus`; edges bordering a single triangle form a boundary.
    pub fn new(
        genus: usize,
        vertex_count: usize,
        triangles: Vec<[usize; 3]>,
        sides: Vec<[(usize, bool); 3]>,
        edge_lengths: Vec<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::BadCombinatorics(msg));
        if triangles.is_empty() || triangles.len() != sides.len() {
            return bad(format!("{} triangles with {} side lists", triangles.len(), sides.len()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::OutOfRange { name: "epsilon", value: epsilon });
        }
        let mut used_vertex = vec![false; vertex_count];
        let mut uses: Vec<Vec<(usize, usize)>> = vec![Vec::new(); edge_lengths.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let v = tri[i];
                if v >= vertex_count {
                    return bad(format!("triangle {t} uses vertex {v} of {vertex_count}"));
                }
                used_vertex[v] = true;
                let e = sides[t][i].0;
                if e >= edge_lengths.len() {
                    return bad(format!("triangle {t} uses edge {e} of {}", edge_lengths.len()));
                }
                uses[e].push((t, i));
            }
        }
        if let Some(v) = used_vertex.iter().position(|u| !u) {
            return bad(format!("vertex {v} is in no triangle"));
        }
        let mut closed = true;
        for (e, u) in uses.iter().enumerate() {
            let ends = |&(t, i): &(usize, usize)| {
                let (a, b) = (triangles[t][i], triangles[t][(i + 1) % 3]);
                if sides[t][i].1 { (a, b) } else { (b, a) }
            };
            match u.as_slice() {
                [] => return bad(format!("edge {e} is in no triangle")),
                [_] => closed = false,
                [p, q] => {
                    if sides[p.0][p.1].1 == sides[q.0][q.1].1 {
                        return bad(format!("edge {e} is glued without reversing orientation"));
                    }
                    if ends(p) != ends(q) {
                        return bad(format!("edge {e} joins different vertices in its two triangles"));
                    }
                }
                _ => return bad(format!("edge {e} borders {} triangles", u.len())),
            }
            let l = edge_lengths[e];
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::OutOfRange { name: "edge length", value: l });
            }
        }
        if closed {
            let chi = triangles.len() as i64 - edge_lengths.len() as i64 + vertex_count as i64;
            if chi != 2 - 2 * genus as i64 {
                return bad(format!("Euler characteristic {chi} does not match genus {genus}"));
            }
        }
        for s in &sides {
            let d = s.iter().map(|&(e, _)| edge_lengths[e]).fold(0.0, f64::max);
            if d > epsilon {
                return Err(Error::OutOfRange { name: "triangle diameter", value: d });
            }
        }
        Ok(Self { genus, vertex_count, triangles, sides, edge_lengths, epsilon, closed })
    }

    /// Simplicial input: edges are identified by their endpoint pairs and
    /// oriented from the smaller to the larger vertex id.
    pub fn from_pairs(
        genus: usize,
        vertex_count: usize,
        triangles: Vec<[usize; 3]>,
        lengths: &BTreeMap<(usize, usize), f64>,
        epsilon: f64,
    ) -> Result<Self> {
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edge_lengths = Vec::new();
        let mut sides = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut s = [(0, true); 3];
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                if a == b {
                    return Err(Error::BadCombinatorics(format!("loop at vertex {a}")));
                }
                let key = (a.min(b), a.max(b));
                let l = *lengths
                    .get(&key)
                    .ok_or_else(|| Error::BadCombinatorics(format!("missing length for edge {},{}", key.0, key.1)))?;
                let id = *ids.entry(key).or_insert_with(|| {
                    edge_lengths.push(l);
                    edge_lengths.len() - 1
                });
                s[i] = (id, a < b);
            }
            sides.push(s);
        }
        Self::new(genus, vertex_count, triangles, sides, edge_lengths, epsilon)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_lengths.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// `(edge, forward)` for each side of each triangle.
    pub fn sides(&self) -> &[[(usize, bool); 3]] {
        &self.sides
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Side lengths `[d01, d12, d20]` of triangle `t`.
    pub fn side_lengths(&self, t: usize) -> [f64; 3] {
        self.sides[t].map(|(e, _)| self.edge_lengths[e])
    }

    /// Largest edge length.
    pub fn max_edge(&self) -> f64 {
        self.edge_lengths.iter().cloned().fold(0.0, f64::max)
    }

    /// The two `(triangle, side)` uses of every edge.
    fn edge_uses(&self) -> Vec<Vec<(usize, usize)>> {
        let mut uses = vec![Vec::with_capacity(2); self.edge_count()];
        for (t, s) in self.sides.iter().enumerate() {
            for (i, &(e, _)) in s.iter().enumerate() {
                uses[e].push((t, i));
            }
        }
        uses
    }

    /// JSON document `{genus, vertices, triangles, edge_lengths, epsilon}`
    /// with edges keyed `"a,b"`; only simplicial triangulations fit it.
    pub fn to_json(&self) -> Result<String> {
        let mut lengths = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let e = self.sides[t][i].0;
                let key = (a.min(b), a.max(b));
                if a == b {
                    return Err(Error::BadCombinatorics(format!("loop at vertex {a} has no pair key")));
                }
                if let Some(&(other, _)) = lengths.get(&key) {
                    if other != e {
                        return Err(Error::BadCombinatorics(format!("vertices {a},{b} share several edges")));
                    }
                }
                lengths.insert(key, (e, self.edge_lengths[e]));
            }
        }
        let doc = TriangulationDoc {
            genus: self.genus,
            vertices: (0..self.vertex_count).collect(),
            triangles: self.triangles.clone(),
            edge_lengths: lengths.iter().map(|(&(a, b), &(_, l))| (format!("{a},{b}"), l)).collect(),
            epsilon: self.epsilon,
        };
        Ok(serde_json::to_string_pretty(&doc).expect("triangulation serializes"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TriangulationDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let index: HashMap<usize, usize> = doc.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if index.len() != doc.vertices.len() {
            return Err(Error::Schema("duplicate vertex id".into()));
        }
        let lookup = |v: usize| index.get(&v).copied().ok_or_else(|| Error::Schema(format!("unknown vertex {v}")));
        let triangles = doc
            .triangles
            .iter()
            .map(|t| Ok([lookup(t[0])?, lookup(t[1])?, lookup(t[2])?]))
            .collect::<Result<Vec<_>>>()?;
        let mut lengths = BTreeMap::new();
        for (key, &l) in &doc.edge_lengths {
            let parsed: Vec<usize> = key
                .split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|e| Error::Schema(format!("edge key {key:?}: {e}"))))
                .collect::<Result<_>>()?;
            let [a, b] = parsed[..] else {
                return Err(Error::Schema(format!("edge key {key:?} is not a vertex pair")));
            };
            let (a, b) = (lookup(a)?, lookup(b)?);
            lengths.insert((a.min(b), a.max(b)), l);
        }
        Self::from_pairs(doc.genus, doc.vertices.len(), triangles, &lengths, doc.epsilon)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangulationDoc {
    genus: usize,
    vertices: Vec<usize>,
    triangles: Vec<[usize; 3]>,
    edge_lengths: BTreeMap<String, f64>,
    epsilon: f64,
}

/// Surface glued from the hyperbolic comparison triangles of a
/// [`MetricTriangulation`].
#[derive(Debug, Clone)]
pub struct ConeSurface {
    triangulation: MetricTriangulation,
    shapes: Vec<TriangleShape>,
    cone_angles: Vec<f64>,
    interior: Vec<bool>,
}

/// Glues comparison triangles and accumulates the corner angles around each
/// vertex.
pub fn build_cone_surface(mt: &MetricTriangulation) -> Result<ConeSurface> {
    let mut shapes = Vec::with_capacity(mt.triangles.len());
    for t in 0..mt.triangles.len() {
        let [d01, d12, d20] = mt.side_lengths(t);
        shapes.push(comparison_triangle(d01, d20, d12).map_err(|_| Error::BadTriangle { index: t })?);
    }
    let mut cone_angles = vec![0.0; mt.vertex_count];
    for (tri, shape) in mt.triangles.iter().zip(&shapes) {
        for (v, a) in tri.iter().zip(shape.angles()) {
            cone_angles[*v] += a;
        }
    }
    let mut interior = vec![true; mt.vertex_count];
    for uses in mt.edge_uses() {
        if let [(t, i)] = uses[..] {
            interior[mt.triangles[t][i]] = false;
            interior[mt.triangles[t][(i + 1) % 3]] = false;
        }
    }
    Ok(ConeSurface { triangulation: mt.clone(), shapes, cone_angles, interior })
}

impl ConeSurface {
    pub fn triangulation(&self) -> &MetricTriangulation {
        &self.triangulation
    }

    /// Comparison triangle of each triangle; angle `alpha` sits at corner 0.
    pub fn shapes(&self) -> &[TriangleShape] {
        &self.shapes
    }

    /// Total angle around each vertex.
    pub fn cone_angles(&self) -> &[f64] {
        &self.cone_angles
    }

    /// Whether the vertex lies away from the boundary.
    pub fn is_interior(&self, v: usize) -> bool {
        self.interior[v]
    }

    /// `alpha + beta + gamma - pi` of triangle `t`.
    pub fn excess(&self, t: usize) -> f64 {
        self.shapes[t].excess()
    }

    pub fn area(&self, t: usize) -> f64 {
        crate::hyp2::triangle_area(&self.shapes[t])
    }

    pub fn total_excess(&self) -> f64 {
        self.shapes.iter().map(TriangleShape::excess).sum()
    }

    /// `sum delta0 - sum (theta_v - 2 pi) - 2 pi chi`.
    pub fn identity_residual(&self) -> f64 {
        let defects: f64 = self.cone_angles.iter().map(|t| t - 2.0 * PI).sum();
        self.total_excess() - defects - 2.0 * PI * self.triangulation.euler_characteristic() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeAngleReport {
    pub min_angle: f64,
    /// Interior vertices with angle below `2 pi - ANGLE_TOL`.
    pub violators: Vec<(usize, f64)>,
    pub pass: bool,
}

/// PASS iff every interior vertex has total angle at least `2 pi`.
pub fn cone_angle_check(cs: &ConeSurface) -> ConeAngleReport {
    let mut min_angle = f64::INFINITY;
    let mut violators = Vec::new();
    for (v, &theta) in cs.cone_angles.iter().enumerate() {
        if !cs.interior[v] {
            continue;
        }
        min_angle = min_angle.min(theta);
        if theta < 2.0 * PI - ANGLE_TOL {
            violators.push((v, theta));
        }
    }
    let pass = violators.is_empty();
    ConeAngleReport { min_angle, violators, pass }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcessReport {
    pub total_excess: f64,
    pub euler_identity_residual: f64,
    /// `2 pi chi`.
    pub bound: f64,
    pub pass: bool,
}

/// Total excess against `2 pi chi`, on closed surfaces.
pub fn excess_budget(cs: &ConeSurface) -> Result<ExcessReport> {
    if !cs.triangulation.closed {
        return Err(Error::BadCombinatorics("excess budget needs a closed surface".into()));
    }
    let total_excess = cs.total_excess();
    let bound = 2.0 * PI * cs.triangulation.euler_characteristic() as f64;
    Ok(ExcessReport {
        total_excess,
        euler_identity_residual: cs.identity_residual(),
        bound,
        pass: total_excess >= bound - ANGLE_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleGapReport {
    pub comparison_angle: f64,
    pub source_angle: f64,
    /// `comparison angle - source angle`.
    pub gap: f64,
    /// `-area(shape) - source excess`.
    pub bound: f64,
    pub pass: bool,
}

/// Compares a source angle with the matching angle of its comparison
/// triangle: the gap may not exceed `-area(shape) - delta0_source`.
pub fn angle_gap_check(alpha_source: f64, shape: &TriangleShape, corner: usize, source_excess: f64) -> AngleGapReport {
    let comparison = shape.angles()[corner % 3];
    let gap = comparison - alpha_source;
    let bound = -crate::hyp2::triangle_area(shape) - source_excess;
    AngleGapReport { comparison_angle: comparison, source_angle: alpha_source, gap, bound, pass: gap <= bound + ANGLE_TOL }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChordBoundReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest `l / (sinh(eps) theta)`.
    pub max_ratio: f64,
    /// `(eps, x, theta, l)` at the largest ratio.
    pub worst: [f64; 4],
}

/// Fuzzes the isosceles chord bound `l <= sinh(eps) theta` over random
/// `eps in (0, max_epsilon]`, legs `x <= eps` and apex angles `theta in [0, pi]`.
pub fn chord_bound_fuzz(samples: usize, max_epsilon: f64, seed: u64) -> ChordBoundReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ChordBoundReport { samples, violations: 0, max_ratio: 0.0, worst: [0.0; 4] };
    for _ in 0..samples {
        let eps = max_epsilon * (1.0 - rng.gen::<f64>());
        let x = eps * rng.gen::<f64>();
        let theta = PI * rng.gen::<f64>();
        let l = isosceles_chord(x, theta);
        let bound = eps.sinh() * theta;
        if l > bound + 1e-12 {
            report.violations += 1;
        }
        if bound > 0.0 && l / bound > report.max_ratio {
            report.max_ratio = l / bound;
            report.worst = [eps, x, theta, l];
        }
    }
    report
}

/// A metric on a closed surface given through its universal cover, the
/// hyperbolic plane, used as the target of the approximation checks.
pub trait SourceMetric: Send + Sync {
    /// Distance between nearby points of the cover (closer than the
    /// injectivity estimate).
    fn local_distance(&self, x: &H2Point, y: &H2Point) -> f64;
    /// Distance in the quotient surface.
    fn distance(&self, x: &H2Point, y: &H2Point) -> Result<f64>;
    /// Point at fraction `t` along the source geodesic from `x` to `y`.
    fn geodesic_point(&self, x: &H2Point, y: &H2Point, t: f64) -> H2Point;
    /// Absolute accuracy of the distances.
    fn tolerance(&self) -> f64;
    /// Below this scale, source triangles are simple.
    fn injectivity(&self) -> f64;
    fn group(&self) -> &FuchsianGroup;
    /// Angle at `o` between the geodesics to `x` and `y`.
    fn angle(&self, o: &H2Point, x: &H2Point, y: &H2Point, scale: f64) -> Result<f64> {
        extrapolated_angle(self, o, x, y, scale)
    }
}

/// Comparison angles at `o` for points at source distance `t` along both
/// geodesics, `t in {scale/4, scale/8, scale/16}`, extrapolated to `t = 0`
/// assuming an even expansion in `t`.
pub fn extrapolated_angle<S: SourceMetric + ?Sized>(
    source: &S,
    o: &H2Point,
    x: &H2Point,
    y: &H2Point,
    scale: f64,
) -> Result<f64> {
    let (dx, dy) = (source.local_distance(o, x), source.local_distance(o, y));
    let at = |t: f64| -> Result<f64> {
        let a = source.geodesic_point(o, x, t / dx);
        let b = source.geodesic_point(o, y, t / dy);
        comparison_angle(source.local_distance(o, &a), source.local_distance(o, &b), source.local_distance(&a, &b))
    };
    let (a1, a2, a3) = (at(scale / 4.0)?, at(scale / 8.0)?, at(scale / 16.0)?);
    let r1 = (4.0 * a2 - a1) / 3.0;
    let r2 = (4.0 * a3 - a2) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}

/// `scale * d_H2` on a hyperbolic quotient: the hyperbolic surface itself
/// (scale 1) or the induced metric of a constant height function `u = R`
/// (scale `cos R`).
#[derive(Debug, Clone)]
pub struct ScaledHyperbolic {
    scale: f64,
    group: FuchsianGroup,
    systole: f64,
}

impl ScaledHyperbolic {
    pub fn new(group: FuchsianGroup, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::OutOfRange { name: "scale", value: scale });
        }
        if group.domain().is_none() {
            return Err(Error::UnsupportedSource("group has no fundamental polygon".into()));
        }
        let systole = group.systole_estimate(4.min(crate::fuchsian::DEFAULT_BALL_CAP))?;
        Ok(Self { scale, group, systole })
    }

    pub fn hyperbolic(group: FuchsianGroup) -> Result<Self> {
        Self::new(group, 1.0)
    }

    /// Induced metric of the constant height `u = height`.
    pub fn constant_height(group: FuchsianGroup, height: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&height) {
            return Err(Error::OutOfRange { name: "height", value: height });
        }
        Self::new(group, height.cos())
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl SourceMetric for ScaledHyperbolic {
    fn local_distance(&self, x: &H2Point, y: &H2Point) -> f64 {
        self.scale * h2_distance(x, y)
    }
    fn distance(&self, x: &H2Point, y: &H2Point) -> Result<f64> {
        Ok(self.scale * self.group.quotient_h2_distance(x, y)?)
    }
    fn geodesic_point(&self, x: &H2Point, y: &H2Point, t: f64) -> H2Point {
        x.lerp(y, t)
    }
    fn tolerance(&self) -> f64 {
        1e-12
    }
    fn injectivity(&self) -> f64 {
        self.scale * self.systole / 2.0
    }
    fn group(&self) -> &FuchsianGroup {
        &self.group
    }
    /// Scaling preserves angles, so this is the hyperbolic angle.
    fn angle(&self, o: &H2Point, x: &H2Point, y: &H2Point, _scale: f64) -> Result<f64> {
        comparison_angle(h2_distance(o, x), h2_distance(o, y), h2_distance(x, y))
    }
}

/// Geodesic triangulation of a quotient surface by source-metric lengths,
/// with the lifts used to build it.
#[derive(Debug, Clone)]
pub struct QuotientTriangulation {
    triangulation: MetricTriangulation,
    /// A lift of each vertex.
    vertex_points: Vec<H2Point>,
    /// Corner lifts of each triangle, counter-clockwise.
    triangle_lifts: Vec<[H2Point; 3]>,
    /// Lifts of each edge's endpoints in canonical direction.
    edge_lifts: Vec<[H2Point; 2]>,
    levels: usize,
}

impl QuotientTriangulation {
    pub fn triangulation(&self) -> &MetricTriangulation {
        &self.triangulation
    }

    pub fn vertex_points(&self) -> &[H2Point] {
        &self.vertex_points
    }

    pub fn triangle_lifts(&self) -> &[[H2Point; 3]] {
        &self.triangle_lifts
    }

    pub fn edge_lifts(&self) -> &[[H2Point; 2]] {
        &self.edge_lifts
    }

    /// Number of midpoint subdivisions applied to the octagon fan.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Source point of a node of a [`ConeDistanceField`] built with
    /// `steiner` points per edge.
    pub fn node_point<S: SourceMetric + ?Sized>(&self, source: &S, steiner: usize, node: usize) -> H2Point {
        let n = self.triangulation.vertex_count;
        if node < n {
            return self.vertex_points[node];
        }
        let (e, j) = ((node - n) / steiner, (node - n) % steiner + 1);
        let [a, b] = self.edge_lifts[e];
        source.geodesic_point(&a, &b, j as f64 / (steiner + 1) as f64)
    }

    /// Largest source distance between sampled boundary points of one
    /// triangle, over all triangles.
    pub fn diameter_audit<S: SourceMetric + ?Sized>(&self, source: &S, per_side: usize) -> f64 {
        self.triangle_lifts
            .par_iter()
            .map(|lift| {
                let mut pts = Vec::with_capacity(3 * per_side);
                for i in 0..3 {
                    for k in 0..per_side {
                        pts.push(source.geodesic_point(&lift[i], &lift[(i + 1) % 3], k as f64 / per_side as f64));
                    }
                }
                let mut d: f64 = 0.0;
                for i in 0..pts.len() {
                    for j in i + 1..pts.len() {
                        d = d.max(source.local_distance(&pts[i], &pts[j]));
                    }
                }
                d
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Triangulates the quotient by the fan of the fundamental octagon from its
/// center, refined by midpoint subdivision until every edge is shorter than
/// `epsilon` in the source metric.
pub fn triangulate_quotient<S: SourceMetric + ?Sized>(source: &S, epsilon: f64) -> Result<QuotientTriangulation> {
    let limit = source.injectivity();
    if !(epsilon > 0.0) || epsilon >= limit {
        return Err(Error::EpsilonTooLarge { epsilon, limit });
    }
    let group = source.group();
    let domain = group
        .domain()
        .ok_or_else(|| Error::UnsupportedSource("group has no fundamental polygon".into()))?
        .to_vec();
    let n = domain.len();
    if n % 2 != 0 || group.generators().len() * 2 != n {
        return Err(Error::UnsupportedSource("polygon sides must be paired opposite each other".into()));
    }
    let half = n / 2;
    // vertex 0 is the center, vertex 1 every polygon corner; spokes are
    // edges 0..n, side k and side k + n/2 are glued as edge n + k mod n/2
    let center = H2Point::origin();
    let mut tris = Vec::with_capacity(n);
    let mut sides = Vec::with_capacity(n);
    let mut lifts = Vec::with_capacity(n);
    for k in 0..n {
        let k1 = (k + 1) % n;
        tris.push([0, 1, 1]);
        sides.push([(k, true), (n + k % half, k < half), (k1, false)]);
        lifts.push([center, domain[k], domain[k1]]);
    }
    let mut edge_lifts: Vec<[H2Point; 2]> = (0..n).map(|k| [center, domain[k]]).collect();
    edge_lifts.extend((0..half).map(|k| [domain[k], domain[(k + 1) % n]]));
    let mut vertex_points = vec![center, domain[0]];
    let mut levels = 0;
    loop {
        let lengths: Vec<f64> = edge_lifts.iter().map(|[a, b]| source.local_distance(a, b)).collect();
        let max = lengths.iter().cloned().fold(0.0, f64::max);
        if max < epsilon {
            let triangulation = MetricTriangulation::new(group.genus(), vertex_points.len(), tris, sides, lengths, epsilon)?;
            return Ok(QuotientTriangulation { triangulation, vertex_points, triangle_lifts: lifts, edge_lifts, levels });
        }
        levels += 1;
        // each old edge splits into (first, second) halves around a new vertex
        let mut split: Vec<Option<(usize, usize, usize)>> = vec![None; edge_lifts.len()];
        let mut new_edges: Vec<[H2Point; 2]> = Vec::with_capacity(edge_lifts.len() * 2 + tris.len() * 3);
        let mut new_tris = Vec::with_capacity(tris.len() * 4);
        let mut new_sides = Vec::with_capacity(tris.len() * 4);
        let mut new_lifts = Vec::with_capacity(tris.len() * 4);
        for t in 0..tris.len() {
            let [a, b, c] = tris[t];
            let [pa, pb, pc] = lifts[t];
            let corner_pts = [pa, pb, pc];
            let mut mids = [0usize; 3];
            let mut mid_pts = [center; 3];
            // (first, second) halves of each side in the triangle's direction
            let mut halves = [((0, true), (0, true)); 3];
            for i in 0..3 {
                let (e, fwd) = sides[t][i];
                let p = corner_pts[i];
                let q = corner_pts[(i + 1) % 3];
                let m = source.geodesic_point(&p, &q, 0.5);
                let (first, second, mid) = *split[e].get_or_insert_with(|| {
                    let [s, f] = edge_lifts[e];
                    let ms = source.geodesic_point(&s, &f, 0.5);
                    vertex_points.push(ms);
                    new_edges.push([s, ms]);
                    new_edges.push([ms, f]);
                    (new_edges.len() - 2, new_edges.len() - 1, vertex_points.len() - 1)
                });
                mids[i] = mid;
                mid_pts[i] = m;
                halves[i] = if fwd { ((first, true), (second, true)) } else { ((second, false), (first, false)) };
            }
            let [m0, m1, m2] = mids;
            let [q0, q1, q2] = mid_pts;
            let mut inner = |p: H2Point, q: H2Point| {
                new_edges.push([p, q]);
                new_edges.len() - 1
            };
            let e01 = inner(q0, q1);
            let e12 = inner(q1, q2);
            let e02 = inner(q0, q2);
            new_tris.push([a, m0, m2]);
            new_sides.push([halves[0].0, (e02, true), halves[2].1]);
            new_lifts.push([pa, q0, q2]);
            new_tris.push([m0, b, m1]);
            new_sides.push([halves[0].1, halves[1].0, (e01, false)]);
            new_lifts.push([q0, pb, q1]);
            new_tris.push([m2, m1, c]);
            new_sides.push([(e12, false), halves[1].1, halves[2].0]);
            new_lifts.push([q2, q1, pc]);
            new_tris.push([m0, m1, m2]);
            new_sides.push([(e01, true), (e12, true), (e02, false)]);
            new_lifts.push([q0, q1, q2]);
        }
        tris = new_tris;
        sides = new_sides;
        lifts = new_lifts;
        edge_lifts = new_edges;
    }
}

/// Shortest paths on a cone surface through its vertices and `steiner`
/// evenly spaced points per edge.
///
/// Arcs join boundary points of each comparison triangle, and boundary
/// points of two triangles unfolded across their common edge whenever the
/// chord crosses that edge. Node `v < N` is vertex `v`; Steiner point `j`
/// (1-based, counted along the edge's canonical direction) of edge `e` is
/// node `N + e * steiner + j - 1`.
#[derive(Debug, Clone)]
pub struct ConeDistanceField {
    graph: Graph,
    vertex_count: usize,
    steiner: usize,
    rows: BTreeMap<usize, Vec<f64>>,
}

/// Builds the Steiner graph of `cs`. Refining from `m` to `m'` points per
/// edge gives a supergraph (distances can only decrease) when `m + 1`
/// divides `m' + 1`.
pub fn cone_distance(cs: &ConeSurface, steiner_per_edge: usize) -> Result<ConeDistanceField> {
    if steiner_per_edge == 0 {
        return Err(Error::OutOfRange { name: "steiner_per_edge", value: 0.0 });
    }
    let mt = &cs.triangulation;
    let m = steiner_per_edge;
    let nv = mt.vertex_count;
    let node_count = nv + mt.edge_count() * m;
    let steiner_node = |e: usize, j: usize| nv + e * m + j - 1;

    // boundary points of a placed triangle, skipping side `skip`
    let boundary = |t: usize, pts: &[H2Point; 3], skip: Option<usize>| -> Vec<(usize, H2Point)> {
        let mut out = Vec::with_capacity(3 + 3 * m);
        for i in 0..3 {
            if skip != Some(i) && skip != Some((i + 2) % 3) {
                out.push((mt.triangles[t][i], pts[i]));
            }
            if skip == Some(i) {
                continue;
            }
            let (e, fwd) = mt.sides[t][i];
            for j in 1..=m {
                let f = j as f64 / (m + 1) as f64;
                let f = if fwd { f } else { 1.0 - f };
                out.push((steiner_node(e, j), pts[i].lerp(&pts[(i + 1) % 3], f)));
            }
        }
        out
    };
    let placed = |t: usize| -> Result<[H2Point; 3]> {
        let [d01, d12, d20] = mt.side_lengths(t);
        place_triangle(d01, d20, d12).map_err(|_| Error::BadTriangle { index: t })
    };

    let within: Vec<(u32, u32, f64)> = (0..mt.triangles.len())
        .into_par_iter()
        .map(|t| -> Result<Vec<(u32, u32, f64)>> {
            let pts = boundary(t, &placed(t)?, None);
            let mut arcs = Vec::with_capacity(pts.len() * pts.len() / 2);
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    if pts[i].0 != pts[j].0 {
                        arcs.push((pts[i].0 as u32, pts[j].0 as u32, h2_distance(&pts[i].1, &pts[j].1)));
                    }
                }
            }
            Ok(arcs)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let uses = mt.edge_uses();
    let across: Vec<(u32, u32, f64)> = uses
        .par_iter()
        .filter_map(|u| match u[..] {
            [(t1, i1), (t2, i2)] if t1 != t2 => Some((t1, i1, t2, i2)),
            _ => None,
        })
        .map(|(t1, i1, t2, i2)| -> Result<Vec<(u32, u32, f64)>> {
            let p1 = placed(t1)?;
            let (p, q) = (p1[i1], p1[(i1 + 1) % 3]);
            // triangle 2 runs the shared edge from q to p; its third corner
            // lies to the right of p -> q
            let s2 = mt.side_lengths(t2);
            let apex = third_point(&p, &q, s2[(i2 + 1) % 3], s2[(i2 + 2) % 3], false)
                .map_err(|_| Error::BadTriangle { index: t2 })?;
            let mut p2 = [apex; 3];
            p2[i2] = q;
            p2[(i2 + 1) % 3] = p;
            let a = boundary(t1, &p1, Some(i1));
            let b = boundary(t2, &p2, Some(i2));
            let (kp, kq) = (p.klein(), q.klein());
            let mut arcs = Vec::new();
            for (na, xa) in &a {
                let ka = xa.klein();
                for (nb, xb) in &b {
                    if na != nb && segments_cross(ka, xb.klein(), kp, kq) {
                        arcs.push((*na as u32, *nb as u32, h2_distance(xa, xb)));
                    }
                }
            }
            Ok(arcs)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut arcs = within;
    arcs.extend(across);
    let graph = Graph::from_edges(node_count, &arcs);
    if let Some(v) = graph.first_unreachable() {
        return Err(Error::DisconnectedMesh(v));
    }
    Ok(ConeDistanceField { graph, vertex_count: nv, steiner: m, rows: BTreeMap::new() })
}

/// Proper crossing of the open segments `ab` and `pq` in the plane.
fn segments_cross(a: [f64; 2], b: [f64; 2], p: [f64; 2], q: [f64; 2]) -> bool {
    let orient = |o: [f64; 2], u: [f64; 2], v: [f64; 2]| (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0]);
    let (d1, d2) = (orient(p, q, a), orient(p, q, b));
    let (d3, d4) = (orient(a, b, p), orient(a, b, q));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl ConeDistanceField {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn arc_count(&self) -> usize {
        self.graph.arc_count()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn steiner_per_edge(&self) -> usize {
        self.steiner
    }

    /// Node of Steiner point `j` (1-based) on edge `e`.
    pub fn steiner_node(&self, e: usize, j: usize) -> usize {
        self.vertex_count + e * self.steiner + j - 1
    }

    /// Runs single-source shortest paths from every new source, in parallel.
    pub fn compute_sources(&mut self, sources: &[usize]) {
        let mut todo: Vec<usize> = sources.iter().copied().filter(|s| !self.rows.contains_key(s)).collect();
        todo.sort_unstable();
        todo.dedup();
        let graph = &self.graph;
        let rows: Vec<(usize, Vec<f64>)> = todo.par_iter().map(|&s| (s, graph.dijkstra(s))).collect();
        self.rows.extend(rows);
    }

    pub fn row(&self, source: usize) -> Option<&[f64]> {
        self.rows.get(&source).map(Vec::as_slice)
    }

    /// Distance between two nodes, read from the row of the smaller
    /// computed source.
    pub fn distance(&self, a: usize, b: usize) -> Option<f64> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.rows.get(&lo).map(|r| r[hi]).or_else(|| self.rows.get(&hi).map(|r| r[lo]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordComparisonReport {
    pub triangles: usize,
    pub samples: usize,
    pub epsilon: f64,
    pub min_gap: f64,
    /// Largest `gap / bound` over samples with a positive bound.
    pub max_bound_ratio: f64,
    pub violations: usize,
    /// `(triangle, a, b, gap, bound)` with the largest bound ratio.
    pub worst: (usize, f64, f64, f64, f64),
    pub tolerance: f64,
    pub pass: bool,
}

/// For points `A` on `OX` and `B` on `OY` of source triangles, checks
/// `0 <= d_H2(A', B') - d(A, B) <= -delta0 sinh(eps)`, with `A', B'` the
/// matching points of the comparison triangle and `delta0` the source
/// excess. Corner `O` cycles through the three corners.
pub fn chord_comparison_check<S: SourceMetric + ?Sized>(
    source: &S,
    qt: &QuotientTriangulation,
    triangles: &[usize],
    pairs_per_triangle: usize,
    seed: u64,
) -> Result<ChordComparisonReport> {
    let mt = &qt.triangulation;
    let eps = mt.epsilon;
    let tolerance = 1e-6 + source.tolerance();
    let per_triangle = triangles
        .par_iter()
        .map(|&t| -> Result<Vec<(usize, f64, f64, f64, f64)>> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let lift = qt.triangle_lifts[t];
            let lengths = mt.side_lengths(t);
            let mut excess = -PI;
            for i in 0..3 {
                excess += source.angle(&lift[i], &lift[(i + 1) % 3], &lift[(i + 2) % 3], eps)?;
            }
            let mut out = Vec::with_capacity(pairs_per_triangle);
            for k in 0..pairs_per_triangle {
                let c = k % 3;
                let (o, x, y) = (lift[c], lift[(c + 1) % 3], lift[(c + 2) % 3]);
                let (dox, doy, dxy) = (lengths[c], lengths[(c + 2) % 3], lengths[(c + 1) % 3]);
                let [o2, x2, y2] = place_triangle(dox, doy, dxy).map_err(|_| Error::BadTriangle { index: t })?;
                let (fa, fb): (f64, f64) = (rng.gen(), rng.gen());
                let a = source.geodesic_point(&o, &x, fa);
                let b = source.geodesic_point(&o, &y, fb);
                let gap = h2_distance(&o2.lerp(&x2, fa), &o2.lerp(&y2, fb)) - source.local_distance(&a, &b);
                out.push((t, fa * dox, fb * doy, gap, -excess * eps.sinh()));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = ChordComparisonReport {
        triangles: triangles.len(),
        samples: 0,
        epsilon: eps,
        min_gap: f64::INFINITY,
        max_bound_ratio: f64::NEG_INFINITY,
        violations: 0,
        worst: (0, 0.0, 0.0, 0.0, 0.0),
        tolerance,
        pass: true,
    };
    for s in per_triangle.into_iter().flatten() {
        let (_, _, _, gap, bound) = s;
        report.samples += 1;
        report.min_gap = report.min_gap.min(gap);
        if gap < -tolerance || gap > bound + tolerance {
            report.violations += 1;
        }
        if bound > 0.0 && gap / bound > report.max_bound_ratio {
            report.max_bound_ratio = gap / bound;
            report.worst = s;
        }
    }
    report.pass = report.violations == 0 && report.samples > 0;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceWindowReport {
    pub epsilon: f64,
    pub pairs: usize,
    pub min_error: f64,
    pub max_error: f64,
    pub max_abs_error: f64,
    /// `[-2 eps, 2 eps - 2 pi chi sinh(eps)]`.
    pub window: (f64, f64),
    pub slack: f64,
    /// `(bin start, bin end, count)` over the window.
    pub histogram: Vec<(f64, f64, usize)>,
    pub pass: bool,
}

/// Signed errors `d_cone(H', J') - d(H, J)` over node pairs, where each
/// cone node corresponds to its source point, against the window
/// `[-2 eps - slack, 2 eps - 2 pi chi sinh(eps) + slack]`.
pub fn distance_window_check<S: SourceMetric + ?Sized>(
    source: &S,
    qt: &QuotientTriangulation,
    cdf: &mut ConeDistanceField,
    pairs: &[(usize, usize)],
    slack: f64,
) -> Result<DistanceWindowReport> {
    let eps = qt.triangulation.epsilon;
    let chi = qt.triangulation.euler_characteristic() as f64;
    let sources: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    cdf.compute_sources(&sources);
    let m = cdf.steiner;
    let errors = pairs
        .par_iter()
        .map(|&(a, b)| {
            let d = source.distance(&qt.node_point(source, m, a), &qt.node_point(source, m, b))?;
            Ok(cdf.distance(a, b).expect("row computed") - d)
        })
        .collect::<Result<Vec<f64>>>()?;
    let window = (-2.0 * eps, 2.0 * eps - 2.0 * PI * chi * eps.sinh());
    let bins = 20;
    let width = (window.1 - window.0) / bins as f64;
    let mut histogram: Vec<(f64, f64, usize)> =
        (0..bins).map(|i| (window.0 + i as f64 * width, window.0 + (i + 1) as f64 * width, 0)).collect();
    for &e in &errors {
        let i = (((e - window.0) / width).floor().max(0.0) as usize).min(bins - 1);
        histogram[i].2 += 1;
    }
    let min_error = errors.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_error = errors.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pass = !errors.is_empty() && min_error >= window.0 - slack && max_error <= window.1 + slack;
    Ok(DistanceWindowReport {
        epsilon: eps,
        pairs: errors.len(),
        min_error,
        max_error,
        max_abs_error: min_error.abs().max(max_error.abs()),
        window,
        slack,
        histogram,
        pass,
    })
}

/// Steiner points per edge used with triangulations of size `epsilon`:
/// `round(0.4 / epsilon)`, at least one.
pub fn default_steiner(epsilon: f64) -> usize {
    ((0.4 / epsilon).round() as usize).max(1)
}

/// `count` distinct random node pairs of `cdf`.
pub fn sample_node_pairs(cdf: &ConeDistanceField, count: usize, sources: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cdf.node_count();
    let roots: Vec<usize> = (0..sources.max(1)).map(|_| rng.gen_range(0..n)).collect();
    (0..count)
        .map(|k| {
            let a = roots[k % roots.len()];
            let mut b = rng.gen_range(0..n);
            while b == a {
                b = rng.gen_range(0..n);
            }
            (a, b)
        })
        .collect()
}
