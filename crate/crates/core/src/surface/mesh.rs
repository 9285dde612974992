use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::length::SampleRegion;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hyp2::{h2_distance, lorentz_cross, minkowski, H2Point};

/// Region a mesh must cover.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshRegion {
    /// Disc of the given radius about the origin.
    Disc(f64),
    /// Convex polygon, vertices counter-clockwise.
    Polygon(Vec<H2Point>),
}

impl MeshRegion {
    fn outer_radius(&self) -> f64 {
        match self {
            MeshRegion::Disc(r) => *r,
            MeshRegion::Polygon(vs) => vs.iter().map(|v| v.radius()).fold(0.0, f64::max),
        }
    }

    pub fn sampler(&self) -> SampleRegion {
        match self {
            MeshRegion::Disc(r) => SampleRegion::disc(*r),
            MeshRegion::Polygon(vs) => SampleRegion::Polygon(vs.clone()),
        }
    }
}

/// Signed distance tests against the sides of a convex polygon.
#[derive(Debug, Clone)]
struct HalfPlanes(Vec<[f64; 3]>);

impl HalfPlanes {
    fn new(vs: &[H2Point]) -> Self {
        let n = vs.len();
        let normals = (0..n)
            .map(|i| {
                let (a, b) = (vs[i].coords(), vs[(i + 1) % n].coords());
                let m = lorentz_cross(&a, &b);
                let s = minkowski(&m, &m).sqrt();
                let mut m = [m[0] / s, m[1] / s, m[2] / s];
                // orient so that the opposite vertices lie on the negative side
                let probe = vs[(i + n / 2) % n].coords();
                if minkowski(&m, &probe) > 0.0 {
                    m = [-m[0], -m[1], -m[2]];
                }
                m
            })
            .collect();
        Self(normals)
    }

    /// Largest signed distance to the side lines (negative inside).
    fn excess(&self, x: &H2Point) -> f64 {
        let p = x.coords();
        self.0.iter().map(|n| minkowski(n, &p).asinh()).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Build parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshParams {
    /// Target covering radius.
    pub covering_radius: f64,
    /// Grid neighbors `(a, b)` with `a^2 + b^2 <= k^2` are joined; larger
    /// `k` reduces the angular bias of graph paths.
    pub stencil: i32,
}

impl MeshParams {
    pub fn new(covering_radius: f64, stencil: i32) -> Self {
        Self { covering_radius, stencil }
    }
}

/// Vertices on a square grid in Poincaré coordinates joined by H2
/// geodesic edges.
#[derive(Debug, Clone)]
pub struct GeodesicMesh {
    vertices: Vec<H2Point>,
    edges: Vec<(u32, u32, f64)>,
    covering_radius: f64,
    spacing: f64,
    stencil: i32,
    half: i32,
    grid: Vec<u32>,
    region: MeshRegion,
}

/// Half of the nonzero offsets of norm at most `k`. Non-primitive offsets
/// are kept: grid points on a Euclidean line are not on an H2 geodesic, so
/// a chain of short collinear edges is longer than the direct edge.
pub fn stencil_offsets(k: i32) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for a in 0..=k {
        for b in -k..=k {
            if (a == 0 && b <= 0) || a * a + b * b > k * k {
                continue;
            }
            out.push((a, b));
        }
    }
    out
}

const MISSING: u32 = u32::MAX;

impl GeodesicMesh {
    pub fn build(region: MeshRegion, params: MeshParams) -> Result<Self> {
        let h = params.covering_radius;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::OutOfRange { name: "covering radius", value: h });
        }
        if params.stencil < 1 {
            return Err(Error::OutOfRange { name: "stencil", value: params.stencil as f64 });
        }
        // Cells have H2 diameter at most 2h, so a margin of 2h guarantees
        // every region point sits in a cell with all corners kept.
        let margin = 2.0 * h;
        let reach = region.outer_radius() + margin;
        let lambda = 1.0 + reach.cosh();
        let spacing = std::f64::consts::SQRT_2 * h / lambda;
        let rho = (reach / 2.0).tanh();
        let half = (rho / spacing).ceil() as i32 + 1;
        let side = (2 * half + 1) as usize;
        let planes = match &region {
            MeshRegion::Polygon(vs) => Some(HalfPlanes::new(vs)),
            MeshRegion::Disc(_) => None,
        };
        let keep = |x: &H2Point| match (&region, &planes) {
            (MeshRegion::Disc(r), _) => x.radius() <= r + margin,
            (_, Some(p)) => p.excess(x) <= margin,
            _ => false,
        };
        let rows: Vec<Vec<(i32, i32, H2Point)>> = (-half..=half)
            .into_par_iter()
            .map(|i| {
                (-half..=half)
                    .filter_map(|j| {
                        let z = [i as f64 * spacing, j as f64 * spacing];
                        if z[0] * z[0] + z[1] * z[1] > rho * rho {
                            return None;
                        }
                        let x = H2Point::from_poincare(z).ok()?;
                        keep(&x).then_some((i, j, x))
                    })
                    .collect()
            })
            .collect();
        let mut grid = vec![MISSING; side * side];
        let mut vertices = Vec::new();
        for (i, j, x) in rows.into_iter().flatten() {
            grid[((i + half) as usize) * side + (j + half) as usize] = vertices.len() as u32;
            vertices.push(x);
        }
        if vertices.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut mesh = Self {
            vertices,
            edges: Vec::new(),
            covering_radius: h,
            spacing,
            stencil: params.stencil,
            half,
            grid,
            region,
        };
        let offsets = stencil_offsets(params.stencil);
        let cells: Vec<(i32, i32)> = (0..mesh.vertices.len()).map(|v| mesh.cell_of_vertex(v)).collect();
        let per_vertex: Vec<Vec<(u32, u32, f64)>> = cells
            .par_iter()
            .enumerate()
            .map(|(v, &(i, j))| {
                offsets
                    .iter()
                    .filter_map(|&(a, b)| {
                        let w = mesh.vertex_at(i + a, j + b)?;
                        Some((v as u32, w as u32, h2_distance(&mesh.vertices[v], &mesh.vertices[w])))
                    })
                    .collect()
            })
            .collect();
        mesh.edges = per_vertex.into_iter().flatten().collect();
        if let Some(v) = mesh.hyperbolic_graph().first_unreachable() {
            return Err(Error::DisconnectedMesh(v));
        }
        Ok(mesh)
    }

    fn side(&self) -> usize {
        (2 * self.half + 1) as usize
    }

    fn cell_of_vertex(&self, v: usize) -> (i32, i32) {
        let z = self.vertices[v].poincare();
        ((z[0] / self.spacing).round() as i32, (z[1] / self.spacing).round() as i32)
    }

    fn vertex_at(&self, i: i32, j: i32) -> Option<usize> {
        if i.abs() > self.half || j.abs() > self.half {
            return None;
        }
        let k = ((i + self.half) as usize) * self.side() + (j + self.half) as usize;
        let v = self.grid[k];
        (v != MISSING).then_some(v as usize)
    }

    pub fn vertices(&self) -> &[H2Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Guaranteed covering radius of the region.
    pub fn covering_radius(&self) -> f64 {
        self.covering_radius
    }

    /// Euclidean grid spacing in Poincaré coordinates.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn stencil(&self) -> i32 {
        self.stencil
    }

    pub fn region(&self) -> &MeshRegion {
        &self.region
    }

    pub fn hyperbolic_graph(&self) -> Graph {
        Graph::from_edges(self.vertices.len(), &self.edges)
    }

    /// Vertices whose grid cell lies within `cells` steps of `x`'s cell.
    pub fn vertices_near(&self, x: &H2Point, cells: i32) -> Vec<usize> {
        let z = x.poincare();
        let ci = (z[0] / self.spacing).round() as i32;
        let cj = (z[1] / self.spacing).round() as i32;
        let mut out = Vec::new();
        for i in ci - cells..=ci + cells {
            for j in cj - cells..=cj + cells {
                if let Some(v) = self.vertex_at(i, j) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Nearest vertex among the surrounding cells.
    pub fn nearest_vertex(&self, x: &H2Point) -> Option<(usize, f64)> {
        self.vertices_near(x, 1)
            .into_iter()
            .map(|v| (v, h2_distance(x, &self.vertices[v])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Largest sampled distance from a region point to the nearest vertex.
    pub fn measured_covering_radius(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sampler = self.region.sampler();
        (0..samples)
            .map(|_| {
                let x = sampler.sample(&mut rng);
                self.nearest_vertex(&x).map_or(f64::INFINITY, |(_, d)| d)
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc {
            schema: &'static str,
            version: u32,
            covering_radius: f64,
            spacing: f64,
            stencil: i32,
            vertices: Vec<[f64; 3]>,
            edges: Vec<(u32, u32, f64)>,
        }
        let doc = Doc {
            schema: "adscurv.mesh",
            version: 1,
            covering_radius: self.covering_radius,
            spacing: self.spacing,
            stencil: self.stencil,
            vertices: self.vertices.iter().map(|v| v.coords()).collect(),
            edges: self.edges.clone(),
        };
        serde_json::to_string(&doc).expect("mesh serializes")
    }
}
