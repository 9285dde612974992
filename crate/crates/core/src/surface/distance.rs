use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use super::length::{segment_length, PANEL_LENGTH};
use super::mesh::GeodesicMesh;
use super::CConvexFunction;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hyp2::{GeodesicSegment, H2Point};

/// Shortest-path approximation of the induced distance `d_u` on a mesh.
///
/// Edge weights are Lorentzian lengths of the lifted geodesic edges, so
/// graph distances can only overestimate `d_u` up to the path bias of the
/// mesh. Rows are computed per source on demand.
#[derive(Debug, Clone)]
pub struct InducedDistanceField {
    function: CConvexFunction,
    mesh: Arc<GeodesicMesh>,
    graph: Graph,
    weights: Vec<f64>,
    panel_length: f64,
    rows: BTreeMap<usize, Vec<f64>>,
}

/// `5 h`, the documented slack of mesh distances.
pub fn mesh_tolerance(mesh: &GeodesicMesh) -> f64 {
    5.0 * mesh.covering_radius()
}

impl InducedDistanceField {
    pub fn new(u: &CConvexFunction, mesh: Arc<GeodesicMesh>) -> Result<Self> {
        let verts = mesh.vertices();
        let weights = mesh
            .edges()
            .par_iter()
            .enumerate()
            .map(|(i, &(a, b, hyperbolic))| {
                let seg = GeodesicSegment::new(verts[a as usize], verts[b as usize]);
                // the induced length never exceeds the hyperbolic one; clamping
                // keeps quadrature roundoff from breaking that in floating point
                segment_length(u, &seg, i, PANEL_LENGTH).map(|w| w.min(hyperbolic))
            })
            .collect::<Result<Vec<f64>>>()?;
        let triples: Vec<(u32, u32, f64)> =
            mesh.edges().iter().zip(&weights).map(|(&(a, b, _), &w)| (a, b, w)).collect();
        let graph = Graph::from_edges(mesh.vertex_count(), &triples);
        if let Some(v) = graph.first_unreachable() {
            return Err(Error::DisconnectedMesh(v));
        }
        Ok(Self { function: u.clone(), mesh, graph, weights, panel_length: PANEL_LENGTH, rows: BTreeMap::new() })
    }

    pub fn function(&self) -> &CConvexFunction {
        &self.function
    }

    pub fn mesh(&self) -> &GeodesicMesh {
        &self.mesh
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panel_length(&self) -> f64 {
        self.panel_length
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

    /// Graph distance between two vertices, taken from the row of the
    /// smaller computed source so that the result is exactly symmetric.
    pub fn distance(&self, a: usize, b: usize) -> Option<f64> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.rows.get(&lo).map(|r| r[hi]).or_else(|| self.rows.get(&hi).map(|r| r[lo]))
    }

    fn links(&self, x: &H2Point) -> Result<Vec<(usize, f64)>> {
        match self.mesh.nearest_vertex(x) {
            Some((_, d)) if d <= 2.0 * self.mesh.covering_radius() => {}
            _ => return Err(Error::OutsideCoverage),
        }
        let near = self.mesh.vertices_near(x, self.mesh.stencil());
        let verts = self.mesh.vertices();
        near.into_par_iter()
            .map(|v| {
                let seg = GeodesicSegment::new(*x, verts[v]);
                Ok((v, segment_length(&self.function, &seg, 0, self.panel_length)?))
            })
            .collect()
    }

    /// Distances from an arbitrary point `x` to each target, both linked into
    /// the mesh through the vertices of the surrounding stencil box.
    pub fn point_distances(&self, x: &H2Point, targets: &[H2Point]) -> Result<Vec<f64>> {
        let seeds = self.links(x)?;
        let dist = self.graph.dijkstra_multi(&seeds);
        let near: std::collections::HashMap<usize, f64> = seeds.iter().copied().collect();
        targets
            .iter()
            .map(|y| {
                let links = self.links(y)?;
                let mut best = links.iter().map(|&(v, w)| dist[v] + w).fold(f64::INFINITY, f64::min);
                if links.iter().any(|(v, _)| near.contains_key(v)) {
                    let seg = GeodesicSegment::new(*x, *y);
                    if seg.length() > 0.0 {
                        best = best.min(segment_length(&self.function, &seg, 0, self.panel_length)?);
                    } else {
                        best = 0.0;
                    }
                }
                Ok(best)
            })
            .collect()
    }

    /// Distance matrix between the given vertices, with vertex ids as
    /// headers. Missing rows are left empty.
    pub fn to_csv(&self, ids: &[usize]) -> String {
        let mut out = String::from("vertex");
        for j in ids {
            let _ = write!(out, ",{j}");
        }
        out.push('\n');
        for &i in ids {
            let _ = write!(out, "{i}");
            for &j in ids {
                match self.distance(i, j) {
                    Some(d) => {
                        let _ = write!(out, ",{d:.12e}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}
