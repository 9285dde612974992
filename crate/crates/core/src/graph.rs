//! Weighted undirected graphs in compressed adjacency form, with Dijkstra.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy)]
struct Entry {
    dist: f64,
    node: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties broken by node index for determinism
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

/// Undirected graph; arcs are stored in both directions.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl Graph {
    /// Builds from an undirected edge list `(a, b, w)`.
    pub fn from_edges(nodes: usize, edges: &[(u32, u32, f64)]) -> Self {
        let mut degree = vec![0usize; nodes + 1];
        for &(a, b, _) in edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = vec![0usize; nodes + 1];
        for i in 0..nodes {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[nodes]];
        let mut weights = vec![0.0; offsets[nodes]];
        for &(a, b, w) in edges {
            let (a, b) = (a as usize, b as usize);
            targets[fill[a]] = b as u32;
            weights[fill[a]] = w;
            fill[a] += 1;
            targets[fill[b]] = a as u32;
            weights[fill[b]] = w;
            fill[b] += 1;
        }
        Self { offsets, targets, weights }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()].iter().zip(&self.weights[r]).map(|(&t, &w)| (t as usize, w))
    }

    /// Single-source shortest paths; unreachable nodes get `+inf`.
    pub fn dijkstra(&self, source: usize) -> Vec<f64> {
        self.dijkstra_multi(&[(source, 0.0)])
    }

    /// Shortest paths from several seeded sources with initial offsets.
    pub fn dijkstra_multi(&self, seeds: &[(usize, f64)]) -> Vec<f64> {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        for &(s, d0) in seeds {
            if d0 < dist[s] {
                dist[s] = d0;
                heap.push(Entry { dist: d0, node: s as u32 });
            }
        }
        while let Some(Entry { dist: d, node }) = heap.pop() {
            let v = node as usize;
            if d > dist[v] {
                continue;
            }
            for (t, w) in self.neighbors(v) {
                let nd = d + w;
                if nd < dist[t] {
                    dist[t] = nd;
                    heap.push(Entry { dist: nd, node: t as u32 });
                }
            }
        }
        dist
    }

    /// First unreachable node from node 0, if any.
    pub fn first_unreachable(&self) -> Option<usize> {
        let n = self.node_count();
        if n == 0 {
            return None;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for (t, _) in self.neighbors(v) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}
