//! C-convex height functions over H2, the Lorentzian length of curves on
//! their graphs, and the induced distance computed on geodesic meshes.

mod distance;
mod function;
mod length;
mod mesh;

pub use distance::{mesh_tolerance, InducedDistanceField};
pub use function::{chain_differential, CConvexFunction, ChartCone, ChartProfile, Envelope, InvariantReport, SupportPiece};
pub use length::{
    curve_length, klein_polygon_contains, length_convergence_check, segment_length, spacelike_check,
    LengthConvergenceReport, SampleRegion, SpacelikeReport, SpacelikeWitness, PANEL_LENGTH, SPACELIKE_SLACK,
};
pub use mesh::{stencil_offsets, GeodesicMesh, MeshParams, MeshRegion};

/// Edge weights of `mesh` under `u`, ready for shortest-path queries.
pub fn induced_distance(u: &CConvexFunction, mesh: std::sync::Arc<GeodesicMesh>) -> crate::Result<InducedDistanceField> {
    InducedDistanceField::new(u, mesh)
}
