use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate triangle with sides ({0}, {1}, {2})")]
    DegenerateTriangle(f64, f64, f64),
    #[error("point is not time-like in Minkowski space (pairing {0})")]
    NotOnHyperboloid(f64),
    #[error("projective point lies on the plane x0 = 0, outside the affine chart")]
    ChartMiss,
    #[error("vector is not tangent to the quadric (b(p, v) = {0})")]
    NotTangent(f64),
    #[error("chart points coincide")]
    CoincidentPoints,
    #[error("parameter {name} = {value} outside its admissible range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("segment {segment} is not space-like on the graph (integrand {value:e})")]
    NonSpacelikeSegment { segment: usize, value: f64 },
    #[error("mesh is disconnected: vertex {0} unreachable")]
    DisconnectedMesh(usize),
    #[error("mesh is empty")]
    EmptyMesh,
    #[error("function {index} exceeds the common bound {bound} (value {value})")]
    NotUniformlyBounded { index: usize, bound: f64, value: f64 },
    #[error("isometry is not hyperbolic (|trace| = {0})")]
    NotHyperbolic(f64),
    #[error("matrix determinant {0} is not 1")]
    NotUnimodular(f64),
    #[error("relator evaluates to a matrix at distance {0} from the identity")]
    RelatorMismatch(f64),
    #[error("word ball radius {radius} exceeds the cap {cap}")]
    BallTooLarge { radius: usize, cap: usize },
    #[error("ball of radius {radius} is too small to certify the quotient minimum")]
    BallInsufficient { radius: usize },
    #[error("point lies outside the mesh coverage")]
    OutsideCoverage,
    #[error("triangle {index} violates the triangle inequality")]
    BadTriangle { index: usize },
    #[error("triangulation combinatorics invalid: {0}")]
    BadCombinatorics(String),
    #[error("epsilon {epsilon} is not below the injectivity estimate {limit}")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },
    #[error("cone apex outside the affine cylinder")]
    ApexOutsideCylinder,
    #[error("cap radius {rho} too large (must be below {limit})")]
    RhoTooLarge { rho: f64, limit: f64 },
    #[error("induced metric degenerate at ({0}, {1})")]
    DegenerateMetric(f64, f64),
    #[error("scaling factor {0} must lie in (0, 1)")]
    BadLambda(f64),
    #[error("unsupported surface source: {0}")]
    UnsupportedSource(String),
    #[error("schema error: {0}")]
    Schema(String),
}
