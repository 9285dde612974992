//! Builtin function, source and region specs accepted on the command line.

use std::fmt;
use std::str::FromStr;

use adscurv::conemetric::ScaledHyperbolic;
use adscurv::fuchsian::{genus2_octagon_group, octagon_vertices, random_orbit_envelope};
use adscurv::smoothing::{build_cone, smooth_cone};
use adscurv::surface::{CConvexFunction, ChartCone, MeshRegion, SampleRegion};

/// Ball radius of the group elements used for orbit envelopes.
pub const ENVELOPE_BALL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionSpec {
    Zero,
    Constant(f64),
    /// Cone over the boundary circle with the given (negative) apex chart height.
    Cone(f64),
    SmoothedCone { apex: f64, rho: f64 },
    Envelope { seed: u64 },
}

fn number(s: &str, what: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("{what}: '{s}' is not a number"))
}

impl FromStr for FunctionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (head, arg) = s.split_once(':').unwrap_or((s, ""));
        match (head, arg) {
            ("zero", "") => Ok(Self::Zero),
            ("const", a) => Ok(Self::Constant(number(a, "const")?)),
            ("cone", a) => Ok(Self::Cone(number(a, "cone")?)),
            ("smoothed-cone", a) => {
                let (h, r) = a.split_once(',').ok_or("smoothed-cone expects h0,rho")?;
                Ok(Self::SmoothedCone { apex: number(h, "smoothed-cone")?, rho: number(r, "smoothed-cone")? })
            }
            ("envelope", a) => {
                let seed = a.strip_prefix("seed=").unwrap_or(a);
                let seed = if seed.is_empty() { 0 } else { seed.parse().map_err(|_| format!("bad envelope seed '{seed}'"))? };
                Ok(Self::Envelope { seed })
            }
            _ => Err(format!(
                "unknown function spec '{s}' (expected zero, const:R, cone:h0, smoothed-cone:h0,rho or envelope:seed=N)"
            )),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Constant(r) => write!(f, "const:{r}"),
            Self::Cone(h) => write!(f, "cone:{h}"),
            Self::SmoothedCone { apex, rho } => write!(f, "smoothed-cone:{apex},{rho}"),
            Self::Envelope { seed } => write!(f, "envelope:seed={seed}"),
        }
    }
}

impl FunctionSpec {
    pub fn build(&self) -> adscurv::Result<CConvexFunction> {
        match *self {
            Self::Zero => Ok(CConvexFunction::zero()),
            Self::Constant(r) => CConvexFunction::constant(r),
            Self::Cone(h) => build_cone(h),
            Self::SmoothedCone { apex, rho } => smooth_cone(&ChartCone::new(apex, [0.0, 0.0])?, rho),
            Self::Envelope { seed } => random_orbit_envelope(&genus2_octagon_group(), seed, ENVELOPE_BALL),
        }
    }

    /// Height of a constant function, for which `d_u = cos(R) d_H2`.
    pub fn constant_height(&self) -> Option<f64> {
        match *self {
            Self::Zero => Some(0.0),
            Self::Constant(r) => Some(r),
            _ => None,
        }
    }
}

/// Source metric of the approximation pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpec {
    Hyperbolic,
    Constant(f64),
}

impl FromStr for SourceSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if matches!(s, "zero" | "u0" | "hyperbolic") => Ok(Self::Hyperbolic),
            Some(("const", a)) => Ok(Self::Constant(number(a, "const")?)),
            _ => Err(format!("unknown source '{s}' (expected u0, zero or const:R)")),
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hyperbolic => write!(f, "u0"),
            Self::Constant(r) => write!(f, "const:{r}"),
        }
    }
}

impl SourceSpec {
    pub fn build(&self) -> adscurv::Result<ScaledHyperbolic> {
        match *self {
            Self::Hyperbolic => ScaledHyperbolic::hyperbolic(genus2_octagon_group()),
            Self::Constant(r) => ScaledHyperbolic::constant_height(genus2_octagon_group(), r),
        }
    }

    pub fn is_isometric(&self) -> bool {
        matches!(self, Self::Hyperbolic | Self::Constant(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionSpec {
    Octagon,
    Disc(f64),
}

impl FromStr for RegionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "octagon" => Ok(Self::Octagon),
            Some(("disc", r)) => {
                let r = number(r, "disc")?;
                if r > 0.0 {
                    Ok(Self::Disc(r))
                } else {
                    Err(format!("disc radius must be positive, got {r}"))
                }
            }
            _ => Err(format!("unknown region '{s}' (expected octagon or disc:R)")),
        }
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Octagon => write!(f, "octagon"),
            Self::Disc(r) => write!(f, "disc:{r}"),
        }
    }
}

impl RegionSpec {
    pub fn mesh_region(&self) -> MeshRegion {
        match *self {
            Self::Octagon => MeshRegion::Polygon(octagon_vertices()),
            Self::Disc(r) => MeshRegion::Disc(r),
        }
    }

    pub fn sampler(&self) -> SampleRegion {
        self.mesh_region().sampler()
    }
}
