//! Anti-de Sitter 3-space as the quadric `b(x, x) = -1` of signature (2, 2),
//! seen through the affine chart `x -> (x1, x2, x3) / x0`.
//!
//! The quadric double covers projective AdS; representatives are normalized
//! to `b = -1` with `x0 > 0`, which trivializes the cover on the chart where
//! all surfaces of this crate live.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp2::H2Point;

pub type Vector4 = [f64; 4];

/// The unit time-like vector orthogonal to the slice `{x1 = 0}`.
pub const VERTICAL: Vector4 = [0.0, -1.0, 0.0, 0.0];

/// `-x0 y0 - x1 y1 + x2 y2 + x3 y3`.
#[inline]
pub fn bilinear_form(x: &Vector4, y: &Vector4) -> f64 {
    -x[0] * y[0] - x[1] * y[1] + x[2] * y[2] + x[3] * y[3]
}

fn max_abs(v: &Vector4) -> f64 {
    v.iter().fold(0.0f64, |m, a| m.max(a.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint4 {
    x: Vector4,
}

impl ProjectivePoint4 {
    /// Representative of a point of AdS: rescaled to `b = -1`, with `x0 > 0`
    /// whenever `x0 != 0`.
    pub fn new(v: Vector4) -> Result<Self> {
        let q = bilinear_form(&v, &v);
        if !(q < 0.0) || !q.is_finite() {
            return Err(Error::NotOnHyperboloid(q));
        }
        let mut s = 1.0 / (-q).sqrt();
        if v[0] < 0.0 {
            s = -s;
        }
        Ok(Self { x: v.map(|a| a * s) })
    }

    /// Arbitrary nonzero representative, not normalized.
    pub fn raw(v: Vector4) -> Result<Self> {
        if max_abs(&v) == 0.0 {
            return Err(Error::OutOfRange { name: "projective vector norm", value: 0.0 });
        }
        Ok(Self { x: v })
    }

    /// The slice `H0 = {x1 = 0}`: `(x0, x1, x2) -> (x0, 0, x1, x2)`.
    pub fn from_h2(p: &H2Point) -> Self {
        let c = p.coords();
        Self { x: [c[0], 0.0, c[1], c[2]] }
    }

    pub fn coords(&self) -> Vector4 {
        self.x
    }

    pub fn norm(&self) -> f64 {
        bilinear_form(&self.x, &self.x)
    }
}

/// Point of the affine chart, strictly inside the one-sheeted hyperboloid
/// `-y1^2 + y2^2 + y3^2 < 1`. The disc `D` is the slice `y1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub xbar1: f64,
    pub xbar2: f64,
    pub xbar3: f64,
}

impl ChartPoint {
    pub fn new(xbar1: f64, xbar2: f64, xbar3: f64) -> Result<Self> {
        let p = Self { xbar1, xbar2, xbar3 };
        if p.boundary_value() >= 1.0 {
            return Err(Error::OutOfRange { name: "chart quadric value", value: p.boundary_value() });
        }
        Ok(p)
    }

    /// `-y1^2 + y2^2 + y3^2`; the boundary at infinity is the level 1.
    pub fn boundary_value(&self) -> f64 {
        -self.xbar1 * self.xbar1 + self.xbar2 * self.xbar2 + self.xbar3 * self.xbar3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.xbar1, self.xbar2, self.xbar3]
    }

    /// Disc coordinates `(xbar2, xbar3)`.
    pub fn disc(&self) -> [f64; 2] {
        [self.xbar2, self.xbar3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalType {
    SpaceLike,
    TimeLike,
    LightLike,
}

pub fn affine_chart(p: &ProjectivePoint4) -> Result<ChartPoint> {
    let x = p.coords();
    if x[0].abs() <= 1e-12 * max_abs(&x) {
        return Err(Error::ChartMiss);
    }
    Ok(ChartPoint { xbar1: x[1] / x[0], xbar2: x[2] / x[0], xbar3: x[3] / x[0] })
}

/// Causal character of a tangent vector `v` at `p`, threshold `1e-10 |v|^2`.
pub fn classify_vector(p: &ProjectivePoint4, v: &Vector4) -> Result<CausalType> {
    let x = p.coords();
    let vn2: f64 = v.iter().map(|a| a * a).sum();
    let xn: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let tangency = bilinear_form(&x, v);
    if tangency.abs() > 1e-10 * vn2.sqrt() * xn {
        return Err(Error::NotTangent(tangency));
    }
    let q = bilinear_form(v, v);
    let tau = 1e-10 * vn2;
    Ok(if q > tau {
        CausalType::SpaceLike
    } else if q < -tau {
        CausalType::TimeLike
    } else {
        CausalType::LightLike
    })
}

/// Relative discriminant of the boundary quadric restricted to the
/// projective line through `a` and `b`. Positive: two boundary points;
/// zero: tangent, possibly at the chart's plane at infinity; negative: the
/// line stays inside AdS.
///
/// Computed from the form `b` on a Euclidean orthonormal basis of the plane
/// spanned by the lifts `(1, a)` and `(1, b)`, where its entries are bounded
/// by 1. Roots at infinity and far-apart points need no special case.
pub fn chart_line_discriminant(a: &ChartPoint, b: &ChartPoint) -> Result<f64> {
    let la = [1.0, a.xbar1, a.xbar2, a.xbar3];
    let lb = [1.0, b.xbar1, b.xbar2, b.xbar3];
    let dot = |x: &Vector4, y: &Vector4| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let na = dot(&la, &la).sqrt();
    let e1 = la.map(|v| v / na);
    let proj = dot(&lb, &e1);
    let mut e2 = [0, 1, 2, 3].map(|i| lb[i] - proj * e1[i]);
    let n2 = dot(&e2, &e2).sqrt();
    if n2 <= 1e-15 * dot(&lb, &lb).sqrt() {
        return Err(Error::CoincidentPoints);
    }
    e2.iter_mut().for_each(|v| *v /= n2);
    let (p, q, r) = (bilinear_form(&e1, &e1), bilinear_form(&e1, &e2), bilinear_form(&e2, &e2));
    Ok(q * q - p * r)
}

/// Geodesic type of the chart line through `a` and `b`, at relative
/// tolerance `1e-10` on the discriminant.
pub fn classify_chart_line(a: &ChartPoint, b: &ChartPoint) -> Result<CausalType> {
    let disc = chart_line_discriminant(a, b)?;
    Ok(if disc > 1e-10 {
        CausalType::SpaceLike
    } else if disc < -1e-10 {
        CausalType::TimeLike
    } else {
        CausalType::LightLike
    })
}

/// Where the chart line through `a` and `b` crosses the plane `xbar1 = 0`
/// of the disc, as disc coordinates; `None` for lines parallel to it. The
/// point may lie outside the unit disc.
pub fn chart_line_disc_crossing(a: &ChartPoint, b: &ChartPoint) -> Option<[f64; 2]> {
    let d = [b.xbar1 - a.xbar1, b.xbar2 - a.xbar2, b.xbar3 - a.xbar3];
    if d[0].abs() <= 1e-15 * (d[1].abs() + d[2].abs()) || d[0] == 0.0 {
        return None;
    }
    let t = -a.xbar1 / d[0];
    Some([a.xbar2 + t * d[1], a.xbar3 + t * d[2]])
}

/// `cos(t) x + sin(t) V` for `x` embedded in the slice `{x1 = 0}`.
pub fn cylinder_map(x: &H2Point, t: f64) -> Result<ProjectivePoint4> {
    if !(0.0..FRAC_PI_2).contains(&t) {
        return Err(Error::OutOfRange { name: "cylinder time", value: t });
    }
    Ok(cylinder_map_unchecked(x, t))
}

pub(crate) fn cylinder_map_unchecked(x: &H2Point, t: f64) -> ProjectivePoint4 {
    let (s, c) = t.sin_cos();
    let e = ProjectivePoint4::from_h2(x).coords();
    ProjectivePoint4 {
        x: [
            c * e[0] + s * VERTICAL[0],
            c * e[1] + s * VERTICAL[1],
            c * e[2] + s * VERTICAL[2],
            c * e[3] + s * VERTICAL[3],
        ],
    }
}

/// `ubar = -tan(u) sqrt(1 - |xbar|^2)`.
pub fn height_to_chart(u_val: f64, xbar: [f64; 2]) -> f64 {
    let r2 = xbar[0] * xbar[0] + xbar[1] * xbar[1];
    -u_val.tan() * (1.0 - r2).max(0.0).sqrt()
}

/// Inverse of [`height_to_chart`] on the open disc.
pub fn chart_to_height(ubar: f64, xbar: [f64; 2]) -> f64 {
    let r2 = xbar[0] * xbar[0] + xbar[1] * xbar[1];
    (-ubar / (1.0 - r2).sqrt()).atan()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn bilinear_examples() {
        assert_eq!(bilinear_form(&[1.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0]), -1.0);
        assert_eq!(bilinear_form(&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 1.0, 0.0]), 1.0);
        for s in [-3.0f64, 0.0, 0.7, 5.0] {
            let x = [s.cosh(), 0.0, s.sinh(), 0.0];
            assert!((bilinear_form(&x, &x) + 1.0).abs() < 1e-12 * s.cosh().powi(2));
        }
    }

    #[test]
    fn chart_examples() {
        let c = affine_chart(&ProjectivePoint4::raw([2.0, 1.0, 1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(c.as_array(), [0.5, 0.5, 0.0]);
        let o = affine_chart(&ProjectivePoint4::new([1.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(o.as_array(), [0.0, 0.0, 0.0]);
        assert_eq!(affine_chart(&ProjectivePoint4::new([0.0, 1.0, 0.0, 0.0]).unwrap()), Err(Error::ChartMiss));
    }

    #[test]
    fn normalization_flips_sign() {
        let p = ProjectivePoint4::new([-2.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(p.coords()[0] > 0.0);
        assert!((p.norm() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn vector_classification() {
        let p = ProjectivePoint4::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(classify_vector(&p, &[0.0, 0.0, 1.0, 0.0]).unwrap(), CausalType::SpaceLike);
        assert_eq!(classify_vector(&p, &[0.0, 1.0, 0.0, 0.0]).unwrap(), CausalType::TimeLike);
        assert_eq!(classify_vector(&p, &[0.0, 1.0, 1.0, 0.0]).unwrap(), CausalType::LightLike);
        assert!(matches!(classify_vector(&p, &[1.0, 0.0, 0.0, 0.0]), Err(Error::NotTangent(_))));
    }

    #[test]
    fn chart_line_examples() {
        let a = ChartPoint::new(0.0, 0.5, 0.0).unwrap();
        let b = ChartPoint::new(0.0, -0.5, 0.0).unwrap();
        assert_eq!(classify_chart_line(&a, &b).unwrap(), CausalType::SpaceLike);
        let o = ChartPoint::new(0.0, 0.0, 0.0).unwrap();
        let up = ChartPoint::new(0.5, 0.0, 0.0).unwrap();
        assert_eq!(classify_chart_line(&o, &up).unwrap(), CausalType::TimeLike);
        // tangent direction at a point near the circle, solved from disc = 0:
        // A = 1 - d1^2 must vanish, so d1 = 1 for d = (d1, 0, 1).
        let r = 1.0 - 1e-9;
        let p = ChartPoint::new(0.0, r, 0.0).unwrap();
        let q = ChartPoint::new(1.0, r, 1.0).unwrap();
        assert_eq!(classify_chart_line(&p, &q).unwrap(), CausalType::LightLike);
        assert_eq!(classify_chart_line(&p, &p), Err(Error::CoincidentPoints));
    }

    #[test]
    fn cylinder_examples() {
        let x = H2Point::from_polar(0.8, 0.4);
        let p0 = cylinder_map(&x, 0.0).unwrap();
        assert_eq!(p0.coords(), ProjectivePoint4::from_h2(&x).coords());
        let c = affine_chart(&cylinder_map(&H2Point::origin(), FRAC_PI_4).unwrap()).unwrap();
        assert!((c.xbar1 + 1.0).abs() < 1e-15);
        assert!(c.xbar2.abs() < 1e-15 && c.xbar3.abs() < 1e-15);
        assert!(cylinder_map(&x, FRAC_PI_2).is_err());
        assert!(cylinder_map(&x, -0.1).is_err());
        // the chart image is a vertical line over the Klein point of x
        let k = x.klein();
        for t in [0.1, 0.6, 1.2] {
            let c = affine_chart(&cylinder_map(&x, t).unwrap()).unwrap();
            assert!((c.xbar2 - k[0]).abs() < 1e-14 && (c.xbar3 - k[1]).abs() < 1e-14);
            assert!((c.xbar1 - height_to_chart(t, k)).abs() < 1e-14);
        }
    }

    #[test]
    fn height_examples() {
        assert_eq!(height_to_chart(0.0, [0.3, 0.2]), 0.0);
        assert!((height_to_chart(FRAC_PI_4, [0.0, 0.0]) + 1.0).abs() < 1e-15);
        // constant height: half ellipsoid ubar^2 / tan^2 R + |xbar|^2 = 1
        let r = 0.9f64;
        for k in 0..20 {
            let rad = k as f64 / 20.0;
            let xb = [rad * 0.6, rad * 0.8];
            let ub = height_to_chart(r, xb);
            assert!(ub <= 0.0);
            assert!((ub * ub / r.tan().powi(2) + rad * rad - 1.0).abs() < 1e-14);
        }
    }
}
