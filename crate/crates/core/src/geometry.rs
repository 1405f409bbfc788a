//! Phase-space geometry for the two settings.
//!
//! The Gabor transform lives on the plane ℂ with Lebesgue measure and the
//! twisted translations of the Weyl–Heisenberg group. The wavelet transform
//! lives on the upper half-plane, identified with the affine group
//! `z0 · z = y0 z + x0`, with left-invariant measure `dx dy / y²` and the
//! hyperbolic metric of curvature −1.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// ℂ with `dm = dx dy` and Euclidean distance.
    Plane,
    /// ℝ × ℝ⁺ with `dμ = dx dy / y²` and hyperbolic distance.
    #[serde(alias = "half-plane", alias = "half_plane")]
    HalfPlane,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Plane => f.write_str("plane"),
            Geometry::HalfPlane => f.write_str("halfplane"),
        }
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plane" => Ok(Geometry::Plane),
            "halfplane" | "half-plane" | "half_plane" => Ok(Geometry::HalfPlane),
            other => Err(Error::Parse(format!("unknown geometry `{other}`"))),
        }
    }
}

/// A point `z = x + iy` of phase space.
///
/// In the plane `x` is the time shift and `y` the frequency shift; in the
/// half-plane `x` is the translation and `y > 0` the scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl std::ops::Sub for PhasePoint {
    type Output = PhasePoint;

    fn sub(self, rhs: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for PhasePoint {
    type Output = PhasePoint;

    fn add(self, rhs: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// Element `(x, y)`, `y > 0`, of the affine group acting on the half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    x: f64,
    y: f64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::NotInHalfPlane { x, y });
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn point(&self) -> PhasePoint {
        PhasePoint::new(self.x, self.y)
    }

    /// `self · other = y0·other + x0`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            x: self.y * other.x + self.x,
            y: self.y * other.y,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            x: -self.x / self.y,
            y: 1.0 / self.y,
        }
    }
}

impl TryFrom<PhasePoint> for GroupElement {
    type Error = Error;

    fn try_from(p: PhasePoint) -> Result<Self> {
        GroupElement::new(p.x, p.y)
    }
}

pub fn affine_compose(z0: &GroupElement, z: &GroupElement) -> GroupElement {
    z0.compose(z)
}

/// `z0⁻¹ · z = (z − z0) / y0`.
pub fn affine_inverse_apply(z0: PhasePoint, z: PhasePoint) -> PhasePoint {
    PhasePoint::new((z.x - z0.x) / z0.y, z.y / z0.y)
}

/// `z0 · z = y0 z + x0`, as a map on points.
pub fn affine_apply(z0: PhasePoint, z: PhasePoint) -> PhasePoint {
    PhasePoint::new(z0.y * z.x + z0.x, z0.y * z.y)
}

/// `|z1 − z2| / |z1 − conj(z2)|`.
pub fn pseudo_hyperbolic_distance(z1: PhasePoint, z2: PhasePoint) -> f64 {
    let num = (z1.x - z2.x).hypot(z1.y - z2.y);
    let den = (z1.x - z2.x).hypot(z1.y + z2.y);
    num / den
}

/// Hyperbolic distance of curvature −1, `log((1 + d̄)/(1 − d̄))`.
///
/// Balls of radius `r` in this metric have `dμ`-area `4π sinh²(r/2)`.
/// Evaluated through `2 asinh(|z1 − z2| / (2√(y1 y2)))`, which stays accurate
/// both for nearby and for distant points.
pub fn hyperbolic_distance(z1: PhasePoint, z2: PhasePoint) -> f64 {
    let chord = (z1.x - z2.x).hypot(z1.y - z2.y);
    2.0 * (chord / (2.0 * (z1.y * z2.y).sqrt())).asinh()
}

/// The half-scale variant `½ log((1 + d̄)/(1 − d̄)) = atanh(d̄)`, equal to
/// half of [`hyperbolic_distance`].
pub fn beta_distance(z1: PhasePoint, z2: PhasePoint) -> f64 {
    0.5 * hyperbolic_distance(z1, z2)
}

/// `dμ`-area of a hyperbolic ball of radius `r`.
pub fn hyperbolic_ball_area(r: f64) -> f64 {
    let s = (0.5 * r).sinh();
    4.0 * PI * s * s
}

/// Unimodular factor of the twisted translation by `z0` evaluated at `z`:
/// `e^{2πi x0 (y − y0)}`.
pub fn twisted_phase(z0: PhasePoint, z: PhasePoint) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * z0.x * (z.y - z0.y))
}

/// Twisted translation `F_{z0}(z) = e^{2πi x0 (y − y0)} F(z − z0)`.
pub fn twisted_translate<F>(field: F, z0: PhasePoint) -> impl Fn(PhasePoint) -> Complex64
where
    F: Fn(PhasePoint) -> Complex64,
{
    move |z| twisted_phase(z0, z) * field(z - z0)
}

impl Geometry {
    /// Identity of the underlying group: `0` in the plane, `i` in the half-plane.
    pub fn identity(&self) -> PhasePoint {
        match self {
            Geometry::Plane => PhasePoint::new(0.0, 0.0),
            Geometry::HalfPlane => PhasePoint::new(0.0, 1.0),
        }
    }

    pub fn contains(&self, z: PhasePoint) -> bool {
        z.x.is_finite()
            && z.y.is_finite()
            && match self {
                Geometry::Plane => true,
                Geometry::HalfPlane => z.y > 0.0,
            }
    }

    pub fn validate(&self, z: PhasePoint) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::NotInHalfPlane { x: z.x, y: z.y })
        }
    }

    pub fn distance(&self, a: PhasePoint, b: PhasePoint) -> f64 {
        match self {
            Geometry::Plane => (a.x - b.x).hypot(a.y - b.y),
            Geometry::HalfPlane => hyperbolic_distance(a, b),
        }
    }

    /// Density of the invariant measure with respect to `dx dy`.
    pub fn measure_weight(&self, z: PhasePoint) -> f64 {
        match self {
            Geometry::Plane => 1.0,
            Geometry::HalfPlane => 1.0 / (z.y * z.y),
        }
    }

    pub fn ball_area(&self, r: f64) -> f64 {
        match self {
            Geometry::Plane => PI * r * r,
            Geometry::HalfPlane => hyperbolic_ball_area(r),
        }
    }

    /// Group element `Δ` carrying `base` to `z`: `z − base` in the plane,
    /// `base⁻¹ · z` in the half-plane.
    pub fn relative(&self, base: PhasePoint, z: PhasePoint) -> PhasePoint {
        match self {
            Geometry::Plane => z - base,
            Geometry::HalfPlane => affine_inverse_apply(base, z),
        }
    }

    /// Inverse of [`Geometry::relative`]: `base + Δ` or `base · Δ`.
    pub fn translate(&self, base: PhasePoint, delta: PhasePoint) -> PhasePoint {
        match self {
            Geometry::Plane => base + delta,
            Geometry::HalfPlane => affine_apply(base, delta),
        }
    }

    /// Point at distance `r` from `center` in direction `theta`.
    ///
    /// In the half-plane the ball `B(i, r)` is the Euclidean disc with center
    /// `(0, cosh r)` and radius `sinh r`; left translation by `center` carries
    /// it to `B(center, r)`.
    pub fn point_at(&self, center: PhasePoint, r: f64, theta: f64) -> PhasePoint {
        match self {
            Geometry::Plane => PhasePoint::new(center.x + r * theta.cos(), center.y + r * theta.sin()),
            Geometry::HalfPlane => {
                let local = PhasePoint::new(r.sinh() * theta.cos(), r.cosh() + r.sinh() * theta.sin());
                affine_apply(center, local)
            }
        }
    }

    /// Horizontal half-width of the ball `B(center, r)` at height `y`, or
    /// `None` when the horizontal line misses the ball.
    pub fn ball_half_width(&self, center: PhasePoint, r: f64, y: f64) -> Option<f64> {
        let (cy, rad) = match self {
            Geometry::Plane => (center.y, r),
            Geometry::HalfPlane => (center.y * r.cosh(), center.y * r.sinh()),
        };
        let dy = y - cy;
        let s = rad * rad - dy * dy;
        (s >= 0.0).then(|| s.sqrt())
    }
}
