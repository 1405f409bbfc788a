//! Truncated phase-space grids with quadrature weights for `dm` or `dμ`.
//!
//! Plane grids are the nodes `(i·h, j·h)` inside `[−R, R]²`. Half-plane grids
//! use nodes `(i·h, e^{j·h})` with `y ∈ [y_min, y_max]`, so `dμ = dx du / y`
//! with `u = log y`. Both contain the group identity as a node.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Geometry, PhasePoint};
use crate::signals::{QuadratureSpec, Scheme};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    geometry: Geometry,
    /// Step along `x`.
    hx: f64,
    /// Step along `y` (plane) or `log y` (half-plane).
    hv: f64,
    /// Integer offsets of the first node along each axis.
    i0: i64,
    j0: i64,
    nx: usize,
    nv: usize,
    scheme: Scheme,
}

fn axis(lo: f64, hi: f64, h: f64) -> (i64, usize) {
    let first = (lo / h - 1e-9).ceil() as i64;
    let last = (hi / h + 1e-9).floor() as i64;
    (first, (last - first + 1).max(0) as usize)
}

impl PhaseGrid {
    pub fn new(geometry: Geometry, q: &QuadratureSpec) -> Result<PhaseGrid> {
        q.validate()?;
        match geometry {
            Geometry::Plane => Ok(Self::plane_box(q.radius, q.step, q.scheme)),
            Geometry::HalfPlane => Self::half_plane(q.radius, q.step, q.y_min, q.y_max, q.scheme),
        }
    }

    /// Nodes of `hℤ²` in `[−R, R]²`.
    pub fn plane_box(radius: f64, step: f64, scheme: Scheme) -> PhaseGrid {
        Self::plane_rect(-radius, radius, -radius, radius, step, scheme)
    }

    /// Nodes of `hℤ²` in `[x0, x1] × [y0, y1]`.
    pub fn plane_rect(x0: f64, x1: f64, y0: f64, y1: f64, step: f64, scheme: Scheme) -> PhaseGrid {
        let (i0, nx) = axis(x0, x1, step);
        let (j0, nv) = axis(y0, y1, step);
        PhaseGrid {
            geometry: Geometry::Plane,
            hx: step,
            hv: step,
            i0,
            j0,
            nx,
            nv,
            scheme,
        }
    }

    pub fn half_plane(radius: f64, step: f64, y_min: f64, y_max: f64, scheme: Scheme) -> Result<PhaseGrid> {
        Self::half_plane_rect(-radius, radius, y_min, y_max, step, step, scheme)
    }

    /// Nodes `(i·hx, e^{j·hu})` in `[x0, x1] × [y_min, y_max]`.
    pub fn half_plane_rect(
        x0: f64,
        x1: f64,
        y_min: f64,
        y_max: f64,
        hx: f64,
        hu: f64,
        scheme: Scheme,
    ) -> Result<PhaseGrid> {
        if !(y_min > 0.0 && y_max > y_min) {
            return Err(invalid(
                "y_min/y_max",
                format!("need 0 < y_min < y_max, got [{y_min}, {y_max}]"),
            ));
        }
        if !(hx > 0.0 && hu > 0.0) {
            return Err(invalid("step", "grid steps must be positive"));
        }
        let (i0, nx) = axis(x0, x1, hx);
        let (j0, nv) = axis(y_min.ln(), y_max.ln(), hu);
        Ok(PhaseGrid {
            geometry: Geometry::HalfPlane,
            hx,
            hv: hu,
            i0,
            j0,
            nx,
            nv,
            scheme,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.nv
    }

    pub fn len(&self) -> usize {
        self.nx * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    /// Step of the second axis: `y` in the plane, `log y` in the half-plane.
    pub fn hv(&self) -> f64 {
        self.hv
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn i_offset(&self) -> i64 {
        self.i0
    }

    pub fn j_offset(&self) -> i64 {
        self.j0
    }

    pub fn x(&self, i: usize) -> f64 {
        (self.i0 + i as i64) as f64 * self.hx
    }

    /// Second coordinate of row `j`; for the half-plane this is `y`, not `log y`.
    pub fn y(&self, j: usize) -> f64 {
        let v = (self.j0 + j as i64) as f64 * self.hv;
        match self.geometry {
            Geometry::Plane => v,
            Geometry::HalfPlane => v.exp(),
        }
    }

    /// `v = y` (plane) or `v = log y` (half-plane) of row `j`.
    pub fn v(&self, j: usize) -> f64 {
        (self.j0 + j as i64) as f64 * self.hv
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.nv).map(|j| self.y(j)).collect()
    }

    /// Flat index, x-major.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k / self.nv, k % self.nv)
    }

    pub fn point(&self, i: usize, j: usize) -> PhasePoint {
        PhasePoint::new(self.x(i), self.y(j))
    }

    pub fn point_at(&self, k: usize) -> PhasePoint {
        let (i, j) = self.coords(k);
        self.point(i, j)
    }

    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        (0..self.len()).map(move |k| self.point_at(k))
    }

    fn edge_factor(&self, i: usize, n: usize) -> f64 {
        match self.scheme {
            Scheme::Trapezoid if i == 0 || i + 1 == n => 0.5,
            _ => 1.0,
        }
    }

    /// Quadrature weight of node `(i, j)` for the geometry's measure.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let base = self.hx * self.hv * self.edge_factor(i, self.nx) * self.edge_factor(j, self.nv);
        match self.geometry {
            Geometry::Plane => base,
            // dx dy / y² = dx du / y.
            Geometry::HalfPlane => base / self.y(j),
        }
    }

    pub fn weight_at(&self, k: usize) -> f64 {
        let (i, j) = self.coords(k);
        self.weight(i, j)
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.weight_at(k)).collect()
    }

    /// Measure of the truncated domain as seen by the quadrature.
    pub fn total_measure(&self) -> f64 {
        (0..self.len()).map(|k| self.weight_at(k)).sum()
    }

    /// Fractional grid coordinates of `z`.
    pub fn fractional_index(&self, z: PhasePoint) -> (f64, f64) {
        let fi = z.x / self.hx - self.i0 as f64;
        let fv = match self.geometry {
            Geometry::Plane => z.y / self.hv,
            Geometry::HalfPlane => z.y.ln() / self.hv,
        } - self.j0 as f64;
        (fi, fv)
    }

    /// Nearest node to `z`, if `z` lies within half a cell of the grid.
    pub fn nearest(&self, z: PhasePoint) -> Option<(usize, usize)> {
        if self.geometry == Geometry::HalfPlane && z.y <= 0.0 {
            return None;
        }
        let (fi, fv) = self.fractional_index(z);
        let (i, j) = (fi.round(), fv.round());
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.nv as f64 {
            return None;
        }
        Some((i as usize, j as usize))
    }

    /// Exact node lookup: `Some` when `z` is a node up to `1e-9` of a cell.
    pub fn node_of(&self, z: PhasePoint) -> Option<(usize, usize)> {
        let (fi, fv) = self.fractional_index(z);
        let near = |f: f64| (f - f.round()).abs() < 1e-9;
        if near(fi) && near(fv) {
            self.nearest(z)
        } else {
            None
        }
    }

    /// Whether `z` lies inside the grid's bounding box.
    pub fn covers(&self, z: PhasePoint) -> bool {
        if self.is_empty() || !self.geometry.contains(z) {
            return false;
        }
        let (fi, fv) = self.fractional_index(z);
        let tol = 1e-9;
        fi >= -tol && fv >= -tol && fi <= (self.nx - 1) as f64 + tol && fv <= (self.nv - 1) as f64 + tol
    }

    /// Sub-grid keeping every `stride`-th node in each direction.
    pub fn strided_indices(&self, stride: usize) -> Vec<usize> {
        let stride = stride.max(1);
        let mut out = Vec::new();
        for i in (0..self.nx).step_by(stride) {
            for j in (0..self.nv).step_by(stride) {
                out.push(self.index(i, j));
            }
        }
        out
    }

    pub(crate) fn require(&self, geometry: Geometry) -> Result<()> {
        if self.geometry == geometry {
            Ok(())
        } else {
            Err(Error::GeometryMismatch {
                expected: geometry,
                found: self.geometry,
            })
        }
    }

    /// Minimal spacing check for ball scans of radius `r`.
    pub fn check_resolution(&self, r: f64, y_floor: f64) -> Result<()> {
        match self.geometry {
            Geometry::Plane => {
                if self.hx >= 0.25 * r || self.hv >= 0.25 * r {
                    return Err(Error::GridTooCoarse(format!(
                        "step {} must be below {} for balls of radius {r}",
                        self.hx.max(self.hv),
                        0.25 * r
                    )));
                }
            }
            Geometry::HalfPlane => {
                let limit_x = y_floor * r.sinh();
                if self.hv >= 0.25 * r || self.hx >= limit_x {
                    return Err(Error::GridTooCoarse(format!(
                        "steps (x {}, log y {}) must be below ({limit_x}, {}) for hyperbolic balls of radius {r}",
                        self.hx,
                        self.hv,
                        0.25 * r
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y(0), self.y(self.nv.saturating_sub(1)))
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x(0), self.x(self.nx.saturating_sub(1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn plane_grid_contains_origin_and_has_expected_size() {
        let g = PhaseGrid::new(Geometry::Plane, &QuadratureSpec::default()).unwrap();
        assert_eq!((g.nx(), g.ny()), (161, 161));
        let (i, j) = g.node_of(PhasePoint::new(0.0, 0.0)).unwrap();
        assert_eq!(g.point(i, j), PhasePoint::new(0.0, 0.0));
        assert!((g.total_measure() - 8.05f64.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn half_plane_grid_contains_identity() {
        let g = PhaseGrid::new(Geometry::HalfPlane, &QuadratureSpec::default()).unwrap();
        let (i, j) = g.node_of(PhasePoint::new(0.0, 1.0)).unwrap();
        let p = g.point(i, j);
        assert!(p.x.abs() < 1e-15 && (p.y - 1.0).abs() < 1e-15);
        let (lo, hi) = g.y_range();
        assert!(lo >= 1.0 / 16.0 - 1e-12 && hi <= 16.0 + 1e-12);
    }

    #[test]
    fn half_plane_weights_integrate_dmu() {
        // ∫_{-1}^{1} ∫_{1/2}^{2} dy/y² dx = 2·(2 − 1/2) = 3.
        let g = PhaseGrid::half_plane_rect(-1.0, 1.0, 0.5, 2.0, 0.001, 0.001, Scheme::Trapezoid).unwrap();
        let total: f64 = (0..g.len()).map(|k| g.weight_at(k)).sum();
        let (lo, hi) = g.y_range();
        let want = (g.x_range().1 - g.x_range().0) * (1.0 / lo - 1.0 / hi);
        assert!((total - want).abs() / want < 1e-5, "{total} vs {want}");
        assert!((want - 3.0).abs() < 0.01);
    }

    #[test]
    fn gaussian_integral_on_plane_grid() {
        let g = PhaseGrid::plane_box(4.0, 0.05, Scheme::Midpoint);
        let s: f64 = g
            .points()
            .zip(g.weights())
            .map(|(z, w)| (-PI * (z.x * z.x + z.y * z.y) / 2.0).exp() * w)
            .sum();
        assert!((s - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nearest_and_covers() {
        let g = PhaseGrid::plane_box(1.0, 0.1, Scheme::Midpoint);
        assert_eq!(
            g.nearest(PhasePoint::new(0.04, -0.96)),
            g.node_of(PhasePoint::new(0.0, -1.0))
        );
        assert!(g.nearest(PhasePoint::new(2.0, 0.0)).is_none());
        assert!(g.covers(PhasePoint::new(1.0, 1.0)));
        assert!(!g.covers(PhasePoint::new(1.01, 0.0)));
    }

    #[test]
    fn resolution_checks() {
        let coarse = PhaseGrid::plane_box(4.0, 0.3, Scheme::Midpoint);
        assert!(coarse.check_resolution(1.0, 1.0).is_err());
        let fine = PhaseGrid::plane_box(4.0, 0.05, Scheme::Midpoint);
        assert!(fine.check_resolution(1.0, 1.0).is_ok());
    }
}
