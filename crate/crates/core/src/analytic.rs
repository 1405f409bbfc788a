//! Numerical witnesses for the analytic characterizations of the Gaussian
//! window and the Poisson wavelets: a `∂̄` residual of the weighted Gabor
//! transform, a Laplacian residual of the weighted wavelet transform, the
//! underlying ODE identities, and Bargmann/Fock consistency checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Geometry, PhasePoint};
use crate::grid::PhaseGrid;
use crate::signals::{l2_norm, QuadratureSpec, Signal};
use crate::transforms::{bargmann_transform, fock_norm_sq, gabor_transform, wavelet_transform, PhaseField};

/// Coarsest grid step accepted by the finite-difference residuals.
pub const MAX_RESIDUAL_STEP: f64 = 0.1;
/// Width of the excluded boundary ring, in cells.
pub const BOUNDARY_RING: usize = 2;
/// Cells with `|ωF|` below this fraction of the maximum are excluded.
pub const SMALL_CELL_FRACTION: f64 = 1e-8;

/// Sign of the unimodular factor in the Fock weight, fixed by
/// [`calibrate_fock_sign`].
pub const FOCK_PHASE_SIGN: f64 = -1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: f64,
    pub weight: String,
    pub window: String,
    pub signal: String,
    pub grid: PhaseGrid,
    /// Cells that entered the norms.
    pub cells: usize,
}

/// `M(z) = e^{(π/2)|z|²} e^{iσπxy}` with `σ = −1`, adapted to a window
/// translated in time-frequency by `z₀`, so that `M G_g f` is entire when
/// `g` is the Gaussian moved by `z₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockWeight {
    pub sign: f64,
    pub shift: PhasePoint,
    /// Only nodes with `|z + z₀| ≤ radius` enter the residual.
    pub radius: f64,
}

impl Default for FockWeight {
    fn default() -> Self {
        FockWeight {
            sign: FOCK_PHASE_SIGN,
            shift: PhasePoint::new(0.0, 0.0),
            radius: f64::INFINITY,
        }
    }
}

impl FockWeight {
    pub fn shifted(shift: PhasePoint) -> FockWeight {
        FockWeight {
            shift,
            ..FockWeight::default()
        }
    }

    pub fn within(self, radius: f64) -> FockWeight {
        FockWeight { radius, ..self }
    }

    /// `M'(z) = M(z + z₀) e^{2πi y₀ x}` for the window `g_{z₀}`.
    pub fn eval(&self, z: PhasePoint) -> Complex64 {
        let (x0, y0) = (self.shift.x, self.shift.y);
        let (x, y) = (z.x + x0, z.y + y0);
        let base = Complex64::from_polar((0.5 * PI * (x * x + y * y)).exp(), self.sign * PI * x * y);
        base * Complex64::from_polar(1.0, 2.0 * PI * y0 * z.x)
    }

    fn label(&self) -> String {
        format!(
            "fock(sign={}, shift=({}, {}), radius={})",
            self.sign, self.shift.x, self.shift.y, self.radius
        )
    }
}

fn require_step(grid: &PhaseGrid, hx: f64, hv: f64) -> Result<()> {
    if hx > MAX_RESIDUAL_STEP || hv > MAX_RESIDUAL_STEP {
        return Err(Error::GridTooCoarse(format!(
            "finite-difference residuals need steps <= {MAX_RESIDUAL_STEP}, got ({hx}, {hv})"
        )));
    }
    if grid.nx() <= 2 * BOUNDARY_RING + 2 || grid.ny() <= 2 * BOUNDARY_RING + 2 {
        return Err(Error::GridTooCoarse("grid too small for the stencil".into()));
    }
    Ok(())
}

/// Relative norm of a stencil applied to `values` over the interior cells
/// selected by `keep`.
fn stencil_residual(
    grid: &PhaseGrid,
    values: &[Complex64],
    keep: impl Fn(usize, usize) -> bool,
    weight: impl Fn(usize, usize) -> f64,
    stencil: impl Fn(&dyn Fn(isize, isize) -> Complex64, usize, usize) -> Complex64,
) -> (f64, usize) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (mut num, mut den, mut cells) = (0.0, 0.0, 0);
    for i in BOUNDARY_RING..nx - BOUNDARY_RING {
        for j in BOUNDARY_RING..ny - BOUNDARY_RING {
            let v = values[grid.index(i, j)];
            if !keep(i, j) || v.norm() < SMALL_CELL_FRACTION * max {
                continue;
            }
            let at = |di: isize, dj: isize| values[grid.index((i as isize + di) as usize, (j as isize + dj) as usize)];
            let w = weight(i, j);
            num += stencil(&at, i, j).norm_sqr() * w;
            den += v.norm_sqr() * w;
            cells += 1;
        }
    }
    if den == 0.0 {
        return (0.0, 0);
    }
    ((num / den).sqrt(), cells)
}

/// `‖∂̄(M·G_g f)‖ / ‖M·G_g f‖` over the interior of a plane grid, with
/// `∂̄ = ½(∂_x + i∂_y)` by centered differences.
pub fn dbar_residual(
    g: &Signal,
    weight: &FockWeight,
    f: &Signal,
    grid: &PhaseGrid,
    q: &QuadratureSpec,
) -> Result<ResidualReport> {
    grid.require(Geometry::Plane)?;
    let h = grid.hx();
    require_step(grid, h, grid.hv())?;
    let field = gabor_transform(f, g, grid, q)?;
    let weighted: Vec<Complex64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| v * weight.eval(grid.point_at(k)))
        .collect();
    let keep = |i: usize, j: usize| (grid.point(i, j) + weight.shift).norm() <= weight.radius;
    let hv = grid.hv();
    let (residual, cells) = stencil_residual(
        grid,
        &weighted,
        keep,
        |_, _| 1.0,
        |at, _, _| {
            let dx = (at(1, 0) - at(-1, 0)) / (2.0 * h);
            let dy = (at(0, 1) - at(0, -1)) / (2.0 * hv);
            0.5 * (dx + Complex64::i() * dy)
        },
    );
    Ok(ResidualReport {
        residual,
        weight: weight.label(),
        window: g.label(),
        signal: f.label(),
        grid: grid.clone(),
        cells,
    })
}

/// Picks the sign of the unimodular Fock factor that minimizes the Gaussian
/// residual.
pub fn calibrate_fock_sign(grid: &PhaseGrid, q: &QuadratureSpec) -> Result<f64> {
    let g = Signal::gaussian();
    let f = Signal::hermite(1).translate(0.2);
    let mut best = (f64::INFINITY, 0.0);
    for sign in [-1.0, 1.0] {
        let w = FockWeight {
            sign,
            ..FockWeight::default()
        };
        let r = dbar_residual(&g, &w, &f, grid, q)?.residual;
        if r < best.0 {
            best = (r, sign);
        }
    }
    Ok(best.1)
}

/// Power weight `ω(y) = y^p` for the Laplacian residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerWeight {
    pub power: f64,
}

impl PowerWeight {
    /// `ω(y) = y^{a + 1/2}` for the wavelet `Re (t + i)^a`.
    pub fn for_exponent(a: f64) -> PowerWeight {
        PowerWeight { power: a + 0.5 }
    }
}

/// `‖y²Δ(ω·W_ψ f)‖ / ‖ω·W_ψ f‖` in `L²(dμ)` over the interior of a
/// half-plane grid. The hyperbolic Laplacian `y²Δ = y²∂_xx + ∂_uu − ∂_u` is
/// discretized on the `(x, u = log y)` nodes.
pub fn laplacian_residual(
    psi: &Signal,
    weight: PowerWeight,
    f: &Signal,
    grid: &PhaseGrid,
    q: &QuadratureSpec,
) -> Result<ResidualReport> {
    grid.require(Geometry::HalfPlane)?;
    let (hx, hu) = (grid.hx(), grid.hv());
    require_step(grid, hx, hu)?;
    let field = wavelet_transform(f, psi, grid, q)?;
    laplacian_of_field(&field, weight, psi.label(), f.label())
}

/// The Laplacian residual of an already computed wavelet transform.
pub fn laplacian_of_field(
    field: &PhaseField,
    weight: PowerWeight,
    window: String,
    signal: String,
) -> Result<ResidualReport> {
    let grid = field.grid();
    grid.require(Geometry::HalfPlane)?;
    let (hx, hu) = (grid.hx(), grid.hv());
    require_step(grid, hx, hu)?;
    let weighted: Vec<Complex64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| v * grid.point_at(k).y.powf(weight.power))
        .collect();
    let (residual, cells) = stencil_residual(
        grid,
        &weighted,
        |_, _| true,
        |i, j| grid.weight(i, j),
        |at, _, j| {
            let y = grid.y(j);
            let c = at(0, 0);
            let dxx = (at(1, 0) - 2.0 * c + at(-1, 0)) / (hx * hx);
            let duu = (at(0, 1) - 2.0 * c + at(0, -1)) / (hu * hu);
            let du = (at(0, 1) - at(0, -1)) / (2.0 * hu);
            y * y * dxx + duu - du
        },
    );
    Ok(ResidualReport {
        residual,
        weight: format!("y^{}", weight.power),
        window,
        signal,
        grid: grid.clone(),
        cells,
    })
}

/// Residual of `2tψ' + a(a−1)ψ − 2a tψ' + (t² + 1)ψ''` for a function given
/// with its first two derivatives.
pub fn ode_residual(a: f64, psi: impl Fn(f64) -> [Complex64; 3], ts: &[f64]) -> f64 {
    ts.iter()
        .map(|&t| {
            let [p, d1, d2] = psi(t);
            (2.0 * t * d1 + a * (a - 1.0) * p - 2.0 * a * t * d1 + (t * t + 1.0) * d2).norm()
        })
        .fold(0.0, f64::max)
}

/// `ψ(t) = (t + i)^a` with analytic derivatives.
pub fn power_with_derivatives(a: f64) -> impl Fn(f64) -> [Complex64; 3] {
    move |t| {
        let z = Complex64::new(t, 1.0);
        let p = z.powf(a - 2.0);
        [p * z * z, a * p * z, a * (a - 1.0) * p]
    }
}

/// Largest ODE residual of `(t + i)^a` over `ts`; the identity requires `a < −1`.
pub fn ode_check_poisson(a: f64, ts: &[f64]) -> Result<f64> {
    if !(a < -1.0) {
        return Err(invalid("a", format!("exponent must be below -1, got {a}")));
    }
    Ok(ode_residual(a, power_with_derivatives(a), ts))
}

/// Largest residual of `g'(w) = (2c₁ − 2πw) g(w)` for `g(w) = e^{2c₁w − πw²}`.
pub fn gaussian_ode_check(c1: Complex64, ws: &[f64]) -> f64 {
    ws.iter()
        .map(|&w| {
            let g = (2.0 * c1 * w - PI * w * w).exp();
            let dg = (2.0 * c1 - 2.0 * PI * w) * g;
            (dg - (2.0 * c1 - 2.0 * PI * w) * g).norm() / g.norm().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Largest `|g' − (2c₁ − 2πw) g| / max|g|` for an arbitrary signal, with
/// centered differences of step `h`, over nodes at least `2h` away from any
/// jump and inside the support.
pub fn log_derivative_residual(c1: Complex64, g: &Signal, ws: &[f64], h: f64) -> f64 {
    let jumps = g.discontinuities();
    let scale = ws.iter().map(|&w| g.eval(w).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    ws.iter()
        .filter(|&&w| jumps.iter().all(|&b| (w - b).abs() > 2.0 * h))
        .filter(|&&w| g.eval(w).norm() > 0.0)
        .map(|&w| {
            let dg = (g.eval(w + h) - g.eval(w - h)) / (2.0 * h);
            (dg - (2.0 * c1 - 2.0 * PI * w) * g.eval(w)).norm() / scale
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockReport {
    /// `max_{|z| ≤ r} |B(gaussian)(z) − 1|`.
    pub gaussian_unity: f64,
    /// `|‖Bf‖²_Fock − ‖f‖²| / ‖f‖²`.
    pub isometry: f64,
    /// `max_{|z| ≤ r} ||G f(z)| − e^{−π|z|²/2}|Bf(z)||`.
    pub pointwise: f64,
    pub radius: f64,
}

/// Bargmann transform checks on the disc `|z| ≤ unity_radius` and the full
/// disc inscribed in `grid`.
pub fn fock_consistency(f: &Signal, grid: &PhaseGrid, unity_radius: f64, q: &QuadratureSpec) -> Result<FockReport> {
    let (x0, x1) = grid.x_range();
    let (y0, y1) = grid.y_range();
    let radius = x0.abs().min(x1).min(y0.abs()).min(y1);
    let bg = bargmann_transform(&Signal::gaussian(), grid, unity_radius, q)?;
    let gaussian_unity = grid
        .points()
        .zip(bg.values())
        .filter(|(z, _)| z.norm() <= unity_radius)
        .map(|(_, v)| (v - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let bf = bargmann_transform(f, grid, radius, q)?;
    let norm_sq = l2_norm(f, q).powi(2);
    let isometry = (fock_norm_sq(&bf) - norm_sq).abs() / norm_sq;
    let gf = gabor_transform(f, &Signal::gaussian(), grid, q)?;
    let pointwise = grid
        .points()
        .zip(gf.values().iter().zip(bf.values()))
        .filter(|(z, _)| z.norm() <= unity_radius)
        .map(|(z, (g, b))| (g.norm() - (-0.5 * PI * z.norm().powi(2)).exp() * b.norm()).abs())
        .fold(0.0, f64::max);
    Ok(FockReport {
        gaussian_unity,
        isometry,
        pointwise,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{normalize_wavelet, Descriptor, Scheme};

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn plane() -> PhaseGrid {
        PhaseGrid::plane_box(3.0, 0.05, Scheme::Midpoint)
    }

    #[test]
    fn fock_sign_calibrates_to_frozen_value() {
        assert_eq!(
            calibrate_fock_sign(&PhaseGrid::plane_box(2.0, 0.05, Scheme::Midpoint), &q()).unwrap(),
            FOCK_PHASE_SIGN
        );
    }

    #[test]
    fn gaussian_window_is_dbar_free() {
        let grid = plane();
        let w = FockWeight::default();
        let f = Signal::hermite(1).translate(0.2);
        let gauss = dbar_residual(&Signal::gaussian(), &w, &f, &grid, &q()).unwrap();
        let boxed = dbar_residual(&Signal::boxcar(1.0).unwrap(), &w, &f, &grid, &q()).unwrap();
        assert!(gauss.residual <= 1e-2, "{}", gauss.residual);
        assert!(
            gauss.residual <= 0.1 * boxed.residual,
            "{} vs {}",
            gauss.residual,
            boxed.residual
        );
        let doubled = dbar_residual(&Signal::gaussian(), &w, &f.scale(2.0), &grid, &q()).unwrap();
        assert!((doubled.residual - gauss.residual).abs() <= 1e-12 + 1e-9 * gauss.residual);
    }

    #[test]
    fn gaussian_signal_against_box_window() {
        let grid = plane();
        let w = FockWeight::default();
        let f = Signal::gaussian();
        let gauss = dbar_residual(&Signal::gaussian(), &w, &f, &grid, &q()).unwrap();
        let boxed = dbar_residual(&Signal::boxcar(1.0).unwrap(), &w, &f, &grid, &q()).unwrap();
        assert!(
            gauss.residual <= 1e-2 && gauss.residual <= 0.1 * boxed.residual,
            "{} vs {}",
            gauss.residual,
            boxed.residual
        );
        assert!(boxed.cells > 0);
    }

    #[test]
    fn shifted_gaussian_window() {
        let grid = plane();
        let f = Signal::hermite(1).translate(0.2);
        let base = dbar_residual(&Signal::gaussian(), &FockWeight::default(), &f, &grid, &q()).unwrap();
        let z0 = PhasePoint::new(0.3, 0.7);
        let shifted = dbar_residual(
            &Signal::gaussian().gabor_atom(z0.x, z0.y),
            &FockWeight::shifted(z0),
            &f,
            &grid,
            &q(),
        )
        .unwrap();
        assert!(
            shifted.residual <= 2.0 * base.residual && base.residual <= 2.0 * shifted.residual,
            "{} vs {}",
            shifted.residual,
            base.residual
        );
        // The unshifted weight does not fit the moved window.
        let mismatched = dbar_residual(
            &Signal::gaussian().gabor_atom(z0.x, z0.y),
            &FockWeight::default(),
            &f,
            &grid,
            &q(),
        )
        .unwrap();
        assert!(mismatched.residual > 10.0 * shifted.residual);
    }

    #[test]
    fn dbar_residual_decreases_with_h() {
        // Hermite signals give polynomials, which centered differences
        // differentiate exactly; a box does not.
        let f = Signal::boxcar(1.0).unwrap();
        let r: Vec<f64> = [0.1, 0.05]
            .iter()
            .map(|&h| {
                dbar_residual(
                    &Signal::gaussian(),
                    &FockWeight::default().within(2.5),
                    &f,
                    &PhaseGrid::plane_box(3.0, h, Scheme::Midpoint),
                    &q(),
                )
                .unwrap()
                .residual
            })
            .collect();
        assert!(r[1] < r[0], "{r:?}");
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = PhaseGrid::plane_box(3.0, 0.2, Scheme::Midpoint);
        let r = dbar_residual(
            &Signal::gaussian(),
            &FockWeight::default(),
            &Signal::gaussian(),
            &grid,
            &q(),
        );
        assert!(matches!(r, Err(Error::GridTooCoarse(_))));
    }

    fn half_grid() -> PhaseGrid {
        PhaseGrid::half_plane_rect(-1.5, 1.5, 0.5, 2.0, 0.01, 0.02, Scheme::Midpoint).unwrap()
    }

    #[test]
    fn poisson_wavelet_is_harmonic() {
        let grid = half_grid();
        // Essentially positive-frequency: the negative half carries e^{-π}.
        let f = Signal::gaussian().translate(0.3).modulate(1.0);
        let psi = Signal::closed(Descriptor::real_power(-2.0)).unwrap();
        let w = PowerWeight::for_exponent(-2.0);
        assert_eq!(w.power, -1.5);
        let poisson = laplacian_residual(&psi, w, &f, &grid, &q()).unwrap();
        let hat = laplacian_residual(&Signal::mexican_hat(), w, &f, &grid, &q()).unwrap();
        assert!(poisson.residual <= 1e-2, "{}", poisson.residual);
        assert!(
            poisson.residual <= 0.1 * hat.residual,
            "{} vs {}",
            poisson.residual,
            hat.residual
        );
        let scaled = laplacian_residual(&psi, w, &f.scale(Complex64::new(0.0, 3.0)), &grid, &q()).unwrap();
        assert!((scaled.residual - poisson.residual).abs() <= 1e-9 * poisson.residual);
    }

    #[test]
    fn harmonic_combinations() {
        let grid = PhaseGrid::half_plane_rect(-1.0, 1.0, 0.5, 2.0, 0.01, 0.02, Scheme::Midpoint).unwrap();
        let f = Signal::gaussian();
        let mix = Signal::closed(Descriptor::real_power(-2.0))
            .unwrap()
            .add(&Signal::closed(Descriptor::imag_power(-2.0)).unwrap().scale(0.7));
        let r = laplacian_residual(&mix, PowerWeight::for_exponent(-2.0), &f, &grid, &q()).unwrap();
        assert!(r.residual <= 1e-2, "{}", r.residual);
        // The normalization constant does not matter.
        let normalized = normalize_wavelet(&mix, &q()).unwrap().signal;
        let r2 = laplacian_residual(&normalized, PowerWeight::for_exponent(-2.0), &f, &grid, &q()).unwrap();
        assert!((r2.residual - r.residual).abs() < 1e-9);
    }

    #[test]
    fn ode_identities() {
        let ts: Vec<f64> = (-100..=100).map(|k| k as f64 * 0.1).collect();
        assert!(ode_check_poisson(-2.0, &ts).unwrap() <= 1e-10);
        assert!(ode_check_poisson(-3.0, &ts).unwrap() <= 1e-10);
        assert!(ode_check_poisson(-0.5, &ts).is_err());
        let gauss = |t: f64| {
            let g = (-t * t).exp();
            [
                Complex64::new(g, 0.0),
                Complex64::new(-2.0 * t * g, 0.0),
                Complex64::new((4.0 * t * t - 2.0) * g, 0.0),
            ]
        };
        assert!(ode_residual(-2.0, gauss, &ts) > 0.1);
    }

    #[test]
    fn gaussian_ode() {
        let ws: Vec<f64> = (-30..=30).map(|k| k as f64 * 0.1).collect();
        assert!(gaussian_ode_check(Complex64::new(0.0, 0.0), &ws) <= 1e-12);
        assert!(gaussian_ode_check(Complex64::new(1.0, 0.0), &ws) <= 1e-12);
        let g = Signal::gaussian();
        assert!(log_derivative_residual(Complex64::new(0.0, 0.0), &g, &ws, 1e-4) < 1e-6);
        let boxed = Signal::boxcar(1.0).unwrap();
        assert!(log_derivative_residual(Complex64::new(0.0, 0.0), &boxed, &ws, 1e-4) > 1.0);
    }

    #[test]
    fn fock_checks() {
        let grid = PhaseGrid::plane_box(5.0, 0.05, Scheme::Midpoint);
        let f = Signal::hermite(3).translate(0.5).modulate(-0.4);
        let r = fock_consistency(&f, &grid, 2.0, &q()).unwrap();
        assert!(r.gaussian_unity <= 1e-5, "{r:?}");
        assert!(r.isometry <= 0.01, "{r:?}");
        assert!(r.pointwise <= 1e-4, "{r:?}");
    }
}
