//! Reproducing kernels, local maximal functions, `L¹` norms with tail
//! estimates, and kernel sums over point sets.
//!
//! For an atom family `a_z` (Gabor atoms `g_z` or wavelets `ψ_z`) the kernel is
//! `k(z) = ⟨a, a_z⟩` and the two-point kernel `K(z, w) = ⟨a_w, a_z⟩`, so that
//! `F(w) = ∫ F(z) conj(K(z, w))` for `F` in the model space. In the plane
//! `K(z, w) = e^{2πi x_w (y_z − y_w)} k(z − w)`; in the half-plane
//! `K(z, w) = k(w⁻¹·z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{affine_inverse_apply, twisted_phase, Geometry, PhasePoint};
use crate::grid::PhaseGrid;
use crate::signals::{inner_product_or_zero, Descriptor, QuadratureSpec, Signal};
use crate::transforms::PhaseField;

pub trait ReproducingKernel {
    fn geometry(&self) -> Geometry;

    /// `k(z) = ⟨a, a_z⟩`.
    fn eval(&self, z: PhasePoint) -> Complex64;

    /// `K(z, w) = ⟨a_w, a_z⟩`.
    fn pair(&self, z: PhasePoint, w: PhasePoint) -> Complex64 {
        match self.geometry() {
            Geometry::Plane => twisted_phase(w, z) * self.eval(z - w),
            Geometry::HalfPlane => self.eval(affine_inverse_apply(w, z)),
        }
    }

    fn label(&self) -> String;
}

/// Kernel of an arbitrary atom, by 1-D quadrature at every evaluation.
#[derive(Clone, Debug)]
pub struct AtomKernel {
    atom: Signal,
    geometry: Geometry,
    q: QuadratureSpec,
}

impl AtomKernel {
    pub fn new(atom: Signal, geometry: Geometry, q: QuadratureSpec) -> AtomKernel {
        AtomKernel { atom, geometry, q }
    }

    pub fn atom(&self) -> &Signal {
        &self.atom
    }
}

impl ReproducingKernel for AtomKernel {
    fn geometry(&self) -> Geometry {
        self.geometry
    }

    fn eval(&self, z: PhasePoint) -> Complex64 {
        let shifted = match self.geometry {
            Geometry::Plane => self.atom.gabor_atom(z.x, z.y),
            Geometry::HalfPlane => {
                if z.y <= 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                self.atom.wavelet_atom(z.x, z.y)
            }
        };
        inner_product_or_zero(&self.atom, &shifted, &self.q)
    }

    fn label(&self) -> String {
        self.atom.label()
    }
}

/// `k(z) = e^{πixy} e^{−π|z|²/2}`, the kernel of the unit Gaussian window.
#[derive(Clone, Copy, Debug, Default)]
pub struct GaussianKernel;

impl ReproducingKernel for GaussianKernel {
    fn geometry(&self) -> Geometry {
        Geometry::Plane
    }

    fn eval(&self, z: PhasePoint) -> Complex64 {
        Complex64::from_polar((-0.5 * PI * (z.x * z.x + z.y * z.y)).exp(), PI * z.x * z.y)
    }

    fn label(&self) -> String {
        "gaussian".into()
    }
}

/// Closed-form kernel of a Poisson wavelet normalized to unit admissibility.
///
/// For `(t + i)^{−(α+1)/2}`, `k(z) = (α − 1)/(4π) · (2√y / (1 + y − ix))^α`;
/// the real and imaginary parts have kernel `2 Re` of that.
#[derive(Clone, Copy, Debug)]
pub struct PoissonKernel {
    descriptor: Descriptor,
    alpha: f64,
    complex: bool,
}

impl PoissonKernel {
    pub fn new(descriptor: Descriptor) -> Result<PoissonKernel> {
        let (alpha, complex) = match descriptor {
            Descriptor::PoissonComplex { alpha } => (alpha, true),
            Descriptor::PoissonReal { alpha } | Descriptor::PoissonImag { alpha } => (alpha, false),
            other => {
                return Err(crate::error::invalid(
                    "descriptor",
                    format!("{other} is not a Poisson wavelet"),
                ))
            }
        };
        if !(alpha > 1.0) {
            return Err(Error::NotAdmissible(format!(
                "Poisson wavelet needs alpha > 1, got {alpha}"
            )));
        }
        Ok(PoissonKernel {
            descriptor,
            alpha,
            complex,
        })
    }

    /// `k(i) = ‖ψ‖²` for the normalized wavelet.
    pub fn norm_sq(&self) -> f64 {
        let c = (self.alpha - 1.0) / (4.0 * PI);
        if self.complex {
            c
        } else {
            2.0 * c
        }
    }
}

impl ReproducingKernel for PoissonKernel {
    fn geometry(&self) -> Geometry {
        Geometry::HalfPlane
    }

    fn eval(&self, z: PhasePoint) -> Complex64 {
        if z.y <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let base = Complex64::new(2.0 * z.y.sqrt(), 0.0) / Complex64::new(1.0 + z.y, -z.x);
        let c = (self.alpha - 1.0) / (4.0 * PI);
        let v = c * base.powf(self.alpha);
        if self.complex {
            v
        } else {
            Complex64::new(2.0 * v.re, 0.0)
        }
    }

    fn label(&self) -> String {
        self.descriptor.to_string()
    }
}

/// `k` evaluated on `grid`.
pub fn sample_kernel(kernel: &dyn ReproducingKernel, grid: &PhaseGrid) -> Result<PhaseField> {
    grid.require(kernel.geometry())?;
    Ok(PhaseField::from_fn(grid.clone(), |z| kernel.eval(z)))
}

/// Range-maximum table over one grid row.
struct SparseMax {
    levels: Vec<Vec<f64>>,
}

impl SparseMax {
    fn new(row: Vec<f64>) -> SparseMax {
        let mut levels = vec![row];
        let mut width = 1;
        while 2 * width <= levels[0].len() {
            let prev = levels.last().expect("nonempty");
            let next: Vec<f64> = (0..prev.len() - width).map(|i| prev[i].max(prev[i + width])).collect();
            levels.push(next);
            width *= 2;
        }
        SparseMax { levels }
    }

    /// Maximum over the inclusive index range `[a, b]`.
    fn query(&self, a: usize, b: usize) -> f64 {
        let len = b - a + 1;
        let level = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let row = &self.levels[level];
        row[a].max(row[b + 1 - (1 << level)])
    }
}

/// Local maximal function `MF(z) = sup_{w ∈ B(z, r)} |F(w)|` by scanning the
/// grid nodes inside each metric ball (Euclidean disc or hyperbolic ball).
pub fn maximal_function_radius(field: &PhaseField, r: f64) -> Result<PhaseField> {
    let grid = field.grid();
    let (y_lo, _) = grid.y_range();
    grid.check_resolution(r, y_lo)?;
    let geometry = grid.geometry();
    let (nx, ny) = (grid.nx(), grid.ny());
    let tables: Vec<SparseMax> = (0..ny)
        .map(|j| SparseMax::new((0..nx).map(|i| field.at(i, j).norm()).collect()))
        .collect();
    let i0 = grid.i_offset() as f64;
    let hx = grid.hx();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..nx {
        for j in 0..ny {
            let center = grid.point(i, j);
            // Rows whose second coordinate can meet the ball.
            let (v_lo, v_hi) = match geometry {
                Geometry::Plane => (center.y - r, center.y + r),
                Geometry::HalfPlane => (center.y.ln() - r, center.y.ln() + r),
            };
            let j_lo = ((v_lo / grid.hv()) - grid.j_offset() as f64).ceil().max(0.0) as usize;
            let j_hi = (((v_hi / grid.hv()) - grid.j_offset() as f64).floor()).min((ny - 1) as f64);
            if j_hi < 0.0 {
                continue;
            }
            let mut best = 0.0f64;
            for (jj, table) in tables.iter().enumerate().take(j_hi as usize + 1).skip(j_lo) {
                let Some(hw) = geometry.ball_half_width(center, r, grid.y(jj)) else {
                    continue;
                };
                let a = ((center.x - hw) / hx - i0 - 1e-9).ceil().max(0.0);
                let b = ((center.x + hw) / hx - i0 + 1e-9).floor().min((nx - 1) as f64);
                if a > b {
                    continue;
                }
                best = best.max(table.query(a as usize, b as usize));
            }
            out[grid.index(i, j)] = Complex64::new(best, 0.0);
        }
    }
    PhaseField::new(grid.clone(), out)
}

/// Local maximal function over unit balls.
pub fn maximal_function(field: &PhaseField) -> Result<PhaseField> {
    maximal_function_radius(field, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailModel {
    /// `|F| ≈ e^{a − bρ}` in the distance `ρ` from the identity.
    Exponential,
    /// `|F| ≈ e^{a} ρ^{−b}`.
    Power,
    /// Nothing to fit: the field vanishes on the fitting annulus.
    Vanishing,
}

/// Envelope fit on the outer annulus and its integral outside the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub model: TailModel,
    pub a: f64,
    pub b: f64,
    /// RMS residual of the log-envelope fit.
    pub fit_residual: f64,
    /// Inner and outer radius of the fitting annulus.
    pub annulus: (f64, f64),
    /// Estimated `∫ |F|` outside the grid; infinite when the envelope is not
    /// integrable.
    pub mass: f64,
}

impl TailEstimate {
    pub fn integrable(&self) -> bool {
        self.mass.is_finite()
    }

    fn envelope(&self, rho: f64) -> f64 {
        match self.model {
            TailModel::Exponential => (self.a - self.b * rho).exp(),
            TailModel::Power => (self.a - self.b * rho.ln()).exp(),
            TailModel::Vanishing => 0.0,
        }
    }
}

/// Radius of the largest ball around the identity inside the grid box.
fn inscribed_radius(grid: &PhaseGrid) -> f64 {
    let (x0, x1) = grid.x_range();
    let (y0, y1) = grid.y_range();
    match grid.geometry() {
        Geometry::Plane => x0.abs().min(x1).min(y0.abs()).min(y1),
        Geometry::HalfPlane => {
            let side = x0.abs().min(x1).asinh();
            side.min(y1.ln()).min(-y0.ln())
        }
    }
}

/// Radius beyond which spheres around the identity miss the grid box.
fn circumscribed_radius(grid: &PhaseGrid) -> f64 {
    let (x0, x1) = grid.x_range();
    let (y0, y1) = grid.y_range();
    let e = grid.geometry().identity();
    [
        PhasePoint::new(x0, y0),
        PhasePoint::new(x0, y1),
        PhasePoint::new(x1, y0),
        PhasePoint::new(x1, y1),
    ]
    .into_iter()
    .map(|c| grid.geometry().distance(e, c))
    .fold(0.0, f64::max)
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (intercept, slope, rms)
}

/// Fits an exponential or power envelope to `|F|` on the outer 20% annulus
/// of the largest ball around the identity inside the grid, and integrates
/// it over the complement of the grid.
pub fn tail_estimate(field: &PhaseField) -> TailEstimate {
    let grid = field.grid();
    let geometry = grid.geometry();
    let e = geometry.identity();
    let r_out = inscribed_radius(grid);
    let r_in = 0.8 * r_out;
    const BINS: usize = 8;
    let mut env = [0.0f64; BINS];
    for (k, v) in field.values().iter().enumerate() {
        let rho = geometry.distance(e, grid.point_at(k));
        if rho < r_in || rho > r_out {
            continue;
        }
        let b = (((rho - r_in) / (r_out - r_in)) * BINS as f64)
            .floor()
            .min((BINS - 1) as f64) as usize;
        env[b] = env[b].max(v.norm());
    }
    let pts: Vec<(f64, f64)> = env
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(b, &m)| (r_in + (b as f64 + 0.5) * (r_out - r_in) / BINS as f64, m.ln()))
        .collect();
    if pts.len() < 2 {
        return TailEstimate {
            model: TailModel::Vanishing,
            a: f64::NEG_INFINITY,
            b: 0.0,
            fit_residual: 0.0,
            annulus: (r_in, r_out),
            mass: 0.0,
        };
    }
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let rs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let logs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let (ea, es, erms) = least_squares(&rs, &ys);
    let (pa, ps, prms) = least_squares(&logs, &ys);
    let mut est = if erms <= prms {
        TailEstimate {
            model: TailModel::Exponential,
            a: ea,
            b: -es,
            fit_residual: erms,
            annulus: (r_in, r_out),
            mass: 0.0,
        }
    } else {
        TailEstimate {
            model: TailModel::Power,
            a: pa,
            b: -ps,
            fit_residual: prms,
            annulus: (r_in, r_out),
            mass: 0.0,
        }
    };
    est.mass = envelope_mass_outside(&est, grid);
    est
}

/// `∫` of the envelope over the complement of the grid box, in polar
/// coordinates around the identity.
fn envelope_mass_outside(est: &TailEstimate, grid: &PhaseGrid) -> f64 {
    let geometry = grid.geometry();
    let e = geometry.identity();
    // Circumference of the sphere of radius ρ.
    let circ = |rho: f64| match geometry {
        Geometry::Plane => 2.0 * PI * rho,
        Geometry::HalfPlane => 2.0 * PI * rho.sinh(),
    };
    // Growth rate of the circumference at large ρ, for integrability.
    let growth_exp = match geometry {
        Geometry::Plane => 0.0,
        Geometry::HalfPlane => 1.0,
    };
    let integrable = match est.model {
        TailModel::Vanishing => true,
        TailModel::Exponential => est.b > growth_exp,
        TailModel::Power => geometry == Geometry::Plane && est.b > 2.0,
    };
    if !integrable {
        return f64::INFINITY;
    }
    if est.model == TailModel::Vanishing {
        return 0.0;
    }
    let r0 = inscribed_radius(grid);
    let r1 = circumscribed_radius(grid);
    // Partially covered spheres: fraction of the sphere outside the box.
    const STEPS: usize = 400;
    const ANGLES: usize = 720;
    let mut partial = 0.0;
    let dr = (r1 - r0) / STEPS as f64;
    for s in 0..STEPS {
        let rho = r0 + (s as f64 + 0.5) * dr;
        let outside = (0..ANGLES)
            .filter(|&a| {
                let theta = 2.0 * PI * (a as f64 + 0.5) / ANGLES as f64;
                !grid.covers(geometry.point_at(e, rho, theta))
            })
            .count() as f64
            / ANGLES as f64;
        partial += est.envelope(rho) * circ(rho) * outside * dr;
    }
    // Spheres entirely outside: ∫_{r1}^∞ envelope·circumference.
    let mut full = 0.0;
    let mut rho = r1;
    let h = 1e-3 * (1.0 + r1);
    let mut last = f64::INFINITY;
    for _ in 0..2_000_000 {
        let v = est.envelope(rho + 0.5 * h) * circ(rho + 0.5 * h) * h;
        full += v;
        rho += h;
        if v < 1e-18 * (full + 1e-300) && v <= last {
            break;
        }
        last = v;
    }
    partial + full
}

/// `‖F‖₁` on the grid plus the tail estimate.
pub fn l1_norm(field: &PhaseField, tail: Option<&TailEstimate>) -> f64 {
    field.l1_norm() + tail.map_or(0.0, |t| t.mass)
}

/// `k`, its maximal function and both tail estimates on one grid.
#[derive(Clone, Debug)]
pub struct KernelField {
    pub k: PhaseField,
    pub mk: PhaseField,
    pub k_tail: TailEstimate,
    pub mk_tail: TailEstimate,
    pub label: String,
}

/// Relative tail mass above which a norm is not considered finite-looking.
pub const TAIL_THRESHOLD: f64 = 0.05;

impl KernelField {
    pub fn geometry(&self) -> Geometry {
        self.k.geometry()
    }

    pub fn k_l1(&self) -> f64 {
        l1_norm(&self.k, Some(&self.k_tail))
    }

    pub fn mk_l1(&self) -> f64 {
        l1_norm(&self.mk, Some(&self.mk_tail))
    }

    /// `k` at the identity.
    pub fn peak(&self) -> Complex64 {
        self.k
            .at_point(self.geometry().identity())
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    pub fn k_finite_looking(&self) -> bool {
        finite_looking(&self.k, &self.k_tail)
    }

    pub fn mk_finite_looking(&self) -> bool {
        finite_looking(&self.mk, &self.mk_tail)
    }
}

fn finite_looking(field: &PhaseField, tail: &TailEstimate) -> bool {
    tail.integrable() && tail.mass <= TAIL_THRESHOLD * field.l1_norm()
}

pub fn kernel_field(kernel: &dyn ReproducingKernel, grid: &PhaseGrid) -> Result<KernelField> {
    let k = sample_kernel(kernel, grid)?;
    let mk = maximal_function(&k)?;
    let k_tail = tail_estimate(&k);
    let mk_tail = tail_estimate(&mk);
    Ok(KernelField {
        k,
        mk,
        k_tail,
        mk_tail,
        label: kernel.label(),
    })
}

/// Numerical integrability verdicts for `k` and `Mk`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub atom: String,
    pub geometry: Geometry,
    pub k_l1: f64,
    pub k_tail: TailEstimate,
    pub mk_l1: f64,
    pub mk_tail: TailEstimate,
    pub k_finite: bool,
    pub mk_finite: bool,
    /// For Gabor atoms, whether `Mk` looks integrable whenever `k` does.
    /// `None` in the half-plane, where the two classes differ.
    pub expectation_holds: Option<bool>,
}

pub fn membership_report(field: &KernelField) -> MembershipReport {
    let (k_finite, mk_finite) = (field.k_finite_looking(), field.mk_finite_looking());
    MembershipReport {
        atom: field.label.clone(),
        geometry: field.geometry(),
        k_l1: field.k_l1(),
        k_tail: field.k_tail,
        mk_l1: field.mk_l1(),
        mk_tail: field.mk_tail,
        k_finite,
        mk_finite,
        expectation_holds: match field.geometry() {
            Geometry::Plane => Some(!k_finite || mk_finite),
            Geometry::HalfPlane => None,
        },
    }
}

/// `Σ_λ |K(λ, z)|`: `Σ|k(z − λ)|` in the plane, `Σ|k(z⁻¹·λ)|` in the half-plane.
pub fn kernel_sum(kernel: &dyn ReproducingKernel, points: &[PhasePoint], z: PhasePoint) -> f64 {
    let g = kernel.geometry();
    points.iter().map(|&l| kernel.eval(g.relative(z, l)).norm()).sum()
}

/// `∫ F(z) conj(K(z, w)) dm(z)` over the field's grid.
pub fn reproduce_at(field: &PhaseField, kernel: &dyn ReproducingKernel, w: PhasePoint) -> Result<Complex64> {
    let grid = field.grid();
    grid.require(kernel.geometry())?;
    Ok(field
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let z = grid.point_at(k);
            v * kernel.pair(z, w).conj() * grid.weight_at(k)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{normalize_wavelet, Scheme};

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn plane() -> PhaseGrid {
        PhaseGrid::plane_box(4.0, 0.05, Scheme::Midpoint)
    }

    #[test]
    fn gaussian_kernel_examples() {
        let atom = AtomKernel::new(Signal::gaussian(), Geometry::Plane, q());
        assert!((atom.eval(PhasePoint::new(0.0, 0.0)) - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        let v = atom.eval(PhasePoint::new(1.0, 0.0));
        assert!((v.re - 0.207_879_576).abs() < 1e-8 && v.im.abs() < 1e-12);
        for z in [
            PhasePoint::new(0.3, -0.8),
            PhasePoint::new(-1.5, 2.0),
            PhasePoint::new(2.5, 0.7),
        ] {
            assert!((atom.eval(z) - GaussianKernel.eval(z)).norm() < 1e-10, "{z:?}");
        }
    }

    #[test]
    fn pair_kernel_is_the_atom_inner_product() {
        let g = Signal::gaussian();
        let (z, w) = (PhasePoint::new(0.4, -0.3), PhasePoint::new(-0.2, 0.9));
        let direct = crate::signals::inner_product(&g.gabor_atom(w.x, w.y), &g.gabor_atom(z.x, z.y), &q()).unwrap();
        assert!((GaussianKernel.pair(z, w) - direct).norm() < 1e-10);

        let psi = normalize_wavelet(&Signal::poisson_complex(3.0).unwrap(), &q())
            .unwrap()
            .signal;
        let (z, w) = (PhasePoint::new(0.4, 0.7), PhasePoint::new(-0.2, 1.6));
        let direct =
            crate::signals::inner_product(&psi.wavelet_atom(w.x, w.y), &psi.wavelet_atom(z.x, z.y), &q()).unwrap();
        let pk = PoissonKernel::new(Descriptor::PoissonComplex { alpha: 3.0 }).unwrap();
        assert!((pk.pair(z, w) - direct).norm() < 1e-4 * direct.norm().max(1e-3));
    }

    #[test]
    fn poisson_kernels_match_quadrature() {
        for d in [
            Descriptor::PoissonComplex { alpha: 3.0 },
            Descriptor::PoissonReal { alpha: 3.0 },
            Descriptor::PoissonImag { alpha: 5.0 },
        ] {
            let psi = normalize_wavelet(&Signal::closed(d).unwrap(), &q()).unwrap();
            let atom = AtomKernel::new(psi.signal.clone(), Geometry::HalfPlane, q());
            let pk = PoissonKernel::new(d).unwrap();
            assert!((pk.norm_sq() - psi.norm * psi.norm).abs() / pk.norm_sq() < 1e-4);
            for z in [
                PhasePoint::new(0.0, 1.0),
                PhasePoint::new(0.5, 0.5),
                PhasePoint::new(-1.0, 2.5),
            ] {
                let (a, b) = (atom.eval(z), pk.eval(z));
                assert!((a - b).norm() < 1e-4 * pk.norm_sq(), "{d} {z:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn kernel_field_gaussian() {
        let kf = kernel_field(&GaussianKernel, &plane()).unwrap();
        assert!((kf.peak() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(kf.k.max_abs() <= 1.0 + 1e-12);
        assert!((kf.k_l1() - 2.0).abs() / 2.0 < 5e-3);
        let exact_mk = PI + 2.0 + std::f64::consts::SQRT_2 * PI;
        assert!((kf.mk_l1() - exact_mk).abs() / exact_mk < 0.03, "{}", kf.mk_l1());
        assert!(kf.mk_l1() >= kf.k_l1());
        for (a, b) in kf.mk.values().iter().zip(kf.k.values()) {
            assert!(a.re >= b.norm() - 1e-15);
        }
        let report = membership_report(&kf);
        assert!(report.k_finite && report.mk_finite && report.expectation_holds == Some(true));
    }

    /// Oracle: radial profile of |k| shows Mk(z) = e^{−π(|z| − 1)²/2} off the unit disc.
    #[test]
    fn gaussian_maximal_function_closed_form() {
        let kf = kernel_field(&GaussianKernel, &plane()).unwrap();
        let grid = kf.k.grid();
        let mut worst = 0.0f64;
        for (k, z) in grid.points().enumerate() {
            let r = z.norm();
            if r > 3.0 {
                continue;
            }
            let exact = if r <= 1.0 {
                1.0
            } else {
                (-PI * (r - 1.0).powi(2) / 2.0).exp()
            };
            worst = worst.max((kf.mk.values()[k].re - exact).abs());
        }
        // Grid nodes sit up to one cell inside the ball boundary.
        assert!(worst < 0.05 * PI, "worst = {worst}");
        assert_eq!(kf.mk.at_point(PhasePoint::new(0.0, 0.0)).unwrap().re, 1.0);
    }

    #[test]
    fn maximal_function_is_monotone_in_radius() {
        let k = sample_kernel(&GaussianKernel, &PhaseGrid::plane_box(3.0, 0.05, Scheme::Midpoint)).unwrap();
        let m1 = maximal_function(&k).unwrap();
        let m_half = maximal_function_radius(&k, 0.5).unwrap();
        for (a, b) in m1.values().iter().zip(m_half.values()) {
            assert!(a.re >= b.re);
        }
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let k = sample_kernel(&GaussianKernel, &PhaseGrid::plane_box(3.0, 0.3, Scheme::Midpoint)).unwrap();
        assert!(matches!(maximal_function(&k), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn l1_norm_is_homogeneous() {
        let k = sample_kernel(&GaussianKernel, &plane()).unwrap();
        assert!((k.scale(3.0).l1_norm() - 3.0 * k.l1_norm()).abs() < 1e-12);
    }

    #[test]
    fn tail_estimates() {
        // Truncating the Gaussian kernel to R = 2 leaves 2e^{−2π} outside the disc.
        let small = PhaseGrid::plane_box(2.0, 0.02, Scheme::Midpoint);
        let k = sample_kernel(&GaussianKernel, &small).unwrap();
        let tail = tail_estimate(&k);
        assert_eq!(tail.model, TailModel::Exponential);
        let total = k.l1_norm() + tail.mass;
        assert!((total - 2.0).abs() < 2e-3, "{total}");
        // A slowly decaying power law is flagged.
        let slow = PhaseField::from_fn(plane(), |z| Complex64::new((1.0 + z.norm().powi(2)).powf(-0.75), 0.0));
        assert!(!tail_estimate(&slow).integrable());
    }

    #[test]
    fn box_window_membership() {
        let grid = PhaseGrid::plane_box(4.0, 0.1, Scheme::Midpoint);
        let atom = AtomKernel::new(Signal::boxcar(1.0).unwrap(), Geometry::Plane, q());
        let kf = kernel_field(&atom, &grid).unwrap();
        assert!((kf.peak() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        // k vanishes for |x| ≥ 1.
        assert!(atom.eval(PhasePoint::new(1.05, 0.3)).norm() < 1e-12);
        // |k(x, y)| = |sin(πy(1 − |x|))/(πy)| on |x| < 1 decays like 1/|y|.
        let report = membership_report(&kf);
        assert!(!report.k_finite && !report.mk_finite);
        assert_eq!(report.expectation_holds, Some(true));
    }

    #[test]
    fn kernel_sum_examples() {
        let origin = PhasePoint::new(0.0, 0.0);
        assert!((kernel_sum(&GaussianKernel, &[origin], origin) - 1.0).abs() < 1e-15);
        let lattice: Vec<PhasePoint> = (-4..=4)
            .flat_map(|a| (-4..=4).map(move |b| PhasePoint::new(a as f64, b as f64)))
            .collect();
        let one_d: f64 = (-4..=4).map(|n| (-PI * (n * n) as f64 / 2.0).exp()).sum();
        assert!((kernel_sum(&GaussianKernel, &lattice, origin) - one_d * one_d).abs() < 1e-12);
        let fewer = &lattice[..40];
        let z = PhasePoint::new(0.3, -0.2);
        assert!(kernel_sum(&GaussianKernel, fewer, z) <= kernel_sum(&GaussianKernel, &lattice, z));
    }

    #[test]
    fn gabor_reproducing_identity() {
        use crate::transforms::gabor_transform;
        let f = Signal::hermite(2).translate(0.4).modulate(-0.3);
        let field = gabor_transform(&f, &Signal::gaussian(), &plane(), &q()).unwrap();
        let norm = field.l2_norm();
        for w in [PhasePoint::new(0.3, 0.55), PhasePoint::new(-1.2, 0.1)] {
            let direct = crate::signals::inner_product(&f, &Signal::gaussian().gabor_atom(w.x, w.y), &q()).unwrap();
            let rep = reproduce_at(&field, &GaussianKernel, w).unwrap();
            assert!((direct - rep).norm() <= 1e-2 * norm);
        }
    }

    #[test]
    fn half_plane_maximal_function() {
        let grid = PhaseGrid::half_plane_rect(-6.0, 6.0, 1.0 / 16.0, 16.0, 0.05, 0.05, Scheme::Midpoint).unwrap();
        let pk = PoissonKernel::new(Descriptor::PoissonComplex { alpha: 5.0 }).unwrap();
        let kf = kernel_field(&pk, &grid).unwrap();
        for (a, b) in kf.mk.values().iter().zip(kf.k.values()) {
            assert!(a.re >= b.norm() - 1e-15);
        }
        // |k| = k(i)·sech(ρ/2)^α decreases with ρ, so Mk(i) = k(i).
        let at_i = kf.mk.at_point(PhasePoint::new(0.0, 1.0)).unwrap().re;
        assert!((at_i - pk.norm_sq()).abs() < 1e-12);
        // |k| is radial: compare against sech(ρ/2)^α.
        let e = PhasePoint::new(0.0, 1.0);
        for z in [PhasePoint::new(0.5, 0.5), PhasePoint::new(-2.0, 3.0)] {
            let rho = crate::geometry::hyperbolic_distance(e, z);
            let want = pk.norm_sq() * (1.0 / (rho / 2.0).cosh()).powf(5.0);
            assert!((pk.eval(z).norm() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_half_plane_grid_is_rejected() {
        let grid = PhaseGrid::half_plane_rect(-2.0, 2.0, 1.0 / 16.0, 4.0, 0.1, 0.05, Scheme::Midpoint).unwrap();
        let k = sample_kernel(
            &PoissonKernel::new(Descriptor::PoissonComplex { alpha: 3.0 }).unwrap(),
            &grid,
        )
        .unwrap();
        assert!(matches!(maximal_function(&k), Err(Error::GridTooCoarse(_))));
    }
}
