//! Frame-bound certificates for sampling sets: discrete kernel-sum bounds,
//! upper (Bessel) bounds, stability and covering quantities, empirical frame
//! bounds on finite test spaces, and the frame algorithm.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{affine_inverse_apply, hyperbolic_ball_area, Geometry, PhasePoint};
use crate::grid::PhaseGrid;
use crate::kernels::{kernel_field, kernel_sum, ReproducingKernel, TailEstimate};
use crate::pointsets::{build_covering, density_check, separation_constant, Covering, PointSet};
use crate::signals::{inner_product_or_zero, QuadratureSpec, Signal};

/// `sup_z Σ_λ |k(z⁻¹·λ)|` over an `ε`-separated set is at most this times `‖Mk‖₁`:
/// the reciprocal measure of a ball of radius `ε/2`.
pub fn discrete_sum_bound(eps: f64, mk_l1: f64, geometry: Geometry) -> Result<f64> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(invalid("eps", format!("must lie in (0, 2], got {eps}")));
    }
    let area = match geometry {
        Geometry::Plane => PI * eps * eps / 4.0,
        Geometry::HalfPlane => hyperbolic_ball_area(eps / 2.0),
    };
    Ok(mk_l1 / area)
}

/// The smaller plane constant `ε^{−2}/(4π)`, reported next to
/// [`discrete_sum_bound`] for comparison.
pub fn stated_plane_constant(eps: f64) -> f64 {
    1.0 / (4.0 * PI * eps * eps)
}

/// Nodes of `grid` at the given stride plus every point of the extra sets.
pub fn sup_points(grid: &PhaseGrid, stride: usize, extra: &[&PointSet]) -> Vec<PhasePoint> {
    let mut pts: Vec<PhasePoint> = grid
        .strided_indices(stride.max(1))
        .into_iter()
        .map(|k| grid.point_at(k))
        .collect();
    for set in extra {
        pts.extend_from_slice(set.points());
    }
    pts
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSumCheck {
    pub eps: f64,
    pub max_sum: f64,
    pub argmax: PhasePoint,
    pub bound: f64,
    pub holds: bool,
}

/// Compares `max_z Σ_λ |k(z⁻¹·λ)|` with `discrete_sum_bound`.
pub fn check_discrete_sum(
    kernel: &dyn ReproducingKernel,
    set: &PointSet,
    mk_l1: f64,
    at: &[PhasePoint],
) -> Result<KernelSumCheck> {
    let eps = separation_constant(set)?.min(2.0);
    let bound = discrete_sum_bound(eps, mk_l1, set.geometry())?;
    let (max_sum, argmax) = max_kernel_sum(kernel, set, at);
    Ok(KernelSumCheck {
        eps,
        max_sum,
        argmax,
        bound,
        holds: max_sum <= bound,
    })
}

fn max_kernel_sum(kernel: &dyn ReproducingKernel, set: &PointSet, at: &[PhasePoint]) -> (f64, PhasePoint) {
    at.iter()
        .map(|&z| (kernel_sum(kernel, set.points(), z), z))
        .fold(
            (0.0, kernel.geometry().identity()),
            |a, b| if b.0 > a.0 { b } else { a },
        )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    pub b_suff: f64,
    pub k_l1: f64,
    pub max_kernel_sum: f64,
    pub argmax: PhasePoint,
}

/// Schur bound `B = ‖k‖₁ · sup_z Σ_λ |k(z⁻¹·λ)|`, the supremum taken over `at`.
pub fn upper_frame_bound(kernel: &dyn ReproducingKernel, k_l1: f64, set: &PointSet, at: &[PhasePoint]) -> UpperBound {
    let (max_sum, argmax) = max_kernel_sum(kernel, set, at);
    UpperBound {
        b_suff: k_l1 * max_sum,
        k_l1,
        max_kernel_sum: max_sum,
        argmax,
    }
}

/// `k_v(u)`: the kernel moved by `v` with the phase that makes
/// `∫ |k_v − k|` depend on `v` alone. Plane: `e^{2πi v_x u_y} k(u − v)`;
/// half-plane: `k(v⁻¹·u)`.
pub fn moved_kernel(kernel: &dyn ReproducingKernel, v: PhasePoint, u: PhasePoint) -> Complex64 {
    match kernel.geometry() {
        Geometry::Plane => Complex64::from_polar(1.0, 2.0 * PI * v.x * u.y) * kernel.eval(u - v),
        Geometry::HalfPlane => kernel.eval(affine_inverse_apply(v, u)),
    }
}

/// `∫ |k_v(u) − k(u)| dm(u)` on a grid centered at the identity.
pub fn offset_integral(kernel: &dyn ReproducingKernel, v: PhasePoint, grid: &PhaseGrid, k_vals: &[Complex64]) -> f64 {
    grid.points()
        .zip(k_vals)
        .enumerate()
        .map(|(k, (u, &kv))| (moved_kernel(kernel, v, u) - kv).norm() * grid.weight_at(k))
        .sum()
}

fn sampled(kernel: &dyn ReproducingKernel, grid: &PhaseGrid) -> Vec<Complex64> {
    grid.points().map(|u| kernel.eval(u)).collect()
}

/// `v` with `|K(z, z_j) − φ K(z, w_j)|` equal to `|k_v(u) − k(u)|` after the
/// change of variables `z = w_j·u`.
fn pair_offset(geometry: Geometry, z: PhasePoint, w: PhasePoint) -> PhasePoint {
    geometry.relative(w, z)
}

/// Unimodular `φ_j` pairing `K(·, z_j)` with `K(·, w_j)`.
fn pair_phase(geometry: Geometry, z: PhasePoint, w: PhasePoint) -> Complex64 {
    match geometry {
        Geometry::Plane => Complex64::from_polar(1.0, 2.0 * PI * z.x * (w.y - z.y)),
        Geometry::HalfPlane => Complex64::new(1.0, 0.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityQuantities {
    pub d1: f64,
    pub d2: f64,
    pub worst_index: Option<usize>,
    pub worst_point: Option<PhasePoint>,
    /// Integration grid for `d1`.
    pub grid: PhaseGrid,
    /// Number of points over which the supremum for `d2` was taken.
    pub sup_points: usize,
}

/// `d₁² = sup_j ∫ |K(z, z_j) − φ_j K(z, w_j)| dm(z)` and
/// `d₂² = sup_z Σ_j |K(z, z_j) − φ_j K(z, w_j)|`, so that
/// `|(Σ|F(z_j)|²)^{1/2} − (Σ|F(w_j)|²)^{1/2}| ≤ d₁ d₂ ‖F‖`.
///
/// `grid` must be centered at the identity; `d₂` is a supremum over the
/// grid nodes at `stride` and all points of both sets.
pub fn stability_quantities(
    kernel: &dyn ReproducingKernel,
    lambda: &PointSet,
    gamma: &PointSet,
    grid: &PhaseGrid,
    stride: usize,
) -> Result<StabilityQuantities> {
    if lambda.len() != gamma.len() {
        return Err(Error::SizeMismatch(lambda.len(), gamma.len()));
    }
    let g = kernel.geometry();
    grid.require(g)?;
    lambda.geometry().eq(&g).then_some(()).ok_or(Error::GeometryMismatch {
        expected: g,
        found: lambda.geometry(),
    })?;
    let k_vals = sampled(kernel, grid);
    let pairs: Vec<(PhasePoint, PhasePoint)> = lambda
        .points()
        .iter()
        .copied()
        .zip(gamma.points().iter().copied())
        .collect();

    let mut d1_sq = 0.0;
    let mut worst_index = None;
    for (j, &(z, w)) in pairs.iter().enumerate() {
        if z == w {
            continue;
        }
        let v = pair_offset(g, z, w);
        let i = offset_integral(kernel, v, grid, &k_vals);
        if i > d1_sq {
            d1_sq = i;
            worst_index = Some(j);
        }
    }

    let at = sup_points(grid, stride, &[lambda, gamma]);
    let phases: Vec<Complex64> = pairs.iter().map(|&(z, w)| pair_phase(g, z, w)).collect();
    let mut d2_sq = 0.0;
    let mut worst_point = None;
    for &p in &at {
        let s: f64 = pairs
            .iter()
            .zip(&phases)
            .filter(|((z, w), _)| z != w)
            .map(|(&(z, w), &ph)| (kernel.pair(p, z) - ph * kernel.pair(p, w)).norm())
            .sum();
        if s > d2_sq {
            d2_sq = s;
            worst_point = Some(p);
        }
    }
    Ok(StabilityQuantities {
        d1: d1_sq.sqrt(),
        d2: d2_sq.sqrt(),
        worst_index,
        worst_point,
        grid: grid.clone(),
        sup_points: at.len(),
    })
}

/// Constant `c` in `A(Γ) ≥ (√A(Λ) − c·d₁d₂)²`. With the pairing phases of
/// [`stability_quantities`] the inequality holds with `c = 1`.
pub const STABILITY_CONSTANT: f64 = 1.0;

/// `(√A − c·d₁d₂)²` when `√A > c·d₁d₂`, else `0`.
pub fn perturbed_lower_bound(a: f64, d1: f64, d2: f64) -> f64 {
    let s = a.max(0.0).sqrt() - STABILITY_CONSTANT * d1 * d2;
    if s > 0.0 {
        s * s
    } else {
        0.0
    }
}

/// Lower frame-bound margin `(A − 2N√B d₁d₂)/N` for a separated subset;
/// nonpositive values certify nothing.
pub fn separated_margin(a: f64, b: f64, n: usize, d1: f64, d2: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || n == 0 {
        return Err(invalid("margin", "needs A, B > 0 and N >= 1"));
    }
    let n = n as f64;
    Ok((a - 2.0 * n * b.sqrt() * d1 * d2) / n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringQuantities {
    pub d1: f64,
    pub d2: f64,
    /// `‖k‖₁ + ‖Mk‖₁`, the a priori cap on `d₂²`.
    pub d2_cap: f64,
    pub cap_holds: bool,
    /// Largest distance from a grid node to its cell center.
    pub offset_radius: f64,
    pub worst_offset: PhasePoint,
    pub worst_point: PhasePoint,
    pub sup_points: usize,
}

/// Grid tolerance when comparing `d₂²` with its cap.
pub const CAP_TOLERANCE: f64 = 0.05;

/// `d̃₁² = sup_{z ∈ V_j} ∫ |k_{v}(u) − k(u)| dm(u)` with `v = z_j⁻¹·z`, and
/// `d̃₂² = sup_w Σ_j ∫_{V_j} |K(w, z) − φ_j(z) K(w, z_j)| dm(z)`.
///
/// `d̃₁` is a supremum over a polar sample of the ball spanned by the cell
/// offsets plus the farthest actual offsets; `kernel_grid` is centered at
/// the identity. `d̃₂` is a supremum over covering-grid nodes at `stride`
/// and the centers.
pub fn covering_quantities(
    kernel: &dyn ReproducingKernel,
    covering: &Covering,
    kernel_grid: &PhaseGrid,
    k_l1: f64,
    mk_l1: f64,
    stride: usize,
) -> Result<CoveringQuantities> {
    let g = kernel.geometry();
    kernel_grid.require(g)?;
    covering.grid.require(g)?;
    let grid = &covering.grid;
    let centers = covering.centers.points();
    let e = g.identity();

    let mut offsets: Vec<(f64, PhasePoint)> = grid
        .points()
        .zip(&covering.assignment)
        .map(|(z, &j)| {
            let v = g.relative(centers[j], z);
            (g.distance(e, v), v)
        })
        .collect();
    offsets.sort_by(|a, b| b.0.total_cmp(&a.0));
    let r_v = offsets.first().map_or(0.0, |o| o.0);
    let mut probes: Vec<PhasePoint> = offsets.iter().take(16).map(|o| o.1).collect();
    const ANGLES: usize = 32;
    for ring in 1..=4 {
        let r = r_v * ring as f64 / 4.0;
        for a in 0..ANGLES {
            probes.push(g.point_at(e, r, 2.0 * PI * a as f64 / ANGLES as f64));
        }
    }
    let k_vals = sampled(kernel, kernel_grid);
    let (mut d1_sq, mut worst_offset) = (0.0, e);
    for v in probes {
        let i = offset_integral(kernel, v, kernel_grid, &k_vals);
        if i > d1_sq {
            d1_sq = i;
            worst_offset = v;
        }
    }

    let nodes: Vec<(PhasePoint, f64, usize)> = grid
        .points()
        .enumerate()
        .map(|(k, z)| (z, grid.weight_at(k), covering.assignment[k]))
        .collect();
    let phase = |z: PhasePoint, c: PhasePoint| match g {
        Geometry::Plane => Complex64::from_polar(1.0, 2.0 * PI * z.x * (c.y - z.y)),
        Geometry::HalfPlane => Complex64::new(1.0, 0.0),
    };
    let node_phases: Vec<Complex64> = nodes.iter().map(|&(z, _, j)| phase(z, centers[j])).collect();
    let at = sup_points(grid, stride, &[&covering.centers]);
    let (mut d2_sq, mut worst_point) = (0.0, e);
    for &w in &at {
        let s: f64 = nodes
            .iter()
            .zip(&node_phases)
            .map(|(&(z, wt, j), &ph)| (kernel.pair(w, z) - ph * kernel.pair(w, centers[j])).norm() * wt)
            .sum();
        if s > d2_sq {
            d2_sq = s;
            worst_point = w;
        }
    }
    let cap = k_l1 + mk_l1;
    Ok(CoveringQuantities {
        d1: d1_sq.sqrt(),
        d2: d2_sq.sqrt(),
        d2_cap: cap,
        cap_holds: d2_sq <= cap * (1.0 + CAP_TOLERANCE),
        offset_radius: r_v,
        worst_offset,
        worst_point,
        sup_points: at.len(),
    })
}

/// From `|‖F‖ − (Σ c_j |F(z_j)|²)^{1/2}| ≤ p ‖F‖` with `p = d̃₁d̃₂`:
/// `A = (1 − p)²/c_max`, `B = (1 + p)²/c_min`.
pub fn covering_frame_bounds(d1: f64, d2: f64, c_min: f64, c_max: f64) -> Result<(f64, f64)> {
    let p = d1 * d2;
    if p >= 1.0 {
        return Err(Error::CertificateVoid(p));
    }
    if !(c_min > 0.0 && c_max >= c_min) {
        return Err(invalid("cell areas", "need 0 < c_min <= c_max"));
    }
    Ok(((1.0 - p).powi(2) / c_max, (1.0 + p).powi(2) / c_min))
}

/// Finite-dimensional space of signals on which frame operators are restricted.
#[derive(Clone, Debug)]
pub struct TestSpace {
    pub label: String,
    pub functions: Vec<Signal>,
}

impl TestSpace {
    /// Span of the Hermite functions `h_0, …, h_{n−1}`.
    pub fn hermite(n: usize) -> TestSpace {
        TestSpace {
            label: format!("hermite[0..{n})"),
            functions: (0..n).map(Signal::hermite).collect(),
        }
    }

    /// Span of `h_0, …, h_{n−1}` dilated by `scale` and translated to `center`.
    pub fn hermite_at(n: usize, center: f64, scale: f64) -> TestSpace {
        TestSpace {
            label: format!("hermite[0..{n}) at {center} scale {scale}"),
            functions: (0..n)
                .map(|k| Signal::hermite(k).dilate(scale).translate(center))
                .collect(),
        }
    }

    pub fn from_signals(label: impl Into<String>, functions: Vec<Signal>) -> TestSpace {
        TestSpace {
            label: label.into(),
            functions,
        }
    }

    pub fn dim(&self) -> usize {
        self.functions.len()
    }
}

/// Smallest Gram eigenvalue ratio accepted for a test basis.
pub const MIN_GRAM_CONDITION: f64 = 1e-10;

/// Analysis operator of an atom system restricted to a test space.
#[derive(Clone, Debug)]
pub struct AnalysisSystem {
    pub geometry: Geometry,
    pub space: TestSpace,
    /// `G_mn = ⟨e_n, e_m⟩`.
    pub gram: DMatrix<Complex64>,
    /// `T_λm = ⟨e_m, a_λ⟩`.
    pub analysis: DMatrix<Complex64>,
    pub gram_condition: f64,
}

/// `a_λ`: Gabor atom in the plane, wavelet in the half-plane.
pub fn place_atom(atom: &Signal, geometry: Geometry, z: PhasePoint) -> Signal {
    match geometry {
        Geometry::Plane => atom.gabor_atom(z.x, z.y),
        Geometry::HalfPlane => atom.wavelet_atom(z.x, z.y),
    }
}

impl AnalysisSystem {
    pub fn new(atom: &Signal, set: &PointSet, space: TestSpace, q: &QuadratureSpec) -> Result<AnalysisSystem> {
        let n = space.dim();
        if n == 0 {
            return Err(invalid("test space", "is empty"));
        }
        let gram = DMatrix::from_fn(n, n, |m, k| {
            inner_product_or_zero(&space.functions[k], &space.functions[m], q)
        });
        let eig = gram.clone().symmetric_eigen();
        let (lo, hi) = eig
            .eigenvalues
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let condition = lo / hi;
        if !(condition > MIN_GRAM_CONDITION) {
            return Err(Error::IllConditioned(condition));
        }
        let g = set.geometry();
        let mut analysis = DMatrix::zeros(set.len(), n);
        for (l, &z) in set.points().iter().enumerate() {
            let a = place_atom(atom, g, z);
            for m in 0..n {
                analysis[(l, m)] = inner_product_or_zero(&space.functions[m], &a, q);
            }
        }
        Ok(AnalysisSystem {
            geometry: g,
            space,
            gram,
            analysis,
            gram_condition: condition,
        })
    }

    /// Samples `⟨f, a_λ⟩` of `f = Σ c_m e_m`.
    pub fn samples(&self, coefficients: &DVector<Complex64>) -> DVector<Complex64> {
        &self.analysis * coefficients
    }

    pub fn norm(&self, coefficients: &DVector<Complex64>) -> f64 {
        (coefficients.adjoint() * &self.gram * coefficients)[(0, 0)]
            .re
            .max(0.0)
            .sqrt()
    }

    pub fn synthesize(&self, coefficients: &DVector<Complex64>) -> Signal {
        self.space
            .functions
            .iter()
            .zip(coefficients.iter())
            .fold(Signal::zero(), |acc, (e, &c)| acc.add(&e.scale(c)))
    }

    /// Extreme generalized eigenvalues of `T*T c = μ G c`.
    pub fn frame_bounds(&self) -> (f64, f64) {
        if self.analysis.nrows() == 0 {
            return (0.0, 0.0);
        }
        let chol = self
            .gram
            .clone()
            .cholesky()
            .expect("Gram matrix checked positive definite");
        let l = chol.l();
        let s = self.analysis.adjoint() * &self.analysis;
        let x = l.solve_lower_triangular(&s).expect("triangular solve");
        let y = l
            .solve_lower_triangular(&x.adjoint())
            .expect("triangular solve")
            .adjoint();
        let h = (&y + y.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        eig.eigenvalues
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBounds {
    /// Smallest Rayleigh quotient on the test space: an upper estimate of
    /// the true lower frame bound.
    pub a: f64,
    /// Largest Rayleigh quotient on the test space: a lower estimate of the
    /// true upper frame bound.
    pub b: f64,
    pub test_space: String,
    pub dimension: usize,
    pub gram_condition: f64,
}

pub fn empirical_frame_bounds(
    atom: &Signal,
    set: &PointSet,
    space: TestSpace,
    q: &QuadratureSpec,
) -> Result<EmpiricalBounds> {
    let label = space.label.clone();
    let dim = space.dim();
    let system = AnalysisSystem::new(atom, set, space, q)?;
    let (a, b) = system.frame_bounds();
    Ok(EmpiricalBounds {
        a: a.max(0.0),
        b: b.max(0.0),
        test_space: label,
        dimension: dim,
        gram_condition: system.gram_condition,
    })
}

#[derive(Clone, Debug)]
pub struct FrameReconstruction {
    pub coefficients: DVector<Complex64>,
    pub signal: Signal,
    /// `‖s − T c_m‖` for `m = 0..=n`.
    pub residuals: Vec<f64>,
    /// `‖f − f_m‖` for `m = 0..=n` when the true coefficients are known.
    pub errors: Option<Vec<f64>>,
    /// `(B − A)/(B + A)`.
    pub predicted_rate: f64,
}

impl FrameReconstruction {
    /// Per-iteration error ratios `‖f − f_{m+1}‖/‖f − f_m‖`.
    pub fn error_ratios(&self) -> Option<Vec<f64>> {
        self.errors.as_ref().map(|e| {
            e.windows(2)
                .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
                .collect()
        })
    }

    /// Geometric mean of the last `count` error ratios.
    pub fn asymptotic_rate(&self, count: usize) -> Option<f64> {
        let r = self.error_ratios()?;
        let tail = &r[r.len().saturating_sub(count)..];
        if tail.is_empty() || tail.iter().any(|&x| x <= 0.0) {
            return None;
        }
        Some((tail.iter().map(|x| x.ln()).sum::<f64>() / tail.len() as f64).exp())
    }
}

/// Frame algorithm `f_{m+1} = f_m + (2/(A+B)) S(f − f_m)` in Galerkin form
/// on the test space: `c_{m+1} = c_m + (2/(A+B)) G⁻¹ T*(s − T c_m)`.
pub fn frame_reconstruct(
    system: &AnalysisSystem,
    samples: &DVector<Complex64>,
    a: f64,
    b: f64,
    iterations: usize,
    truth: Option<&DVector<Complex64>>,
) -> Result<FrameReconstruction> {
    if samples.len() != system.analysis.nrows() {
        return Err(Error::SizeMismatch(samples.len(), system.analysis.nrows()));
    }
    if !(a > 0.0 && b >= a) {
        return Err(invalid("frame bounds", "need 0 < A <= B"));
    }
    let n = system.space.dim();
    let lambda = Complex64::new(2.0 / (a + b), 0.0);
    let chol = system
        .gram
        .clone()
        .cholesky()
        .expect("Gram matrix checked positive definite");
    let mut c = DVector::<Complex64>::zeros(n);
    let residual = |c: &DVector<Complex64>| (samples - &system.analysis * c).norm();
    let error = |c: &DVector<Complex64>| truth.map(|t| system.norm(&(t - c)));
    let mut residuals = vec![residual(&c)];
    let mut errors: Option<Vec<f64>> = truth.map(|_| vec![error(&c).expect("truth given")]);
    let mut increases = 0;
    for m in 0..iterations {
        let r = samples - &system.analysis * &c;
        let step = chol.solve(&(system.analysis.adjoint() * r));
        c += step * lambda;
        let res = residual(&c);
        increases = if res > residuals[m] { increases + 1 } else { 0 };
        residuals.push(res);
        if let (Some(errs), Some(e)) = (errors.as_mut(), error(&c)) {
            errs.push(e);
        }
        if increases >= 3 {
            return Err(Error::Diverged(m + 1));
        }
    }
    Ok(FrameReconstruction {
        signal: system.synthesize(&c),
        coefficients: c,
        residuals,
        errors,
        predicted_rate: (b - a) / (b + a),
    })
}

/// Everything needed to assemble a frame report.
pub struct FrameProblem<'a> {
    pub atom: &'a Signal,
    pub kernel: &'a dyn ReproducingKernel,
    pub set: &'a PointSet,
    /// Integration grid centered at the identity.
    pub grid: &'a PhaseGrid,
    pub q: &'a QuadratureSpec,
    pub test_space: TestSpace,
    /// Density radius for the covering certificate.
    pub delta: Option<f64>,
    pub sup_stride: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    /// `B_emp ≤ B_suff`.
    pub bessel: bool,
    pub dense: Option<bool>,
    /// `d̃₁d̃₂ < 1`, so that `A_cov > 0`.
    pub sampling_certified: Option<bool>,
    /// `A_cov − tol ≤ A_emp` and `B_emp ≤ B_cov + tol`.
    pub covering_consistent: Option<bool>,
    pub d2_cap: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub geometry: Geometry,
    pub atom: String,
    pub points: usize,
    pub k_l1: f64,
    pub mk_l1: f64,
    pub k_tail: TailEstimate,
    pub mk_tail: TailEstimate,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub sum_bound: Option<f64>,
    pub stated_plane_constant: Option<f64>,
    pub b_suff: f64,
    pub worst_gap: Option<f64>,
    pub d1_cov: Option<f64>,
    pub d2_cov: Option<f64>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub a_cov: Option<f64>,
    pub b_cov: Option<f64>,
    pub a_emp: f64,
    pub b_emp: f64,
    pub test_space: String,
    pub test_dimension: usize,
    pub verdicts: Verdicts,
    pub grid: PhaseGrid,
    pub tolerance: f64,
}

/// Slack allowed between certificates and empirical bounds.
pub const REPORT_TOLERANCE: f64 = 0.05;

pub fn frame_report(problem: FrameProblem<'_>) -> Result<FrameReport> {
    let FrameProblem {
        atom,
        kernel,
        set,
        grid,
        q,
        test_space,
        delta,
        sup_stride,
    } = problem;
    let g = kernel.geometry();
    if set.geometry() != g {
        return Err(Error::GeometryMismatch {
            expected: g,
            found: set.geometry(),
        });
    }
    let kf = kernel_field(kernel, grid)?;
    let (k_l1, mk_l1) = (kf.k_l1(), kf.mk_l1());
    let eps = if set.len() >= 2 {
        Some(separation_constant(set)?)
    } else {
        None
    };
    let sum_bound = eps
        .filter(|&e| e > 0.0)
        .map(|e| discrete_sum_bound(e.min(2.0), mk_l1, g))
        .transpose()?;
    let at = sup_points(grid, sup_stride, &[set]);
    let upper = upper_frame_bound(kernel, k_l1, set, &at);
    let emp = empirical_frame_bounds(atom, set, test_space, q)?;

    let mut report = FrameReport {
        geometry: g,
        atom: kernel.label(),
        points: set.len(),
        k_l1,
        mk_l1,
        k_tail: kf.k_tail,
        mk_tail: kf.mk_tail,
        eps,
        delta,
        sum_bound,
        stated_plane_constant: match (g, eps) {
            (Geometry::Plane, Some(e)) if e > 0.0 => Some(stated_plane_constant(e.min(2.0)) * mk_l1),
            _ => None,
        },
        b_suff: upper.b_suff,
        worst_gap: None,
        d1_cov: None,
        d2_cov: None,
        c_min: None,
        c_max: None,
        a_cov: None,
        b_cov: None,
        a_emp: emp.a,
        b_emp: emp.b,
        test_space: emp.test_space,
        test_dimension: emp.dimension,
        verdicts: Verdicts {
            bessel: emp.b <= upper.b_suff * (1.0 + 1e-9),
            dense: None,
            sampling_certified: None,
            covering_consistent: None,
            d2_cap: None,
        },
        grid: grid.clone(),
        tolerance: REPORT_TOLERANCE,
    };
    if let Some(delta) = delta {
        let density = density_check(set, delta, grid)?;
        report.worst_gap = Some(density.worst_gap);
        report.verdicts.dense = Some(density.dense);
        if density.dense {
            let covering = build_covering(set, delta, grid)?;
            let cq = covering_quantities(kernel, &covering, grid, k_l1, mk_l1, sup_stride)?;
            report.d1_cov = Some(cq.d1);
            report.d2_cov = Some(cq.d2);
            report.c_min = Some(covering.c_min());
            report.c_max = Some(covering.c_max());
            report.verdicts.d2_cap = Some(cq.cap_holds);
            match covering_frame_bounds(cq.d1, cq.d2, covering.c_min(), covering.c_max()) {
                Ok((a, b)) => {
                    report.a_cov = Some(a);
                    report.b_cov = Some(b);
                    report.verdicts.sampling_certified = Some(true);
                    report.verdicts.covering_consistent =
                        Some(a - REPORT_TOLERANCE <= emp.a && emp.b <= b + REPORT_TOLERANCE);
                }
                Err(Error::CertificateVoid(_)) => report.verdicts.sampling_certified = Some(false),
                Err(e) => return Err(e),
            }
        } else {
            report.verdicts.sampling_certified = Some(false);
        }
    }
    Ok(report)
}
