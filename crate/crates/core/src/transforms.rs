//! Continuous Gabor, wavelet and Bargmann transforms on phase-space grids,
//! and the two reconstruction formulas.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{twisted_phase, Geometry, PhasePoint};
use crate::grid::PhaseGrid;
use crate::signals::{for_each_node, l2_norm, QuadratureSpec, Scheme, Signal};

const FOURTH_ROOT_2: f64 = 1.189_207_115_002_721;

/// Complex values on a phase-space grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    grid: PhaseGrid,
    values: Vec<Complex64>,
    /// Non-fatal diagnostics collected while computing the field.
    pub warnings: Vec<String>,
}

impl PhaseField {
    pub fn new(grid: PhaseGrid, values: Vec<Complex64>) -> Result<PhaseField> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch(grid.len(), values.len()));
        }
        Ok(PhaseField {
            grid,
            values,
            warnings: Vec::new(),
        })
    }

    pub fn zeros(grid: PhaseGrid) -> PhaseField {
        let n = grid.len();
        PhaseField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
            warnings: Vec::new(),
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(PhasePoint) -> Complex64) -> PhaseField {
        let values = grid.points().map(f).collect();
        PhaseField {
            grid,
            values,
            warnings: Vec::new(),
        }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn geometry(&self) -> Geometry {
        self.grid.geometry()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    /// Value at the node `z`, if `z` is a node.
    pub fn at_point(&self, z: PhasePoint) -> Option<Complex64> {
        self.grid.node_of(z).map(|(i, j)| self.at(i, j))
    }

    /// `∫ |F|²` against the geometry's measure.
    pub fn norm_sq(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| v.norm_sqr() * self.grid.weight_at(k))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `∫ |F|` against the geometry's measure.
    pub fn l1_norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| v.norm() * self.grid.weight_at(k))
            .sum()
    }

    /// `∫ F · conj(G)`.
    pub fn inner(&self, other: &PhaseField) -> Result<Complex64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(k, (a, b))| a * b.conj() * self.grid.weight_at(k))
            .sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(PhasePoint, Complex64) -> Complex64) -> PhaseField {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(self.grid.point_at(k), v))
            .collect();
        PhaseField {
            grid: self.grid.clone(),
            values,
            warnings: self.warnings.clone(),
        }
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> PhaseField {
        let c = c.into();
        self.map(|_, v| v * c)
    }

    pub fn add(&self, other: &PhaseField) -> Result<PhaseField> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        PhaseField::new(self.grid.clone(), values)
    }

    pub fn sub(&self, other: &PhaseField) -> Result<PhaseField> {
        self.add(&other.scale(-1.0))
    }

    fn check_same_grid(&self, other: &PhaseField) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid("grid", "fields live on different grids"));
        }
        Ok(())
    }

    /// Twisted translation `e^{2πi x0 (y − y0)} F(z − z0)` for a node-aligned
    /// shift `z0`; values shifted in from outside the grid are zero.
    pub fn twisted_translate(&self, z0: PhasePoint) -> Result<PhaseField> {
        self.grid.require(Geometry::Plane)?;
        let di = z0.x / self.grid.hx();
        let dj = z0.y / self.grid.hv();
        if (di - di.round()).abs() > 1e-9 || (dj - dj.round()).abs() > 1e-9 {
            return Err(invalid("z0", "shift must be a multiple of the grid step"));
        }
        let (di, dj) = (di.round() as i64, dj.round() as i64);
        let (nx, ny) = (self.grid.nx() as i64, self.grid.ny() as i64);
        let mut out = PhaseField::zeros(self.grid.clone());
        for i in 0..nx {
            for j in 0..ny {
                let (si, sj) = (i - di, j - dj);
                if si < 0 || sj < 0 || si >= nx || sj >= ny {
                    continue;
                }
                let z = self.grid.point(i as usize, j as usize);
                let k = self.grid.index(i as usize, j as usize);
                out.values[k] = twisted_phase(z0, z) * self.at(si as usize, sj as usize);
            }
        }
        Ok(out)
    }
}

/// Uniform time grid `t0 + k·step`, `k < n`, for reconstructed signals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub step: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, step: f64) -> Result<TimeGrid> {
        if !(step > 0.0) || !(t1 > t0) {
            return Err(invalid(
                "time grid",
                format!("need t0 < t1 and step > 0, got [{t0}, {t1}] / {step}"),
            ));
        }
        let n = ((t1 - t0) / step).round() as usize + 1;
        Ok(TimeGrid { t0, step, n })
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + self.step * k as f64
    }
}

/// Product `f(t)·conj(g(t − x))` integrated against `e^{2πi y_j t}` for all
/// rows `y_j = y0 + j·hy`, by phasor recurrence in `j`.
#[allow(clippy::too_many_arguments)]
fn modulated_row(
    f: &Signal,
    g_shifted: &Signal,
    y0: f64,
    hy: f64,
    ny: usize,
    q: &QuadratureSpec,
    extra: impl Fn(f64) -> Complex64,
    out: &mut [Complex64],
) {
    out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    let (Some((a0, a1)), Some((b0, b1))) = (f.support(), g_shifted.support()) else {
        return;
    };
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    if lo >= hi {
        return;
    }
    let mut breaks = f.discontinuities();
    breaks.extend(g_shifted.discontinuities());
    breaks.sort_by(f64::total_cmp);
    let ymax = y0.abs().max((y0 + hy * ny as f64).abs());
    let scale = f.feature_scale().min(g_shifted.feature_scale()).min(1.0);
    let m = f.max_modulation() + g_shifted.max_modulation() + ymax;
    let mut dt = q.time_step * scale;
    if m > 0.0 {
        dt = dt.min(0.25 / m);
    }
    for_each_node(lo, hi, &breaks, dt, q.scheme, |t, w| {
        let p = f.eval(t) * g_shifted.eval(t).conj() * extra(t) * w;
        if p == Complex64::new(0.0, 0.0) {
            return;
        }
        let step = Complex64::from_polar(1.0, 2.0 * PI * hy * t);
        let mut phasor = Complex64::from_polar(1.0, 2.0 * PI * y0 * t);
        for v in out.iter_mut() {
            *v += p * phasor;
            phasor *= step;
        }
    });
}

/// `Gf(z) = ⟨f, g_z⟩` with `g_z(t) = e^{−2πiyt} g(t − x)` on a plane grid.
pub fn gabor_transform(f: &Signal, g: &Signal, grid: &PhaseGrid, q: &QuadratureSpec) -> Result<PhaseField> {
    grid.require(Geometry::Plane)?;
    let mut field = PhaseField::zeros(grid.clone());
    let norm = l2_norm(g, q);
    if (norm - 1.0).abs() > 1e-3 {
        field
            .warnings
            .push(format!("window {} has norm {norm:.6}, not 1", g.label()));
    }
    let ny = grid.ny();
    if ny == 0 {
        return Ok(field);
    }
    let (y0, hy) = (grid.y(0), grid.hv());
    let mut row = vec![Complex64::new(0.0, 0.0); ny];
    for i in 0..grid.nx() {
        let gx = g.translate(grid.x(i));
        modulated_row(f, &gx, y0, hy, ny, q, |_| Complex64::new(1.0, 0.0), &mut row);
        let base = grid.index(i, 0);
        field.values[base..base + ny].copy_from_slice(&row);
    }
    Ok(field)
}

/// `Wf(z) = ⟨f, ψ_z⟩` with `ψ_z(t) = y^{-1/2} ψ((t − x)/y)` on a half-plane grid.
///
/// Each row is a discrete correlation: the time lattice is aligned with the
/// `x` nodes, so `ψ_y` is sampled once per row. Jumps of `f` or `ψ` are not
/// resolved as panel breaks, which costs first order accuracy near them.
pub fn wavelet_transform(f: &Signal, psi: &Signal, grid: &PhaseGrid, q: &QuadratureSpec) -> Result<PhaseField> {
    grid.require(Geometry::HalfPlane)?;
    let mut field = PhaseField::zeros(grid.clone());
    let (nx, ny) = (grid.nx(), grid.ny());
    let Some((a0, a1)) = f.support() else {
        return Ok(field);
    };
    if nx == 0 {
        return Ok(field);
    }
    let x0 = grid.x(0);
    let offset = match q.scheme {
        Scheme::Midpoint => 0.5,
        Scheme::Trapezoid => 0.0,
    };
    for j in 0..ny {
        let atom = psi.wavelet_atom(0.0, grid.y(j));
        let Some((b0, b1)) = atom.support() else {
            continue;
        };
        let stride = (grid.hx() / q.time_step_for(f, &atom)).ceil().max(1.0) as i64;
        let dt = grid.hx() / stride as f64;
        let last = (nx as i64 - 1) * stride;
        // Lattice index ranges: n for f, m = n − i·stride for ψ_y.
        let (f_lo, f_hi) = (
            ((a0 - x0) / dt - offset).ceil() as i64,
            ((a1 - x0) / dt - offset).floor() as i64,
        );
        let m_lo = ((b0 / dt - offset).ceil() as i64).max(f_lo - last);
        let m_hi = ((b1 / dt - offset).floor() as i64).min(f_hi);
        let (n_lo, n_hi) = (f_lo.max(m_lo), f_hi.min(m_hi + last));
        if n_lo > n_hi || m_lo > m_hi {
            continue;
        }
        let fs: Vec<Complex64> = (n_lo..=n_hi).map(|n| f.eval(x0 + (n as f64 + offset) * dt)).collect();
        let ps: Vec<Complex64> = (m_lo..=m_hi)
            .map(|m| atom.eval((m as f64 + offset) * dt).conj())
            .collect();
        for i in 0..nx {
            let shift = i as i64 * stride;
            let lo = n_lo.max(m_lo + shift);
            let hi = n_hi.min(m_hi + shift);
            if lo > hi {
                continue;
            }
            let fa = &fs[(lo - n_lo) as usize..=(hi - n_lo) as usize];
            let pa = &ps[(lo - shift - m_lo) as usize..=(hi - shift - m_lo) as usize];
            let acc: Complex64 = fa.iter().zip(pa).map(|(a, b)| a * b).sum();
            field.values[grid.index(i, j)] = acc * dt;
        }
    }
    Ok(field)
}

/// `f̃(t) = ∫ F(z) g_z(t) dm(z)` sampled on `times`.
pub fn gabor_reconstruct(field: &PhaseField, g: &Signal, times: &TimeGrid) -> Result<Signal> {
    let grid = field.grid();
    grid.require(Geometry::Plane)?;
    let (ny, nt) = (grid.ny(), times.n);
    let mut out = vec![Complex64::new(0.0, 0.0); nt];
    if ny == 0 {
        return Signal::from_samples(times.t0, times.step, out);
    }
    let (y0, hy) = (grid.y(0), grid.hv());
    for i in 0..grid.nx() {
        let x = grid.x(i);
        let wf: Vec<Complex64> = (0..ny).map(|j| field.at(i, j) * grid.weight(i, j)).collect();
        if wf.iter().all(|v| v.norm_sqr() == 0.0) {
            continue;
        }
        for (k, slot) in out.iter_mut().enumerate() {
            let t = times.t(k);
            let gv = g.eval(t - x);
            if gv.norm_sqr() == 0.0 {
                continue;
            }
            let step = Complex64::from_polar(1.0, -2.0 * PI * hy * t);
            let mut phasor = Complex64::from_polar(1.0, -2.0 * PI * y0 * t);
            let mut acc = Complex64::new(0.0, 0.0);
            for v in &wf {
                acc += v * phasor;
                phasor *= step;
            }
            *slot += acc * gv;
        }
    }
    Signal::from_samples(times.t0, times.step, out)
}

/// `f̃(t) = ∫ F(z) ψ_z(t) dμ(z)` sampled on `times`.
pub fn wavelet_reconstruct(field: &PhaseField, psi: &Signal, times: &TimeGrid) -> Result<Signal> {
    let grid = field.grid();
    grid.require(Geometry::HalfPlane)?;
    let mut out = vec![Complex64::new(0.0, 0.0); times.n];
    for (k, &v) in field.values().iter().enumerate() {
        if v.norm_sqr() == 0.0 {
            continue;
        }
        let z = grid.point_at(k);
        let c = v * grid.weight_at(k);
        let atom = psi.wavelet_atom(z.x, z.y);
        let Some((lo, hi)) = atom.support() else {
            continue;
        };
        let k0 = (((lo - times.t0) / times.step).floor().max(0.0)) as usize;
        let k1 = (((hi - times.t0) / times.step).ceil().max(0.0) as usize).min(times.n);
        for (m, slot) in out.iter_mut().enumerate().take(k1).skip(k0) {
            *slot += c * atom.eval(times.t(m));
        }
    }
    Signal::from_samples(times.t0, times.step, out)
}

/// Largest `|z|` on which the Bargmann transform is evaluated.
pub const BARGMANN_MAX_RADIUS: f64 = 12.0;

/// `Bf(z) = 2^{1/4} ∫ f(t) e^{2πtz − πt² − (π/2)z²} dt` on a plane grid,
/// restricted to the disc `|z| ≤ radius`; nodes outside the disc are zero.
pub fn bargmann_transform(f: &Signal, grid: &PhaseGrid, radius: f64, q: &QuadratureSpec) -> Result<PhaseField> {
    grid.require(Geometry::Plane)?;
    if !(radius > 0.0 && radius <= BARGMANN_MAX_RADIUS) {
        return Err(invalid(
            "radius",
            format!("Bargmann disc radius must lie in (0, {BARGMANN_MAX_RADIUS}], got {radius}"),
        ));
    }
    let mut field = PhaseField::zeros(grid.clone());
    let ny = grid.ny();
    if ny == 0 {
        return Ok(field);
    }
    let (y0, hy) = (grid.y(0), grid.hv());
    let mut row = vec![Complex64::new(0.0, 0.0); ny];
    let one = Signal::gaussian().scale(1.0 / FOURTH_ROOT_2);
    for i in 0..grid.nx() {
        let x = grid.x(i);
        if x.abs() > radius {
            continue;
        }
        // Real part of the exponent split as −π(t − x)² + (π/2)x², the
        // imaginary part 2πty − πxy, and the y-only factor e^{(π/2)y²}.
        let envelope = one.translate(x);
        modulated_row(
            f,
            &envelope,
            y0,
            hy,
            ny,
            q,
            |_| Complex64::new(FOURTH_ROOT_2 * (0.5 * PI * x * x).exp(), 0.0),
            &mut row,
        );
        for (j, v) in row.iter().enumerate() {
            let y = grid.y(j);
            if x * x + y * y > radius * radius + 1e-12 {
                continue;
            }
            let factor = Complex64::from_polar((0.5 * PI * y * y).exp(), -PI * x * y);
            field.values[grid.index(i, j)] = v * factor;
        }
    }
    Ok(field)
}

/// `∫ |Bf(z)|² e^{−π|z|²} dm(z)` over the grid.
pub fn fock_norm_sq(field: &PhaseField) -> f64 {
    let g = field.grid();
    field
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let z = g.point_at(k);
            v.norm_sqr() * (-PI * (z.x * z.x + z.y * z.y)).exp() * g.weight_at(k)
        })
        .sum()
}
