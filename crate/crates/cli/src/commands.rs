use std::path::Path;

use framelab_core::analytic::{
    dbar_residual, laplacian_residual, ode_check_poisson, FockWeight, PowerWeight, ResidualReport,
};
use framelab_core::bounds::{
    covering_frame_bounds, covering_quantities, empirical_frame_bounds, frame_reconstruct, frame_report,
    perturbed_lower_bound, separated_margin, stability_quantities, AnalysisSystem, FrameProblem, FrameReport,
    STABILITY_CONSTANT,
};
use framelab_core::grid::PhaseGrid;
use framelab_core::kernels::{
    kernel_field, membership_report, AtomKernel, GaussianKernel, MembershipReport, PoissonKernel, ReproducingKernel,
};
use framelab_core::pointsets::{
    build_covering, decompose_uniformly_discrete, density_check, extract_separated_subset, jitter, max_displacement,
    separation_constant, PointSet,
};
use framelab_core::signals::{l2_norm, normalize_wavelet};
use framelab_core::transforms::{gabor_transform, wavelet_transform};
use framelab_core::{Complex64, Descriptor, Error, Geometry, PhasePoint, Scheme, Signal};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::output::Artifacts;
use crate::CliError;

/// Slack used by the certificate checks.
pub const TOLERANCE: f64 = 0.05;

/// Atom, kernel and grid of a run.
struct Setup {
    atom: Signal,
    kernel: Box<dyn ReproducingKernel>,
    grid: PhaseGrid,
}

fn setup(config: &RunConfig, base: &Path) -> Result<Setup, CliError> {
    let spec = config.atom_spec();
    let raw = spec.load(base)?;
    let q = config.quadrature;
    let grid = config.grid()?;
    let (atom, kernel): (Signal, Box<dyn ReproducingKernel>) = match config.geometry {
        Geometry::Plane => match spec.descriptor() {
            Some(Descriptor::Gaussian) => (raw, Box::new(GaussianKernel)),
            _ => (raw.clone(), Box::new(AtomKernel::new(raw, Geometry::Plane, q))),
        },
        Geometry::HalfPlane => {
            let psi = normalize_wavelet(&raw, &q).map_err(CliError::config)?.signal;
            match spec.descriptor() {
                Some(d) if d.exponent().is_some() => (psi, Box::new(PoissonKernel::new(d).map_err(CliError::config)?)),
                _ => (psi.clone(), Box::new(AtomKernel::new(psi, Geometry::HalfPlane, q))),
            }
        }
    };
    Ok(Setup { atom, kernel, grid })
}

pub fn run(config: &RunConfig, base: &Path, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    match config.command.expect("resolved config") {
        Command::Transform => transform(config, base, out),
        Command::Kernel => kernel(config, base, out),
        Command::Bounds => bounds(config, base, out),
        Command::Stability => stability(config, base, out),
        Command::Density => density(config, base, out),
        Command::Extract => extract(config, base, out),
        Command::Residuals => residuals(config, base, out),
        Command::Reconstruct => reconstruct(config, base, out),
    }
}

#[derive(Serialize)]
struct TransformResult {
    atom: String,
    signal: String,
    field_energy: f64,
    signal_energy: f64,
    relative_energy_error: f64,
    max_abs: f64,
    warnings: Vec<String>,
}

fn transform(config: &RunConfig, base: &Path, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let s = setup(config, base)?;
    let f = config.signal_spec().load(base)?;
    let q = config.quadrature;
    let field = match config.geometry {
        Geometry::Plane => gabor_transform(&f, &s.atom, &s.grid, &q)?,
        Geometry::HalfPlane => wavelet_transform(&f, &s.atom, &s.grid, &q)?,
    };
    let signal_energy = l2_norm(&f, &q).powi(2);
    let result = TransformResult {
        atom: s.atom.label(),
        signal: f.label(),
        field_energy: field.norm_sq(),
        signal_energy,
        relative_energy_error: (field.norm_sq() - signal_energy).abs() / signal_energy,
        max_abs: field.max_abs(),
        warnings: field.warnings.clone(),
    };
    out.field(
        "field",
        &field,
        &format!("transform of {} by {}", result.signal, result.atom),
    )?;
    out.report(config, &[], &result)?;
    Ok(Vec::new())
}

#[derive(Serialize)]
struct KernelResult {
    membership: MembershipReport,
    peak: Complex64,
}

fn kernel(config: &RunConfig, base: &Path, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let s = setup(config, base)?;
    let kf = kernel_field(s.kernel.as_ref(), &s.grid)?;
    let membership = membership_report(&kf);
    let mut violations = Vec::new();
    if membership.expectation_holds == Some(false) {
        violations.push(format!(
            "kernel of {} does not behave as expected (k finite: {}, Mk finite: {})",
            membership.atom, membership.k_finite, membership.mk_finite
        ));
    }
    out.field("kernel", &kf.k, &kf.label)?;
    out.field("maximal", &kf.mk, &format!("maximal function of {}", kf.label))?;
    out.report(
        config,
        &violations,
        &KernelResult {
            peak: kf.peak(),
            membership,
        },
    )?;
    Ok(violations)
}

fn frame_violations(r: &FrameReport) -> Vec<String> {
    let v = &r.verdicts;
    let mut out = Vec::new();
    if !v.bessel {
        out.push(format!("B_emp = {} exceeds B_suff = {}", r.b_emp, r.b_suff));
    }
    if v.dense == Some(false) {
        out.push(format!("set is not {:?}-dense: worst gap {:?}", r.delta, r.worst_gap));
    }
    if v.sampling_certified == Some(false) {
        out.push("covering certificate is void".into());
    }
    if v.covering_consistent == Some(false) {
        out.push(format!(
            "empirical bounds [{}, {}] outside the covering bounds [{:?}, {:?}]",
            r.a_emp, r.b_emp, r.a_cov, r.b_cov
        ));
    }
    if v.d2_cap == Some(false) {
        out.push("covering d2 exceeds its cap".into());
    }
    out
}

fn bounds(config: &RunConfig, base: &Path, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let s = setup(config, base)?;
    let set = config.load_points(base)?;
    let report = frame_report(FrameProblem {
        atom: &s.atom,
        kernel: s.kernel.as_ref(),
        set: &set,
        grid: &s.grid,
        q: &config.quadrature,
        test_space: config.test_space.build(),
        delta: config.deltas.first().copied(),
        sup_stride: config.sup_stride,
    })?;
    let violations = frame_violations(&report);
    out.report(config, &violations, &report)?;
    Ok(violations)
}

#[derive(Serialize)]
struct StabilityRow {
    delta: f64,
    max_displacement: f64,
    d1: f64,
    d2: f64,
    a_emp_base: f64,
    a_emp_jittered: f64,
    b_emp_jittered: f64,
    predicted_lower: f64,
    holds: bool,
}

#[derive(Serialize)]
struct StabilityResult {
    points: usize,
    a_emp: f64,
    b_emp: f64,
    test_space: String,
    constant: f64,
    d1_monotone: bool,
    rows: Vec<StabilityRow>,
}

fn stability(config: &RunConfig, base: &Path, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let s = setup(config, base)?;
    let set = config.load_points(base)?;
    let q = config.quadrature;
    let emp = empirical_frame_bounds(&s.atom, &set, config.test_space.build(), &q)?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &delta in &config.deltas {
        let moved = jitter(&set, delta, config.seed)?;
        let sq = stability_quantities(s.kernel.as_ref(), &set, &moved, &s.grid, config.sup_stride)?;
        let e = empirical_frame_bounds(&s.atom, &moved, config.test_space.build(), &q)?;
        let predicted = perturbed_lower_bound(emp.a, sq.d1, sq.d2);
        let holds = e.a >= predicted - TOLERANCE;
        if !holds {
            violations.push(format!(
                "delta {delta}: A_emp = {} below the predicted {predicted}",
                e.a
            ));
        }
        rows.push(StabilityRow {
            delta,
            max_displacement: max_displacement(&set, &moved)?,
            d1: sq.d1,
            d2: sq.d2,
            a_emp_base: emp.a,
            a_emp_jittered: e.a,
            b_emp_jittered: e.b,
            predicted_lower: predicted,
            holds,
        });
    }
    let mut by_delta: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta, r.d1)).collect();
    by_delta.sort_by(|a, b| b.0.total_cmp(&a.0));
    let d1_monotone = by_delta.windows(2).all(|w| w[1].1 < w[0].1 || w[1].0 == w[0].0);
    if !d1_monotone {
        violations.push("d1 does not decrease with the jitter radius".into());
    }
    out.summary(&rows)?;
    out.report(
        config,
        &violations,
        &StabilityResult {
            points: set.len(),
            a_emp: emp.a,
            b_emp: emp.b,
            test_space: emp.test_space,
            constant: STABILITY_CONSTANT,
            d1_monotone,
            rows,
        },
    )?;
    Ok(violations)
}

#[derive(Serialize)]
struct DensityRow {
    delta: f64,
    dense: bool,
    worst_gap: f64,
    c_min: Option<f64>,
    c_max: Option<f64>,
    d1: Option<f64>,
    d2: Option<f64>,
    product: Option<f64>,
    a_cov: Option<f64>,
    b_cov: Option<f64>,
    d2_cap: Option<bool>,
    certified: bool,
}

#[derive(Serialize)]
struct DensityResult {
    points: usize,
    k_l1: f64,
    mk_l1: f64,
    rows: Vec<DensityRow>,
}

fn density(config: &RunConfig, base: &Path, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let s = setup(config, base)?;
    let set = config.load_points(base)?;
    let kf = kernel_field(s.kernel.as_ref(), &s.grid)?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &delta in &config.deltas {
        let d = density_check(&set, delta, &s.grid)?;
        let mut row = DensityRow {
            delta,
            dense: d.dense,
            worst_gap: d.worst_gap,
            c_min: None,
            c_max: None,
            d1: None,
            d2: None,
            product: None,
            a_cov: None,
            b_cov: None,
            d2_cap: None,
            certified: false,
        };
        if d.dense {
            let covering = build_covering(&set, delta, &s.grid)?;
            let cq = covering_quantities(
                s.kernel.as_ref(),
                &covering,
                &s.grid,
                kf.k_l1(),
                kf.mk_l1(),
                config.sup_stride,
            )?;
            row.c_min = Some(covering.c_min());
            row.c_max = Some(covering.c_max());
            row.d1 = Some(cq.d1);
            row.d2 = Some(cq.d2);
            row.product = Some(cq.d1 * cq.d2);
            row.d2_cap = Some(cq.cap_holds);
            match covering_frame_bounds(cq.d1, cq.d2, covering.c_min(), covering.c_max()) {
                Ok((a, b)) => {
                    row.a_cov = Some(a);
                    row.b_cov = Some(b);
                    row.certified = true;
                }
                Err(Error::CertificateVoid(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        if !row.certified {
            violations.push(format!("delta {delta}: covering certificate is void"));
        }
        rows.push(row);
    }
    out.summary(&rows)?;
    out.report(
        config,
        &violations,
        &DensityResult {
            points: set.len(),
            k_l1: kf.k_l1(),
            mk_l1: kf.mk_l1(),
            rows,
        },
    )?;
    Ok(violations)
}

#[derive(Serialize)]
struct ExtractResult {
    delta: f64,
    points: usize,
    subset_points: usize,
    subset_separation: Option<f64>,
    separated: bool,
    multiplicity: usize,
    decomposition_count: usize,
    d1: f64,
    d2: f64,
    a_emp: f64,
    b_emp: f64,
    a_emp_subset: f64,
    margin: Option<f64>,
    margin_consistent: bool,
    subset: Vec<PhasePoint>,
}

fn extract(config: &RunConfig, base: &Path, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let s = setup(config, base)?;
    let set = config.load_points(base)?;
    let q = config.quadrature;
    let delta = config.deltas[0];
    let sub = extract_separated_subset(&set, delta)?;
    let subset_separation = if sub.subset.len() >= 2 {
        Some(separation_constant(&sub.subset)?)
    } else {
        None
    };
    let separated = subset_separation.is_none_or(|e| e >= delta);
    let representatives = PointSet::new(
        set.geometry(),
        sub.assignment.iter().map(|&i| sub.subset.points()[i]).collect(),
    )?;
    let sq = stability_quantities(s.kernel.as_ref(), &set, &representatives, &s.grid, config.sup_stride)?;
    let emp = empirical_frame_bounds(&s.atom, &set, config.test_space.build(), &q)?;
    let emp_sub = empirical_frame_bounds(&s.atom, &sub.subset, config.test_space.build(), &q)?;
    let margin = if emp.a > 0.0 && sub.multiplicity > 0 {
        Some(separated_margin(emp.a, emp.b, sub.multiplicity, sq.d1, sq.d2)?)
    } else {
        None
    };
    let margin_consistent = margin.is_none_or(|m| m <= 0.0 || m <= emp_sub.a + TOLERANCE);
    let mut violations = Vec::new();
    if !separated {
        violations.push(format!(
            "extracted subset has separation {subset_separation:?} < {delta}"
        ));
    }
    if !margin_consistent {
        violations.push(format!("margin {margin:?} exceeds A_emp of the subset {}", emp_sub.a));
    }
    let result = ExtractResult {
        delta,
        points: set.len(),
        subset_points: sub.subset.len(),
        subset_separation,
        separated,
        multiplicity: sub.multiplicity,
        decomposition_count: decompose_uniformly_discrete(&set, delta)?.len(),
        d1: sq.d1,
        d2: sq.d2,
        a_emp: emp.a,
        b_emp: emp.b,
        a_emp_subset: emp_sub.a,
        margin,
        margin_consistent,
        subset: sub.subset.points().to_vec(),
    };
    out.report(config, &violations, &result)?;
    Ok(violations)
}

#[derive(Serialize)]
struct Comparison {
    model: ResidualReport,
    reference: ResidualReport,
    ratio: f64,
}

#[derive(Serialize)]
struct ResidualsResult {
    dbar: Comparison,
    dbar_shifted: ResidualReport,
    laplacian: Comparison,
    ode_residuals: Vec<(f64, f64)>,
}

fn residuals(config: &RunConfig, base: &Path, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let r = &config.residuals;
    let q = config.quadrature;
    let f = config.signal_spec().load(base)?;
    let plane = PhaseGrid::plane_box(r.plane_radius, r.plane_step, Scheme::Midpoint);
    let half = PhaseGrid::half_plane_rect(-r.x_max, r.x_max, r.y_min, r.y_max, r.hx, r.hu, Scheme::Midpoint)
        .map_err(CliError::config)?;
    let gauss = Signal::gaussian();
    let boxcar = Signal::boxcar(1.0)?;
    let disc = r.disc.unwrap_or(f64::INFINITY);
    let w = FockWeight::default().within(disc);
    let dbar = dbar_residual(&gauss, &w, &f, &plane, &q)?;
    let dbar_box = dbar_residual(&boxcar, &w, &f, &plane, &q)?;
    let z0 = PhasePoint::new(r.shift.0, r.shift.1);
    let shifted = dbar_residual(
        &gauss.gabor_atom(z0.x, z0.y),
        &FockWeight::shifted(z0).within(disc),
        &f,
        &plane,
        &q,
    )?;
    let psi = Signal::closed(Descriptor::real_power(r.exponent)).map_err(CliError::config)?;
    let weight = PowerWeight::for_exponent(r.exponent);
    let lap = laplacian_residual(&psi, weight, &f, &half, &q)?;
    let lap_hat = laplacian_residual(&Signal::mexican_hat(), weight, &f, &half, &q)?;
    let ts: Vec<f64> = (-200..=200).map(|k| k as f64 * 0.05).collect();
    let ode_residuals = [-2.0, -3.0, r.exponent]
        .iter()
        .map(|&a| ode_check_poisson(a, &ts).map(|v| (a, v)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut violations = Vec::new();
    if dbar.residual > 1e-2 || dbar.residual > 0.1 * dbar_box.residual {
        violations.push(format!(
            "Gaussian-window dbar residual {} is not small against the box window {}",
            dbar.residual, dbar_box.residual
        ));
    }
    let shift_ratio = shifted.residual / dbar.residual;
    if !(0.5..=2.0).contains(&shift_ratio) {
        violations.push(format!(
            "shifted-window residual {} is not within 2x of the unshifted {}",
            shifted.residual, dbar.residual
        ));
    }
    if lap.residual > 1e-2 || lap.residual > 0.1 * lap_hat.residual {
        violations.push(format!(
            "Poisson Laplacian residual {} is not small against the Mexican hat {}",
            lap.residual, lap_hat.residual
        ));
    }
    if let Some(&(a, v)) = ode_residuals.iter().find(|(_, v)| *v > 1e-10) {
        violations.push(format!("ODE residual {v} for exponent {a}"));
    }
    let result = ResidualsResult {
        dbar: Comparison {
            ratio: dbar.residual / dbar_box.residual,
            model: dbar,
            reference: dbar_box,
        },
        dbar_shifted: shifted,
        laplacian: Comparison {
            ratio: lap.residual / lap_hat.residual,
            model: lap,
            reference: lap_hat,
        },
        ode_residuals,
    };
    out.report(config, &violations, &result)?;
    Ok(violations)
}

#[derive(Serialize)]
struct IterationRow {
    iteration: usize,
    residual: f64,
    error: f64,
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct ReconstructResult {
    points: usize,
    test_space: String,
    a_emp: f64,
    b_emp: f64,
    predicted_rate: f64,
    max_ratio: f64,
    final_relative_error: f64,
}

fn reconstruct(config: &RunConfig, base: &Path, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let s = setup(config, base)?;
    let set = config.load_points(base)?;
    let space = config.test_space.build();
    let label = space.label.clone();
    let n = space.dim();
    let system = AnalysisSystem::new(&s.atom, &set, space, &config.quadrature)?;
    let (a, b) = system.frame_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let truth = DVector::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let samples = system.samples(&truth);
    let rec = frame_reconstruct(&system, &samples, a, b, config.iterations, Some(&truth))?;
    let errors = rec.errors.clone().expect("truth given");
    let ratios = rec.error_ratios().expect("truth given");
    // Ratios at the round-off floor carry no information.
    let floor = 1e-10 * errors[0];
    let max_ratio = ratios
        .iter()
        .zip(&errors)
        .filter(|(_, &e)| e > floor)
        .map(|(&r, _)| r)
        .fold(0.0, f64::max);
    let mut violations = Vec::new();
    if max_ratio > rec.predicted_rate * (1.0 + 1e-6) {
        violations.push(format!(
            "error ratio {max_ratio} exceeds the predicted rate {}",
            rec.predicted_rate
        ));
    }
    let rows: Vec<IterationRow> = (0..errors.len())
        .map(|m| IterationRow {
            iteration: m,
            residual: rec.residuals[m],
            error: errors[m],
            ratio: if m == 0 { None } else { Some(ratios[m - 1]) },
        })
        .collect();
    out.summary(&rows)?;
    out.report(
        config,
        &violations,
        &ReconstructResult {
            points: set.len(),
            test_space: label,
            a_emp: a,
            b_emp: b,
            predicted_rate: rec.predicted_rate,
            max_ratio,
            final_relative_error: errors.last().copied().unwrap_or(0.0) / errors[0].max(f64::MIN_POSITIVE),
        },
    )?;
    Ok(violations)
}
