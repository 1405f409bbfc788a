//! Acceptance suite: every criterion prints one PASS/FAIL line; the process
//! exits nonzero when any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use framelab_core::analytic::{
    dbar_residual, fock_consistency, laplacian_residual, ode_check_poisson, FockWeight, PowerWeight,
};
use framelab_core::bounds::{
    check_discrete_sum, empirical_frame_bounds, frame_reconstruct, frame_report, perturbed_lower_bound,
    separated_margin, stability_quantities, sup_points, upper_frame_bound, AnalysisSystem, FrameProblem, TestSpace,
};
use framelab_core::grid::PhaseGrid;
use framelab_core::kernels::{
    kernel_field, reproduce_at, AtomKernel, GaussianKernel, PoissonKernel, ReproducingKernel,
};
use framelab_core::pointsets::{extract_separated_subset, jitter, lattice, random_separated, LatticeSpec, PointSet};
use framelab_core::signals::{inner_product, l2_norm, normalize_wavelet};
use framelab_core::transforms::{gabor_transform, wavelet_transform};
use framelab_core::{Complex64, Descriptor, Geometry, PhasePoint, QuadratureSpec, Scheme, Signal};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn plane_grid() -> PhaseGrid {
    PhaseGrid::plane_box(4.0, 0.05, Scheme::Midpoint)
}

fn plane_lattice(a: f64, radius: f64) -> PointSet {
    lattice(&LatticeSpec::Plane { a, b: a, radius }).unwrap()
}

fn poisson() -> (Signal, PoissonKernel) {
    let d = Descriptor::PoissonComplex { alpha: 5.0 };
    let psi = normalize_wavelet(&Signal::closed(d).unwrap(), &q()).unwrap().signal;
    (psi, PoissonKernel::new(d).unwrap())
}

fn energy_conservation() -> Outcome {
    let start = Instant::now();
    let f = Signal::gaussian();
    let field = gabor_transform(&f, &Signal::gaussian(), &plane_grid(), &q()).unwrap();
    let e = l2_norm(&f, &q()).powi(2);
    let err = (field.norm_sq() - e).abs() / e;
    let secs = start.elapsed().as_secs_f64();
    (
        err <= 5e-3 && secs <= 60.0,
        format!("relative error {err:.3e}, {secs:.2} s"),
    )
}

fn gaussian_kernel_closed_form() -> Outcome {
    // Oracle: 1-D quadrature of ⟨g, g_z⟩, independent of the closed form.
    let oracle = AtomKernel::new(Signal::gaussian(), Geometry::Plane, q());
    let grid = PhaseGrid::plane_box(4.0, 0.1, Scheme::Midpoint);
    let (mut quad, mut closed) = (0.0f64, 0.0f64);
    for z in grid.points() {
        let expected = (-PI * z.norm().powi(2) / 2.0).exp();
        quad = quad.max((oracle.eval(z).norm() - expected).abs());
        closed = closed.max((GaussianKernel.eval(z).norm() - expected).abs());
    }
    (
        quad <= 1e-5 && closed <= 1e-5,
        format!("max deviation {quad:.2e} (quadrature), {closed:.2e} (closed form)"),
    )
}

fn reproducing_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let grid = plane_grid();
    let g = Signal::gaussian();
    for f in [
        Signal::hermite(1),
        Signal::gaussian().translate(-0.7).modulate(0.4),
        Signal::hermite(3).dilate(1.3),
    ] {
        let field = gabor_transform(&f, &g, &grid, &q()).unwrap();
        for _ in 0..5 {
            let w = PhasePoint::new(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
            let direct = inner_product(&f, &g.gabor_atom(w.x, w.y), &q()).unwrap();
            let rep = reproduce_at(&field, &GaussianKernel, w).unwrap();
            worst = worst.max((direct - rep).norm() / field.l2_norm());
        }
    }
    let plane = worst;

    let (psi, kernel) = poisson();
    let grid = PhaseGrid::half_plane_rect(-5.0, 5.0, 1.0 / 32.0, 8.0, 0.04, 0.05, Scheme::Midpoint).unwrap();
    worst = 0.0;
    for f in [
        Signal::gaussian().dilate(0.8).modulate(2.5),
        Signal::gaussian().translate(0.5).modulate(1.5),
        Signal::hermite(1).dilate(0.5).modulate(4.0),
    ] {
        let field = wavelet_transform(&f, &psi, &grid, &q()).unwrap();
        for _ in 0..5 {
            let w = PhasePoint::new(rng.random_range(-1.2..1.2), rng.random_range(0.25f64.ln()..0.0).exp());
            let direct = inner_product(&f, &psi.wavelet_atom(w.x, w.y), &q()).unwrap();
            let rep = reproduce_at(&field, &kernel, w).unwrap();
            worst = worst.max((direct - rep).norm() / field.l2_norm());
        }
    }
    (
        plane <= 1e-2 && worst <= 1e-2,
        format!("worst relative residual {plane:.2e} (plane), {worst:.2e} (half-plane)"),
    )
}

fn count_sum_checks(
    kernel: &dyn ReproducingKernel,
    mk_l1: f64,
    sample_grid: &PhaseGrid,
    at: &[PhasePoint],
    seed: u64,
) -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = 0;
    let mut worst = 0.0f64;
    for s in 0..50 {
        let eps = rng.random_range(0.3..1.0);
        let set = random_separated(sample_grid, eps, 60, seed * 100 + s);
        let c = check_discrete_sum(kernel, &set, mk_l1, at).unwrap();
        passed += c.holds as usize;
        worst = worst.max(c.max_sum / c.bound);
    }
    (passed, worst)
}

fn discrete_sum_bound_holds() -> Outcome {
    let kf = kernel_field(&GaussianKernel, &plane_grid()).unwrap();
    let at = sup_points(&PhaseGrid::plane_box(2.0, 0.1, Scheme::Midpoint), 1, &[]);
    let (plane, plane_worst) = count_sum_checks(&GaussianKernel, kf.mk_l1(), &plane_grid(), &at, 1);

    let (_, kernel) = poisson();
    let kgrid = PhaseGrid::half_plane_rect(-6.0, 6.0, 1.0 / 16.0, 16.0, 0.05, 0.05, Scheme::Midpoint).unwrap();
    let mk = kernel_field(&kernel, &kgrid).unwrap().mk_l1();
    let sample = PhaseGrid::half_plane_rect(-3.0, 3.0, 0.25, 4.0, 0.05, 0.05, Scheme::Midpoint).unwrap();
    let at = sup_points(
        &PhaseGrid::half_plane_rect(-1.0, 1.0, 0.5, 2.0, 0.05, 0.05, Scheme::Midpoint).unwrap(),
        1,
        &[],
    );
    let (half, half_worst) = count_sum_checks(&kernel, mk, &sample, &at, 2);
    (
        plane == 50 && half == 50,
        format!("{plane}/50 plane (max sum/bound {plane_worst:.3}), {half}/50 half-plane (max {half_worst:.3})"),
    )
}

fn bessel_bound() -> Outcome {
    let set = plane_lattice(0.5, 4.0);
    let grid = plane_grid();
    let k_l1 = kernel_field(&GaussianKernel, &grid).unwrap().k_l1();
    let b_suff = upper_frame_bound(&GaussianKernel, k_l1, &set, &sup_points(&grid, 4, &[&set])).b_suff;
    let n = 10;
    let system = AnalysisSystem::new(&Signal::gaussian(), &set, TestSpace::hermite_at(n, 0.5, 1.2), &q()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut passed = 0;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let c = DVector::from_fn(n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let ratio = system.samples(&c).norm_squared() / system.norm(&c).powi(2);
        passed += (ratio <= b_suff) as usize;
        worst = worst.max(ratio);
    }
    (
        passed == 20,
        format!("{passed}/20, max ratio {worst:.3} vs B_suff {b_suff:.3}"),
    )
}

fn covering_chain() -> Outcome {
    let set = plane_lattice(0.25, 4.0);
    let grid = plane_grid();
    let r = frame_report(FrameProblem {
        atom: &Signal::gaussian(),
        kernel: &GaussianKernel,
        set: &set,
        grid: &grid,
        q: &q(),
        test_space: TestSpace::hermite(8),
        delta: Some(0.18),
        sup_stride: 4,
    })
    .unwrap();
    let (Some(d1), Some(d2), Some(a), Some(b)) = (r.d1_cov, r.d2_cov, r.a_cov, r.b_cov) else {
        return (false, format!("no covering certificate: {:?}", r.verdicts));
    };
    let ok = d1 * d2 < 1.0 && a > 0.0 && a - 0.05 <= r.a_emp && r.a_emp <= r.b_emp && r.b_emp <= b + 0.05;
    (
        ok,
        format!(
            "d1·d2 = {:.3}, A_cov {a:.3} <= A_emp {:.3} <= B_emp {:.3} <= B_cov {b:.3}",
            d1 * d2,
            r.a_emp,
            r.b_emp
        ),
    )
}

fn stability_chain() -> Outcome {
    let set = plane_lattice(0.5, 4.0);
    let grid = plane_grid();
    let space = || TestSpace::hermite(8);
    let a = empirical_frame_bounds(&Signal::gaussian(), &set, space(), &q())
        .unwrap()
        .a;
    let mut rows = Vec::new();
    let mut passed = 0;
    let mut d1s = Vec::new();
    for (k, delta) in [0.1, 0.05, 0.025].into_iter().enumerate() {
        let jit = jitter(&set, delta, k as u64).unwrap();
        let s = stability_quantities(&GaussianKernel, &set, &jit, &grid, 4).unwrap();
        let a_jit = empirical_frame_bounds(&Signal::gaussian(), &jit, space(), &q())
            .unwrap()
            .a;
        let lower = perturbed_lower_bound(a, s.d1, s.d2);
        passed += (a_jit >= lower - 0.05) as usize;
        d1s.push(s.d1);
        rows.push(format!("δ={delta}: d1 {:.3}, A {a_jit:.3} >= {lower:.3}", s.d1));
    }
    let monotone = d1s.windows(2).all(|w| w[1] < w[0]);
    (
        passed == 3 && monotone,
        format!("{passed}/3, d1 monotone {monotone}; {}", rows.join("; ")),
    )
}

fn separated_subset() -> Outcome {
    let lat = plane_lattice(0.5, 3.0);
    let gamma = lat.union(&jitter(&lat, 0.05, 9).unwrap()).unwrap();
    let delta = 0.4;
    let sub = extract_separated_subset(&gamma, delta).unwrap();
    let pts = sub.subset.points();
    let mut min_dist = f64::INFINITY;
    for i in 0..pts.len() {
        for j in 0..i {
            min_dist = min_dist.min(sub.subset.distance(pts[i], pts[j]));
        }
    }
    let reps = PointSet::new(Geometry::Plane, sub.assignment.iter().map(|&i| pts[i]).collect()).unwrap();
    let s = stability_quantities(&GaussianKernel, &gamma, &reps, &plane_grid(), 4).unwrap();
    let space = || TestSpace::hermite(6);
    let emp = empirical_frame_bounds(&Signal::gaussian(), &gamma, space(), &q()).unwrap();
    let emp_sub = empirical_frame_bounds(&Signal::gaussian(), &sub.subset, space(), &q()).unwrap();
    let margin = separated_margin(emp.a, emp.b, sub.multiplicity, s.d1, s.d2).unwrap();
    let ok = min_dist >= delta && sub.multiplicity == 2 && (margin <= 0.0 || margin <= emp_sub.a + 0.05);
    (
        ok,
        format!(
            "separation {min_dist:.3} >= {delta}, N = {}, margin {margin:.3} vs A_emp(subset) {:.3}",
            sub.multiplicity, emp_sub.a
        ),
    )
}

fn dbar_witness() -> Outcome {
    let grid = PhaseGrid::plane_box(3.0, 0.05, Scheme::Midpoint);
    let f = Signal::gaussian();
    let disc = 2.5;
    let w = FockWeight::default().within(disc);
    let gauss = dbar_residual(&Signal::gaussian(), &w, &f, &grid, &q())
        .unwrap()
        .residual;
    let boxed = dbar_residual(&Signal::boxcar(1.0).unwrap(), &w, &f, &grid, &q())
        .unwrap()
        .residual;
    let z0 = PhasePoint::new(0.3, 0.7);
    let shifted = dbar_residual(
        &Signal::gaussian().gabor_atom(z0.x, z0.y),
        &FockWeight::shifted(z0).within(disc),
        &f,
        &grid,
        &q(),
    )
    .unwrap()
    .residual;
    let ratio = shifted / gauss;
    (
        gauss <= 1e-2 && gauss <= 0.1 * boxed && (0.5..=2.0).contains(&ratio),
        format!("gaussian {gauss:.2e}, box {boxed:.2e}, shifted {shifted:.2e} (ratio {ratio:.2})"),
    )
}

fn harmonicity_witness() -> Outcome {
    let grid = PhaseGrid::half_plane_rect(-1.5, 1.5, 0.5, 2.0, 0.01, 0.02, Scheme::Midpoint).unwrap();
    let f = Signal::gaussian();
    let weight = PowerWeight::for_exponent(-2.0);
    let psi = Signal::closed(Descriptor::real_power(-2.0)).unwrap();
    let lap = laplacian_residual(&psi, weight, &f, &grid, &q()).unwrap().residual;
    let hat = laplacian_residual(&Signal::mexican_hat(), weight, &f, &grid, &q())
        .unwrap()
        .residual;
    let ts: Vec<f64> = (-200..=200).map(|k| k as f64 * 0.05).collect();
    let ode = [-2.0, -3.0].map(|a| ode_check_poisson(a, &ts).unwrap());
    (
        lap <= 1e-2 && lap <= 0.1 * hat && ode.iter().all(|&v| v <= 1e-10),
        format!(
            "Poisson {lap:.2e}, mexican hat {hat:.2e}, ODE {:.1e} / {:.1e}",
            ode[0], ode[1]
        ),
    )
}

fn bargmann() -> Outcome {
    let grid = PhaseGrid::plane_box(5.0, 0.05, Scheme::Midpoint);
    let f = Signal::hermite(2).translate(0.3).modulate(-0.4);
    let r = fock_consistency(&f, &grid, 2.0, &q()).unwrap();
    (
        r.gaussian_unity <= 1e-5 && r.isometry <= 1e-2 && r.pointwise <= 1e-4,
        format!(
            "unity {:.2e}, isometry {:.2e}, pointwise {:.2e}",
            r.gaussian_unity, r.isometry, r.pointwise
        ),
    )
}

fn frame_algorithm() -> Outcome {
    let set = plane_lattice(0.5, 4.0);
    let n = 8;
    let system = AnalysisSystem::new(&Signal::gaussian(), &set, TestSpace::hermite_at(n, 3.0, 1.0), &q()).unwrap();
    let (a, b) = system.frame_bounds();
    let truth = DVector::from_fn(n, |m, _| {
        Complex64::new(((m * 7 + 3) % 5) as f64 - 2.0, ((m * 3 + 1) % 4) as f64 - 1.5)
    });
    let rec = frame_reconstruct(&system, &system.samples(&truth), a, b, 10, Some(&truth)).unwrap();
    let ratios = rec.error_ratios().unwrap();
    let gamma = rec.predicted_rate;
    let within = ratios.iter().filter(|&&r| (r - gamma).abs() <= 0.2 * gamma).count();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    (
        within == ratios.len() && ratios.len() == 10,
        format!(
            "{within}/{} ratios in [{lo:.4}, {hi:.4}] within 20% of {gamma:.4}",
            ratios.len()
        ),
    )
}

/// The report with its header object removed.
fn report_body(dir: &Path) -> Vec<u8> {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let start = text.find("\"command\"").expect("report has a command field");
    text.as_bytes()[start..].to_vec()
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_framelab");
    let tmp = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for command in ["stability", "reconstruct"] {
        let out = tmp.path().join(command);
        let mut runs = Vec::new();
        for _ in 0..2 {
            let status = Command::new(exe)
                .args([command, "--seed", "7", "--out"])
                .arg(&out)
                .output()
                .unwrap()
                .status;
            if !status.success() {
                return (false, format!("{command} exited with {status}"));
            }
            let summary = std::fs::read(out.join("summary.csv")).unwrap_or_default();
            runs.push((report_body(&out), summary));
        }
        let same = runs[0] == runs[1];
        ok &= same;
        details.push(format!("{command} {}", if same { "identical" } else { "differs" }));
    }
    (ok, details.join(", "))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("energy conservation", energy_conservation),
        ("Gaussian kernel closed form", gaussian_kernel_closed_form),
        ("reproducing identity", reproducing_identity),
        ("discrete-sum bound", discrete_sum_bound_holds),
        ("Bessel bound", bessel_bound),
        ("covering certificate chain", covering_chain),
        ("stability chain", stability_chain),
        ("separated-subset extraction", separated_subset),
        ("dbar uniqueness witness", dbar_witness),
        ("harmonicity witness", harmonicity_witness),
        ("Bargmann transform", bargmann),
        ("frame algorithm", frame_algorithm),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {name}: {} ({detail}) [{:.1} s]",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
