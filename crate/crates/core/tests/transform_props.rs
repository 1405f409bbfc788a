use framelab_core::grid::PhaseGrid;
use framelab_core::kernels::{
    maximal_function, maximal_function_radius, reproduce_at, sample_kernel, GaussianKernel, PoissonKernel,
};
use framelab_core::signals::{inner_product, l2_norm, normalize_wavelet};
use framelab_core::transforms::{gabor_transform, wavelet_transform};
use framelab_core::{Descriptor, PhasePoint, QuadratureSpec, Scheme, Signal};
use proptest::prelude::*;

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn gabor_covariance(di in -8i64..8, dj in -8i64..8, n in 0usize..3) {
        let h = 0.1;
        let grid = PhaseGrid::plane_box(2.5, h, Scheme::Midpoint);
        let g = Signal::gaussian();
        let f = Signal::hermite(n).translate(0.2);
        let z0 = PhasePoint::new(di as f64 * h, dj as f64 * h);
        let base = gabor_transform(&f, &g, &grid, &q()).unwrap();
        let moved = gabor_transform(&f.gabor_atom(z0.x, z0.y), &g, &grid, &q()).unwrap();
        for i in 0..grid.nx() as i64 {
            for j in 0..grid.ny() as i64 {
                let (si, sj) = (i - di, j - dj);
                if si < 0 || sj < 0 || si >= grid.nx() as i64 || sj >= grid.ny() as i64 {
                    continue;
                }
                let a = moved.at(i as usize, j as usize).norm();
                let b = base.at(si as usize, sj as usize).norm();
                prop_assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn maximal_function_grows_with_radius(r in 0.2f64..1.0) {
        let grid = PhaseGrid::plane_box(3.0, 0.05, Scheme::Midpoint);
        let k = sample_kernel(&GaussianKernel, &grid).unwrap();
        let small = maximal_function_radius(&k, r).unwrap();
        let unit = maximal_function(&k).unwrap();
        for (a, b) in small.values().iter().zip(unit.values()) {
            prop_assert!(a.re <= b.re + 1e-15);
        }
    }
}

#[test]
fn gabor_energy_error_shrinks_under_refinement() {
    let f = Signal::boxcar(1.0).unwrap().translate(0.3);
    let g = Signal::gaussian();
    let e = l2_norm(&f, &q()).powi(2);
    let errors: Vec<f64> = [(2.0, 0.1), (3.0, 0.07), (4.0, 0.05)]
        .iter()
        .map(|&(r, h)| {
            let field = gabor_transform(&f, &g, &PhaseGrid::plane_box(r, h, Scheme::Midpoint), &q()).unwrap();
            (field.norm_sq() - e).abs() / e
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn gabor_reproducing_identity_at_random_points() {
    let grid = PhaseGrid::plane_box(4.0, 0.05, Scheme::Midpoint);
    let g = Signal::gaussian();
    for f in [
        Signal::hermite(1),
        Signal::gaussian().translate(-0.7).modulate(0.4),
        Signal::hermite(3).dilate(1.3),
    ] {
        let field = gabor_transform(&f, &g, &grid, &q()).unwrap();
        let norm = field.l2_norm();
        for w in [
            PhasePoint::new(0.37, -1.1),
            PhasePoint::new(-2.2, 0.45),
            PhasePoint::new(1.05, 1.9),
        ] {
            let direct = inner_product(&f, &g.gabor_atom(w.x, w.y), &q()).unwrap();
            let rep = reproduce_at(&field, &GaussianKernel, w).unwrap();
            assert!((direct - rep).norm() <= 1e-2 * norm, "{w:?}");
        }
    }
}

#[test]
fn wavelet_reproducing_identity_at_random_points() {
    let d = Descriptor::PoissonComplex { alpha: 5.0 };
    let psi = normalize_wavelet(&Signal::closed(d).unwrap(), &q()).unwrap().signal;
    let kernel = PoissonKernel::new(d).unwrap();
    let grid = PhaseGrid::half_plane_rect(-5.0, 5.0, 1.0 / 32.0, 8.0, 0.04, 0.05, Scheme::Midpoint).unwrap();
    for f in [
        Signal::gaussian().dilate(0.8).modulate(2.5),
        Signal::gaussian().translate(0.5).modulate(1.5),
        Signal::hermite(1).dilate(0.5).modulate(4.0),
    ] {
        let field = wavelet_transform(&f, &psi, &grid, &q()).unwrap();
        let norm = field.l2_norm();
        for w in [
            PhasePoint::new(0.2, 0.4),
            PhasePoint::new(-0.6, 0.9),
            PhasePoint::new(1.1, 0.25),
        ] {
            let direct = inner_product(&f, &psi.wavelet_atom(w.x, w.y), &q()).unwrap();
            let rep = reproduce_at(&field, &kernel, w).unwrap();
            assert!(
                (direct - rep).norm() <= 1e-2 * norm,
                "{w:?}: {direct} vs {rep} (norm {norm})"
            );
        }
    }
}
