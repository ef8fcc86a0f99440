use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::equilibrium::occupation;
use crate::field::smooth_random_slice;
use crate::params::{ModelParams, Statistics, Transport};
use crate::quadrature::integrate;

fn setup(stats: Statistics, theta: f64, n: usize) -> (MomentumGrid, EquilibriumProfile) {
    let params = ModelParams::new(stats, Transport::Linear, theta);
    let grid = MomentumGrid::uniform(n, params.p_max).unwrap();
    let prof = EquilibriumProfile::build(&params, grid.nodes()).unwrap();
    (grid, prof)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

const ALL: [(Statistics, f64); 3] = [
    (Statistics::Fermion, 1.0),
    (Statistics::Boson, 1.0),
    (Statistics::Classical, 0.0),
];

#[test]
fn kernel_residual_is_second_order() {
    for (stats, theta) in ALL {
        let r: Vec<f64> = [128, 256, 512]
            .iter()
            .map(|&n| {
                let (grid, prof) = setup(stats, theta, n);
                max_abs(&apply_l(&prof.sqrt_mu_inf, &prof, &grid).unwrap())
            })
            .collect();
        assert!((r[0] / r[1]).log2() >= 1.9, "{stats:?}: {r:?}");
        assert!((r[1] / r[2]).log2() >= 1.9, "{stats:?}: {r:?}");
    }
}

#[test]
fn classical_operator_is_harmonic_oscillator() {
    let (grid, prof) = setup(Statistics::Classical, 0.3, 128);
    let g: Vec<f64> = grid.nodes().iter().map(|p| (-p * p / 3.0).exp() * (1.0 + p)).collect();
    let lg = apply_l(&g, &prof, &grid).unwrap();
    let d2 = grid.second_derivative(&g);
    for i in 0..g.len() {
        let p = grid.nodes()[i];
        let expect = d2[i] + g[i] * (0.5 - 0.25 * p * p);
        assert!((lg[i] - expect).abs() < 1e-12 * (1.0 + expect.abs()));
    }
}

#[test]
fn divergence_form_agrees_at_second_order() {
    for (stats, theta) in ALL {
        let err = |n: usize| {
            let (grid, prof) = setup(stats, theta, n);
            let g: Vec<f64> = grid
                .nodes()
                .iter()
                .zip(&prof.sqrt_mu_inf)
                .map(|(p, s)| s * (p - 0.3 * p * p * p))
                .collect();
            let a = apply_l(&g, &prof, &grid).unwrap();
            let b = apply_l_divergence(&g, &prof, &grid).unwrap();
            let diff: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a - b).collect();
            grid.norm_sq(&diff).sqrt()
        };
        let (e1, e2) = (err(128), err(256));
        assert!((e1 / e2).log2() > 1.8, "{stats:?}: {e1} {e2}");
    }
}

#[test]
fn dirichlet_form_vanishes_on_kernel() {
    for (stats, theta) in ALL {
        let (grid, prof) = setup(stats, theta, 256);
        let h2 = grid.spacing().powi(2);
        let rho = grid.norm_sq(&prof.sqrt_mu_inf);
        assert!(dirichlet_form(&prof.sqrt_mu_inf, &prof, &grid).unwrap().abs() <= h2 * rho);
        assert!(weighted_dirichlet_form(&prof.sqrt_mu_inf, &prof, &grid).unwrap().abs() < 1e-20);
    }
}

#[test]
fn three_way_identity_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (stats, theta) in ALL {
        let (grid, prof) = setup(stats, theta, 256);
        let tol = 10.0 * grid.spacing().powi(2);
        for _ in 0..20 {
            let g = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 5);
            let lg = apply_l(&g, &prof, &grid).unwrap();
            let a = grid.dot(&lg, &g);
            let b = dirichlet_form(&g, &prof, &grid).unwrap();
            let c = weighted_dirichlet_form(&g, &prof, &grid).unwrap();
            assert!(a <= 0.0 && b <= 0.0 && c <= 0.0);
            let scale = b.abs();
            assert!((a - b).abs() <= tol * scale, "{a} {b}");
            assert!((c - b).abs() <= tol * scale, "{c} {b}");
        }
    }
}

#[test]
fn odd_gaussian_matches_quadrature() {
    let (grid, prof) = setup(Statistics::Fermion, 1.0, 256);
    let g: Vec<f64> = grid.nodes().iter().map(|p| p * (-0.5 * p * p).exp()).collect();
    let value = dirichlet_form(&g, &prof, &grid).unwrap();
    let oracle = -integrate(
        |p| {
            let f = occupation(0.5 * p * p + 1.0, -1.0);
            let eta = 1.0 - 2.0 * f;
            let e = (-0.5 * p * p).exp();
            let r = (1.0 - p * p) * e + 0.5 * p * eta * p * e;
            r * r
        },
        -8.0,
        8.0,
        1e-13,
        0.0,
    )
    .unwrap()
    .value;
    assert!(value < 0.0);
    assert!((value - oracle).abs() <= 10.0 * grid.spacing().powi(2) * oracle.abs());
}

#[test]
fn projection_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (stats, theta) in ALL {
        let (grid, prof) = setup(stats, theta, 128);
        let pk = project_pi(&prof.sqrt_mu_inf, &prof, &grid).unwrap();
        for (a, b) in pk.iter().zip(&prof.sqrt_mu_inf) {
            assert!((a - b).abs() <= 1e-10 * b.abs() + 1e-300);
        }
        let g = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 4);
        let p1 = project_pi(&g, &prof, &grid).unwrap();
        let p2 = project_pi(&p1, &prof, &grid).unwrap();
        assert!(max_abs(&p1.iter().zip(&p2).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-14);
        let odd: Vec<f64> = grid.nodes().iter().zip(&prof.sqrt_mu_inf).map(|(p, s)| p * s).collect();
        assert!(max_abs(&project_pi(&odd, &prof, &grid).unwrap()) < 1e-14);
        // self-adjoint
        let h = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 4);
        let ph = project_pi(&h, &prof, &grid).unwrap();
        assert!((grid.dot(&p1, &h) - grid.dot(&g, &ph)).abs() < 1e-13);
    }
}

#[test]
fn lambda_norm_oracle_and_l2_control() {
    let (grid, prof) = setup(Statistics::Boson, 1.0, 256);
    assert_eq!(lambda_norm(&vec![0.0; 256], &prof, &grid).unwrap(), 0.0);
    let g: Vec<f64> = grid.nodes().iter().map(|p| (-0.5 * p * p).exp()).collect();
    let oracle = integrate(
        |p| {
            let f = occupation(0.5 * p * p + 1.0, 1.0);
            let eta = 1.0 + 2.0 * f;
            let e = (-0.5 * p * p).exp();
            p * p * e * e + (p * eta * e).powi(2)
        },
        -8.0,
        8.0,
        1e-13,
        0.0,
    )
    .unwrap()
    .value;
    let v = lambda_norm_sq(&g, &prof, &grid).unwrap();
    assert!((v - oracle).abs() <= 10.0 * grid.spacing().powi(2) * oracle);

    // ||g||_Lambda >= c ||g||, c from inf eta
    let eta_min = prof.eta_inf.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let g = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 5);
        let ln = lambda_norm(&g, &prof, &grid).unwrap();
        assert!(ln >= 0.5 * eta_min.min(1.0) * grid.norm_sq(&g).sqrt());
    }
}

#[test]
fn self_adjoint_to_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (stats, theta) in ALL {
        let (grid, prof) = setup(stats, theta, 256);
        let tol = 10.0 * grid.spacing().powi(2);
        for _ in 0..10 {
            let g = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 5);
            let h = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 5);
            let lg = apply_l(&g, &prof, &grid).unwrap();
            let lh = apply_l(&h, &prof, &grid).unwrap();
            let asym = (grid.dot(&lg, &h) - grid.dot(&g, &lh)).abs();
            assert!(asym <= tol * grid.norm_sq(&g).sqrt() * grid.norm_sq(&h).sqrt());
        }
    }
}

#[test]
fn mixed_form_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (stats, theta) in ALL {
        let (grid, prof) = setup(stats, theta, 512);
        for _ in 0..5 {
            let g = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 4);
            let a = mixed_form(&g, &prof, &grid).unwrap();
            let b = mixed_form_direct(&g, &prof, &grid).unwrap();
            let scale = gradient_lambda_norm_sq(&g, &prof, &grid).unwrap();
            assert!((a - b).abs() <= 20.0 * grid.spacing().powi(2) * scale, "{a} {b} {scale}");
        }
    }
}

#[test]
fn quadratic_remainder_limits() {
    let params = ModelParams::new(Statistics::Classical, Transport::Nonlinear, 0.0);
    let grid = PhaseGrid::new(16, 64, &params).unwrap();
    let prof = EquilibriumProfile::build(&params, grid.p.nodes()).unwrap();
    let g = PerturbationField::fourier_hermite_mode(&grid, &prof, 1, 1);
    assert!(apply_q(&g, &prof, &grid).unwrap().iter().all(|v| *v == 0.0));

    // x-independent g: only the momentum part survives, so sigma is irrelevant
    let p1 = ModelParams::new(Statistics::Boson, Transport::Nonlinear, 1.0);
    let p0 = ModelParams::new(Statistics::Boson, Transport::Linear, 1.0);
    let prof1 = EquilibriumProfile::build(&p1, grid.p.nodes()).unwrap();
    let prof0 = EquilibriumProfile::build(&p0, grid.p.nodes()).unwrap();
    let flat = PerturbationField::fourier_hermite_mode(&grid, &prof1, 0, 1);
    let q1 = apply_q(&flat, &prof1, &grid).unwrap();
    let q0 = apply_q(&flat, &prof0, &grid).unwrap();
    assert!((&q1 - &q0).iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn linearization_residual_is_second_order() {
    for stats in [Statistics::Fermion, Statistics::Boson] {
        let res = |n: usize| {
            let params = ModelParams::new(stats, Transport::Nonlinear, 1.0);
            let grid = PhaseGrid::new(16, n, &params).unwrap();
            let prof = EquilibriumProfile::build(&params, grid.p.nodes()).unwrap();
            let mut g = PerturbationField::fourier_hermite_mode(&grid, &prof, 1, 2);
            g.values *= 0.05;
            let r = linearization_residual(&g, &prof, &grid).unwrap();
            grid.norm_sq(&r).sqrt()
        };
        let (a, b, c) = (res(64), res(128), res(256));
        assert!((a / b).log2() > 1.8 && (b / c).log2() > 1.8, "{stats:?}: {a} {b} {c}");
    }
}

#[test]
fn gaussian_poincare_constant_is_one() {
    let params = ModelParams::new(Statistics::Classical, Transport::Linear, 0.0);
    let report = CoercivityReport::compute(&params, 256).unwrap();
    assert!((report.poincare_const - 1.0).abs() < 0.02, "{report:?}");
    assert!(report.lambda > 0.0);
}

#[test]
fn spectral_gap_positive_and_stable() {
    for stats in [Statistics::Fermion, Statistics::Boson] {
        let params = ModelParams::new(stats, Transport::Linear, 1.0);
        let r = CoercivityReport::refine(&params, 256).unwrap();
        assert!(r.coarse.lambda > 0.0 && r.coarse.poincare_const > 0.0);
        assert!(r.relative_change <= 0.05, "{r:?}");
        assert!(r.coarse.c3.is_finite() && r.coarse.c2.is_finite());
    }
}

#[test]
fn spectral_gap_rejects_nonpositive_theta() {
    let params = ModelParams::new(Statistics::Fermion, Transport::Linear, -0.5);
    assert!(CoercivityReport::compute(&params, 64).is_err());
}

fn reports() -> &'static [(EquilibriumProfile, MomentumGrid, CoercivityReport)] {
    use std::sync::OnceLock;
    static CELL: OnceLock<Vec<(EquilibriumProfile, MomentumGrid, CoercivityReport)>> = OnceLock::new();
    CELL.get_or_init(|| {
        ALL.iter()
            .map(|&(stats, theta)| {
                let (grid, prof) = setup(stats, theta, 128);
                let r = estimate_spectral_gap(&prof, &grid).unwrap();
                (prof, grid, r)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn coercivity_holds_with_reported_gap(which in 0usize..3, seed in any::<u64>()) {
        let (prof, grid, report) = &reports()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 6);
        let pg = project_pi(&g, prof, grid).unwrap();
        for (a, b) in g.iter_mut().zip(&pg) {
            *a -= b;
        }
        let form = dirichlet_form(&g, prof, grid).unwrap();
        let ln = lambda_norm_sq(&g, prof, grid).unwrap();
        prop_assert!(form <= -report.lambda * ln * (1.0 - 1e-6));
    }

    #[test]
    fn continuity_holds_with_reported_constant(which in 0usize..3, seed in any::<u64>()) {
        let (prof, grid, report) = &reports()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 6);
        let h = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 6);
        let lhs = dirichlet_bilinear(&h, &g, prof, grid).unwrap().abs();
        let rhs = report.c3 * lambda_norm(&g, prof, grid).unwrap() * lambda_norm(&h, prof, grid).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9));
    }

    #[test]
    fn mixed_bound_holds_with_reported_constants(which in 0usize..3, seed in any::<u64>()) {
        let (prof, grid, report) = &reports()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 6);
        let lhs = mixed_form(&g, prof, grid).unwrap();
        let rhs = -report.c1 * gradient_lambda_norm_sq(&g, prof, grid).unwrap() + report.c2 * grid.norm_sq(&g);
        prop_assert!(lhs <= rhs + 1e-9 * rhs.abs().max(lhs.abs()));
    }

    #[test]
    fn dissipation_is_nonpositive(which in 0usize..3, seed in any::<u64>()) {
        let (prof, grid, _) = &reports()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = smooth_random_slice(&mut rng, grid.nodes(), &prof.sqrt_mu_inf, 6);
        let lg = apply_l(&g, prof, grid).unwrap();
        prop_assert!(grid.dot(&lg, &g) <= 0.0);
    }
}
