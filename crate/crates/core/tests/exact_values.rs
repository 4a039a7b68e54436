//! Exact-pipeline values checked against independent references.

mod common;

use kzstring::evolution::{energy, pullback, ExactSolution};
use kzstring::vector::norm_sq;
use kzstring::*;
use std::f64::consts::{FRAC_PI_2, TAU};

/// 8·E(m = 3/4), evaluated to 30 digits with an arbitrary-precision library.
const ELLIPSE_2_1_PERIMETER: f64 = 9.688_448_220_547_676;
/// ½ϱ(1.3) + ½ϱ(0.7) for the (2, 1) ellipse, same source.
const ELLIPSE_THETA_AT_0_3_1_0: f64 = 0.796_537_233_141_174_6;

fn map_for(pres: Presentation, vel: VelocitySpec, n: usize) -> KzMap {
    let c = make_curve(&pres, &vel, 2, Topology::default()).unwrap();
    KzMap::build(
        &c,
        &lambda_init(&c, &uniform_grid(Topology::default(), n)).unwrap(),
    )
    .unwrap()
}

fn ellipse(n: usize) -> KzMap {
    map_for(
        Presentation::preset("ellipse", &[2.0, 1.0]),
        VelocitySpec::Zero,
        n,
    )
}

#[test]
fn agm_reference_matches_frozen_perimeter() {
    assert!((common::ellipse_perimeter(2.0, 1.0) - ELLIPSE_2_1_PERIMETER).abs() < 1e-14);
    assert!((common::ellipse_perimeter(1.5, 1.5) - 1.5 * TAU).abs() < 1e-14);
}

#[test]
fn sigma_period_of_ellipse_is_its_perimeter() {
    let map = ellipse(1024);
    assert!((map.sigma_length() - ELLIPSE_2_1_PERIMETER).abs() < 1e-10);
}

#[test]
fn theta_of_ellipse_matches_adaptive_quadrature() {
    let map = ellipse(1024);
    let reference =
        0.5 * common::ellipse_varrho(2.0, 1.0, 1.3) + 0.5 * common::ellipse_varrho(2.0, 1.0, 0.7);
    assert!((reference - ELLIPSE_THETA_AT_0_3_1_0).abs() < 1e-12);
    assert!((map.theta(0.3, 1.0).unwrap() - reference).abs() < 1e-9);
}

#[test]
fn rho_of_ellipse_is_arc_length() {
    let map = ellipse(512);
    for k in 0..16 {
        let th = 0.39 * k as f64;
        let r = common::ellipse_rho(2.0, 1.0, th);
        assert!((map.rho(th).unwrap() - r).abs() < 1e-10, "θ = {th}");
    }
}

#[test]
fn circle_collapses_to_a_point() {
    let map = map_for(
        Presentation::preset("circle", &[1.0]),
        VelocitySpec::Zero,
        256,
    );
    let grid = sigma_grid(&map, 256, 0.0).unwrap();
    let s = dalembert_state(&map, FRAC_PI_2, &grid).unwrap();
    assert!(s.max_radius() <= 1e-10);
}

#[test]
fn gauge_holds_for_ellipse_and_circle() {
    let circle = map_for(
        Presentation::preset("circle", &[1.0]),
        VelocitySpec::Zero,
        256,
    );
    let grid = sigma_grid(&circle, 256, 0.0).unwrap();
    for t in [0.0, 0.7, FRAC_PI_2] {
        assert!(gauge_check(&dalembert_state(&circle, t, &grid).unwrap()).max() <= 1e-12);
    }
    let map = ellipse(1024);
    let grid = sigma_grid(&map, 1024, 0.0).unwrap();
    for t in [0.0, 0.5, 2.0] {
        assert!(gauge_check(&dalembert_state(&map, t, &grid).unwrap()).max() <= 1e-8);
    }
}

#[test]
fn drift_of_moving_circle_matches_integral_of_normal_velocity() {
    let v = 0.1;
    let map = map_for(
        Presentation::preset("circle", &[1.0]),
        VelocitySpec::Constant(vec![0.0, v]),
        512,
    );
    // q_⊥ = q − p'⟨q, p'⟩ for the unit circle, ρ' = 2 / gap.
    let normal_y = |th: f64| v - th.cos() * v * th.cos();
    let rho_prime = |th: f64| {
        let (g00, g01, g11) = (v * v - 1.0, v * th.cos(), 1.0);
        let (p, m) = common::quadratic_speeds(g00, g01, g11);
        2.0 / (p - m)
    };
    let dy = common::adaptive_simpson(|th| normal_y(th) * rho_prime(th), 0.0, TAU, 1e-13);
    let period = common::adaptive_simpson(rho_prime, 0.0, TAU, 1e-13);
    let grid = sigma_grid(&map, 64, 0.0).unwrap();
    let report = periodicity_check(&map, &grid, &[0.0, 0.4, 1.1]).unwrap();
    assert!((report.period - period).abs() < 1e-9);
    assert!(report.drift[0].abs() < 1e-9);
    assert!((report.drift[1] - dy).abs() < 1e-9);
    assert!(report.max_deviation < 1e-9);
}

#[test]
fn static_circle_is_time_periodic() {
    let map = map_for(
        Presentation::preset("circle", &[1.0]),
        VelocitySpec::Zero,
        256,
    );
    let grid = sigma_grid(&map, 128, 0.0).unwrap();
    let report = periodicity_check(&map, &grid, &[0.0, 0.3, 1.7, 4.0]).unwrap();
    assert!((report.period - TAU).abs() < 1e-12);
    assert!(report.max_deviation <= 1e-10);
}

#[test]
fn energy_is_the_sigma_period() {
    let map = ellipse(512);
    let grid = sigma_grid(&map, 512, 0.0).unwrap();
    for t in [0.0, 0.4, 1.5, 3.0] {
        let s = dalembert_state(&map, t, &grid).unwrap();
        assert!((energy(&s, map.sigma_length()) - map.sigma_length()).abs() < 1e-10);
    }
}

#[test]
fn zero_time_recovers_the_data() {
    let c = make_curve(
        &Presentation::Fourier {
            cos: vec![vec![0.0, 1.2, 0.0, 0.1], vec![0.0, 0.0, 0.15, 0.0]],
            sin: vec![vec![0.0, 0.0, 0.2, 0.0], vec![0.0, 0.9, 0.0, -0.05]],
        },
        &VelocitySpec::Fourier {
            cos: vec![vec![0.1, 0.0, 0.05], vec![0.0, 0.1, 0.0]],
            sin: vec![vec![0.0, 0.1, 0.0], vec![0.05, 0.0, 0.0]],
        },
        2,
        Topology::default(),
    )
    .unwrap();
    let map = KzMap::build(
        &c,
        &lambda_init(&c, &uniform_grid(Topology::default(), 512)).unwrap(),
    )
    .unwrap();
    // In the σ-chart the position is p∘ϱ.
    let grid = sigma_grid(&map, 128, 0.0).unwrap();
    let s = dalembert_state(&map, 0.0, &grid).unwrap();
    for (i, &sigma) in grid.iter().enumerate() {
        let p = c.position(map.varrho(sigma).unwrap());
        assert!((s.position(i)[0] - p[0]).abs() <= 1e-10);
        assert!((s.position(i)[1] - p[1]).abs() <= 1e-10);
    }
    // Pulled back, both position and velocity are the data.
    let thetas = uniform_grid(Topology::default(), 64);
    let back = pullback(&map, &ExactSolution::new(&map), 0.0, &thetas).unwrap();
    for (i, &th) in thetas.iter().enumerate() {
        let d = c.sample(th);
        for j in 0..2 {
            assert!((back.position(i)[j] - d.position[j]).abs() <= 1e-10);
            assert!((back.velocity(i)[j] - d.velocity[j]).abs() <= 1e-10);
        }
    }
}

#[test]
fn evolved_speeds_match_metric_of_pullback() {
    let map = ellipse(512);
    let thetas = uniform_grid(Topology::default(), 48);
    for t in [0.3, 0.9] {
        let s = pullback(&map, &ExactSolution::new(&map), t, &thetas).unwrap();
        for (i, &th) in thetas.iter().enumerate() {
            let (p, m) = lambda_solution(&map, t, th).unwrap();
            let (v, x) = (s.velocity(i), s.tangent(i));
            let g01 = v[0] * x[0] + v[1] * x[1];
            let (rp, rm) = common::quadratic_speeds(norm_sq(v) - 1.0, g01, norm_sq(x));
            assert!((p - rp).abs() < 1e-9 && (m - rm).abs() < 1e-9);
        }
    }
}

#[test]
fn evolved_speeds_solve_the_characteristic_system() {
    let map = ellipse(512);
    let residual = |h: f64| {
        let mut worst = 0.0f64;
        for k in 0..12 {
            let (t, th) = (0.2 + 0.05 * k as f64, 0.5 * k as f64);
            let at = |t: f64, th: f64| lambda_solution(&map, t, th).unwrap();
            let (p, m) = at(t, th);
            let (ptp, mtp) = at(t + h, th);
            let (ptm, mtm) = at(t - h, th);
            let (psp, msp) = at(t, th + h);
            let (psm, msm) = at(t, th - h);
            let rp = (ptp - ptm) / (2.0 * h) + m * (psp - psm) / (2.0 * h);
            let rm = (mtp - mtm) / (2.0 * h) + p * (msp - msm) / (2.0 * h);
            worst = worst.max(rp.abs()).max(rm.abs());
        }
        worst
    };
    let (coarse, fine) = (residual(1e-2), residual(5e-3));
    assert!(fine < 1e-4, "{fine}");
    assert!(fine < 0.3 * coarse, "{coarse} → {fine}");
}
