//! Forward/inverse consistency of the coordinate maps on random points.

use kzstring::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn maps() -> Vec<KzMap> {
    let build = |c: InitialCurve| {
        let f = lambda_init(&c, &uniform_grid(c.topology(), 512)).unwrap();
        KzMap::build(&c, &f).unwrap()
    };
    vec![
        build(
            make_curve(
                &Presentation::preset("ellipse", &[2.0, 1.0]),
                &VelocitySpec::Zero,
                2,
                Topology::default(),
            )
            .unwrap(),
        ),
        build(
            make_curve(
                &Presentation::preset("circle", &[1.0]),
                &VelocitySpec::Constant(vec![0.3, 0.1]),
                2,
                Topology::default(),
            )
            .unwrap(),
        ),
        build(
            make_curve(
                &Presentation::Fourier {
                    cos: vec![
                        vec![0.0, 1.0, 0.2],
                        vec![0.0, 0.0, 0.1],
                        vec![0.0, 0.0, 0.3],
                    ],
                    sin: vec![
                        vec![0.0, 0.0, 0.0],
                        vec![0.0, 1.0, 0.0],
                        vec![0.0, 0.2, 0.0],
                    ],
                },
                &VelocitySpec::Fourier {
                    cos: vec![
                        vec![0.0, 0.0, 0.1],
                        vec![0.05, 0.0, 0.0],
                        vec![0.0, 0.1, 0.0],
                    ],
                    sin: vec![
                        vec![0.0, 0.1, 0.0],
                        vec![0.0, 0.0, 0.0],
                        vec![0.0, 0.0, 0.0],
                    ],
                },
                3,
                Topology::default(),
            )
            .unwrap(),
        ),
    ]
}

#[test]
fn rho_and_varrho_invert_each_other() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for map in maps() {
        let l = map.topology().length();
        let sigma_len = map.sigma_length();
        for _ in 0..256 {
            let th = rng.gen_range(-l..2.0 * l);
            assert!((map.varrho(map.rho(th).unwrap()).unwrap() - th).abs() <= 1e-10);
            let s = rng.gen_range(-sigma_len..2.0 * sigma_len);
            assert!((map.rho(map.varrho(s).unwrap()).unwrap() - s).abs() <= 1e-10);
        }
    }
}

#[test]
fn theta_and_phi_invert_each_other() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for map in maps() {
        let l = map.topology().length();
        let sigma_len = map.sigma_length();
        for _ in 0..256 {
            let t = rng.gen_range(0.0..1.5);
            let th = rng.gen_range(0.0..l);
            let s = map.phi(t, th).unwrap();
            assert!(
                (map.theta(t, s).unwrap() - th).abs() <= 1e-10,
                "t = {t}, θ = {th}"
            );
            let s = rng.gen_range(0.0..sigma_len);
            let th = map.theta(t, s).unwrap();
            assert!(
                (map.phi(t, th).unwrap() - s).abs() <= 1e-10,
                "t = {t}, σ = {s}"
            );
        }
    }
}

#[test]
fn theta_at_zero_time_is_varrho() {
    for map in maps() {
        for k in 0..64 {
            let s = 0.1 * k as f64;
            assert!((map.theta(0.0, s).unwrap() - map.varrho(s).unwrap()).abs() <= 1e-10);
        }
    }
}
