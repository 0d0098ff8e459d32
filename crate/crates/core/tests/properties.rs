use num_complex::Complex64;
use proptest::prelude::*;
use viscofront::cm::{check_cm, geometric_grid, CmFunction};
use viscofront::config::{KernelConfig, ModelConfig, RunConfig};
use viscofront::dispersion::Medium;
use viscofront::inversion::wavefront_kernel;
use viscofront::material::{
    make_log_g, make_powerlaw_g, make_zener, solve_duality, DualityOptions, ModelSpec,
};

fn cm_function() -> impl Strategy<Value = CmFunction> {
    prop_oneof![
        (0.1..10.0f64, 0.05..0.95f64).prop_map(|(a, e)| CmFunction::power_law(a, e).unwrap()),
        (0.1..10.0f64, 0.01..100.0f64).prop_map(|(w, r)| CmFunction::exponential(w, r).unwrap()),
        (0.1..10.0f64, 0.1..3.0f64, 1.0..5.0f64)
            .prop_map(|(a, b, c)| CmFunction::logarithmic(a, b, c).unwrap()),
    ]
}

fn zener() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.2..5.0f64, 0.05..5.0f64, 0.1..10.0f64, 0.2..5.0f64)
}

fn medium_strategy() -> impl Strategy<Value = Medium> {
    prop_oneof![
        zener().prop_map(|(a, b, c, d)| Medium::new(make_zener(a, b, c, d).unwrap()).unwrap()),
        (0.5..2.0f64, 0.2..3.0f64, 0.1..0.9f64)
            .prop_map(|(c0, a, al)| Medium::new(make_powerlaw_g(c0, a, al, 1.0).unwrap()).unwrap()),
        (0.5..2.0f64, 0.2..3.0f64, 0.2..2.0f64, 1.0..3.0f64).prop_map(|(c0, a, b, big)| {
            Medium::new(make_log_g(c0, a, b, big, 1.0).unwrap()).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cm_values_are_non_negative_and_non_increasing(f in cm_function(), t in 1e-3..1e2f64, k in 1.01..10.0f64) {
        let (a, b) = (f.eval(t).unwrap(), f.eval(t * k).unwrap());
        prop_assert!(b >= 0.0);
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn sums_of_cm_functions_pass_the_sign_test(f in cm_function(), g in cm_function()) {
        let s = CmFunction::sum(vec![f, g]);
        let grid = geometric_grid(1e-2, 1e1, 4);
        prop_assert!(check_cm(|t| s.eval(t).unwrap(), &grid, 3).pass());
    }

    #[test]
    fn p_times_transform_is_bernstein(f in cm_function(), p in 1e-2..1e2f64, k in 1.01..10.0f64) {
        let lo = f.p_laplace_cut(Complex64::new(p, 0.0)).re;
        let hi = f.p_laplace_cut(Complex64::new(p * k, 0.0)).re;
        prop_assert!(lo >= 0.0);
        prop_assert!(hi >= lo * (1.0 - 1e-12));
        // and p g~(p) / p = g~(p) is non-increasing
        prop_assert!(hi / (p * k) <= lo / p * (1.0 + 1e-12));
    }

    #[test]
    fn transform_matches_cut_continuation(f in cm_function(), re in 1e-2..1e2f64, im in -1e2..1e2f64) {
        let p = Complex64::new(re, im);
        let a = p * f.laplace(p).unwrap();
        let b = f.p_laplace_cut(p);
        prop_assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-12));
    }

    #[test]
    fn zener_dispersion_is_admissible((j0, j1, tau, rho) in zener(), p in 1e-2..1e2f64, k in 1.01..10.0f64, w in 1e-2..1e2f64) {
        let m = Medium::new(make_zener(j0, j1, tau, rho).unwrap()).unwrap();
        let kp = m.kappa(Complex64::new(p, 0.0)).unwrap();
        let kq = m.kappa(Complex64::new(p * k, 0.0)).unwrap();
        prop_assert!(kp.re > 0.0 && kq.re > kp.re);
        prop_assert!(kp.re - p / m.c0() >= -1e-12 * kp.re);
        let ad = m.attenuation_dispersion(&[w]).unwrap();
        prop_assert!(ad.attenuation[0] >= -1e-14);
        prop_assert!(ad.phase_speed[0] <= m.c0() * (1.0 + 1e-12));
    }

    #[test]
    fn zener_relaxation_matches_closed_form((j0, j1, tau, _) in zener()) {
        let model = make_zener(j0, j1, tau, 1.0).unwrap();
        let ModelSpec::Compliance(j) = &model.spec else { unreachable!() };
        let g = solve_duality(j, &DualityOptions::for_compliance(j)).unwrap();
        prop_assert!(g.residual <= 1e-6);
        prop_assert!(g.is_non_increasing(1e-12));
        let rate = (j0 + j1) / (j0 * tau);
        for (&t, &v) in g.times.iter().zip(&g.values).step_by(64) {
            let exact = 1.0 / j0 - j1 / (j0 * (j0 + j1)) * (1.0 - (-rate * t).exp());
            prop_assert!((v - exact).abs() <= 1e-6 * (1.0 / j0), "t = {t}: {v} vs {exact}");
        }
    }

    #[test]
    fn config_round_trips(kind in 0..5usize, a in 0.1..10.0f64, b in 0.1..0.9f64, c in 1.0..4.0f64) {
        let model = match kind {
            0 => ModelConfig::Elastic { j0: a, rho: c },
            1 => ModelConfig::Zener { j0: a, j1: b, tau: c, rho: 1.0 },
            2 => ModelConfig::PowerlawG { c0: c, a, alpha: b, rho: 1.0 },
            3 => ModelConfig::LogG { c0: 1.0, a, b, big_a: c, rho: 2.0 },
            _ => ModelConfig::CompositeG {
                c0: c,
                rho: 1.0,
                kernels: vec![
                    KernelConfig::PowerLaw { amplitude: a, exponent: b },
                    KernelConfig::Exponential { weight: b, rate: a },
                ],
            },
        };
        let cfg = RunConfig { model: Some(model), ..RunConfig::default() };
        prop_assert_eq!(RunConfig::parse(&cfg.to_toml(), "echo").unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernel_is_a_monotone_probability(m in medium_strategy(), r in 0.1..3.0f64) {
        let s = m.scale();
        let k = wavefront_kernel(&m, r, &geometric_grid(1e-3 * s, 1e2 * s, 3)).unwrap();
        prop_assert!(k.h.iter().all(|&h| (-1e-9..=1.0 + 1e-9).contains(&h)), "{:?}", k.h);
        prop_assert!(k.is_non_decreasing(1e-9), "{:?}", k.h);
    }
}
