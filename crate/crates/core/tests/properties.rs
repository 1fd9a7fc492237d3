use std::f64::consts::PI;

use proptest::prelude::*;

use cellmix::experiments::{fit_decay, mixing_experiment_with, MixingConfig};
use cellmix::flow::{cellular_velocity, FlowKind};
use cellmix::solver::{random_bandlimited, InitialDatum, SimulationConfig};
use cellmix::spectral::GridField6D;
use cellmix::twopoint::{random_field6, CoefficientSet, TwoPointOps};
use cellmix::verify::phi_h1_ratio;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval(seed in any::<u64>(), kmax in 1.0f64..10.0) {
        let f = random_bandlimited(32, kmax, seed).unwrap().scale(3.0);
        let cell = (2.0 * PI / 32.0).powi(2);
        let grid = (f.to_grid().iter().map(|v| v * v).sum::<f64>() * cell).sqrt();
        prop_assert!((grid - f.l2_norm()).abs() <= 1e-12 * grid);
        prop_assert!((f.sobolev_norm(0.0).unwrap() - f.l2_norm()).abs() <= 1e-12 * grid);
    }

    #[test]
    fn sobolev_homogeneity(seed in any::<u64>(), a in -10.0f64..10.0, s in -2.0f64..2.0) {
        let f = random_bandlimited(32, 6.0, seed).unwrap();
        let lhs = f.scale(a).sobolev_norm(s).unwrap();
        let rhs = a.abs() * f.sobolev_norm(s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn sobolev_monotone_in_order(seed in any::<u64>(), s in -3.0f64..3.0, ds in 0.0f64..1.0) {
        let f = random_bandlimited(32, 8.0, seed).unwrap();
        prop_assert!(f.sobolev_norm(s).unwrap() <= f.sobolev_norm(s + ds).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn sobolev_interpolation(seed in any::<u64>(), s in -2.0f64..0.0, t in 0.0f64..2.0) {
        let f = random_bandlimited(32, 8.0, seed).unwrap();
        let mid = 0.5 * (s + t);
        let lhs = f.sobolev_norm(mid).unwrap().powi(2);
        let rhs = f.sobolev_norm(s).unwrap() * f.sobolev_norm(t).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn fit_recovers_noisy_rate(rate in 0.2f64..2.0, noise in prop::collection::vec(-1.0f64..1.0, 40)) {
        let t: Vec<f64> = (0..40).map(|i| 20.0 * i as f64 / 39.0).collect();
        let v: Vec<f64> = t.iter().zip(&noise).map(|(t, e)| (-rate * t).exp() * (1.0 + 0.01 * e)).collect();
        let f = fit_decay(&t, &v, (0.0, 20.0), "noisy").unwrap();
        prop_assert!((f.rate - rate).abs() <= 0.02 * rate, "{} vs {}", f.rate, rate);
    }

    #[test]
    fn velocity_translation_invariant_and_bounded(
        x in prop::array::uniform2(-10.0f64..10.0),
        y in prop::array::uniform2(-10.0f64..10.0),
        s in prop::array::uniform2(-10.0f64..10.0),
    ) {
        let a = cellular_velocity(x, y);
        let b = cellular_velocity([x[0] + s[0], x[1] + s[1]], [y[0] + s[0], y[1] + s[1]]);
        prop_assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        prop_assert!(a[0].hypot(a[1]) <= 2f64.sqrt() + 1e-15);
        let c = cellular_velocity([x[0] + 2.0 * PI, x[1] - 2.0 * PI], y);
        prop_assert!((a[0] - c[0]).abs() < 1e-9 && (a[1] - c[1]).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn phi_ratio_scale_invariant(seed in any::<u64>(), a in 0.1f64..10.0) {
        let ops = TwoPointOps::new(8);
        let f = random_field6(8, 2, true, seed).unwrap();
        let g = GridField6D::from_values(8, f.values().iter().map(|v| a * v).collect()).unwrap();
        let c = CoefficientSet::moderate();
        let r1 = phi_h1_ratio(&ops, &f, &c, 0.0);
        let r2 = phi_h1_ratio(&ops, &g, &c, 0.0);
        prop_assert!((r1 - r2).abs() <= 1e-12 * r1);
    }

    #[test]
    fn mixing_fit_invariant_under_amplitude(seed in any::<u64>()) {
        let base = SimulationConfig {
            n: 32,
            kappa: 1e-3,
            dt: 0.02,
            t_final: 2.0,
            flow: FlowKind::RandomCellular,
            nu: 4.0,
            seed,
            theta0: InitialDatum::Disk,
            record_every: 5,
        };
        let cfg = MixingConfig { realizations: 2, ..MixingConfig::new(base) };
        let theta = InitialDatum::Disk.sample(32).unwrap();
        let one = mixing_experiment_with(&cfg, &theta).unwrap();
        let two = mixing_experiment_with(&cfg, &theta.scale(2.0)).unwrap();
        for (a, b) in one.fits.iter().chain([&one.averaged_fit]).zip(two.fits.iter().chain([&two.averaged_fit])) {
            prop_assert!((a.rate - b.rate).abs() <= 1e-10 * a.rate.abs().max(1.0));
            prop_assert!((b.intercept - a.intercept - 2f64.ln()).abs() <= 1e-10);
        }
    }
}
