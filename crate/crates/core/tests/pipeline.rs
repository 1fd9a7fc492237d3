use std::f64::consts::PI;

use cellmix::config::KeyValueConfig;
use cellmix::experiments::{fit_decay, steady_control, MixingConfig, mixing_experiment};
use cellmix::flow::FlowKind;
use cellmix::solver::{solve, InitialDatum, SimulationConfig};
use cellmix::spectral::Snapshot;
use cellmix::twopoint::{build_initial, two_point_solve, uniform_density, CoefficientSet, TwoPointConfig};

#[test]
fn heat_rate_from_l2_series() {
    let kv = KeyValueConfig::parse(
        "grid.n = 64\nkappa = 0.05\ndt = 0.01\nt_final = 10\nflow.kind = still\ntheta0 = sine\nrecord_every = 10\n",
    )
    .unwrap();
    let cfg = SimulationConfig::from_kv(&kv).unwrap();
    let s = solve(&cfg, 0).unwrap().series;
    let f = fit_decay(&s.times, &s.l2, (0.0, 10.0), "l2").unwrap();
    assert!((f.rate - 0.05).abs() <= 0.01 * 0.05, "{}", f.rate);
    assert!(f.r_squared > 0.999_999);
}

#[test]
fn steady_flow_slows_down() {
    let base = SimulationConfig {
        n: 64,
        kappa: 0.0,
        dt: 0.02,
        t_final: 20.0,
        flow: FlowKind::SteadyCellular,
        nu: 4.0,
        seed: 1,
        theta0: InitialDatum::Disk,
        record_every: 5,
    };
    let c = steady_control(&base, (0.0, 10.0), (10.0, 20.0)).unwrap();
    assert!(c.early.rate > 0.0);
    assert!(c.series.l2.iter().all(|v| (v - c.series.l2[0]).abs() < 1e-6 * c.series.l2[0]));
}

#[test]
fn random_flow_realizations_share_the_time_grid() {
    let base = SimulationConfig {
        n: 32,
        kappa: 0.0,
        dt: 0.02,
        t_final: 3.0,
        flow: FlowKind::RandomCellular,
        nu: 4.0,
        seed: 11,
        theta0: InitialDatum::Disk,
        record_every: 5,
    };
    let r = mixing_experiment(&MixingConfig { realizations: 3, ..MixingConfig::new(base) }).unwrap();
    assert_eq!(r.averaged.times, r.series[0].times);
    assert_eq!(r.averaged.times.len(), 31);
    for f in &r.fits {
        assert!(f.rate.is_finite() && (0.0..=1.0).contains(&f.r_squared));
        assert!((f.t0 - 0.6).abs() < 1e-9 && (f.t1 - 3.0).abs() < 1e-9);
    }
}

#[test]
fn two_point_run_writes_readable_snapshots() {
    let n = 8;
    let h = 2.0 * PI / n as f64;
    let theta: Vec<f64> = (0..n * n).map(|i| ((i / n) as f64 * h).sin()).collect();
    let state = build_initial(n, &theta, &uniform_density(n), 4.0, 0.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = TwoPointConfig { dt: 0.05, t_final: 0.2, record_every: 2, advect: true };
    let (series, last) = two_point_solve(&state, &CoefficientSet::moderate(), &cfg, Some(dir.path())).unwrap();
    assert_eq!(series.t.len(), 3);
    assert!(series.l2.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    let mut files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let snap = Snapshot::load(files.last().unwrap()).unwrap();
    assert_eq!(snap.values, last.f().values());
}
