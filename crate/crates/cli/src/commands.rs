use std::f64::consts::PI;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use serde::Serialize;

use cellmix::config::KeyValueConfig;
use cellmix::experiments::{
    batchelor_spectrum, correlation_decay_experiment, default_window, dissipation_sweep, fit_decay,
    mixing_experiment, realization_seeds, write_fits_csv, CorrelationConfig, Forcing, MixingConfig, RunMeta,
    SpectrumConfig, SweepConfig,
};
use cellmix::flow::{FlowKind, Point};
use cellmix::lagrangian::ScalarFunction;
use cellmix::solver::SimulationConfig;
use cellmix::twopoint::{build_initial, two_point_solve, uniform_density, CoefficientSet, TwoPointConfig};
use cellmix::verify::{
    check_exponent_system, default_omega_sq, fit_commutator_bound, hardy_poincare_1d, hardy_poincare_2d,
    identity_suite, x_only_guard, pointwise_bound_check, minimize_exponents, phi_h1_ratio_bracket, psi_controls_phi_ratio,
    unweighted_poincare_constant, CommutatorBound, ExponentAssignment, Objective,
};

use crate::Suite;

pub struct Context {
    pub kv: KeyValueConfig,
    pub out: PathBuf,
    pub name: &'static str,
}

impl Context {
    fn seed(&self) -> Result<u64> {
        Ok(self.kv.get_or("flow.seed", 0u64)?)
    }

    fn file(&self, name: &str) -> Result<File> {
        std::fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        File::create(&path).with_context(|| format!("creating {}", path.display()))
    }

    fn meta(&self, config: impl Serialize, seeds: Vec<u64>) -> Result<()> {
        RunMeta::new(self.name, serde_json::to_value(config)?, seeds).write(&self.out)?;
        Ok(())
    }

    fn json(&self, name: &str, value: &impl Serialize) -> Result<()> {
        serde_json::to_writer_pretty(self.file(name)?, value)?;
        Ok(())
    }
}

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("window must be 't0,t1', got '{s}'"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn kv_window(kv: &KeyValueConfig, t_final: f64) -> Result<Option<(f64, f64)>> {
    let t0: Option<f64> = kv.get("fit.t0")?;
    let t1: Option<f64> = kv.get("fit.t1")?;
    Ok(match (t0, t1) {
        (None, None) => None,
        (a, b) => {
            let (d0, d1) = default_window(t_final);
            Some((a.unwrap_or(d0), b.unwrap_or(d1)))
        }
    })
}

/// `realizations`, `fit.t0`, `fit.t1` plus the simulation keys.
pub fn simulate(ctx: &Context) -> Result<()> {
    let base = SimulationConfig::from_kv(&ctx.kv)?;
    let cfg = MixingConfig {
        realizations: ctx.kv.get_or("realizations", 1usize)?,
        window: kv_window(&ctx.kv, base.t_final)?,
        base,
    };
    let r = mixing_experiment(&cfg)?;
    let mut w = csv::Writer::from_writer(ctx.file("series.csv")?);
    for (i, s) in r.series.iter().enumerate() {
        s.write_csv(&mut w, i == 0)?;
    }
    w.flush()?;
    let mut fits = r.fits.clone();
    fits.push(r.averaged_fit.clone());
    write_fits_csv(ctx.file("fits.csv")?, &fits)?;
    r.averaged.write_csv(ctx.file("averaged.csv")?)?;
    ctx.meta(&cfg, r.seeds.clone())?;
    for f in &fits {
        println!("{}: rate {:.6} R2 {:.4} on [{}, {}]", f.series_id, f.rate, f.r_squared, f.t0, f.t1);
    }
    println!("rate mean {:.6} std {:.6}", r.rate_mean(), r.rate_std());
    Ok(())
}

#[derive(Serialize)]
struct TwoPointRun {
    n: usize,
    nu: f64,
    kappa: f64,
    coeffs: String,
    solver: TwoPointConfig,
}

/// `grid.n`, `flow.nu`, `kappa`, `dt`, `t_final`, `record_every`, `coeffs`, `advect`.
/// The initial datum is the lift of `θ₀ = sin x₁ + cos x₂` with uniform shift density.
pub fn two_point(ctx: &Context, snapshots: bool) -> Result<()> {
    let kv = &ctx.kv;
    let d = TwoPointConfig::default();
    let run = TwoPointRun {
        n: kv.get_or("grid.n", 12usize)?,
        nu: kv.get_or("flow.nu", 4.0)?,
        kappa: kv.get_or("kappa", 0.0)?,
        coeffs: kv.get_or("coeffs", "moderate".to_string())?,
        solver: TwoPointConfig {
            dt: kv.get_or("dt", d.dt)?,
            t_final: kv.get_or("t_final", d.t_final)?,
            record_every: kv.get_or("record_every", d.record_every)?,
            advect: kv.get_or("advect", d.advect)?,
        },
    };
    let n = run.n;
    let h = 2.0 * PI / n as f64;
    let theta: Vec<f64> = (0..n * n).map(|i| ((i / n) as f64 * h).sin() + ((i % n) as f64 * h).cos()).collect();
    let state = build_initial(n, &theta, &uniform_density(n), run.nu, run.kappa)?;
    let coeffs = CoefficientSet::preset(&run.coeffs)?.with_nu(run.nu);
    let snap_dir = ctx.out.join("snapshots");
    if snapshots {
        std::fs::create_dir_all(&snap_dir)?;
    }
    let (series, _) = two_point_solve(&state, &coeffs, &run.solver, snapshots.then_some(snap_dir.as_path()))?;
    series.write_csv(ctx.file("two_point.csv")?)?;
    ctx.meta(&run, vec![])?;
    if series.phi_negative {
        log::warn!("Phi became negative; the coefficients are outside the admissible set");
    }
    for i in 0..series.len() {
        println!("t {:.3} phi {:.6e} l2 {:.6e} h1w {:.6e}", series.t[i], series.phi[i], series.l2[i], series.h1w[i]);
    }
    Ok(())
}

struct Observable(String);

impl ScalarFunction for Observable {
    fn eval(&self, x: Point) -> f64 {
        match self.0.as_str() {
            "stream" => x[0].sin() * x[1].sin(),
            _ => x[0].sin(),
        }
    }
}

/// `flow.kind`, `flow.nu`, `kappa`, `n_max`, `realizations`, `nq`, `samples`, `dt`,
/// `observable.h`, `observable.g` (`sine` or `stream`).
pub fn correlate(ctx: &Context) -> Result<()> {
    let kv = &ctx.kv;
    let d = CorrelationConfig::default();
    let flow: FlowKind = match kv.raw("flow.kind") {
        Some(s) => s.parse()?,
        None => d.flow,
    };
    let cfg = CorrelationConfig {
        flow,
        nu: kv.get_or("flow.nu", d.nu)?,
        kappa: kv.get_or("kappa", d.kappa)?,
        n_max: kv.get_or("n_max", d.n_max)?,
        realizations: kv.get_or("realizations", d.realizations)?,
        nq: kv.get_or("nq", d.nq)?,
        samples: kv.get_or("samples", d.samples)?,
        dt: kv.get_or("dt", d.dt)?,
        seed: ctx.seed()?,
    };
    let names = [kv.get_or("observable.h", "sine".to_string())?, kv.get_or("observable.g", "sine".to_string())?];
    for name in &names {
        if name != "sine" && name != "stream" {
            bail!("unknown observable '{name}' (expected sine or stream)");
        }
    }
    let [h, g] = names.map(Observable);
    let r = correlation_decay_experiment(&h, &g, &cfg)?;
    r.write_csv(ctx.file("correlations.csv")?)?;
    write_fits_csv(ctx.file("fits.csv")?, &r.fits)?;
    ctx.meta(&cfg, realization_seeds(cfg.seed, cfg.realizations))?;
    println!("gamma {:.6}, exceedance fraction {:.4}", r.gamma, r.exceedance);
    for (n, e) in r.exceedance_by_n.iter().enumerate() {
        println!("n {n}: exceedance {e:.3}");
    }
    Ok(())
}

pub fn verify(ctx: &Context, suite: Suite) -> Result<()> {
    let kv = &ctx.kv;
    let seed = ctx.seed()?;
    match suite {
        Suite::Identities => {
            let n = kv.get_or("grid.n", 12usize)?;
            let samples = kv.get_or("samples", 20usize)?;
            let report = identity_suite(n, samples, kv.get_or("kmax", 1i64)?, seed)?;
            for r in &report.residuals {
                println!("{:<45} stated={:<5} residual {:.3e}", r.name, r.stated, r.max_residual);
            }
            let ops = cellmix::twopoint::TwoPointOps::new(n);
            let mut l1 = Vec::new();
            for s in 0..samples as u64 {
                let f = cellmix::twopoint::random_field6(n, 2, false, cellmix::rng::split_seed(seed, s))?;
                l1.push(pointwise_bound_check(&ops, &f));
            }
            let violations: usize = l1.iter().map(|r| r.violations).sum();
            println!("pointwise bound: {violations} violations over {samples} fields");
            let mut fits = Vec::new();
            if kv.get_or("commutators", false)? {
                for b in [CommutatorBound::ThirdOrder, CommutatorBound::FourthOrderM2, CommutatorBound::FourthOrderM1] {
                    let f = fit_commutator_bound(n, b, 4, 4, seed)?;
                    println!("{:?}: K {:.4}, held-out max {:.4}", f.bound, f.constant, f.held_out_max);
                    fits.push(f);
                }
            }
            ctx.json("identities.json", &serde_json::json!({"identities": report, "pointwise": l1, "commutators": fits}))?;
        }
        Suite::Hardy => {
            let n1 = kv.get_or("hardy.n1", 128usize)?;
            let n2 = kv.get_or("hardy.n2", 32usize)?;
            let unweighted = unweighted_poincare_constant(n1);
            let one = [hardy_poincare_1d(n1)?, hardy_poincare_1d(2 * n1)?];
            let two = [
                hardy_poincare_2d(n2, default_omega_sq, 8, seed)?,
                hardy_poincare_2d(2 * n2, default_omega_sq, 8, seed)?,
            ];
            println!("unweighted Poincare constant {unweighted:.9}");
            for r in &one {
                println!("1D n={}: weighted constant {:.5}", r.n, r.weighted_constant);
            }
            for r in &two {
                println!("2D n={}: floor {:.5}, sampled min {:.5}", r.n, r.floor, r.sample_min);
            }
            ctx.json("hardy.json", &serde_json::json!({"unweighted": unweighted, "one_d": one, "two_d": two}))?;
        }
        Suite::Ratios => {
            let n = kv.get_or("grid.n", 8usize)?;
            let samples = kv.get_or("samples", 100usize)?;
            let nu = kv.get_or("flow.nu", 4.0)?;
            let kappa_tilde = kv.get_or("kappa", 0.0)? / 4.0;
            let coeffs = CoefficientSet::preset(&kv.get_or("coeffs", "moderate".to_string())?)?.with_nu(nu);
            let bracket = phi_h1_ratio_bracket(n, samples, &coeffs, kappa_tilde, seed)?;
            let p = cellmix::twopoint::Diffusivities { nu, kappa_tilde };
            let psi = psi_controls_phi_ratio(n, samples, &coeffs, p, seed)?;
            let guard = x_only_guard(n, samples.min(50), seed)?;
            println!("Phi/H1^2 in [{:.4e}, {:.4e}]", bracket.min, bracket.max);
            println!("max Phi/Psi {:.4e}, violations {}", psi.max, psi.violations);
            println!("Poincare guard ratio {:.4} (limit {:.4})", guard.max_ratio, guard.guard);
            ctx.json("ratios.json", &serde_json::json!({"phi_h1": bracket, "phi_psi": psi, "guard": guard}))?;
        }
        Suite::Coeffs => {
            let report = check_exponent_system(&ExponentAssignment::PAPER);
            let minima = [minimize_exponents(Objective::MaxExponent), minimize_exponents(Objective::Sum)];
            print_check(&report);
            for m in &minima {
                println!("{:?}: {:?} value {} (LP bound {})", m.objective, m.assignment.to_vec(), m.objective_value, m.lp_bound);
            }
            ctx.json("coeffs.json", &serde_json::json!({"published": report, "minima": minima}))?;
        }
    }
    ctx.meta(serde_json::json!({"suite": format!("{suite:?}").to_lowercase(), "config": kv}), vec![seed])
}

fn print_check(r: &cellmix::verify::CheckReport) {
    println!("feasible: {}", r.feasible);
    for s in &r.tight {
        println!("tight: {} ({} = {})", s.label, s.lhs, s.rhs);
    }
    for s in &r.violated {
        println!("violated: {} ({} < {})", s.label, s.lhs, s.rhs);
    }
}

pub fn coeffs(ctx: &Context, minimize: Option<&str>, assignment: Option<&str>) -> Result<()> {
    let a = match assignment {
        None => ExponentAssignment::PAPER,
        Some(s) => {
            let v: Vec<i64> = s.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>()?;
            let v: [i64; 9] = v.try_into().map_err(|_| anyhow!("expected nine exponents"))?;
            ExponentAssignment::from_vec(v)
        }
    };
    let report = check_exponent_system(&a);
    print_check(&report);
    let min = match minimize {
        Some(o) => {
            let m = minimize_exponents(o.parse()?);
            println!("minimiser {:?}: value {} (LP bound {})", m.assignment.to_vec(), m.objective_value, m.lp_bound);
            Some(m)
        }
        None => None,
    };
    ctx.json("coeffs.json", &serde_json::json!({"assignment": a, "report": report, "minimum": min}))?;
    ctx.meta(serde_json::json!({"assignment": a.to_vec(), "minimize": minimize}), vec![])
}

/// `kappas`, `realizations`, `lambda` plus the simulation keys. Without
/// `lambda`, a `κ = 0` mixing run over the same realizations supplies it.
pub fn sweep_kappa(ctx: &Context) -> Result<()> {
    let base = SimulationConfig::from_kv(&ctx.kv)?;
    let realizations = ctx.kv.get_or("realizations", 4usize)?;
    let kappas = ctx.kv.get_list("kappas")?.unwrap_or_else(|| vec![1e-3, 3e-4, 1e-4]);
    let lambda_hat = match ctx.kv.get::<f64>("lambda")? {
        Some(l) => l,
        None => {
            let cfg = MixingConfig { realizations, window: None, base: SimulationConfig { kappa: 0.0, ..base.clone() } };
            let l = mixing_experiment(&cfg)?.averaged_fit.rate;
            println!("kappa = 0 mixing rate {l:.6}");
            l
        }
    };
    let cfg = SweepConfig { base, kappas, realizations, lambda_hat };
    let r = dissipation_sweep(&cfg)?;
    r.write_csv(ctx.file("sweep.csv")?)?;
    let fits: Vec<_> = r.entries.iter().flat_map(|e| e.fits.iter().chain(&e.late_fits).cloned()).collect();
    write_fits_csv(ctx.file("fits.csv")?, &fits)?;
    ctx.meta(&cfg, realization_seeds(cfg.base.seed, realizations))?;
    for e in &r.entries {
        println!("kappa {:.1e}: mu {:.4e} mu*log(1/kappa) {:.4} late rate {:.4e}", e.kappa, e.mu, e.mu_log, e.late_rate);
    }
    println!("spread of mu*log(1/kappa): {:.3}", r.mu_log_spread());
    Ok(())
}

pub fn fit(
    ctx: &Context,
    input: &Path,
    column: &str,
    time: &str,
    window: Option<&str>,
    realization: Option<&str>,
) -> Result<()> {
    let mut rdr = csv::Reader::from_path(input).with_context(|| format!("reading {}", input.display()))?;
    let headers = rdr.headers()?.clone();
    let idx = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| anyhow!("no column '{name}'"));
    let (ti, vi) = (idx(time)?, idx(column)?);
    let ri = realization.map(|_| idx("realization")).transpose()?;
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if let (Some(ri), Some(want)) = (ri, realization) {
            if &row[ri] != want {
                continue;
            }
        }
        ts.push(row[ti].parse::<f64>()?);
        vs.push(row[vi].parse::<f64>()?);
    }
    if ts.is_empty() {
        bail!("no rows selected from {}", input.display());
    }
    let w = match window {
        Some(s) => parse_window(s)?,
        None => default_window(ts.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    };
    let f = fit_decay(&ts, &vs, w, column)?;
    println!("{}", serde_json::to_string_pretty(&f)?);
    ctx.json("fit.json", &f)?;
    ctx.meta(serde_json::json!({"input": input, "column": column, "window": w, "realization": realization}), vec![])
}

/// Simulation keys plus `forcing.kmin`, `forcing.kmax`, `forcing.amplitude`,
/// `average_from`, `width`, `slope.lo`, `slope.hi`.
pub fn spectrum(ctx: &Context) -> Result<()> {
    let kv = &ctx.kv;
    let sim = SimulationConfig::from_kv(kv)?;
    let cfg = SpectrumConfig {
        forcing: Forcing {
            kmin: kv.get_or("forcing.kmin", 1.0)?,
            kmax: kv.get_or("forcing.kmax", 2.0)?,
            amplitude: kv.get_or("forcing.amplitude", 1.0)?,
        },
        average_from: kv.get_or("average_from", 0.5 * sim.t_final)?,
        width: kv.get_or("width", 1.0)?,
        sim,
    };
    let s = batchelor_spectrum(&cfg)?;
    s.write_csv(ctx.file("spectrum.csv")?)?;
    let lo = kv.get_or("slope.lo", 2.0 * cfg.forcing.kmax)?;
    let hi = kv.get_or("slope.hi", cfg.sim.n as f64 / 6.0)?;
    match s.slope(lo, hi) {
        Ok(v) => println!("log-log slope on [{lo}, {hi}]: {v:.4}"),
        Err(e) => log::warn!("no slope: {e}"),
    }
    ctx.meta(&cfg, vec![cfg.sim.seed])
}
