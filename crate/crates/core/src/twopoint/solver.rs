use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use super::coefficients::CoefficientSet;
use super::functionals::{dissipation_psi, lyapunov_phi, weighted_h1_norm, Diffusivities};
use super::ops::{Op, TwoPointOps};
use crate::error::{Error, Result};
use crate::spectral::{dealias_keep, unravel6, GridField6D, Snapshot, Spectrum6D, MEAN_ZERO_TOL};

/// Largest grid accepted by the two-point integrator.
pub const MAX_TWO_POINT_N: usize = 16;

/// Two-point density in tilted variables together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointState {
    f: GridField6D,
    nu: f64,
    kappa_tilde: f64,
}

fn check_grid(n: usize) -> Result<()> {
    if n > MAX_TWO_POINT_N {
        return Err(Error::MemoryGuard(n));
    }
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::UnsupportedGrid { n, reason: "two-point grids must be even and at least 4" });
    }
    Ok(())
}

impl TwoPointState {
    /// Wrap `f`, removing its x̃-mean. `kappa` is the physical diffusivity; `κ̃ = κ/4`.
    pub fn new(mut f: GridField6D, nu: f64, kappa: f64) -> Result<Self> {
        check_grid(f.n())?;
        if !(nu > 0.0) || !(kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("need nu > 0 and kappa >= 0, got {nu}, {kappa}")));
        }
        f.remove_x_mean();
        Ok(Self { f, nu, kappa_tilde: kappa / 4.0 })
    }

    pub fn f(&self) -> &GridField6D {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kappa_tilde(&self) -> f64 {
        self.kappa_tilde
    }

    pub fn diffusivities(&self) -> Diffusivities {
        Diffusivities { nu: self.nu, kappa_tilde: self.kappa_tilde }
    }

    /// `max_ỹ |∫ f dx̃| / (2π)⁴`.
    pub fn x_mean_max(&self) -> f64 {
        let scale = (2.0 * PI).powi(4);
        self.f.x_mean().iter().fold(0.0, |m, v| f64::max(m, (v / scale).abs()))
    }

    /// `max |f(x̃₁+π, x̃₂, x̃₃+π, …) − f|`.
    pub fn pi_shift_defect(&self) -> f64 {
        let n = self.n();
        let h = n / 2;
        let v = self.f.values();
        let strides = [n.pow(5), n.pow(4), n.pow(3)];
        let mut worst = 0.0f64;
        for (idx, &a) in v.iter().enumerate() {
            let i = unravel6(idx, n);
            let j0 = (i[0] + h) % n;
            let j2 = (i[2] + h) % n;
            let other = idx - i[0] * strides[0] - i[2] * strides[2] + j0 * strides[0] + j2 * strides[2];
            worst = worst.max((v[other] - a).abs());
        }
        worst
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::new(6, self.n() as u32, self.f.values().to_vec()).expect("six-dimensional lattice")
    }
}

/// Constant density `1/(4π²)` on an `n × n` grid.
pub fn uniform_density(n: usize) -> Vec<f64> {
    vec![1.0 / (4.0 * PI * PI); n * n]
}

/// Lift `θ₀` and `ρ₀`, both sampled row-major on the `n × n` lattice, to
/// `f̃(x̃, ỹ) = θ₀(x̃₁−x̃₃, x̃₂−x̃₄) θ₀(x̃₃+x̃₁, x̃₄+x̃₂) ρ₀(−ỹ₂, −ỹ₁)`.
/// The lattice x̃-mean of the lift vanishes when `θ₀` has no Nyquist content.
pub fn build_initial(n: usize, theta0: &[f64], rho0: &[f64], nu: f64, kappa: f64) -> Result<TwoPointState> {
    check_grid(n)?;
    if theta0.len() != n * n || rho0.len() != n * n {
        return Err(Error::InvalidParameter(format!("initial data must have {} samples", n * n)));
    }
    let cell = (2.0 * PI / n as f64).powi(2);
    let mean = theta0.iter().sum::<f64>() / (n * n) as f64;
    let rms = (theta0.iter().map(|v| v * v).sum::<f64>() / (n * n) as f64).sqrt();
    if mean.abs() > MEAN_ZERO_TOL * rms.max(1.0) {
        return Err(Error::NonZeroMean { mean, l2: rms * 2.0 * PI });
    }
    if let Some(v) = rho0.iter().find(|v| **v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidDensity(format!("density takes the value {v}")));
    }
    let mass = rho0.iter().sum::<f64>() * cell;
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDensity(format!("density has mass {mass}, expected 1")));
    }
    let t = |a: usize, b: usize| theta0[(a % n) * n + b % n];
    let f = GridField6D::from_values(
        n,
        (0..n.pow(6))
            .map(|idx| {
                let i = unravel6(idx, n);
                t(i[0] + n - i[2], i[1] + n - i[3]) * t(i[2] + i[0], i[3] + i[1]) * rho0[((n - i[5]) % n) * n + (n - i[4]) % n]
            })
            .collect(),
    )?;
    TwoPointState::new(f, nu, kappa)
}

/// Step size and output cadence for [`two_point_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Record every this many steps.
    pub record_every: usize,
    /// `false` drops the transport term.
    pub advect: bool,
}

impl Default for TwoPointConfig {
    fn default() -> Self {
        Self { dt: 0.05, t_final: 5.0, record_every: 5, advect: true }
    }
}

/// Advective step limit for the tilted velocity (`Σ|ũ_i| ≤ 2`).
pub fn two_point_cfl_limit(n: usize) -> f64 {
    0.5 * (2.0 * PI / n as f64)
}

/// Strang-split pseudo-spectral integrator.
pub struct TwoPointSolver {
    ops: TwoPointOps,
    spec: Spectrum6D,
    half_diffusion: Vec<f64>,
    keep: Vec<bool>,
    dt: f64,
    advect: bool,
    time: f64,
    nu: f64,
    kappa: f64,
}

impl TwoPointSolver {
    pub fn new(state: &TwoPointState, dt: f64, advect: bool) -> Result<Self> {
        let n = state.n();
        let limit = two_point_cfl_limit(n);
        if !(dt > 0.0) || (advect && dt > limit) {
            return Err(Error::Cfl { dt, limit });
        }
        let mut spec = state.f.forward();
        spec.dealias();
        let (nu, kt) = (state.nu, state.kappa_tilde);
        let mut half_diffusion = Vec::with_capacity(spec.coeffs().len());
        let mut keep = Vec::with_capacity(spec.coeffs().len());
        spec.map_modes(|k, c| {
            let ky = (k[4] * k[4] + k[5] * k[5]) as f64;
            let kx = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + k[3] * k[3]) as f64;
            half_diffusion.push((-(nu * ky + kt * kx) * dt / 2.0).exp());
            keep.push(k.iter().all(|&ki| dealias_keep(ki, n)));
            c
        });
        Ok(Self {
            ops: TwoPointOps::new(n),
            spec,
            half_diffusion,
            keep,
            dt,
            advect,
            time: 0.0,
            nu,
            kappa: 4.0 * kt,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn ops(&self) -> &TwoPointOps {
        &self.ops
    }

    pub fn spectrum(&self) -> &Spectrum6D {
        &self.spec
    }

    pub fn state(&self) -> TwoPointState {
        TwoPointState { f: self.spec.inverse(), nu: self.nu, kappa_tilde: self.kappa / 4.0 }
    }

    /// `−ũ·∇ₓ f`, dealiased.
    fn transport(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.spec.n();
        let s = Spectrum6D::from_coeffs(n, c.to_vec()).expect("same layout");
        let grad: Vec<Vec<f64>> = (0..4).map(|a| s.derivative(a).inverse().into_values()).collect();
        let u = self.ops.apply_grad(Op::UGrad, &grad).pop().expect("one component");
        let mut out = GridField6D::from_values(n, u).expect("lattice").forward().coeffs().to_vec();
        for (o, &k) in out.iter_mut().zip(&self.keep) {
            *o = if k { -*o } else { Complex64::new(0.0, 0.0) };
        }
        out
    }

    fn diffuse_half(&mut self) {
        for (c, f) in self.spec.coeffs_mut().iter_mut().zip(&self.half_diffusion) {
            *c *= *f;
        }
    }

    pub fn step(&mut self) -> Result<()> {
        self.diffuse_half();
        if self.advect {
            let h = self.dt;
            let y0 = self.spec.coeffs().to_vec();
            let stage = |k: &[Complex64], a: f64| -> Vec<Complex64> { y0.iter().zip(k).map(|(y, k)| y + k * a).collect() };
            let k1 = self.transport(&y0);
            let k2 = self.transport(&stage(&k1, h / 2.0));
            let k3 = self.transport(&stage(&k2, h / 2.0));
            let k4 = self.transport(&stage(&k3, h));
            for (i, c) in self.spec.coeffs_mut().iter_mut().enumerate() {
                *c = y0[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        self.diffuse_half();
        self.time += self.dt;
        if let Some(bad) = self.spec.coeffs().iter().find(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite(bad.re));
        }
        Ok(())
    }
}

/// Monitored quantities of a two-point run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TwoPointSeries {
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub h1w: Vec<f64>,
    pub l2: Vec<f64>,
    pub x_mean: Vec<f64>,
    /// `(Φ(t+dt) − Φ(t))/dt + ½Ψ(t)`.
    pub gronwall_residual: Vec<f64>,
    /// Set if Φ was ever negative, which signals coefficients outside the admissible set.
    pub phi_negative: bool,
}

impl TwoPointSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "phi", "psi", "h1w", "gronwall_residual", "l2", "x_mean"])?;
        for i in 0..self.len() {
            out.write_record(
                [self.t[i], self.phi[i], self.psi[i], self.h1w[i], self.gronwall_residual[i], self.l2[i], self.x_mean[i]]
                    .iter()
                    .map(|v| format!("{v:e}")),
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// One Strang step of size `dt`.
pub fn two_point_step(state: &TwoPointState, dt: f64) -> Result<TwoPointState> {
    let mut s = TwoPointSolver::new(state, dt, true)?;
    s.step()?;
    Ok(s.state())
}

/// Integrate to `t_final`, recording Φ, Ψ and the norms. If `snapshots` is
/// given, an MXC1 file is written there at every record.
pub fn two_point_solve(
    state: &TwoPointState,
    coeffs: &CoefficientSet,
    config: &TwoPointConfig,
    snapshots: Option<&Path>,
) -> Result<(TwoPointSeries, TwoPointState)> {
    let mut solver = TwoPointSolver::new(state, config.dt, config.advect)?;
    let steps = (config.t_final / config.dt - 1e-9).ceil() as usize;
    let every = config.record_every.max(1);
    let p = state.diffusivities();
    let mut series = TwoPointSeries::default();
    let mut pending: Option<usize> = None;
    for step in 0..=steps {
        let current = solver.state();
        if let Some(i) = pending.take() {
            let phi = lyapunov_phi(solver.ops(), current.f(), coeffs, p.kappa_tilde).value;
            series.gronwall_residual[i] = (phi - series.phi[i]) / config.dt + 0.5 * series.psi[i];
        }
        if step % every == 0 || step == steps {
            let phi = lyapunov_phi(solver.ops(), current.f(), coeffs, p.kappa_tilde);
            let psi = dissipation_psi(solver.ops(), current.f(), coeffs, p);
            series.phi_negative |= phi.negative;
            series.t.push(solver.time());
            series.phi.push(phi.value);
            series.psi.push(psi.value);
            series.h1w.push(weighted_h1_norm(solver.ops(), current.f(), p.kappa_tilde));
            series.l2.push(current.f().l2_norm());
            series.x_mean.push(current.x_mean_max());
            series.gronwall_residual.push(f64::NAN);
            if step < steps {
                pending = Some(series.len() - 1);
            }
            if let Some(dir) = snapshots {
                current.snapshot().save(&dir.join(format!("f_{:05}.mxc", step)))?;
            }
            log::info!("two-point t = {:.3}: phi = {:.6e}, l2 = {:.6e}", solver.time(), phi.value, series.l2.last().unwrap());
        }
        if step < steps {
            solver.step()?;
        }
    }
    Ok((series, solver.state()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twopoint::random_field6;

    #[test]
    fn lift_of_sine() {
        let n = 8;
        let theta: Vec<f64> = (0..n * n).map(|i| (2.0 * PI * (i / n) as f64 / n as f64).sin()).collect();
        let s = build_initial(n, &theta, &uniform_density(n), 4.0, 0.0).unwrap();
        let rho = 1.0 / (4.0 * PI * PI);
        let expected = GridField6D::from_fn(n, |x| (x[0] - x[2]).sin() * (x[2] + x[0]).sin() * rho).unwrap();
        let err = s.f().values().iter().zip(expected.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-15, "{err}");
        assert!(s.x_mean_max() < 1e-15);
        assert!(s.pi_shift_defect() < 1e-15);
        // values on x̃₃ = x̃₄ = 0 are squares
        for (idx, v) in s.f().values().iter().enumerate() {
            let i = unravel6(idx, n);
            if i[2] == 0 && i[3] == 0 {
                assert!(*v >= -1e-15);
            }
        }
    }

    #[test]
    fn initial_data_is_validated() {
        let n = 8;
        let ones = vec![1.0; n * n];
        assert!(matches!(build_initial(n, &ones, &uniform_density(n), 4.0, 0.0), Err(Error::NonZeroMean { .. })));
        let theta: Vec<f64> = (0..n * n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let mut rho = uniform_density(n);
        rho[0] = -1.0;
        assert!(matches!(build_initial(n, &theta, &rho, 4.0, 0.0), Err(Error::InvalidDensity(_))));
        let heavy: Vec<f64> = uniform_density(n).iter().map(|v| v * 1.01).collect();
        assert!(matches!(build_initial(n, &theta, &heavy, 4.0, 0.0), Err(Error::InvalidDensity(_))));
        assert!(matches!(build_initial(18, &theta, &heavy, 4.0, 0.0), Err(Error::MemoryGuard(18))));
    }

    #[test]
    fn pure_y_diffusion_is_exact() {
        let n = 8;
        let f = GridField6D::from_fn(n, |x| (x[0] + 2.0 * x[4]).sin() + (x[1] - x[5]).cos()).unwrap();
        let state = TwoPointState::new(f, 4.0, 0.0).unwrap();
        let config = TwoPointConfig { dt: 0.01, t_final: 0.1, record_every: 100, advect: false };
        let (_, end) = two_point_solve(&state, &CoefficientSet::trivial(4.0), &config, None).unwrap();
        let t: f64 = 0.1;
        let expected = GridField6D::from_fn(n, |x| {
            (-16.0 * t).exp() * (x[0] + 2.0 * x[4]).sin() + (-4.0 * t).exp() * (x[1] - x[5]).cos()
        })
        .unwrap();
        let err = end.f().values().iter().zip(expected.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn transport_conserves_l2_and_x_mean() {
        let n = 8;
        let f = random_field6(n, 1, true, 7).unwrap();
        let state = TwoPointState::new(f, 4.0, 0.0).unwrap();
        let mut solver = TwoPointSolver::new(&state, 0.02, true).unwrap();
        // switch off diffusion to isolate transport
        solver.half_diffusion.iter_mut().for_each(|v| *v = 1.0);
        let e0 = solver.state().f().l2_norm();
        for _ in 0..10 {
            solver.step().unwrap();
        }
        let end = solver.state();
        assert!((end.f().l2_norm() - e0).abs() < 1e-6 * e0);
        assert!(end.x_mean_max() < 1e-12);
    }

    #[test]
    fn pi_shift_symmetry_is_preserved() {
        let n = 8;
        let theta: Vec<f64> = (0..n * n)
            .map(|i| {
                let (a, b) = ((i / n) as f64 * 2.0 * PI / n as f64, (i % n) as f64 * 2.0 * PI / n as f64);
                a.sin() + 0.5 * b.cos()
            })
            .collect();
        let rho: Vec<f64> = (0..n * n)
            .map(|i| (1.0 + 0.5 * ((i / n) as f64 * 2.0 * PI / n as f64).cos()) / (4.0 * PI * PI))
            .collect();
        let state = build_initial(n, &theta, &rho, 4.0, 0.0).unwrap();
        assert!(state.pi_shift_defect() < 1e-15);
        let mut solver = TwoPointSolver::new(&state, 0.05, true).unwrap();
        for _ in 0..4 {
            solver.step().unwrap();
        }
        assert!(solver.state().pi_shift_defect() < 1e-12);
    }

    #[test]
    fn step_size_is_checked() {
        let state = TwoPointState::new(GridField6D::zeros(8).unwrap(), 4.0, 0.0).unwrap();
        assert!(matches!(TwoPointSolver::new(&state, 1.0, true), Err(Error::Cfl { .. })));
        assert!(TwoPointSolver::new(&state, 1.0, false).is_ok());
        assert!(two_point_step(&state, 0.1).is_ok());
    }

    #[test]
    fn series_is_recorded_and_written() {
        let n = 8;
        let f = random_field6(n, 1, true, 3).unwrap();
        let state = TwoPointState::new(f, 4.0, 0.0).unwrap();
        let config = TwoPointConfig { dt: 0.05, t_final: 0.2, record_every: 2, advect: true };
        let dir = tempfile::tempdir().unwrap();
        let (series, _) = two_point_solve(&state, &CoefficientSet::moderate(), &config, Some(dir.path())).unwrap();
        assert_eq!(series.t.len(), 3);
        assert!(series.gronwall_residual[0].is_finite() && series.gronwall_residual[2].is_nan());
        assert!(series.l2[2] < series.l2[0]);
        let snap = Snapshot::load(&dir.path().join("f_00002.mxc")).unwrap();
        assert_eq!(snap.values.len(), n.pow(6));
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,phi,psi,h1w,gronwall_residual"));
        assert_eq!(text.lines().count(), 4);
    }
}
