//! Pseudo-spectral integration of `∂ₜθ + v·∇θ = κΔθ` on T².
//!
//! Each step is Strang split: exact diffusion over `dt/2`, one RK4 step of
//! the dealiased advection term, and another diffusion half step.

use std::f64::consts::PI;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::KeyValueConfig;
use crate::error::{Error, Result};
use crate::flow::{FlowKind, FlowSpec, ShiftPath};
use crate::rng::{stream_rng, STREAM_FIELD};
use crate::spectral::{dealias_keep, derivative_wavenumber, grid_coord, wavenumber, RealFftNd, SpectralField2D};

/// Named initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDatum {
    /// `sin x₁`
    Sine,
    /// Smoothed ±1 indicator of a centred disk of area `2π²`.
    Disk,
    /// Cell stream function `sin x₁ sin x₂`.
    Stream,
    /// Gaussian coefficients on `1 ≤ |k| ≤ kmax`, unit L² norm.
    RandomBandlimited { kmax: f64, seed: u64 },
}

impl std::str::FromStr for InitialDatum {
    type Err = Error;
    /// Accepts `sine`, `disk`, `stream` or `random:<kmax>:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Self::Sine),
            "disk" => Ok(Self::Disk),
            "stream" => Ok(Self::Stream),
            _ => {
                let parts: Vec<&str> = s.split(':').collect();
                if parts.len() == 3 && parts[0] == "random" {
                    let kmax = parts[1].parse().map_err(|_| Error::Config(format!("bad kmax in '{s}'")))?;
                    let seed = parts[2].parse().map_err(|_| Error::Config(format!("bad seed in '{s}'")))?;
                    Ok(Self::RandomBandlimited { kmax, seed })
                } else {
                    Err(Error::Config(format!("unknown initial datum '{s}'")))
                }
            }
        }
    }
}

impl InitialDatum {
    /// Sample on an `n × n` grid, truncated to the two-thirds band.
    pub fn sample(&self, n: usize) -> Result<SpectralField2D> {
        let field = match *self {
            Self::Sine => SpectralField2D::from_fn(n, |x, _| x.sin())?,
            Self::Stream => SpectralField2D::from_fn(n, |x, y| x.sin() * y.sin())?,
            Self::Disk => {
                let radius = (2.0 * PI).sqrt();
                let width = 4.0 * 2.0 * PI / n as f64;
                SpectralField2D::from_fn(n, |x, y| {
                    let r = ((x - PI).powi(2) + (y - PI).powi(2)).sqrt();
                    ((radius - r) / width).tanh()
                })?
                .project_mean_zero()
            }
            Self::RandomBandlimited { kmax, seed } => random_bandlimited(n, kmax, seed)?,
        };
        Ok(field.dealiased())
    }
}

/// Random real field with independent Gaussian coefficients on `1 ≤ |k| ≤ kmax`,
/// normalised to unit L² norm.
pub fn random_bandlimited(n: usize, kmax: f64, seed: u64) -> Result<SpectralField2D> {
    if !(kmax >= 1.0) {
        return Err(Error::InvalidParameter(format!("kmax must be at least 1, got {kmax}")));
    }
    let mut rng = stream_rng(seed, STREAM_FIELD);
    let zero = SpectralField2D::zeros(n)?;
    let mut coeffs = zero.coeffs().to_vec();
    let m = n / 2 + 1;
    for i in 0..n {
        let k1 = wavenumber(i, n);
        for j in 0..m {
            let k2 = j as i64;
            let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            if kk >= 1.0 && kk <= kmax && 2 * i != n && 2 * j != n {
                coeffs[i * m + j] = Complex64::new(a, b);
            }
        }
    }
    let f = SpectralField2D::from_coeffs(n, coeffs)?;
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("empty wave-number band".into()));
    }
    Ok(f.scale(1.0 / norm))
}

/// Full description of one scalar run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub kappa: f64,
    pub dt: f64,
    pub t_final: f64,
    pub flow: FlowKind,
    /// Shift diffusivity ν (random flow only).
    pub nu: f64,
    /// Seed of the shift path.
    pub seed: u64,
    pub theta0: InitialDatum,
    pub record_every: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n: 256,
            kappa: 0.0,
            dt: 1e-2,
            t_final: 30.0,
            flow: FlowKind::RandomCellular,
            nu: 4.0,
            seed: 0,
            theta0: InitialDatum::Sine,
            record_every: 10,
        }
    }
}

impl SimulationConfig {
    /// Read keys `grid.n`, `kappa`, `dt`, `t_final`, `flow.kind`, `flow.nu`,
    /// `flow.seed`, `theta0`, `record_every`; missing keys keep defaults.
    pub fn from_kv(kv: &KeyValueConfig) -> Result<Self> {
        let d = Self::default();
        let flow = match kv.raw("flow.kind") {
            Some(s) => s.parse()?,
            None => d.flow,
        };
        let theta0 = match kv.raw("theta0") {
            Some(s) => s.parse()?,
            None => d.theta0,
        };
        let cfg = Self {
            n: kv.get_or("grid.n", d.n)?,
            kappa: kv.get_or("kappa", d.kappa)?,
            dt: kv.get_or("dt", d.dt)?,
            t_final: kv.get_or("t_final", d.t_final)?,
            flow,
            nu: kv.get_or("flow.nu", d.nu)?,
            seed: kv.get_or("flow.seed", d.seed)?,
            theta0,
            record_every: kv.get_or("record_every", d.record_every)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be nonnegative, got {}", self.kappa)));
        }
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) {
            return Err(Error::InvalidParameter("dt must be positive and t_final nonnegative".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        if self.flow == FlowKind::RandomCellular && !(self.nu > 0.0) {
            return Err(Error::InvalidParameter("random flow needs nu > 0".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn build_flow(&self) -> Result<FlowSpec> {
        let shift = if self.flow == FlowKind::RandomCellular {
            Some(ShiftPath::sample(self.nu, self.dt, self.t_final, self.seed)?)
        } else {
            None
        };
        FlowSpec::new(self.flow, shift)
    }

    /// FNV-1a hash of the JSON form; identifies the configuration in outputs.
    pub fn hash(&self) -> u64 {
        let text = serde_json::to_string(self).expect("config serialises");
        text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
        })
    }
}

/// Advective CFL bound `0.5 (2π/n) / max|v|`.
pub fn cfl_limit(n: usize, max_speed: f64) -> f64 {
    if max_speed == 0.0 {
        f64::INFINITY
    } else {
        0.5 * (2.0 * PI / n as f64) / max_speed
    }
}

/// Norm records of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub times: Vec<f64>,
    pub h_minus1: Vec<f64>,
    pub l2: Vec<f64>,
    pub h1: Vec<f64>,
    pub realization: u64,
    pub config_hash: u64,
    pub cfl_warning: bool,
}

impl NormSeries {
    fn push(&mut self, t: f64, theta: &SpectralField2D) -> Result<()> {
        self.times.push(t);
        self.h_minus1.push(theta.sobolev_norm(-1.0)?);
        self.l2.push(theta.l2_norm());
        self.h1.push(theta.sobolev_norm(1.0)?);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV rows `t, h_minus1, l2, h1, realization`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut csv::Writer<W>, header: bool) -> Result<()> {
        if header {
            w.write_record(["t", "h_minus1", "l2", "h1", "realization"])?;
        }
        for i in 0..self.len() {
            w.write_record(&[
                self.times[i].to_string(),
                self.h_minus1[i].to_string(),
                self.l2[i].to_string(),
                self.h1[i].to_string(),
                self.realization.to_string(),
            ])?;
        }
        Ok(())
    }
}

/// Time stepper holding the current scalar.
pub struct ScalarSolver {
    n: usize,
    kappa: f64,
    dt: f64,
    flow: FlowSpec,
    plan: Arc<RealFftNd>,
    coeffs: Vec<Complex64>,
    half_diffusion: Vec<f64>,
    kx1: Vec<f64>,
    kx2: Vec<f64>,
    keep: Vec<bool>,
    coords: Vec<f64>,
    time: f64,
    cfl_warning: bool,
}

impl ScalarSolver {
    /// A negative `dt` integrates backward in time and requires `κ = 0`.
    pub fn new(theta0: &SpectralField2D, kappa: f64, dt: f64, flow: FlowSpec) -> Result<Self> {
        let n = theta0.n();
        if !(kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be nonnegative, got {kappa}")));
        }
        if dt == 0.0 || !dt.is_finite() || (dt < 0.0 && kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid time step {dt} for kappa {kappa}")));
        }
        let plan = RealFftNd::cached(n, 2)?;
        let m = n / 2 + 1;
        let mut half_diffusion = Vec::with_capacity(n * m);
        let mut keep = Vec::with_capacity(n * m);
        for i in 0..n {
            let k1 = wavenumber(i, n);
            for j in 0..m {
                let k2 = j as i64;
                half_diffusion.push((-kappa * (k1 * k1 + k2 * k2) as f64 * dt.abs() / 2.0).exp());
                keep.push(dealias_keep(k1, n) && dealias_keep(k2, n));
            }
        }
        let limit = cfl_limit(n, flow.max_speed());
        let cfl_warning = dt.abs() > limit;
        if cfl_warning {
            log::warn!("time step {dt} exceeds the advective CFL bound {limit:.3e}");
        }
        Ok(Self {
            n,
            kappa,
            dt,
            flow,
            plan,
            coeffs: theta0.coeffs().to_vec(),
            half_diffusion,
            kx1: (0..n).map(|i| derivative_wavenumber(i, n)).collect(),
            kx2: (0..m).map(|j| derivative_wavenumber(j, n)).collect(),
            keep,
            coords: (0..n).map(|i| grid_coord(i, n)).collect(),
            time: 0.0,
            cfl_warning,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn cfl_warning(&self) -> bool {
        self.cfl_warning
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn theta(&self) -> SpectralField2D {
        SpectralField2D::from_coeffs(self.n, self.coeffs.clone()).expect("consistent length")
    }

    /// Add `δθ̂` to the current coefficients (external forcing).
    pub fn add_coeffs(&mut self, delta: &[Complex64]) {
        for (c, d) in self.coeffs.iter_mut().zip(delta) {
            *c += d;
        }
    }

    fn velocity_grids(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let x = &self.coords;
        match self.flow.kind() {
            FlowKind::Still => None,
            FlowKind::TiltedCellular => {
                let mut u1 = vec![0.0; n * n];
                let mut u2 = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        u1[i * n + j] = x[j].sin();
                        u2[i * n + j] = x[i].sin();
                    }
                }
                Some((u1, u2))
            }
            FlowKind::SteadyCellular | FlowKind::RandomCellular => {
                let y = self.flow.center(t);
                let (s1, c1): (Vec<f64>, Vec<f64>) = x.iter().map(|&a| (a - y[0]).sin_cos()).unzip();
                let (s2, c2): (Vec<f64>, Vec<f64>) = x.iter().map(|&b| (b - y[1]).sin_cos()).unzip();
                let mut u1 = vec![0.0; n * n];
                let mut u2 = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        u1[i * n + j] = s1[i] * c2[j];
                        u2[i * n + j] = -c1[i] * s2[j];
                    }
                }
                Some((u1, u2))
            }
        }
    }

    /// Dealiased `−v(t)·∇θ` in coefficient space.
    fn advection(&self, coeffs: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.n;
        let m = n / 2 + 1;
        let Some((u1, u2)) = self.velocity_grids(t) else {
            return vec![Complex64::new(0.0, 0.0); coeffs.len()];
        };
        let mut d1 = coeffs.to_vec();
        let mut d2 = coeffs.to_vec();
        for i in 0..n {
            for j in 0..m {
                let idx = i * m + j;
                d1[idx] *= Complex64::new(0.0, self.kx1[i]);
                d2[idx] *= Complex64::new(0.0, self.kx2[j]);
            }
        }
        let g1 = self.plan.inverse(&d1);
        let g2 = self.plan.inverse(&d2);
        let prod: Vec<f64> = (0..n * n).map(|p| -(u1[p] * g1[p] + u2[p] * g2[p])).collect();
        let mut out = self.plan.forward(&prod);
        for (c, &k) in out.iter_mut().zip(&self.keep) {
            if !k {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    fn diffuse_half(&mut self) {
        if self.kappa > 0.0 {
            for (c, f) in self.coeffs.iter_mut().zip(&self.half_diffusion) {
                *c *= *f;
            }
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let t = self.time;
        self.diffuse_half();
        if self.flow.kind() != FlowKind::Still {
            let y0 = self.coeffs.clone();
            let axpy = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
                a.iter().zip(b).map(|(x, y)| x + y * s).collect()
            };
            let k1 = self.advection(&y0, t);
            let k2 = self.advection(&axpy(&y0, &k1, dt / 2.0), t + dt / 2.0);
            let k3 = self.advection(&axpy(&y0, &k2, dt / 2.0), t + dt / 2.0);
            let k4 = self.advection(&axpy(&y0, &k3, dt), t + dt);
            for (idx, c) in self.coeffs.iter_mut().enumerate() {
                *c += (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]) * (dt / 6.0);
            }
        }
        self.diffuse_half();
        self.time = t + dt;
        if self.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(self.time));
        }
        Ok(())
    }

    pub fn advance(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub series: NormSeries,
    pub final_theta: SpectralField2D,
}

/// Run a configuration, recording norms every `record_every` steps.
pub fn solve(config: &SimulationConfig, realization: u64) -> Result<SolveOutput> {
    config.validate()?;
    let flow = config.build_flow()?;
    let theta0 = config.theta0.sample(config.n)?;
    solve_with(config, &theta0, flow, realization)
}

/// As [`solve`] with an explicit initial field and flow.
pub fn solve_with(
    config: &SimulationConfig,
    theta0: &SpectralField2D,
    flow: FlowSpec,
    realization: u64,
) -> Result<SolveOutput> {
    let theta0 = if theta0.mean().abs() * 2.0 * PI > crate::spectral::MEAN_ZERO_TOL * theta0.l2_norm() {
        log::warn!("initial datum has nonzero mean {:e}; projecting it out", theta0.mean());
        theta0.project_mean_zero()
    } else {
        theta0.clone()
    };
    let mut solver = ScalarSolver::new(&theta0, config.kappa, config.dt, flow)?;
    let mut series = NormSeries {
        realization,
        config_hash: config.hash(),
        cfl_warning: solver.cfl_warning(),
        ..Default::default()
    };
    series.push(0.0, &theta0)?;
    let steps = config.steps();
    for s in 1..=steps {
        solver.step()?;
        if s % config.record_every == 0 || s == steps {
            series.push(solver.time(), &solver.theta())?;
        }
    }
    Ok(SolveOutput {
        series,
        final_theta: solver.theta(),
    })
}
