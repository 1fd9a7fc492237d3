//! Particle SDE `dX = v(X, t) dt + √(2κ) dB`, Feynman–Kac estimates of the
//! scalar, and Monte Carlo correlations.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flow::{wrap, FlowSpec, Point};
use crate::rng::{stream_rng, STREAM_PARTICLE_BASE};
use crate::spectral::{grid_coord, wavenumber, SpectralField2D};

/// A scalar function on T² that can be evaluated at arbitrary points.
pub trait ScalarFunction: Sync {
    fn eval(&self, x: Point) -> f64;
}

impl<F: Fn(Point) -> f64 + Sync> ScalarFunction for F {
    fn eval(&self, x: Point) -> f64 {
        self(x)
    }
}

/// Trigonometric polynomial built from the significant modes of a field.
#[derive(Debug, Clone)]
pub struct FourierSeries {
    modes: Vec<(i64, i64, Complex64)>,
}

impl FourierSeries {
    /// Keep modes with `|f̂(k)| > tol · max |f̂|` (both halves of the spectrum).
    pub fn from_field(field: &SpectralField2D, tol: f64) -> Self {
        let n = field.n();
        let m = n / 2 + 1;
        let max = field.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut modes = Vec::new();
        for i in 0..n {
            let k1 = wavenumber(i, n);
            for j in 0..m {
                let c = field.coeffs()[i * m + j];
                if c.norm() > tol * max && 2 * j != n && 2 * i != n {
                    modes.push((k1, j as i64, c));
                }
            }
        }
        Self { modes }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

impl ScalarFunction for FourierSeries {
    fn eval(&self, x: Point) -> f64 {
        let mut acc = 0.0;
        for &(k1, k2, c) in &self.modes {
            let phase = k1 as f64 * x[0] + k2 as f64 * x[1];
            let (s, co) = phase.sin_cos();
            let re = c.re * co - c.im * s;
            acc += if k2 == 0 { re } else { 2.0 * re };
        }
        acc
    }
}

/// Particles on T² with independent noise streams.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    positions: Vec<Point>,
    rngs: Vec<ChaCha8Rng>,
    kappa: f64,
    seed: u64,
    time: f64,
}

impl ParticleEnsemble {
    pub fn new(positions: Vec<Point>, kappa: f64, seed: u64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParameter("ensemble needs at least one particle".into()));
        }
        if !(kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be nonnegative, got {kappa}")));
        }
        let rngs = (0..positions.len() as u64)
            .map(|i| stream_rng(seed, STREAM_PARTICLE_BASE + i))
            .collect();
        let positions = positions.into_iter().map(|p| [wrap(p[0]), wrap(p[1])]).collect();
        Ok(Self { positions, rngs, kappa, seed, time: 0.0 })
    }

    /// `count` particles drawn uniformly on T² from the seed.
    pub fn uniform(count: usize, kappa: f64, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, STREAM_PARTICLE_BASE - 1);
        let positions = (0..count)
            .map(|_| [rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI])
            .collect();
        Self::new(positions, kappa, seed)
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Integrate from the current time to `time + duration` with step at most `dt`.
    ///
    /// The scheme is the stochastic Heun method: Euler–Maruyama predictor,
    /// trapezoidal drift corrector, same Gaussian increment. For additive
    /// noise it has the Euler–Maruyama noise term and a second-order drift.
    pub fn advance(&mut self, flow: &FlowSpec, dt: f64, duration: f64) -> Result<()> {
        self.advance_with(dt, duration, 1.0, |x, t| flow.velocity(x, t))
    }

    /// Drift `sign · v(x, t)`; `t` runs forward from `self.time`.
    fn advance_with(
        &mut self,
        dt: f64,
        duration: f64,
        sign: f64,
        velocity: impl Fn(Point, f64) -> Point + Sync,
    ) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        if !(duration >= 0.0) {
            return Err(Error::InvalidParameter(format!("duration must be nonnegative, got {duration}")));
        }
        let steps = (duration / dt - 1e-9).ceil().max(0.0) as usize;
        if steps == 0 {
            return Ok(());
        }
        let h = duration / steps as f64;
        let sigma = (2.0 * self.kappa * h).sqrt();
        let t0 = self.time;
        let noisy = self.kappa > 0.0;
        self.positions
            .par_iter_mut()
            .zip(self.rngs.par_iter_mut())
            .for_each(|(x, rng)| {
                let mut p = *x;
                for s in 0..steps {
                    let t = t0 + s as f64 * h;
                    let (a, b) = if noisy {
                        let a: f64 = StandardNormal.sample(rng);
                        let b: f64 = StandardNormal.sample(rng);
                        (sigma * a, sigma * b)
                    } else {
                        (0.0, 0.0)
                    };
                    let v = velocity(p, t);
                    let q = [p[0] + sign * v[0] * h + a, p[1] + sign * v[1] * h + b];
                    let w = velocity(q, t + h);
                    p[0] += 0.5 * sign * (v[0] + w[0]) * h + a;
                    p[1] += 0.5 * sign * (v[1] + w[1]) * h + b;
                    p = [wrap(p[0]), wrap(p[1])];
                }
                *x = p;
            });
        self.time = t0 + duration;
        Ok(())
    }

    pub fn mean_of(&self, f: &dyn ScalarFunction) -> (f64, f64) {
        mean_and_stderr(self.positions.iter().map(|&p| f.eval(p)))
    }
}

fn mean_and_stderr(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Monte Carlo value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Numerical parameters of the particle integrations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleSettings {
    pub kappa: f64,
    pub samples: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Default for ParticleSettings {
    fn default() -> Self {
        Self { kappa: 0.0, samples: 1, dt: 1e-3, seed: 0 }
    }
}

/// `θ(t, x) = E θ₀(X_t⁻¹(x))` at each evaluation point, with `X_t⁻¹` sampled by
/// backward characteristics `dX̃_s = −v(t − s, X̃) ds + √(2κ) dB̃_s`.
pub fn feynman_kac_estimate(
    theta0: &dyn ScalarFunction,
    eval_points: &[Point],
    flow: &FlowSpec,
    t: f64,
    settings: ParticleSettings,
) -> Result<Vec<Estimate>> {
    if settings.samples < 1 {
        return Err(Error::InvalidParameter("need at least one sample per point".into()));
    }
    if settings.kappa == 0.0 && settings.samples > 1 {
        log::warn!("kappa = 0: all {} samples per point coincide", settings.samples);
    }
    let m = settings.samples;
    let positions: Vec<Point> = eval_points
        .iter()
        .flat_map(|&x| std::iter::repeat_n(x, m))
        .collect();
    if positions.is_empty() {
        return Ok(Vec::new());
    }
    let mut ens = ParticleEnsemble::new(positions, settings.kappa, settings.seed)?;
    ens.advance_with(settings.dt, t, -1.0, |x, s| flow.velocity(x, t - s))?;
    Ok(ens
        .positions
        .chunks_exact(m)
        .map(|chunk| {
            let (value, stderr) = mean_and_stderr(chunk.iter().map(|&p| theta0.eval(p)));
            Estimate { value, stderr }
        })
        .collect())
}

/// Lattice points of an `nq × nq` quadrature grid.
pub fn quadrature_points(nq: usize) -> Vec<Point> {
    (0..nq)
        .flat_map(|i| (0..nq).map(move |j| [grid_coord(i, nq), grid_coord(j, nq)]))
        .collect()
}

/// Check that a function has zero mean on the quadrature grid.
fn check_mean_zero(f: &dyn ScalarFunction, pts: &[Point]) -> Result<()> {
    let (mean, _) = mean_and_stderr(pts.iter().map(|&p| f.eval(p)));
    let scale = pts.iter().map(|&p| f.eval(p).abs()).fold(0.0, f64::max).max(1e-300);
    if mean.abs() > 1e-10 * scale {
        return Err(Error::NonZeroMean { mean, l2: scale });
    }
    Ok(())
}

/// Forward-flow correlations `|∫ g(x) E h(X_t(x)) dx|` at each requested time
/// (nondecreasing), using `samples` particles per quadrature node of an `nq × nq` grid.
pub fn correlation_series(
    h: &dyn ScalarFunction,
    g: &dyn ScalarFunction,
    flow: &FlowSpec,
    times: &[f64],
    settings: ParticleSettings,
    nq: usize,
) -> Result<Vec<f64>> {
    if settings.samples < 1 {
        return Err(Error::InvalidParameter("need at least one sample per node".into()));
    }
    let pts = quadrature_points(nq);
    check_mean_zero(h, &pts)?;
    check_mean_zero(g, &pts)?;
    let m = settings.samples;
    let weights: Vec<f64> = pts.iter().map(|&p| g.eval(p)).collect();
    let positions: Vec<Point> = pts.iter().flat_map(|&x| std::iter::repeat_n(x, m)).collect();
    let mut ens = ParticleEnsemble::new(positions, settings.kappa, settings.seed)?;
    let cell = (2.0 * PI / nq as f64).powi(2);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t < ens.time() {
            return Err(Error::InvalidParameter("correlation times must be nondecreasing".into()));
        }
        ens.advance(flow, settings.dt, t - ens.time())?;
        let total: f64 = ens
            .positions
            .chunks_exact(m)
            .zip(&weights)
            .map(|(chunk, w)| w * chunk.iter().map(|&p| h.eval(p)).sum::<f64>() / m as f64)
            .sum();
        out.push((total * cell).abs());
    }
    Ok(out)
}

/// `Cor_{X_t}(h, g)` at a single time.
pub fn correlation(
    h: &dyn ScalarFunction,
    g: &dyn ScalarFunction,
    flow: &FlowSpec,
    t: f64,
    settings: ParticleSettings,
    nq: usize,
) -> Result<f64> {
    Ok(correlation_series(h, g, flow, &[t], settings, nq)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{cellular_stream, ShiftPath};

    #[test]
    fn stagnation_point_is_fixed() {
        let mut e = ParticleEnsemble::new(vec![[0.0, 0.0]], 0.0, 1).unwrap();
        e.advance(&FlowSpec::steady(), 1e-3, 1.0).unwrap();
        assert_eq!(e.positions()[0], [0.0, 0.0]);
    }

    #[test]
    fn steady_orbit_conserves_stream_function() {
        let x0 = [1.0, 0.4];
        let mut e = ParticleEnsemble::new(vec![x0], 0.0, 1).unwrap();
        e.advance(&FlowSpec::steady(), 1e-3, 10.0).unwrap();
        let drift = cellular_stream(e.positions()[0], [0.0, 0.0]) - cellular_stream(x0, [0.0, 0.0]);
        assert!(drift.abs() < 1e-4, "drift {drift}");
    }

    #[test]
    fn brownian_mean_square_displacement() {
        let kappa = 0.05;
        let t = 0.2;
        let m = 100_000;
        let start = [PI, PI];
        let mut e = ParticleEnsemble::new(vec![start; m], kappa, 7).unwrap();
        e.advance(&FlowSpec::still(), 0.01, t).unwrap();
        for axis in 0..2 {
            let msd = e.positions().iter().map(|p| (p[axis] - start[axis]).powi(2)).sum::<f64>() / m as f64;
            let want = 2.0 * kappa * t;
            assert!((msd - want).abs() < 0.05 * want, "msd {msd} want {want}");
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        let path = ShiftPath::sample(4.0, 1e-2, 1.0, 2).unwrap();
        let flow = FlowSpec::random(path);
        let run = |seed| {
            let mut e = ParticleEnsemble::uniform(50, 0.1, seed).unwrap();
            e.advance(&flow, 1e-2, 1.0).unwrap();
            e.positions().to_vec()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn feynman_kac_at_time_zero() {
        let f = |x: Point| x[0].sin() + 0.5 * x[1].cos();
        let pts = [[0.3, 1.0], [2.0, 5.0]];
        let settings = ParticleSettings { kappa: 0.1, samples: 10, ..Default::default() };
        let est = feynman_kac_estimate(&f, &pts, &FlowSpec::steady(), 0.0, settings).unwrap();
        for (e, p) in est.iter().zip(&pts) {
            assert!((e.value - f(*p)).abs() < 1e-15);
        }
        let bad = ParticleSettings { samples: 0, ..settings };
        assert!(feynman_kac_estimate(&f, &pts, &FlowSpec::steady(), 0.0, bad).is_err());
    }

    #[test]
    fn feynman_kac_matches_heat_kernel() {
        let kappa = 0.1;
        let t = 1.0;
        let f = |x: Point| x[0].sin();
        let pts = [[0.5, 0.0], [1.5, 2.0], [4.0, 1.0], [5.5, 3.0]];
        let settings = ParticleSettings { kappa, samples: 20_000, dt: 0.05, seed: 9 };
        let est = feynman_kac_estimate(&f, &pts, &FlowSpec::still(), t, settings).unwrap();
        for (e, p) in est.iter().zip(&pts) {
            let exact = (-kappa * t).exp() * p[0].sin();
            assert!((e.value - exact).abs() < 3.0 * e.stderr + 1e-12, "{} vs {exact}", e.value);
        }
    }

    #[test]
    fn fourier_series_evaluates_field() {
        let field = SpectralField2D::from_fn(16, |x, y| x.sin() * (2.0 * y).cos() + 0.3 * (x + y).cos()).unwrap();
        let s = FourierSeries::from_field(&field, 1e-12);
        let p: Point = [0.7, 2.1];
        let want = p[0].sin() * (2.0 * p[1]).cos() + 0.3 * (p[0] + p[1]).cos();
        assert!((s.eval(p) - want).abs() < 1e-13);
    }

    #[test]
    fn correlation_at_zero_and_identity_flow() {
        let h = |x: Point| x[0].sin();
        let g = |x: Point| x[0].sin();
        let settings = ParticleSettings::default();
        let c0 = correlation(&h, &g, &FlowSpec::still(), 0.0, settings, 32).unwrap();
        assert!((c0 - 2.0 * PI * PI).abs() < 1e-10);
        let series = correlation_series(&h, &g, &FlowSpec::still(), &[0.0, 1.0, 2.0], settings, 32).unwrap();
        assert!(series.iter().all(|c| (c - c0).abs() < 1e-10));
        let biased = |x: Point| 1.0 + x[0].sin();
        assert!(correlation(&biased, &g, &FlowSpec::still(), 0.0, settings, 32).is_err());
    }

    #[test]
    fn volume_preservation_chi_square() {
        let path = ShiftPath::sample(4.0, 1e-2, 2.0, 8).unwrap();
        let mut e = ParticleEnsemble::uniform(20_000, 0.0, 5).unwrap();
        e.advance(&FlowSpec::random(path), 1e-2, 2.0).unwrap();
        let bins = 10;
        let mut counts = vec![0usize; bins * bins];
        for p in e.positions() {
            let i = ((p[0] / (2.0 * PI)) * bins as f64) as usize % bins;
            let j = ((p[1] / (2.0 * PI)) * bins as f64) as usize % bins;
            counts[i * bins + j] += 1;
        }
        let expected = e.len() as f64 / (bins * bins) as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99 degrees of freedom, upper 1% point
        assert!(chi2 < 134.64, "chi2 {chi2}");
    }

    #[test]
    fn forward_and_backward_duality() {
        // ∫ g · E h(X_t) = ∫ h · E g(X_t⁻¹) for a volume-preserving flow
        let path = ShiftPath::sample(4.0, 1e-3, 0.5, 3).unwrap();
        let flow = FlowSpec::random(path);
        let h = |x: Point| x[0].sin() * x[1].cos();
        let g = |x: Point| x[1].sin() + 0.5 * x[0].cos();
        let settings = ParticleSettings { kappa: 0.0, samples: 1, dt: 1e-3, seed: 1 };
        let fwd: f64 = {
            let pts = quadrature_points(48);
            let mut e = ParticleEnsemble::new(pts.clone(), 0.0, 1).unwrap();
            e.advance(&flow, 1e-3, 0.5).unwrap();
            pts.iter().zip(e.positions()).map(|(&x, &p)| g(x) * h(p)).sum::<f64>()
        };
        let pts = quadrature_points(48);
        let back = feynman_kac_estimate(&g, &pts, &flow, 0.5, settings).unwrap();
        let bwd: f64 = pts.iter().zip(&back).map(|(&x, e)| h(x) * e.value).sum();
        let cell = (2.0 * PI / 48.0).powi(2);
        assert!((fwd - bwd).abs() * cell < 1e-3, "{} {}", fwd * cell, bwd * cell);
    }
}
