//! Time-averaged annulus spectra of a randomly forced scalar.

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::Serialize;

use super::fit::fit_decay;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_FIELD};
use crate::solver::{ScalarSolver, SimulationConfig};
use crate::spectral::{wavenumber, SpectralField2D};

/// White-in-time Gaussian forcing on `kmin ≤ |k| ≤ kmax`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Forcing {
    pub kmin: f64,
    pub kmax: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumConfig {
    /// Grid, flow, diffusivity and horizon; the initial datum is ignored.
    pub sim: SimulationConfig,
    pub forcing: Forcing,
    /// Averaging starts here.
    pub average_from: f64,
    /// Annulus width `h`.
    pub width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnulusSpectrum {
    pub width: f64,
    /// Inner radius of each annulus.
    pub r: Vec<f64>,
    /// Time-averaged `Σ_{r ≤ |k| < r+h} |θ̂(k)|²`.
    pub sums: Vec<f64>,
}

impl AnnulusSpectrum {
    /// Log-log slope of the sums against `r` for `r ∈ [lo, hi]`.
    pub fn slope(&self, lo: f64, hi: f64) -> Result<f64> {
        let lr: Vec<f64> = self.r.iter().map(|r| r.ln()).collect();
        Ok(-fit_decay(&lr, &self.sums, (lo.ln(), hi.ln()), "spectrum")?.rate)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["r", "sum"])?;
        for (r, s) in self.r.iter().zip(&self.sums) {
            w.write_record([r.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Full-spectrum `|θ̂(k)|²` on the half-spectrum layout.
fn mode_energy(field: &SpectralField2D) -> Vec<f64> {
    let n = field.n();
    let m = n / 2 + 1;
    field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let j = idx % m;
            let w = if j == 0 || 2 * j == n { 1.0 } else { 2.0 };
            w * c.norm_sqr()
        })
        .collect()
}

/// Annulus sums of a half-spectrum energy array, out to `|k| < n/3`.
pub fn annulus_sums(energy: &[f64], n: usize, width: f64) -> AnnulusSpectrum {
    let m = n / 2 + 1;
    let count = ((n as f64 / 3.0) / width).floor() as usize;
    let mut sums = vec![0.0; count];
    for i in 0..n {
        let k1 = wavenumber(i, n) as f64;
        for j in 0..m {
            let k = (k1 * k1 + (j * j) as f64).sqrt();
            let b = (k / width).floor() as usize;
            if k >= width && b <= count {
                sums[b - 1] += energy[i * m + j];
            }
        }
    }
    AnnulusSpectrum { width, r: (1..=count).map(|b| b as f64 * width).collect(), sums }
}

fn forcing_increment(n: usize, f: &Forcing, scale: f64, rng: &mut impl rand::Rng) -> Vec<Complex64> {
    let m = n / 2 + 1;
    let mut delta = vec![Complex64::new(0.0, 0.0); n * m];
    for i in 0..n {
        let k1 = wavenumber(i, n);
        for j in 0..m {
            let k = ((k1 * k1 + (j * j) as i64) as f64).sqrt();
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            if k < f.kmin || k > f.kmax || k == 0.0 || (j == 0 && k1 < 0) {
                continue;
            }
            let z = Complex64::new(a, b) * (scale / std::f64::consts::SQRT_2);
            delta[i * m + j] = z;
            if j == 0 {
                delta[((n as i64 - k1) as usize % n) * m] = z.conj();
            }
        }
    }
    delta
}

pub fn batchelor_spectrum(cfg: &SpectrumConfig) -> Result<AnnulusSpectrum> {
    let sim = &cfg.sim;
    sim.validate()?;
    if !(cfg.width > 0.0) || !(cfg.forcing.kmin <= cfg.forcing.kmax) {
        return Err(Error::InvalidParameter("annulus width must be positive and the forcing band nonempty".into()));
    }
    let n = sim.n;
    let mut solver = ScalarSolver::new(&SpectralField2D::zeros(n)?, sim.kappa, sim.dt, sim.build_flow()?)?;
    let mut rng = stream_rng(sim.seed, STREAM_FIELD);
    let scale = cfg.forcing.amplitude * sim.dt.sqrt();
    let mut acc = vec![0.0; n * (n / 2 + 1)];
    let mut samples = 0usize;
    for _ in 0..sim.steps() {
        solver.step()?;
        solver.add_coeffs(&forcing_increment(n, &cfg.forcing, scale, &mut rng));
        if solver.time() >= cfg.average_from {
            for (a, e) in acc.iter_mut().zip(mode_energy(&solver.theta())) {
                *a += e;
            }
            samples += 1;
        }
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("averaging window is empty".into()));
    }
    acc.iter_mut().for_each(|a| *a /= samples as f64);
    Ok(annulus_sums(&acc, n, cfg.width))
}
