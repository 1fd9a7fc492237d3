//! Mixing-rate experiments over independent flow realizations.

use rayon::prelude::*;
use serde::Serialize;

use super::fit::{default_window, fit_decay, DecayFit};
use crate::error::{Error, Result};
use crate::flow::FlowKind;
use crate::rng::split_seed;
use crate::solver::{solve_with, NormSeries, SimulationConfig};
use crate::spectral::SpectralField2D;

/// A batch of realizations sharing one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct MixingConfig {
    pub base: SimulationConfig,
    pub realizations: usize,
    /// Fit window; `None` uses [`default_window`].
    pub window: Option<(f64, f64)>,
}

impl MixingConfig {
    pub fn new(base: SimulationConfig) -> Self {
        Self { base, realizations: 8, window: None }
    }

    pub fn window(&self) -> (f64, f64) {
        self.window.unwrap_or_else(|| default_window(self.base.t_final))
    }
}

/// Shift seed of each realization.
pub fn realization_seeds(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|r| split_seed(base, r)).collect()
}

/// Solve every realization in parallel; output is ordered by realization id.
pub fn run_realizations(base: &SimulationConfig, theta0: &SpectralField2D, count: usize) -> Result<Vec<NormSeries>> {
    realization_seeds(base.seed, count)
        .into_par_iter()
        .enumerate()
        .map(|(r, seed)| {
            let cfg = SimulationConfig { seed, ..base.clone() };
            Ok(solve_with(&cfg, theta0, cfg.build_flow()?, r as u64)?.series)
        })
        .collect()
}

/// Arithmetic mean over realizations at each recorded time.
#[derive(Debug, Clone, Default, Serialize)]
pub struct AveragedSeries {
    pub times: Vec<f64>,
    pub h_minus1: Vec<f64>,
    pub l2: Vec<f64>,
}

impl AveragedSeries {
    pub fn from_series(series: &[NormSeries]) -> Result<Self> {
        let first = series.first().ok_or_else(|| Error::Fit("no realizations".into()))?;
        let m = series.len() as f64;
        let mut out = Self {
            times: first.times.clone(),
            h_minus1: vec![0.0; first.len()],
            l2: vec![0.0; first.len()],
        };
        for s in series {
            if s.times != first.times {
                return Err(Error::Fit("realizations recorded on different time grids".into()));
            }
            for i in 0..s.len() {
                out.h_minus1[i] += s.h_minus1[i] / m;
                out.l2[i] += s.l2[i] / m;
            }
        }
        Ok(out)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["t", "mean_h_minus1", "mean_l2"])?;
        for i in 0..self.times.len() {
            w.write_record([self.times[i].to_string(), self.h_minus1[i].to_string(), self.l2[i].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingResult {
    pub seeds: Vec<u64>,
    /// `Ḣ⁻¹` fit of each realization.
    pub fits: Vec<DecayFit>,
    /// Fit of the realization-averaged `Ḣ⁻¹` series.
    pub averaged_fit: DecayFit,
    pub averaged: AveragedSeries,
    #[serde(skip)]
    pub series: Vec<NormSeries>,
}

impl MixingResult {
    pub fn rate_mean(&self) -> f64 {
        self.fits.iter().map(|f| f.rate).sum::<f64>() / self.fits.len() as f64
    }

    /// Sample standard deviation of the per-realization rates.
    pub fn rate_std(&self) -> f64 {
        let m = self.fits.len();
        if m < 2 {
            return 0.0;
        }
        let mean = self.rate_mean();
        (self.fits.iter().map(|f| (f.rate - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt()
    }
}

pub fn mixing_experiment(cfg: &MixingConfig) -> Result<MixingResult> {
    let theta0 = cfg.base.theta0.sample(cfg.base.n)?;
    mixing_experiment_with(cfg, &theta0)
}

/// As [`mixing_experiment`] with an explicit initial field.
pub fn mixing_experiment_with(cfg: &MixingConfig, theta0: &SpectralField2D) -> Result<MixingResult> {
    if cfg.realizations == 0 {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    cfg.base.validate()?;
    if cfg.base.steps() < cfg.base.record_every {
        return Err(Error::Fit("fewer than 2 recorded times".into()));
    }
    let window = cfg.window();
    let series = run_realizations(&cfg.base, theta0, cfg.realizations)?;
    let fits = series
        .iter()
        .map(|s| fit_decay(&s.times, &s.h_minus1, window, &format!("h_minus1/r{}", s.realization)))
        .collect::<Result<Vec<_>>>()?;
    let averaged = AveragedSeries::from_series(&series)?;
    let averaged_fit = fit_decay(&averaged.times, &averaged.h_minus1, window, "h_minus1/mean")?;
    Ok(MixingResult {
        seeds: realization_seeds(cfg.base.seed, cfg.realizations),
        fits,
        averaged_fit,
        averaged,
        series,
    })
}

/// `|a − b| / max(|a|, |b|)`.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// Windowed `Ḣ⁻¹` rates of the steady cellular flow.
#[derive(Debug, Clone, Serialize)]
pub struct SteadyControl {
    pub early: DecayFit,
    pub late: DecayFit,
    #[serde(skip)]
    pub series: NormSeries,
}

impl SteadyControl {
    /// Whether the late rate is below half the early rate.
    pub fn decelerates(&self) -> bool {
        self.late.rate < 0.5 * self.early.rate
    }
}

pub fn steady_control(base: &SimulationConfig, early: (f64, f64), late: (f64, f64)) -> Result<SteadyControl> {
    let cfg = SimulationConfig { flow: FlowKind::SteadyCellular, ..base.clone() };
    let theta0 = cfg.theta0.sample(cfg.n)?;
    let series = solve_with(&cfg, &theta0, cfg.build_flow()?, 0)?.series;
    Ok(SteadyControl {
        early: fit_decay(&series.times, &series.h_minus1, early, "steady/early")?,
        late: fit_decay(&series.times, &series.h_minus1, late, "steady/late")?,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::InitialDatum;

    fn small(flow: FlowKind) -> SimulationConfig {
        SimulationConfig {
            n: 32,
            kappa: 0.0,
            dt: 0.02,
            t_final: 2.0,
            flow,
            nu: 4.0,
            seed: 3,
            theta0: InitialDatum::Sine,
            record_every: 5,
        }
    }

    #[test]
    fn realizations_are_ordered_and_distinct() {
        let cfg = MixingConfig { realizations: 3, ..MixingConfig::new(small(FlowKind::RandomCellular)) };
        let r = mixing_experiment(&cfg).unwrap();
        assert_eq!(r.fits.len(), 3);
        assert_eq!(r.seeds, realization_seeds(3, 3));
        for (i, s) in r.series.iter().enumerate() {
            assert_eq!(s.realization, i as u64);
        }
        assert_ne!(r.series[0].h_minus1, r.series[1].h_minus1);
        let again = mixing_experiment(&cfg).unwrap();
        assert_eq!(again.series[2].h_minus1, r.series[2].h_minus1);
        let mean = (0..3).map(|i| r.series[i].h_minus1[4]).sum::<f64>() / 3.0;
        assert!((r.averaged.h_minus1[4] - mean).abs() < 1e-14);
    }

    #[test]
    fn diffusion_only_rate() {
        let base = SimulationConfig { kappa: 0.05, t_final: 4.0, ..small(FlowKind::Still) };
        let cfg = MixingConfig { realizations: 1, window: Some((0.0, 4.0)), ..MixingConfig::new(base) };
        let r = mixing_experiment(&cfg).unwrap();
        assert!((r.averaged_fit.rate - 0.05).abs() < 0.05 * 0.01);
        assert_eq!(r.rate_std(), 0.0);
    }

    #[test]
    fn too_short_run_is_rejected() {
        let base = SimulationConfig { t_final: 0.04, ..small(FlowKind::Still) };
        assert!(mixing_experiment(&MixingConfig::new(base)).is_err());
    }

    #[test]
    fn relative_difference_is_symmetric() {
        assert_eq!(relative_difference(1.0, 0.75), 0.25);
        assert_eq!(relative_difference(0.75, 1.0), 0.25);
        assert_eq!(relative_difference(0.0, 0.0), 0.0);
    }
}
