//! Decay of Lagrangian correlations at integer times.

use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_decay, DecayFit};
use super::mixing::realization_seeds;
use crate::error::{Error, Result};
use crate::flow::{FlowKind, FlowSpec, ShiftPath};
use crate::lagrangian::{correlation_series, ParticleSettings, ScalarFunction};
use crate::rng::split_seed;

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationConfig {
    pub flow: FlowKind,
    pub nu: f64,
    pub kappa: f64,
    pub n_max: usize,
    pub realizations: usize,
    /// Quadrature nodes per side.
    pub nq: usize,
    /// Particles per node.
    pub samples: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        Self {
            flow: FlowKind::RandomCellular,
            nu: 4.0,
            kappa: 0.0,
            n_max: 20,
            realizations: 8,
            nq: 64,
            samples: 1,
            dt: 1e-2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationResult {
    /// `Cor(n)` for `n = 0..=n_max`, one row per realization.
    pub correlations: Vec<Vec<f64>>,
    pub fits: Vec<DecayFit>,
    /// Mean of the fitted rates.
    pub gamma: f64,
    /// Fraction of realizations with `Cor(n) > e^{−γ n/2}`, per `n`.
    pub exceedance_by_n: Vec<f64>,
    /// Same fraction over all `(n, realization)` pairs with `n ≥ 1`.
    pub exceedance: f64,
}

impl CorrelationResult {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["n", "realization", "correlation"])?;
        for (r, row) in self.correlations.iter().enumerate() {
            for (n, c) in row.iter().enumerate() {
                w.write_record([n.to_string(), r.to_string(), c.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn correlation_decay_experiment(
    h: &dyn ScalarFunction,
    g: &dyn ScalarFunction,
    cfg: &CorrelationConfig,
) -> Result<CorrelationResult> {
    if cfg.realizations == 0 || cfg.n_max == 0 {
        return Err(Error::InvalidParameter("need at least one realization and n_max >= 1".into()));
    }
    let times: Vec<f64> = (0..=cfg.n_max).map(|n| n as f64).collect();
    let correlations = realization_seeds(cfg.seed, cfg.realizations)
        .into_par_iter()
        .map(|seed| {
            let shift = match cfg.flow {
                FlowKind::RandomCellular => Some(ShiftPath::sample(cfg.nu, cfg.dt, cfg.n_max as f64, seed)?),
                _ => None,
            };
            let flow = FlowSpec::new(cfg.flow, shift)?;
            let settings =
                ParticleSettings { kappa: cfg.kappa, samples: cfg.samples, dt: cfg.dt, seed: split_seed(seed, 1) };
            correlation_series(h, g, &flow, &times, settings, cfg.nq)
        })
        .collect::<Result<Vec<_>>>()?;
    let fits = correlations
        .iter()
        .enumerate()
        .map(|(r, c)| fit_decay(&times, c, (0.0, cfg.n_max as f64), &format!("cor/r{r}")))
        .collect::<Result<Vec<_>>>()?;
    let gamma = fits.iter().map(|f| f.rate).sum::<f64>() / fits.len() as f64;
    let m = cfg.realizations as f64;
    let exceedance_by_n: Vec<f64> = (0..=cfg.n_max)
        .map(|n| {
            let bound = (-gamma * n as f64 / 2.0).exp();
            correlations.iter().filter(|c| c[n] > bound).count() as f64 / m
        })
        .collect();
    let exceedance = exceedance_by_n[1..].iter().sum::<f64>() / cfg.n_max as f64;
    Ok(CorrelationResult { correlations, fits, gamma, exceedance_by_n, exceedance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Point;
    use std::f64::consts::PI;

    fn sin1(x: Point) -> f64 {
        x[0].sin()
    }

    #[test]
    fn still_flow_has_zero_rate() {
        let cfg = CorrelationConfig { flow: FlowKind::Still, n_max: 4, realizations: 2, nq: 16, ..Default::default() };
        let r = correlation_decay_experiment(&sin1, &sin1, &cfg).unwrap();
        for row in &r.correlations {
            for c in row {
                assert!((c - 2.0 * PI * PI).abs() < 1e-10);
            }
        }
        assert!(r.gamma.abs() < 1e-12);
    }

    #[test]
    fn n_zero_is_the_inner_product() {
        let cfg = CorrelationConfig { n_max: 2, realizations: 2, nq: 16, ..Default::default() };
        let r = correlation_decay_experiment(&sin1, &sin1, &cfg).unwrap();
        assert!((r.correlations[1][0] - 2.0 * PI * PI).abs() < 1e-10);
        assert_eq!(r.exceedance_by_n.len(), 3);
    }

    #[test]
    fn mean_nonzero_rejected() {
        let cfg = CorrelationConfig { n_max: 1, realizations: 1, nq: 8, ..Default::default() };
        let one = |_: Point| 1.0;
        assert!(correlation_decay_experiment(&one, &sin1, &cfg).is_err());
    }
}
