//! Enhanced-dissipation sweep over the diffusivity.

use serde::Serialize;

use super::fit::{fit_decay, DecayFit};
use super::mixing::run_realizations;
use crate::error::{Error, Result};
use crate::solver::SimulationConfig;

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    /// Shared settings; its `kappa` is overridden per entry.
    pub base: SimulationConfig,
    /// Strictly decreasing values in `(0, 1)`.
    pub kappas: Vec<f64>,
    pub realizations: usize,
    /// `κ = 0` mixing rate used to place the windows.
    pub lambda_hat: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub kappa: f64,
    /// Mean of the per-realization L² rates on the early window.
    pub mu: f64,
    /// `μ̂ · ln(1/κ)`.
    pub mu_log: f64,
    pub realizations: usize,
    /// Sample standard deviation of the per-realization rates.
    pub dispersion: f64,
    pub window: (f64, f64),
    /// Mean L² rate on the late window.
    pub late_rate: f64,
    pub late_window: (f64, f64),
    pub fits: Vec<DecayFit>,
    pub late_fits: Vec<DecayFit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub lambda_hat: f64,
    pub entries: Vec<SweepEntry>,
}

impl SweepResult {
    /// `(max − min) / max` of `μ̂ · ln(1/κ)` over the sweep.
    pub fn mu_log_spread(&self) -> f64 {
        let v: Vec<f64> = self.entries.iter().map(|e| e.mu_log).collect();
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        if max <= 0.0 {
            return f64::INFINITY;
        }
        (max - min) / max
    }

    /// Whether `μ̂(κ) > factor · κ` for every entry.
    pub fn enhanced_by(&self, factor: f64) -> bool {
        self.entries.iter().all(|e| e.mu > factor * e.kappa)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["kappa", "mu", "mu_log", "realizations", "dispersion", "t0", "t1", "late_rate"])?;
        for e in &self.entries {
            w.write_record([
                e.kappa.to_string(),
                e.mu.to_string(),
                e.mu_log.to_string(),
                e.realizations.to_string(),
                e.dispersion.to_string(),
                e.window.0.to_string(),
                e.window.1.to_string(),
                e.late_rate.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `[0, 0.8 ln(1/κ)/λ̂]`, capped at the horizon; the whole horizon if `λ̂ ≤ 0`.
pub fn mu_window(kappa: f64, lambda_hat: f64, t_final: f64) -> (f64, f64) {
    let end = if lambda_hat > 0.0 { 0.8 * (1.0 / kappa).ln() / lambda_hat } else { f64::INFINITY };
    (0.0, end.min(t_final))
}

/// Second half of the horizon.
pub fn late_window(t_final: f64) -> (f64, f64) {
    (0.5 * t_final, t_final)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt() } else { 0.0 };
    (mean, std)
}

pub fn dissipation_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.kappas.is_empty() || cfg.realizations == 0 {
        return Err(Error::InvalidParameter("empty sweep".into()));
    }
    for &k in &cfg.kappas {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::InvalidParameter(format!("kappa must lie in (0, 1), got {k}")));
        }
    }
    if cfg.kappas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("kappa values must be strictly decreasing".into()));
    }
    let theta0 = cfg.base.theta0.sample(cfg.base.n)?;
    let mut entries = Vec::with_capacity(cfg.kappas.len());
    for &kappa in &cfg.kappas {
        let base = SimulationConfig { kappa, ..cfg.base.clone() };
        let series = run_realizations(&base, &theta0, cfg.realizations)?;
        let window = mu_window(kappa, cfg.lambda_hat, base.t_final);
        let late = late_window(base.t_final);
        let mut fits = Vec::new();
        let mut late_fits = Vec::new();
        for s in &series {
            fits.push(fit_decay(&s.times, &s.l2, window, &format!("l2/k{kappa:e}/r{}", s.realization))?);
            late_fits.push(fit_decay(&s.times, &s.l2, late, &format!("l2-late/k{kappa:e}/r{}", s.realization))?);
        }
        let (mu, dispersion) = mean_std(&fits.iter().map(|f| f.rate).collect::<Vec<_>>());
        let (late_rate, _) = mean_std(&late_fits.iter().map(|f| f.rate).collect::<Vec<_>>());
        entries.push(SweepEntry {
            kappa,
            mu,
            mu_log: mu * (1.0 / kappa).ln(),
            realizations: cfg.realizations,
            dispersion,
            window,
            late_rate,
            late_window: late,
            fits,
            late_fits,
        });
    }
    Ok(SweepResult { lambda_hat: cfg.lambda_hat, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowKind;
    use crate::solver::InitialDatum;

    fn still() -> SimulationConfig {
        SimulationConfig {
            n: 16,
            kappa: 0.0,
            dt: 0.05,
            t_final: 5.0,
            flow: FlowKind::Still,
            nu: 4.0,
            seed: 0,
            theta0: InitialDatum::Sine,
            record_every: 2,
        }
    }

    #[test]
    fn no_advection_gives_bare_rate() {
        let cfg = SweepConfig { base: still(), kappas: vec![0.5, 0.1], realizations: 2, lambda_hat: 0.0 };
        let r = dissipation_sweep(&cfg).unwrap();
        for e in &r.entries {
            assert!((e.mu - e.kappa).abs() < 0.02 * e.kappa, "{} {}", e.mu, e.kappa);
            assert!((e.late_rate - e.kappa).abs() < 0.02 * e.kappa);
            assert_eq!(e.window, (0.0, 5.0));
            assert_eq!(e.fits.len(), 2);
        }
        assert!(!r.enhanced_by(10.0));
    }

    #[test]
    fn window_rule() {
        let (a, b) = mu_window(1e-2, 0.5, 100.0);
        assert_eq!(a, 0.0);
        assert!((b - 0.8 * 100f64.ln() / 0.5).abs() < 1e-12);
        assert_eq!(mu_window(1e-2, 0.01, 30.0), (0.0, 30.0));
        assert_eq!(mu_window(1e-2, -1.0, 30.0), (0.0, 30.0));
    }

    #[test]
    fn rejects_bad_sweeps() {
        let mk = |k: Vec<f64>| SweepConfig { base: still(), kappas: k, realizations: 1, lambda_hat: 0.1 };
        assert!(dissipation_sweep(&mk(vec![1.0])).is_err());
        assert!(dissipation_sweep(&mk(vec![0.1, 0.2])).is_err());
        assert!(dissipation_sweep(&mk(vec![])).is_err());
    }

    #[test]
    fn spread_of_mu_log() {
        let e = |mu_log: f64| SweepEntry {
            kappa: 0.1,
            mu: mu_log,
            mu_log,
            realizations: 1,
            dispersion: 0.0,
            window: (0.0, 1.0),
            late_rate: 0.0,
            late_window: (0.0, 1.0),
            fits: vec![],
            late_fits: vec![],
        };
        let r = SweepResult { lambda_hat: 0.1, entries: vec![e(1.0), e(0.6), e(0.8)] };
        assert!((r.mu_log_spread() - 0.4).abs() < 1e-12);
    }
}
