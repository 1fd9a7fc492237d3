//! Empirical ratio brackets between the Lyapunov functional, the dissipation
//! functional and the weighted 𝓗¹ norm.

use serde::Serialize;

use crate::error::Result;
use crate::rng::split_seed;
use crate::spectral::{inner6, GridField6D};
use crate::twopoint::{
    dissipation_psi, lyapunov_phi, random_field6, weighted_h1_norm, CoefficientSet, Derivatives, Diffusivities,
    TwoPointOps,
};

/// Frozen bound on `‖f‖ / (‖∂₁f‖ + ‖∂₂f‖ + ‖s₃∂₃f‖ + ‖s₄∂₄f‖)` for random
/// x̃-mean-zero fields depending on x̃ only, with modes `|k_i| ≤ 2`.
/// Fitted at 0.2133 (n = 8, 200 samples; n = 12, 50 samples) and frozen.
pub const X_ONLY_GUARD: f64 = 0.25;

/// Random x̃-mean-zero field with modes `|k_i| ≤ kmax`.
pub fn mean_zero_sample(n: usize, kmax: i64, seed: u64) -> Result<GridField6D> {
    random_field6(n, kmax, true, seed)
}

fn scale(f: &GridField6D, a: f64) -> GridField6D {
    GridField6D::from_values(f.n(), f.values().iter().map(|v| a * v).collect()).expect("lattice")
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioBracket {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    /// `|r(2f) − r(f)| / r(f)` on the first sample.
    pub scale_defect: f64,
}

pub fn phi_h1_ratio(ops: &TwoPointOps, f: &GridField6D, coeffs: &CoefficientSet, kappa_tilde: f64) -> f64 {
    let h1 = weighted_h1_norm(ops, f, kappa_tilde);
    lyapunov_phi(ops, f, coeffs, kappa_tilde).value / (h1 * h1)
}

/// `[min, max]` of `Φ(f)/‖f‖²_𝓗¹` over random x̃-mean-zero fields.
pub fn phi_h1_ratio_bracket(
    n: usize,
    samples: usize,
    coeffs: &CoefficientSet,
    kappa_tilde: f64,
    seed: u64,
) -> Result<RatioBracket> {
    let ops = TwoPointOps::new(n);
    let mut out = RatioBracket { min: f64::INFINITY, max: 0.0, samples, scale_defect: 0.0 };
    for s in 0..samples {
        let f = mean_zero_sample(n, 2, split_seed(seed, s as u64))?;
        let r = phi_h1_ratio(&ops, &f, coeffs, kappa_tilde);
        out.min = out.min.min(r);
        out.max = out.max.max(r);
        if s == 0 {
            let r2 = phi_h1_ratio(&ops, &scale(&f, 2.0), coeffs, kappa_tilde);
            out.scale_defect = (r2 - r).abs() / r;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiPsiReport {
    pub max: f64,
    pub min: f64,
    pub samples: usize,
    /// Samples with `Ψ = 0 < Φ`.
    pub violations: usize,
    pub scale_defect: f64,
}

pub fn phi_psi_ratio(ops: &TwoPointOps, f: &GridField6D, coeffs: &CoefficientSet, p: Diffusivities) -> (f64, f64) {
    (lyapunov_phi(ops, f, coeffs, p.kappa_tilde).value, dissipation_psi(ops, f, coeffs, p).value)
}

/// Largest `Φ(f)/Ψ(f)` over random x̃-mean-zero fields.
pub fn psi_controls_phi_ratio(
    n: usize,
    samples: usize,
    coeffs: &CoefficientSet,
    p: Diffusivities,
    seed: u64,
) -> Result<PhiPsiReport> {
    let ops = TwoPointOps::new(n);
    let mut out = PhiPsiReport { max: 0.0, min: f64::INFINITY, samples, violations: 0, scale_defect: 0.0 };
    for s in 0..samples {
        let f = mean_zero_sample(n, 2, split_seed(seed, s as u64))?;
        let (phi, psi) = phi_psi_ratio(&ops, &f, coeffs, p);
        if psi <= 0.0 {
            if phi > 0.0 {
                out.violations += 1;
            }
            continue;
        }
        out.max = out.max.max(phi / psi);
        out.min = out.min.min(phi / psi);
        if s == 0 {
            let (phi2, psi2) = phi_psi_ratio(&ops, &scale(&f, 2.0), coeffs, p);
            out.scale_defect = (phi2 / psi2 - phi / psi).abs() / (phi / psi);
        }
    }
    Ok(out)
}

/// `Φ/Ψ` for `f = sin ỹ₁` at `κ̃ = 0`: only `½(1 + α₀)‖f‖²` and `ν(1 + α₀)‖f‖²`
/// survive, so the ratio is `1/(2ν)` whatever the coefficients.
pub fn pure_y_phi_psi(nu: f64) -> f64 {
    1.0 / (2.0 * nu)
}

/// `‖f‖ / (‖∂₁f‖ + ‖∂₂f‖ + ‖s₃∂₃f‖ + ‖s₄∂₄f‖)`.
pub fn x_only_ratio(ops: &TwoPointOps, f: &GridField6D) -> f64 {
    let d = Derivatives::new(f);
    let g = d.grad_x();
    let w3 = ops.multiply(&g[2], |t| t.s3);
    let w4 = ops.multiply(&g[3], |t| t.s4);
    let nrm = |v: &[f64]| inner6(v, v).sqrt();
    f.l2_norm() / (nrm(&g[0]) + nrm(&g[1]) + nrm(&w3) + nrm(&w4))
}

#[derive(Debug, Clone, Serialize)]
pub struct XOnlyReport {
    pub max_ratio: f64,
    pub guard: f64,
    pub samples: usize,
    pub passes: bool,
}

/// Random x̃-mean-zero fields independent of ỹ.
pub fn x_only_guard(n: usize, samples: usize, seed: u64) -> Result<XOnlyReport> {
    let ops = TwoPointOps::new(n);
    let mut max_ratio = 0.0f64;
    for s in 0..samples {
        let f = mean_zero_sample(n, 2, split_seed(seed, s as u64))?;
        let mut spec = f.forward();
        spec.map_modes_in_place(|k, c| if k[4] == 0 && k[5] == 0 { c } else { c * 0.0 });
        max_ratio = max_ratio.max(x_only_ratio(&ops, &spec.inverse()));
    }
    Ok(XOnlyReport { max_ratio, guard: X_ONLY_GUARD, samples, passes: max_ratio <= X_ONLY_GUARD })
}
