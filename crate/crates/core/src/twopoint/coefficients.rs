use serde::Serialize;

use crate::error::{Error, Result};
use crate::verify::{ExponentAssignment, CONSTRAINTS};

/// A positive coefficient `ε^{eps_power} ν^{nu_power}` kept in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficient {
    /// `eps_power · ln ε`; `−∞` encodes an exactly zero coefficient.
    pub ln_mantissa: f64,
    pub nu_power: f64,
}

impl Coefficient {
    pub const ZERO: Self = Self { ln_mantissa: f64::NEG_INFINITY, nu_power: 0.0 };

    pub fn new(epsilon: f64, eps_power: f64, nu_power: f64) -> Self {
        Self { ln_mantissa: eps_power * epsilon.ln(), nu_power }
    }

    pub fn ln(&self, nu: f64) -> f64 {
        if self.ln_mantissa == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.ln_mantissa + self.nu_power * nu.ln()
        }
    }

    pub fn value(&self, nu: f64) -> f64 {
        self.ln(nu).exp()
    }
}

/// Coefficients `α₀..α₃, β₀..β₂, γ₁, γ₂, δ` of the Lyapunov and dissipation functionals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub epsilon: f64,
    pub nu: f64,
    pub alpha: [Coefficient; 4],
    pub beta: [Coefficient; 3],
    /// `γ₁, γ₂`
    pub gamma: [Coefficient; 2],
    pub delta: Coefficient,
    /// Exponents `(x₀..x₃, y₀..y₂, z₁, z₂)` used to build the set.
    pub exponents: [f64; 9],
}

impl CoefficientSet {
    /// `α_i = ε^{x_i} ν^{−2i}`, `β_i = ε^{y_i} ν^{−(2i+1)}`, `γ_i = ε^{z_i} ν^{−2i}`, `δ = ε`,
    /// with every exponent multiplied by `scale`.
    pub fn from_exponents(a: &ExponentAssignment, scale: f64, epsilon: f64, nu: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !(nu > 1.0) {
            return Err(Error::InvalidParameter(format!("nu must exceed 1, got {nu}")));
        }
        let e = a.to_vec().map(|v| v as f64 * scale);
        let alpha = std::array::from_fn(|i| Coefficient::new(epsilon, e[i], -2.0 * i as f64));
        let beta = std::array::from_fn(|i| Coefficient::new(epsilon, e[4 + i], -(2.0 * i as f64 + 1.0)));
        let gamma = std::array::from_fn(|i| Coefficient::new(epsilon, e[7 + i], -2.0 * (i as f64 + 1.0)));
        Ok(Self {
            epsilon,
            nu,
            alpha,
            beta,
            gamma,
            delta: Coefficient::new(epsilon, 1.0, 0.0),
            exponents: e,
        })
    }

    /// The published integer exponents.
    pub fn paper(epsilon: f64, nu: f64) -> Result<Self> {
        Self::from_exponents(&ExponentAssignment::PAPER, 1.0, epsilon, nu)
    }

    /// Published exponents divided by 64 with `ε = 1/2`, `ν = 4`: values of
    /// moderate size for numerical monitoring.
    pub fn moderate() -> Self {
        Self::from_exponents(&ExponentAssignment::PAPER, 1.0 / 64.0, 0.5, 4.0).expect("valid preset")
    }

    /// All coefficients zero: `Φ = ½‖f‖²`.
    pub fn trivial(nu: f64) -> Self {
        Self {
            epsilon: 0.5,
            nu,
            alpha: [Coefficient::ZERO; 4],
            beta: [Coefficient::ZERO; 3],
            gamma: [Coefficient::ZERO; 2],
            delta: Coefficient::ZERO,
            exponents: [f64::INFINITY; 9],
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "moderate" => Ok(Self::moderate()),
            "paper" => Self::paper(0.5, 4.0),
            other => Err(Error::Config(format!("unknown coefficient preset '{other}'"))),
        }
    }

    /// Same coefficients with a different `ν` (ν-powers re-evaluated).
    pub fn with_nu(&self, nu: f64) -> Self {
        Self { nu, ..self.clone() }
    }

    /// Margin of every ordering condition, in powers of `ε`: condition
    /// `c·v ≥ 1 + Σ w` of the exponent system has margin `c·v − Σ w − 1`.
    /// The ν-powers cancel identically in every condition. A negative margin
    /// means the required factor-of-ε gap is not met.
    pub fn epsilon_margins(&self) -> Vec<(String, f64)> {
        CONSTRAINTS
            .iter()
            .map(|c| {
                let lhs = c.lhs_coeff as f64 * self.exponents[c.lhs.index()];
                let rhs: f64 = c.rhs.iter().map(|v| self.exponents[v.index()]).sum();
                (c.label(), lhs - rhs - 1.0)
            })
            .collect()
    }

    /// True if every ordering condition holds with a full factor of ε and `εν ≥ 1`.
    pub fn satisfies_orderings(&self) -> bool {
        self.epsilon * self.nu >= 1.0 && self.epsilon_margins().iter().all(|(_, m)| *m >= 0.0)
    }

    pub fn values(&self) -> Vec<(&'static str, f64)> {
        let nu = self.nu;
        vec![
            ("alpha0", self.alpha[0].value(nu)),
            ("alpha1", self.alpha[1].value(nu)),
            ("alpha2", self.alpha[2].value(nu)),
            ("alpha3", self.alpha[3].value(nu)),
            ("beta0", self.beta[0].value(nu)),
            ("beta1", self.beta[1].value(nu)),
            ("beta2", self.beta[2].value(nu)),
            ("gamma1", self.gamma[0].value(nu)),
            ("gamma2", self.gamma[1].value(nu)),
            ("delta", self.delta.value(nu)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moderate_values() {
        let c = CoefficientSet::moderate();
        assert!((c.alpha[0].value(4.0) - 0.0625).abs() < 1e-15);
        assert!((c.beta[0].value(4.0) - 0.5f64.powi(6) / 4.0).abs() < 1e-16);
        assert!((c.delta.value(4.0) - 0.5).abs() < 1e-15);
        assert!(!c.satisfies_orderings());
    }

    #[test]
    fn paper_exponents_meet_every_ordering() {
        let c = CoefficientSet::paper(0.1, 20.0).unwrap();
        assert!(c.satisfies_orderings());
        // ε^493 underflows a double but not its logarithm
        assert!(c.beta[2].ln(20.0).is_finite());
        assert!(c.beta[2].value(20.0) == 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CoefficientSet::paper(1.5, 4.0).is_err());
        assert!(CoefficientSet::paper(0.5, 0.5).is_err());
        assert!(CoefficientSet::preset("huge").is_err());
    }
}
