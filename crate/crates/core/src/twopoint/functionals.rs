//! Lyapunov functional Φ, dissipation functional Ψ and the weighted 𝓗¹ norm.
//!
//! Every term is accumulated as `(sign, ln|coefficient · quadratic form|)`
//! so that coefficients far below the double range still combine correctly.

use serde::Serialize;

use super::coefficients::{Coefficient, CoefficientSet};
use super::ops::{Derivatives, Op, TwoPointOps, VectorField};
use crate::spectral::{inner6, GridField6D};

/// Sum of signed terms held in log form.
#[derive(Debug, Clone, Default)]
pub struct LogSum {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl LogSum {
    pub fn push(&mut self, negative: bool, ln_abs: f64) {
        if ln_abs == f64::NEG_INFINITY {
            return;
        }
        if negative {
            self.neg.push(ln_abs);
        } else {
            self.pos.push(ln_abs);
        }
    }

    /// `(negative, ln|total|)`.
    pub fn total(&self) -> (bool, f64) {
        let p = log_sum_exp(&self.pos);
        let n = log_sum_exp(&self.neg);
        if n == f64::NEG_INFINITY {
            return (false, p);
        }
        if p >= n {
            (false, p + (-(n - p).exp()).ln_1p())
        } else {
            (true, n + (-(p - n).exp()).ln_1p())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Term {
    pub name: &'static str,
    /// Natural log of the coefficient (including factors ½).
    pub ln_coefficient: f64,
    /// The quadratic form (norm squared or inner product) it multiplies.
    pub form: f64,
    /// `coefficient · form` as a double (may underflow to zero).
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub ln_abs: f64,
    pub negative: bool,
    pub terms: Vec<Term>,
}

impl FunctionalValue {
    fn build(terms: Vec<Term>) -> Self {
        let mut acc = LogSum::default();
        for t in &terms {
            if t.form != 0.0 {
                acc.push(t.form < 0.0, t.ln_coefficient + t.form.abs().ln());
            }
        }
        let (negative, ln_abs) = acc.total();
        let value = if negative { -ln_abs.exp() } else { ln_abs.exp() };
        Self { value, ln_abs, negative, terms }
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }
}

fn term(name: &'static str, ln_coefficient: f64, form: f64) -> Term {
    let value = if form == 0.0 { 0.0 } else { form * ln_coefficient.exp() };
    Term { name, ln_coefficient, form, value }
}

fn sq(v: &VectorField) -> f64 {
    v.iter().map(|c| inner6(c, c)).sum()
}

fn dot(a: &VectorField, b: &VectorField) -> f64 {
    a.iter().zip(b).map(|(x, y)| inner6(x, y)).sum()
}

/// Parameters of the tilted equation that enter the functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusivities {
    pub nu: f64,
    /// `κ̃ = κ/4`
    pub kappa_tilde: f64,
}

/// `Φ(f)`.
pub fn lyapunov_phi(ops: &TwoPointOps, f: &GridField6D, c: &CoefficientSet, kappa_tilde: f64) -> FunctionalValue {
    let nu = c.nu;
    let d = Derivatives::new(f);
    let gx = d.grad_x();
    let gy = d.grad_y();
    let c1 = ops.apply_grad(Op::C1, &gx);
    let s1 = ops.apply_grad(Op::S1, &gx);
    let c2 = ops.apply_grad(Op::C2, &gx);
    let s2 = ops.apply_grad(Op::S2, &gx);
    let c3 = ops.apply_grad(Op::C3, &gx);
    let gp = ops.apply_grad(Op::GradPrime, &gx);
    let half = 0.5f64.ln();
    let ln = |k: &Coefficient| k.ln(nu);
    let terms = vec![
        term("f", half, f.inner(f)),
        term("grad_y", half + ln(&c.alpha[0]), sq(&gy)),
        term("grad_x", half + kappa_tilde.ln() + ln(&c.delta), sq(&gx)),
        term("grad_y.C1", ln(&c.beta[0]), dot(&gy, &c1)),
        term("C1", half + ln(&c.alpha[1]), sq(&c1)),
        term("S1", half + ln(&c.gamma[0]), sq(&s1)),
        term("C1.C2", ln(&c.beta[1]), dot(&c1, &c2)),
        term("C2", half + ln(&c.alpha[2]), sq(&c2)),
        term("S2", half + ln(&c.gamma[1]), sq(&s2)),
        term("C2.C3", ln(&c.beta[2]), dot(&c2, &c3)),
        term("grad_prime", half + ln(&c.alpha[3]), sq(&gp)),
    ];
    FunctionalValue::build(terms)
}

/// `Σ_b ‖A ∂_b f‖²` given `∇ₓ∂_b f` for every `b` in the set.
fn op_of_derivatives(ops: &TwoPointOps, mixed: &[VectorField], op: Op) -> f64 {
    mixed.iter().map(|g| sq(&ops.apply_grad(op, g))).sum()
}

/// `Σ_{a ∈ {1,2}} Σ_b ‖∂_a ∂_b f‖²`.
fn prime_of_derivatives(mixed: &[VectorField]) -> f64 {
    mixed.iter().map(|g| inner6(&g[0], &g[0]) + inner6(&g[1], &g[1])).sum()
}

/// `Ψ(f)`; `ν` is taken from `p`, the coefficients from `c`.
pub fn dissipation_psi(ops: &TwoPointOps, f: &GridField6D, c: &CoefficientSet, p: Diffusivities) -> FunctionalValue {
    let lnu = p.nu.ln();
    let ln = |k: &Coefficient| k.ln(c.nu);
    let d = Derivatives::new(f);
    let gx = d.grad_x();
    let gy = d.grad_y();
    let c1 = ops.apply_grad(Op::C1, &gx);
    let c2 = ops.apply_grad(Op::C2, &gx);
    let c3 = ops.apply_grad(Op::C3, &gx);
    let lap_y = d.laplacian_y();
    let my: Vec<VectorField> = (4..6).map(|b| d.grad_x_of(b)).collect();
    let mut terms = vec![
        term("grad_y", lnu, sq(&gy)),
        term("lap_y", lnu + ln(&c.alpha[0]), inner6(&lap_y, &lap_y)),
        term("C1", ln(&c.beta[0]), sq(&c1)),
        term("C1 grad_y", lnu + ln(&c.alpha[1]), op_of_derivatives(ops, &my, Op::C1)),
        term("S1 grad_y", lnu + ln(&c.gamma[0]), op_of_derivatives(ops, &my, Op::S1)),
        term("C2", ln(&c.beta[1]), sq(&c2)),
        term("C2 grad_y", lnu + ln(&c.alpha[2]), op_of_derivatives(ops, &my, Op::C2)),
        term("S2 grad_y", lnu + ln(&c.gamma[1]), op_of_derivatives(ops, &my, Op::S2)),
        term("C3", ln(&c.beta[2]), sq(&c3)),
        term("grad_prime grad_y", lnu + ln(&c.alpha[3]), prime_of_derivatives(&my)),
    ];
    if p.kappa_tilde > 0.0 {
        let lk = p.kappa_tilde.ln();
        let lap_x = d.laplacian_x();
        let mx: Vec<VectorField> = (0..4).map(|b| d.grad_x_of(b)).collect();
        let xy: f64 = my.iter().map(sq).sum();
        terms.extend([
            term("k grad_x", lk, sq(&gx)),
            term("k grad_x grad_y", lk + ln(&c.alpha[0]), xy),
            term("k lap_x", 2.0 * lk + ln(&c.delta), inner6(&lap_x, &lap_x)),
            term("k C1 grad_x", lk + ln(&c.alpha[1]), op_of_derivatives(ops, &mx, Op::C1)),
            term("k S1 grad_x", lk + ln(&c.gamma[0]), op_of_derivatives(ops, &mx, Op::S1)),
            term("k C2 grad_x", lk + ln(&c.alpha[2]), op_of_derivatives(ops, &mx, Op::C2)),
            term("k S2 grad_x", lk + ln(&c.gamma[1]), op_of_derivatives(ops, &mx, Op::S2)),
            term("k grad_prime grad_x", lk + ln(&c.alpha[3]), prime_of_derivatives(&mx)),
        ]);
    }
    FunctionalValue::build(terms)
}

/// `‖f‖ + ‖∂₁f‖ + ‖∂₂f‖ + ‖d̃∂₃f‖ + ‖d̃∂₄f‖ + √κ̃‖∇ₓf‖ + ‖∇_y f‖`.
pub fn weighted_h1_norm(ops: &TwoPointOps, f: &GridField6D, kappa_tilde: f64) -> f64 {
    let d = Derivatives::new(f);
    let gx = d.grad_x();
    let gy = d.grad_y();
    let w3 = ops.multiply(&gx[2], |t| t.weight());
    let w4 = ops.multiply(&gx[3], |t| t.weight());
    let n = |v: &[f64]| inner6(v, v).sqrt();
    f.l2_norm()
        + n(&gx[0])
        + n(&gx[1])
        + n(&w3)
        + n(&w4)
        + kappa_tilde.sqrt() * sq(&gx).sqrt()
        + sq(&gy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twopoint::random_field6;
    use std::f64::consts::PI;

    const N: usize = 8;

    #[test]
    fn log_sum_signs() {
        let mut s = LogSum::default();
        s.push(false, 3f64.ln());
        s.push(true, 1f64.ln());
        let (neg, l) = s.total();
        assert!(!neg && (l.exp() - 2.0).abs() < 1e-14);
        let mut s = LogSum::default();
        s.push(true, 5f64.ln());
        s.push(false, 1f64.ln());
        let (neg, l) = s.total();
        assert!(neg && (l.exp() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn zero_field_gives_zero() {
        let ops = TwoPointOps::new(N);
        let f = GridField6D::zeros(N).unwrap();
        let c = CoefficientSet::moderate();
        assert_eq!(lyapunov_phi(&ops, &f, &c, 0.0).value, 0.0);
        let p = Diffusivities { nu: 4.0, kappa_tilde: 0.01 };
        assert_eq!(dissipation_psi(&ops, &f, &c, p).value, 0.0);
        assert_eq!(weighted_h1_norm(&ops, &f, 0.0), 0.0);
    }

    #[test]
    fn trivial_coefficients_leave_half_l2() {
        let ops = TwoPointOps::new(N);
        let f = random_field6(N, 2, true, 1).unwrap();
        let phi = lyapunov_phi(&ops, &f, &CoefficientSet::trivial(4.0), 0.0);
        assert!((phi.value - 0.5 * f.inner(&f)).abs() < 1e-14);
    }

    #[test]
    fn constant_field_dissipates_nothing() {
        let ops = TwoPointOps::new(N);
        let f = GridField6D::from_fn(N, |_| 2.0).unwrap();
        let p = Diffusivities { nu: 4.0, kappa_tilde: 0.1 };
        let psi = dissipation_psi(&ops, &f, &CoefficientSet::moderate(), p);
        assert!(psi.value.abs() < 1e-20);
    }

    #[test]
    fn nu_proportional_terms_scale_linearly() {
        let ops = TwoPointOps::new(N);
        let f = random_field6(N, 2, true, 2).unwrap();
        let c = CoefficientSet::moderate();
        let a = dissipation_psi(&ops, &f, &c, Diffusivities { nu: 4.0, kappa_tilde: 0.0 });
        let b = dissipation_psi(&ops, &f, &c, Diffusivities { nu: 8.0, kappa_tilde: 0.0 });
        for name in ["grad_y", "lap_y", "C1 grad_y", "S2 grad_y"] {
            let r = b.term(name).unwrap().value / a.term(name).unwrap().value;
            assert!((r - 2.0).abs() < 1e-12, "{name}: {r}");
        }
        let r = b.term("C1").unwrap().value / a.term("C1").unwrap().value;
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn h1_of_pure_y_mode() {
        let ops = TwoPointOps::new(N);
        let f = GridField6D::from_fn(N, |x| x[4].sin()).unwrap();
        let g = GridField6D::from_fn(N, |x| x[4].cos()).unwrap();
        let got = weighted_h1_norm(&ops, &f, 0.3);
        assert!((got - (f.l2_norm() + g.l2_norm())).abs() < 1e-12);
        let expected = 2.0 * (2.0 * PI).powi(3) / 2f64.sqrt();
        assert!((got - expected).abs() < 1e-10);
    }

    #[test]
    fn weighted_term_closed_form() {
        // ‖d̃ cos x̃₃‖² = ∫ (sin²x̃₃ + sin²x̃₄) cos²x̃₃ = (2π)⁶ (1/8 + 1/4)
        let ops = TwoPointOps::new(N);
        let f = GridField6D::from_fn(N, |x| x[2].sin()).unwrap();
        let g3 = Derivatives::new(&f).d(2);
        let w3 = ops.multiply(&g3, |t| t.weight());
        let expected = (2.0 * PI).powi(6) * 3.0 / 8.0;
        assert!((inner6(&w3, &w3) - expected).abs() < 1e-9 * expected);
    }

    fn weighted_ratio(ops: &TwoPointOps, centre: f64) -> f64 {
        let n = ops.n();
        let f = GridField6D::from_fn(n, |x| {
            let a = (x[2] - centre).cos() + 1.0;
            let b = (x[3] - centre).cos() + 1.0;
            a.powi(4) * b.powi(4)
        })
        .unwrap();
        let g3 = Derivatives::new(&f).d(2);
        let w3 = ops.multiply(&g3, |t| t.weight());
        (inner6(&w3, &w3) / inner6(&g3, &g3)).sqrt()
    }

    /// Separable 1-D quadrature of the same ratio for `h(x) = (1 + cos(x − c))⁴`.
    fn weighted_ratio_1d(centre: f64) -> f64 {
        let m = 4096;
        let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..m {
            let x = 2.0 * PI * i as f64 / m as f64;
            let h = ((x - centre).cos() + 1.0).powi(4);
            let dh = -4.0 * ((x - centre).cos() + 1.0).powi(3) * (x - centre).sin();
            let s2 = x.sin().powi(2);
            a += s2 * dh * dh;
            b += dh * dh;
            c += s2 * h * h;
            d += h * h;
        }
        (a / b + c / d).sqrt()
    }

    #[test]
    fn weighted_term_is_small_near_the_diagonal() {
        let ops = TwoPointOps::new(16);
        let near = weighted_ratio(&ops, 0.0);
        let far = weighted_ratio(&ops, PI / 2.0);
        assert!((near - weighted_ratio_1d(0.0)).abs() < 1e-10);
        assert!((far - weighted_ratio_1d(PI / 2.0)).abs() < 1e-10);
        assert!(near < 0.75 * far, "near {near}, far {far}");
    }
}
