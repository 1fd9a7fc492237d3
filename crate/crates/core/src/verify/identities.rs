//! Structural identities of the commutator operators, the pointwise
//! bound on `|M₂∇ₓf|` and fitted constants for the third- and fourth-order
//! commutator bounds.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::rng::split_seed;
use crate::spectral::{inner6, GridField6D, Spectrum6D};
use crate::twopoint::{random_field6, Op, TwoPointOps, VectorField};

/// Relative tolerance for the structural identities.
pub const IDENTITY_TOL: f64 = 1e-11;

fn forward(n: usize, v: &[f64]) -> Spectrum6D {
    GridField6D::from_values(n, v.to_vec()).expect("lattice").forward()
}

fn grad_x(s: &Spectrum6D) -> VectorField {
    (0..4).map(|a| s.derivative(a).inverse().into_values()).collect()
}

fn sub(a: &[Vec<f64>], b: &[Vec<f64>]) -> VectorField {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

fn scaled(a: &[Vec<f64>], s: f64) -> VectorField {
    a.iter().map(|x| x.iter().map(|p| s * p).collect()).collect()
}

fn norm(v: &[Vec<f64>]) -> f64 {
    v.iter().map(|c| inner6(c, c)).sum::<f64>().sqrt()
}

/// `‖a − b‖ / ‖b‖`, or `‖a‖` when `b` vanishes.
fn relative(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = norm(&sub(a, b));
    let r = norm(b);
    if r > 0.0 {
        d / r
    } else {
        d
    }
}

/// `ũ·∇ₓ` applied componentwise given the x-gradients of each component.
fn transport_of(ops: &TwoPointOps, grads: &[VectorField]) -> VectorField {
    grads.iter().map(|g| ops.apply_grad(Op::UGrad, g).pop().expect("scalar")).collect()
}

/// Derivatives of one field shared by every check.
struct Calculus<'a> {
    ops: &'a TwoPointOps,
    n: usize,
    gx: VectorField,
    /// `∇ₓ ∂_{ỹ_j} f`
    mixed: [VectorField; 2],
    /// `∇ₓ Δ_y f`
    lap_y: VectorField,
    /// `ũ·∇ₓ f` and its spectrum
    uf: Vec<f64>,
    uf_spec: Spectrum6D,
}

impl<'a> Calculus<'a> {
    fn new(ops: &'a TwoPointOps, f: &GridField6D) -> Self {
        let n = f.n();
        let spec = f.forward();
        let gx = grad_x(&spec);
        let mixed = [grad_x(&spec.derivative(4)), grad_x(&spec.derivative(5))];
        let lap_y = grad_x(&spec.map_modes(|k, c| c * -((k[4] * k[4] + k[5] * k[5]) as f64)));
        let uf = ops.apply_grad(Op::UGrad, &gx).pop().expect("scalar");
        let uf_spec = forward(n, &uf);
        Self { ops, n, gx, mixed, lap_y, uf, uf_spec }
    }

    fn apply(&self, op: Op, g: &[Vec<f64>]) -> VectorField {
        self.ops.apply_grad(op, g)
    }

    fn spectra(&self, v: &[Vec<f64>]) -> Vec<Spectrum6D> {
        v.iter().map(|c| forward(self.n, c)).collect()
    }

    /// `(Δ_y A)f = Δ_y(Af) − 2 Σ_j ∂_j(A∂_j f) + AΔ_y f`, combining the first two
    /// terms in coefficient space; also returns the spectra of `Af`.
    fn coefficient_laplacian(&self, op: Op) -> (VectorField, Vec<Spectrum6D>) {
        let af = self.spectra(&self.apply(op, &self.gx));
        let ad: Vec<Vec<Spectrum6D>> = self.mixed.iter().map(|g| self.spectra(&self.apply(op, g))).collect();
        let a_lap = self.apply(op, &self.lap_y);
        let out = af
            .iter()
            .enumerate()
            .map(|(c, s)| {
                let mut comb = s.map_modes(|k, v| v * -((k[4] * k[4] + k[5] * k[5]) as f64));
                let (d0, d1) = (ad[0][c].coeffs(), ad[1][c].coeffs());
                let mut i = 0;
                comb.map_modes_in_place(|k, v| {
                    let r = v - Complex64::new(0.0, 2.0) * (d0[i] * k[4] as f64 + d1[i] * k[5] as f64);
                    i += 1;
                    r
                });
                let mut g = comb.inverse().into_values();
                g.iter_mut().zip(&a_lap[c]).for_each(|(x, y)| *x += y);
                g
            })
            .collect();
        (out, af)
    }

    /// Component `c` of `(∂_{ỹ_j} A)f = ∂_j(Af) − A∂_j f` from the spectrum of `(Af)_c`.
    fn coefficient_derivative(&self, op: Op, af: &Spectrum6D, c: usize, j: usize) -> Vec<f64> {
        let d = af.derivative(4 + j).inverse().into_values();
        let a = &self.apply(op, &self.mixed[j])[c];
        d.iter().zip(a).map(|(x, y)| x - y).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    /// False for relations computed with a corrected constant rather than the stated one.
    pub stated: bool,
    /// Largest relative residual over the samples.
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub samples: usize,
    pub kmax: i64,
    pub residuals: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.max_residual)
    }
}

/// Residual names, in report order. Entries flagged `false` use the
/// eigenvalues obtained from the operator definitions.
pub const IDENTITIES: [(&str, bool); 14] = [
    ("C1 defining commutator", true),
    ("div_y C1 = -u.grad_x", true),
    ("lap_y C1 = -C1", true),
    ("lap_y C2 = -C2", true),
    ("lap_y C3 = -3 C3", true),
    ("lap_y C2 = -2 C2", false),
    ("lap_y C3 = -5 C3", false),
    ("(S1)_i = -(d_yi C1)_i", true),
    ("(d_yi S1)_i = (C1)_i", true),
    ("[(C1)_i, (S1)_i] = 0", true),
    ("|M1 grad f|^2 = |C1 f|^2 + |S1 f|^2", true),
    ("[C1, u.grad] - C2 = R2", true),
    ("[S1, u.grad] - (1,-1)(S2)_1 = Q2", true),
    ("u.grad skew-symmetric", true),
];

/// All residuals for one field, in the order of [`IDENTITIES`].
pub fn identity_residuals(ops: &TwoPointOps, f: &GridField6D) -> Vec<f64> {
    let k = Calculus::new(ops, f);
    let c1 = k.apply(Op::C1, &k.gx);
    let s1 = k.apply(Op::S1, &k.gx);
    let c2 = k.apply(Op::C2, &k.gx);
    let s2 = k.apply(Op::S2, &k.gx);
    let c3 = k.apply(Op::C3, &k.gx);
    let mut out = Vec::with_capacity(IDENTITIES.len());

    // C₁f = ∇_y(ũ·∇f) − ũ·∇(∇_y f)
    let defining: VectorField = (0..2)
        .map(|j| {
            let d = k.uf_spec.derivative(4 + j).inverse().into_values();
            let u = k.apply(Op::UGrad, &k.mixed[j]).pop().expect("scalar");
            d.iter().zip(&u).map(|(a, b)| a - b).collect()
        })
        .collect();
    out.push(relative(&defining, &c1));

    let (lap_c1, c1_spec) = k.coefficient_laplacian(Op::C1);
    let dc1: Vec<Vec<f64>> = (0..2).map(|i| k.coefficient_derivative(Op::C1, &c1_spec[i], i, i)).collect();
    let div: Vec<f64> = dc1[0].iter().zip(&dc1[1]).map(|(a, b)| a + b).collect();
    let minus_u: Vec<f64> = k.uf.iter().map(|v| -v).collect();
    out.push(relative(&[div], &[minus_u]));

    let (lap_c2, _) = k.coefficient_laplacian(Op::C2);
    let (lap_c3, _) = k.coefficient_laplacian(Op::C3);
    out.push(relative(&lap_c1, &scaled(&c1, -1.0)));
    out.push(relative(&lap_c2, &scaled(&c2, -1.0)));
    out.push(relative(&lap_c3, &scaled(&c3, -3.0)));
    out.push(relative(&lap_c2, &scaled(&c2, -2.0)));
    out.push(relative(&lap_c3, &scaled(&c3, -5.0)));

    out.push(relative(&scaled(&dc1, -1.0), &s1));
    let s1_spec = k.spectra(&s1);
    let ds1: VectorField = (0..2).map(|i| k.coefficient_derivative(Op::S1, &s1_spec[i], i, i)).collect();
    out.push(relative(&ds1, &c1));

    // [(C₁)_i, (S₁)_i] f = (C₁)_i (S₁f)_i − (S₁)_i (C₁f)_i
    let grad_c1: Vec<VectorField> = c1_spec.iter().map(grad_x).collect();
    let grad_s1: Vec<VectorField> = s1_spec.iter().map(grad_x).collect();
    let cs: VectorField = (0..2).map(|i| k.apply(Op::C1, &grad_s1[i]).swap_remove(i)).collect();
    let sc: VectorField = (0..2).map(|i| k.apply(Op::S1, &grad_c1[i]).swap_remove(i)).collect();
    out.push(relative(&cs, &sc));

    let m1 = k.apply(Op::M1, &k.gx);
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for p in 0..f.values().len() {
        let a: f64 = m1.iter().map(|c| c[p] * c[p]).sum();
        let b: f64 = c1.iter().chain(&s1).map(|c| c[p] * c[p]).sum();
        worst = worst.max((a - b).abs());
        scale = scale.max(a);
    }
    out.push(if scale > 0.0 { worst / scale } else { worst });

    // [A, ũ·∇]f = A(∇ₓ(ũ·∇f)) − ũ·∇(Af)
    let grad_uf = grad_x(&k.uf_spec);
    let comm_c1 = sub(&k.apply(Op::C1, &grad_uf), &transport_of(ops, &grad_c1));
    out.push(relative(&sub(&comm_c1, &c2), &ops.r2_from(&c1, &s1)));
    let comm_s1 = sub(&k.apply(Op::S1, &grad_uf), &transport_of(ops, &grad_s1));
    let s2_lift: VectorField = vec![s2[0].clone(), s2[0].iter().map(|v| -v).collect()];
    out.push(relative(&sub(&comm_s1, &s2_lift), &ops.q2_from(&c1)));

    let skew = inner6(&k.uf, f.values()).abs() / (norm(std::slice::from_ref(&k.uf)) * f.l2_norm()).max(f64::MIN_POSITIVE);
    out.push(skew);
    out
}

/// Identity residuals over `samples` random fields with modes `|k_i| ≤ kmax`.
pub fn identity_suite(n: usize, samples: usize, kmax: i64, seed: u64) -> Result<IdentityReport> {
    let ops = TwoPointOps::new(n);
    let mut worst = vec![0.0f64; IDENTITIES.len()];
    for s in 0..samples {
        let f = random_field6(n, kmax, false, split_seed(seed, s as u64))?;
        for (w, r) in worst.iter_mut().zip(identity_residuals(&ops, &f)) {
            *w = w.max(r);
        }
    }
    Ok(IdentityReport {
        n,
        samples,
        kmax,
        residuals: IDENTITIES
            .iter()
            .zip(worst)
            .map(|(&(name, stated), max_residual)| IdentityResidual { name, stated, max_residual })
            .collect(),
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PointwiseBoundReport {
    pub points: usize,
    pub violations: usize,
    /// Largest `lhs − rhs` relative to `rhs` (negative when the bound holds everywhere).
    pub worst_excess: f64,
}

/// `|M₂∇ₓf|² ≤ |C₂f|² + |S₂f|² + 3|M₁∇ₓf|²` at every lattice point.
pub fn pointwise_bound_check(ops: &TwoPointOps, f: &GridField6D) -> PointwiseBoundReport {
    let spec = f.forward();
    let g = grad_x(&spec);
    let [m1, m2, c2, s2] = [Op::M1, Op::M2, Op::C2, Op::S2].map(|op| ops.apply_grad(op, &g));
    let sq = |v: &VectorField, p: usize| v.iter().map(|c| c[p] * c[p]).sum::<f64>();
    let mut report = PointwiseBoundReport { worst_excess: f64::NEG_INFINITY, ..Default::default() };
    for p in 0..f.values().len() {
        let lhs = sq(&m2, p);
        let rhs = sq(&c2, p) + sq(&s2, p) + 3.0 * sq(&m1, p);
        report.points += 1;
        if lhs > rhs * (1.0 + 1e-12) + 1e-300 {
            report.violations += 1;
        }
        if rhs > 0.0 {
            report.worst_excess = report.worst_excess.max((lhs - rhs) / rhs);
        }
    }
    report
}

/// Which pointwise commutator bound to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutatorBound {
    /// `|[C₂, ũ·∇]f − C₃f| ≤ K (|M₁∇f| + |M₂∇f|)`
    ThirdOrder,
    /// `|[C₃, ũ·∇]f| + |[∇′, ũ·∇]f| ≤ K (|M₂∇f| + |∇′f|)`, as stated
    FourthOrderM2,
    /// The same numerator against `|M₁∇f| + |∇′f|`
    FourthOrderM1,
}

/// Pointwise numerator and denominator of `bound` for one field.
pub fn commutator_bound_terms(ops: &TwoPointOps, f: &GridField6D, bound: CommutatorBound) -> (Vec<f64>, Vec<f64>) {
    let n = f.n();
    let spec = f.forward();
    let g = grad_x(&spec);
    let uf = ops.apply_grad(Op::UGrad, &g).pop().expect("scalar");
    let grad_uf = grad_x(&forward(n, &uf));
    let commutator = |op: Op| -> VectorField {
        let af = ops.apply_grad(op, &g);
        let grads: Vec<VectorField> = af.iter().map(|c| grad_x(&forward(n, c))).collect();
        sub(&ops.apply_grad(op, &grad_uf), &transport_of(ops, &grads))
    };
    let mag = |v: &VectorField, p: usize| v.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt();
    let len = f.values().len();
    match bound {
        CommutatorBound::ThirdOrder => {
            let r = sub(&commutator(Op::C2), &ops.apply_grad(Op::C3, &g));
            let m1 = ops.apply_grad(Op::M1, &g);
            let m2 = ops.apply_grad(Op::M2, &g);
            ((0..len).map(|p| mag(&r, p)).collect(), (0..len).map(|p| mag(&m1, p) + mag(&m2, p)).collect())
        }
        CommutatorBound::FourthOrderM2 | CommutatorBound::FourthOrderM1 => {
            let a = commutator(Op::C3);
            let b = commutator(Op::GradPrime);
            let weight = ops.apply_grad(if bound == CommutatorBound::FourthOrderM2 { Op::M2 } else { Op::M1 }, &g);
            let gp = ops.apply_grad(Op::GradPrime, &g);
            (
                (0..len).map(|p| mag(&a, p) + mag(&b, p)).collect(),
                (0..len).map(|p| mag(&weight, p) + mag(&gp, p)).collect(),
            )
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorFit {
    pub bound: CommutatorBound,
    /// Constant fitted on the calibration fields.
    pub constant: f64,
    /// Largest ratio on the held-out fields.
    pub held_out_max: f64,
    /// Held-out points whose ratio exceeds the fitted constant.
    pub held_out_violations: usize,
    pub points: usize,
    /// Points skipped because the denominator is below `1e-8` of its mean.
    pub skipped: usize,
}

/// Fit the constant of `bound` on `calibration` random fields, then check it
/// on `held_out` further fields.
pub fn fit_commutator_bound(
    n: usize,
    bound: CommutatorBound,
    calibration: usize,
    held_out: usize,
    seed: u64,
) -> Result<CommutatorFit> {
    let ops = TwoPointOps::new(n);
    let mut fit = CommutatorFit {
        bound,
        constant: 0.0,
        held_out_max: 0.0,
        held_out_violations: 0,
        points: 0,
        skipped: 0,
    };
    let mut held = Vec::new();
    for s in 0..calibration + held_out {
        let f = random_field6(n, 1, false, split_seed(seed, s as u64))?;
        let (num, den) = commutator_bound_terms(&ops, &f, bound);
        let floor = 1e-8 * den.iter().sum::<f64>() / den.len() as f64;
        for (a, b) in num.iter().zip(&den) {
            fit.points += 1;
            if *b <= floor {
                fit.skipped += 1;
                continue;
            }
            let r = a / b;
            if s < calibration {
                fit.constant = fit.constant.max(r);
            } else {
                held.push(r);
            }
        }
    }
    fit.held_out_max = held.iter().copied().fold(0.0, f64::max);
    fit.held_out_violations = held.iter().filter(|r| **r > fit.constant * (1.0 + 1e-12)).count();
    Ok(fit)
}
