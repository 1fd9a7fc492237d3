//! Transport and commutator operators of the tilted two-point equation.
//!
//! Every operator is a first-order differential operator in `x̃` whose
//! coefficients are products of the trig factors. Operators act on grids:
//! spectral derivatives, then pointwise multiplication on the lattice. No
//! truncation is applied, so the result is exact whenever the product is
//! resolved by the lattice.

use rand_distr::{Distribution, StandardNormal};

use super::trig::{Trig, TrigTables};
use crate::error::Result;
use crate::rng::{stream_rng, STREAM_FIELD};
use crate::spectral::{GridField6D, Spectrum6D};

pub type VectorField = Vec<Vec<f64>>;

/// Spectral derivatives of one field, sharing a single forward transform.
pub struct Derivatives {
    spec: Spectrum6D,
}

impl Derivatives {
    pub fn new(f: &GridField6D) -> Self {
        Self { spec: f.forward() }
    }

    pub fn from_values(n: usize, f: &[f64]) -> Self {
        let g = GridField6D::from_values(n, f.to_vec()).expect("lattice length");
        Self::new(&g)
    }

    pub fn spectrum(&self) -> &Spectrum6D {
        &self.spec
    }

    /// `∂_axis f` on the grid.
    pub fn d(&self, axis: usize) -> Vec<f64> {
        self.spec.derivative(axis).inverse().into_values()
    }

    /// `∂_a ∂_b f` on the grid.
    pub fn dd(&self, a: usize, b: usize) -> Vec<f64> {
        self.spec.derivative(a).derivative(b).inverse().into_values()
    }

    /// `(∂₁, ∂₂, ∂₃, ∂₄) f` in `x̃`.
    pub fn grad_x(&self) -> VectorField {
        (0..4).map(|a| self.d(a)).collect()
    }

    /// `(∂_{ỹ₁}, ∂_{ỹ₂}) f`.
    pub fn grad_y(&self) -> VectorField {
        (4..6).map(|a| self.d(a)).collect()
    }

    /// `∇ₓ ∂_b f`.
    pub fn grad_x_of(&self, b: usize) -> VectorField {
        let s = self.spec.derivative(b);
        (0..4).map(|a| s.derivative(a).inverse().into_values()).collect()
    }

    pub fn laplacian_y(&self) -> Vec<f64> {
        self.spec
            .map_modes(|k, c| c * -((k[4] * k[4] + k[5] * k[5]) as f64))
            .inverse()
            .into_values()
    }

    pub fn laplacian_x(&self) -> Vec<f64> {
        self.spec
            .map_modes(|k, c| c * -((k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + k[3] * k[3]) as f64))
            .inverse()
            .into_values()
    }
}

/// Operators acting through `∇ₓ f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    /// `ũ·∇ₓ` with `ũ = (c₄s₂, c₃s₁, s₄c₂, s₃c₁)`
    UGrad,
    C1,
    S1,
    C2,
    S2,
    C3,
    /// `M₁∇ₓ`, `M₁ = diag(c₄, c₃, s₄, s₃)`
    M1,
    /// `M₂∇ₓ`, `M₂ = diag(s₃, s₄, s₃, s₄)`
    M2,
    /// `∇′ₓ = (∂₁, ∂₂)`
    GradPrime,
}

impl Op {
    pub fn components(self) -> usize {
        match self {
            Op::UGrad => 1,
            Op::M1 | Op::M2 => 4,
            _ => 2,
        }
    }

    /// Coefficient combination at one point; `g = (∂₁f, ∂₂f, ∂₃f, ∂₄f)`.
    #[inline]
    pub fn kernel(self, t: &Trig, g: [f64; 4], out: &mut [f64; 4]) {
        let Trig { s1, c1, s2, c2, s3, c3, s4, c4 } = *t;
        match self {
            Op::UGrad => {
                out[0] = c4 * s2 * g[0] + c3 * s1 * g[1] + s4 * c2 * g[2] + s3 * c1 * g[3];
            }
            Op::C1 => {
                out[0] = c4 * c2 * g[0] - s4 * s2 * g[2];
                out[1] = c3 * c1 * g[1] - s3 * s1 * g[3];
            }
            Op::S1 => {
                out[0] = c4 * s2 * g[0] + s4 * c2 * g[2];
                out[1] = c3 * s1 * g[1] + s3 * c1 * g[3];
            }
            Op::C2 => {
                out[0] = s3 * c1 * (s4 * c2 * g[0] + c4 * s2 * g[2])
                    + s4 * s2 * (s3 * s1 * g[1] - c3 * c1 * g[3]);
                out[1] = s3 * s1 * (s4 * s2 * g[0] - c4 * c2 * g[2])
                    + s4 * c2 * (s3 * c1 * g[1] + c3 * s1 * g[3]);
            }
            Op::S2 => {
                out[0] = s3 * c1 * (s4 * s2 * g[0] - c4 * c2 * g[2])
                    - s4 * c2 * (s3 * s1 * g[1] - c3 * c1 * g[3]);
                out[1] = s3 * s1 * (s4 * c2 * g[0] + c4 * s2 * g[2])
                    - s4 * s2 * (s3 * c1 * g[1] + c3 * s1 * g[3]);
            }
            Op::C3 => {
                out[0] = c3 * c1 * (s2 * s2 - c2 * c2) * g[0] - 2.0 * c4 * c1 * s1 * s2 * g[1];
                out[1] = c4 * (s1 * s1 - c1 * c1) * c2 * g[1] - 2.0 * c3 * c2 * s1 * s2 * g[0];
            }
            Op::M1 => *out = [c4 * g[0], c3 * g[1], s4 * g[2], s3 * g[3]],
            Op::M2 => *out = [s3 * g[0], s4 * g[1], s3 * g[2], s4 * g[3]],
            Op::GradPrime => {
                out[0] = g[0];
                out[1] = g[1];
            }
        }
    }
}

/// Operator application on a fixed lattice.
#[derive(Debug, Clone)]
pub struct TwoPointOps {
    tables: TrigTables,
}

impl TwoPointOps {
    pub fn new(n: usize) -> Self {
        Self { tables: TrigTables::new(n) }
    }

    pub fn n(&self) -> usize {
        self.tables.n()
    }

    pub fn tables(&self) -> &TrigTables {
        &self.tables
    }

    /// Apply `op` given the precomputed `∇ₓ f`.
    pub fn apply_grad(&self, op: Op, grad: &[Vec<f64>]) -> VectorField {
        let k = op.components();
        let len = grad[0].len();
        let mut out = vec![vec![0.0; len]; k];
        let mut buf = [0.0; 4];
        self.tables.for_each_row(|start, row| {
            let end = start + row.len();
            let (g0, g1, g2, g3) = (&grad[0][start..end], &grad[1][start..end], &grad[2][start..end], &grad[3][start..end]);
            for (p, t) in row.iter().enumerate() {
                op.kernel(t, [g0[p], g1[p], g2[p], g3[p]], &mut buf);
                for (c, o) in out.iter_mut().enumerate() {
                    o[start + p] = buf[c];
                }
            }
        });
        out
    }

    pub fn apply(&self, op: Op, f: &[f64]) -> VectorField {
        let d = Derivatives::from_values(self.n(), f);
        self.apply_grad(op, &d.grad_x())
    }

    pub fn u_grad(&self, f: &[f64]) -> Vec<f64> {
        self.apply(Op::UGrad, f).pop().expect("one component")
    }

    /// Componentwise commutator `[A, ũ·∇ₓ]f = A(ũ·∇ₓf) − ũ·∇ₓ(Af)`.
    pub fn commutator_with_transport(&self, op: Op, f: &[f64]) -> VectorField {
        let a_of_uf = self.apply(op, &self.u_grad(f));
        let af = self.apply(op, f);
        a_of_uf
            .into_iter()
            .zip(af)
            .map(|(x, comp)| {
                let u = self.u_grad(&comp);
                x.iter().zip(&u).map(|(a, b)| a - b).collect()
            })
            .collect()
    }

    /// Multiply a grid pointwise by a function of the trig factors.
    pub fn multiply(&self, f: &[f64], w: impl Fn(&Trig) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.tables.for_each(|idx, t| out[idx] = w(t) * f[idx]);
        out
    }

    /// Coefficient Laplacian `(Δ_y A) f = Δ_y(Af) − 2 Σ_j ∂_{y_j}(A ∂_{y_j} f) + A Δ_y f`.
    pub fn coefficient_laplacian_y(&self, op: Op, f: &[f64]) -> VectorField {
        let n = self.n();
        let df = Derivatives::from_values(n, f);
        let af = self.apply_grad(op, &df.grad_x());
        let mut out: VectorField = af
            .iter()
            .map(|c| Derivatives::from_values(n, c).laplacian_y())
            .collect();
        for j in 4..6 {
            let dj = df.d(j);
            let a_dj = self.apply(op, &dj);
            for (o, comp) in out.iter_mut().zip(&a_dj) {
                let d = Derivatives::from_values(n, comp).d(j);
                for (x, y) in o.iter_mut().zip(&d) {
                    *x -= 2.0 * y;
                }
            }
        }
        let lap = df.laplacian_y();
        let a_lap = self.apply(op, &lap);
        for (o, comp) in out.iter_mut().zip(&a_lap) {
            for (x, y) in o.iter_mut().zip(comp) {
                *x += y;
            }
        }
        out
    }

    /// `(∂_{ỹ_j} A) f = ∂_{ỹ_j}(Af) − A ∂_{ỹ_j} f` for `j ∈ {0, 1}` (axes 4, 5).
    pub fn coefficient_derivative_y(&self, op: Op, j: usize, f: &[f64]) -> VectorField {
        let n = self.n();
        let axis = 4 + j;
        let df = Derivatives::from_values(n, f);
        let af = self.apply_grad(op, &df.grad_x());
        let a_d = self.apply(op, &df.d(axis));
        af.iter()
            .zip(&a_d)
            .map(|(c, ad)| {
                let d = Derivatives::from_values(n, c).d(axis);
                d.iter().zip(ad).map(|(a, b)| a - b).collect()
            })
            .collect()
    }

    /// Remainder `R₂f = (c₄c₂(C₁f)₂ + c₃s₁(S₁f)₁, c₃c₁(C₁f)₁ + c₄s₂(S₁f)₂)` of `[C₁, ũ·∇]f − C₂f`.
    pub fn r2(&self, f: &[f64]) -> VectorField {
        let g = Derivatives::from_values(self.n(), f).grad_x();
        self.r2_from(&self.apply_grad(Op::C1, &g), &self.apply_grad(Op::S1, &g))
    }

    /// [`Self::r2`] from precomputed `C₁f` and `S₁f`.
    pub fn r2_from(&self, c1: &[Vec<f64>], s1: &[Vec<f64>]) -> VectorField {
        let len = c1[0].len();
        let mut out = vec![vec![0.0; len]; 2];
        self.tables.for_each(|i, t| {
            out[0][i] = t.c4 * t.c2 * c1[1][i] + t.c3 * t.s1 * s1[0][i];
            out[1][i] = t.c3 * t.c1 * c1[0][i] + t.c4 * t.s2 * s1[1][i];
        });
        out
    }

    /// Remainder `Q₂f = (−c₃s₁(C₁f)₁ + c₄s₂(C₁f)₂, c₃s₁(C₁f)₁ − c₄s₂(C₁f)₂)` of
    /// `[S₁, ũ·∇]f − (1, −1)ᵀ(S₂f)₁`.
    pub fn q2(&self, f: &[f64]) -> VectorField {
        self.q2_from(&self.apply(Op::C1, f))
    }

    /// [`Self::q2`] from a precomputed `C₁f`.
    pub fn q2_from(&self, c1: &[Vec<f64>]) -> VectorField {
        let len = c1[0].len();
        let mut out = vec![vec![0.0; len]; 2];
        self.tables.for_each(|i, t| {
            let v = -t.c3 * t.s1 * c1[0][i] + t.c4 * t.s2 * c1[1][i];
            out[0][i] = v;
            out[1][i] = -v;
        });
        out
    }
}

/// Random real field with independent Gaussian modes on `|k_i| ≤ kmax` in every
/// direction, scaled to unit L² norm. With `x_mean_zero`, all modes with
/// `k_x̃ = 0` are removed.
pub fn random_field6(n: usize, kmax: i64, x_mean_zero: bool, seed: u64) -> Result<GridField6D> {
    let mut rng = stream_rng(seed, STREAM_FIELD);
    let mut noise = GridField6D::zeros(n)?;
    for v in noise.values_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
    let mut spec = noise.forward();
    spec.map_modes_in_place(|k, c| {
        let in_band = k.iter().all(|&ki| ki.abs() <= kmax);
        let x_zero = k[..4].iter().all(|&ki| ki == 0);
        if in_band && !(x_mean_zero && x_zero) {
            c
        } else {
            c * 0.0
        }
    });
    let mut f = spec.inverse();
    let norm = f.l2_norm();
    for v in f.values_mut() {
        *v /= norm;
    }
    Ok(f)
}
