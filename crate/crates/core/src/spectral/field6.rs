use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::fft::{dealias_keep, derivative_wavenumber, half_weight, wavenumber, RealFftNd};
use super::field2::grid_coord;
use super::sum::{compensated_sum, CompensatedSum};
use crate::error::{Error, Result};

pub const DIM6: usize = 6;

/// Real samples on the uniform lattice of T⁶, axis order `(x̃₁, x̃₂, x̃₃, x̃₄, ỹ₁, ỹ₂)`,
/// row-major with `ỹ₂` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField6D {
    n: usize,
    values: Vec<f64>,
}

/// Half spectrum of a [`GridField6D`], normalised by `n⁻⁶`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum6D {
    n: usize,
    coeffs: Vec<Complex64>,
}

/// Split a flat lattice index into its six axis indices.
#[inline]
pub fn unravel6(mut idx: usize, n: usize) -> [usize; 6] {
    let mut out = [0; 6];
    for a in (0..6).rev() {
        out[a] = idx % n;
        idx /= n;
    }
    out
}

impl GridField6D {
    pub fn zeros(n: usize) -> Result<Self> {
        let plan = RealFftNd::cached(n, DIM6)?;
        Ok(Self {
            n,
            values: vec![0.0; plan.real_len()],
        })
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        let plan = RealFftNd::cached(n, DIM6)?;
        if values.len() != plan.real_len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                plan.real_len(),
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(&[f64; 6]) -> f64) -> Result<Self> {
        let mut field = Self::zeros(n)?;
        let coords: Vec<f64> = (0..n).map(|i| grid_coord(i, n)).collect();
        for (idx, v) in field.values.iter_mut().enumerate() {
            let ix = unravel6(idx, n);
            let x = ix.map(|i| coords[i]);
            *v = f(&x);
        }
        Ok(field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn forward(&self) -> Spectrum6D {
        let plan = RealFftNd::cached(self.n, DIM6).expect("valid grid");
        Spectrum6D {
            n: self.n,
            coeffs: plan.forward(&self.values),
        }
    }

    /// `⟨f, g⟩ = ∫ f g` by lattice quadrature.
    pub fn inner(&self, other: &Self) -> f64 {
        inner6(&self.values, &other.values)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Average over `x̃` for every `ỹ` lattice point (length `n²`).
    pub fn x_mean(&self) -> Vec<f64> {
        let ny = self.n * self.n;
        let mut acc = vec![CompensatedSum::new(); ny];
        for chunk in self.values.chunks_exact(ny) {
            for (a, &v) in acc.iter_mut().zip(chunk) {
                a.add(v);
            }
        }
        let nx = (self.values.len() / ny) as f64;
        acc.iter().map(|a| a.value() / nx).collect()
    }

    /// Subtract the `x̃`-mean at every `ỹ`.
    pub fn remove_x_mean(&mut self) {
        let ny = self.n * self.n;
        let mean = self.x_mean();
        for chunk in self.values.chunks_exact_mut(ny) {
            for (v, m) in chunk.iter_mut().zip(&mean) {
                *v -= m;
            }
        }
    }
}

/// Lattice quadrature of `∫_{T⁶} a b`.
pub fn inner6(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let vol = (2.0 * PI).powi(6) / a.len() as f64;
    vol * compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Squared L² norm of a vector field given by its component grids.
pub fn norm_sq6(components: &[&[f64]]) -> f64 {
    components.iter().map(|c| inner6(c, c)).sum()
}

impl Spectrum6D {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Wrap a half spectrum produced by [`RealFftNd::forward`] on `n⁶` points.
    pub fn from_coeffs(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = n.pow(5) * (n / 2 + 1);
        if coeffs.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "half spectrum length {} does not match n = {n}",
                coeffs.len()
            )));
        }
        Ok(Self { n, coeffs })
    }

    pub fn inverse(&self) -> GridField6D {
        let plan = RealFftNd::cached(self.n, DIM6).expect("valid grid");
        GridField6D {
            n: self.n,
            values: plan.inverse(&self.coeffs),
        }
    }

    /// Apply `f(k, c)` to every stored coefficient, `k` the signed wave vector.
    pub fn map_modes(&self, f: impl FnMut(&[i64; 6], Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        out.map_modes_in_place(f);
        out
    }

    pub fn map_modes_in_place(&mut self, mut f: impl FnMut(&[i64; 6], Complex64) -> Complex64) {
        let n = self.n;
        let m = n / 2 + 1;
        for (row, chunk) in self.coeffs.chunks_exact_mut(m).enumerate() {
            let mut r = row;
            let mut k = [0i64; 6];
            for a in (0..5).rev() {
                k[a] = wavenumber(r % n, n);
                r /= n;
            }
            for (j, c) in chunk.iter_mut().enumerate() {
                k[5] = j as i64;
                *c = f(&k, *c);
            }
        }
    }

    /// Multiply by `i k_axis`; the Nyquist bin is zeroed.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < DIM6);
        let n = self.n;
        let m = n / 2 + 1;
        let mut out = self.clone();
        if axis == 5 {
            let factors: Vec<Complex64> = (0..m).map(|j| Complex64::new(0.0, derivative_wavenumber(j, n))).collect();
            for row in out.coeffs.chunks_exact_mut(m) {
                row.iter_mut().zip(&factors).for_each(|(c, f)| *c *= f);
            }
        } else {
            let stride = n.pow((4 - axis) as u32) * m;
            for (b, chunk) in out.coeffs.chunks_exact_mut(stride).enumerate() {
                let k = derivative_wavenumber(b % n, n);
                if k == 0.0 {
                    chunk.fill(Complex64::new(0.0, 0.0));
                } else {
                    chunk.iter_mut().for_each(|c| *c = Complex64::new(-k * c.im, k * c.re));
                }
            }
        }
        out
    }

    /// Two-thirds truncation in every direction.
    pub fn dealias(&mut self) {
        let n = self.n;
        self.map_modes_in_place(|k, c| {
            if k.iter().all(|&ki| dealias_keep(ki, n)) {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
    }

    /// `(2π)⁶ Σ_k w(k) |f̂(k)|²`.
    pub fn weighted_energy(&self, w: impl Fn(&[i64; 6]) -> f64) -> f64 {
        let n = self.n;
        let m = n / 2 + 1;
        let mut acc = CompensatedSum::new();
        let mut k = [0i64; 6];
        for (row, chunk) in self.coeffs.chunks_exact(m).enumerate() {
            let mut r = row;
            for a in (0..5).rev() {
                k[a] = wavenumber(r % n, n);
                r /= n;
            }
            for (j, c) in chunk.iter().enumerate() {
                k[5] = j as i64;
                acc.add(half_weight(j, n) * w(&k) * c.norm_sqr());
            }
        }
        (2.0 * PI).powi(6) * acc.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_product_of_sines() {
        let n = 8;
        let f = GridField6D::from_fn(n, |x| x[1].sin() * (2.0 * x[4]).cos()).unwrap();
        let s = f.forward();
        let d1 = s.derivative(1).inverse();
        let d4 = s.derivative(4).inverse();
        let w1 = GridField6D::from_fn(n, |x| x[1].cos() * (2.0 * x[4]).cos()).unwrap();
        let w4 = GridField6D::from_fn(n, |x| -2.0 * x[1].sin() * (2.0 * x[4]).sin()).unwrap();
        for (a, b) in d1.values().iter().zip(w1.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        for (a, b) in d4.values().iter().zip(w4.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn parseval_6d() {
        let n = 6;
        let f = GridField6D::from_fn(n, |x| x[0].sin() + (x[5] + x[2]).cos() * 0.5).unwrap();
        let e = f.forward().weighted_energy(|_| 1.0);
        let q = f.inner(&f);
        assert!((e - q).abs() < 1e-12 * q);
    }

    #[test]
    fn x_mean_removal() {
        let n = 6;
        let mut f = GridField6D::from_fn(n, |x| 1.0 + x[4].sin() + x[0].cos()).unwrap();
        f.remove_x_mean();
        assert!(f.x_mean().iter().all(|m| m.abs() < 1e-14));
        let want = GridField6D::from_fn(n, |x| x[0].cos()).unwrap();
        for (a, b) in f.values().iter().zip(want.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
