use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use rustfft::num_complex::Complex64;

use super::fft::{dealias_keep, derivative_wavenumber, half_weight, wavenumber, RealFftNd};
use super::sum::CompensatedSum;
use crate::error::{Error, Result};

/// Tolerance on `|f̂(0)| / ‖f‖` below which a field counts as mean-zero.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

/// A real scalar field on T² stored as its half spectrum.
///
/// Coefficients follow `f̂(k) = (2π)^{-2} ∫ f(x) e^{-ik·x} dx`, `k ∈ Z²`.
/// Storage is `n × (n/2 + 1)`, indexed `[i1 * (n/2+1) + i2]` where `i1` is the
/// FFT bin along `x₁` and `i2 ≥ 0` the bin along `x₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField2D {
    n: usize,
    coeffs: Vec<Complex64>,
}

/// Grid coordinate `2π i / n`.
#[inline]
pub fn grid_coord(i: usize, n: usize) -> f64 {
    2.0 * PI * i as f64 / n as f64
}

impl SpectralField2D {
    pub fn zeros(n: usize) -> Result<Self> {
        let plan = RealFftNd::cached(n, 2)?;
        Ok(Self {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); plan.spectral_len()],
        })
    }

    /// Transform grid samples (row-major, `x₁` slow) into coefficients.
    pub fn from_grid(n: usize, values: &[f64]) -> Result<Self> {
        let plan = RealFftNd::cached(n, 2)?;
        if values.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "expected {} grid values, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(Self {
            n,
            coeffs: plan.forward(values),
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(grid_coord(i, n), grid_coord(j, n)));
            }
        }
        Self::from_grid(n, &values)
    }

    /// Build from raw half-spectrum coefficients.
    pub fn from_coeffs(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let plan = RealFftNd::cached(n, 2)?;
        if coeffs.len() != plan.spectral_len() {
            return Err(Error::InvalidParameter("half-spectrum length mismatch".into()));
        }
        let mut field = Self { n, coeffs };
        field.enforce_hermitian();
        Ok(field)
    }

    pub fn to_grid(&self) -> Vec<f64> {
        RealFftNd::cached(self.n, 2)
            .expect("plan exists for a constructed field")
            .inverse(&self.coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn half(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at wave vector `(k1, k2)`; zero outside the resolved band.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        let n = self.n as i64;
        let h = n / 2;
        if k1.abs() > h || k2.abs() > h {
            return Complex64::new(0.0, 0.0);
        }
        let (k1, k2, conj) = if k2 < 0 { (-k1, -k2, true) } else { (k1, k2, false) };
        let i1 = k1.rem_euclid(n) as usize;
        let c = self.coeffs[i1 * self.half() + k2 as usize];
        if conj {
            c.conj()
        } else {
            c
        }
    }

    /// Make the `k₂ = 0` and Nyquist columns consistent with a real field.
    fn enforce_hermitian(&mut self) {
        let n = self.n;
        let m = self.half();
        for j in [0, n / 2] {
            for i in 0..=n / 2 {
                let ip = (n - i) % n;
                let a = self.coeffs[i * m + j];
                let b = self.coeffs[ip * m + j];
                let avg = 0.5 * (a + b.conj());
                self.coeffs[i * m + j] = avg;
                self.coeffs[ip * m + j] = avg.conj();
            }
        }
    }

    /// Apply `f(k1, k2, c)` to every stored coefficient.
    pub fn map_modes(&self, f: impl Fn(i64, i64, Complex64) -> Complex64) -> Self {
        let n = self.n;
        let m = self.half();
        let mut out = self.clone();
        for i in 0..n {
            let k1 = wavenumber(i, n);
            for j in 0..m {
                let idx = i * m + j;
                out.coeffs[idx] = f(k1, j as i64, self.coeffs[idx]);
            }
        }
        out
    }

    /// Sum of `w(k) |f̂(k)|²` over the full spectrum.
    fn weighted_energy(&self, w: impl Fn(i64, i64) -> f64) -> f64 {
        let n = self.n;
        let m = self.half();
        let mut acc = CompensatedSum::new();
        for i in 0..n {
            let k1 = wavenumber(i, n);
            for j in 0..m {
                let c = self.coeffs[i * m + j];
                acc.add(half_weight(j, n) * w(k1, j as i64) * c.norm_sqr());
            }
        }
        acc.value()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn l2_norm(&self) -> f64 {
        (4.0 * PI * PI * self.weighted_energy(|_, _| 1.0)).sqrt()
    }

    /// Homogeneous Sobolev norm `(Σ_{k≠0} |k|^{2s} (2π)² |f̂(k)|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        if !(-4.0..=4.0).contains(&s) {
            return Err(Error::SobolevOrder(s));
        }
        if s < 0.0 {
            let l2 = self.l2_norm();
            let mean = self.mean().abs() * 2.0 * PI;
            if mean > MEAN_ZERO_TOL * l2 {
                return Err(Error::NonZeroMean { mean, l2 });
            }
        }
        let e = self.weighted_energy(|k1, k2| {
            if k1 == 0 && k2 == 0 {
                0.0
            } else {
                ((k1 * k1 + k2 * k2) as f64).powf(s)
            }
        });
        Ok((4.0 * PI * PI * e).sqrt())
    }

    /// `∂_{x_axis}` with `axis ∈ {0, 1}`.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < 2, "axis out of range");
        let n = self.n;
        let m = self.half();
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..m {
                let k = if axis == 0 {
                    derivative_wavenumber(i, n)
                } else {
                    derivative_wavenumber(j, n)
                };
                let idx = i * m + j;
                out.coeffs[idx] = Complex64::new(0.0, k) * self.coeffs[idx];
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        self.map_modes(|k1, k2, c| c * -((k1 * k1 + k2 * k2) as f64))
    }

    pub fn project_mean_zero(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// Two-thirds truncation.
    pub fn dealiased(&self) -> Self {
        let n = self.n;
        self.map_modes(|k1, k2, c| {
            if dealias_keep(k1, n) && dealias_keep(k2, n) {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_modes(|_, _, c| c * a)
    }
}

impl Add for &SpectralField2D {
    type Output = SpectralField2D;
    fn add(self, rhs: Self) -> SpectralField2D {
        assert_eq!(self.n, rhs.n);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        SpectralField2D { n: self.n, coeffs }
    }
}

impl Sub for &SpectralField2D {
    type Output = SpectralField2D;
    fn sub(self, rhs: Self) -> SpectralField2D {
        assert_eq!(self.n, rhs.n);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        SpectralField2D { n: self.n, coeffs }
    }
}

impl Mul<f64> for &SpectralField2D {
    type Output = SpectralField2D;
    fn mul(self, a: f64) -> SpectralField2D {
        self.scale(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_has_only_mean() {
        let f = SpectralField2D::from_fn(16, |_, _| 1.0).unwrap();
        assert_relative_eq!(f.coeff(0, 0).re, 1.0, epsilon = 1e-15);
        let rest: f64 = f.coeffs()[1..].iter().map(|c| c.norm()).sum();
        assert!(rest < 1e-14);
    }

    #[test]
    fn sine_pair() {
        let f = SpectralField2D::from_fn(16, |x, _| x.sin()).unwrap();
        let c = f.coeff(1, 0);
        assert!((c - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        let c = f.coeff(-1, 0);
        assert!((c - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn sobolev_of_sine() {
        let f = SpectralField2D::from_fn(32, |x, _| x.sin()).unwrap();
        let expected = PI * 2f64.sqrt();
        assert_relative_eq!(f.sobolev_norm(0.0).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(f.sobolev_norm(-1.0).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(f.l2_norm(), expected, max_relative = 1e-14);
        let z = SpectralField2D::zeros(32).unwrap();
        assert_eq!(z.sobolev_norm(-2.5).unwrap(), 0.0);
    }

    #[test]
    fn negative_order_needs_mean_zero() {
        let f = SpectralField2D::from_fn(16, |x, _| 1.0 + x.sin()).unwrap();
        assert!(matches!(f.sobolev_norm(-1.0), Err(Error::NonZeroMean { .. })));
        assert!(f.sobolev_norm(1.0).is_ok());
        assert!(matches!(f.sobolev_norm(4.5), Err(Error::SobolevOrder(_))));
    }

    #[test]
    fn derivatives_and_laplacian() {
        let n = 32;
        let f = SpectralField2D::from_fn(n, |x, _| x.sin()).unwrap();
        let d = f.derivative(0).to_grid();
        let want = SpectralField2D::from_fn(n, |x, _| x.cos()).unwrap().to_grid();
        assert!(max_diff(&d, &want) < 1e-13);

        let g = SpectralField2D::from_fn(n, |x, y| x.sin() * y.sin()).unwrap();
        let lap = g.laplacian().to_grid();
        let want: Vec<f64> = g.to_grid().iter().map(|v| -2.0 * v).collect();
        assert!(max_diff(&lap, &want) < 1e-13);
    }

    #[test]
    fn projection() {
        let f = SpectralField2D::from_fn(16, |x, _| 1.0 + x.sin()).unwrap();
        let p = f.project_mean_zero();
        let want = SpectralField2D::from_fn(16, |x, _| x.sin()).unwrap();
        assert!(max_diff(&p.to_grid(), &want.to_grid()) < 1e-14);
        assert_eq!(p.project_mean_zero(), p);
    }

    #[test]
    fn hermitian_enforced_on_raw_coeffs() {
        let n = 8;
        let mut raw = vec![Complex64::new(0.0, 0.0); n * (n / 2 + 1)];
        raw[5] = Complex64::new(1.0, 2.0); // (k1, k2) = (1, 0)
        let f = SpectralField2D::from_coeffs(n, raw).unwrap();
        assert_eq!(f.coeff(-1, 0), f.coeff(1, 0).conj());
    }
}
