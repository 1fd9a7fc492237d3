//! Real-input multidimensional FFT on uniform periodic lattices.
//!
//! Layout: row-major, last axis fastest. The forward transform is a
//! real-to-complex transform along the last axis (keeping `n/2 + 1` bins)
//! followed by complex transforms along every other axis. Coefficients are
//! normalised by `1 / n^d`, so that they equal the continuous Fourier
//! coefficients `(2π)^{-d} ∫ f(x) e^{-ik·x} dx` of a band-limited field.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub struct RealFftNd {
    n: usize,
    dims: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for RealFftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RealFftNd")
            .field("n", &self.n)
            .field("dims", &self.dims)
            .finish()
    }
}

type PlanKey = (usize, usize);

fn plan_cache() -> &'static Mutex<HashMap<PlanKey, Arc<RealFftNd>>> {
    static CACHE: OnceLock<Mutex<HashMap<PlanKey, Arc<RealFftNd>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl RealFftNd {
    /// Shared plan for an `n^dims` lattice. `n` must be even and at least 4.
    pub fn cached(n: usize, dims: usize) -> Result<Arc<Self>> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::UnsupportedGrid {
                n,
                reason: "grid size must be even and at least 4",
            });
        }
        let mut cache = plan_cache().lock().expect("fft plan cache poisoned");
        if let Some(plan) = cache.get(&(n, dims)) {
            return Ok(plan.clone());
        }
        let plan = Arc::new(Self::new(n, dims));
        cache.insert((n, dims), plan.clone());
        Ok(plan)
    }

    fn new(n: usize, dims: usize) -> Self {
        let mut real = RealFftPlanner::<f64>::new();
        let mut cplx = FftPlanner::<f64>::new();
        Self {
            n,
            dims,
            r2c: real.plan_fft_forward(n),
            c2r: real.plan_fft_inverse(n),
            fwd: cplx.plan_fft_forward(n),
            inv: cplx.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of stored bins along the last axis.
    pub fn half(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn real_len(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    pub fn spectral_len(&self) -> usize {
        self.n.pow(self.dims as u32 - 1) * self.half()
    }

    /// Stride of a complex axis: product of the extents of all later axes.
    fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dims - 2 - axis) as u32) * self.half()
    }

    /// First complex axis whose whole block fits in cache; axes from here on are
    /// transformed chunk by chunk, earlier ones on gathered column tiles.
    fn split(&self) -> usize {
        (0..self.dims - 1)
            .find(|&a| self.n * self.stride(a) <= CACHE_BUDGET)
            .unwrap_or(self.dims - 1)
    }

    /// Length of the contiguous chunks holding the inner axes.
    fn chunk_len(&self) -> usize {
        let split = self.split();
        if split < self.dims - 1 {
            self.n * self.stride(split)
        } else {
            self.half()
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.real_len(), "grid length mismatch");
        let n = self.n;
        let m = self.half();
        let split = self.split();
        let chunk = self.chunk_len();
        let mut out = vec![Complex64::new(0.0, 0.0); self.spectral_len()];
        let mut work = PassBuffers::new(&*self.fwd);
        for (src, dst) in values.chunks_exact(chunk / m * n).zip(out.chunks_exact_mut(chunk)) {
            self.rows_forward(src, dst, &mut work);
            for axis in (split..self.dims - 1).rev() {
                pass_on(dst, n, self.stride(axis), &*self.fwd, &mut work);
            }
        }
        self.outer_passes(&mut out, split, &*self.fwd);
        let scale = 1.0 / self.real_len() as f64;
        for c in &mut out {
            *c *= scale;
        }
        out
    }

    /// Forward transform applying the complex passes one full sweep at a time in
    /// the given axis order (a permutation of `0..dims-1`).
    pub fn forward_with_axis_order(&self, values: &[f64], order: &[usize]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.real_len(), "grid length mismatch");
        let n = self.n;
        let m = self.half();
        let mut out = vec![Complex64::new(0.0, 0.0); self.spectral_len()];
        let mut input = vec![0.0; n];
        let mut scratch = self.r2c.make_scratch_vec();
        for (row, dst) in values.chunks_exact(n).zip(out.chunks_exact_mut(m)) {
            input.copy_from_slice(row);
            self.r2c.process_with_scratch(&mut input, dst, &mut scratch).expect("r2c length mismatch");
        }
        let mut work = PassBuffers::new(&*self.fwd);
        for &axis in order {
            pass_on(&mut out, n, self.stride(axis), &*self.fwd, &mut work);
        }
        let scale = 1.0 / self.real_len() as f64;
        for c in &mut out {
            *c *= scale;
        }
        out
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.spectral_len(), "spectrum length mismatch");
        let n = self.n;
        let m = self.half();
        let split = self.split();
        let chunk = self.chunk_len();
        let mut work = coeffs.to_vec();
        self.outer_passes(&mut work, split, &*self.inv);
        let mut out = vec![0.0; self.real_len()];
        let mut bufs = PassBuffers::new(&*self.inv);
        for (src, dst) in work.chunks_exact_mut(chunk).zip(out.chunks_exact_mut(chunk / m * n)) {
            for axis in split..self.dims - 1 {
                pass_on(src, n, self.stride(axis), &*self.inv, &mut bufs);
            }
            self.rows_inverse(src, dst, &mut bufs);
        }
        out
    }

    /// Real-to-complex transforms of consecutive rows. Rows are packed in pairs
    /// as `a + ib` and sent through one batched complex transform.
    fn rows_forward(&self, src: &[f64], dst: &mut [Complex64], bufs: &mut PassBuffers) {
        let n = self.n;
        let m = self.half();
        let pairs = src.len() / (2 * n);
        bufs.packed.resize(pairs * n, Complex64::new(0.0, 0.0));
        for (z, rows) in bufs.packed.chunks_exact_mut(n).zip(src.chunks_exact(2 * n)) {
            let (a, b) = rows.split_at(n);
            for ((z, &a), &b) in z.iter_mut().zip(a).zip(b) {
                *z = Complex64::new(a, b);
            }
        }
        self.fwd.process_with_scratch(&mut bufs.packed, &mut bufs.scratch);
        for (z, bins) in bufs.packed.chunks_exact(n).zip(dst.chunks_exact_mut(2 * m)) {
            let (a, b) = bins.split_at_mut(m);
            for k in 0..m {
                let zk = z[k];
                let zc = z[(n - k) % n].conj();
                a[k] = 0.5 * (zk + zc);
                b[k] = Complex64::new(0.5 * (zk.im - zc.im), -0.5 * (zk.re - zc.re));
            }
        }
        if !src.len().is_multiple_of(2 * n) {
            let mut input = src[src.len() - n..].to_vec();
            let mut scratch = self.r2c.make_scratch_vec();
            let last = dst.len() - m;
            self.r2c.process_with_scratch(&mut input, &mut dst[last..], &mut scratch).expect("r2c length mismatch");
        }
    }

    /// Inverse of [`Self::rows_forward`]. The DC and Nyquist bins are taken as real.
    fn rows_inverse(&self, src: &mut [Complex64], dst: &mut [f64], bufs: &mut PassBuffers) {
        let n = self.n;
        let m = self.half();
        for bins in src.chunks_exact_mut(m) {
            bins[0].im = 0.0;
            bins[m - 1].im = 0.0;
        }
        let pairs = dst.len() / (2 * n);
        bufs.packed.resize(pairs * n, Complex64::new(0.0, 0.0));
        let i = Complex64::new(0.0, 1.0);
        for (z, bins) in bufs.packed.chunks_exact_mut(n).zip(src.chunks_exact(2 * m)) {
            let (a, b) = bins.split_at(m);
            for k in 0..m {
                z[k] = a[k] + i * b[k];
            }
            for k in m..n {
                z[k] = a[n - k].conj() + i * b[n - k].conj();
            }
        }
        self.inv.process_with_scratch(&mut bufs.packed, &mut bufs.scratch);
        for (z, rows) in bufs.packed.chunks_exact(n).zip(dst.chunks_exact_mut(2 * n)) {
            let (a, b) = rows.split_at_mut(n);
            for ((z, a), b) in z.iter().zip(a).zip(b) {
                *a = z.re;
                *b = z.im;
            }
        }
        if !dst.len().is_multiple_of(2 * n) {
            let mut scratch = self.c2r.make_scratch_vec();
            let last = src.len() - m;
            let tail = dst.len() - n;
            self.c2r.process_with_scratch(&mut src[last..], &mut dst[tail..], &mut scratch).expect("c2r length mismatch");
        }
    }

    /// Transform along axes `0..split`: columns of the chunked layout are
    /// gathered into a small contiguous tile, transformed there and scattered back.
    fn outer_passes(&self, data: &mut [Complex64], split: usize, fft: &dyn Fft<f64>) {
        if split == 0 {
            return;
        }
        let n = self.n;
        let chunk = self.chunk_len();
        let count = data.len() / chunk;
        let width = (CACHE_BUDGET / count).clamp(1, chunk);
        let mut tile = vec![Complex64::new(0.0, 0.0); count * width];
        let mut work = PassBuffers::new(fft);
        let mut start = 0;
        while start < chunk {
            let w = width.min(chunk - start);
            let t = &mut tile[..count * w];
            for (o, dst) in t.chunks_exact_mut(w).enumerate() {
                dst.copy_from_slice(&data[o * chunk + start..o * chunk + start + w]);
            }
            for axis in 0..split {
                pass_on(t, n, n.pow((split - 1 - axis) as u32) * w, fft, &mut work);
            }
            for (o, src) in t.chunks_exact(w).enumerate() {
                data[o * chunk + start..o * chunk + start + w].copy_from_slice(src);
            }
            start += w;
        }
    }
}

/// Complex entries that comfortably fit in a per-core cache.
const CACHE_BUDGET: usize = 1 << 14;

struct PassBuffers {
    lines: Vec<Complex64>,
    packed: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PassBuffers {
    fn new(fft: &dyn Fft<f64>) -> Self {
        Self {
            lines: Vec::new(),
            packed: Vec::new(),
            scratch: vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
        }
    }
}

/// In-place FFT of length `n` along the axis with the given stride of a
/// contiguous array. Lines are gathered in tiles of consecutive columns.
fn pass_on(data: &mut [Complex64], n: usize, stride: usize, fft: &dyn Fft<f64>, bufs: &mut PassBuffers) {
    const TILE: usize = 32;
    let block = n * stride;
    let tile_width = TILE.min(stride);
    bufs.lines.resize(tile_width * n, Complex64::new(0.0, 0.0));
    for chunk in data.chunks_exact_mut(block) {
        let mut start = 0;
        while start < stride {
            let width = tile_width.min(stride - start);
            let tile = &mut bufs.lines[..width * n];
            for (k, row) in chunk[start..].chunks(stride).enumerate() {
                for (line, &v) in tile.chunks_exact_mut(n).zip(&row[..width]) {
                    line[k] = v;
                }
            }
            fft.process_with_scratch(tile, &mut bufs.scratch);
            for (k, row) in chunk[start..].chunks_mut(stride).enumerate() {
                for (line, v) in tile.chunks_exact(n).zip(&mut row[..width]) {
                    *v = line[k];
                }
            }
            start += width;
        }
    }
}

/// Signed wave number of FFT bin `i` on an `n`-point axis. The Nyquist bin maps to `+n/2`.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Wave number used for odd derivatives: zero on the Nyquist bin, whose sign is ambiguous.
#[inline]
pub fn derivative_wavenumber(i: usize, n: usize) -> f64 {
    if 2 * i == n {
        0.0
    } else {
        wavenumber(i, n) as f64
    }
}

/// Multiplicity of a last-axis bin in the half spectrum when summing quadratic quantities.
#[inline]
pub fn half_weight(j: usize, n: usize) -> f64 {
    if j == 0 || 2 * j == n {
        1.0
    } else {
        2.0
    }
}

/// Two-thirds rule: keep `|k| < n/3`.
#[inline]
pub fn dealias_keep(k: i64, n: usize) -> bool {
    3 * k.unsigned_abs() < n as u64
}
