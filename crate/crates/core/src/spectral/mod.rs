//! Periodic lattices on T² and T⁶, their Fourier transforms, derivatives and norms.

mod fft;
mod field2;
mod field6;
mod snapshot;
mod sum;

pub use fft::{dealias_keep, derivative_wavenumber, half_weight, wavenumber, RealFftNd};
pub use field2::{grid_coord, SpectralField2D, MEAN_ZERO_TOL};
pub use field6::{inner6, norm_sq6, unravel6, GridField6D, Spectrum6D, DIM6};
pub use snapshot::{Snapshot, MAGIC};
pub use sum::{compensated_sum, CompensatedSum};
