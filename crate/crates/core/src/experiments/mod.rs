//! Rate fitting and the numerical experiments built on the solvers.

pub mod correlation;
pub mod fit;
pub mod meta;
pub mod mixing;
pub mod spectrum;
pub mod sweep;

pub use correlation::{correlation_decay_experiment, CorrelationConfig, CorrelationResult};
pub use fit::{default_window, fit_decay, write_fits_csv, DecayFit};
pub use meta::{git_describe, RunMeta};
pub use mixing::{
    mixing_experiment, mixing_experiment_with, realization_seeds, relative_difference, run_realizations, steady_control,
    AveragedSeries, MixingConfig, MixingResult, SteadyControl,
};
pub use spectrum::{annulus_sums, batchelor_spectrum, AnnulusSpectrum, Forcing, SpectrumConfig};
pub use sweep::{dissipation_sweep, late_window, mu_window, SweepConfig, SweepEntry, SweepResult};
