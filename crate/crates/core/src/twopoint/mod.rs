//! The tilted two-point equation on T⁴ × T².

mod coefficients;
mod functionals;
mod ops;
mod solver;
mod trig;

pub use coefficients::{Coefficient, CoefficientSet};
pub use functionals::{dissipation_psi, lyapunov_phi, weighted_h1_norm, Diffusivities, FunctionalValue, LogSum, Term};
pub use ops::{random_field6, Derivatives, Op, TwoPointOps, VectorField};
pub use solver::{
    build_initial, two_point_cfl_limit, two_point_solve, two_point_step, uniform_density, TwoPointConfig, TwoPointSeries,
    TwoPointSolver, TwoPointState, MAX_TWO_POINT_N,
};
pub use trig::{Trig, TrigTables};
