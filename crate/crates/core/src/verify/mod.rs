//! Exact checks of the coefficient exponents, Hardy–Poincaré constants and
//! empirical functional ratios.

pub mod exponents;
pub mod hardy;
pub mod identities;
pub mod lp;
pub mod ratios;

pub use exponents::{
    check_exponent_system, lp_relaxation, minimize_exponents, repair, CheckReport, Constraint,
    ConstraintStatus, ExponentAssignment, Minimization, Objective, Var, CONSTRAINTS, VARS,
};
pub use hardy::{
    default_omega_sq, default_omega_zeros, hardy_poincare_1d, hardy_poincare_2d, unweighted_poincare_constant, Hardy1dReport,
    Hardy2dReport,
};
pub use identities::{
    commutator_bound_terms, fit_commutator_bound, identity_residuals, identity_suite, pointwise_bound_check, CommutatorBound,
    CommutatorFit, IdentityReport, IdentityResidual, PointwiseBoundReport, IDENTITIES, IDENTITY_TOL,
};
pub use ratios::{
    x_only_guard, x_only_ratio, mean_zero_sample, phi_h1_ratio, phi_h1_ratio_bracket, phi_psi_ratio, psi_controls_phi_ratio,
    pure_y_phi_psi, XOnlyReport, PhiPsiReport, RatioBracket, X_ONLY_GUARD,
};
