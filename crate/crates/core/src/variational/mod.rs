//! The Lagrange function `h = f + λg` of the isoperimetric problem and the
//! objects built from it: Euler–Lagrange residuals, normality, the
//! Weierstrass excess, the second variation, Jacobi fields along circles and
//! the aggregated sufficiency report.

mod excess;
mod hestenes;
mod jacobi;
mod lagrange;
mod second;

pub use excess::{hdotdot_form, hdotdot_form_fd, increment_j, weierstrass_e, weierstrass_e_closed};
pub use hestenes::{fmt12, hestenes_report, ConditionOutcome, HestenesConfig, HestenesReport};
pub use jacobi::{
    conjugate_bracket, conjugate_determinant, find_conjugate_points, jacobi_coefficients,
    jacobi_residual, JacobiCoefficients, JacobiSolution, CONJUGATE_EPSILON, CONJUGATE_SCAN_NODES,
};
pub use lagrange::{
    el_residual, fit_multiplier, multiplier_for_circle, normality, AngleConvention, ElResidual,
    LagrangeContext, Normality,
};
pub use second::{
    second_variation, variation_basis, variation_constraint, ConstraintMode, SecondVariationForm,
    Variation, VariationSampler, MIN_NORMAL_FRACTION, TANGENT_DEGREE, VARIATION_DEGREE,
};
