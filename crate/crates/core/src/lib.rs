//! Constrained Hamiltonian mechanics: Poisson and Dirac brackets, First and
//! Second Class classification, reduced-bracket checks, constrained and gauge
//! flows, and quantum evolution on the circle.
//!
//! Phase-space coordinates are always ordered `(q_1..q_N, p_1..p_N)`.

pub mod bracket;
pub mod chart;
pub mod constraint;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod linalg;
pub mod models;
pub mod quantum;
pub mod sampling;
pub mod verify;

pub use bracket::{gradient_consistency_check, poisson_bracket, GradientReport};
pub use chart::{ChartSpec, DomainExclusion, PhaseSpacePoint};
pub use constraint::{
    classify, constraint_matrix, dirac_bracket, fp_determinant, fp_jacobian_check, maskawa_nakajima_check,
    observable_check, ClassificationResult, ConstraintClass, ConstraintSet, DegeneracyTest, DiracStructure,
    SurfaceParametrization, TimeDrive,
};
pub use dual::Dual;
pub use dynamics::{
    constraint_drift, evolve, gauge_closed_form_klauder, multiplier_from_gauge, FlowKind, FlowSpec,
    IntegratorConfig, Multiplier, Projection, Trajectory,
};
pub use error::{Error, Result};
pub use field::{GradientKind, ScalarField};
pub use quantum::{CircleState, SpectrumTable};
