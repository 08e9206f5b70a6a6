//! Best-constant estimation.

pub mod ascent;
pub mod comparability;
pub mod harmonic;
pub mod kernel;
pub mod projection;
pub mod ratio;
pub mod riesz;

pub use comparability::{comparability_bounds, delta_alpha_report};
pub use harmonic::{dirichlet_solve, rh_ratio, rh_ratio_of, DirichletMode, HarmonicSolve};
pub use kernel::{gaffney_report, kernel_bound_report, KernelBound, DEFAULT_C_GRID};
pub use projection::pi_p_check;
pub use riesz::{
    duality_report, gfunc_report, gp_report, reverse_riesz_constant, riesz_constant, GradientForm, Strategy,
};
