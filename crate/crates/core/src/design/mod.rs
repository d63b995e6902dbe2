//! Query-rule design: the weight functional, the closed-form barrier
//! selection rule, its Lagrangian dual, stochastic ascent solvers, the inner
//! share-assignment programs, and the exact finite-support design programs.

mod ascent;
mod dual;
mod oracle;
mod selection;
mod shares;

pub use ascent::{
    optimize_design_sga, optimize_design_subgrad, rescale_line_search, DesignCertificate,
};
pub use dual::{dual_gradient, dual_gradient_exact, dual_value, DualState, StreamAverage};
pub use oracle::{
    fourth_moment_min_eig, oracle_design, oracle_design_over, reparam_program,
    reparam_program_over, rho, round_radius, DesignWeights, OracleDesign,
};
pub use selection::{dual_integrand_from_margin, prob_from_margin, SelectionRule};
pub use shares::{assign_dual_shares, f_dual_value, sdp_gap_tol, CoverDualSolver};
