//! Stability of the MHD system under small perturbations of the initial data.
//!
//! Two primal runs are paired and their differences `du = u_1 - u_2`, `dB = B_1 - B_2`
//! are formed snapshot by snapshot. The difference system is never integrated on its own:
//! its commutator and product terms are evaluated from the two runs and compared with
//! their claimed bounds, the closed estimates are checked over the whole pair, and the
//! measured `X(t)` is compared with the Osgood comparison envelope.
//!
//! Norms of pairs such as `||(u_1, u_2)||` are the max of the two members. Every `sup_j`
//! runs over the finite shell range of the grid.

mod closure;
mod osgood;
mod pair;
mod study;
mod terms;

pub use closure::{verify_closure, ClosureReport};
pub use osgood::{modulus, osgood_envelope, Forcing};
pub use pair::{run_pair, PairTables, PairTrajectory, Perturbation, StabilityRecord, Target};
pub use study::{
    convergence_study, envelope_for, fitted_slope, stability_csv, ConvergenceStudy, StudyRow, STABILITY_HEADER,
};
pub use terms::{stability_norms, term_audit, TermTables, J_NAMES, K_NAMES};
