//! Satisficing paths: the Access/NoB/Worse set algebra, the path
//! constructor, the path verifier and the boundary-lemma utilities.

mod lemma;
mod path;
mod sets;
mod worse;

pub use lemma::{build_w_xi, build_z_lambda, eval_poly, indifference_poly, zero_poly_check};
pub use path::{
    construct_path, verify_path, PathStep, PathVerification, SatisficingPath, StepKind, Violation,
    MAX_ESCALATIONS,
};
pub use sets::{in_nob, in_worse, is_accessible};
pub use worse::{find_worse_candidate, WorseSearchConfig};
