//! Linear systems of the scattering problem and their iterative solution.

mod gmres;
mod gram;
mod mh;
mod system;

pub use gmres::{gmres, Diagonal, GmresConfig, GmresOutcome, Identity, LinearMap};
pub use gram::{project_range, remove_weighted_mean, GramSolver};
pub use mh::{compress_mh, solve_mh, MhSystem};
pub use system::{
    apply_q, calderon_weight, solve_loop, CcCfierMap, CombinedMap, Formulation, OpKind, Operators,
    SolveResult, SystemConfig,
};
