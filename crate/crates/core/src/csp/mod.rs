//! Constraint systems feeding the gadgets: Max-3Lin, d-to-1 games and
//! layered PCPs.

mod game;
mod lin3;
mod pcp;
mod smooth;

pub use game::{Dto1Game, GameConstraint, GameLabeling};
pub use lin3::{
    block_geometry, prover1_answer, prover2_answer, sample_partner, sample_round,
    sample_round_with_budget, verifier_accepts, BlockGeometry, Equation, EquationBlock,
    Lin3Instance, VariableBlock, DEFAULT_REJECTION_BUDGET,
};
pub use pcp::{
    LayerPairDensity, LayerPairSmoothness, LayeredPcp, PcpConstraint, PcpLayer, SmoothParams,
    SmoothnessReport, WeakDensityReport,
};
pub use smooth::{build_smooth_mlpcp, build_smooth_mlpcp_with, SmoothBuildCaps, SmoothLayout};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CspError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("assignment has length {got}, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("block repeats a variable")]
    RepeatedVariable,
    #[error("no repeat-free block found in {0} attempts")]
    RejectionBudget(usize),
    #[error("variable block is not consistent with the equation block")]
    InconsistentBlocks,
    #[error("game is not bi-regular: {0}")]
    NotBiRegular(String),
    #[error("{what} is {size}, above the cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("variable {var} of layer {layer} has no label")]
    MissingLabel { layer: usize, var: usize },
    #[error("label {label} out of range for layer {layer}")]
    LabelOutOfRange { layer: usize, label: u32 },
    #[error("empty variable set supplied for layer {0}")]
    EmptySet(usize),
    #[error("operation requires a smooth d-to-1 instance")]
    NotSmooth,
    #[error("labeling violates constraint {0}")]
    Unsatisfied(usize),
    #[error("internal error: {0}")]
    Internal(String),
}
