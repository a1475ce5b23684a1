//! Mixed-integer encoding of a grouped specification.

mod assemble;
mod encode;
mod model;

pub use assemble::{
    assemble_fixed, assemble_problem, Assembled, BigMSummary, EffortNorm, EncodingContext, EncodingStats, ModelIndex,
    TaskBudget, DEFAULT_MARGIN,
};
pub use encode::{
    encode_counting_chain, encode_sos1, linearize_max, linearize_min, linearize_product, log2_ceil, BigM, EncodeError,
    Encoder, Site, StateTable,
};
pub use model::{Constraint, LinExpr, MilpError, MilpModel, ModelCounts, RowSense, VarId, VarKind, Variable};
