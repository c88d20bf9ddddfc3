//! Exposure-diversity maximization on undirected weighted graphs.
//!
//! Every node carries a binary exposure `s_i ∈ {-1, +1}`. The diversity index
//! `η(G, s) = Σ_(i,j)∈E w_ij (s_i - s_j)²` grows when connected nodes see
//! different content. Flipping the exposure of a budget-feasible node set `x`
//! changes the index by `4·xᵀPx`, where `P` is the [`ObjectiveMatrix`]. The
//! solvers in this crate all maximize `xᵀPx` subject to `bᵀx ≤ k`.

pub mod bounds;
pub mod exact;
pub mod glover;
pub mod graph;
pub mod greedy;
pub mod lp;
pub mod report;
pub mod rng;
pub mod rounding;
pub mod sdp;

pub use bounds::{BoundError, BoundKind, BoundReport};
pub use exact::{branch_and_bound, enumerate_exact, BnbConfig, ExactError};
pub use glover::{LinearProgram, LpError};
pub use graph::{
    apply_flips, build_objective, diversity_index, normalized_index, objective_gain, Exposure,
    FlipSet, Graph, GraphError, Instance, ObjectiveMatrix,
};
pub use greedy::{i_greedy, marginal_gain, s_greedy, GreedyConfig};
pub use report::SolverReport;
pub use rounding::RoundingConfig;
pub use sdp::{SdpConfig, SdpError, SdpProblem, SdpSolution};
