use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::bounds::BoundReport;
use crate::graph::{FlipSet, Instance};
use crate::sdp::Residuals;

/// Solver identifiers, named as they appear in reports and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Enumerate,
    BranchAndBound,
    SGreedy,
    IGreedy,
    SdpRelax,
    Glover,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Enumerate,
        Algorithm::BranchAndBound,
        Algorithm::SdpRelax,
        Algorithm::Glover,
        Algorithm::IGreedy,
        Algorithm::SGreedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Enumerate => "enumerate",
            Algorithm::BranchAndBound => "bnb",
            Algorithm::SGreedy => "s-greedy",
            Algorithm::IGreedy => "i-greedy",
            Algorithm::SdpRelax => "sdp-relax",
            Algorithm::Glover => "glover",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .or(match key.as_str() {
                "exact" | "iqp" => Some(Algorithm::Enumerate),
                "branch-and-bound" => Some(Algorithm::BranchAndBound),
                "sdp" => Some(Algorithm::SdpRelax),
                _ => None,
            })
            .ok_or_else(|| format!("unknown algorithm '{s}'"))
    }
}

/// Outcome of one solver run.
///
/// `gain` is `xᵀPx` for the returned selection. The normalized diversity
/// index after flipping is `base_index + gain` (raw index divided by four).
#[derive(Debug, Clone)]
pub struct SolverReport {
    pub algorithm: Algorithm,
    pub selection: FlipSet,
    pub gain: f64,
    pub base_index: f64,
    /// Upper bound on `xᵀPx` from a relaxation, when the algorithm has one.
    pub relaxation_bound: Option<f64>,
    pub bounds: Option<BoundReport>,
    pub residuals: Option<Residuals>,
    pub seed: Option<u64>,
    pub runtime: Duration,
    /// `Some(true)` when an exact method proved optimality.
    pub proven_optimal: Option<bool>,
}

impl SolverReport {
    pub fn new(algorithm: Algorithm, inst: &Instance, selection: FlipSet) -> Self {
        SolverReport {
            algorithm,
            gain: selection.value(),
            selection,
            base_index: inst.base_index_normalized(),
            relaxation_bound: None,
            bounds: None,
            residuals: None,
            seed: None,
            runtime: Duration::ZERO,
            proven_optimal: None,
        }
    }

    /// Diversity index after flipping, divided by four.
    pub fn normalized_value(&self) -> f64 {
        self.base_index + self.gain
    }

    /// Relaxation bound in the same normalized units as [`Self::normalized_value`].
    pub fn normalized_bound(&self) -> Option<f64> {
        self.relaxation_bound.map(|b| self.base_index + b)
    }

    pub fn cost(&self) -> f64 {
        self.selection.cost()
    }
}
