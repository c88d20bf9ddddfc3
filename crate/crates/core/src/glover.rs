//! Glover linearization of `max xᵀPx` s.t. `bᵀx ≤ k`.
//!
//! Each quadratic row term `x_i Σ_j P_ij x_j` is replaced by a variable `z_i`
//! tied to `x` through
//!
//! ```text
//! L_i x_i ≤ z_i ≤ U_i x_i
//! z_i ≤ Σ_j P_ij x_j - L_i (1 - x_i)
//! z_i ≥ Σ_j P_ij x_j - U_i (1 - x_i)
//! ```
//!
//! with `U_i = Σ_j max(P_ij, 0)` and `L_i = Σ_j min(P_ij, 0)` (diagonal
//! included). For binary `x` these force `z_i = x_i Σ_j P_ij x_j`; relaxing
//! `x` to `[0, 1]` gives an LP upper bound.

use std::time::Instant;

use crate::graph::{Instance, ObjectiveMatrix};
use crate::report::{Algorithm, SolverReport};
use crate::rng;
use crate::rounding::{self, RoundingConfig};

pub use crate::lp::{LinearProgram, LpError, LpSolution, Row, Sense};

/// Structural-variable ceiling (`2n`) for the bundled dense simplex.
pub const DEFAULT_LP_CEILING: usize = 600;

/// Row-wise sums of the negative and positive entries of `P`.
pub fn compute_lu(p: &ObjectiveMatrix) -> (Vec<f64>, Vec<f64>) {
    (0..p.n())
        .map(|i| {
            std::iter::once(p.diag()[i])
                .chain(p.row(i).map(|(_, v)| v))
                .fold((0.0, 0.0), |(lo, up), v| (lo + v.min(0.0), up + v.max(0.0)))
        })
        .unzip()
}

/// The linearized program over `x_1..x_n` (columns `0..n`) and `z_1..z_n`
/// (columns `n..2n`): one budget row followed by four rows per node.
pub fn glover_program(inst: &Instance, p: &ObjectiveMatrix) -> LinearProgram {
    let n = p.n();
    let (l, u) = compute_lu(p);
    let names = (1..=n).map(|i| format!("x{i}")).chain((1..=n).map(|i| format!("z{i}"))).collect();
    let mut lp = LinearProgram::new(names);
    for i in 0..n {
        lp.objective[n + i] = 1.0;
        lp.upper[i] = 1.0;
        // Implied by the rows; a finite lower bound keeps the simplex from splitting z.
        lp.lower[n + i] = l[i];
    }
    let budget = inst.costs().iter().enumerate().map(|(i, &b)| (i, b)).collect();
    lp.add_row("budget", budget, Sense::Le, inst.budget());
    for i in 0..n {
        let z = n + i;
        let id = i + 1;
        lp.add_row(format!("zup{id}"), vec![(z, 1.0), (i, -u[i])], Sense::Le, 0.0);
        lp.add_row(format!("zlo{id}"), vec![(z, 1.0), (i, -l[i])], Sense::Ge, 0.0);
        // z_i - Σ_j P_ij x_j - L_i x_i ≤ -L_i
        let mut row: Vec<(usize, f64)> = vec![(z, 1.0), (i, -p.diag()[i] - l[i])];
        row.extend(p.row(i).map(|(j, v)| (j, -v)));
        row.sort_by_key(|&(j, _)| j);
        lp.add_row(format!("rowup{id}"), row, Sense::Le, -l[i]);
        // z_i - Σ_j P_ij x_j - U_i x_i ≥ -U_i
        let mut row: Vec<(usize, f64)> = vec![(z, 1.0), (i, -p.diag()[i] - u[i])];
        row.extend(p.row(i).map(|(j, v)| (j, -v)));
        row.sort_by_key(|&(j, _)| j);
        lp.add_row(format!("rowlo{id}"), row, Sense::Ge, -u[i]);
    }
    lp
}

/// Program text in LP format.
pub fn export_lp(lp: &LinearProgram) -> String {
    lp.to_lp_format()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GloverRelaxation {
    pub x_frac: Vec<f64>,
    pub z: Vec<f64>,
    /// LP optimum, an upper bound on `max xᵀPx`.
    pub value: f64,
    pub pivots: usize,
}

pub fn solve_glover_relaxation(inst: &Instance, p: &ObjectiveMatrix) -> Result<GloverRelaxation, LpError> {
    solve_glover_relaxation_with(inst, p, DEFAULT_LP_CEILING)
}

pub fn solve_glover_relaxation_with(
    inst: &Instance,
    p: &ObjectiveMatrix,
    ceiling: usize,
) -> Result<GloverRelaxation, LpError> {
    let n = p.n();
    if 2 * n > ceiling {
        return Err(LpError::DimensionTooLarge { vars: 2 * n, ceiling });
    }
    let sol = glover_program(inst, p).solve()?;
    Ok(GloverRelaxation {
        x_frac: sol.x[..n].iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        z: sol.x[n..].to_vec(),
        value: sol.value,
        pivots: sol.pivots,
    })
}

/// Bernoulli rounding of `x_frac`, redrawn until the budget holds, with the
/// best of `cfg.samples` draws kept and optional local-search polish.
pub fn round_lp(x_frac: &[f64], inst: &Instance, p: &ObjectiveMatrix, cfg: &RoundingConfig) -> SolverReport {
    let started = Instant::now();
    let best = rounding::best_of(inst, p, cfg, |i| {
        let mut rng = rng::stream(cfg.seed, i);
        rounding::bernoulli_feasible(x_frac, inst, p, cfg.attempts_cap, &mut rng)
    });
    let mut report = SolverReport::new(Algorithm::Glover, inst, best);
    report.seed = Some(cfg.seed);
    report.runtime = started.elapsed();
    report
}

/// Relaxation followed by rounding.
pub fn glover(inst: &Instance, p: &ObjectiveMatrix, cfg: &RoundingConfig) -> Result<SolverReport, LpError> {
    let started = Instant::now();
    let relax = solve_glover_relaxation(inst, p)?;
    let mut report = round_lp(&relax.x_frac, inst, p, cfg);
    report.relaxation_bound = Some(relax.value);
    report.runtime = started.elapsed();
    Ok(report)
}
