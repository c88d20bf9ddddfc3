//! Instance-specific upper bounds on `max xᵀPx` under a cardinality limit.
//!
//! All three bounds assume every node costs at least one, so that `bᵀx ≤ k`
//! implies `|x| ≤ ⌊k⌋`:
//!
//! * eigen: `k·λmax(P)` (Rayleigh quotient, `xᵀx = |x|`),
//! * gersh: `k·max_i(P_ii + Σ_{j≠i}|P_ij|)` (Gerschgorin discs),
//! * rowsum: the `k` largest row bounds, each row bound being the sum of that
//!   row's `k` largest nonnegative entries.
//!
//! The empty selection is always feasible with value zero, so every bound is
//! clamped at zero.

use thiserror::Error;

use crate::graph::{Instance, ObjectiveMatrix};
use crate::rng;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Eigen,
    Gersh,
    Rowsum,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Eigen => "eigen",
            BoundKind::Gersh => "gersh",
            BoundKind::Rowsum => "rowsum",
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eigen" => Ok(BoundKind::Eigen),
            "gersh" | "gerschgorin" => Ok(BoundKind::Gersh),
            "rowsum" => Ok(BoundKind::Rowsum),
            other => Err(format!("unknown bound kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("node {index} costs {cost}; cardinality bounds need every cost to be at least 1")]
    UnsupportedCosts { index: usize, cost: f64 },
    #[error("power iteration did not converge in {iterations} iterations (fallback bound {fallback})")]
    NonConvergence { iterations: usize, fallback: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub eigen_bound: f64,
    pub gersh_bound: f64,
    pub rowsum_bound: f64,
    pub lambda_max_estimate: f64,
    pub power_iters_used: usize,
    /// False when the eigen bound fell back to the Gerschgorin value.
    pub eigen_converged: bool,
    /// Cardinality limit the bounds were computed for.
    pub cardinality: usize,
}

impl BoundReport {
    pub fn get(&self, kind: BoundKind) -> f64 {
        match kind {
            BoundKind::Eigen => self.eigen_bound,
            BoundKind::Gersh => self.gersh_bound,
            BoundKind::Rowsum => self.rowsum_bound,
        }
    }

    pub fn tightest(&self) -> f64 {
        self.eigen_bound.min(self.gersh_bound).min(self.rowsum_bound)
    }
}

/// Result of a power iteration run.
#[derive(Debug, Clone)]
pub struct PowerIteration {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub const DEFAULT_EIGEN_TOL: f64 = 1e-9;

/// Iteration cap used by [`bound_eigen`]: `10·n`, but never fewer than
/// 20 000 so that small matrices with clustered top eigenvalues still settle.
pub fn default_power_iters(n: usize) -> usize {
    (10 * n).max(20_000)
}

/// Largest algebraic eigenvalue of a symmetric operator by power iteration on
/// `M + shift·I`.
///
/// `shift` must make `M + shift·I` positive semidefinite (any Gerschgorin
/// radius works); the dominant eigenvalue of the shifted operator is then
/// `λmax(M) + shift` even when `M` is indefinite. Iteration stops once the
/// Rayleigh quotient changes by less than `tol` relative and the eigen
/// residual `‖Mv - θv‖` is below `√tol` times the spectral scale.
pub fn power_lambda_max<F>(n: usize, matvec: F, shift: f64, tol: f64, max_iters: usize) -> PowerIteration
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return PowerIteration { lambda: 0.0, vector: Vec::new(), iterations: 0, converged: true };
    }
    let mut rng = rng::stream(0x9e37_79b9_7f4a_7c15, 0);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    normalize(&mut v);
    let mut mv = vec![0.0; n];
    let scale = shift.abs().max(1.0);
    let mut previous = f64::NAN;
    for it in 1..=max_iters {
        matvec(&v, &mut mv);
        let theta: f64 = dot(&v, &mv);
        let residual = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - theta * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let settled = (theta - previous).abs() <= tol * theta.abs().max(1.0);
        if residual <= tol.sqrt() * 1e-2 * scale || (settled && residual <= tol.sqrt() * scale) {
            return PowerIteration { lambda: theta, vector: v, iterations: it, converged: true };
        }
        previous = theta;
        for (vi, mi) in v.iter_mut().zip(&mv) {
            *vi = mi + shift * *vi;
        }
        if normalize(&mut v) == 0.0 {
            // v landed in the kernel of M + shift·I, so λmax = -shift.
            return PowerIteration { lambda: -shift, vector: v, iterations: it, converged: true };
        }
    }
    matvec(&v, &mut mv);
    PowerIteration { lambda: dot(&v, &mv), vector: v, iterations: max_iters, converged: false }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// `max_i(|P_ii| + Σ_{j≠i}|P_ij|)`, a shift that makes `P + cI` PSD.
pub fn absolute_gersh_radius(p: &ObjectiveMatrix) -> f64 {
    (0..p.n())
        .map(|i| p.diag()[i].abs() + p.off_diag_abs_sum(i))
        .fold(0.0, f64::max)
}

/// `ĝ = max_i(P_ii + Σ_{j≠i}|P_ij|)`.
pub fn gersh_value(p: &ObjectiveMatrix) -> f64 {
    (0..p.n())
        .map(|i| p.diag()[i] + p.off_diag_abs_sum(i))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn lambda_max(p: &ObjectiveMatrix, tol: f64, max_iters: usize) -> PowerIteration {
    let shift = absolute_gersh_radius(p);
    power_lambda_max(
        p.n(),
        |v, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = p.diag()[i] * v[i] + p.row(i).map(|(j, x)| x * v[j]).sum::<f64>();
            }
        },
        shift,
        tol,
        max_iters,
    )
}

/// `max(0, k·λmax(P))`. On non-convergence the error carries the Gerschgorin
/// bound as a sound fallback.
pub fn bound_eigen(p: &ObjectiveMatrix, k: f64, tol: f64) -> Result<f64, BoundError> {
    bound_eigen_detailed(p, k, tol).1
}

fn bound_eigen_detailed(p: &ObjectiveMatrix, k: f64, tol: f64) -> (PowerIteration, Result<f64, BoundError>) {
    let run = lambda_max(p, tol, default_power_iters(p.n()));
    if run.converged {
        let value = (k * run.lambda).max(0.0);
        (run, Ok(value))
    } else {
        let fallback = bound_gersh(p, k);
        let iterations = run.iterations;
        (run, Err(BoundError::NonConvergence { iterations, fallback }))
    }
}

/// `max(0, k·ĝ)`.
pub fn bound_gersh(p: &ObjectiveMatrix, k: f64) -> f64 {
    if p.n() == 0 {
        return 0.0;
    }
    (k * gersh_value(p)).max(0.0)
}

/// Sum of the `k` largest row bounds, where a row bound is the sum of the
/// row's `k` largest nonnegative entries (diagonal included).
pub fn bound_rowsum(p: &ObjectiveMatrix, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let mut scratch = Vec::new();
    let mut rows: Vec<f64> = (0..p.n())
        .map(|i| {
            scratch.clear();
            scratch.extend(
                std::iter::once(p.diag()[i])
                    .chain(p.row(i).map(|(_, v)| v))
                    .filter(|&v| v > 0.0),
            );
            top_sum(&mut scratch, k)
        })
        .collect();
    top_sum(&mut rows, k)
}

/// Sum of the `k` largest values; the slice is reordered.
pub(crate) fn top_sum(values: &mut [f64], k: usize) -> f64 {
    if k == 0 || values.is_empty() {
        return 0.0;
    }
    if k < values.len() {
        values.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
        values[..k].iter().sum()
    } else {
        values.iter().sum()
    }
}

/// `min(⌊k⌋, n)` for instances whose costs are all at least one.
pub fn cardinality_limit(inst: &Instance) -> Result<usize, BoundError> {
    if let Some((index, &cost)) = inst.costs().iter().enumerate().find(|(_, &c)| c < 1.0) {
        return Err(BoundError::UnsupportedCosts { index, cost });
    }
    Ok((inst.budget().floor() as usize).min(inst.node_count()))
}

/// All three bounds for an instance.
pub fn compute_bounds(inst: &Instance, p: &ObjectiveMatrix, tol: f64) -> Result<BoundReport, BoundError> {
    let card = cardinality_limit(inst)?;
    let k = card as f64;
    let gersh_bound = bound_gersh(p, k);
    let (run, eigen) = bound_eigen_detailed(p, k, tol);
    let (eigen_bound, eigen_converged) = match eigen {
        Ok(v) => (v, true),
        Err(BoundError::NonConvergence { fallback, .. }) => (fallback, false),
        Err(e) => return Err(e),
    };
    Ok(BoundReport {
        eigen_bound,
        gersh_bound,
        rowsum_bound: bound_rowsum(p, card),
        lambda_max_estimate: run.lambda,
        power_iters_used: run.iterations,
        eigen_converged,
        cardinality: card,
    })
}
