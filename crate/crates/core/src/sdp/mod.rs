//! Semidefinite relaxation of the knapsack-constrained problem and Gaussian
//! randomized rounding.
//!
//! The lifted variable is the bordered matrix
//!
//! ```text
//! Z = [ X   x ]
//!     [ xᵀ  1 ]
//! ```
//!
//! of size `n + 1`, and the relaxation reads
//!
//! ```text
//! max ⟨P, X⟩  s.t.  diag(X) = x,  Z ⪰ 0,  ⟨bbᵀ, X⟩ ≤ k²,  ⟨Diag(b), X⟩ ≤ k.
//! ```
//!
//! The last inequality is implied by the others for binary points and only
//! helps the first-order solver. The solver is ADMM on the splitting
//! `Z ∈ affine set`, `W ∈ PSD cone`, `Z = W`.

mod sdpa;

use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::graph::{Instance, ObjectiveMatrix};
use crate::report::{Algorithm, SolverReport};
use crate::rng;
use crate::rounding::{self, RoundingConfig};

pub use sdpa::{export_sdpa, import_sdpa_solution, write_sdpa_solution};

pub const DEFAULT_DENSE_CEILING: usize = 300;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("{n} nodes exceed the dense ceiling of {ceiling}")]
    DimensionTooLarge { n: usize, ceiling: usize },
    /// The iteration cap was hit. The last iterate is attached.
    #[error("no convergence after {} iterations (residuals {:?})", .0.iterations, .0.residuals)]
    NonConvergence(Box<SdpSolution>),
    #[error("parse error on line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Constraint violations of a relaxation point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// `max(0, -λmin(Z))`.
    pub psd_violation: f64,
    /// `max_i |X_ii - x_i|`, together with the deviation of the corner from one.
    pub diag_violation: f64,
    /// Excess of `⟨bbᵀ, X⟩` over `k²` and of `⟨Diag(b), X⟩` over `k`.
    pub knapsack_violation: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.psd_violation.max(self.diag_violation).max(self.knapsack_violation)
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub p: ObjectiveMatrix,
    pub costs: Vec<f64>,
    pub budget: f64,
}

impl SdpProblem {
    pub fn new(inst: &Instance, p: &ObjectiveMatrix) -> Self {
        SdpProblem { p: p.clone(), costs: inst.costs().to_vec(), budget: inst.budget() }
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    /// Violations of the bordered matrix `z` (size `n + 1`).
    pub fn residuals(&self, z: &DMatrix<f64>) -> Residuals {
        let n = self.n();
        let mut diag = (z[(n, n)] - 1.0).abs();
        for i in 0..n {
            diag = diag.max((z[(i, i)] - 0.5 * (z[(i, n)] + z[(n, i)])).abs());
        }
        let (sq, lin) = self.knapsack_terms(z);
        let knapsack = (sq - self.budget * self.budget).max(lin - self.budget).max(0.0);
        let min_eig = SymmetricEigen::new(symmetrize(z)).eigenvalues.min();
        Residuals { psd_violation: (-min_eig).max(0.0), diag_violation: diag, knapsack_violation: knapsack }
    }

    /// `(⟨bbᵀ, X⟩, ⟨Diag(b), X⟩)`.
    fn knapsack_terms(&self, z: &DMatrix<f64>) -> (f64, f64) {
        let n = self.n();
        let b = &self.costs;
        let mut sq = 0.0;
        let mut lin = 0.0;
        for i in 0..n {
            lin += b[i] * z[(i, i)];
            for j in 0..n {
                sq += b[i] * b[j] * z[(i, j)];
            }
        }
        (sq, lin)
    }

    pub fn objective_of(&self, z: &DMatrix<f64>) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| self.p.diag()[i] * z[(i, i)] + self.p.row(i).map(|(j, v)| v * z[(i, j)]).sum::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// The `n × n` block `X*`.
    pub x_matrix: DMatrix<f64>,
    /// The border `x*`, clipped to `[0, 1]`.
    pub x: Vec<f64>,
    /// `⟨P, X*⟩`.
    pub objective_value: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub converged: bool,
    /// Upper bound on the relaxation optimum certified by the solver's dual
    /// iterate; `None` for solutions read from files.
    pub dual_bound: Option<f64>,
    z: DMatrix<f64>,
}

impl SdpSolution {
    /// Reads `X`, `x` and the residuals off a bordered matrix of size `n + 1`.
    pub fn from_bordered(prob: &SdpProblem, z: &DMatrix<f64>, iterations: usize, converged: bool) -> Self {
        let n = prob.n();
        let x_matrix = symmetrize(&z.view((0, 0), (n, n)).into_owned());
        let x = (0..n).map(|i| z[(i, n)].clamp(0.0, 1.0)).collect();
        SdpSolution {
            x_matrix,
            x,
            objective_value: prob.objective_of(z),
            residuals: prob.residuals(z),
            iterations,
            converged,
            dual_bound: None,
            z: symmetrize(z),
        }
    }

    /// The bordered matrix `[[X, x], [xᵀ, 1]]` as produced by the solver,
    /// without clipping.
    pub fn bordered(&self) -> &DMatrix<f64> {
        &self.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpConfig {
    /// Target for the constraint residuals, the ADMM residuals and the
    /// relative gap to the dual bound.
    pub tol: f64,
    pub max_iters: usize,
    pub dense_ceiling: usize,
}

impl Default for SdpConfig {
    fn default() -> Self {
        SdpConfig { tol: 1e-6, max_iters: 20_000, dense_ceiling: DEFAULT_DENSE_CEILING }
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn frob_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let v = &eig.eigenvectors;
    let lam = eig.eigenvalues.map(|l| l.max(0.0));
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * lam[j]);
    symmetrize(&(scaled * v.transpose()))
}

/// Euclidean projection onto `{Z : Z_ii = Z_in, Z_nn = 1, ⟨H_t, Z⟩ ≤ h_t}`.
struct AffineProjector {
    n: usize,
    /// Knapsack normals projected onto the equality subspace.
    g: [DMatrix<f64>; 2],
    h_mat: [DMatrix<f64>; 2],
    rhs: [f64; 2],
    gram: [[f64; 2]; 2],
}

impl AffineProjector {
    fn new(prob: &SdpProblem) -> Self {
        let n = prob.n();
        let b = &prob.costs;
        let mut h1 = DMatrix::zeros(n + 1, n + 1);
        let mut h2 = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            h2[(i, i)] = b[i];
            for j in 0..n {
                h1[(i, j)] = b[i] * b[j];
            }
        }
        let mut g1 = h1.clone();
        let mut g2 = h2.clone();
        Self::remove_equality_part(&mut g1, n);
        Self::remove_equality_part(&mut g2, n);
        let gram = [
            [frob_dot(&g1, &g1), frob_dot(&g1, &g2)],
            [frob_dot(&g2, &g1), frob_dot(&g2, &g2)],
        ];
        AffineProjector {
            n,
            g: [g1, g2],
            h_mat: [h1, h2],
            rhs: [prob.budget * prob.budget, prob.budget],
            gram,
        }
    }

    /// Projects onto the subspace `{Z_ii = Z_in, Z_nn = 0}`. The constraint
    /// matrices `E_i` (1 at `(i,i)`, -1/2 at `(i,n)` and `(n,i)`) are mutually
    /// orthogonal with squared norm 3/2.
    fn remove_equality_part(z: &mut DMatrix<f64>, n: usize) {
        for i in 0..n {
            let t = (z[(i, i)] - 0.5 * (z[(i, n)] + z[(n, i)])) / 1.5;
            z[(i, i)] -= t;
            z[(i, n)] += 0.5 * t;
            z[(n, i)] += 0.5 * t;
        }
        z[(n, n)] = 0.0;
    }

    /// Weak-duality bound from a PSD multiplier `s`.
    ///
    /// Any feasible `Z` has entries in `[-1, 1]` (PSD with diagonal in
    /// `[0, 1]`) and `⟨S, Z⟩ ≥ 0`, so writing `C + S` as equality normals,
    /// `ν₁H₁ + ν₂H₂` with `ν ≥ 0`, and a remainder `R` gives
    /// `⟨C, Z⟩ ≤ (C+S)_nn + ν₁k² + ν₂k + Σ|R_ij|`.
    fn dual_bound(&self, c: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
        let n = self.n;
        let mut m = c + s;
        let corner = m[(n, n)];
        Self::remove_equality_part(&mut m, n);
        let a = [frob_dot(&self.g[0], &m), frob_dot(&self.g[1], &m)];
        let nu = solve_lcp2(&self.gram, &a);
        for t in 0..2 {
            if nu[t] != 0.0 {
                m -= &self.g[t] * nu[t];
            }
        }
        corner + nu[0] * self.rhs[0] + nu[1] * self.rhs[1] + m.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn project(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        let mut z0 = y.clone();
        Self::remove_equality_part(&mut z0, n);
        z0[(n, n)] = 1.0;
        let a = [frob_dot(&self.h_mat[0], &z0) - self.rhs[0], frob_dot(&self.h_mat[1], &z0) - self.rhs[1]];
        let nu = solve_lcp2(&self.gram, &a);
        let mut z = z0;
        for t in 0..2 {
            if nu[t] != 0.0 {
                z -= &self.g[t] * nu[t];
            }
        }
        z
    }
}

/// Smallest-norm solution of `ν ≥ 0`, `w = Mν - a ≥ 0`, `νᵀw = 0` for a 2×2
/// positive semidefinite `M`, found by trying each active set.
fn solve_lcp2(m: &[[f64; 2]; 2], a: &[f64; 2]) -> [f64; 2] {
    const EPS: f64 = 1e-12;
    let ok = |nu: [f64; 2]| {
        let scale = 1.0 + a[0].abs().max(a[1].abs());
        (0..2).all(|t| nu[t] >= 0.0 && m[t][0] * nu[0] + m[t][1] * nu[1] - a[t] >= -EPS * scale)
    };
    if ok([0.0, 0.0]) {
        return [0.0, 0.0];
    }
    let mut candidates = Vec::new();
    if m[0][0] > EPS {
        candidates.push([a[0] / m[0][0], 0.0]);
    }
    if m[1][1] > EPS {
        candidates.push([0.0, a[1] / m[1][1]]);
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() > EPS * (1.0 + m[0][0] * m[1][1]) {
        candidates.push([(a[0] * m[1][1] - a[1] * m[0][1]) / det, (m[0][0] * a[1] - m[1][0] * a[0]) / det]);
    }
    candidates
        .into_iter()
        .find(|&nu| ok(nu))
        .unwrap_or_else(|| {
            // Degenerate Gram matrix: fall back to the tighter single constraint.
            let first = if m[0][0] > EPS { [a[0].max(0.0) / m[0][0], 0.0] } else { [0.0, 0.0] };
            let second = if m[1][1] > EPS { [0.0, a[1].max(0.0) / m[1][1]] } else { [0.0, 0.0] };
            if first[0] >= second[1] { first } else { second }
        })
}

/// Solves the relaxation by ADMM with residual balancing.
///
/// On hitting `max_iters` the last iterate is returned inside
/// [`SdpError::NonConvergence`]; its residuals say how far it is from
/// feasible, and its objective is an upper-bound estimate only when they are
/// small.
pub fn solve_sdp_relaxation(prob: &SdpProblem, cfg: &SdpConfig) -> Result<SdpSolution, SdpError> {
    let n = prob.n();
    if n > cfg.dense_ceiling {
        return Err(SdpError::DimensionTooLarge { n, ceiling: cfg.dense_ceiling });
    }
    let dim = n + 1;
    // Work with a unit-scale objective; ADMM is not scale invariant.
    let c_scale = {
        let m = (0..n)
            .map(|i| prob.p.diag()[i].abs().max(prob.p.row(i).map(|(_, v)| v.abs()).fold(0.0, f64::max)))
            .fold(0.0, f64::max);
        if m > 0.0 { m } else { 1.0 }
    };
    let mut c = DMatrix::zeros(dim, dim);
    for i in 0..n {
        c[(i, i)] = prob.p.diag()[i] / c_scale;
        for (j, v) in prob.p.row(i) {
            c[(i, j)] = v / c_scale;
        }
    }
    let projector = AffineProjector::new(prob);

    let mut w = DMatrix::zeros(dim, dim);
    w[(n, n)] = 1.0;
    let mut u = DMatrix::<f64>::zeros(dim, dim);
    let mut rho = 1.0;
    let mut last = w.clone();
    let mut best_bound = f64::INFINITY;
    for it in 1..=cfg.max_iters {
        let z = projector.project(&(&w - &u + &c / rho));
        let w_prev = std::mem::replace(&mut w, project_psd(&(&z + &u)));
        u += &z - &w;
        let r = (&z - &w).norm();
        let s = rho * (&w - &w_prev).norm();
        last = z;
        if r <= cfg.tol && s <= cfg.tol {
            // After the PSD step U is the negative part of Z + U, so -ρU is PSD.
            let bound = projector.dual_bound(&c, &(&u * -rho)) * c_scale;
            best_bound = best_bound.min(bound);
            let objective = prob.objective_of(&w);
            if best_bound - objective <= cfg.tol * (1.0 + objective.abs()) && prob.residuals(&w).max() <= cfg.tol {
                let mut sol = SdpSolution::from_bordered(prob, &w, it, true);
                sol.dual_bound = Some(best_bound);
                return Ok(sol);
            }
        }
        if r > 10.0 * s {
            rho *= 2.0;
            u /= 2.0;
        } else if s > 10.0 * r {
            rho /= 2.0;
            u *= 2.0;
        }
    }
    // Report whichever of the two final iterates violates less.
    let from_w = SdpSolution::from_bordered(prob, &w, cfg.max_iters, false);
    let from_z = SdpSolution::from_bordered(prob, &last, cfg.max_iters, false);
    let mut sol = if from_z.residuals.max() < from_w.residuals.max() { from_z } else { from_w };
    sol.dual_bound = Some(best_bound.min(projector.dual_bound(&c, &(&u * -rho)) * c_scale));
    Err(SdpError::NonConvergence(Box::new(sol)))
}

/// Factor `V` with `VVᵀ = X - xxᵀ`, keeping eigenvalues above `1e-9`.
fn covariance_factor(sol: &SdpSolution) -> DMatrix<f64> {
    let n = sol.x.len();
    let xv = DVector::from_column_slice(&sol.x);
    let sigma = symmetrize(&(&sol.x_matrix - &xv * xv.transpose()));
    let eig = SymmetricEigen::new(sigma);
    let keep: Vec<usize> = (0..n).filter(|&j| eig.eigenvalues[j] > 1e-9).collect();
    DMatrix::from_fn(n, keep.len(), |i, c| eig.eigenvectors[(i, keep[c])] * eig.eigenvalues[keep[c]].sqrt())
}

/// Gaussian randomized rounding.
///
/// Sample `i` draws `z = x* + V r` with `r` standard normal from stream `i`
/// of the seed, clips `z` to `[0, 1]`, and rounds each coordinate to one with
/// probability `z_j` until the budget holds. The best feasible sample wins.
pub fn gaussian_round(sol: &SdpSolution, inst: &Instance, p: &ObjectiveMatrix, cfg: &RoundingConfig) -> SolverReport {
    let started = Instant::now();
    let v = covariance_factor(sol);
    let n = sol.x.len();
    let best = rounding::best_of(inst, p, cfg, |i| {
        let mut rng = rng::stream(cfg.seed, i);
        let r: Vec<f64> = (0..v.ncols()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let z: Vec<f64> = (0..n)
            .map(|a| (sol.x[a] + (0..v.ncols()).map(|c| v[(a, c)] * r[c]).sum::<f64>()).clamp(0.0, 1.0))
            .collect();
        rounding::bernoulli_feasible(&z, inst, p, cfg.attempts_cap, &mut rng)
    });
    let mut report = SolverReport::new(Algorithm::SdpRelax, inst, best);
    report.relaxation_bound = Some(sol.objective_value);
    report.residuals = Some(sol.residuals);
    report.seed = Some(cfg.seed);
    report.runtime = started.elapsed();
    report
}

/// Relaxation followed by rounding. A solve that stops at the iteration cap
/// still gets rounded; the residuals in the report show its quality.
pub fn sdp_relax(
    inst: &Instance,
    p: &ObjectiveMatrix,
    sdp_cfg: &SdpConfig,
    round_cfg: &RoundingConfig,
) -> Result<SolverReport, SdpError> {
    let started = Instant::now();
    let prob = SdpProblem::new(inst, p);
    let sol = match solve_sdp_relaxation(&prob, sdp_cfg) {
        Ok(sol) => sol,
        Err(SdpError::NonConvergence(sol)) => *sol,
        Err(e) => return Err(e),
    };
    let mut report = gaussian_round(&sol, inst, p, round_cfg);
    report.runtime = started.elapsed();
    Ok(report)
}
