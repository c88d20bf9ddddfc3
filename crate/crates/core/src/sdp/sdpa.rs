//! Sparse SDPA (`.dat-s`) export of the relaxation and import of solutions.
//!
//! The relaxation is written in SDPA's dual form `max ⟨F0, Y⟩` subject to
//! `⟨F_i, Y⟩ = c_i` and `Y ⪰ 0`, with `Y = diag(Z, S)`:
//!
//! * block 1 (size `n + 1`) is the bordered matrix `Z`,
//! * block 2 (diagonal, size 2) holds the slacks of the two knapsack rows.
//!
//! | constraint  | block 1 entries                       | block 2 | c   |
//! |-------------|---------------------------------------|---------|-----|
//! | `1..=n`     | `(i,i) = 1`, `(i,n+1) = -0.5`         |         | 0   |
//! | `n + 1`     | `(n+1,n+1) = 1`                       |         | 1   |
//! | `n + 2`     | `(i,j) = b_i b_j` for `i ≤ j`         | `(1,1)` | k²  |
//! | `n + 3`     | `(i,i) = b_i`                         | `(2,2)` | k   |
//!
//! `F0` carries the upper triangle of `P`. Indices are one-based and numbers
//! use 17 significant digits.
//!
//! Solutions are read in the layout CSDP writes: a first line with the `m`
//! dual values, then `matno block i j value` lines where `matno = 2` is the
//! primal matrix `Y`. Only block 1 is used.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{SdpError, SdpProblem, SdpSolution};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn export_sdpa(prob: &SdpProblem) -> String {
    let n = prob.n();
    let m = n + 3;
    let k = prob.budget;
    let b = &prob.costs;
    let mut out = String::new();
    let _ = writeln!(out, "\"diversity relaxation n={n}\"");
    let _ = writeln!(out, "{m}");
    let _ = writeln!(out, "2");
    let _ = writeln!(out, "{} -2", n + 1);
    let mut c = vec![num(0.0); n];
    c.push(num(1.0));
    c.push(num(k * k));
    c.push(num(k));
    let _ = writeln!(out, "{}", c.join(" "));

    let mut entry = |mat: usize, blk: usize, i: usize, j: usize, v: f64| {
        if v != 0.0 {
            let _ = writeln!(out, "{mat} {blk} {i} {j} {}", num(v));
        }
    };
    for i in 0..n {
        entry(0, 1, i + 1, i + 1, prob.p.diag()[i]);
        for (j, v) in prob.p.row(i).filter(|&(j, _)| j > i) {
            entry(0, 1, i + 1, j + 1, v);
        }
    }
    for i in 0..n {
        entry(i + 1, 1, i + 1, i + 1, 1.0);
        entry(i + 1, 1, i + 1, n + 1, -0.5);
    }
    entry(n + 1, 1, n + 1, n + 1, 1.0);
    for i in 0..n {
        for j in i..n {
            entry(n + 2, 1, i + 1, j + 1, b[i] * b[j]);
        }
    }
    entry(n + 2, 2, 1, 1, 1.0);
    for i in 0..n {
        entry(n + 3, 1, i + 1, i + 1, b[i]);
    }
    entry(n + 3, 2, 2, 2, 1.0);
    out
}

/// Writes `sol` in the solution layout read by [`import_sdpa_solution`].
/// The dual vector is not tracked by the bundled solver and is written as zeros.
pub fn write_sdpa_solution(prob: &SdpProblem, sol: &SdpSolution) -> String {
    let n = prob.n();
    let z = sol.bordered();
    let mut out = String::new();
    let _ = writeln!(out, "{}", vec![num(0.0); n + 3].join(" "));
    for i in 0..=n {
        for j in i..=n {
            if z[(i, j)] != 0.0 {
                let _ = writeln!(out, "2 1 {} {} {}", i + 1, j + 1, num(z[(i, j)]));
            }
        }
    }
    let (sq, lin) = prob.knapsack_terms(z);
    let slack = [prob.budget * prob.budget - sq, prob.budget - lin];
    for (t, s) in slack.iter().enumerate() {
        let _ = writeln!(out, "2 2 {} {} {}", t + 1, t + 1, num(s.max(0.0)));
    }
    out
}

/// Rebuilds `(X*, x*)` from block 1 of the primal matrix and re-evaluates
/// the residuals against `prob`.
pub fn import_sdpa_solution(prob: &SdpProblem, text: &str) -> Result<SdpSolution, SdpError> {
    let n = prob.n();
    let dim = n + 1;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (first_no, first) = lines.next().ok_or(SdpError::ParseError { line: 1, message: "empty file".into() })?;
    let y: Vec<f64> = first
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| SdpError::ParseError { line: first_no + 1, message: format!("dual vector: {e}") })?;
    if y.len() != n + 3 {
        return Err(SdpError::DimensionMismatch { expected: n + 3, found: y.len() });
    }
    let mut z = DMatrix::zeros(dim, dim);
    let mut seen_primal = false;
    for (no, line) in lines {
        let parse_err = |message: String| SdpError::ParseError { line: no + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(parse_err(format!("expected 5 fields, found {}", fields.len())));
        }
        let idx = |t: &str| t.parse::<usize>().map_err(|e| parse_err(format!("index '{t}': {e}")));
        let (mat, blk, i, j) = (idx(fields[0])?, idx(fields[1])?, idx(fields[2])?, idx(fields[3])?);
        let v: f64 = fields[4].parse().map_err(|e| parse_err(format!("value '{}': {e}", fields[4])))?;
        if !(1..=2).contains(&mat) || !(1..=2).contains(&blk) || i == 0 || j == 0 {
            return Err(parse_err(format!("bad matrix/block/index in '{line}'")));
        }
        if mat != 2 || blk != 1 {
            continue;
        }
        if i > dim || j > dim {
            return Err(SdpError::DimensionMismatch { expected: dim, found: i.max(j) });
        }
        z[(i - 1, j - 1)] = v;
        z[(j - 1, i - 1)] = v;
        seen_primal = true;
    }
    if !seen_primal {
        return Err(SdpError::ParseError { line: 0, message: "no primal block entries".into() });
    }
    Ok(SdpSolution::from_bordered(prob, &z, 0, true))
}
