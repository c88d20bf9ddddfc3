//! Small dense linear programs: model, two-phase revised simplex with Bland's
//! rule, and export to the plain-text LP interchange format.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("the linear program is infeasible")]
    Infeasible,
    #[error("the linear program is unbounded")]
    Unbounded,
    #[error("{vars} structural variables exceed the dense ceiling of {ceiling}")]
    DimensionTooLarge { vars: usize, ceiling: usize },
    #[error("simplex stopped after {0} pivots")]
    IterationLimit(usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `max cᵀv` subject to the rows and `lower ≤ v ≤ upper` (bounds may be infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub var_names: Vec<String>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

impl LinearProgram {
    /// A program over `names` with zero objective, bounds `[0, ∞)` and no rows.
    pub fn new(names: Vec<String>) -> Self {
        let n = names.len();
        LinearProgram {
            var_names: names,
            objective: vec![0.0; n],
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            rows: Vec::new(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row { name: name.into(), coeffs, sense, rhs });
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| {
            let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            match r.sense {
                Sense::Le => (lhs - r.rhs).max(0.0),
                Sense::Ge => (r.rhs - lhs).max(0.0),
                Sense::Eq => (lhs - r.rhs).abs(),
            }
        });
        let bounds = (0..self.var_count()).map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.var_count();
        if self.objective.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::InvalidModel("vector lengths differ from the variable count".into()));
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(LpError::InvalidModel(format!("empty bounds for {}", self.var_names[j])));
            }
            if !self.objective[j].is_finite() {
                return Err(LpError::InvalidModel(format!("objective coefficient of {}", self.var_names[j])));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() || r.coeffs.iter().any(|&(j, a)| j >= n || !a.is_finite()) {
                return Err(LpError::InvalidModel(format!("row {}", r.name)));
            }
        }
        Ok(())
    }

    /// Solves the program with the bundled two-phase revised simplex.
    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.validate()?;
        StandardForm::build(self).solve(self)
    }

    /// Writes the program in LP format (`Maximize` / `Subject To` / `Bounds`).
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        out.push_str("Maximize\n obj:");
        let obj: Vec<(usize, f64)> = (0..self.var_count()).map(|j| (j, self.objective[j])).collect();
        self.write_terms(&mut out, &obj);
        out.push_str("\nSubject To\n");
        for r in &self.rows {
            let _ = write!(out, " {}:", r.name);
            self.write_terms(&mut out, &r.coeffs);
            let _ = writeln!(out, " {} {}", r.sense.symbol(), num(r.rhs));
        }
        out.push_str("Bounds\n");
        for j in 0..self.var_count() {
            let (lo, up, name) = (self.lower[j], self.upper[j], &self.var_names[j]);
            let _ = match (lo.is_finite(), up.is_finite()) {
                (true, true) => writeln!(out, " {} <= {name} <= {}", num(lo), num(up)),
                (true, false) => writeln!(out, " {name} >= {}", num(lo)),
                (false, true) => writeln!(out, " -inf <= {name} <= {}", num(up)),
                (false, false) => writeln!(out, " {name} free"),
            };
        }
        out.push_str("End\n");
        out
    }

    fn write_terms(&self, out: &mut String, terms: &[(usize, f64)]) {
        let mut written = 0;
        for &(j, a) in terms {
            if a == 0.0 {
                continue;
            }
            if written > 0 && written % 8 == 0 {
                out.push_str("\n   ");
            }
            let sign = if a < 0.0 { "-" } else { "+" };
            let name = &self.var_names[j];
            if a.abs() == 1.0 {
                if written == 0 && a > 0.0 {
                    let _ = write!(out, " {name}");
                } else {
                    let _ = write!(out, " {sign} {name}");
                }
            } else if written == 0 && a > 0.0 {
                let _ = write!(out, " {} {name}", num(a));
            } else {
                let _ = write!(out, " {sign} {} {name}", num(a.abs()));
            }
            written += 1;
        }
        if written == 0 {
            let _ = write!(out, " 0 {}", self.var_names.first().map(String::as_str).unwrap_or("x"));
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// How an original variable is rebuilt from nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `v = offset + col`
    Shift { col: usize, offset: f64 },
    /// `v = offset - col`
    Flip { col: usize, offset: f64 },
    /// `v = pos - neg`
    Split { pos: usize, neg: usize },
}

/// `max cᵀy` s.t. `A y = b`, `y ≥ 0`, `b ≥ 0`, with slack and artificial
/// columns appended after the structural ones.
struct StandardForm {
    map: Vec<VarMap>,
    /// Sparse columns.
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    artificial_start: usize,
    /// Initial basis: a slack or artificial column per row.
    start_basis: Vec<usize>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut map = Vec::with_capacity(lp.var_count());
        let mut ncols = 0;
        let mut upper_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..lp.var_count() {
            let (lo, up) = (lp.lower[j], lp.upper[j]);
            let m = if lo.is_finite() {
                if up.is_finite() {
                    upper_rows.push((ncols, up - lo));
                }
                VarMap::Shift { col: ncols, offset: lo }
            } else if up.is_finite() {
                VarMap::Flip { col: ncols, offset: up }
            } else {
                ncols += 1;
                VarMap::Split { pos: ncols - 1, neg: ncols }
            };
            ncols += 1;
            map.push(m);
        }
        let structural = ncols;
        let mut cost = vec![0.0; structural];
        for (j, m) in map.iter().enumerate() {
            let c = lp.objective[j];
            match *m {
                VarMap::Shift { col, .. } => cost[col] = c,
                VarMap::Flip { col, .. } => cost[col] = -c,
                VarMap::Split { pos, neg } => {
                    cost[pos] = c;
                    cost[neg] = -c;
                }
            }
        }

        // Rows over the structural columns: (coeffs, sense, rhs).
        let mut rows: Vec<(Vec<(usize, f64)>, Sense, f64)> = Vec::new();
        for r in &lp.rows {
            let mut coeffs = Vec::new();
            let mut rhs = r.rhs;
            for &(j, a) in &r.coeffs {
                match map[j] {
                    VarMap::Shift { col, offset } => {
                        coeffs.push((col, a));
                        rhs -= a * offset;
                    }
                    VarMap::Flip { col, offset } => {
                        coeffs.push((col, -a));
                        rhs -= a * offset;
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs.push((pos, a));
                        coeffs.push((neg, -a));
                    }
                }
            }
            rows.push((coeffs, r.sense, rhs));
        }
        for (col, width) in upper_rows {
            rows.push((vec![(col, 1.0)], Sense::Le, width));
        }

        let m = rows.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); structural];
        let mut rhs = Vec::with_capacity(m);
        let mut senses = Vec::with_capacity(m);
        for (i, (coeffs, sense, b)) in rows.into_iter().enumerate() {
            let flip = b < 0.0;
            let s = if flip { -1.0 } else { 1.0 };
            for (col, a) in coeffs {
                match cols[col].last_mut() {
                    Some((row, v)) if *row == i => *v += s * a,
                    _ => cols[col].push((i, s * a)),
                }
            }
            rhs.push(s * b);
            senses.push(match (sense, flip) {
                (Sense::Le, true) => Sense::Ge,
                (Sense::Ge, true) => Sense::Le,
                (other, _) => other,
            });
        }
        let mut start_basis = vec![usize::MAX; m];
        for (i, sense) in senses.iter().enumerate() {
            match sense {
                Sense::Le => {
                    start_basis[i] = cols.len();
                    cols.push(vec![(i, 1.0)]);
                }
                Sense::Ge => cols.push(vec![(i, -1.0)]),
                Sense::Eq => {}
            }
        }
        let artificial_start = cols.len();
        for i in 0..m {
            if start_basis[i] == usize::MAX {
                start_basis[i] = cols.len();
                cols.push(vec![(i, 1.0)]);
            }
        }
        cost.resize(cols.len(), 0.0);
        StandardForm { map, cols, cost, rhs, artificial_start, start_basis }
    }

    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let m = self.rhs.len();
        let ncols = self.cols.len();
        let mut tab = Simplex::new(self, self.start_basis.clone());
        let limit = 50 * (m + ncols) + 1000;

        if self.artificial_start < ncols {
            let phase1: Vec<f64> = (0..ncols).map(|j| if j >= self.artificial_start { -1.0 } else { 0.0 }).collect();
            let allowed = vec![true; ncols];
            tab.run(self, &phase1, &allowed, limit)?;
            let infeasibility: f64 = (0..m)
                .filter(|&r| tab.basis[r] >= self.artificial_start)
                .map(|r| tab.xb[r])
                .sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0_f64, |a, &b| a.max(b));
            if infeasibility > 1e-7 * scale {
                return Err(LpError::Infeasible);
            }
            tab.drive_out_artificials(self);
        }
        let allowed: Vec<bool> = (0..ncols).map(|j| j < self.artificial_start).collect();
        tab.run(self, &self.cost, &allowed, limit)?;

        let mut y = vec![0.0; ncols];
        for r in 0..m {
            y[tab.basis[r]] = tab.xb[r].max(0.0);
        }
        let x: Vec<f64> = self
            .map
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, offset } => offset + y[col],
                VarMap::Flip { col, offset } => offset - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect();
        Ok(LpSolution { value: lp.evaluate(&x), x, pivots: tab.pivots })
    }
}

/// Revised simplex state with an explicit basis inverse.
struct Simplex {
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: DMatrix<f64>,
    xb: Vec<f64>,
    pivots: usize,
    since_refactor: usize,
}

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

impl Simplex {
    fn new(sf: &StandardForm, basis: Vec<usize>) -> Self {
        let m = sf.rhs.len();
        let mut is_basic = vec![false; sf.cols.len()];
        for &j in &basis {
            is_basic[j] = true;
        }
        // The starting basis is a signed identity made of unit slack/artificial columns.
        Simplex {
            basis,
            is_basic,
            binv: DMatrix::identity(m, m),
            xb: sf.rhs.clone(),
            pivots: 0,
            since_refactor: 0,
        }
    }

    fn column(&self, sf: &StandardForm, j: usize) -> Vec<f64> {
        let m = self.xb.len();
        let mut u = vec![0.0; m];
        for &(k, a) in &sf.cols[j] {
            for (r, ur) in u.iter_mut().enumerate() {
                *ur += self.binv[(r, k)] * a;
            }
        }
        u
    }

    fn run(&mut self, sf: &StandardForm, cost: &[f64], allowed: &[bool], limit: usize) -> Result<(), LpError> {
        let m = self.xb.len();
        loop {
            if self.pivots >= limit {
                return Err(LpError::IterationLimit(self.pivots));
            }
            // Duals yᵀ = c_Bᵀ B⁻¹.
            let mut y = vec![0.0; m];
            for (r, &bj) in self.basis.iter().enumerate() {
                let cb = cost[bj];
                if cb != 0.0 {
                    for (k, yk) in y.iter_mut().enumerate() {
                        *yk += cb * self.binv[(r, k)];
                    }
                }
            }
            // Bland: the lowest-index column with positive reduced cost enters.
            let entering = (0..sf.cols.len()).find(|&j| {
                !self.is_basic[j]
                    && allowed[j]
                    && cost[j] - sf.cols[j].iter().map(|&(k, a)| y[k] * a).sum::<f64>() > PRICE_TOL
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let u = self.column(sf, j);
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                if u[r] > PIVOT_TOL {
                    let t = self.xb[r].max(0.0) / u[r];
                    leave = match leave {
                        None => Some((r, t)),
                        Some((lr, lt)) => {
                            let tie = (t - lt).abs() <= 1e-12 * (1.0 + lt.abs());
                            if t < lt && !tie || tie && self.basis[r] < self.basis[lr] {
                                Some((r, t))
                            } else {
                                Some((lr, lt))
                            }
                        }
                    };
                }
            }
            let Some((r, t)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(sf, r, j, &u, t);
        }
    }

    fn pivot(&mut self, sf: &StandardForm, r: usize, j: usize, u: &[f64], t: f64) {
        let m = self.xb.len();
        let ur = u[r];
        for k in 0..m {
            self.binv[(r, k)] /= ur;
        }
        for i in 0..m {
            if i != r && u[i] != 0.0 {
                let f = u[i];
                for k in 0..m {
                    let v = self.binv[(r, k)];
                    self.binv[(i, k)] -= f * v;
                }
                self.xb[i] -= f * t;
            }
        }
        self.xb[r] = t;
        self.is_basic[self.basis[r]] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor(sf);
        }
    }

    /// Recomputes `B⁻¹` and the basic values from scratch to shed drift.
    fn refactor(&mut self, sf: &StandardForm) {
        let m = self.xb.len();
        let mut b = DMatrix::zeros(m, m);
        for (c, &j) in self.basis.iter().enumerate() {
            for &(k, a) in &sf.cols[j] {
                b[(k, c)] = a;
            }
        }
        if let Some(inv) = b.try_inverse() {
            self.binv = inv;
            for r in 0..m {
                self.xb[r] = (0..m).map(|k| self.binv[(r, k)] * sf.rhs[k]).sum();
            }
        }
        self.since_refactor = 0;
    }

    /// Swaps zero-valued artificial columns out of the basis where some
    /// structural or slack column can take their place.
    fn drive_out_artificials(&mut self, sf: &StandardForm) {
        for r in 0..self.xb.len() {
            if self.basis[r] < sf.artificial_start {
                continue;
            }
            let candidate = (0..sf.artificial_start).filter(|&j| !self.is_basic[j]).find_map(|j| {
                let u = self.column(sf, j);
                (u[r].abs() > 1e-7).then_some((j, u))
            });
            if let Some((j, u)) = candidate {
                let t = self.xb[r] / u[r];
                self.pivot(sf, r, j, &u, t);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn textbook_maximum() {
        // max 3a + 5b, a ≤ 4, 2b ≤ 12, 3a + 2b ≤ 18 → (2, 6), 36.
        let mut lp = LinearProgram::new(names(2));
        lp.objective = vec![3.0, 5.0];
        lp.add_row("c1", vec![(0, 1.0)], Sense::Le, 4.0);
        lp.add_row("c2", vec![(1, 2.0)], Sense::Le, 12.0);
        lp.add_row("c3", vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.value - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn needs_phase_one() {
        // max -a - b, a + b ≥ 2, a - b = 0, free b → a = b = 1.
        let mut lp = LinearProgram::new(names(2));
        lp.objective = vec![-1.0, -1.0];
        lp.lower[1] = f64::NEG_INFINITY;
        lp.add_row("c1", vec![(0, 1.0), (1, 1.0)], Sense::Ge, 2.0);
        lp.add_row("c2", vec![(0, 1.0), (1, -1.0)], Sense::Eq, 0.0);
        let s = lp.solve().unwrap();
        assert!((s.value + 2.0).abs() < 1e-9);
        assert!(lp.max_violation(&s.x) < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(names(1));
        lp.upper[0] = 1.0;
        lp.add_row("c", vec![(0, 1.0)], Sense::Ge, 2.0);
        assert_eq!(lp.solve(), Err(LpError::Infeasible));

        let mut lp = LinearProgram::new(names(2));
        lp.objective = vec![1.0, 0.0];
        lp.add_row("c", vec![(0, 1.0), (1, -1.0)], Sense::Le, 1.0);
        assert_eq!(lp.solve(), Err(LpError::Unbounded));
    }

    #[test]
    fn upper_bounded_negative_lower() {
        // max v, -3 ≤ v ≤ -1 → -1; min via max -v → -3.
        let mut lp = LinearProgram::new(names(1));
        lp.lower[0] = -3.0;
        lp.upper[0] = -1.0;
        lp.objective = vec![1.0];
        assert!((lp.solve().unwrap().value + 1.0).abs() < 1e-12);
        lp.objective = vec![-1.0];
        assert!((lp.solve().unwrap().value - 3.0).abs() < 1e-12);
        lp.lower[0] = f64::NEG_INFINITY;
        lp.objective = vec![1.0];
        assert!((lp.solve().unwrap().x[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn lp_format_sections() {
        let mut lp = LinearProgram::new(names(2));
        lp.objective = vec![1.0, -2.5];
        lp.upper[0] = 1.0;
        lp.lower[1] = f64::NEG_INFINITY;
        lp.add_row("r", vec![(0, 1.0), (1, 1.0)], Sense::Le, 3.0);
        let text = lp.to_lp_format();
        assert_eq!(
            text,
            "Maximize\n obj: v1 - 2.5000000000000000e0 v2\nSubject To\n r: v1 + v2 <= 3.0000000000000000e0\n\
             Bounds\n 0.0000000000000000e0 <= v1 <= 1.0000000000000000e0\n v2 free\nEnd\n"
        );
    }
}
