//! A small real-valued second-order cone program representation and its
//! solver.
//!
//! A program minimizes `c^T x` subject to a list of cones
//! `head(x) >= || tail(x) ||`, where `head` is one affine functional and
//! `tail` a stack of them. A cone with an empty tail is a plain linear
//! inequality `head(x) >= 0`.
//!
//! Solving is delegated to Clarabel's primal-dual interior-point method.
//! Before handing a program over, each cone is divided by its largest
//! coefficient or offset, which leaves the feasible set unchanged and keeps
//! the physical scales of the beamforming problems (channel gains around
//! 1e-3, noise around 1e-7) away from the solver's absolute tolerances.

use std::fmt::{self, Write as _};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT,
    SolverStatus, SupportedConeT,
};

use crate::error::{Error, Result};

/// `coeffs . x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRow {
    pub coeffs: Vec<f64>,
    pub offset: f64,
}

impl AffineRow {
    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![0.0; n],
            offset: 0.0,
        }
    }

    pub fn constant(n: usize, offset: f64) -> Self {
        Self {
            coeffs: vec![0.0; n],
            offset,
        }
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut row = Self::zeros(n);
        row.coeffs[i] = 1.0;
        row
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.offset
    }

    fn magnitude(&self) -> f64 {
        self.coeffs
            .iter()
            .fold(self.offset.abs(), |m, c| m.max(c.abs()))
    }
}

/// `head(x) >= ||tail(x)||`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderCone {
    pub label: String,
    pub head: AffineRow,
    pub tail: Vec<AffineRow>,
}

impl SecondOrderCone {
    pub fn new(label: impl Into<String>, head: AffineRow, tail: Vec<AffineRow>) -> Self {
        Self {
            label: label.into(),
            head,
            tail,
        }
    }

    /// `head(x) - ||tail(x)||`; nonnegative inside the cone.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let norm = self
            .tail
            .iter()
            .map(|r| r.eval(x).powi(2))
            .sum::<f64>()
            .sqrt();
        self.head.eval(x) - norm
    }

    fn rows(&self) -> impl Iterator<Item = &AffineRow> {
        std::iter::once(&self.head).chain(self.tail.iter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub objective: Vec<f64>,
    pub cones: Vec<SecondOrderCone>,
    pub var_names: Vec<String>,
}

impl ConicProgram {
    pub fn new(var_names: Vec<String>) -> Self {
        Self {
            objective: vec![0.0; var_names.len()],
            cones: Vec::new(),
            var_names,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn cone(&self, label: &str) -> Option<&SecondOrderCone> {
        self.cones.iter().find(|c| c.label == label)
    }

    /// Copy of the program without the cones carrying `label`.
    pub fn without(&self, label: &str) -> Self {
        Self {
            cones: self
                .cones
                .iter()
                .filter(|c| c.label != label)
                .cloned()
                .collect(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.objective.len() != n {
            return Err(Error::MalformedProgram(format!(
                "objective has {} entries for {n} variables",
                self.objective.len()
            )));
        }
        for cone in &self.cones {
            for row in cone.rows() {
                if row.coeffs.len() != n {
                    return Err(Error::MalformedProgram(format!(
                        "cone `{}` has a row with {} columns, expected {n}",
                        cone.label,
                        row.coeffs.len()
                    )));
                }
                if !row.offset.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::MalformedProgram(format!(
                        "cone `{}` has non-finite entries",
                        cone.label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Most negative cone residual at `x` (zero if every cone holds).
    pub fn worst_residual(&self, x: &[f64]) -> f64 {
        self.cones.iter().map(|c| c.residual(x)).fold(0.0, f64::min)
    }

    /// Plain-text listing of the program: one line per row with its cone,
    /// offset and nonzero coefficients.
    pub fn listing(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ConicProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# variables {}", self.n_vars())?;
        for (i, name) in self.var_names.iter().enumerate() {
            writeln!(f, "var {i} {name}")?;
        }
        writeln!(f, "minimize{}", sparse_terms(&self.objective))?;
        for cone in &self.cones {
            writeln!(f, "cone {} dim {}", cone.label, cone.tail.len() + 1)?;
            for (k, row) in cone.rows().enumerate() {
                let kind = if k == 0 { "head" } else { "tail" };
                writeln!(
                    f,
                    "  {kind} offset {:e}{}",
                    row.offset,
                    sparse_terms(&row.coeffs)
                )?;
            }
        }
        Ok(())
    }
}

fn sparse_terms(coeffs: &[f64]) -> String {
    let mut s = String::new();
    for (j, c) in coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0) {
        let _ = write!(s, " {j}:{c:e}");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Relative and absolute gap / feasibility tolerance.
    pub tolerance: f64,
    pub max_iter: u32,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: ConicStatus,
    /// Primal point; empty unless `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: u32,
}

/// Solves `prog` with Clarabel.
///
/// Clarabel's standard form is `min q^T x  s.t.  A x + s = b,  s in K`, so
/// a row `a . x + d` of a cone becomes `A = -a`, `b = d`.
pub fn solve_conic(prog: &ConicProgram, settings: &SolverSettings) -> Result<ConicSolution> {
    prog.validate()?;
    let n = prog.n_vars();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut b = Vec::new();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(prog.cones.len());
    for cone in &prog.cones {
        let scale = cone.rows().map(AffineRow::magnitude).fold(0.0, f64::max);
        let scale = if scale > 0.0 { 1.0 / scale } else { 1.0 };
        for row in cone.rows() {
            rows.push(row.coeffs.iter().map(|c| -c * scale).collect());
            b.push(row.offset * scale);
        }
        cones.push(if cone.tail.is_empty() {
            NonnegativeConeT(1)
        } else {
            SecondOrderConeT(cone.tail.len() + 1)
        });
    }

    let a = if rows.is_empty() {
        CscMatrix::zeros((0, n))
    } else {
        CscMatrix::from(&rows)
    };
    let p = CscMatrix::zeros((n, n));
    let tol = settings.tolerance;
    let clarabel_settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(settings.max_iter)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .tol_infeas_abs(tol)
        .tol_infeas_rel(tol)
        .tol_ktratio(tol.sqrt())
        .build()
        .map_err(|e| Error::MalformedProgram(format!("solver settings: {e}")))?;
    let mut solver = DefaultSolver::new(&p, &prog.objective, &a, &b, &cones, clarabel_settings)
        .map_err(|e| Error::MalformedProgram(format!("{e:?}")))?;
    solver.solve();

    let sol = &solver.solution;
    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => ConicStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            ConicStatus::Infeasible
        }
        _ => ConicStatus::NumericalFailure,
    };
    let x = if status == ConicStatus::Optimal {
        sol.x.clone()
    } else {
        Vec::new()
    };
    let objective = if status == ConicStatus::Optimal {
        prog.objective_value(&x)
    } else {
        f64::NAN
    };
    Ok(ConicSolution {
        status,
        x,
        objective,
        iterations: sol.iterations,
    })
}
