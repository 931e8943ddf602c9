use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMat, RMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    /// Real symmetric PSD matrix.
    Symmetric,
    /// Complex Hermitian PSD matrix.
    Hermitian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalarKind {
    Free,
    NonNegative,
}

/// Coefficient matrix `C` of a block term; the term contributes `Re Tr(C X)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Real(RMat),
    Complex(CMat),
    /// `(row, col, value)` entries of an otherwise zero matrix; duplicates add.
    Entries(Vec<(usize, usize, Complex64)>),
}

impl Coefficient {
    pub fn entry(r: usize, c: usize, v: f64) -> Self {
        Coefficient::Entries(alloc::vec![(r, c, Complex64::new(v, 0.0))])
    }

    /// `Re Tr(C X)` evaluated directly.
    pub fn apply(&self, x: &CMat) -> f64 {
        match self {
            Coefficient::Real(c) => {
                let mut acc = 0.0;
                for i in 0..c.nrows() {
                    for j in 0..c.ncols() {
                        acc += c[(i, j)] * x[(j, i)].re;
                    }
                }
                acc
            }
            Coefficient::Complex(c) => crate::linalg::trace_product(c, x),
            Coefficient::Entries(e) => e.iter().map(|&(r, c, v)| (v * x[(c, r)]).re).sum(),
        }
    }
}

/// Linear functional over blocks and scalar variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearForm {
    pub blocks: Vec<(usize, Coefficient)>,
    pub scalars: Vec<(usize, f64)>,
}

impl LinearForm {
    pub fn new() -> Self {
        LinearForm::default()
    }

    pub fn block(mut self, index: usize, coef: Coefficient) -> Self {
        self.blocks.push((index, coef));
        self
    }

    pub fn scalar(mut self, index: usize, coef: f64) -> Self {
        self.scalars.push((index, coef));
        self
    }

    pub fn eval(&self, blocks: &[CMat], scalars: &[f64]) -> f64 {
        let b: f64 = self.blocks.iter().map(|(i, c)| c.apply(&blocks[*i])).sum();
        let s: f64 = self.scalars.iter().map(|&(i, c)| c * scalars[i]).sum();
        b + s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub form: LinearForm,
    pub relation: Relation,
    pub rhs: f64,
    pub label: String,
    /// Whether the solver margin applies to this row.
    pub guarded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Trace-linear program over PSD blocks and scalar variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<(BlockKind, usize)>,
    pub scalars: Vec<ScalarKind>,
    pub sense: Sense,
    pub objective: LinearForm,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        SdpProblem {
            blocks: Vec::new(),
            scalars: Vec::new(),
            sense,
            objective: LinearForm::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_block(&mut self, kind: BlockKind, dim: usize) -> usize {
        self.blocks.push((kind, dim));
        self.blocks.len() - 1
    }

    pub fn add_scalar(&mut self, kind: ScalarKind) -> usize {
        self.scalars.push(kind);
        self.scalars.len() - 1
    }

    pub fn constrain(&mut self, form: LinearForm, relation: Relation, rhs: f64, label: impl Into<String>) {
        self.constraints.push(Constraint {
            form,
            relation,
            rhs,
            label: label.into(),
            guarded: true,
        });
    }

    /// Adds a row exempt from the solver margin, for rows that only define
    /// an epigraph variable.
    pub fn constrain_unguarded(&mut self, form: LinearForm, relation: Relation, rhs: f64, label: impl Into<String>) {
        self.constrain(form, relation, rhs, label);
        if let Some(c) = self.constraints.last_mut() {
            c.guarded = false;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Inequalities are tightened by `margin × (‖row‖ + |rhs|)` before
    /// solving, so a returned point within `tol` of the tightened problem
    /// satisfies the original one exactly when `margin > tol`.
    pub margin: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-7,
            max_iter: 100,
            margin: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Block values; symmetric blocks have zero imaginary parts.
    pub blocks: Vec<CMat>,
    pub scalars: Vec<f64>,
    /// Objective of the returned point in the caller's sense.
    pub objective: f64,
    /// Largest constraint violation at the returned point, each row measured
    /// relative to its coefficient norm plus right-hand side.
    pub primal_residual: f64,
    /// Relative dual infeasibility of the final iterate.
    pub dual_residual: f64,
    pub gap: f64,
    /// Multipliers per constraint, in the caller's sense and units.
    pub duals: Vec<f64>,
    /// Objective bound from a dual-feasible multiplier, when one was found.
    pub dual_bound: Option<f64>,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn real_block(&self, i: usize) -> RMat {
        self.blocks[i].map(|z| z.re)
    }
}
