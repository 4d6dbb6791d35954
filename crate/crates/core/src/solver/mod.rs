//! High-precision primal-dual interior-point solver for small
//! block-diagonal semidefinite programs in the primal standard form
//! minimize ⟨C,X⟩ subject to ⟨A_i,X⟩ = b_i, X ⪰ 0.

pub mod io;
mod ipm;
pub mod linalg;
#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::bigfloat::MpFloat;
use crate::scalar::Real;
use crate::sdp::{BlockInfo, BlockKind, Constraint, MatEntry, SDPProblem};
use crate::{rat_int, FloatMatrix, Rational};

pub use ipm::solve_generic;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("problem has no constraints")]
    NoConstraints,
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Working precision in bits.
    pub precision: u32,
    /// Relative duality-gap and residual target.
    pub tol: f64,
    pub max_iterations: usize,
    /// Scale of the identity starting point; chosen from the data if None.
    pub init_scale: Option<f64>,
    pub verbose: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            precision: 256,
            tol: 1e-30,
            max_iterations: 400,
            init_scale: None,
            verbose: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Stalled,
    Infeasible,
    IterationLimit,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Optimal => "optimal",
            Status::Stalled => "stalled",
            Status::Infeasible => "infeasible",
            Status::IterationLimit => "iteration-limit",
        };
        write!(f, "{s}")
    }
}

/// Solver output: primal blocks, dual vector and slacks, and the achieved
/// gap and residuals, all recomputed from the returned iterates.
#[derive(Clone, Debug)]
pub struct PrimalDualSolution {
    pub status: Status,
    pub x: Vec<FloatMatrix>,
    pub y: Vec<MpFloat>,
    pub z: Vec<FloatMatrix>,
    pub pobj: f64,
    pub dobj: f64,
    pub rel_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// In feasibility-margin mode, a rigorous-by-construction lower bound on
    /// every block's minimum eigenvalue (the margin variable's value).
    pub margin: Option<f64>,
}

/// Solve the problem as given.
pub fn solve(problem: &SDPProblem, cfg: &SolveConfig) -> Result<PrimalDualSolution, SolverError> {
    if problem.constraints.is_empty() {
        return Err(SolverError::NoConstraints);
    }
    ipm::solve_generic::<MpFloat>(problem, cfg)
}

/// Feasibility-margin mode: pin the objective to `pinned` and maximize a
/// uniform margin T with X = X̃ + T·I across every block, so the returned
/// solution is strictly feasible with all block eigenvalues at least T.
/// The margin is capped at one to keep the problem bounded.
pub fn solve_feasibility_margin(
    problem: &SDPProblem,
    pinned: &Rational,
    cfg: &SolveConfig,
) -> Result<PrimalDualSolution, SolverError> {
    if problem.constraints.is_empty() {
        return Err(SolverError::NoConstraints);
    }
    let augmented = augment_with_margin(problem, pinned);
    let sol = ipm::solve_generic::<MpFloat>(&augmented, cfg)?;
    if sol.status == Status::Infeasible {
        return Ok(sol);
    }
    // fold X = X̃ + T·I back onto the original blocks
    let nb = problem.blocks.len();
    let t_block = nb; // margin block index in the augmented problem
    let t_val = sol.x[t_block][(0, 0)].clone();
    let mut x = Vec::with_capacity(nb);
    for (bi, info) in problem.blocks.iter().enumerate() {
        let mut m = sol.x[bi].clone();
        for d in 0..info.size {
            m[(d, d)] += &t_val;
        }
        x.push(m);
    }
    let margin = t_val.to_f64();
    Ok(PrimalDualSolution {
        status: sol.status,
        x,
        y: sol.y,
        z: sol.z,
        pobj: sol.pobj,
        dobj: sol.dobj,
        rel_gap: sol.rel_gap,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        iterations: sol.iterations,
        margin: Some(margin),
    })
}

/// The margin-augmented problem: two extra scalar blocks (the margin T and
/// the cap slack), T added to every constraint through the trace of its
/// matrix, the objective pinned, and −T minimized subject to T + s = 1.
fn augment_with_margin(problem: &SDPProblem, pinned: &Rational) -> SDPProblem {
    let mut blocks = problem.blocks.clone();
    let t_block = blocks.len();
    blocks.push(BlockInfo {
        name: "margin:t".into(),
        size: 1,
        kind: BlockKind::Sos,
    });
    let cap_block = blocks.len();
    blocks.push(BlockInfo {
        name: "margin:cap".into(),
        size: 1,
        kind: BlockKind::Sos,
    });

    let trace_of = |entries: &[MatEntry]| -> Rational {
        let mut t = rat_int(0);
        for e in entries {
            if e.i == e.j {
                t += &e.value;
            }
        }
        t
    };

    let mut constraints: Vec<Constraint> = Vec::with_capacity(problem.constraints.len() + 2);
    for c in &problem.constraints {
        let mut entries = c.entries.clone();
        let tr = trace_of(&c.entries);
        if tr != 0 {
            entries.push(MatEntry {
                block: t_block,
                i: 0,
                j: 0,
                value: tr,
            });
        }
        constraints.push(Constraint {
            entries,
            rhs: c.rhs.clone(),
            slack: c.slack,
        });
    }
    // pinned objective value
    {
        let mut entries = problem.objective.clone();
        let tr = trace_of(&problem.objective);
        if tr != 0 {
            entries.push(MatEntry {
                block: t_block,
                i: 0,
                j: 0,
                value: tr,
            });
        }
        constraints.push(Constraint {
            entries,
            rhs: pinned.clone(),
            slack: None,
        });
    }
    // T + s = 1
    constraints.push(Constraint {
        entries: vec![
            MatEntry {
                block: t_block,
                i: 0,
                j: 0,
                value: rat_int(1),
            },
            MatEntry {
                block: cap_block,
                i: 0,
                j: 0,
                value: rat_int(1),
            },
        ],
        rhs: rat_int(1),
        slack: None,
    });

    SDPProblem {
        spec: problem.spec.clone(),
        blocks,
        constraints,
        objective: vec![MatEntry {
            block: t_block,
            i: 0,
            j: 0,
            value: rat_int(-1),
        }],
    }
}
