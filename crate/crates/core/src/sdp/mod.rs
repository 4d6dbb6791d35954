//! Assembly of the truncated kissing-number bound as a block-diagonal
//! semidefinite program with exact rational data: kernel blocks weighted by
//! zonal entries, sum-of-squares multiplier blocks, and coefficient-matching
//! equality constraints.

mod assemble;
mod delsarte;
mod delta;
mod patterns;
mod sdpa;
mod serialize;
mod sos;

pub use assemble::{
    assemble, assemble_constraint_polys, kernel_blocks, AssembleOptions, KernelLayout, LinForm,
    LinearPoly,
};
pub use delsarte::{delsarte_lp, gegenbauer};
pub use delta::{delta_generators, gram_matrix_poly, symmetrize_generators, SemialgebraicSet};
pub use patterns::{union_pair_patterns, union_pair_patterns_level};
pub use sdpa::{decimal_to_rational, emit_sdpa, parse_sdpa, rational_to_decimal};
pub use serialize::{read_problem, write_problem};
pub use sos::{monomial_basis, monomials_up_to, sos_relax};

use thiserror::Error;

use crate::glrep::Signature;
use crate::zonal::ZonalError;
use crate::{parse_rational, Rational};

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),
    #[error("missing zonal cache entry for {lam} at n={n}")]
    MissingCacheEntry { lam: Signature, n: usize },
    #[error("sos degree infeasible: {0}")]
    DegreeInfeasible(String),
    #[error(transparent)]
    Zonal(#[from] ZonalError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

/// Parameters of one bound computation. `d1` caps the kernel degree |λ|,
/// `d2` the row degree |λ| + 2j, and `delta` the sum-of-squares degree.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub n: usize,
    pub cos_theta: Rational,
    pub level: u8,
    pub d1: u32,
    pub d2: u32,
    pub delta: u32,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), SdpError> {
        if self.n < 4 {
            return Err(SdpError::InvalidSpec("n must be at least 4".into()));
        }
        if !(self.level == 1 || self.level == 2) {
            return Err(SdpError::InvalidSpec("level must be 1 or 2".into()));
        }
        if !(self.d1 <= self.d2 && self.d2 <= self.delta) {
            return Err(SdpError::InvalidSpec("need d1 <= d2 <= delta".into()));
        }
        if self.delta % 2 != 0 {
            return Err(SdpError::InvalidSpec("delta must be even".into()));
        }
        Ok(())
    }

    /// Signatures whose kernel blocks appear at this level.
    pub fn signatures(&self) -> Vec<Signature> {
        Signature::all_up_to(self.d1)
            .into_iter()
            .filter(|lam| self.level == 2 || lam.l2 == 0)
            .collect()
    }

    pub fn header_string(&self) -> String {
        format!(
            "n={} costheta={} level={} d1={} d2={} delta={}",
            self.n, self.cos_theta, self.level, self.d1, self.d2, self.delta
        )
    }

    pub fn parse_header(tokens: &str) -> Result<ProblemSpec, SdpError> {
        let mut n = None;
        let mut cos_theta = None;
        let mut level = None;
        let mut d1 = None;
        let mut d2 = None;
        let mut delta = None;
        for tok in tokens.split_whitespace() {
            if let Some((k, v)) = tok.split_once('=') {
                match k {
                    "n" => n = v.parse().ok(),
                    "costheta" => cos_theta = parse_rational(v).ok(),
                    "level" => level = v.parse().ok(),
                    "d1" => d1 = v.parse().ok(),
                    "d2" => d2 = v.parse().ok(),
                    "delta" => delta = v.parse().ok(),
                    _ => {}
                }
            }
        }
        let spec = ProblemSpec {
            n: n.ok_or_else(|| SdpError::Parse("missing n".into()))?,
            cos_theta: cos_theta.ok_or_else(|| SdpError::Parse("missing costheta".into()))?,
            level: level.ok_or_else(|| SdpError::Parse("missing level".into()))?,
            d1: d1.ok_or_else(|| SdpError::Parse("missing d1".into()))?,
            d2: d2.ok_or_else(|| SdpError::Parse("missing d2".into()))?,
            delta: delta.ok_or_else(|| SdpError::Parse("missing delta".into()))?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Kernel,
    Sos,
}

#[derive(Clone, Debug)]
pub struct BlockInfo {
    pub name: String,
    pub size: usize,
    pub kind: BlockKind,
}

/// One entry of a symmetric constraint matrix, upper triangle (i ≤ j).
/// The inner product is ⟨A, X⟩ = Σ_{i<j} 2 A_ij X_ij + Σ_i A_ii X_ii.
#[derive(Clone, Debug, PartialEq)]
pub struct MatEntry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: Rational,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub entries: Vec<MatEntry>,
    pub rhs: Rational,
    /// A designated entry appearing in this constraint only, used by exact
    /// rounding to absorb residuals.
    pub slack: Option<(usize, usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct SDPProblem {
    pub spec: Option<ProblemSpec>,
    pub blocks: Vec<BlockInfo>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<MatEntry>,
}

impl SDPProblem {
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    /// ⟨A, X⟩ for one symmetric entry list against concrete block matrices.
    pub fn inner_product(
        entries: &[MatEntry],
        x: &[crate::RatMatrix],
    ) -> Rational {
        let mut acc = crate::rat_int(0);
        for e in entries {
            let v = x[e.block][(e.i, e.j)].clone();
            let mut t = e.value.clone();
            t *= v;
            if e.i != e.j {
                t *= Rational::from(2);
            }
            acc += t;
        }
        acc
    }
}
