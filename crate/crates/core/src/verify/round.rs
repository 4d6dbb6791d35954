//! Rational rounding of a strictly feasible solver solution: dyadic
//! truncation of every entry, then exact restoration of each affine
//! constraint through its dedicated slack entry.

use crate::sdp::{ProblemSpec, SDPProblem};
use crate::solver::PrimalDualSolution;
use crate::{rat_int, Integer, RatMatrix, Rational};

use super::certificate::{CertBlock, ExactCertificate};
use super::chol::ball_cholesky;
use super::VerifyError;

/// Round to denominator 2^κ.
fn dyadic(q: &Rational, kappa: u32) -> Rational {
    let mut scaled = q.clone();
    scaled <<= kappa;
    let rounded = scaled.round();
    let mut out = Rational::from(rounded.numer().clone());
    out >>= kappa;
    out
}

/// Produce an exact certificate from a strictly feasible solution. Entries
/// are truncated to denominator 2^`denom_bits`; each constraint's residual
/// is absorbed exactly by its dedicated slack entry, which by construction
/// appears in no other constraint. Fails with `MarginTooSmall` when the
/// corrections destroy positive definiteness.
pub fn round_certificate(
    sol: &PrimalDualSolution,
    problem: &SDPProblem,
    denom_bits: u32,
    prec: u32,
) -> Result<ExactCertificate, VerifyError> {
    let spec = problem
        .spec
        .clone()
        .unwrap_or_else(|| placeholder_spec(problem));
    let rational_blocks: Vec<RatMatrix> = sol
        .x
        .iter()
        .map(|xb| {
            RatMatrix::from_fn(xb.nrows(), xb.ncols(), |i, j| {
                // symmetrize from the upper triangle
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                xb[(a, b)].to_rational()
            })
        })
        .collect();
    round_rational_solution(&rational_blocks, problem, &spec, denom_bits, prec)
}

/// The same rounding from exact rational block values (for solutions read
/// back from disk).
pub fn round_rational_solution(
    blocks_in: &[RatMatrix],
    problem: &SDPProblem,
    spec: &ProblemSpec,
    denom_bits: u32,
    prec: u32,
) -> Result<ExactCertificate, VerifyError> {
    if blocks_in.len() != problem.blocks.len() {
        return Err(VerifyError::Shape(format!(
            "solution has {} blocks, problem has {}",
            blocks_in.len(),
            problem.blocks.len()
        )));
    }
    let mut x: Vec<RatMatrix> = blocks_in
        .iter()
        .map(|m| {
            RatMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                dyadic(&m[(a, b)], denom_bits)
            })
        })
        .collect();

    // absorb each residual into the dedicated entry
    for (idx, con) in problem.constraints.iter().enumerate() {
        let lhs = SDPProblem::inner_product(&con.entries, &x);
        let mut residual = con.rhs.clone();
        residual -= lhs;
        if residual == 0 {
            continue;
        }
        let Some((b, i, j)) = con.slack else {
            return Err(VerifyError::MarginTooSmall(format!(
                "constraint {idx} has residual {residual} and no slack entry"
            )));
        };
        let coeff = con
            .entries
            .iter()
            .find(|e| (e.block, e.i, e.j) == (b, i, j))
            .ok_or_else(|| {
                VerifyError::Shape(format!("slack entry missing from constraint {idx}"))
            })?
            .value
            .clone();
        let mult = if i == j {
            coeff
        } else {
            coeff * Rational::from(2)
        };
        let mut delta = residual;
        delta /= mult;
        x[b][(i, j)] += &delta;
        if i != j {
            x[b][(j, i)] += &delta;
        }
        debug_assert_eq!(SDPProblem::inner_product(&con.entries, &x), con.rhs);
    }

    // positive definiteness must survive the corrections
    for (bi, xb) in x.iter().enumerate() {
        if !ball_cholesky(xb, prec) {
            return Err(VerifyError::MarginTooSmall(format!(
                "block {} lost positive definiteness after rounding",
                problem.blocks[bi].name
            )));
        }
    }

    let bound = SDPProblem::inner_product(&problem.objective, &x);
    let blocks = x
        .into_iter()
        .zip(problem.blocks.iter())
        .map(|(xb, info)| CertBlock {
            name: info.name.clone(),
            b: None,
            x: xb,
        })
        .collect();
    Ok(ExactCertificate {
        spec: spec.clone(),
        bound,
        blocks,
    })
}

/// Continued-fraction rounding under a denominator bound; kept for direct
/// use on individual values.
pub fn continued_fraction_round(q: &Rational, denom_bound: &Integer) -> Rational {
    let mut a = q.clone();
    let mut h = (rat_int(1), rat_int(0)); // numerator convergents
    let mut k = (rat_int(0), rat_int(1)); // denominator convergents
    let mut best = Rational::from(q.clone().floor());
    loop {
        let fl = a.clone().floor();
        let h_new = Rational::from(&fl) * h.0.clone() + h.1.clone();
        let k_new = Rational::from(&fl) * k.0.clone() + k.1.clone();
        if k_new.numer().clone() > *denom_bound {
            break;
        }
        best = h_new.clone() / k_new.clone();
        h = (h_new, h.0);
        k = (k_new, k.0);
        let frac = a - Rational::from(fl);
        if frac == 0 {
            break;
        }
        a = Rational::from(1) / frac;
    }
    best
}

fn placeholder_spec(problem: &SDPProblem) -> ProblemSpec {
    let _ = problem;
    ProblemSpec {
        n: 4,
        cos_theta: crate::rat(1, 2),
        level: 1,
        d1: 0,
        d2: 0,
        delta: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn dyadic_rounding() {
        let q = rat(1, 3);
        let r = dyadic(&q, 8);
        assert_eq!(r, rat(85, 256));
        assert_eq!(dyadic(&rat(7, 2), 4), rat(7, 2));
    }

    #[test]
    fn continued_fractions_recover_simple_fractions() {
        let q = rat(355, 113); // classic pi approximation
        let r = continued_fraction_round(&q, &Integer::from(1000));
        assert_eq!(r, q);
        let pi_ish = rat(3141592653589793i64, 1000000000000000i64);
        let r = continued_fraction_round(&pi_ish, &Integer::from(120));
        assert_eq!(r, rat(355, 113));
    }
}
