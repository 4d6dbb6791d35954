//! Independently formulated two-point linear programming bound in the
//! Gegenbauer-coefficient nonnegativity form, used as a cross-check for the
//! level-1 assembly: minimize f(1) over f = Σ c_k G_k with c_k ≥ 0, c₀ = 1,
//! and f ≤ 0 on [−1, cosθ].

use std::sync::Arc;

use crate::poly::{varset, Poly};
use crate::{rat_int, MultiPoly, Rational};

use super::assemble::LinearPoly;
use super::delta::delta_generators;
use super::sos::add_sos_family;
use super::{BlockInfo, BlockKind, Constraint, MatEntry, SDPProblem, SdpError};

fn u_var() -> Arc<Vec<String>> {
    varset(&["u1"])
}

/// Gegenbauer polynomial C_k^{(n−2)/2} from the three-term recurrence, with
/// exact rational coefficients.
pub fn gegenbauer(k: u32, n: usize) -> MultiPoly {
    let vars = u_var();
    let alpha = Rational::from(((n - 2) as i64, 2));
    let u = Poly::var_idx(vars.clone(), 0);
    let mut c_prev = Poly::constant(vars.clone(), rat_int(1));
    if k == 0 {
        return c_prev;
    }
    let mut c_cur = u.scale(&(alpha.clone() * Rational::from(2)));
    for kk in 2..=k {
        let kkr = Rational::from(kk as i64);
        let a = (alpha.clone() + Rational::from(kk as i64 - 1)) * Rational::from(2) / kkr.clone();
        let b = (alpha.clone() * Rational::from(2) + Rational::from(kk as i64 - 2)) / kkr;
        let next = u.mul(&c_cur).scale(&a).sub(&c_prev.scale(&b));
        c_prev = c_cur;
        c_cur = next;
    }
    c_cur
}

/// The Delsarte bound as a small SDP: scalar blocks for the Gegenbauer
/// coefficients and two multiplier blocks for the interval constraint.
pub fn delsarte_lp(
    n: usize,
    d: u32,
    cos_theta: &Rational,
    delta: u32,
) -> Result<SDPProblem, SdpError> {
    assert!(delta % 2 == 0 && delta >= d);
    let mut problem = SDPProblem {
        spec: None,
        blocks: Vec::new(),
        constraints: Vec::new(),
        objective: Vec::new(),
    };
    let gg: Vec<MultiPoly> = (0..=d).map(|k| gegenbauer(k, n)).collect();
    for k in 0..=d {
        problem.blocks.push(BlockInfo {
            name: format!("c{k}"),
            size: 1,
            kind: BlockKind::Kernel,
        });
    }

    // f = Σ_k c_k G_k as a linear polynomial in the scalar variables
    let mut f = LinearPoly::new(1);
    for (k, g) in gg.iter().enumerate() {
        for (e, coef) in g.terms() {
            f.add_var_coeff(e.clone(), (k, 0, 0), coef.clone());
        }
    }
    let set = delta_generators(2, cos_theta);
    add_sos_family(&mut problem, &f, &set.generators(), delta, "delsarte")?;

    // c0 = 1
    problem.constraints.push(Constraint {
        entries: vec![MatEntry {
            block: 0,
            i: 0,
            j: 0,
            value: rat_int(1),
        }],
        rhs: rat_int(1),
        slack: None,
    });

    // objective: f(1) = Σ_k G_k(1) c_k
    let one = vec![rat_int(1)];
    problem.objective = (0..=d as usize)
        .map(|k| MatEntry {
            block: k,
            i: 0,
            j: 0,
            value: gg[k].eval(&one),
        })
        .collect();
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn gegenbauer_small_cases() {
        // alpha = 1 (n = 4): Chebyshev of the second kind
        let u = Poly::var_idx(u_var(), 0);
        assert_eq!(gegenbauer(0, 4), Poly::constant(u_var(), rat_int(1)));
        assert_eq!(gegenbauer(1, 4), u.scale(&rat_int(2)));
        // C2 = 4u^2 - 1
        let expect = u.pow(2).scale(&rat_int(4)).sub(&Poly::constant(u_var(), rat_int(1)));
        assert_eq!(gegenbauer(2, 4), expect);
        // alpha = 3 (n = 8): C2 = 24u^2 - 3
        let expect = u
            .pow(2)
            .scale(&rat_int(24))
            .sub(&Poly::constant(u_var(), rat_int(3)));
        assert_eq!(gegenbauer(2, 8), expect);
    }

    #[test]
    fn gegenbauer_recurrence_consistency() {
        // orthogonality surrogate: values at u = 1 equal C(k + 2a - 1, k)
        // with a = (n-2)/2, i.e. the dimension-count binomial pattern
        for n in [4usize, 6, 8] {
            for k in 0..=6u32 {
                let v = gegenbauer(k, n).eval(&[rat_int(1)]);
                let a = (n - 2) as i64;
                // C_k^{alpha}(1) = binom(k + 2 alpha - 1, k)
                let top = k as i64 + a - 1;
                let mut expect = rat_int(1);
                for i in 0..k as i64 {
                    expect *= Rational::from(top - i);
                    expect /= Rational::from(i + 1);
                }
                assert_eq!(v, expect, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn delsarte_problem_shape() {
        let p = delsarte_lp(8, 6, &rat(1, 2), 6).unwrap();
        // blocks: 7 scalars + s0 + s1
        assert_eq!(p.blocks.len(), 9);
        assert_eq!(p.blocks[7].size, 4);
        assert_eq!(p.blocks[8].size, 3);
        // constraints: 7 coefficient rows + the normalization
        assert_eq!(p.num_constraints(), 8);
    }
}
