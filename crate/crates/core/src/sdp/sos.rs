//! Sum-of-squares relaxation of polynomial nonpositivity constraints:
//! p(u) + Σ_k r_k(u) g_k(u) ≡ 0 with each multiplier r_k a Gram form over
//! the monomial basis, matched coefficient by coefficient.

use std::collections::HashMap;

use crate::poly::Poly;
use crate::{rat_int, MultiPoly, Rational};

use super::assemble::LinearPoly;
use super::{BlockInfo, BlockKind, Constraint, MatEntry, SDPProblem, SdpError, SemialgebraicSet};

/// All exponent tuples with total degree at most `deg`, graded and then
/// lexicographic; the deterministic basis order used for multiplier blocks.
pub fn monomials_up_to(nvars: usize, deg: u32) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; nvars];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[pos] = e as u16;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    if nvars == 0 {
        out.push(Vec::new());
        return out;
    }
    rec(0, deg, &mut cur, &mut out);
    out.sort_by_key(|e| {
        (
            e.iter().map(|&x| x as u32).sum::<u32>(),
            e.clone(),
        )
    });
    out
}

/// Basis of the multiplier for a generator of degree `gdeg` at total SOS
/// degree `delta`: monomials up to ⌊(δ − deg g)/2⌋.
pub fn monomial_basis(nvars: usize, delta: u32, gdeg: u32) -> Vec<Vec<u16>> {
    monomials_up_to(nvars, (delta - gdeg) / 2)
}

/// Add one SOS family (a full Putinar identity for one polynomial
/// constraint) to the problem: a PSD block per generator including the
/// implicit g₀ = 1, and one equality per monomial of degree ≤ δ. Generators
/// of degree above δ must have been filtered by the caller. Returns the
/// indices of the new constraints.
pub(super) fn add_sos_family(
    problem: &mut SDPProblem,
    p: &LinearPoly,
    generators: &[MultiPoly],
    delta: u32,
    prefix: &str,
) -> Result<Vec<usize>, SdpError> {
    let nvars = p.nvars;
    if p.degree() > delta {
        return Err(SdpError::DegreeInfeasible(format!(
            "{prefix}: polynomial degree {} exceeds delta {delta}",
            p.degree()
        )));
    }
    for g in generators {
        if g.total_degree() > delta {
            return Err(SdpError::DegreeInfeasible(format!(
                "{prefix}: generator degree {} exceeds delta {delta}",
                g.total_degree()
            )));
        }
    }

    // one block per multiplier, g0 = 1 first
    let mut gen_polys: Vec<MultiPoly> = Vec::with_capacity(generators.len() + 1);
    gen_polys.push(Poly::constant(super::delta::u_vars(uvars_q(nvars)), rat_int(1)));
    gen_polys.extend(generators.iter().cloned());

    let mut bases = Vec::new();
    let mut block_ids = Vec::new();
    for (gi, g) in gen_polys.iter().enumerate() {
        let basis = monomial_basis(nvars, delta, g.total_degree());
        let id = problem.blocks.len();
        problem.blocks.push(BlockInfo {
            name: format!("{prefix}:g{gi}"),
            size: basis.len(),
            kind: BlockKind::Sos,
        });
        block_ids.push(id);
        bases.push(basis);
    }

    // coefficient matching over every monomial of degree <= delta
    let monos = monomials_up_to(nvars, delta);
    let mono_index: HashMap<Vec<u16>, usize> =
        monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut rows: Vec<Constraint> = monos
        .iter()
        .map(|_| Constraint {
            entries: Vec::new(),
            rhs: rat_int(0),
            slack: None,
        })
        .collect();

    // multiplier contributions: entry (a,b) of block k lands on monomial
    // a + b + ν with the coefficient of ν in g_k
    for (k, g) in gen_polys.iter().enumerate() {
        let basis = &bases[k];
        for (ai, a) in basis.iter().enumerate() {
            for (bi, b) in basis.iter().enumerate().skip(ai) {
                for (nu, c) in g.terms() {
                    let target: Vec<u16> = (0..nvars)
                        .map(|v| a[v] + b[v] + nu[v])
                        .collect();
                    let Some(&row) = mono_index.get(&target) else {
                        unreachable!("product degree exceeds delta");
                    };
                    rows[row].entries.push(MatEntry {
                        block: block_ids[k],
                        i: ai,
                        j: bi,
                        value: c.clone(),
                    });
                }
            }
        }
    }

    // p contributions and right-hand sides
    for (mono, form) in p.terms() {
        let Some(&row) = mono_index.get(mono) else {
            return Err(SdpError::DegreeInfeasible(format!(
                "{prefix}: monomial of degree above delta in p"
            )));
        };
        for (&(b, i, j), c) in form.coeffs() {
            // c is the coefficient of the variable X_ij; halve off-diagonal
            // entries so the symmetric inner product reproduces it
            let value = if i == j {
                c.clone()
            } else {
                c.clone() / Rational::from(2)
            };
            rows[row].entries.push(MatEntry {
                block: b,
                i,
                j,
                value,
            });
        }
        let mut rhs = form.constant().clone();
        rhs = -rhs;
        rows[row].rhs = rhs;
    }

    // dedicated slack entries in the g0 block: split each monomial into two
    // basis halves; the pair appears in this constraint only
    let basis0 = &bases[0];
    let basis0_index: HashMap<Vec<u16>, usize> = basis0
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    for (mi, mono) in monos.iter().enumerate() {
        let (a, b) = split_monomial(mono);
        let ai = basis0_index[&a];
        let bi = basis0_index[&b];
        rows[mi].slack = Some((block_ids[0], ai.min(bi), ai.max(bi)));
    }

    let first = problem.constraints.len();
    let count = rows.len();
    problem.constraints.extend(rows);
    Ok((first..first + count).collect())
}

/// Deterministic split of a monomial into two halves of balanced degree.
fn split_monomial(mono: &[u16]) -> (Vec<u16>, Vec<u16>) {
    let total: u32 = mono.iter().map(|&x| x as u32).sum();
    let mut take = total.div_ceil(2);
    let mut a = vec![0u16; mono.len()];
    for (i, &e) in mono.iter().enumerate() {
        let t = (e as u32).min(take) as u16;
        a[i] = t;
        take -= t as u32;
        if take == 0 {
            break;
        }
    }
    let b: Vec<u16> = mono.iter().zip(a.iter()).map(|(&e, &x)| e - x).collect();
    (a, b)
}

fn uvars_q(nvars: usize) -> usize {
    // number of points whose pair count is nvars (0 → 1 point)
    match nvars {
        0 => 1,
        1 => 2,
        3 => 3,
        6 => 4,
        _ => panic!("unexpected gram variable count {nvars}"),
    }
}

/// Standalone relaxation of `p ≤ 0 on set` for a concrete polynomial: the
/// blocks and equality constraints of the identity p + Σ r_k g_k ≡ 0.
pub fn sos_relax(
    p: &MultiPoly,
    set: &SemialgebraicSet,
    delta: u32,
    symmetrize: bool,
) -> Result<SDPProblem, SdpError> {
    let nvars = p.nvars();
    let mut lp = LinearPoly::new(nvars);
    for (e, c) in p.terms() {
        lp.add_constant(e.clone(), c.clone());
    }
    let mut gens: Vec<MultiPoly> = Vec::new();
    for orbit in &set.orbits {
        if symmetrize {
            gens.extend(super::symmetrize_generators(orbit));
        } else {
            gens.extend(orbit.iter().cloned());
        }
    }
    gens.retain(|g| g.total_degree() <= delta);
    let mut problem = SDPProblem {
        spec: None,
        blocks: Vec::new(),
        constraints: Vec::new(),
        objective: Vec::new(),
    };
    add_sos_family(&mut problem, &lp, &gens, delta, "sos")?;
    Ok(problem)
}
