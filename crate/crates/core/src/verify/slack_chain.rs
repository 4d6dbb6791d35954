//! The bound chain for a concrete code: with K the certified kernel and C
//! an independent set, 0 ≤ Σ_{Q⊆C} A₂K(Q) ≤ K(∅,∅) − |C| holds exactly,
//! where the sum includes A₂K(∅) = K(∅,∅).

use std::path::Path;

use crate::sdp::{assemble_constraint_polys, KernelLayout};
use crate::zonal::ZonalBlock;
use crate::{rat_int, MultiPoly, RatMatrix, Rational};

use super::certificate::ExactCertificate;
use super::VerifyError;

/// Exact chain values (lower, middle, upper) with
/// middle = Σ_{Q ⊆ C, |Q| ≤ 2t} A_t K(Q) and upper = K(∅,∅) − |C|.
/// `gram` is the rational Gram matrix of the code points.
pub fn code_slack_chain(
    cert: &ExactCertificate,
    cache_dir: &Path,
    gram: &RatMatrix,
) -> Result<(Rational, Rational, Rational), VerifyError> {
    let spec = &cert.spec;
    let npts = gram.nrows();
    if gram.ncols() != npts {
        return Err(VerifyError::Shape("gram matrix not square".into()));
    }
    for i in 0..npts {
        if gram[(i, i)] != 1 {
            return Err(VerifyError::NotIndependent(format!(
                "point {i} is not a unit vector"
            )));
        }
        for j in 0..i {
            if gram[(i, j)] != gram[(j, i)] {
                return Err(VerifyError::Shape("gram matrix not symmetric".into()));
            }
            if gram[(i, j)] > spec.cos_theta {
                return Err(VerifyError::NotIndependent(format!(
                    "inner product of points {j},{i} exceeds cos theta"
                )));
            }
        }
    }

    // rebuild the constraint polynomials and instantiate at the certificate
    let kernels = crate::sdp::kernel_blocks(spec, cache_dir).map_err(VerifyError::Sdp)?;
    let refs: Vec<(KernelLayout, &ZonalBlock)> =
        kernels.iter().map(|(l, b)| (l.clone(), b)).collect();
    let polys = assemble_constraint_polys(spec, &refs);
    // kernel blocks are the leading certificate blocks, in assembly order
    let kernel_mats: Vec<RatMatrix> = kernels
        .iter()
        .map(|(layout, _)| {
            let blk = cert.blocks.get(layout.block).ok_or_else(|| {
                VerifyError::Shape("certificate missing kernel block".into())
            })?;
            Ok(blk.value())
        })
        .collect::<Result<_, VerifyError>>()?;
    let instantiated: Vec<MultiPoly> =
        polys.iter().map(|lp| lp.instantiate(&kernel_mats)).collect();

    // middle = K(∅,∅) + Σ over nonempty subsets up to size 2t
    let mut middle = cert.bound.clone();
    let qmax = (2 * spec.level as usize).min(npts);
    for q in 1..=qmax {
        for subset in k_subsets(npts, q) {
            let point = subset_gram_point(gram, &subset);
            middle += instantiated[q - 1].eval(&point);
        }
    }

    let lower = rat_int(0);
    let mut upper = cert.bound.clone();
    upper -= Rational::from(npts as i64);
    if !(lower <= middle && middle <= upper) {
        return Err(VerifyError::ChainViolated(format!(
            "0 <= {middle} <= {upper} fails"
        )));
    }
    Ok((lower, middle, upper))
}

fn subset_gram_point(gram: &RatMatrix, subset: &[usize]) -> Vec<Rational> {
    let mut point = Vec::new();
    for a in 0..subset.len() {
        for b in (a + 1)..subset.len() {
            point.push(gram[(subset[a], subset[b])].clone());
        }
    }
    point
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
