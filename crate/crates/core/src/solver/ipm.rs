//! The interior-point iteration: infeasible-start Mehrotra
//! predictor-corrector with the HKM search direction, a dense Schur
//! complement, and Cholesky-bisection step lengths at 0.9 of the distance
//! to the cone boundary.

use rayon::prelude::*;

use crate::mat::Mat;
use crate::scalar::Real;
use crate::sdp::SDPProblem;

use super::linalg::*;
use super::{PrimalDualSolution, SolveConfig, SolverError, Status};

/// One constraint's entries in one block, expanded to both triangles so a
/// term (p, q, v) means the matrix has value v at (p, q).
struct SparseBlock<R> {
    full: Vec<(usize, usize, R)>,
    upper: Vec<(usize, usize, R)>,
}

struct Data<R> {
    sizes: Vec<usize>,
    c: Vec<Mat<R>>,
    b: Vec<R>,
    // a[i][slot] = (block, sparse entries)
    a: Vec<Vec<(usize, SparseBlock<R>)>>,
    // per block: list of (constraint, slot) touching it
    touching: Vec<Vec<(usize, usize)>>,
    total_dim: usize,
}

fn convert<R: Real>(problem: &SDPProblem, prec: u32) -> Data<R> {
    let sizes: Vec<usize> = problem.blocks.iter().map(|b| b.size).collect();
    let mut c: Vec<Mat<R>> = sizes.iter().map(|&s| Mat::zeros(s, s)).collect();
    for e in &problem.objective {
        let v = R::from_rational_prec(&e.value, prec);
        c[e.block][(e.i, e.j)] = v.clone();
        if e.i != e.j {
            c[e.block][(e.j, e.i)] = v;
        }
    }
    let b: Vec<R> = problem
        .constraints
        .iter()
        .map(|con| R::from_rational_prec(&con.rhs, prec))
        .collect();
    let mut a = Vec::with_capacity(problem.constraints.len());
    let mut touching: Vec<Vec<(usize, usize)>> = vec![Vec::new(); sizes.len()];
    for (ci, con) in problem.constraints.iter().enumerate() {
        let mut per_block: std::collections::BTreeMap<usize, Vec<(usize, usize, R)>> =
            std::collections::BTreeMap::new();
        for e in &con.entries {
            per_block.entry(e.block).or_default().push((
                e.i,
                e.j,
                R::from_rational_prec(&e.value, prec),
            ));
        }
        let mut slots = Vec::new();
        for (block, upper) in per_block {
            let mut full = Vec::with_capacity(upper.len() * 2);
            for (i, j, v) in &upper {
                full.push((*i, *j, v.clone()));
                if i != j {
                    full.push((*j, *i, v.clone()));
                }
            }
            touching[block].push((ci, slots.len()));
            slots.push((block, SparseBlock { full, upper }));
        }
        a.push(slots);
    }
    Data {
        total_dim: sizes.iter().sum(),
        sizes,
        c,
        b,
        a,
        touching,
    }
}

fn dot_sparse<R: Real>(s: &SparseBlock<R>, m: &Mat<R>, prec: u32) -> R {
    let mut acc = R::zero_prec(prec);
    for (i, j, v) in &s.upper {
        let mut t = v.clone();
        if i == j {
            t *= &m[(*i, *j)];
        } else {
            let mut sum = m[(*i, *j)].clone();
            sum += &m[(*j, *i)];
            t *= &sum;
        }
        acc += &t;
    }
    acc
}

fn a_dot_x<R: Real>(data: &Data<R>, i: usize, x: &[Mat<R>], prec: u32) -> R {
    let mut acc = R::zero_prec(prec);
    for (block, s) in &data.a[i] {
        acc += &dot_sparse(s, &x[*block], prec);
    }
    acc
}

/// Largest step in (0, cap] keeping X + αΔX positive definite, found by
/// Cholesky bisection.
fn max_step<R: Real>(x: &Mat<R>, dx: &Mat<R>, cap: f64, prec: u32) -> f64 {
    let try_alpha = |alpha: f64| -> bool {
        let a = R::from_f64_prec(alpha, prec);
        let mut m = x.clone();
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                let mut t = dx[(i, j)].clone();
                t *= &a;
                m[(i, j)] += &t;
            }
        }
        cholesky(&m, prec).is_some()
    };
    if try_alpha(cap) {
        return cap;
    }
    let mut lo = 0.0;
    let mut hi = cap;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if try_alpha(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn solve_generic<R: Real + Send + Sync>(
    problem: &SDPProblem,
    cfg: &SolveConfig,
) -> Result<PrimalDualSolution, SolverError> {
    let prec = cfg.precision;
    let data = convert::<R>(problem, prec);
    let m = data.b.len();
    let nb = data.sizes.len();

    let b_scale = data.b.iter().map(|v| v.to_f64().abs()).fold(1.0, f64::max);
    let data_scale = data
        .a
        .iter()
        .flat_map(|slots| slots.iter())
        .flat_map(|(_, s)| s.upper.iter())
        .map(|(_, _, v)| v.to_f64().abs())
        .fold(1.0, f64::max)
        .max(data.c.iter().map(max_abs).fold(1.0, f64::max));
    let omega_p = cfg.init_scale.unwrap_or(10.0 * b_scale.max(1.0));
    let omega_d = cfg.init_scale.unwrap_or(10.0 * data_scale.max(1.0));

    let mut x: Vec<Mat<R>> = data
        .sizes
        .iter()
        .map(|&s| scaled_identity::<R>(s, omega_p, prec))
        .collect();
    let mut z: Vec<Mat<R>> = data
        .sizes
        .iter()
        .map(|&s| scaled_identity::<R>(s, omega_d, prec))
        .collect();
    let mut y: Vec<R> = (0..m).map(|_| R::zero_prec(prec)).collect();

    let mut stall_count = 0usize;
    let mut status = Status::IterationLimit;
    let mut iterations = 0usize;

    for iter in 0..cfg.max_iterations {
        iterations = iter + 1;

        // residuals
        let rp: Vec<R> = (0..m)
            .map(|i| {
                let mut v = data.b[i].clone();
                v -= &a_dot_x(&data, i, &x, prec);
                v
            })
            .collect();
        let rd: Vec<Mat<R>> = (0..nb)
            .map(|bi| {
                let mut r = data.c[bi].clone();
                r = r.sub(&z[bi]);
                r
            })
            .collect();
        let mut rd = rd;
        for (i, yi) in y.iter().enumerate() {
            for (block, s) in &data.a[i] {
                for (p, q, v) in &s.full {
                    let mut t = v.clone();
                    t *= yi;
                    rd[*block][(*p, *q)] -= &t;
                }
            }
        }

        // objective values and convergence measures
        let pobj: R = {
            let mut acc = R::zero_prec(prec);
            for bi in 0..nb {
                acc += &trace_product(&data.c[bi], &x[bi], prec);
            }
            acc
        };
        let dobj: R = {
            let mut acc = R::zero_prec(prec);
            for i in 0..m {
                let mut t = data.b[i].clone();
                t *= &y[i];
                acc += &t;
            }
            acc
        };
        let gap: R = {
            let mut acc = R::zero_prec(prec);
            for bi in 0..nb {
                acc += &trace_product(&x[bi], &z[bi], prec);
            }
            acc
        };
        // weak duality with infeasibility slack:
        // pobj − dobj = ⟨X,Z⟩ + ⟨Rd,X⟩ − y·Rp, and ⟨X,Z⟩ > 0 on the cone
        debug_assert!(gap.to_f64() > 0.0, "interior iterate lost positivity");
        {
            let mut slack = 0.0f64;
            for bi in 0..nb {
                slack += trace_product(&rd[bi], &x[bi], prec).to_f64().abs();
            }
            for i in 0..m {
                slack += (rp[i].to_f64() * y[i].to_f64()).abs();
            }
            let diff = pobj.to_f64() - dobj.to_f64();
            assert!(
                diff >= -slack * (1.0 + 1e-6) - 1e-300,
                "weak duality violated beyond infeasibility slack: {diff} < -{slack}"
            );
        }

        let pobj_f = pobj.to_f64();
        let dobj_f = dobj.to_f64();
        let rel_gap = gap.to_f64() / (1.0 + pobj_f.abs() + dobj_f.abs());
        let rp_norm = rp.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
        let rd_norm = rd.iter().map(max_abs).fold(0.0, f64::max);
        let feas_scale = 1.0 + b_scale;
        if cfg.verbose {
            eprintln!(
                "iter {iter:3}  pobj {pobj_f:+.9e}  dobj {dobj_f:+.9e}  gap {rel_gap:.3e}  rp {rp_norm:.3e}  rd {rd_norm:.3e}"
            );
        }
        if rel_gap <= cfg.tol
            && rp_norm <= cfg.tol * feas_scale
            && rd_norm <= cfg.tol * (1.0 + data_scale)
        {
            status = Status::Optimal;
            return finish(status, x, y, z, pobj_f, dobj_f, rel_gap, rp_norm, rd_norm, iterations);
        }
        // divergence heuristic for infeasible problems
        if dobj_f > 1e10 * (1.0 + b_scale) && rp_norm > cfg.tol * feas_scale {
            status = Status::Infeasible;
            return finish(status, x, y, z, pobj_f, dobj_f, rel_gap, rp_norm, rd_norm, iterations);
        }

        // factor Z and X per block
        let lz: Vec<Mat<R>> = z
            .par_iter()
            .map(|zb| cholesky(zb, prec).ok_or(()))
            .collect::<Result<_, _>>()
            .map_err(|_| SolverError::Breakdown("Z lost positive definiteness".into()))?;
        let zinv: Vec<Mat<R>> = lz.par_iter().map(|l| inverse_from_chol(l)).collect();

        // Schur complement M_ij = tr(A_i Z⁻¹ A_j X)
        let mut schur: Vec<Vec<R>> = vec![Vec::new(); m];
        {
            let cols: Vec<Vec<(usize, R)>> = (0..m)
                .into_par_iter()
                .map(|j| {
                    let mut col: Vec<(usize, R)> = Vec::new();
                    // U_j = Z⁻¹ A_j X per block, then contract with A_i
                    let mut contrib: std::collections::HashMap<usize, R> =
                        std::collections::HashMap::new();
                    for (block, s) in &data.a[j] {
                        let bs = data.sizes[*block];
                        // W = A_j X is nonzero only on the rows A_j touches
                        let mut touched: Vec<usize> =
                            s.full.iter().map(|(p, _, _)| *p).collect();
                        touched.sort_unstable();
                        touched.dedup();
                        let mut w_rows: Vec<(usize, Vec<R>)> = touched
                            .iter()
                            .map(|&p| (p, vec![R::zero_prec(prec); bs]))
                            .collect();
                        for (p, q, v) in &s.full {
                            let slot = touched.binary_search(p).unwrap();
                            let row = &mut w_rows[slot].1;
                            for c in 0..bs {
                                let mut t = v.clone();
                                t *= &x[*block][(*q, c)];
                                row[c] += &t;
                            }
                        }
                        // U_j = Z⁻¹ W through the sparse rows of W
                        let mut u = Mat::<R>::zeros(bs, bs);
                        for (p, wrow) in &w_rows {
                            for a in 0..bs {
                                let z = &zinv[*block][(a, *p)];
                                for (c, wc) in wrow.iter().enumerate() {
                                    let mut t = z.clone();
                                    t *= wc;
                                    u[(a, c)] += &t;
                                }
                            }
                        }
                        for &(i, slot) in &data.touching[*block] {
                            if i < j {
                                continue;
                            }
                            let (_, si) = &data.a[i][slot];
                            let mut acc = R::zero_prec(prec);
                            for (p, q, v) in &si.full {
                                let mut t = v.clone();
                                t *= &u[(*q, *p)];
                                acc += &t;
                            }
                            let e = contrib.entry(i).or_insert_with(|| R::zero_prec(prec));
                            *e += &acc;
                        }
                    }
                    for (i, v) in contrib {
                        col.push((i, v));
                    }
                    col
                })
                .collect();
            for (j, col) in cols.into_iter().enumerate() {
                let mut dense = vec![R::zero_prec(prec); m - j];
                for (i, v) in col {
                    dense[i - j] = v;
                }
                schur[j] = dense;
            }
        }
        let schur_mat = Mat::from_fn(m, m, |i, j| {
            let (lo, hi) = (i.min(j), i.max(j));
            schur[lo][hi - lo].clone()
        });
        let lm = cholesky(&schur_mat, prec).ok_or_else(|| {
            SolverError::Breakdown("Schur complement not positive definite".into())
        })?;

        let mu = {
            let mut g = gap.clone();
            let nn = R::from_i64(data.total_dim as i64);
            g /= &nn;
            g
        };

        // one direction solve for a given sigma and corrector term
        let direction = |sigma: &R,
                         corr: Option<(&Vec<Mat<R>>, &Vec<Mat<R>>)>|
         -> (Vec<R>, Vec<Mat<R>>, Vec<Mat<R>>) {
            // Rc' = σμ I − X Z − ΔX_aff ΔZ_aff
            let rc: Vec<Mat<R>> = (0..nb)
                .into_par_iter()
                .map(|bi| {
                    let bs = data.sizes[bi];
                    let mut r = x[bi].matmul(&z[bi]);
                    for p in 0..bs {
                        for q in 0..bs {
                            r[(p, q)] = -r[(p, q)].clone();
                        }
                    }
                    let mut sm = sigma.clone();
                    sm *= &mu;
                    for d in 0..bs {
                        r[(d, d)] += &sm;
                    }
                    if let Some((dxa, dza)) = corr {
                        let prod = dxa[bi].matmul(&dza[bi]);
                        r = r.sub(&prod);
                    }
                    r
                })
                .collect();
            // rhs_i = Rp_i − ⟨A_i, Rc'Z⁻¹⟩ + ⟨A_i, X Rd Z⁻¹⟩
            let hmats: Vec<Mat<R>> = (0..nb)
                .into_par_iter()
                .map(|bi| {
                    let rcz = rc[bi].matmul(&zinv[bi]);
                    let xrdz = x[bi].matmul(&rd[bi]).matmul(&zinv[bi]);
                    rcz.sub(&xrdz)
                })
                .collect();
            let rhs_vec: Vec<R> = (0..m)
                .into_par_iter()
                .map(|i| {
                    let mut v = rp[i].clone();
                    for (block, s) in &data.a[i] {
                        let mut t = R::zero_prec(prec);
                        for (p, q, val) in &s.full {
                            let mut u = val.clone();
                            u *= &hmats[*block][(*q, *p)];
                            t += &u;
                        }
                        v -= &t;
                    }
                    v
                })
                .collect();
            let rhs_mat = Mat::from_fn(m, 1, |i, _| rhs_vec[i].clone());
            let dy_mat = chol_solve(&lm, &rhs_mat);
            let dy: Vec<R> = (0..m).map(|i| dy_mat[(i, 0)].clone()).collect();
            // ΔZ = Rd − A*(Δy)
            let mut dz: Vec<Mat<R>> = rd.clone();
            for i in 0..m {
                for (block, s) in &data.a[i] {
                    for (p, q, v) in &s.full {
                        let mut t = v.clone();
                        t *= &dy[i];
                        dz[*block][(*p, *q)] -= &t;
                    }
                }
            }
            // ΔX = (Rc' − X ΔZ) Z⁻¹, symmetrized
            let dx: Vec<Mat<R>> = (0..nb)
                .into_par_iter()
                .map(|bi| {
                    let xdz = x[bi].matmul(&dz[bi]);
                    let raw = rc[bi].sub(&xdz).matmul(&zinv[bi]);
                    symmetrize(&raw)
                })
                .collect();
            (dy, dx, dz)
        };

        // predictor
        let zero_sigma = R::zero_prec(prec);
        let (_, dx_aff, dz_aff) = direction(&zero_sigma, None);
        let alpha_p_aff = x
            .par_iter()
            .zip(dx_aff.par_iter())
            .map(|(xb, dxb)| max_step(xb, dxb, 1.0, prec))
            .reduce(|| 1.0, f64::min);
        let alpha_d_aff = z
            .par_iter()
            .zip(dz_aff.par_iter())
            .map(|(zb, dzb)| max_step(zb, dzb, 1.0, prec))
            .reduce(|| 1.0, f64::min);
        // Mehrotra sigma from the affine gap
        let gap_aff = {
            let ap = R::from_f64_prec(alpha_p_aff, prec);
            let ad = R::from_f64_prec(alpha_d_aff, prec);
            let mut acc = R::zero_prec(prec);
            for bi in 0..nb {
                let xa = step_matrix(&x[bi], &dx_aff[bi], &ap);
                let za = step_matrix(&z[bi], &dz_aff[bi], &ad);
                acc += &trace_product(&xa, &za, prec);
            }
            acc
        };
        let ratio = (gap_aff.to_f64() / gap.to_f64()).clamp(1e-12, 1.0);
        let sigma = R::from_f64_prec(ratio.powi(3), prec);

        // corrector
        let (dy, dx, dz) = direction(&sigma, Some((&dx_aff, &dz_aff)));
        let alpha_p = 0.9
            * x.par_iter()
                .zip(dx.par_iter())
                .map(|(xb, dxb)| max_step(xb, dxb, 1.0 / 0.9, prec))
                .reduce(|| 1.0 / 0.9, f64::min);
        let alpha_d = 0.9
            * z.par_iter()
                .zip(dz.par_iter())
                .map(|(zb, dzb)| max_step(zb, dzb, 1.0 / 0.9, prec))
                .reduce(|| 1.0 / 0.9, f64::min);

        if alpha_p < 1e-10 && alpha_d < 1e-10 {
            stall_count += 1;
            if stall_count >= 3 {
                status = Status::Stalled;
                return finish(
                    status, x, y, z, pobj_f, dobj_f, rel_gap, rp_norm, rd_norm, iterations,
                );
            }
        } else {
            stall_count = 0;
        }

        let ap = R::from_f64_prec(alpha_p, prec);
        let ad = R::from_f64_prec(alpha_d, prec);
        for bi in 0..nb {
            x[bi] = step_matrix(&x[bi], &dx[bi], &ap);
            z[bi] = step_matrix(&z[bi], &dz[bi], &ad);
        }
        for i in 0..m {
            let mut t = dy[i].clone();
            t *= &ad;
            y[i] += &t;
        }
    }

    // iteration limit: recompute final measures
    let rp_norm = (0..m)
        .map(|i| {
            let mut v = data.b[i].clone();
            v -= &a_dot_x(&data, i, &x, prec);
            v.to_f64().abs()
        })
        .fold(0.0, f64::max);
    let mut gap = 0.0;
    let mut pobj = 0.0;
    let mut dobj = 0.0;
    for bi in 0..nb {
        gap += trace_product(&x[bi], &z[bi], prec).to_f64();
        pobj += trace_product(&data.c[bi], &x[bi], prec).to_f64();
    }
    for i in 0..m {
        dobj += data.b[i].to_f64() * y[i].to_f64();
    }
    let rel_gap = gap / (1.0 + pobj.abs() + dobj.abs());
    finish(status, x, y, z, pobj, dobj, rel_gap, rp_norm, f64::NAN, iterations)
}

fn scaled_identity<R: Real>(s: usize, omega: f64, prec: u32) -> Mat<R> {
    let mut m = Mat::<R>::zeros(s, s);
    for d in 0..s {
        m[(d, d)] = R::from_f64_prec(omega, prec);
    }
    m
}

fn step_matrix<R: Real>(x: &Mat<R>, dx: &Mat<R>, alpha: &R) -> Mat<R> {
    let mut out = x.clone();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            let mut t = dx[(i, j)].clone();
            t *= alpha;
            out[(i, j)] += &t;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn finish<R: Real>(
    status: Status,
    x: Vec<Mat<R>>,
    y: Vec<R>,
    z: Vec<Mat<R>>,
    pobj: f64,
    dobj: f64,
    rel_gap: f64,
    primal_residual: f64,
    dual_residual: f64,
    iterations: usize,
) -> Result<PrimalDualSolution, SolverError> {
    let conv_mat = |v: Vec<Mat<R>>| -> Vec<crate::FloatMatrix> {
        v.into_iter().map(|m| m.map(|e| e.to_mpfloat())).collect()
    };
    let x = conv_mat(x);
    let z = conv_mat(z);
    let y = y.into_iter().map(|v| v.to_mpfloat()).collect();
    Ok(PrimalDualSolution {
        status,
        x,
        y,
        z,
        pobj,
        dobj,
        rel_gap,
        primal_residual,
        dual_residual,
        iterations,
        margin: None,
    })
}
