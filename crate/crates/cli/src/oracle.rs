//! The validation suites: exact Haar moments against Monte Carlo, the
//! brute-force zonal oracle against the symmetry-reduced path, and the
//! numeric kernel oracle against the polynomial entries.

use anyhow::{anyhow, bail, Result};
use rand::prelude::*;

use kisskit_core::glrep::Signature;
use kisskit_core::haar::{integrate_monomial, mc_estimate, MonomialExponent};
use kisskit_core::zonal::{self, AdmissibleTuple};

pub fn cmd_oracle(
    suite: &str,
    max_degree: Option<u32>,
    dims: Option<&str>,
    samples: Option<usize>,
    seed: Option<u64>,
    cases: Option<usize>,
) -> Result<()> {
    let dims: Vec<usize> = match dims {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| anyhow!("bad dimension {t}")))
            .collect::<Result<_>>()?,
        None => vec![4, 5],
    };
    let samples = samples.unwrap_or(100_000);
    let seed = seed.unwrap_or(0xD4);
    let max_degree = max_degree.unwrap_or(4);
    let cases = cases.unwrap_or(50);

    let mut checks = 0usize;
    if suite == "haar" || suite == "all" {
        checks += haar_suite(&dims, samples, seed, cases)?;
    }
    if suite == "zonal" || suite == "all" {
        checks += zonal_suite(&dims, max_degree)?;
        checks += zonal_numeric_suite(samples / 2, seed)?;
    }
    if checks == 0 {
        bail!("unknown suite {suite}; expected zonal, haar, or all");
    }
    println!("RESULT command=oracle suite={suite} pass=1 checks={checks}");
    Ok(())
}

/// Random even-degree monomials: the exact integral must sit within five
/// standard errors of the Monte Carlo mean, and odd-line monomials must be
/// exactly zero.
fn haar_suite(dims: &[usize], samples: usize, seed: u64, cases: usize) -> Result<usize> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0;
    for &n in dims {
        for case in 0..cases {
            let k = rng.gen_range(1..=3usize);
            let mut a = MonomialExponent::zeros(k, k);
            // random exponents of total degree at most 8
            let mut budget = 8u32;
            while budget > 0 {
                let e = rng.gen_range(1..=budget.min(3));
                let (i, j) = (rng.gen_range(0..k), rng.gen_range(0..k));
                a.set(i, j, a.get(i, j) + e);
                budget -= e;
                if rng.gen_bool(0.3) {
                    break;
                }
            }
            let exact = integrate_monomial(n, &a).map_err(|e| anyhow!(e.to_string()))?;
            if a.has_odd_line() {
                if exact != 0 {
                    bail!("odd-line monomial integrated to {exact} (n={n}, case {case})");
                }
            } else {
                let (mean, err) = mc_estimate(n, &a, samples, seed.wrapping_add(case as u64));
                let exact_f = exact.to_f64();
                if (mean - exact_f).abs() > 5.0 * err.max(1e-12) {
                    bail!(
                        "haar mismatch at n={n} case {case}: exact {exact_f}, mc {mean} +/- {err}"
                    );
                }
            }
            checks += 1;
        }
    }
    Ok(checks)
}

/// Exact equality of the symmetry-reduced and brute-force polynomials for
/// every signature and index pair in range.
fn zonal_suite(dims: &[usize], max_degree: u32) -> Result<usize> {
    use rayon::prelude::*;
    let mut jobs = Vec::new();
    for &n in dims {
        for lam in Signature::all_up_to(max_degree) {
            for k1 in 0..=lam.m() {
                for k2 in 0..=lam.m() {
                    jobs.push((n, lam, k1, k2));
                }
            }
        }
    }
    let failures: Vec<String> = jobs
        .par_iter()
        .filter_map(|&(n, lam, k1, k2)| {
            let fast = zonal::compute_p(lam, k1, k2, n);
            let brute = zonal::brute_force_p(lam, k1, k2, n);
            match (fast, brute) {
                (Ok(f), Ok(b)) => {
                    if f == b {
                        None
                    } else {
                        Some(format!("{lam} k1={k1} k2={k2} n={n}: polynomials differ"))
                    }
                }
                (Err(e), _) | (_, Err(e)) => Some(format!("{lam} n={n}: {e}")),
            }
        })
        .collect();
    if !failures.is_empty() {
        bail!("zonal oracle failures:\n{}", failures.join("\n"));
    }
    Ok(jobs.len())
}

/// Spot checks of zonal entries against the Monte Carlo estimate of the
/// defining integral at random point sets.
fn zonal_numeric_suite(samples: usize, seed: u64) -> Result<usize> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = 4;
    let cases: Vec<(Signature, AdmissibleTuple, AdmissibleTuple)> = vec![
        (
            Signature::new(1, 0),
            AdmissibleTuple::new(1, 0, 0),
            AdmissibleTuple::new(2, 1, 0),
        ),
        (
            Signature::new(2, 0),
            AdmissibleTuple::new(2, 0, 2),
            AdmissibleTuple::new(2, 0, 0),
        ),
        (
            Signature::new(2, 1),
            AdmissibleTuple::new(2, 0, 1),
            AdmissibleTuple::new(2, 0, 1),
        ),
        (
            Signature::new(3, 1),
            AdmissibleTuple::new(2, 0, 1),
            AdmissibleTuple::new(2, 1, 1),
        ),
    ];
    for (lam, row, col) in &cases {
        let pts = |count: u8, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..n)
                        .map(|_| rng.sample::<f64, _>(rand_distr_standard()))
                        .collect();
                    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / norm).collect()
                })
                .collect()
        };
        let j1 = pts(row.i, &mut rng);
        let j2 = pts(col.i, &mut rng);
        let poly = zonal::zonal_entry(*lam, *row, *col, n).map_err(|e| anyhow!(e.to_string()))?;
        let point = gram_point(&j1, &j2);
        let exact: f64 = poly.map_coeffs(|c| c.to_f64()).eval(&point);
        let (mean, err) =
            zonal::numeric_zonal_oracle(*lam, *row, *col, &j1, &j2, n, samples, seed);
        if (mean - exact).abs() > 5.0 * err.max(1e-4) {
            bail!("numeric zonal mismatch at {lam} {row}x{col}: poly {exact}, mc {mean} +/- {err}");
        }
    }
    Ok(cases.len())
}

fn rand_distr_standard() -> rand_distr::StandardNormal {
    rand_distr::StandardNormal
}

fn gram_point(j1: &[Vec<f64>], j2: &[Vec<f64>]) -> Vec<f64> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
    let ip = |a: Option<&Vec<f64>>, b: Option<&Vec<f64>>| match (a, b) {
        (Some(x), Some(y)) => dot(x, y),
        _ => 0.0,
    };
    vec![
        ip(j1.first(), j1.get(1)),
        ip(j2.first(), j2.get(1)),
        ip(j1.first(), j2.first()),
        ip(j1.first(), j2.get(1)),
        ip(j1.get(1), j2.first()),
        ip(j1.get(1), j2.get(1)),
    ]
}
