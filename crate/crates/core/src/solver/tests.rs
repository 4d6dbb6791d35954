use super::*;
use crate::sdp::{delsarte_lp, BlockInfo, BlockKind, Constraint, MatEntry, SDPProblem};
use crate::{rat, rat_int};

/// minimize x subject to [[x, 1], [1, x]] ⪰ 0: optimum 1.
fn toy_problem() -> SDPProblem {
    SDPProblem {
        spec: None,
        blocks: vec![BlockInfo {
            name: "x".into(),
            size: 2,
            kind: BlockKind::Sos,
        }],
        constraints: vec![
            Constraint {
                entries: vec![MatEntry {
                    block: 0,
                    i: 0,
                    j: 1,
                    value: rat(1, 2),
                }],
                rhs: rat_int(1),
                slack: None,
            },
            Constraint {
                entries: vec![
                    MatEntry {
                        block: 0,
                        i: 0,
                        j: 0,
                        value: rat_int(1),
                    },
                    MatEntry {
                        block: 0,
                        i: 1,
                        j: 1,
                        value: rat_int(-1),
                    },
                ],
                rhs: rat_int(0),
                slack: None,
            },
        ],
        objective: vec![MatEntry {
            block: 0,
            i: 0,
            j: 0,
            value: rat_int(1),
        }],
    }
}

#[test]
fn toy_sdp_reaches_known_optimum() {
    let cfg = SolveConfig {
        precision: 128,
        tol: 1e-25,
        ..Default::default()
    };
    let sol = solve(&toy_problem(), &cfg).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.pobj - 1.0).abs() < 1e-20, "pobj = {}", sol.pobj);
    assert!((sol.dobj - 1.0).abs() < 1e-20);
}

#[test]
fn toy_sdp_f64_path() {
    // the same solver runs in plain f64 via the scalar abstraction
    let cfg = SolveConfig {
        precision: 53,
        tol: 1e-9,
        ..Default::default()
    };
    let sol = solve_generic::<f64>(&toy_problem(), &cfg).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.pobj - 1.0).abs() < 1e-7);
}

#[test]
fn margin_mode_above_optimum_is_strictly_feasible() {
    let cfg = SolveConfig {
        precision: 128,
        tol: 1e-20,
        ..Default::default()
    };
    let sol = solve_feasibility_margin(&toy_problem(), &rat(101, 100), &cfg).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    let margin = sol.margin.unwrap();
    assert!(margin > 1e-4, "margin {margin} not positive");
    // check strict feasibility directly: X - margin/2 I still factors
    for xb in &sol.x {
        let shifted = crate::mat::Mat::from_fn(xb.nrows(), xb.ncols(), |i, j| {
            let mut v = xb[(i, j)].clone();
            if i == j {
                v -= &crate::bigfloat::MpFloat::with_prec(128, margin / 2.0);
            }
            v
        });
        assert!(linalg::cholesky(&shifted, 128).is_some());
    }
    // and the pinned objective is met
    assert!((sol.x[0][(0, 0)].to_f64() - 1.01).abs() < 1e-9);
}

#[test]
fn margin_mode_below_optimum_is_infeasible() {
    let cfg = SolveConfig {
        precision: 128,
        tol: 1e-20,
        max_iterations: 200,
        ..Default::default()
    };
    let sol = solve_feasibility_margin(&toy_problem(), &rat(99, 100), &cfg).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
}

#[test]
fn doubling_precision_does_not_worsen_gap() {
    // run past the achievable gap at 128 bits; 256 bits must do at least
    // as well on the same instance
    let run = |prec: u32| {
        let cfg = SolveConfig {
            precision: prec,
            tol: 1e-60,
            max_iterations: 60,
            ..Default::default()
        };
        solve(&toy_problem(), &cfg).unwrap().rel_gap.abs()
    };
    let g128 = run(128);
    let g256 = run(256);
    assert!(
        g256 <= g128 * 1.01 + 1e-70,
        "gap got worse: 128 bits {g128:e}, 256 bits {g256:e}"
    );
}

#[test]
fn delsarte_dimension_eight_is_sharp() {
    // the two-point bound at degree 6 in dimension 8 is exactly 240
    let problem = delsarte_lp(8, 6, &rat(1, 2), 6).unwrap();
    let cfg = SolveConfig {
        precision: 192,
        tol: 1e-25,
        ..Default::default()
    };
    let sol = solve(&problem, &cfg).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(
        (sol.pobj - 240.0).abs() < 1e-6,
        "delsarte(8,6) = {}",
        sol.pobj
    );
}

#[test]
fn delsarte_dimension_four_degree_ten() {
    let problem = delsarte_lp(4, 10, &rat(1, 2), 10).unwrap();
    let cfg = SolveConfig {
        precision: 192,
        tol: 1e-25,
        ..Default::default()
    };
    let sol = solve(&problem, &cfg).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(
        sol.pobj >= 25.0 && sol.pobj < 26.0,
        "delsarte(4,10) = {}",
        sol.pobj
    );
}
