use kisskit_core::sdp::{self, AssembleOptions, ProblemSpec};
use kisskit_core::solver::{self, SolveConfig};
use kisskit_core::rat;

fn main() {
    let cache = std::path::Path::new("/tmp/kk-probe-cache");
    for (n, d) in [(4usize, 6u32), (4, 8)] {
        let lp = sdp::delsarte_lp(n, d, &rat(1, 2), d).unwrap();
        let cfg = SolveConfig { precision: 192, tol: 1e-20, ..Default::default() };
        let s = solver::solve(&lp, &cfg).unwrap();
        eprintln!("delsarte({n},{d}) = {:.9} [{}]", s.pobj, s.status);
    }
    // level-1 kernel SDP at degree 6 for comparison
    let spec = ProblemSpec { n: 4, cos_theta: rat(1, 2), level: 1, d1: 6, d2: 6, delta: 6 };
    let p = sdp::assemble(&spec, cache, AssembleOptions::default()).unwrap();
    let s = solver::solve(&p, &SolveConfig { precision: 192, tol: 1e-20, ..Default::default() }).unwrap();
    eprintln!("level-1 kernel (4,6) = {:.9} [{}]", s.pobj, s.status);
}
