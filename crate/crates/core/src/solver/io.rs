//! Solution files: a summary header followed by each block's lower triangle
//! in decimal at full working precision.

use std::io::Write;
use std::path::Path;

use crate::sdp::rational_to_decimal;
use crate::{RatMatrix, Rational};

use super::{PrimalDualSolution, SolverError, Status};

pub fn write_solution(sol: &PrimalDualSolution, path: &Path) -> Result<(), SolverError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "# kisskit-solution v1 status={} pobj={:e} dobj={:e} relgap={:e} rp={:e} rd={:e} iterations={}{}",
        sol.status,
        sol.pobj,
        sol.dobj,
        sol.rel_gap,
        sol.primal_residual,
        sol.dual_residual,
        sol.iterations,
        match sol.margin {
            Some(m) => format!(" margin={m:e}"),
            None => String::new(),
        }
    )?;
    for (bi, xb) in sol.x.iter().enumerate() {
        writeln!(f, "block {} size {}", bi, xb.nrows())?;
        for i in 0..xb.nrows() {
            let row: Vec<String> = (0..=i)
                .map(|j| {
                    // binary floats are dyadic, so the expansion terminates
                    let q = xb[(i, j)].to_rational();
                    rational_to_decimal(&q, 2000)
                })
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
    }
    f.flush()?;
    Ok(())
}

pub struct SolutionFile {
    pub status: Status,
    pub margin: Option<f64>,
    pub rel_gap: f64,
    /// Exact rational values of the stored decimals, symmetric blocks.
    pub x: Vec<RatMatrix>,
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, SolverError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SolverError::Parse("empty solution file".into()))?;
    if !header.starts_with("# kisskit-solution v1") {
        return Err(SolverError::Parse("bad solution header".into()));
    }
    let mut status = Status::IterationLimit;
    let mut margin = None;
    let mut rel_gap = f64::NAN;
    for tok in header.split_whitespace() {
        if let Some((k, v)) = tok.split_once('=') {
            match k {
                "status" => {
                    status = match v {
                        "optimal" => Status::Optimal,
                        "stalled" => Status::Stalled,
                        "infeasible" => Status::Infeasible,
                        _ => Status::IterationLimit,
                    }
                }
                "margin" => margin = v.parse().ok(),
                "relgap" => rel_gap = v.parse().unwrap_or(f64::NAN),
                _ => {}
            }
        }
    }
    let mut x = Vec::new();
    let mut lines = lines.peekable();
    while let Some(line) = lines.next() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "block" {
            return Err(SolverError::Parse(format!("expected block line, got {line}")));
        }
        let size: usize = toks[3]
            .parse()
            .map_err(|_| SolverError::Parse("bad block size".into()))?;
        let mut m = RatMatrix::zeros(size, size);
        for i in 0..size {
            let row = lines
                .next()
                .ok_or_else(|| SolverError::Parse("truncated block".into()))?;
            let vals: Vec<&str> = row.split_whitespace().collect();
            if vals.len() != i + 1 {
                return Err(SolverError::Parse("bad row length".into()));
            }
            for (j, v) in vals.iter().enumerate() {
                let q = parse_decimal(v)?;
                m[(i, j)] = q.clone();
                m[(j, i)] = q;
            }
        }
        x.push(m);
    }
    Ok(SolutionFile {
        status,
        margin,
        rel_gap,
        x,
    })
}

fn parse_decimal(s: &str) -> Result<Rational, SolverError> {
    crate::sdp::decimal_to_rational(s).map_err(|e| SolverError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigfloat::MpFloat;
    use crate::FloatMatrix;

    #[test]
    fn solution_round_trip() {
        let x = vec![
            FloatMatrix::from_fn(2, 2, |i, j| {
                MpFloat::from_rational(&crate::rat((i + j) as i64 + 1, 7), 256)
            }),
            FloatMatrix::from_fn(1, 1, |_, _| MpFloat::with_prec(256, 0.5)),
        ];
        let sol = PrimalDualSolution {
            status: Status::Optimal,
            x,
            y: vec![],
            z: vec![],
            pobj: 1.0,
            dobj: 1.0,
            rel_gap: 1e-31,
            primal_residual: 1e-31,
            dual_residual: 1e-31,
            iterations: 10,
            margin: Some(0.25),
        };
        let path = std::env::temp_dir().join(format!("kisskit-sol-{}", std::process::id()));
        write_solution(&sol, &path).unwrap();
        let back = read_solution(&path).unwrap();
        assert_eq!(back.status, Status::Optimal);
        assert_eq!(back.margin, Some(0.25));
        assert_eq!(back.x.len(), 2);
        // round trip is exact: stored floats are dyadic rationals
        assert_eq!(back.x[0][(0, 1)], sol.x[0][(0, 1)].to_rational());
        assert_eq!(back.x[1][(0, 0)], crate::rat(1, 2));
        std::fs::remove_file(&path).ok();
    }
}
