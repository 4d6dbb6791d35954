//! Exact certificates: each block in factored B X Bᵀ form with rational
//! entries, verified by exact affine checks and rigorous ball Cholesky.

use std::io::Write;
use std::path::Path;

use crate::sdp::{ProblemSpec, SDPProblem};
use crate::{format_rational, parse_rational, RatMatrix, Rational};

use super::chol::ball_cholesky;
use super::VerifyError;

#[derive(Clone, Debug)]
pub struct CertBlock {
    pub name: String,
    /// None means B is the identity.
    pub b: Option<RatMatrix>,
    pub x: RatMatrix,
}

impl CertBlock {
    /// The block value B X Bᵀ.
    pub fn value(&self) -> RatMatrix {
        match &self.b {
            None => self.x.clone(),
            Some(b) => b.matmul(&self.x).matmul(&b.transpose()),
        }
    }

    pub fn outer_size(&self) -> usize {
        match &self.b {
            None => self.x.nrows(),
            Some(b) => b.nrows(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactCertificate {
    pub spec: ProblemSpec,
    pub bound: Rational,
    pub blocks: Vec<CertBlock>,
}

/// Verify a certificate against the assembled problem: every affine
/// constraint must hold exactly over the rationals, every X must be
/// certified positive definite by ball Cholesky, and the claimed bound must
/// equal the objective value. Returns the certified bound.
pub fn verify_certificate(
    cert: &ExactCertificate,
    problem: &SDPProblem,
    prec: u32,
) -> Result<Rational, VerifyError> {
    if cert.blocks.len() != problem.blocks.len() {
        return Err(VerifyError::Shape(format!(
            "certificate has {} blocks, problem has {}",
            cert.blocks.len(),
            problem.blocks.len()
        )));
    }
    for (cb, pb) in cert.blocks.iter().zip(problem.blocks.iter()) {
        if cb.outer_size() != pb.size {
            return Err(VerifyError::Shape(format!(
                "block {} has size {}, expected {}",
                pb.name,
                cb.outer_size(),
                pb.size
            )));
        }
        if !cb.x.is_symmetric() {
            return Err(VerifyError::Shape(format!("block {} X not symmetric", pb.name)));
        }
    }

    let values: Vec<RatMatrix> = cert.blocks.iter().map(|b| b.value()).collect();

    for (idx, con) in problem.constraints.iter().enumerate() {
        let lhs = SDPProblem::inner_product(&con.entries, &values);
        if lhs != con.rhs {
            let mut diff = lhs;
            diff -= &con.rhs;
            return Err(VerifyError::AffineViolation {
                index: idx,
                violation: format_rational(&diff),
            });
        }
    }

    for (cb, pb) in cert.blocks.iter().zip(problem.blocks.iter()) {
        if !ball_cholesky(&cb.x, prec) {
            return Err(VerifyError::PSDUncertified {
                block: pb.name.clone(),
                prec,
            });
        }
    }

    let bound = SDPProblem::inner_product(&problem.objective, &values);
    if bound != cert.bound {
        let mut diff = bound;
        diff -= &cert.bound;
        return Err(VerifyError::Shape(format!(
            "claimed bound differs from the objective value by {}",
            format_rational(&diff)
        )));
    }
    Ok(bound)
}

pub fn write_certificate(cert: &ExactCertificate, path: &Path) -> Result<(), VerifyError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "# kisskit-certificate v1 {} bound={}",
        cert.spec.header_string(),
        format_rational(&cert.bound)
    )?;
    for blk in &cert.blocks {
        writeln!(f, "block name={}", blk.name)?;
        match &blk.b {
            None => writeln!(f, "B identity")?,
            Some(b) => {
                writeln!(f, "B rows={} cols={}", b.nrows(), b.ncols())?;
                for i in 0..b.nrows() {
                    let row: Vec<String> =
                        (0..b.ncols()).map(|j| format_rational(&b[(i, j)])).collect();
                    writeln!(f, "{}", row.join(" "))?;
                }
            }
        }
        writeln!(f, "X rows={}", blk.x.nrows())?;
        for i in 0..blk.x.nrows() {
            let row: Vec<String> = (0..blk.x.ncols())
                .map(|j| format_rational(&blk.x[(i, j)]))
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
    }
    f.flush()?;
    Ok(())
}

pub fn read_certificate(path: &Path) -> Result<ExactCertificate, VerifyError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().peekable();
    let header = lines
        .next()
        .ok_or_else(|| VerifyError::Parse("empty certificate".into()))?;
    if !header.starts_with("# kisskit-certificate v1 ") {
        return Err(VerifyError::Parse("bad certificate header".into()));
    }
    let rest = header.trim_start_matches("# kisskit-certificate v1 ");
    let bound_tok = rest
        .split_whitespace()
        .find_map(|t| t.strip_prefix("bound="))
        .ok_or_else(|| VerifyError::Parse("missing bound".into()))?;
    let bound = parse_rational(bound_tok).map_err(VerifyError::Parse)?;
    let spec = ProblemSpec::parse_header(rest).map_err(|e| VerifyError::Parse(e.to_string()))?;

    let mut blocks = Vec::new();
    while let Some(line) = lines.next() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let name = line
            .strip_prefix("block name=")
            .ok_or_else(|| VerifyError::Parse(format!("expected block line, got {line}")))?
            .to_string();
        let bline = lines
            .next()
            .ok_or_else(|| VerifyError::Parse("missing B line".into()))?
            .trim();
        let b = if bline == "B identity" {
            None
        } else {
            let (rows, cols) = parse_dims(bline, "B")?;
            Some(read_matrix(&mut lines, rows, cols)?)
        };
        let xline = lines
            .next()
            .ok_or_else(|| VerifyError::Parse("missing X line".into()))?
            .trim();
        let rows = xline
            .strip_prefix("X rows=")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| VerifyError::Parse(format!("bad X line {xline}")))?;
        let x = read_matrix(&mut lines, rows, rows)?;
        blocks.push(CertBlock { name, b, x });
    }
    Ok(ExactCertificate {
        spec,
        bound,
        blocks,
    })
}

fn parse_dims(line: &str, what: &str) -> Result<(usize, usize), VerifyError> {
    let mut rows = None;
    let mut cols = None;
    for t in line.split_whitespace().skip(1) {
        if let Some((k, v)) = t.split_once('=') {
            match k {
                "rows" => rows = v.parse().ok(),
                "cols" => cols = v.parse().ok(),
                _ => {}
            }
        }
    }
    Ok((
        rows.ok_or_else(|| VerifyError::Parse(format!("{what} missing rows")))?,
        cols.ok_or_else(|| VerifyError::Parse(format!("{what} missing cols")))?,
    ))
}

fn read_matrix<'a>(
    lines: &mut std::iter::Peekable<impl Iterator<Item = &'a str>>,
    rows: usize,
    cols: usize,
) -> Result<RatMatrix, VerifyError> {
    let mut m = RatMatrix::zeros(rows, cols);
    for i in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| VerifyError::Parse("truncated matrix".into()))?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != cols {
            return Err(VerifyError::Parse(format!(
                "matrix row has {} entries, expected {cols}",
                vals.len()
            )));
        }
        for (j, v) in vals.iter().enumerate() {
            m[(i, j)] = parse_rational(v).map_err(VerifyError::Parse)?;
        }
    }
    Ok(m)
}
