//! SDPA sparse format: header lines with the constraint count, block count,
//! block-size list, and right-hand-side vector, then entry lines
//! `matno blkno i j value` with i ≤ j and one-based indices; matrix zero is
//! the objective.

use std::io::Write;
use std::path::Path;

use crate::{rat_int, Integer, Rational};

use super::{BlockInfo, BlockKind, Constraint, MatEntry, SDPProblem, SdpError};

/// Exact decimal expansion of a rational, truncated to `max_digits`
/// fractional digits when it does not terminate.
pub fn rational_to_decimal(q: &Rational, max_digits: usize) -> String {
    let neg = *q < 0;
    let mut num = q.numer().clone().abs();
    let den = q.denom().clone();
    let int_part = Integer::from(&num / &den);
    num -= Integer::from(&int_part * &den);
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push_str(&int_part.to_string());
    if num == 0 {
        return s;
    }
    s.push('.');
    for _ in 0..max_digits {
        num *= Integer::from(10);
        let digit = Integer::from(&num / &den);
        s.push_str(&digit.to_string());
        num -= Integer::from(&digit * &den);
        if num == 0 {
            break;
        }
    }
    s
}

fn ten_pow(e: u32) -> Integer {
    let mut t = Integer::from(1);
    for _ in 0..e {
        t *= 10;
    }
    t
}

/// Parse a decimal or scientific-notation literal to an exact rational.
pub fn decimal_to_rational(s: &str) -> Result<Rational, SdpError> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..]
                .parse()
                .map_err(|_| SdpError::Parse(format!("bad exponent in {s}")))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(pos) => (&mant[..pos], &mant[pos + 1..]),
        None => (mant, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let base: Integer = digits
        .parse()
        .map_err(|_| SdpError::Parse(format!("bad decimal {s}")))?;
    let mut q = Rational::from(base);
    let shift = exp - frac_part.len() as i64;
    if shift > 0 {
        q *= Rational::from(ten_pow(shift as u32));
    } else if shift < 0 {
        q /= Rational::from(ten_pow((-shift) as u32));
    }
    Ok(q)
}

/// Emit the problem in SDPA sparse format at the given decimal precision.
pub fn emit_sdpa(problem: &SDPProblem, path: &Path, digits: usize) -> Result<(), SdpError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", problem.constraints.len())?;
    writeln!(f, "{}", problem.blocks.len())?;
    let sizes: Vec<String> = problem
        .blocks
        .iter()
        .map(|b| b.size.to_string())
        .collect();
    writeln!(f, "{}", sizes.join(" "))?;
    let rhs: Vec<String> = problem
        .constraints
        .iter()
        .map(|c| rational_to_decimal(&c.rhs, digits))
        .collect();
    writeln!(f, "{}", rhs.join(" "))?;
    let emit_entries = |f: &mut dyn Write,
                            matno: usize,
                            entries: &[MatEntry]|
     -> Result<(), SdpError> {
        for e in entries {
            writeln!(
                f,
                "{} {} {} {} {}",
                matno,
                e.block + 1,
                e.i + 1,
                e.j + 1,
                rational_to_decimal(&e.value, digits)
            )?;
        }
        Ok(())
    };
    emit_entries(&mut f, 0, &problem.objective)?;
    for (ci, c) in problem.constraints.iter().enumerate() {
        emit_entries(&mut f, ci + 1, &c.entries)?;
    }
    f.flush()?;
    Ok(())
}

/// Parse an SDPA sparse file back into a problem (values exact from their
/// decimal representation; block names generic).
pub fn parse_sdpa(path: &Path) -> Result<SDPProblem, SdpError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let m: usize = lines
        .next()
        .ok_or_else(|| SdpError::Parse("missing constraint count".into()))?
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .map_err(|_| SdpError::Parse("bad constraint count".into()))?;
    let nblocks: usize = lines
        .next()
        .ok_or_else(|| SdpError::Parse("missing block count".into()))?
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .map_err(|_| SdpError::Parse("bad block count".into()))?;
    let sizes_line = lines
        .next()
        .ok_or_else(|| SdpError::Parse("missing block sizes".into()))?;
    let sizes: Vec<i64> = sizes_line
        .split([' ', ',', '\t'])
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim_matches(['(', ')', '{', '}'])
                .parse::<i64>()
                .map_err(|_| SdpError::Parse(format!("bad block size {t}")))
        })
        .collect::<Result<_, _>>()?;
    if sizes.len() != nblocks {
        return Err(SdpError::Parse("block size list length mismatch".into()));
    }
    let rhs_line = lines
        .next()
        .ok_or_else(|| SdpError::Parse("missing rhs".into()))?;
    let rhs: Vec<Rational> = rhs_line
        .split([' ', ',', '\t'])
        .filter(|t| !t.is_empty())
        .map(decimal_to_rational)
        .collect::<Result<_, _>>()?;
    if rhs.len() != m {
        return Err(SdpError::Parse("rhs length mismatch".into()));
    }

    let blocks: Vec<BlockInfo> = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| BlockInfo {
            name: format!("block{}", i + 1),
            // negative sizes mark diagonal blocks; we store them dense
            size: s.unsigned_abs() as usize,
            kind: BlockKind::Sos,
        })
        .collect();
    let mut problem = SDPProblem {
        spec: None,
        blocks,
        constraints: rhs
            .into_iter()
            .map(|r| Constraint {
                entries: Vec::new(),
                rhs: r,
                slack: None,
            })
            .collect(),
        objective: Vec::new(),
    };
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(SdpError::Parse(format!("bad entry line {line}")));
        }
        let matno: usize = toks[0]
            .parse()
            .map_err(|_| SdpError::Parse("bad matno".into()))?;
        let entry = MatEntry {
            block: toks[1]
                .parse::<usize>()
                .map_err(|_| SdpError::Parse("bad blkno".into()))?
                - 1,
            i: toks[2]
                .parse::<usize>()
                .map_err(|_| SdpError::Parse("bad i".into()))?
                - 1,
            j: toks[3]
                .parse::<usize>()
                .map_err(|_| SdpError::Parse("bad j".into()))?
                - 1,
            value: decimal_to_rational(toks[4])?,
        };
        if entry.i > entry.j {
            return Err(SdpError::Parse("entries must have i <= j".into()));
        }
        if matno == 0 {
            problem.objective.push(entry);
        } else {
            problem
                .constraints
                .get_mut(matno - 1)
                .ok_or_else(|| SdpError::Parse("matno out of range".into()))?
                .entries
                .push(entry);
        }
    }
    let _ = rat_int(0);
    Ok(problem)
}
