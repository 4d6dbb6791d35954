//! Plain-text serialization of assembled problems with exact rationals.

use std::io::Write;
use std::path::Path;

use crate::{format_rational, parse_rational, rat_int};

use super::{BlockInfo, BlockKind, Constraint, MatEntry, ProblemSpec, SDPProblem, SdpError};

pub fn write_problem(problem: &SDPProblem, path: &Path) -> Result<(), SdpError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    match &problem.spec {
        Some(s) => writeln!(f, "# kisskit-sdp v1 {}", s.header_string())?,
        None => writeln!(f, "# kisskit-sdp v1")?,
    }
    for b in &problem.blocks {
        writeln!(
            f,
            "block name={} size={} kind={}",
            b.name,
            b.size,
            match b.kind {
                BlockKind::Kernel => "kernel",
                BlockKind::Sos => "sos",
            }
        )?;
    }
    for e in &problem.objective {
        writeln!(
            f,
            "objective block={} i={} j={} val={}",
            e.block,
            e.i,
            e.j,
            format_rational(&e.value)
        )?;
    }
    for c in &problem.constraints {
        let slack = match c.slack {
            Some((b, i, j)) => format!(" slack={b},{i},{j}"),
            None => String::new(),
        };
        writeln!(f, "constraint rhs={}{}", format_rational(&c.rhs), slack)?;
        for e in &c.entries {
            writeln!(
                f,
                "entry block={} i={} j={} val={}",
                e.block,
                e.i,
                e.j,
                format_rational(&e.value)
            )?;
        }
    }
    f.flush()?;
    Ok(())
}

pub fn read_problem(path: &Path) -> Result<SDPProblem, SdpError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SdpError::Parse("empty problem file".into()))?;
    if !header.starts_with("# kisskit-sdp v1") {
        return Err(SdpError::Parse(format!("bad header {header}")));
    }
    let rest = header.trim_start_matches("# kisskit-sdp v1").trim();
    let spec = if rest.is_empty() {
        None
    } else {
        Some(ProblemSpec::parse_header(rest)?)
    };

    let mut problem = SDPProblem {
        spec,
        blocks: Vec::new(),
        constraints: Vec::new(),
        objective: Vec::new(),
    };

    let kv = |tok: &str, key: &str| -> Option<String> {
        tok.strip_prefix(key)
            .and_then(|s| s.strip_prefix('='))
            .map(|s| s.to_string())
    };

    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("block") => {
                let mut name = None;
                let mut size = None;
                let mut kind = None;
                for t in toks {
                    if let Some(v) = kv(t, "name") {
                        name = Some(v);
                    } else if let Some(v) = kv(t, "size") {
                        size = v.parse().ok();
                    } else if let Some(v) = kv(t, "kind") {
                        kind = Some(match v.as_str() {
                            "kernel" => BlockKind::Kernel,
                            "sos" => BlockKind::Sos,
                            other => {
                                return Err(SdpError::Parse(format!("bad kind {other}")))
                            }
                        });
                    }
                }
                problem.blocks.push(BlockInfo {
                    name: name.ok_or_else(|| SdpError::Parse("block missing name".into()))?,
                    size: size.ok_or_else(|| SdpError::Parse("block missing size".into()))?,
                    kind: kind.ok_or_else(|| SdpError::Parse("block missing kind".into()))?,
                });
            }
            Some("objective") => {
                problem.objective.push(parse_entry(line)?);
            }
            Some("constraint") => {
                let mut rhs = rat_int(0);
                let mut slack = None;
                for t in toks {
                    if let Some(v) = kv(t, "rhs") {
                        rhs = parse_rational(&v).map_err(SdpError::Parse)?;
                    } else if let Some(v) = kv(t, "slack") {
                        let parts: Vec<&str> = v.split(',').collect();
                        if parts.len() != 3 {
                            return Err(SdpError::Parse(format!("bad slack {v}")));
                        }
                        slack = Some((
                            parts[0].parse().map_err(|_| SdpError::Parse("slack".into()))?,
                            parts[1].parse().map_err(|_| SdpError::Parse("slack".into()))?,
                            parts[2].parse().map_err(|_| SdpError::Parse("slack".into()))?,
                        ));
                    }
                }
                problem.constraints.push(Constraint {
                    entries: Vec::new(),
                    rhs,
                    slack,
                });
            }
            Some("entry") => {
                let e = parse_entry(line)?;
                problem
                    .constraints
                    .last_mut()
                    .ok_or_else(|| SdpError::Parse("entry before constraint".into()))?
                    .entries
                    .push(e);
            }
            Some(other) => return Err(SdpError::Parse(format!("unknown record {other}"))),
            None => {}
        }
    }
    Ok(problem)
}

fn parse_entry(line: &str) -> Result<MatEntry, SdpError> {
    let mut block = None;
    let mut i = None;
    let mut j = None;
    let mut val = None;
    for t in line.split_whitespace().skip(1) {
        if let Some((k, v)) = t.split_once('=') {
            match k {
                "block" => block = v.parse().ok(),
                "i" => i = v.parse().ok(),
                "j" => j = v.parse().ok(),
                "val" => val = Some(parse_rational(v).map_err(SdpError::Parse)?),
                _ => {}
            }
        }
    }
    Ok(MatEntry {
        block: block.ok_or_else(|| SdpError::Parse("entry missing block".into()))?,
        i: i.ok_or_else(|| SdpError::Parse("entry missing i".into()))?,
        j: j.ok_or_else(|| SdpError::Parse("entry missing j".into()))?,
        value: val.ok_or_else(|| SdpError::Parse("entry missing val".into()))?,
    })
}
