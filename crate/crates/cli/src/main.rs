//! Command-line pipeline: zonal generation, assembly, solving, rounding,
//! verification, end-to-end bounds, and the validation suites.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use kisskit_core::glrep::Signature;
use kisskit_core::sdp::{self, AssembleOptions, ProblemSpec, SDPProblem};
use kisskit_core::solver::{self, SolveConfig, Status};
use kisskit_core::verify::{self, round_certificate, verify_certificate};
use kisskit_core::{parse_rational, rat, zonal, Rational};

mod oracle;

const EXIT_ZONAL: u8 = 2;
const EXIT_SOLVE: u8 = 3;
const EXIT_VERIFY: u8 = 4;
const EXIT_D4: u8 = 5;

#[derive(Parser)]
#[command(
    name = "kisskit",
    about = "Certified semidefinite-programming bounds for kissing numbers",
    version
)]
struct Cli {
    /// Plain-text key=value defaults; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (or the KISSKIT_THREADS environment variable).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct SpecArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Inner-product threshold as a rational string, e.g. 1/2.
    #[arg(long = "cos-theta")]
    cos_theta: Option<String>,
    #[arg(long)]
    level: Option<u8>,
    #[arg(long)]
    d1: Option<u32>,
    #[arg(long)]
    d2: Option<u32>,
    #[arg(long)]
    delta: Option<u32>,
    /// Zonal cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct SolveArgs {
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iterations")]
    max_iterations: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate zonal cache files for all |lambda| <= d1.
    Zonal {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Assemble the SDP and write the exact problem file.
    Assemble {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also emit SDPA sparse format.
        #[arg(long)]
        sdpa: Option<PathBuf>,
        /// Keep raw generator orbits instead of symmetrizing them.
        #[arg(long = "no-symmetrize")]
        no_symmetrize: bool,
    },
    /// Solve a problem file (exact text format or SDPA).
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pin the objective and maximize the feasibility margin.
        #[arg(long)]
        pin: Option<String>,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Round a solution file to an exact certificate.
    Round {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "denom-bits")]
        denom_bits: Option<u32>,
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Verify a certificate against the re-assembled problem.
    Verify {
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        precision: Option<u32>,
        /// Additionally evaluate the bound chain on the D4 configuration.
        #[arg(long = "d4-chain")]
        d4_chain: bool,
    },
    /// Full pipeline: cache, assemble, solve, pin, round, verify.
    Bound {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Pinned objective for the margin solve (rational). Chosen slightly
        /// above the numeric optimum when absent.
        #[arg(long)]
        pin: Option<String>,
        /// Relative margin for the automatic pin.
        #[arg(long = "pin-margin")]
        pin_margin: Option<f64>,
        #[arg(long = "denom-bits")]
        denom_bits: Option<u32>,
        /// Write the certificate here.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Check the D4 root-system facts.
    D4check {
        #[arg(long = "cos-theta")]
        cos_theta: Option<String>,
    },
    /// Run the brute-force and Monte Carlo validation suites.
    Oracle {
        /// Which suite: zonal, haar, or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long = "max-degree")]
        max_degree: Option<u32>,
        /// Comma-separated dimensions.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cases: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    init_threads(cli.threads, &config);
    match run(cli.command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.source);
            ExitCode::from(e.code)
        }
    }
}

struct CmdError {
    code: u8,
    source: anyhow::Error,
}

fn fail(code: u8, source: anyhow::Error) -> CmdError {
    CmdError { code, source }
}

fn load_config(path: Option<&Path>) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)
            .with_context(|| format!("reading config {}", p.display()))?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("bad config line: {line}"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(map)
}

fn init_threads(flag: Option<usize>, config: &HashMap<String, String>) {
    let threads = flag
        .or_else(|| std::env::var("KISSKIT_THREADS").ok().and_then(|v| v.parse().ok()))
        .or_else(|| config.get("threads").and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

fn cfg_get<T: std::str::FromStr>(config: &HashMap<String, String>, key: &str) -> Option<T> {
    config.get(key).and_then(|v| v.parse().ok())
}

fn resolve_spec(args: &SpecArgs, config: &HashMap<String, String>) -> Result<(ProblemSpec, PathBuf)> {
    let n = args.n.or_else(|| cfg_get(config, "n")).unwrap_or(4);
    let level = args.level.or_else(|| cfg_get(config, "level")).unwrap_or(1);
    let d1 = args
        .d1
        .or_else(|| cfg_get(config, "d1"))
        .ok_or_else(|| anyhow!("--d1 is required"))?;
    let d2 = args.d2.or_else(|| cfg_get(config, "d2")).unwrap_or(d1);
    let delta = args
        .delta
        .or_else(|| cfg_get(config, "delta"))
        .unwrap_or_else(|| d2 + d2 % 2);
    let ct = args
        .cos_theta
        .clone()
        .or_else(|| config.get("cos-theta").cloned())
        .unwrap_or_else(|| "1/2".to_string());
    let cos_theta = parse_rational(&ct).map_err(|e| anyhow!(e))?;
    let cache = args
        .cache
        .clone()
        .or_else(|| config.get("cache").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("zonal-cache"));
    let spec = ProblemSpec {
        n,
        cos_theta,
        level,
        d1,
        d2,
        delta,
    };
    spec.validate().map_err(|e| anyhow!(e.to_string()))?;
    Ok((spec, cache))
}

fn resolve_solve_cfg(args: &SolveArgs, config: &HashMap<String, String>) -> SolveConfig {
    let mut cfg = SolveConfig::default();
    if let Some(p) = args.precision.or_else(|| cfg_get(config, "precision")) {
        cfg.precision = p;
    }
    if let Some(t) = args.tol.or_else(|| cfg_get(config, "tol")) {
        cfg.tol = t;
    }
    if let Some(mi) = args
        .max_iterations
        .or_else(|| cfg_get(config, "max-iterations"))
    {
        cfg.max_iterations = mi;
    }
    cfg
}

fn run(command: Command, config: &HashMap<String, String>) -> Result<(), CmdError> {
    match command {
        Command::Zonal { spec } => cmd_zonal(&spec, config),
        Command::Assemble {
            spec,
            out,
            sdpa,
            no_symmetrize,
        } => cmd_assemble(&spec, &out, sdpa.as_deref(), no_symmetrize, config),
        Command::Solve {
            problem,
            out,
            pin,
            solve,
        } => cmd_solve(&problem, &out, pin.as_deref(), &solve, config),
        Command::Round {
            problem,
            solution,
            out,
            denom_bits,
            precision,
        } => cmd_round(&problem, &solution, &out, denom_bits, precision, config),
        Command::Verify {
            certificate,
            cache,
            precision,
            d4_chain,
        } => cmd_verify(&certificate, cache.as_deref(), precision, d4_chain, config),
        Command::Bound {
            spec,
            solve,
            pin,
            pin_margin,
            denom_bits,
            cert,
        } => cmd_bound(
            &spec,
            &solve,
            pin.as_deref(),
            pin_margin,
            denom_bits,
            cert.as_deref(),
            config,
        ),
        Command::D4check { cos_theta } => cmd_d4check(cos_theta.as_deref(), config),
        Command::Oracle {
            suite,
            max_degree,
            dims,
            samples,
            seed,
            cases,
        } => oracle::cmd_oracle(&suite, max_degree, dims.as_deref(), samples, seed, cases)
            .map_err(|e| fail(1, e)),
    }
}

fn cmd_zonal(spec_args: &SpecArgs, config: &HashMap<String, String>) -> Result<(), CmdError> {
    let (spec, cache) = resolve_spec(spec_args, config).map_err(|e| fail(EXIT_ZONAL, e))?;
    let sigs: Vec<Signature> = Signature::all_up_to(spec.d1);
    let mut generated = 0usize;
    let mut skipped = 0usize;
    for lam in &sigs {
        let path = cache.join(zonal::cache_file_name(spec.n, *lam));
        let fresh = match zonal::read_block(&path) {
            Ok(b) if b.d2 >= spec.d2 && b.n == spec.n && b.lam == *lam => true,
            _ => false,
        };
        if fresh {
            skipped += 1;
            continue;
        }
        zonal::load_or_generate(*lam, spec.n, spec.d2, &cache)
            .map_err(|e| fail(EXIT_ZONAL, anyhow!(e.to_string())))?;
        generated += 1;
    }
    println!(
        "RESULT command=zonal n={} d1={} d2={} signatures={} generated={generated} skipped={skipped} cache={}",
        spec.n,
        spec.d1,
        spec.d2,
        sigs.len(),
        cache.display()
    );
    Ok(())
}

fn assemble_options(no_symmetrize: bool) -> AssembleOptions {
    AssembleOptions {
        symmetrize: !no_symmetrize,
    }
}

fn cmd_assemble(
    spec_args: &SpecArgs,
    out: &Path,
    sdpa: Option<&Path>,
    no_symmetrize: bool,
    config: &HashMap<String, String>,
) -> Result<(), CmdError> {
    let (spec, cache) = resolve_spec(spec_args, config).map_err(|e| fail(EXIT_ZONAL, e))?;
    let problem = sdp::assemble(&spec, &cache, assemble_options(no_symmetrize))
        .map_err(|e| fail(EXIT_ZONAL, anyhow!(e.to_string())))?;
    sdp::write_problem(&problem, out).map_err(|e| fail(1, anyhow!(e.to_string())))?;
    if let Some(sp) = sdpa {
        sdp::emit_sdpa(&problem, sp, 30).map_err(|e| fail(1, anyhow!(e.to_string())))?;
    }
    println!(
        "RESULT command=assemble n={} level={} d1={} d2={} delta={} blocks={} constraints={} out={}",
        spec.n,
        spec.level,
        spec.d1,
        spec.d2,
        spec.delta,
        problem.blocks.len(),
        problem.num_constraints(),
        out.display()
    );
    Ok(())
}

fn read_problem_any(path: &Path) -> Result<SDPProblem> {
    let head = std::fs::read_to_string(path)?;
    if head.starts_with("# kisskit-sdp") {
        Ok(sdp::read_problem(path).map_err(|e| anyhow!(e.to_string()))?)
    } else {
        Ok(sdp::parse_sdpa(path).map_err(|e| anyhow!(e.to_string()))?)
    }
}

fn cmd_solve(
    problem_path: &Path,
    out: &Path,
    pin: Option<&str>,
    solve_args: &SolveArgs,
    config: &HashMap<String, String>,
) -> Result<(), CmdError> {
    let problem = read_problem_any(problem_path).map_err(|e| fail(EXIT_SOLVE, e))?;
    let cfg = resolve_solve_cfg(solve_args, config);
    let sol = match pin {
        Some(p) => {
            let pinned = parse_rational(p).map_err(|e| fail(EXIT_SOLVE, anyhow!(e)))?;
            solver::solve_feasibility_margin(&problem, &pinned, &cfg)
        }
        None => solver::solve(&problem, &cfg),
    }
    .map_err(|e| fail(EXIT_SOLVE, anyhow!(e.to_string())))?;
    solver::io::write_solution(&sol, out).map_err(|e| fail(EXIT_SOLVE, anyhow!(e.to_string())))?;
    println!(
        "RESULT command=solve status={} pobj={:.15e} dobj={:.15e} relgap={:.3e} rp={:.3e} iterations={}{} out={}",
        sol.status,
        sol.pobj,
        sol.dobj,
        sol.rel_gap,
        sol.primal_residual,
        sol.iterations,
        match sol.margin {
            Some(m) => format!(" margin={m:.3e}"),
            None => String::new(),
        },
        out.display()
    );
    if sol.status != Status::Optimal {
        return Err(fail(
            EXIT_SOLVE,
            anyhow!("solver finished with status {}", sol.status),
        ));
    }
    Ok(())
}

fn cmd_round(
    problem_path: &Path,
    solution_path: &Path,
    out: &Path,
    denom_bits: Option<u32>,
    precision: Option<u32>,
    config: &HashMap<String, String>,
) -> Result<(), CmdError> {
    let problem = read_problem_any(problem_path).map_err(|e| fail(EXIT_VERIFY, e))?;
    let spec = problem
        .spec
        .clone()
        .ok_or_else(|| fail(EXIT_VERIFY, anyhow!("problem file carries no spec header")))?;
    let solution = solver::io::read_solution(solution_path)
        .map_err(|e| fail(EXIT_VERIFY, anyhow!(e.to_string())))?;
    let denom_bits = denom_bits
        .or_else(|| cfg_get(config, "denom-bits"))
        .unwrap_or(96);
    let precision = precision
        .or_else(|| cfg_get(config, "precision"))
        .unwrap_or(256);
    let cert =
        verify::round::round_rational_solution(&solution.x, &problem, &spec, denom_bits, precision)
            .map_err(|e| fail(EXIT_VERIFY, anyhow!(e.to_string())))?;
    verify::write_certificate(&cert, out).map_err(|e| fail(EXIT_VERIFY, anyhow!(e.to_string())))?;
    println!(
        "RESULT command=round bound={} denombits={} out={}",
        kisskit_core::format_rational(&cert.bound),
        denom_bits,
        out.display()
    );
    Ok(())
}

fn cmd_verify(
    cert_path: &Path,
    cache: Option<&Path>,
    precision: Option<u32>,
    d4_chain: bool,
    config: &HashMap<String, String>,
) -> Result<(), CmdError> {
    let cert = verify::read_certificate(cert_path)
        .map_err(|e| fail(EXIT_VERIFY, anyhow!(e.to_string())))?;
    let cache = cache
        .map(Path::to_path_buf)
        .or_else(|| config.get("cache").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("zonal-cache"));
    let problem = sdp::assemble(&cert.spec, &cache, AssembleOptions::default())
        .map_err(|e| fail(EXIT_ZONAL, anyhow!(e.to_string())))?;
    let precision = precision
        .or_else(|| cfg_get(config, "precision"))
        .unwrap_or(256);
    let bound = match verify_certificate(&cert, &problem, precision) {
        Ok(b) => b,
        Err(verify::VerifyError::PSDUncertified { .. }) => {
            // one retry at doubled precision before giving up
            verify_certificate(&cert, &problem, precision * 2)
                .map_err(|e| fail(EXIT_VERIFY, anyhow!(e.to_string())))?
        }
        Err(e) => return Err(fail(EXIT_VERIFY, anyhow!(e.to_string()))),
    };
    let mut chain_note = String::new();
    if d4_chain {
        let roots = verify::d4_roots();
        let gram = kisskit_core::RatMatrix::from_fn(24, 24, |i, j| {
            verify::d4_gram(&roots[i], &roots[j])
        });
        let (lo, mid, hi) = verify::code_slack_chain(&cert, &cache, &gram)
            .map_err(|e| fail(EXIT_VERIFY, anyhow!(e.to_string())))?;
        chain_note = format!(
            " d4chain=ok lower={lo} middle={mid} upper={hi}",
            lo = kisskit_core::format_rational(&lo),
            mid = kisskit_core::format_rational(&mid),
            hi = kisskit_core::format_rational(&hi)
        );
    }
    let floor = Rational::from(bound.clone().floor());
    println!(
        "RESULT command=verify ok=1 bound={} floor={}{}",
        kisskit_core::format_rational(&bound),
        kisskit_core::format_rational(&floor),
        chain_note
    );
    Ok(())
}

/// A rational pin slightly above the numeric optimum: round up at six
/// decimal places after adding the margin.
fn auto_pin(numeric: f64, rel_margin: f64) -> Rational {
    let target = numeric + (numeric.abs() * rel_margin).max(1e-4);
    let scaled = (target * 1e6).ceil() as i64;
    rat(scaled, 1_000_000)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound(
    spec_args: &SpecArgs,
    solve_args: &SolveArgs,
    pin: Option<&str>,
    pin_margin: Option<f64>,
    denom_bits: Option<u32>,
    cert_out: Option<&Path>,
    config: &HashMap<String, String>,
) -> Result<(), CmdError> {
    let (spec, cache) = resolve_spec(spec_args, config).map_err(|e| fail(EXIT_ZONAL, e))?;
    let problem = sdp::assemble(&spec, &cache, AssembleOptions::default())
        .map_err(|e| fail(EXIT_ZONAL, anyhow!(e.to_string())))?;
    let cfg = resolve_solve_cfg(solve_args, config);

    let sol = solver::solve(&problem, &cfg).map_err(|e| fail(EXIT_SOLVE, anyhow!(e.to_string())))?;
    if sol.status != Status::Optimal {
        return Err(fail(
            EXIT_SOLVE,
            anyhow!("numeric solve finished with status {}", sol.status),
        ));
    }

    let pinned = match pin {
        Some(p) => parse_rational(p).map_err(|e| fail(EXIT_SOLVE, anyhow!(e)))?,
        None => auto_pin(sol.pobj, pin_margin.unwrap_or(1e-3)),
    };
    let margin_sol = solver::solve_feasibility_margin(&problem, &pinned, &cfg)
        .map_err(|e| fail(EXIT_SOLVE, anyhow!(e.to_string())))?;
    if margin_sol.status != Status::Optimal {
        return Err(fail(
            EXIT_SOLVE,
            anyhow!("margin solve finished with status {}", margin_sol.status),
        ));
    }

    let denom_bits = denom_bits
        .or_else(|| cfg_get(config, "denom-bits"))
        .unwrap_or(96);
    let cert = round_certificate(&margin_sol, &problem, denom_bits, cfg.precision)
        .map_err(|e| fail(EXIT_VERIFY, anyhow!(e.to_string())))?;
    let bound = verify_certificate(&cert, &problem, cfg.precision)
        .map_err(|e| fail(EXIT_VERIFY, anyhow!(e.to_string())))?;
    if let Some(path) = cert_out {
        verify::write_certificate(&cert, path)
            .map_err(|e| fail(EXIT_VERIFY, anyhow!(e.to_string())))?;
    }
    let floor = Rational::from(bound.clone().floor());
    println!(
        "RESULT command=bound n={} level={} d1={} d2={} delta={} numeric={:.9} bound={} floor={} margin={:.3e}",
        spec.n,
        spec.level,
        spec.d1,
        spec.d2,
        spec.delta,
        sol.pobj,
        kisskit_core::format_rational(&bound),
        kisskit_core::format_rational(&floor),
        margin_sol.margin.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_d4check(
    cos_theta: Option<&str>,
    config: &HashMap<String, String>,
) -> Result<(), CmdError> {
    let ct = cos_theta
        .map(str::to_string)
        .or_else(|| config.get("cos-theta").cloned())
        .unwrap_or_else(|| "1/2".to_string());
    let ct = parse_rational(&ct).map_err(|e| fail(EXIT_D4, anyhow!(e)))?;
    match verify::d4_check(&ct) {
        Ok(rep) => {
            let grams: Vec<String> = rep
                .gram_values
                .iter()
                .map(kisskit_core::format_rational)
                .collect();
            println!(
                "RESULT command=d4check pass=1 count={} gram={{{}}} maxgram={}",
                rep.count,
                grams.join(","),
                kisskit_core::format_rational(&rep.max_off_diagonal)
            );
            Ok(())
        }
        Err(e) => {
            println!("RESULT command=d4check pass=0 reason={e}");
            Err(fail(EXIT_D4, anyhow!(e.to_string())))
        }
    }
}
