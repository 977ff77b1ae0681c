use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::json;

use polycm::ball::{format_rational, format_sci, Ball};
use polycm::bound::{BoundFunctions, FunctionKind, IdentityReport};
use polycm::cm::{cm_scan, decay_check, inequality_scan, GridSpec, DEFAULT_DECAY_THRESHOLD, DEFAULT_K_MAX};
use polycm::constants::Constants;
use polycm::polygamma::polygamma_rational;
use polycm::proof::{chain_positivity_certificate, grid_positivity_spotcheck, StageId, ThetaChain, ThetaLevel};

const DIGITS: usize = 20;

#[derive(Parser)]
#[command(name = "polycm", version, about = "Certified evaluation and verification for the polygamma bound")]
struct Cli {
    /// Constants file to use instead of the embedded one.
    #[arg(long, global = true, value_name = "FILE")]
    constants: Option<PathBuf>,

    /// Target precision in bits.
    #[arg(
        long,
        global = true,
        env = "POLYCM_PREC",
        default_value_t = 128,
        value_parser = clap::value_parser!(u32).range(8..)
    )]
    prec: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a function at a point.
    Eval {
        function: EvalFunction,
        /// Point: integer, decimal, `a/b` or `2^k`.
        #[arg(allow_hyphen_values = true)]
        x: String,
        /// Order for `polygamma`.
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check one of the exact or numerical identities.
    IdentityCheck {
        which: Identity,
        /// Point for `telescoping`.
        #[arg(long)]
        x: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Replay the positivity chain and emit its certificate.
    ReplayProof {
        /// Write the JSON certificate to this path (`-` for stdout).
        #[arg(long, value_name = "PATH")]
        emit: Option<String>,
    },
    /// Sign scan of `(-1)^k f^(k)` over a grid.
    CmScan {
        function: FunctionKind,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        kmax: u32,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Strict check of `psi'^2 + psi'' > B` over a grid.
    InequalityScan {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Values at `x = 2^j` must decrease below a threshold.
    DecayCheck {
        function: FunctionKind,
        #[arg(long, default_value_t = 10)]
        jmax: u32,
        #[arg(long, default_value_t = DEFAULT_DECAY_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Evaluate chain stages at sample points.
    Spotcheck {
        /// Stages such as `theta`, `theta1_d4`; all stages if omitted.
        #[arg(long, value_delimiter = ',')]
        stage: Vec<String>,
        /// Sample points in `t`.
        #[arg(long, value_delimiter = ',', default_value = "1/10,1,10")]
        t: Vec<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated grid points.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["grid_start", "grid_ratio", "grid_count"])]
    grid: Option<Vec<String>>,
    #[arg(long)]
    grid_start: Option<String>,
    #[arg(long)]
    grid_ratio: Option<f64>,
    #[arg(long)]
    grid_count: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalFunction {
    Psi1,
    Psi2,
    Polygamma,
    P,
    #[value(name = "Q", alias = "q")]
    Q,
    #[value(name = "B", alias = "b")]
    B,
    G,
    #[value(name = "H", alias = "h")]
    H,
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    Expansion,
    Remark2,
    Telescoping,
}

/// Exit 1 for a failed verification, 2 for usage, domain and I/O errors.
enum Failure {
    Verification(String),
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let bounds = match &cli.constants {
        Some(path) => {
            let c = Constants::from_path(path).map_err(usage)?;
            BoundFunctions::new(c).map_err(usage)?
        }
        None => BoundFunctions::embedded(),
    };
    let prec = cli.prec;
    match cli.command {
        Command::Eval { function, x, m, format } => cmd_eval(&bounds, function, &x, m, prec, format),
        Command::IdentityCheck { which, x, format } => cmd_identity(&bounds, which, x.as_deref(), prec, format),
        Command::ReplayProof { emit } => cmd_replay(&bounds, emit.as_deref()),
        Command::CmScan { function, kmax, grid, out } => cmd_cm_scan(&bounds, function, kmax, &grid, prec, &out),
        Command::InequalityScan { grid, out } => cmd_inequality(&bounds, &grid, prec, &out),
        Command::DecayCheck { function, jmax, threshold, format } => {
            cmd_decay(&bounds, function, jmax, threshold, prec, format)
        }
        Command::Spotcheck { stage, t, out } => cmd_spotcheck(&bounds, &stage, &t, prec, &out),
    }
}

/// Integers, decimals with optional exponent, `a/b` and `2^k`.
fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("cannot parse `{s}` as a rational number");
    if let Some((base, exp)) = s.split_once('^') {
        let base = parse_rational(base)?;
        let k: i32 = exp.parse().map_err(|_| bad())?;
        if base.is_zero() && k < 0 {
            return Err(bad());
        }
        return Ok(num_traits::pow::Pow::pow(&base, k));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(n / d);
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let n: num_bigint::BigInt = digits.parse().map_err(|_| bad())?;
    let ten = BigRational::from_integer(10.into());
    let scale = num_traits::pow::Pow::pow(&ten, exp - frac_part.len() as i32);
    Ok(BigRational::from_integer(n) * scale)
}

fn ball_text(b: &Ball) -> String {
    format!("{} [{} bits]", b.to_sci_string(DIGITS), b.prec())
}

fn ball_json(b: &Ball) -> serde_json::Value {
    json!({
        "mid": format_sci(&b.mid_rational(), DIGITS),
        "rad": format!("{:.3e}", b.rad_f64()),
        "precision": b.prec(),
    })
}

fn write_out(text: &str, path: Option<&std::path::Path>) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(usage)
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn cmd_eval(bounds: &BoundFunctions, f: EvalFunction, x: &str, m: u32, prec: u32, format: Format) -> Outcome {
    let xq = parse_rational(x).map_err(usage)?;
    let (name, value): (String, Result<Ball, BigRational>) = match f {
        EvalFunction::Psi1 => ("psi1".into(), Ok(polygamma_rational(1, &xq, prec).map_err(usage)?)),
        EvalFunction::Psi2 => ("psi2".into(), Ok(polygamma_rational(2, &xq, prec).map_err(usage)?)),
        EvalFunction::Polygamma => (
            format!("polygamma[{m}]"),
            Ok(polygamma_rational(m, &xq, prec).map_err(usage)?),
        ),
        EvalFunction::P => ("p".into(), Err(bounds.p_eval(&xq))),
        EvalFunction::Q => ("Q".into(), Err(bounds.q_eval(&xq))),
        EvalFunction::B => ("B".into(), Err(bounds.bound_exact(&xq).map_err(usage)?)),
        EvalFunction::G => ("g".into(), Ok(bounds.g_eval(&xq, prec).map_err(usage)?)),
        EvalFunction::H => ("H".into(), Ok(bounds.h_eval(&xq, prec).map_err(usage)?)),
    };
    let text = match (format, &value) {
        (Format::Text, Ok(b)) => format!("{name}({xq}) = {}\n", ball_text(b)),
        (Format::Text, Err(q)) => format!("{name}({xq}) = {}\n", format_rational(q, DIGITS)),
        (Format::Json, v) => {
            let mut obj = json!({ "function": name, "x": xq.to_string() });
            match v {
                Ok(b) => obj["enclosure"] = ball_json(b),
                Err(q) => {
                    obj["exact"] = json!(q.to_string());
                    obj["approx"] = json!(format_sci(q, DIGITS));
                }
            }
            with_newline(serde_json::to_string_pretty(&obj).expect("json"))
        }
        (Format::Csv, _) => return Err(usage("eval supports --format text or json")),
    };
    write_out(&text, None)
}

fn identity_text(r: &IdentityReport) -> String {
    let mut out = format!("{}: {}\n", r.name, if r.holds { "pass" } else { "FAIL" });
    for d in &r.differences {
        out.push_str(&format!(
            "  1/(x+{})^{}: {} vs {}\n",
            d.shift, d.order, d.left, d.right
        ));
    }
    for n in &r.notes {
        out.push_str(&format!("  {n}\n"));
    }
    out
}

fn cmd_identity(bounds: &BoundFunctions, which: Identity, x: Option<&str>, prec: u32, format: Format) -> Outcome {
    let (holds, text, json) = match which {
        Identity::Expansion | Identity::Remark2 => {
            let r = match which {
                Identity::Expansion => bounds.pf_expansion_identity_check(),
                _ => bounds.remark2_identity_check(),
            };
            (r.holds, identity_text(&r), serde_json::to_string_pretty(&r))
        }
        Identity::Telescoping => {
            let x = x.ok_or_else(|| usage("telescoping requires --x"))?;
            let xq = parse_rational(x).map_err(usage)?;
            let r = bounds.telescoping_identity_check(&xq, prec).map_err(usage)?;
            let text = format!(
                "telescoping at x = {}: {}\n  g(x) - g(x+1) = {}\n  2 H(x) / x^2  = {}\n  gap {:.3e}, tolerance {:.3e}\n",
                r.x,
                if r.holds { "pass" } else { "FAIL" },
                r.lhs,
                r.rhs,
                r.gap,
                r.tolerance
            );
            (r.holds, text, serde_json::to_string_pretty(&r))
        }
    };
    let text = match format {
        Format::Text => text,
        Format::Json => with_newline(json.expect("json")),
        Format::Csv => return Err(usage("identity-check supports --format text or json")),
    };
    write_out(&text, None)?;
    if holds {
        Ok(())
    } else {
        Err(Failure::Verification("identity does not hold".into()))
    }
}

fn cmd_replay(bounds: &BoundFunctions, emit: Option<&str>) -> Outcome {
    let report = chain_positivity_certificate(bounds);
    match emit {
        Some("-") => write_out(&with_newline(report.to_json()), None)?,
        Some(path) => write_out(&with_newline(report.to_json()), Some(path.as_ref()))?,
        None => {
            let mut text = String::new();
            for s in &report.steps {
                text.push_str(&format!("[{}] {}: {}\n", s.verdict, s.step, s.claim));
                for f in &s.failures {
                    text.push_str(&format!("    {f}\n"));
                }
            }
            text.push_str(&format!("overall: {}\n", report.verdict));
            write_out(&text, None)?;
        }
    }
    match report.first_failure() {
        None if report.passed() => Ok(()),
        None => Err(Failure::Verification("certificate did not pass".into())),
        Some(step) => Err(Failure::Verification(format!(
            "step `{}` failed: {}",
            step.step,
            step.failures.first().map(String::as_str).unwrap_or(&step.claim)
        ))),
    }
}

fn grid_spec(args: &GridArgs) -> Result<GridSpec, Failure> {
    if let Some(list) = &args.grid {
        let pts = list.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
        if pts.is_empty() {
            return Err(usage("grid is empty"));
        }
        return Ok(GridSpec::Points(pts));
    }
    let GridSpec::Geometric { start, ratio, count } = GridSpec::default() else {
        unreachable!("default grid is geometric")
    };
    Ok(GridSpec::Geometric {
        start: match &args.grid_start {
            Some(s) => parse_rational(s).map_err(usage)?,
            None => start,
        },
        ratio: args.grid_ratio.unwrap_or(ratio),
        count: args.grid_count.unwrap_or(count),
    })
}

fn cmd_cm_scan(
    bounds: &BoundFunctions,
    kind: FunctionKind,
    kmax: u32,
    grid: &GridArgs,
    prec: u32,
    out: &OutputArgs,
) -> Outcome {
    if kmax > bounds.max_derivative() {
        return Err(usage(format!("--kmax {kmax} exceeds the maximum {}", bounds.max_derivative())));
    }
    let report = cm_scan(bounds, kind, kmax, &grid_spec(grid)?, prec).map_err(usage)?;
    let text = match out.format {
        Format::Text => report.to_text(),
        Format::Json => with_newline(report.to_json()),
        Format::Csv => report.to_csv(),
    };
    write_out(&text, out.output.as_deref())?;
    let s = &report.summary;
    if s.indeterminate > 0 {
        eprintln!("warning: {} indeterminate cells", s.indeterminate);
    }
    if s.errors > 0 {
        let first = report.entries.iter().find_map(|e| e.error.clone()).unwrap_or_default();
        return Err(usage(format!("{} cells could not be evaluated: {first}", s.errors)));
    }
    if s.negative > 0 {
        return Err(Failure::Verification(format!("{} negative cells", s.negative)));
    }
    Ok(())
}

fn cmd_inequality(bounds: &BoundFunctions, grid: &GridArgs, prec: u32, out: &OutputArgs) -> Outcome {
    let report = inequality_scan(bounds, &grid_spec(grid)?, prec).map_err(usage)?;
    let text = match out.format {
        Format::Text => {
            let mut t = String::new();
            for e in &report.entries {
                t.push_str(&format!(
                    "x={:<24} {:<13} margin {} ± {} [{} bits]\n",
                    e.x, e.verdict, e.margin, e.margin_rad, e.precision
                ));
            }
            t.push_str(&format!(
                "{} strict, {} failures, {} indeterminate\n",
                report.strict, report.failures, report.indeterminate
            ));
            t
        }
        Format::Json => with_newline(serde_json::to_string_pretty(&report).expect("json")),
        Format::Csv => {
            let mut t = String::from("x,lhs,bound,margin,margin_rad,verdict\n");
            for e in &report.entries {
                t.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    e.x, e.lhs, e.bound, e.margin, e.margin_rad, e.verdict
                ));
            }
            t
        }
    };
    write_out(&text, out.output.as_deref())?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} failures, {} indeterminate",
            report.failures, report.indeterminate
        )))
    }
}

fn cmd_decay(
    bounds: &BoundFunctions,
    kind: FunctionKind,
    jmax: u32,
    threshold: f64,
    prec: u32,
    format: Format,
) -> Outcome {
    let report = decay_check(bounds, kind, jmax, threshold, prec);
    if let Some(e) = &report.error {
        return Err(usage(e));
    }
    let text = match format {
        Format::Text => {
            let mut t = String::new();
            for e in &report.entries {
                t.push_str(&format!("{}(2^{}) = {} ± {}\n", kind, e.j, e.mid, e.rad));
            }
            t.push_str(&format!(
                "decreasing: {}, below {:e}: {}\n",
                report.decreasing, report.threshold, report.below_threshold
            ));
            t
        }
        Format::Json => with_newline(serde_json::to_string_pretty(&report).expect("json")),
        Format::Csv => return Err(usage("decay-check supports --format text or json")),
    };
    write_out(&text, None)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification("values do not decay below the threshold".into()))
    }
}

fn all_stages() -> Vec<StageId> {
    let mut ids: Vec<StageId> = (0..=10).map(|d| StageId::new(ThetaLevel::Theta, d)).collect();
    ids.extend((0..=10).map(|d| StageId::new(ThetaLevel::Theta1, d)));
    ids.extend((0..=9).map(|d| StageId::new(ThetaLevel::Theta2, d)));
    ids
}

fn cmd_spotcheck(bounds: &BoundFunctions, stages: &[String], ts: &[String], prec: u32, out: &OutputArgs) -> Outcome {
    let ids = if stages.is_empty() {
        all_stages()
    } else {
        stages.iter().map(|s| s.parse()).collect::<Result<Vec<StageId>, _>>().map_err(usage)?
    };
    let grid = ts.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
    if grid.iter().any(|t| *t < BigRational::zero()) {
        return Err(usage("sample points must be nonnegative"));
    }
    let chain = ThetaChain::build(bounds.constants()).map_err(usage)?;
    let report = grid_positivity_spotcheck(&chain, &ids, &grid, prec).map_err(usage)?;
    let text = match out.format {
        Format::Text => {
            let mut t = String::new();
            for e in &report.entries {
                t.push_str(&format!(
                    "{:<10} t={:<8} {:<9} {} ± {} [{} bits]\n",
                    e.stage, e.t, e.verdict, e.mid, e.rad, e.precision
                ));
            }
            t.push_str(&format!("all positive: {}\n", report.all_positive));
            t
        }
        Format::Json => with_newline(serde_json::to_string_pretty(&report).expect("json")),
        Format::Csv => {
            let mut t = String::from("stage,t,mid,rad,verdict\n");
            for e in &report.entries {
                t.push_str(&format!("{},{},{},{},{}\n", e.stage, e.t, e.mid, e.rad, e.verdict));
            }
            t
        }
    };
    write_out(&text, out.output.as_deref())?;
    if report.all_positive {
        Ok(())
    } else {
        Err(Failure::Verification("a stage is not positive".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert_eq!(parse_rational("-3/4").unwrap(), q(-3, 4));
        assert_eq!(parse_rational("0.125").unwrap(), q(1, 8));
        assert_eq!(parse_rational("1.5e-2").unwrap(), q(3, 200));
        assert_eq!(parse_rational("2^-10").unwrap(), q(1, 1024));
        assert_eq!(parse_rational("1/2^3").unwrap(), q(1, 8));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(parse_rational("1").unwrap(), BigRational::one());
    }
}
