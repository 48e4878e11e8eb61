mod failure;
mod render;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vstates::contour::{
    branch_continue, resolved_quad_size, Branch, BranchOptions, BranchRecord, DEFAULT_DS,
    DEFAULT_MAX_ITER, DEFAULT_MODES, DEFAULT_NEWTON_TOL, DEFAULT_QUAD,
};
use vstates::specfun::AnnulusConstants;
use vstates::spectrum::{bifurcation_row, discriminant, threshold_n, Sign, SpectrumRow};
use vstates::verify::{format_table, run_suite, SuiteConfig, DEFAULT_SEED};

use failure::Failure;

/// Environment variable overriding the size of the constants table.
const NMAX_VAR: &str = "VSTATES_NMAX";

#[derive(Parser)]
#[command(name = "vstates", version, about = "Rotating doubly connected patches: spectra, branches and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bifurcation speeds and discriminants per symmetry order m.
    Spectrum(SpectrumArgs),
    /// Smallest symmetry order with two simple bifurcation speeds.
    Threshold(ThresholdArgs),
    /// Continue the m-fold branch leaving the annulus.
    Branch(BranchArgs),
    /// Run the numerical verification suite.
    Check(CheckArgs),
    /// Draw boundaries of a computed branch as SVG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

fn parse_radius(s: &str) -> Result<f64, String> {
    let b: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if b > 0.0 && b < 1.0 {
        Ok(b)
    } else {
        Err(format!("inner radius must lie in (0, 1), got {b}"))
    }
}

fn parse_fold(s: &str) -> Result<usize, String> {
    let m: usize = s.parse().map_err(|_| format!("{s:?} is not a positive integer"))?;
    if m >= 2 {
        Ok(m)
    } else {
        Err(format!("symmetry order must be at least 2, got {m}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {v}"))
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, value_parser = parse_radius)]
    b: f64,
    /// Single symmetry order; shorthand for --m-min M --m-max M.
    #[arg(long, value_parser = parse_fold, conflicts_with_all = ["m_min", "m_max"])]
    m: Option<usize>,
    /// Defaults to the threshold N(b).
    #[arg(long, value_parser = parse_fold)]
    m_min: Option<usize>,
    /// Defaults to m-min + 20.
    #[arg(long, value_parser = parse_fold)]
    m_max: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, value_parser = parse_radius)]
    b: f64,
}

#[derive(Args)]
struct BranchArgs {
    #[arg(long, value_parser = parse_radius)]
    b: f64,
    #[arg(long, value_parser = parse_fold)]
    m: usize,
    #[arg(long, value_enum, default_value = "plus")]
    sign: SignArg,
    /// Retained Fourier modes K per boundary.
    #[arg(long, default_value_t = DEFAULT_MODES, value_parser = clap::value_parser!(usize))]
    modes: usize,
    /// Quadrature size P; must be a multiple of 4·K·m. Defaults to the
    /// smallest such multiple not below 4096.
    #[arg(long)]
    quad: Option<usize>,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_DS, value_parser = parse_positive)]
    ds: f64,
    /// Newton tolerance on the largest residual coefficient.
    #[arg(long, default_value_t = DEFAULT_NEWTON_TOL, value_parser = parse_positive)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write sampled boundaries of every point as CSV.
    #[arg(long)]
    boundaries: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Branch JSON written by `vstates branch`.
    input: PathBuf,
    /// Comma-separated point indices; all points when omitted.
    #[arg(long)]
    points: Option<String>,
    #[arg(long, value_enum, default_value = "svg")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn require_format(got: Format, allowed: &[Format], command: &str) -> Result<(), Failure> {
    if allowed.contains(&got) {
        Ok(())
    } else {
        let names: Vec<_> = allowed
            .iter()
            .map(|f| f.to_possible_value().expect("no skipped variants").get_name().to_string())
            .collect();
        Err(Failure::usage(format!(
            "{command} supports --format {}",
            names.join(" or ")
        )))
    }
}

fn table_size(default: usize) -> Result<usize, Failure> {
    match std::env::var(NMAX_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .ok()
            .filter(|&n: &usize| n >= 2)
            .ok_or_else(|| Failure::usage(format!("{NMAX_VAR}={v:?} is not an integer >= 2"))),
        Err(_) => Ok(default),
    }
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| Failure {
            code: failure::EXIT_IO,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Round-trip exact decimal form.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct RowRecord {
    m: usize,
    #[serde(rename = "C_m")]
    c_m: f64,
    #[serde(rename = "D_m")]
    d_m: f64,
    #[serde(rename = "Delta_m")]
    delta_m: f64,
    lambda_minus: f64,
    lambda_plus: f64,
    omega_minus: f64,
    omega_plus: f64,
    transversal: bool,
}

impl From<&SpectrumRow> for RowRecord {
    fn from(r: &SpectrumRow) -> Self {
        Self {
            m: r.m,
            c_m: r.c_m,
            d_m: r.d_m,
            delta_m: r.delta_m,
            lambda_minus: r.lambda_minus,
            lambda_plus: r.lambda_plus,
            omega_minus: r.omega_minus,
            omega_plus: r.omega_plus,
            transversal: r.transversal,
        }
    }
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), Failure> {
    require_format(args.format, &[Format::Csv, Format::Json], "spectrum")?;
    let (m_min, m_max) = match args.m {
        Some(m) => (Some(m), Some(m)),
        None => (args.m_min, args.m_max),
    };
    // the threshold scan needs the table before the range is known
    let probe = AnnulusConstants::new(args.b, table_size(200)?)?;
    let threshold = threshold_n(&probe)?;
    let lo = m_min.unwrap_or(threshold);
    let hi = m_max.unwrap_or(lo + 20);
    if hi < lo {
        return Err(Failure::usage(format!("--m-max {hi} is below --m-min {lo}")));
    }
    if lo < threshold {
        return Err(Failure::guard(format!(
            "m = {lo} is below threshold N({}) = {threshold}",
            args.b
        )));
    }
    let consts = AnnulusConstants::new(args.b, table_size(hi.max(200))?)?;
    let rows = (lo..=hi)
        .map(|m| bifurcation_row(m, &consts))
        .collect::<Result<Vec<_>, _>>()?;

    let content = match args.format {
        Format::Json => {
            let records: Vec<RowRecord> = rows.iter().map(RowRecord::from).collect();
            let mut s = serde_json::to_string_pretty(&records).expect("rows serialise");
            s.push('\n');
            s
        }
        _ => {
            let mut s = String::from(
                "m,C_m,D_m,Delta_m,lambda_minus,lambda_plus,omega_minus,omega_plus,transversal\n",
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    r.m,
                    num(r.c_m),
                    num(r.d_m),
                    num(r.delta_m),
                    num(r.lambda_minus),
                    num(r.lambda_plus),
                    num(r.omega_minus),
                    num(r.omega_plus),
                    r.transversal
                );
            }
            s
        }
    };
    emit(args.out.as_deref(), &content)
}

fn cmd_threshold(args: ThresholdArgs) -> Result<(), Failure> {
    let consts = AnnulusConstants::new(args.b, table_size(200)?)?;
    let n = threshold_n(&consts)?;
    let below = discriminant(n - 1, &consts)?.e;
    let at = discriminant(n, &consts)?.e;
    println!(
        "b={} N={n} E_{}={} E_{n}={}",
        args.b,
        n - 1,
        num(below),
        num(at)
    );
    Ok(())
}

fn boundary_csv(branch: &Branch) -> String {
    let mut s = String::from("point,s,theta,x1,y1,x2,y2\n");
    for (i, pt) in branch.points.iter().enumerate() {
        for sample in pt.patch.boundary_samples(render::samples_per_boundary(branch.m)) {
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{},{}",
                num(pt.s),
                num(sample.theta),
                num(sample.x1),
                num(sample.y1),
                num(sample.x2),
                num(sample.y2)
            );
        }
    }
    s
}

fn cmd_branch(args: BranchArgs) -> Result<(), Failure> {
    require_format(args.format, &[Format::Json], "branch")?;
    if args.modes == 0 {
        return Err(Failure::usage("--modes must be at least 1"));
    }
    let step = 4 * args.modes * args.m;
    let quad = match args.quad {
        Some(p) if !p.is_multiple_of(step) => {
            return Err(Failure::guard(format!(
                "quadrature size P = {p} must be a multiple of 4·K·m = {step}"
            )))
        }
        Some(p) => p,
        None => resolved_quad_size(DEFAULT_QUAD, args.modes, args.m),
    };
    let opts = BranchOptions {
        modes: args.modes,
        quad,
        steps: args.steps,
        ds: args.ds,
        tol: args.tol,
        max_iter: args.max_iter,
        table_size: match std::env::var_os(NMAX_VAR) {
            Some(_) => Some(table_size(0)?),
            None => None,
        },
    };
    let branch = branch_continue(args.b, args.m, args.sign.into(), &opts)?;
    let record = BranchRecord::from(&branch);
    let mut json = serde_json::to_string_pretty(&record).expect("branch serialises");
    json.push('\n');
    emit(args.out.as_deref(), &json)?;
    if let Some(path) = &args.boundaries {
        emit(Some(path), &boundary_csv(&branch))?;
    }
    if let Some(reason) = &branch.stopped_reason {
        eprintln!(
            "warning: branch stopped after {} of {} steps: {reason}",
            branch.points.len() - 1,
            args.steps
        );
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<(), Failure> {
    require_format(args.format, &[Format::Text, Format::Json], "check")?;
    let reports = run_suite(&SuiteConfig {
        seed: args.seed,
        ..SuiteConfig::default()
    });
    let content = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&reports).expect("reports serialise");
            s.push('\n');
            s
        }
        _ => format_table(&reports),
    };
    emit(args.out.as_deref(), &content)?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::numerical(format!("failed checks: {}", failed.join(", "))))
    }
}

fn cmd_render(args: RenderArgs) -> Result<(), Failure> {
    require_format(args.format, &[Format::Svg], "render")?;
    let text = std::fs::read_to_string(&args.input).map_err(|e| Failure {
        code: failure::EXIT_IO,
        message: format!("cannot read {}: {e}", args.input.display()),
    })?;
    let record = render::parse_record(&text)?;
    let patches = render::select(&record, args.points.as_deref())?;
    emit(args.out.as_deref(), &render::render_svg(record.b, &patches))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Branch(a) => cmd_branch(a),
        Command::Check(a) => cmd_check(a),
        Command::Render(a) => cmd_render(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
