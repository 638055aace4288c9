use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod verify;

use config::{
    parse_complex, parse_f64, parse_grid, parse_i32, parse_support, require_positive, CommandConfig, FileConfig, Format,
    Oracle, Parsed, ParamsConfig, RegionConfig, RunConfig, Scale, Suite, UsageError,
};

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "DISKFLOW_THREADS";

#[derive(Parser, Debug)]
#[command(name = "diskflow", version, about = "Spectral, resolvent and semigroup computations for the flow past a rotating disk with suction")]
struct Cli {
    /// TOML file of key = value settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (stdout if absent; a path stem for CSV profiles).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance for quadratures and solves.
    #[arg(long, global = true)]
    tol: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Bound on |α| + |δ| for the small regime.
    #[arg(long)]
    window: Option<String>,
    /// Angular mode, ±1.
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
}

#[derive(Args, Debug, Default)]
struct RegionArgs {
    /// Sector half-angle; default 3π/4 − 0.1.
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    r_min: Option<String>,
    #[arg(long)]
    r_max: Option<String>,
    #[arg(long)]
    max_depth: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an invariant suite; exit 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
    /// Evaluate F_n(√λ).
    FnEval {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        /// auto, series or quadrature.
        #[arg(long)]
        method: Option<String>,
    },
    /// Certify a sector region zero-free.
    ZeroScan {
        #[command(flatten)]
        p: ParamArgs,
        #[command(flatten)]
        region: RegionArgs,
    },
    /// Certification over an (α, δ) grid.
    Sweep {
        /// Grid start:stop:count, a list or a value.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        /// Modes, e.g. 1 or 1,-1.
        #[arg(long, allow_hyphen_values = true)]
        n_set: Option<String>,
        #[command(flatten)]
        region: RegionArgs,
    },
    /// Apply the resolvent to a unit bump, or scan its norms along a ray.
    Resolvent {
        #[command(flatten)]
        p: ParamArgs,
        /// Bump support a:b.
        #[arg(long)]
        support: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, value_enum)]
        oracle: Option<Oracle>,
        /// Scan along arg λ = this angle instead of a single λ.
        #[arg(long, allow_hyphen_values = true)]
        scan_arg: Option<String>,
        /// |λ| grid for the scan.
        #[arg(long)]
        moduli: Option<String>,
        #[arg(long, value_enum)]
        scale: Option<Scale>,
    },
    /// Evolve a unit bump; several times produce a decay fit.
    Semigroup {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        support: Option<String>,
        /// Time or time grid, e.g. 50 or 10:1000:7:log.
        #[arg(long)]
        t: Option<String>,
        /// Inner contour radius.
        #[arg(long)]
        b: Option<String>,
        /// Contour ray angle.
        #[arg(long)]
        phi: Option<String>,
        #[arg(long, value_enum)]
        scale: Option<Scale>,
    },
}

fn params(file: &FileConfig, p: &ParamArgs) -> Parsed<(ParamsConfig, i32)> {
    let need = |flag: &Option<String>, key: &str| -> Parsed<f64> {
        let s = file.pick(flag, key).ok_or_else(|| UsageError(format!("--{key} is required")))?;
        parse_f64(key, &s)
    };
    let alpha = need(&p.alpha, "alpha")?;
    let delta = need(&p.delta, "delta")?;
    let window = match file.pick(&p.window, "window") {
        Some(s) => require_positive("window", parse_f64("window", &s)?)?,
        None => diskflow::spectral::SMALL_WINDOW,
    };
    let n = match file.pick(&p.n, "n") {
        Some(s) => parse_i32("n", &s)?,
        None => 1,
    };
    if n.abs() != 1 {
        return Err(UsageError(format!("--n must be 1 or -1, got {n}")));
    }
    Ok((ParamsConfig { alpha, delta, window }, n))
}

fn region(file: &FileConfig, r: &RegionArgs) -> Parsed<RegionConfig> {
    let num = |flag: &Option<String>, key: &str, default: f64| -> Parsed<f64> {
        file.pick(flag, key).map_or(Ok(default), |s| parse_f64(key, &s))
    };
    let max_depth = match file.pick(&r.max_depth, "max_depth") {
        Some(s) => s.trim().parse().map_err(|_| UsageError(format!("--max-depth: `{s}` is not a count")))?,
        None => 8,
    };
    Ok(RegionConfig {
        phi: num(&r.phi, "phi", 0.75 * std::f64::consts::PI - 0.1)?,
        r_min: num(&r.r_min, "r_min", 1e-5)?,
        r_max: num(&r.r_max, "r_max", 1e-2)?,
        max_depth,
    })
}

fn enum_value<T: clap::ValueEnum>(flag: Option<T>, file: &FileConfig, key: &str, default: T) -> Parsed<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(s) => T::from_str(s, true).map_err(|_| UsageError(format!("config `{key}`: unknown value `{s}`"))),
        None => Ok(default),
    }
}

fn resolve(cli: &Cli) -> Parsed<RunConfig> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let tol = match file.pick(&cli.tol, "tol") {
        Some(s) => require_positive("tol", parse_f64("tol", &s)?)?,
        None => 1e-10,
    };
    let format = enum_value(cli.format, &file, "format", Format::Json)?;
    let out = cli.out.clone().or_else(|| file.get("out").map(PathBuf::from));
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k > 0 => Some(k),
            _ => return Err(UsageError(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
        Err(_) => None,
    };
    let support = |flag: &Option<String>| -> Parsed<(f64, f64)> {
        file.pick(flag, "support").map_or(Ok((1.5, 3.0)), |s| parse_support(&s))
    };
    let command = match &cli.command {
        Command::Verify { suite } => CommandConfig::Verify { suite: enum_value(*suite, &file, "suite", Suite::All)? },
        Command::FnEval { p, lambda, method } => {
            let (params, n) = params(&file, p)?;
            let lambda = file.pick(lambda, "lambda").ok_or_else(|| UsageError("--lambda is required".into()))?;
            let method = match file.pick(method, "method").as_deref() {
                None | Some("auto") => diskflow::spectral::FnMethod::Auto,
                Some("series") => diskflow::spectral::FnMethod::Series,
                Some("quadrature") => diskflow::spectral::FnMethod::Quadrature,
                Some(x) => return Err(UsageError(format!("--method `{x}` must be auto, series or quadrature"))),
            };
            CommandConfig::FnEval { params, n, lambda: parse_complex(&lambda)?, method }
        }
        Command::ZeroScan { p, region: r } => {
            let (params, n) = params(&file, p)?;
            CommandConfig::ZeroScan { params, n, region: region(&file, r)? }
        }
        Command::Sweep { alpha, delta, n_set, region: r } => {
            let grid = |flag: &Option<String>, key: &str| -> Parsed<Vec<f64>> {
                let s = file.pick(flag, key).ok_or_else(|| UsageError(format!("--{key} is required")))?;
                parse_grid(key, &s)
            };
            let n_set = match file.pick(n_set, "n_set") {
                Some(s) => s.split(',').map(|x| parse_i32("n-set", x)).collect::<Parsed<Vec<i32>>>()?,
                None => vec![1],
            };
            if n_set.iter().any(|n| n.abs() != 1) {
                return Err(UsageError("--n-set may contain only 1 and -1".into()));
            }
            CommandConfig::Sweep { alpha: grid(alpha, "alpha")?, delta: grid(delta, "delta")?, n_set, region: region(&file, r)? }
        }
        Command::Resolvent { p, support: s, lambda, oracle, scan_arg, moduli, scale } => {
            let (params, n) = params(&file, p)?;
            let lambda = file.pick(lambda, "lambda").map(|s| parse_complex(&s)).transpose()?;
            let scan_arg = file.pick(scan_arg, "scan_arg").map(|s| parse_f64("scan-arg", &s)).transpose()?;
            if lambda.is_some() == scan_arg.is_some() {
                return Err(UsageError("give exactly one of --lambda and --scan-arg".into()));
            }
            let moduli = match file.pick(moduli, "moduli") {
                Some(s) => parse_grid("moduli", &s)?,
                None => parse_grid("moduli", "1e-4:1e-2:9:log")?,
            };
            CommandConfig::Resolvent {
                params,
                n,
                support: support(s)?,
                lambda,
                oracle: enum_value(*oracle, &file, "oracle", Oracle::Bessel)?,
                scan_arg,
                moduli,
                scale: enum_value(*scale, &file, "scale", Scale::Fixed)?,
            }
        }
        Command::Semigroup { p, support: s, t, b, phi, scale } => {
            let (params, n) = params(&file, p)?;
            let t = file.pick(t, "t").ok_or_else(|| UsageError("--t is required".into()))?;
            let t = parse_grid("t", &t)?;
            for &x in &t {
                require_positive("t", x)?;
            }
            let opt = |flag: &Option<String>, key: &str| file.pick(flag, key).map(|s| parse_f64(key, &s)).transpose();
            CommandConfig::Semigroup {
                params,
                n,
                support: support(s)?,
                t,
                b: opt(b, "b")?,
                phi: opt(phi, "phi")?,
                scale: enum_value(*scale, &file, "scale", Scale::Fixed)?,
            }
        }
    };
    Ok(RunConfig { command, tol, format, out, threads })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(k) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("cannot start {k} workers: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(commands::dispatch(&cfg).code())
}
