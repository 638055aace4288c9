//! Execution of a resolved [`RunConfig`].

use std::fs::File;
use std::io::{self, BufWriter, Write};

use diskflow::report::{write_csv_preamble, write_json};
use diskflow::resolvent::{
    resolvent_apply, resolvent_norm_scan, resolvent_oracle_fd, BumpForcing, FdGrid, ResolventOutput, ScanForcing,
};
use diskflow::semigroup::{
    decay_fit_with, dunford_apply, write_decay_csv, DunfordContour, InitialData, DEFAULT_B, DEFAULT_DUNFORD_PHI,
};
use diskflow::spectral::{f_n_eval, mode_constants, FlowParams, SpectralPoint};
use diskflow::zeros::{certify_zero_free_opts, stability_sweep_opts, write_sweep_csv, CertifyOptions, SectorRegion};
use diskflow::{Error, C64};
use serde::Serialize;

use crate::config::{CommandConfig, Format, Oracle, ParamsConfig, RegionConfig, RunConfig, Scale};
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A suite assertion failed, or a computation failed.
    Failed,
    /// The inputs violate a precondition.
    Usage,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Failed => 1,
            Outcome::Usage => 2,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(io::Error),
    Assertion,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Run = std::result::Result<(), Failure>;

fn is_usage(e: &Error) -> bool {
    matches!(e, Error::Domain(_) | Error::Precondition(_) | Error::MalformedContour(_))
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::BudgetExhausted { .. } => "budget-exhausted",
        Error::Domain(_) => "domain",
        Error::Pole(_) => "pole",
        Error::Range(_) => "range",
        Error::Precondition(_) => "precondition",
        Error::MalformedContour(_) => "malformed-contour",
        Error::Decay(_) => "decay",
        Error::MethodFailure(_) => "method-failure",
        Error::Inconclusive { .. } => "inconclusive",
        Error::OnContourZero { .. } => "on-contour-zero",
        Error::NoConvergence(_) => "no-convergence",
        Error::NearSpectrum(_) => "near-spectrum",
        Error::Consistency(_) => "consistency",
        Error::Grid(_) => "grid",
        Error::Safety(_) => "safety",
    }
}

pub fn dispatch(cfg: &RunConfig) -> Outcome {
    match run(cfg) {
        Ok(()) => Outcome::Success,
        Err(Failure::Assertion) => Outcome::Failed,
        Err(Failure::Io(e)) => {
            eprintln!("error: output: {e}");
            Outcome::Failed
        }
        Err(Failure::Core(e)) => {
            let report = serde_json::json!({"error": error_kind(&e), "message": e.to_string(), "command": cfg.command.name()});
            eprintln!("{report}");
            if is_usage(&e) {
                Outcome::Usage
            } else {
                Outcome::Failed
            }
        }
    }
}

fn sink(cfg: &RunConfig) -> io::Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn emit_json<T: Serialize>(cfg: &RunConfig, kind: &str, data: &T) -> Run {
    let mut w = sink(cfg)?;
    write_json(&mut w, kind, &cfg.to_json(), data)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes the preamble and then `body` to the output.
fn emit_csv(cfg: &RunConfig, kind: &str, body: impl FnOnce(&mut dyn Write) -> Run) -> Run {
    let mut w = sink(cfg)?;
    write_csv_preamble(&mut w, kind, &cfg.to_json())?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn flow(p: &ParamsConfig) -> diskflow::Result<FlowParams> {
    Ok(FlowParams::new(p.alpha, p.delta)?.with_window(p.window))
}

fn sector(r: &RegionConfig) -> diskflow::Result<SectorRegion> {
    SectorRegion::new(r.phi, r.r_min, r.r_max)
}

fn certify_options(r: &RegionConfig, tol: f64) -> CertifyOptions {
    CertifyOptions { max_depth: r.max_depth, tol: tol.max(1e-12).min(1e-3), ..CertifyOptions::default() }
}

fn write_row(w: &mut dyn Write, cells: &[String]) -> io::Result<()> {
    writeln!(w, "{}", cells.join(","))
}

fn e17(v: f64) -> String {
    format!("{v:.17e}")
}

#[derive(Serialize)]
struct FnEval {
    lambda: C64,
    sqrt_lambda: C64,
    xi: C64,
    value: C64,
    abs_err: f64,
}

fn profile_csv(w: &mut dyn Write, o: &ResolventOutput, show_lambda: bool) -> Run {
    if show_lambda {
        writeln!(w, "# lambda: {}", o.lambda)?;
    }
    writeln!(w, "# d_defect: {:e}", o.d_defect)?;
    writeln!(w, "# noslip_defect: {:e}", o.noslip_defect)?;
    writeln!(w, "# norm_v: {:e}", o.norm_v)?;
    writeln!(w, "# norm_grad: {:e}", o.norm_grad)?;
    if let Some(c) = o.c_coeff {
        writeln!(w, "# c_coeff: {c}")?;
    }
    write_row(w, &["r", "re(omega)", "im(omega)", "re(v_r)", "im(v_r)", "re(v_theta)", "im(v_theta)"].map(String::from))?;
    let (vr, vt) = &o.velocity;
    for (i, &r) in o.vorticity.grid.iter().enumerate() {
        let (a, b, c) = (o.vorticity.values[i], vr.values[i], vt.values[i]);
        write_row(w, &[e17(r), e17(a.re), e17(a.im), e17(b.re), e17(b.im), e17(c.re), e17(c.im)])?;
    }
    Ok(())
}

fn run(cfg: &RunConfig) -> Run {
    match &cfg.command {
        CommandConfig::Verify { suite } => {
            let rep = verify::run(*suite);
            match cfg.format {
                Format::Json => emit_json(cfg, "verify", &rep)?,
                Format::Csv => emit_csv(cfg, "verify", |w| {
                    write_row(w, &["suite", "name", "value", "limit", "passed"].map(String::from))?;
                    for c in &rep.checks {
                        let name = format!("\"{}\"", c.name.replace('"', "'"));
                        write_row(w, &[c.suite.to_string(), name, format!("{:e}", c.value), format!("{:e}", c.limit), c.passed.to_string()])?;
                    }
                    Ok(())
                })?,
            }
            for c in rep.checks.iter().filter(|c| !c.passed) {
                eprintln!("FAILED {}: {} = {:e} (limit {:e}){}", c.suite, c.name, c.value, c.limit, c.note.as_ref().map(|n| format!(" [{n}]")).unwrap_or_default());
            }
            if rep.passed {
                Ok(())
            } else {
                Err(Failure::Assertion)
            }
        }
        CommandConfig::FnEval { params, n, lambda, method } => {
            let p = flow(params)?;
            let pt = SpectralPoint::new(*lambda)?;
            let v = f_n_eval(&p, *n, &pt, cfg.tol, *method)?;
            let out = FnEval { lambda: pt.lambda, sqrt_lambda: pt.sqrt_lambda, xi: mode_constants(&p, *n)?.xi, value: v.value, abs_err: v.abs_err };
            match cfg.format {
                Format::Json => emit_json(cfg, "fn-eval", &out),
                Format::Csv => emit_csv(cfg, "fn-eval", |w| {
                    write_row(w, &["re_lambda", "im_lambda", "re_f", "im_f", "abs_err"].map(String::from))?;
                    write_row(w, &[e17(out.lambda.re), e17(out.lambda.im), e17(out.value.re), e17(out.value.im), format!("{:e}", out.abs_err)])?;
                    Ok(())
                }),
            }
        }
        CommandConfig::ZeroScan { params, n, region } => {
            let p = flow(params)?;
            let rep = certify_zero_free_opts(&p, *n, &sector(region)?, &certify_options(region, cfg.tol))?;
            match cfg.format {
                Format::Json => emit_json(cfg, "zero-scan", &rep),
                Format::Csv => emit_csv(cfg, "zero-scan", |w| {
                    write_row(w, &["winding_total", "status", "subdivisions", "min_margin", "zeros"].map(String::from))?;
                    let zeros: Vec<String> = rep.refined_zeros.iter().map(|z| format!("{:e}:{:e}:{:e}", z.lambda.re, z.lambda.im, z.residual)).collect();
                    write_row(w, &[rep.winding_total.to_string(), rep.status.as_str().to_string(), rep.subdivisions.to_string(), format!("{:e}", rep.min_margin), zeros.join(";")])?;
                    Ok(())
                }),
            }
        }
        CommandConfig::Sweep { alpha, delta, n_set, region } => {
            if alpha.iter().any(|&a| a == 0.0) {
                return Err(Error::Precondition("α ≠ 0 required on the whole α grid".into()).into());
            }
            let rows = stability_sweep_opts(alpha, delta, &sector(region)?, n_set, &certify_options(region, cfg.tol));
            match cfg.format {
                Format::Json => emit_json(cfg, "sweep", &rows),
                Format::Csv => emit_csv(cfg, "sweep", |w| Ok(write_sweep_csv(&rows, w)?)),
            }
        }
        CommandConfig::Resolvent { params, n, support, lambda, oracle, scan_arg, moduli, scale } => {
            let p = flow(params)?;
            let bump = BumpForcing::new(*n, support.0, support.1)?;
            if let Some(l) = lambda {
                let pt = SpectralPoint::new(*l)?;
                let forcing = match scale {
                    Scale::Fixed => bump,
                    Scale::Diffusive => ScanForcing::Diffusive { a: support.0, b: support.1 }.at(*n, l.norm())?,
                };
                let out = match oracle {
                    Oracle::Bessel => resolvent_apply(&p, *n, &pt, &forcing, cfg.tol)?,
                    Oracle::Fd => resolvent_oracle_fd(&p, *n, &pt, &forcing, &FdGrid::default())?,
                };
                return match cfg.format {
                    Format::Json => emit_json(cfg, "resolvent", &out),
                    Format::Csv => emit_csv(cfg, "resolvent", |w| profile_csv(w, &out, true)),
                };
            }
            let arg = scan_arg.expect("either λ or a scan angle");
            let forcing = match scale {
                Scale::Fixed => ScanForcing::Fixed(bump),
                Scale::Diffusive => ScanForcing::Diffusive { a: support.0, b: support.1 },
            };
            let scan = resolvent_norm_scan(&p, *n, arg, moduli, &forcing)?;
            match cfg.format {
                Format::Json => emit_json(cfg, "resolvent-scan", &scan),
                Format::Csv => emit_csv(cfg, "resolvent-scan", |w| {
                    writeln!(w, "# slope_v: {}", scan.slope_v)?;
                    writeln!(w, "# slope_grad: {}", scan.slope_grad)?;
                    write_row(w, &["modulus", "re_lambda", "im_lambda", "norm_v", "norm_grad", "flag"].map(String::from))?;
                    for r in &scan.rows {
                        let flag = r.flag.clone().unwrap_or_default().replace(',', ";");
                        write_row(w, &[format!("{:e}", r.modulus), e17(r.lambda.re), e17(r.lambda.im), e17(r.norm_v), e17(r.norm_grad), flag])?;
                    }
                    Ok(())
                }),
            }
        }
        CommandConfig::Semigroup { params, n, support, t, b, phi, scale } => {
            let p = flow(params)?;
            let data = match scale {
                Scale::Fixed => InitialData::Fixed(BumpForcing::new(*n, support.0, support.1)?),
                Scale::Diffusive => InitialData::Diffusive { a: support.0, b: support.1 },
            };
            let contour = |t: f64| DunfordContour::for_time(t, b.unwrap_or(DEFAULT_B.min(1.0 / t)), phi.unwrap_or(DEFAULT_DUNFORD_PHI));
            if let [t] = t[..] {
                let f = data.at(*n, t)?;
                let s = dunford_apply(&p, *n, t, &f, &contour(t)?)?;
                return match cfg.format {
                    Format::Json => emit_json(cfg, "semigroup", &s),
                    Format::Csv => emit_csv(cfg, "semigroup", |w| {
                        writeln!(w, "# t: {t}")?;
                        writeln!(w, "# abs_err: {:e}", s.abs_err)?;
                        profile_csv(w, &s.output(), false)
                    }),
                };
            }
            let fit = decay_fit_with(&p, *n, &data, t, contour)?;
            match cfg.format {
                Format::Json => emit_json(cfg, "semigroup-decay", &fit),
                Format::Csv => emit_csv(cfg, "semigroup-decay", |w| {
                    writeln!(w, "# slope_v: {}", fit.velocity.slope)?;
                    writeln!(w, "# slope_grad: {}", fit.gradient.slope)?;
                    Ok(write_decay_csv(w, &fit)?)
                }),
            }
        }
    }
}
