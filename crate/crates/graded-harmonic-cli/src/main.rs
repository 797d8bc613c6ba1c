//! `gharm`: command-line front end of the graded-harmonic library.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 a verification check failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graded_harmonic::fracops::FracRoute;
use graded_harmonic::harness::{self, ExperimentConfig, GfunRoute, HarnessError, Operation};
use graded_harmonic::heat::HeatKind;
use graded_harmonic::strichartz::DifferenceOrder;

#[derive(Debug, Parser)]
#[command(
    name = "gharm",
    version,
    about = "Heat semigroups, fractional powers and square functions on homogeneous groups"
)]
struct Cli {
    /// TOML experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "GHARM_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Setting {
    /// `R<n>`, `H1`, or a group description file.
    #[arg(long)]
    group: Option<String>,
    /// `origin:spacing:count` per axis, comma separated.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_parser = parse_heat)]
    heat: Option<HeatKind>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the heat kernel h_t on a grid.
    Kernel {
        #[command(flatten)]
        setting: Setting,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        output: Option<String>,
    },
    /// Fractional power ℛ^α f of a field.
    Fracpow {
        #[command(flatten)]
        setting: Setting,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_parser = parse_frac_route)]
        route: Option<FracRoute>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<String>,
    },
    /// Square function g_α, G_s or g_φ of a field.
    Gfun {
        #[command(flatten)]
        setting: Setting,
        /// g-alpha, g-s or g-phi-alpha.
        #[arg(long, value_parser = parse_gfun_route)]
        route: Option<GfunRoute>,
        /// α for g-alpha and g-phi-alpha, s for g-s.
        #[arg(long, alias = "alpha", alias = "s")]
        exponent: Option<f64>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<String>,
    },
    /// Difference functional per point, plus the equivalence report.
    Strichartz {
        #[command(flatten)]
        setting: Setting,
        /// first or second.
        #[arg(long)]
        order: Option<DifferenceOrder>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        output: Option<String>,
        #[arg(long)]
        spread_bound: Option<f64>,
    },
    /// CSV of (r, φ_α(r)) on ℝⁿ.
    Figure {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        output: Option<String>,
    },
    /// Run named checks (or `all`).
    Verify { checks: Vec<String> },
}

fn parse_heat(s: &str) -> Result<HeatKind, String> {
    s.replace('-', "_")
        .parse()
        .map_err(|e: graded_harmonic::heat::HeatError| e.to_string())
}

fn parse_frac_route(s: &str) -> Result<FracRoute, String> {
    match s {
        "pointwise" => Ok(FracRoute::Pointwise),
        "balakrishnan" => Ok(FracRoute::Balakrishnan),
        "spectral" => Ok(FracRoute::Spectral),
        _ => Err(format!("unknown route `{s}` (pointwise, balakrishnan, spectral)")),
    }
}

fn parse_gfun_route(s: &str) -> Result<GfunRoute, String> {
    match s.replace('_', "-").as_str() {
        "g-alpha" => Ok(GfunRoute::GAlpha),
        "g-s" => Ok(GfunRoute::GS),
        "g-phi-alpha" => Ok(GfunRoute::GPhiAlpha),
        _ => Err(format!("unknown route `{s}` (g-alpha, g-s, g-phi-alpha)")),
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, HarnessError> {
    v.ok_or_else(|| {
        HarnessError::Usage(format!(
            "missing --{flag} (or the matching key in the config operation)"
        ))
    })
}

fn apply_setting(cfg: &mut ExperimentConfig, s: Setting) {
    if let Some(g) = s.group {
        cfg.group = g;
    }
    if s.grid.is_some() {
        cfg.grid = s.grid;
    }
    if s.heat.is_some() {
        cfg.heat = s.heat;
    }
}

/// Flags first, then the config's operation when it has the same kind.
fn build_operation(cfg: &mut ExperimentConfig, command: Command) -> Result<Operation, HarnessError> {
    let prior = cfg.operation.take();
    Ok(match command {
        Command::Kernel { setting, t, output } => {
            apply_setting(cfg, setting);
            let (pt, po) = match prior {
                Some(Operation::Kernel { t, output }) => (Some(t), Some(output)),
                _ => (None, None),
            };
            Operation::Kernel {
                t: required(t.or(pt), "t")?,
                output: output.or(po).unwrap_or_else(|| "kernel.ghf".into()),
            }
        }
        Command::Fracpow {
            setting,
            alpha,
            route,
            input,
            output,
        } => {
            apply_setting(cfg, setting);
            let (pa, pr, pi, po) = match prior {
                Some(Operation::Fracpow {
                    alpha,
                    route,
                    input,
                    output,
                }) => (Some(alpha), Some(route), Some(input), Some(output)),
                _ => (None, None, None, None),
            };
            Operation::Fracpow {
                alpha: required(alpha.or(pa), "alpha")?,
                route: route.or(pr).unwrap_or(FracRoute::Balakrishnan),
                input: required(input.or(pi), "input")?,
                output: output.or(po).unwrap_or_else(|| "fracpow.ghf".into()),
            }
        }
        Command::Gfun {
            setting,
            route,
            exponent,
            input,
            output,
        } => {
            apply_setting(cfg, setting);
            let (pr, pe, pi, po) = match prior {
                Some(Operation::Gfun {
                    route,
                    exponent,
                    input,
                    output,
                }) => (Some(route), Some(exponent), Some(input), Some(output)),
                _ => (None, None, None, None),
            };
            Operation::Gfun {
                route: route.or(pr).unwrap_or(GfunRoute::GAlpha),
                exponent: required(exponent.or(pe), "exponent")?,
                input: required(input.or(pi), "input")?,
                output: output.or(po).unwrap_or_else(|| "gfun.ghf".into()),
            }
        }
        Command::Strichartz {
            setting,
            order,
            s,
            p,
            inputs,
            output,
            spread_bound,
        } => {
            apply_setting(cfg, setting);
            let prev = match prior {
                Some(Operation::Strichartz {
                    order,
                    s,
                    p,
                    inputs,
                    output,
                    spread_bound,
                }) => Some((order, s, p, inputs, output, spread_bound)),
                _ => None,
            };
            let (po, ps, pp, pi, pout, pb) = match prev {
                Some((o, s, p, i, out, b)) => (Some(o), Some(s), Some(p), i, Some(out), Some(b)),
                None => (None, None, None, Vec::new(), None, None),
            };
            Operation::Strichartz {
                order: order.or(po).unwrap_or(DifferenceOrder::First),
                s: required(s.or(ps), "s")?,
                p: p.or(pp).unwrap_or(2.0),
                inputs: if inputs.is_empty() { pi } else { inputs },
                output: output.or(pout).unwrap_or_else(|| "strichartz.ghf".into()),
                spread_bound: spread_bound.or(pb).unwrap_or(10.0),
            }
        }
        Command::Figure {
            n,
            alpha,
            r_max,
            points,
            output,
        } => {
            let prev = match prior {
                Some(Operation::Figure {
                    n,
                    alpha,
                    r_max,
                    points,
                    output,
                }) => Some((n, alpha, r_max, points, output)),
                _ => None,
            };
            let (pn, pa, pr, pp, po) = match prev {
                Some((n, a, r, p, o)) => (Some(n), Some(a), Some(r), Some(p), Some(o)),
                None => (None, None, None, None, None),
            };
            Operation::Figure {
                n: n.or(pn).unwrap_or(1),
                alpha: alpha.or(pa).unwrap_or(0.5),
                r_max: r_max.or(pr).unwrap_or(10.0),
                points: points.or(pp).unwrap_or(1001),
                output: output.or(po).unwrap_or_else(|| "phi_alpha.csv".into()),
            }
        }
        Command::Verify { checks } => {
            let checks = if checks.is_empty() {
                match prior {
                    Some(Operation::Verify { checks }) => checks,
                    _ => vec!["all".into()],
                }
            } else {
                checks
            };
            Operation::Verify { checks }
        }
    })
}

fn execute(cli: Cli) -> Result<ExitCode, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(HarnessError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| HarnessError::Usage(format!("--jobs: {e}")))?;
    }
    let op = build_operation(&mut cfg, cli.command)?;
    cfg.operation = Some(op);
    let summary = harness::run(&cfg)?;
    for path in &summary.artifacts {
        println!("wrote {}", path.display());
    }
    for r in &summary.reports {
        println!(
            "{:<28} {}  constant={:.6e}  {}",
            r.check_name,
            if r.pass { "PASS" } else { "FAIL" },
            r.empirical_constant,
            r.criterion.describe()
        );
    }
    let verifying = matches!(cfg.operation, Some(Operation::Verify { .. }));
    if verifying && summary.failures() > 0 {
        eprintln!("{} of {} checks failed", summary.failures(), summary.reports.len());
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gharm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
