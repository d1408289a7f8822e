//! Batch command-line interface.
//!
//! Every report starts with `#`-prefixed lines carrying the tool version,
//! the SHA-256 of the config text, the model label and the command line.
//! Exit codes: 0 when every verdict passes, 1 when one fails, 2 for usage and
//! configuration errors, 3 for numerical failures. Errors are also printed to
//! stderr as one JSON object.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{
    combined_bound_check, off_diagonal_check, on_diagonal_fit, small_jump_check,
    tempered_asymptotics_check, BoundReport, DEFAULT_EPS,
};
use crate::config::{config_hash, ModelConfig};
use crate::density::{density_grid, GridParams};
use crate::dirichlet::{default_family, nash_check, TestFunction};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::levy_model::{LevyMeasure, LevyModel};
use crate::rate::{ldp_check, rate_function, rate_table_csv};
use crate::simulate::{
    empirical_vs_fourier, sample_increments, write_samples, Compensation, SamplePlan, SampleSidecar,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "levy-heat",
    version,
    about = "Heat-kernel computations for symmetric Lévy processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Model configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Grid {
    /// Number of grid nodes per axis.
    #[arg(long)]
    nodes: Option<usize>,
    /// Grid spacing.
    #[arg(long)]
    spacing: Option<f64>,
    /// Largest node count reached by automatic refinement.
    #[arg(long)]
    max_nodes: Option<usize>,
}

impl Grid {
    fn params(&self) -> GridParams {
        let mut p = GridParams::default();
        if self.nodes.is_some() {
            p.nodes = self.nodes;
            p.max_nodes = self.nodes;
        }
        if self.spacing.is_some() {
            p.spacing = self.spacing;
        }
        if self.max_nodes.is_some() {
            p.max_nodes = self.max_nodes;
        }
        p
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structural checks of the exponent and model flags.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Tables of ψ and Λ along the first axis.
    Exponent {
        #[command(flatten)]
        common: Common,
        /// Frequencies, `start:stop:step` or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
    },
    /// Transition density on a grid.
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        grid: Grid,
    },
    /// Rate function along the first axis.
    Rate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Heat-kernel bound reports.
    Bounds {
        #[command(subcommand)]
        which: BoundCommand,
    },
    /// Empirical Nash constants over the default test family.
    Nash {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Multiplies the node count of every test grid.
        #[arg(long, default_value_t = 1)]
        refine: usize,
    },
    /// Large-deviation table e(ℓ).
    Ldp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value = "1,2,4,8,16")]
        ells: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// Monte Carlo samples of X_t, optionally compared with the density.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum, default_value_t = CompensationArg::Gaussian)]
        compensation: CompensationArg,
        /// Compute the KS distance to the Fourier density.
        #[arg(long)]
        compare: bool,
        #[arg(long, default_value_t = 0.01)]
        ks_threshold: f64,
    },
}

#[derive(Subcommand, Debug)]
enum BoundCommand {
    /// p_t(x) ≤ e^{-D_t²(x)} p_t(0).
    OffDiagonal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// Fit of sup p_t ≤ c [f^{-1}(1/(γt))]^{n/2}.
    OnDiagonal {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        ts: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// On-diagonal fit combined with the off-diagonal factor, 0 < t ≤ 1.
    Combined {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Times used for the on-diagonal fit.
        #[arg(long, allow_hyphen_values = true)]
        ts: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// Closed-form rate bound for measures supported in [-1, 1].
    SmallJump {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Growth of ξ₀ for tempered tails.
    Asymptotics {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CompensationArg {
    None,
    Gaussian,
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding), a comma
/// list, or a single number.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("`{p}` is not a number")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').map(num).collect(),
        3 => {
            let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(h > 0.0) || b < a {
                return Err(Error::invalid(format!(
                    "range `{s}` needs step > 0 and stop ≥ start"
                )));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            if n > 10_000_000 {
                return Err(Error::invalid(format!("range `{s}` has too many points")));
            }
            Ok((0..=n).map(|k| a + k as f64 * h).collect())
        }
        _ => Err(Error::invalid(format!(
            "`{s}` is neither a number, a list nor start:stop:step"
        ))),
    }
}

struct Context {
    model: LevyModel,
    config: ModelConfig,
    header: Vec<String>,
}

fn load(common: &Common, command_line: &str) -> Result<Context> {
    let (config, text) = ModelConfig::load(&common.config)?;
    let model = config.build()?;
    let header = vec![
        format!("levy-heat {VERSION}"),
        format!("config-sha256 {}", config_hash(&text)),
        format!("model {}", model.label()),
        format!("command {command_line}"),
    ];
    Ok(Context {
        model,
        config,
        header,
    })
}

fn with_header(header: &[String], body: &str) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    out.push_str(body);
    out
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn point(model: &LevyModel, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; model.dim()];
    p[0] = x;
    p
}

fn support_radius(m: Option<&LevyMeasure>) -> f64 {
    match m {
        Some(LevyMeasure::Atoms(a)) => a
            .iter()
            .map(|a| a.point.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max),
        Some(LevyMeasure::Radial(g)) => g.radius(),
        Some(LevyMeasure::TemperedTail { core, .. }) => support_radius(core.as_deref()).max(1.0),
        Some(LevyMeasure::Composite(parts)) => parts
            .iter()
            .map(|p| support_radius(Some(p)))
            .fold(0.0, f64::max),
        None => 0.0,
    }
}

fn fnum(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs one report and returns whether its verdicts passed.
fn bound_report(ctx: &Context, report: &BoundReport, out: &Option<PathBuf>) -> Result<bool> {
    let csv = with_header(&ctx.header, &report.to_csv());
    match out {
        Some(p) => {
            write_atomic(p, csv.as_bytes())?;
            println!("{}", report.summary_json());
        }
        None => {
            print!("{csv}");
            println!("# summary {}", report.summary_json());
        }
    }
    Ok(report.verdict)
}

fn require_bernstein(ctx: &Context) -> Result<crate::bernstein::BernsteinFn> {
    ctx.config
        .bernstein_fn()?
        .ok_or_else(|| Error::invalid("this command needs a `bernstein` entry in the config"))
}

fn execute(cmd: Command, command_line: &str) -> Result<bool> {
    match cmd {
        Command::Validate { common } => {
            let ctx = load(&common, command_line)?;
            let report = ctx.model.validate()?;
            let flags = ctx.model.flags();
            let body = json!({
                "version": VERSION,
                "header": ctx.header,
                "checks": report.checks,
                "flags": {
                    "has_exp_moments": flags.has_exp_moments,
                    "hartman_wintner_ok": flags.hartman_wintner_ok,
                },
                "passed": report.passed,
            });
            emit(
                &common.out,
                &format!("{}\n", serde_json::to_string_pretty(&body).expect("json")),
            )?;
            Ok(report.passed)
        }
        Command::Exponent { common, xi } => {
            let ctx = load(&common, command_line)?;
            let mut body = String::from("xi,psi,lambda\n");
            for s in parse_grid(&xi)? {
                let p = point(&ctx.model, s);
                let psi = ctx.model.psi(&p)?;
                let lam = if ctx.model.has_exp_moments() {
                    fnum(ctx.model.cumulant(&p)?)
                } else {
                    String::from("inf")
                };
                let _ = writeln!(body, "{},{},{}", fnum(s), fnum(psi), lam);
            }
            emit(&common.out, &with_header(&ctx.header, &body))?;
            Ok(true)
        }
        Command::Density { common, t, grid } => {
            let ctx = load(&common, command_line)?;
            let g = density_grid(&ctx.model, t, &grid.params())?;
            let summary = json!({
                "t": t,
                "nodes": g.nodes,
                "spacing": g.spacing,
                "p0": g.at_origin(),
                "mass": g.diagnostics.mass,
                "warnings": g.diagnostics.warnings,
            });
            match &common.out {
                Some(p) => {
                    g.write_csv(p, &ctx.header)?;
                    println!("{summary}");
                }
                None => {
                    let dir =
                        std::env::temp_dir().join(format!("levy-heat-{}.csv", std::process::id()));
                    g.write_csv(&dir, &ctx.header)?;
                    let text =
                        std::fs::read_to_string(&dir).map_err(|e| Error::invalid(e.to_string()))?;
                    let _ = std::fs::remove_file(&dir);
                    print!("{text}");
                }
            }
            Ok(true)
        }
        Command::Rate { common, t, x } => {
            let ctx = load(&common, command_line)?;
            let results = parse_grid(&x)?
                .into_iter()
                .map(|v| rate_function(&ctx.model, t, &point(&ctx.model, v)))
                .collect::<Result<Vec<_>>>()?;
            emit(
                &common.out,
                &with_header(&ctx.header, &rate_table_csv(&results)),
            )?;
            Ok(true)
        }
        Command::Bounds { which } => match which {
            BoundCommand::OffDiagonal { common, t, x, grid } => {
                let ctx = load(&common, command_line)?;
                let xs: Vec<Vec<f64>> = parse_grid(&x)?
                    .into_iter()
                    .map(|v| point(&ctx.model, v))
                    .collect();
                let r = off_diagonal_check(&ctx.model, t, &xs, &grid.params())?;
                bound_report(&ctx, &r, &common.out)
            }
            BoundCommand::OnDiagonal { common, ts, grid } => {
                let ctx = load(&common, command_line)?;
                let f = require_bernstein(&ctx)?;
                let r = on_diagonal_fit(&ctx.model, &f, &parse_grid(&ts)?, &grid.params())?;
                bound_report(&ctx, &r, &common.out)
            }
            BoundCommand::Combined {
                common,
                t,
                x,
                ts,
                grid,
            } => {
                let ctx = load(&common, command_line)?;
                let f = require_bernstein(&ctx)?;
                let fit = on_diagonal_fit(&ctx.model, &f, &parse_grid(&ts)?, &grid.params())?;
                let xs: Vec<Vec<f64>> = parse_grid(&x)?
                    .into_iter()
                    .map(|v| point(&ctx.model, v))
                    .collect();
                let r = combined_bound_check(&ctx.model, &f, &fit, t, &xs, &grid.params())?;
                bound_report(&ctx, &r, &common.out)
            }
            BoundCommand::SmallJump { common, t, x, eps } => {
                let ctx = load(&common, command_line)?;
                let r = small_jump_check(&ctx.model, t, &parse_grid(&x)?, eps)?;
                bound_report(&ctx, &r, &common.out)
            }
            BoundCommand::Asymptotics { common, t, x, eps } => {
                let ctx = load(&common, command_line)?;
                let r = tempered_asymptotics_check(&ctx.model, t, &parse_grid(&x)?, eps)?;
                let mut body = String::from("x,xi0,predicted,ratio,D_sq,exponent,flag\n");
                for row in &r.rows {
                    let flag = match &row.flag {
                        crate::bounds::RowFlag::Ok => "ok",
                        crate::bounds::RowFlag::Regime(_) => "regime",
                        crate::bounds::RowFlag::PassByUnderflow => "pass-by-underflow",
                        crate::bounds::RowFlag::Failed(_) => "failed",
                    };
                    let _ = writeln!(
                        body,
                        "{},{},{},{},{},{},{flag}",
                        fnum(row.x),
                        fnum(row.xi0),
                        fnum(row.predicted),
                        fnum(row.ratio),
                        fnum(row.d_sq),
                        fnum(row.exponent)
                    );
                }
                emit(&common.out, &with_header(&ctx.header, &body))?;
                let verdict = r.deviation_decreasing && r.exponent_bound_holds;
                eprintln!(
                    "{}",
                    json!({
                        "bound_id": "asymptotics",
                        "deviation_decreasing": r.deviation_decreasing,
                        "final_deviation": r.final_deviation,
                        "exponent_bound_holds": r.exponent_bound_holds,
                        "verdict": if verdict { "pass" } else { "fail" },
                    })
                );
                Ok(verdict)
            }
        },
        Command::Nash {
            common,
            delta,
            refine,
        } => {
            let ctx = load(&common, command_line)?;
            let f = require_bernstein(&ctx)?;
            let family = default_family(support_radius(ctx.model.measure()))?
                .into_iter()
                .map(|u| {
                    if refine > 1 {
                        TestFunction::new(u.kind, u.nodes * refine, u.spacing / refine as f64)
                    } else {
                        Ok(u)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let r = nash_check(&ctx.model, &f, delta, &family)?;
            emit(&common.out, &with_header(&ctx.header, &r.to_csv()))?;
            let verdict = r.worst_c0.is_finite() && !r.counterexample;
            eprintln!(
                "{}",
                json!({"worst_c0": r.worst_c0, "counterexample": r.counterexample, "warnings": r.warnings})
            );
            Ok(verdict)
        }
        Command::Ldp {
            common,
            t,
            x,
            ells,
            grid,
        } => {
            let ctx = load(&common, command_line)?;
            let r = ldp_check(&ctx.model, t, x, &parse_grid(&ells)?, &grid.params())?;
            let mut body = format!(
                "# D_sq={}\n# threshold={}\nell,scaled_log_density,error,failure\n",
                fnum(r.d_sq),
                fnum(r.threshold)
            );
            for row in &r.rows {
                let _ = writeln!(
                    body,
                    "{},{},{},{}",
                    fnum(row.ell),
                    row.scaled_log_density.map_or(String::new(), fnum),
                    row.error.map_or(String::new(), fnum),
                    row.failure.clone().unwrap_or_default().replace(',', ";")
                );
            }
            emit(&common.out, &with_header(&ctx.header, &body))?;
            Ok(r.passed)
        }
        Command::Simulate {
            common,
            t,
            n,
            seed,
            epsilon,
            compensation,
            compare,
            ks_threshold,
        } => {
            let ctx = load(&common, command_line)?;
            let compensation = match compensation {
                CompensationArg::None => Compensation::None,
                CompensationArg::Gaussian => Compensation::Gaussian,
            };
            let mut plan = SamplePlan::new(t, n, seed).with_compensation(compensation);
            plan.epsilon = epsilon;
            let samples = sample_increments(&ctx.model, &plan)?;
            let out = common
                .out
                .as_deref()
                .ok_or_else(|| Error::invalid("simulate needs --out for the binary sample file"))?;
            let sidecar = SampleSidecar {
                seed,
                n,
                t,
                model: ctx.model.label().to_string(),
                epsilon,
                compensation,
            };
            write_samples(Path::new(out), &samples, &sidecar)?;
            if compare {
                let grid = density_grid(&ctx.model, t, &GridParams::default())?;
                let c = empirical_vs_fourier(&samples, &grid)?;
                println!("{}", serde_json::to_string(&c).expect("json"));
                return Ok(c.ks_distance <= ks_threshold);
            }
            Ok(true)
        }
    }
}

fn error_kind(e: &Error) -> (&'static str, i32) {
    match e {
        Error::InvalidInput(_) => ("invalid_input", 2),
        Error::OutOfRange { .. } => ("out_of_range", 2),
        Error::Precondition(_) => ("precondition", 2),
        Error::FeatureUnavailable(_) => ("feature_unavailable", 2),
        Error::Regime(_) => ("regime", 2),
        Error::Divergence(_) => ("divergence", 3),
        Error::Numeric { .. } => ("numeric", 3),
        Error::NoDensity(_) => ("no_density", 3),
    }
}

/// Parses `args` (including the program name) and runs the command; returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let command_line = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    match execute(cli.command, &command_line) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let (kind, code) = error_kind(&e);
            eprintln!("{}", json!({"error": kind, "message": e.to_string()}));
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(
            parse_grid("0:1:0.25").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_grid("1,2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
        assert_eq!(parse_grid("0:6:0.5").unwrap().len(), 13);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("a").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(run(["levy-heat", "nonsense"]), 2);
        assert_eq!(
            run([
                "levy-heat",
                "rate",
                "--config",
                "/nonexistent.json",
                "--t",
                "1",
                "--x",
                "1"
            ]),
            2
        );
    }
}
