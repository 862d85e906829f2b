//! Command-line front end. `run` is the whole program minus process exit,
//! so it can be driven from tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::audit;
use crate::basic::{basic_solve_with, Gradient, TraceRule};
use crate::error::Error;
use crate::io::instance::{Instance, InstanceFile};
use crate::io::plan::PlanFile;
use crate::io::svg;
use crate::iterative::iterative_solve;
use crate::model::{utility, ComplementModel, ReinforcedSet};
use crate::oracle::oracle_solve;
use crate::unimodal::solve_unimodal;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "rankreinforce",
    version,
    about = "Budget-constrained score reinforcement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance and write the plan as JSON.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gradient tolerance; 0 (exact) by default for empirical complements.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Use the single-target solver for unimodal analytic complements.
        #[arg(long)]
        fastpath: bool,
    },
    /// Budget used over a log-spaced range of gradients, as CSV.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "alpha-min")]
        alpha_min: f64,
        #[arg(long = "alpha-max")]
        alpha_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Render a plan as SVG, with the plotted series as CSV next to it.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the SVG path with a .csv extension.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exhaustive optimum for a small empirical instance.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Utility of the supported scores, or of a plan's reinforced scores.
    Utility {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) => EXIT_INVARIANT,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn validation(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| validation(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(InstanceFile, Instance), Failure> {
    let file = InstanceFile::from_json(&read(path)?)?;
    let inst = file.validate()?;
    Ok((file, inst))
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| validation(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| validation(format!("stdout: {e}"))),
    }
}

fn invariant(violations: Vec<String>) -> Result<(), Failure> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_INVARIANT,
            message: violations.join("; "),
        })
    }
}

/// Runs the program on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Solve {
            input,
            out,
            epsilon,
            fastpath,
        } => {
            let (file, inst) = load(&input)?;
            let epsilon = match epsilon.or(inst.epsilon) {
                Some(e) if !(e.is_finite() && e >= 0.0) => {
                    return Err(validation(format!("epsilon: {e}")))
                }
                Some(e) => e,
                None if inst.model.is_empirical() => 0.0,
                None => 1e-9 * inst.model.peak_density(),
            };
            let plan = if fastpath {
                if !matches!(
                    inst.model,
                    ComplementModel::Exponential { .. } | ComplementModel::LogNormal { .. }
                ) {
                    return Err(validation(
                        "--fastpath needs an exponential or log-normal complement",
                    ));
                }
                solve_unimodal(&inst.supported, &inst.model, inst.budget)?
            } else {
                iterative_solve(&inst.supported, &inst.model, inst.budget, epsilon)?
            };
            invariant(audit::check_plan(&inst.supported, &inst.model, &plan))?;
            let text = PlanFile::new(&plan, file.sha256()).to_json();
            PlanFile::from_json(&text).map_err(|e| Failure {
                code: EXIT_INVARIANT,
                message: format!("emitted plan does not re-parse: {e}"),
            })?;
            emit(&out, &text, stdout)
        }
        Command::Sweep {
            input,
            out,
            alpha_min,
            alpha_max,
            steps,
        } => {
            let (_, inst) = load(&input)?;
            if !(alpha_min > 0.0 && alpha_min < alpha_max && alpha_max.is_finite()) {
                return Err(validation(format!(
                    "alpha range must satisfy 0 < alpha-min < alpha-max, got [{alpha_min}, {alpha_max}]"
                )));
            }
            if steps < 2 {
                return Err(validation("steps must be at least 2"));
            }
            let (lo, hi) = (alpha_min.ln(), alpha_max.ln());
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["alpha", "budget_used", "next_alpha", "utility"])
                .expect("in-memory write");
            for k in 0..steps {
                let theta = if k + 1 == steps {
                    lo
                } else {
                    hi + (lo - hi) * k as f64 / (steps - 1) as f64
                };
                let alpha = if k == 0 {
                    alpha_max
                } else if k + 1 == steps {
                    alpha_min
                } else {
                    theta.exp()
                };
                let sol = basic_solve_with(
                    &inst.supported,
                    &inst.model,
                    Gradient::new(alpha)?,
                    TraceRule::EntryScores,
                )?;
                invariant(audit::check_solution(&inst.supported, &inst.model, &sol))?;
                let u = utility(&sol.plan, &inst.model)?;
                w.write_record([
                    crate::io::json::format_f64(alpha),
                    crate::io::json::format_f64(sol.budget_used),
                    crate::io::json::format_f64(sol.next_alpha),
                    crate::io::json::format_f64(u),
                ])
                .expect("in-memory write");
            }
            let text = String::from_utf8(w.into_inner().expect("in-memory flush"))
                .expect("csv writes UTF-8");
            emit(&out, &text, stdout)
        }
        Command::Plot {
            input,
            plan,
            out,
            csv,
        } => {
            let (file, inst) = load(&input)?;
            let plan = PlanFile::from_json(&read(&plan)?)?;
            if plan.instance_sha256 != file.sha256() {
                return Err(validation(
                    "plan was not produced from this instance (hash mismatch)",
                ));
            }
            plan.reinforced_set()?;
            let p = svg::render(&inst.supported, &inst.model, &plan);
            let csv = csv.unwrap_or_else(|| out.with_extension("csv"));
            fs::write(&out, p.svg).map_err(|e| validation(format!("{}: {e}", out.display())))?;
            fs::write(&csv, p.csv).map_err(|e| validation(format!("{}: {e}", csv.display())))
        }
        Command::Oracle { input } => {
            let (_, inst) = load(&input)?;
            let r = oracle_solve(&inst.supported, &inst.model, inst.budget.value())?;
            let mut text = format!("best_utility {}\nexplored {}\n", r.best_utility, r.explored);
            for p in &r.best_plans {
                let moves: Vec<String> =
                    p.pairs().iter().map(|(f, t)| format!("{f}->{t}")).collect();
                text.push_str(&format!("plan {} cost {}\n", moves.join(" "), p.cost()));
            }
            emit(&None, &text, stdout)
        }
        Command::Utility { input, plan } => {
            let (_, inst) = load(&input)?;
            let set = match plan {
                Some(p) => PlanFile::from_json(&read(&p)?)?.reinforced_set()?,
                None => ReinforcedSet::identity(&inst.supported),
            };
            let u = utility(&set, &inst.model)?;
            emit(
                &None,
                &format!("{}\n", crate::io::json::format_f64(u)),
                stdout,
            )
        }
    }
}
