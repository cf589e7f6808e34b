//! Command dispatch. Exit codes: 0 for a decisive answer, 2 when the
//! answer is Unknown, 1 for bad input.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use uniserial_core::criteria::{check_all_varieties_finite, check_condition_n, mast_inventory};
use uniserial_core::decide::{decide_algebra, decide_mast, AlgebraStatus, DecideError, DecideOptions, MastOutcome};
use uniserial_core::fibers::{
    emit_dot, grid_points, int_range, iso_classes, iso_equivalent, layered_graph, normalize_point,
};
use uniserial_core::generators::{realize_variety, tiled_order_presentation};
use uniserial_core::poly::{Point, SolveBudget};
use uniserial_core::variety::{analyze, variety, VarietyPresentation, VarietyStatus};
use uniserial_core::{Path, Presentation};

use crate::format::{
    parse_exponent_matrix, parse_grid, parse_multilinear, parse_points, parse_presentation, serialize_presentation,
};
use crate::report;

const PATH_HELP: &str = "Paths are written in composition order: in `g b a` the arrow `a` is applied first \
and `g` last. The trivial path at vertex v is `e_v`.";

#[derive(Parser, Debug)]
#[command(name = "uniserial", version, about = "Uniserial representations of finite-dimensional algebras", after_help = PATH_HELP)]
pub struct Cli {
    /// Step budget for the polynomial solver; exhausting it yields Unknown.
    #[arg(long, global = true, value_name = "N")]
    pub max_steps: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct MastArgs {
    /// Presentation file.
    pub file: PathBuf,
    /// Mast in composition order, e.g. "g b1 a".
    #[arg(long)]
    pub path: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a presentation and report its normalized form.
    Validate {
        file: PathBuf,
        /// Print the presentation in file syntax instead of JSON.
        #[arg(long)]
        text: bool,
    },
    /// List the masts of the algebra.
    Masts { file: PathBuf },
    /// Defining polynomials and emptiness of the variety of a path.
    Variety(MastArgs),
    /// Slack and tight coordinates of a mast.
    Slack(MastArgs),
    /// Condition (N) and finiteness of every mast variety.
    CheckN { file: PathBuf },
    /// Decide whether the algebra has finite uniserial type.
    Decide {
        file: PathBuf,
        /// Skip the acyclic, monomial and catalogue shortcuts.
        #[arg(long)]
        no_fastpath: bool,
        /// One-line-per-mast summary instead of JSON.
        #[arg(long)]
        text: bool,
    },
    /// Decide whether one mast has finitely many uniserials.
    DecideMast {
        #[command(flatten)]
        mast: MastArgs,
        #[arg(long)]
        no_fastpath: bool,
    },
    /// Whether two points of a variety give isomorphic uniserials.
    Iso {
        #[command(flatten)]
        mast: MastArgs,
        /// Two points `k0;k`, coordinates comma-separated in variable order.
        #[arg(long, allow_hyphen_values = true)]
        points: String,
    },
    /// Partition points of a variety into isomorphism classes.
    Classes {
        #[command(flatten)]
        mast: MastArgs,
        /// Integer range `lo..hi`; every coordinate ranges over it.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "points", required_unless_present = "points")]
        grid: Option<String>,
        /// Explicit points separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
    },
    /// Layered graph of the uniserial at a point.
    Graph {
        #[command(flatten)]
        mast: MastArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Emit Graphviz DOT instead of JSON.
        #[arg(long)]
        dot: bool,
    },
    /// Move a point to an isomorphic one with slack coordinates cleared.
    Normalize {
        #[command(flatten)]
        mast: MastArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Build an algebra and mast whose variety is the zero set of a
    /// multilinear system given one polynomial per line in X1..Xm.
    GenVariety {
        file: PathBuf,
        #[arg(long)]
        text: bool,
    },
    /// Build the presentation attached to an exponent matrix.
    GenTiled {
        file: PathBuf,
        #[arg(long)]
        text: bool,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Output {
        Output { code: 0, stdout, stderr: String::new() }
    }

    fn json(v: &Value, unknown: bool) -> Output {
        Output { code: if unknown { 2 } else { 0 }, stdout: report::render(v), stderr: String::new() }
    }

    fn error(msg: impl std::fmt::Display) -> Output {
        Output { code: 1, stdout: String::new(), stderr: format!("error: {}\n", msg) }
    }
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => {
            let mut budget = SolveBudget::default();
            if let Some(n) = cli.max_steps {
                budget.max_steps = n;
            }
            execute(cli.command, &budget).unwrap_or_else(Output::error)
        }
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Output { code: 1, stdout: String::new(), stderr: text }
            } else {
                Output::ok(text)
            }
        }
    }
}

fn read(file: &std::path::Path) -> Result<String, String> {
    std::fs::read_to_string(file).map_err(|e| format!("{}: {}", file.display(), e))
}

fn load(file: &std::path::Path) -> Result<Presentation, String> {
    parse_presentation(&read(file)?).map_err(|e| format!("{}: {}", file.display(), e))
}

fn name_of(file: &std::path::Path) -> String {
    file.file_stem().map_or_else(|| file.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn load_mast(m: &MastArgs) -> Result<(Presentation, Path), String> {
    let pres = load(&m.file)?;
    let p = pres.quiver().parse_path(&m.path).map_err(|e| format!("--path: {}", e))?;
    Ok((pres, p))
}

fn load_variety(m: &MastArgs, budget: &SolveBudget) -> Result<(Presentation, VarietyPresentation), String> {
    let (pres, p) = load_mast(m)?;
    let v = variety(&pres, &p, budget).map_err(|e| e.to_string())?;
    Ok((pres, v))
}

fn options(no_fastpath: bool, budget: &SolveBudget) -> DecideOptions {
    DecideOptions { budget: budget.clone(), fast_paths: !no_fastpath, ..DecideOptions::default() }
}

fn execute(cmd: Command, budget: &SolveBudget) -> Result<Output, String> {
    match cmd {
        Command::Validate { file, text } => {
            let pres = load(&file)?;
            if text {
                return Ok(Output::ok(serialize_presentation(&pres)));
            }
            Ok(Output::json(&report::presentation(&name_of(&file), &pres), false))
        }
        Command::Masts { file } => {
            let pres = load(&file)?;
            let inv = mast_inventory(&pres, budget);
            let mut v = report::inventory(pres.quiver(), &inv);
            v["algebra"] = json!(name_of(&file));
            Ok(Output::json(&v, !inv.unknown.is_empty()))
        }
        Command::Variety(m) => {
            let (pres, v) = load_variety(&m, budget)?;
            let mut out = report::variety(pres.quiver(), &v);
            out["path"] = report::path(pres.quiver(), &v.ctx.path);
            Ok(Output::json(&out, matches!(v.status, VarietyStatus::Unknown(_))))
        }
        Command::Slack(m) => {
            let (pres, p) = load_mast(&m)?;
            let a = analyze(&pres, &p, budget).map_err(|e| e.to_string())?;
            match (&a.variety.status, &a.slack) {
                (_, Some(s)) => Ok(Output::json(&report::slack(pres.quiver(), &p, s), s.has_unknown())),
                (VarietyStatus::Unknown(why), None) => Ok(Output::json(&json!({"path": m.path, "unknown": why}), true)),
                _ => Err(format!("`{}` is not a mast", m.path)),
            }
        }
        Command::CheckN { file } => {
            let pres = load(&file)?;
            let q = pres.quiver();
            let inv = mast_inventory(&pres, budget);
            let n = check_condition_n(&pres, &inv);
            let all = check_all_varieties_finite(&pres, &inv);
            let v = json!({
                "algebra": name_of(&file),
                "condition_n": report::pair_report(q, &n),
                "all_varieties_finite": report::pair_report(q, &all),
            });
            Ok(Output::json(&v, n.holds.is_none()))
        }
        Command::Decide { file, no_fastpath, text } => {
            let pres = load(&file)?;
            let verdict = decide_algebra(&pres, &options(no_fastpath, budget));
            let unknown = matches!(verdict.status, AlgebraStatus::Unknown(_));
            if text {
                let q = pres.quiver();
                let mut s = format!("status: {}\n", report::status_name(&verdict.status));
                if let AlgebraStatus::InfiniteType { witness } = &verdict.status {
                    s += &format!("witness: {}\n", q.display(witness));
                }
                for m in &verdict.masts {
                    s += &format!("  {}: {}\n", q.display(&m.mast), report::outcome_status(&m.outcome));
                }
                return Ok(Output { code: if unknown { 2 } else { 0 }, stdout: s, stderr: String::new() });
            }
            Ok(Output::json(&report::algebra(&name_of(&file), pres.quiver(), &verdict), unknown))
        }
        Command::DecideMast { mast, no_fastpath } => {
            let (pres, p) = load_mast(&mast)?;
            let verdict = decide_mast(&pres, &p, &options(no_fastpath, budget)).map_err(|e| match e {
                DecideError::NotAMast => format!("`{}` is not a mast", mast.path),
                e => e.to_string(),
            })?;
            let mut v = report::mast(pres.quiver(), &verdict);
            v["algebra"] = json!(name_of(&mast.file));
            Ok(Output::json(&v, matches!(verdict.outcome, MastOutcome::Unknown(_))))
        }
        Command::Iso { mast, points } => {
            let (pres, v) = load_variety(&mast, budget)?;
            let pts = parse_points(&points, &v.ctx.vars).map_err(|e| format!("--points: {}", e))?;
            let [k0, k] = pts.as_slice() else {
                return Err("--points: expected exactly two points `k0;k`".into());
            };
            let outcome = iso_equivalent(&v, k0, k).map_err(|e| e.to_string())?;
            let mut out = report::iso(pres.quiver(), &outcome);
            out["path"] = report::path(pres.quiver(), &v.ctx.path);
            Ok(Output::json(&out, false))
        }
        Command::Classes { mast, grid, points } => {
            let (pres, v) = load_variety(&mast, budget)?;
            let pts: Vec<Point> = match (grid, points) {
                (Some(g), _) => {
                    let (lo, hi) = parse_grid(&g).map_err(|e| format!("--grid: {}", e))?;
                    match grid_points(&v, &int_range(lo, hi), 1_000_000) {
                        Some(pts) => pts,
                        None => {
                            let out = json!({"path": mast.path, "unknown": "the variety could not be enumerated on this grid"});
                            return Ok(Output::json(&out, true));
                        }
                    }
                }
                (None, Some(p)) => parse_points(&p, &v.ctx.vars).map_err(|e| format!("--points: {}", e))?,
                (None, None) => return Err("one of --grid or --points is required".into()),
            };
            let part = iso_classes(&v, &pts).map_err(|e| e.to_string())?;
            let mut out = report::classes(&v.ctx.vars, &pts, &part);
            out["path"] = report::path(pres.quiver(), &v.ctx.path);
            Ok(Output::json(&out, false))
        }
        Command::Graph { mast, point, dot } => {
            let (pres, v) = load_variety(&mast, budget)?;
            let k = parse_points(&point, &v.ctx.vars).map_err(|e| format!("--point: {}", e))?;
            let [k] = k.as_slice() else {
                return Err("--point: expected a single point".into());
            };
            if !v.contains(k) {
                return Err("point is not in the variety".into());
            }
            let g = layered_graph(&v.ctx, k);
            if dot {
                return Ok(Output::ok(emit_dot(pres.quiver(), &g)));
            }
            Ok(Output::json(&report::graph(pres.quiver(), &g), false))
        }
        Command::Normalize { mast, point } => {
            let (pres, p) = load_mast(&mast)?;
            let a = analyze(&pres, &p, budget).map_err(|e| e.to_string())?;
            let Some(slack) = &a.slack else {
                return Err(format!("`{}` is not known to be a mast", mast.path));
            };
            let vars = &a.variety.ctx.vars;
            let k = parse_points(&point, vars).map_err(|e| format!("--point: {}", e))?;
            let [k] = k.as_slice() else {
                return Err("--point: expected a single point".into());
            };
            let n = normalize_point(&a.variety, slack, k).map_err(|e| e.to_string())?;
            let out = json!({
                "path": report::path(pres.quiver(), &p),
                "vars": vars.iter().map(|x| report::var(pres.quiver(), x)).collect::<Vec<_>>(),
                "input": report::point(vars, k),
                "normalized": report::point(vars, &n),
            });
            Ok(Output::json(&out, false))
        }
        Command::GenVariety { file, text } => {
            let sys = parse_multilinear(&read(&file)?).map_err(|e| format!("{}: {}", file.display(), e))?;
            let r = realize_variety(&sys).map_err(|e| e.to_string())?;
            let q = r.presentation.quiver();
            if text {
                let s = format!("# mast: {}\n{}", q.display(&r.mast), serialize_presentation(&r.presentation));
                return Ok(Output::ok(s));
            }
            let out = json!({
                "presentation": serialize_presentation(&r.presentation),
                "mast": report::path(q, &r.mast),
                "vars": r.vars.iter().map(|x| report::var(q, x)).collect::<Vec<_>>(),
            });
            Ok(Output::json(&out, false))
        }
        Command::GenTiled { file, text } => {
            let m = parse_exponent_matrix(&read(&file)?).map_err(|e| format!("{}: {}", file.display(), e))?;
            let pres = tiled_order_presentation(&m).map_err(|e| e.to_string())?;
            if text {
                return Ok(Output::ok(serialize_presentation(&pres)));
            }
            let mut out = report::presentation(&name_of(&file), &pres);
            out["text"] = json!(serialize_presentation(&pres));
            Ok(Output::json(&out, false))
        }
    }
}
