//! `unasp`: solve, analyse and check interval-valued fuzzy answer set
//! programs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use unasp::mi::MiStep;
use unasp::nmi::NmiConfig;
use unasp::program::{ground, parse_literal, parse_program, Atom, Program};
use unasp::semantics::{is_answer_set, reduct, support_violations, Interpretation};
use unasp::solver::{analyze, solve_traced, SolveError, SolverConfig, Status, TraceEvent};
use unasp::transform::transform_program;

// stdout may be a closed pipe (`| head`); that is not worth a panic
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "unasp", version, about = "Interval-valued fuzzy answer set solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute answer sets.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Show the dependency structure left after monotonic iteration.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check whether a model file holds an answer set of the program.
    Check {
        file: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Comparison tolerance; defaults to twice eps.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Trace {
    Mi,
    Nmi,
    Graph,
}

#[derive(Args)]
struct Opts {
    /// Convergence threshold of the nonmonotonic iteration.
    #[arg(long, env = "UNASP_EPS", default_value_t = 0.009)]
    eps: f64,
    /// Number of equidistant seeds for branch-and-bound.
    #[arg(long, default_value_t = 5)]
    nb: usize,
    /// Explicit branch-and-bound seeds, replacing the grid.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 64)]
    max_answer_sets: usize,
    /// Assumption atoms to use instead of the automatic choice.
    #[arg(long, value_delimiter = ',')]
    assume: Vec<String>,
    /// Evaluate branch-and-bound seeds in parallel.
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Progress on stderr.
    #[arg(long, value_enum, value_delimiter = ',')]
    trace: Vec<Trace>,
    /// Print the transformed program to stderr.
    #[arg(long)]
    dump_transformed: bool,
    /// Write the dependency graph in DOT format.
    #[arg(long)]
    dot: Option<PathBuf>,
}

/// A failure with its diagnostic category and exit code.
struct Failure {
    kind: &'static str,
    msg: String,
    code: u8,
}

impl Failure {
    fn new(kind: &'static str, msg: impl ToString) -> Self {
        Failure { kind, msg: msg.to_string(), code: 2 }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    let p = parse_program(&text).map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))?;
    ground(&p).map_err(|e| Failure::new("ground", e))
}

fn config(o: &Opts) -> Result<SolverConfig, Failure> {
    let nmi = NmiConfig::new(o.eps, o.max_iter, o.nb).map_err(|e| Failure::new("config", e))?;
    let assumptions = o
        .assume
        .iter()
        .map(|s| match parse_literal(s) {
            Ok(l) if !l.negated => Ok(l.atom),
            _ => Err(Failure::new("config", format!("not an atom: {s}"))),
        })
        .collect::<Result<Vec<Atom>, _>>()?;
    let cfg = SolverConfig {
        nmi,
        seeds: o.seeds.clone(),
        max_answer_sets: o.max_answer_sets,
        assumptions,
        parallel: o.parallel,
    };
    cfg.validate().map_err(|e| Failure::new("config", e))?;
    Ok(cfg)
}

fn write_dot(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn print_mi(branch: &str, st: &MiStep) {
    let assigned: Vec<String> = st.assigned.iter().map(|(a, v)| format!("{a}={v}")).collect();
    eprintln!("trace[mi] branch {branch} step {}: {} (residual {})", st.step, assigned.join(" "), st.residual_len);
}

fn solve_cmd(file: &Path, o: &Opts) -> Result<u8, Failure> {
    let p = load(file)?;
    let cfg = config(o)?;
    let tp = transform_program(&p);
    if o.dump_transformed {
        eprint!("{tp}");
    }
    if let Some(path) = &o.dot {
        write_dot(path, &unasp::depgraph::build_dep_graph(&tp).to_dot())?;
    }
    let mut sink = |ev: &TraceEvent<'_>| match ev {
        TraceEvent::Mi { branch, step } if o.trace.contains(&Trace::Mi) => print_mi(branch, step),
        TraceEvent::Nmi { branch, atoms, step } if o.trace.contains(&Trace::Nmi) => {
            let vals: Vec<String> = atoms.iter().filter_map(|a| step.chosen.get(a).map(|v| format!("{a}={v}"))).collect();
            let delta = step.delta.map_or("-".to_string(), |d| format!("{d:.6}"));
            eprintln!("trace[nmi] branch {branch} iter {}: {} delta {delta}", step.iter, vals.join(" "));
        }
        TraceEvent::Graph { branch, text } if o.trace.contains(&Trace::Graph) => {
            eprintln!("trace[graph] branch {branch}\n{text}");
        }
        _ => {}
    };
    let report = solve_traced(&p, &cfg, &mut sink).map_err(|e| match e {
        SolveError::Ground(g) => Failure::new("ground", g),
        SolveError::Config(c) => Failure::new("config", c),
    })?;
    match o.format {
        Format::Json => outln!("{}", serde_json::to_string_pretty(&report.to_json()).expect("json")),
        Format::Text => out!("{}", report.to_text()),
    }
    Ok(match report.status {
        Status::Ok => 0,
        Status::NoAnswerSet | Status::Inconsistent => 1,
        Status::Incomplete => 3,
    })
}

fn analyze_cmd(file: &Path, o: &Opts) -> Result<u8, Failure> {
    let p = load(file)?;
    let cfg = config(o)?;
    let tp = transform_program(&p);
    if o.dump_transformed {
        eprint!("{tp}");
    }
    let a = analyze(&tp, &cfg);
    if let Some(path) = &o.dot {
        write_dot(path, &a.graph_dot)?;
    }
    match o.format {
        Format::Json => {
            let mut v = serde_json::to_value(&a).expect("json");
            // how each component was actually solved
            if let Ok(r) = unasp::solver::solve(&p, &cfg) {
                v["solve_components"] = serde_json::to_value(&r.diagnostics.components).expect("json");
            }
            outln!("{}", serde_json::to_string_pretty(&v).expect("json"));
        }
        Format::Text => {
            out!("{}", a.graph_dot);
            out!("{}", a.condensation_dot);
            for c in &a.cyclic {
                let names: Vec<String> = c.atoms.iter().map(|x| x.to_string()).collect();
                outln!("// component {{{}}}", names.join(","));
                if let Some(sel) = &c.assumption_set {
                    let chosen: Vec<String> = sel.chosen.iter().map(|x| x.to_string()).collect();
                    outln!("//   assumption set {{{}}}", chosen.join(","));
                    for line in c.intersection_table.lines() {
                        outln!("//   {line}");
                    }
                }
                if let Some(r) = &c.contraction {
                    outln!("//   convergence: {:?}", r.classification);
                }
                if let Some(e) = &c.error {
                    outln!("//   {e}");
                }
            }
        }
    }
    Ok(0)
}

fn check_cmd(file: &Path, model: &Path, tol: Option<f64>, o: &Opts) -> Result<u8, Failure> {
    let p = load(file)?;
    let cfg = config(o)?;
    let tol = tol.unwrap_or(2.0 * cfg.nmi.eps);
    let i = Interpretation::from_json(&read(model)?).map_err(|e| Failure::new("model", e))?;
    let known: Vec<Atom> = p.atom_base().into_iter().filter(|a| i.value(&a.pos()).is_none()).collect();
    if !known.is_empty() {
        let names: Vec<String> = known.iter().map(|a| a.to_string()).collect();
        return Err(Failure::new("model", format!("no value for {}", names.join(", "))));
    }
    let ok = is_answer_set(&i, &p, &[], tol).map_err(|e| Failure::new("model", e))?;
    let reasons = if ok {
        Vec::new()
    } else {
        let r = reduct(&p, &i).map_err(|e| Failure::new("model", e))?;
        let v = support_violations(&i, &r, tol).map_err(|e| Failure::new("model", e))?;
        if v.is_empty() {
            vec!["a less certain supported model of the reduct exists".to_string()]
        } else {
            v
        }
    };
    match o.format {
        Format::Json => outln!("{}", json!({ "valid": ok, "reasons": reasons })),
        Format::Text => {
            outln!("{}", if ok { "VALID" } else { "INVALID" });
            for r in &reasons {
                outln!("  {r}");
            }
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { file, opts } => solve_cmd(file, opts),
        Command::Analyze { file, opts } => analyze_cmd(file, opts),
        Command::Check { file, model, tol, opts } => check_cmd(file, model, *tol, opts),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error[{}]: {}", f.kind, f.msg);
            ExitCode::from(f.code)
        }
    }
}
