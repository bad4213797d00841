use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use klanon::approx::{strong_greedy_kl, weak_expander};
use klanon::check::{is_strong_transformation, residual, strong_residual};
use klanon::exact21::{anonymize_strong_21, anonymize_weak_21, StrongMode};
use klanon::greedy::{strong_any, strong_greedy, weak_any, weak_greedy};
use klanon::hardgen::{random_graph, random_normalized_instance, reduction_graph};
use klanon::io::{format_edges, parse_edge_list, ParsedGraph};
use klanon::oracle::{solve, Minimum, OracleOptions};
use klanon::{AnonParams, Edge, EdgePlan, Error, Graph, Mode};

const NOT_ANONYMOUS: u8 = 1;
const USAGE: u8 = 2;
const INFEASIBLE: u8 = 3;
const INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "klanon", version, about = "Edge-addition (k,l)-anonymization of graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report residual anonymity; exits 1 when the graph is not anonymous.
    Check {
        input: PathBuf,
        #[command(flatten)]
        target: Target,
        /// Original graph; required in strong mode.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        machine: bool,
    },
    /// Add edges until the graph is anonymous.
    Anonymize {
        input: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = Algo::Auto)]
        algo: Algo,
        /// Strong (2,1) only: greedy instead of maximum matching.
        #[arg(long)]
        linear: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output edge list; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        machine: bool,
    },
    /// Exact minimum number of added edges by exhaustive search.
    Oracle {
        input: PathBuf,
        #[command(flatten)]
        target: Target,
        /// Largest number of added edges to try.
        #[arg(long)]
        budget: Option<usize>,
        /// Where to write the optimal added edges.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        machine: bool,
    },
    /// Generate a test graph.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
}

#[derive(Args)]
struct Target {
    #[arg(long)]
    k: usize,
    #[arg(long = "l", default_value_t = 1)]
    ell: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Weak)]
    mode: ModeArg,
}

impl Target {
    fn params(&self) -> Result<AnonParams> {
        Ok(AnonParams::new(self.k, self.ell)?)
    }

    fn mode(&self) -> Mode {
        match self.mode {
            ModeArg::Weak => Mode::Weak,
            ModeArg::Strong => Mode::Strong,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Weak,
    Strong,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Auto,
    Exact21,
    Any,
    Greedy,
    Expander,
}

#[derive(Subcommand)]
enum GenKind {
    /// G(n, p) random graph.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduction graph of a random normalized 1-in-3 instance with 6m triples.
    /// Writes `<out>.meta` alongside the graph.
    Hard {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// An error that should produce a usage exit code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

/// Invariant failures found by re-checking our own output.
#[derive(Debug)]
struct Internal(String);

impl std::fmt::Display for Internal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Internal {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return USAGE;
    }
    if err.downcast_ref::<Internal>().is_some() {
        return INTERNAL;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::IsolatedVertex(_)
            | Error::TooSmall(_)
            | Error::DegreeTooLow { .. }
            | Error::Stuck(_)
            | Error::BudgetExceeded { .. },
        ) => INFEASIBLE,
        Some(_) => USAGE,
        None if err.downcast_ref::<std::io::Error>().is_some() => USAGE,
        None => INTERNAL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check {
            input,
            target,
            baseline,
            machine,
        } => check(&input, &target, baseline.as_deref(), machine),
        Command::Anonymize {
            input,
            target,
            algo,
            linear,
            seed,
            out,
            machine,
        } => anonymize(&input, &target, algo, linear, seed, out.as_deref(), machine),
        Command::Oracle {
            input,
            target,
            budget,
            out,
            machine,
        } => oracle(&input, &target, budget, out.as_deref(), machine),
        Command::Gen { kind } => generate(kind),
    }
}

fn read_graph(path: &Path) -> Result<ParsedGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Key/value report, either aligned for people or `key=value` per line.
struct Report {
    machine: bool,
    lines: Vec<(String, String)>,
}

impl Report {
    fn new(machine: bool) -> Self {
        Report {
            machine,
            lines: Vec::new(),
        }
    }

    fn add(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            if self.machine {
                let _ = writeln!(out, "{k}={v}");
            } else {
                let _ = writeln!(out, "{:<18} {v}", format!("{}:", k.replace('_', " ")));
            }
        }
        out
    }
}

fn check(input: &Path, target: &Target, baseline: Option<&Path>, machine: bool) -> Result<u8> {
    let p = target.params()?;
    let current = read_graph(input)?.graph;
    let report = match target.mode() {
        Mode::Weak => residual(&current, p),
        Mode::Strong => {
            let base = baseline.ok_or_else(|| usage("strong mode needs --baseline with the original graph"))?;
            let original = read_graph(base)?.graph;
            strong_residual(&original, &current, p)?
        }
    };
    let mut r = Report::new(machine);
    r.add("mode", target.mode());
    r.add("k", p.k);
    r.add("l", p.ell);
    r.add("vertices", current.vertex_count());
    r.add("edges", current.edge_count());
    r.add("total_residual", report.total);
    r.add("deficient", report.deficient.len());
    r.add("anonymous", report.total == 0);
    print!("{}", r.render());
    for &v in &report.deficient {
        if machine {
            println!(
                "vertex={v} sharers={} residual={}",
                report.sharer_count[v], report.residual[v]
            );
        } else {
            println!(
                "  vertex {v}: {} sharers, residual {}",
                report.sharer_count[v], report.residual[v]
            );
        }
    }
    Ok(if report.total == 0 { 0 } else { NOT_ANONYMOUS })
}

fn dispatch(g: &Graph, target: &Target, algo: Algo, linear: bool, seed: u64) -> Result<(&'static str, EdgePlan)> {
    let p = target.params()?;
    let mode = target.mode();
    let is21 = p.k == 2 && p.ell == 1;
    let algo = match algo {
        Algo::Auto if is21 => Algo::Exact21,
        Algo::Auto if p.ell == 1 => Algo::Greedy,
        Algo::Auto if mode == Mode::Weak => Algo::Expander,
        Algo::Auto => Algo::Greedy,
        other => other,
    };
    if linear && !(algo == Algo::Exact21 && mode == Mode::Strong) {
        return Err(usage("--linear applies to strong exact21 only"));
    }
    Ok(match (algo, mode) {
        (Algo::Exact21, _) if !is21 => return Err(usage("exact21 needs --k 2 --l 1")),
        (Algo::Exact21, Mode::Weak) => ("exact21", anonymize_weak_21(g, seed)?),
        (Algo::Exact21, Mode::Strong) => {
            let sm = if linear { StrongMode::Linear } else { StrongMode::Exact };
            ("exact21", anonymize_strong_21(g, sm, seed)?)
        }
        (Algo::Any, _) if p.ell != 1 => return Err(usage("any needs --l 1")),
        (Algo::Any, Mode::Weak) => ("weak-any", weak_any(g, p.k, seed)?),
        (Algo::Any, Mode::Strong) => ("strong-any", strong_any(g, p.k, seed)?),
        (Algo::Greedy, Mode::Weak) if p.ell != 1 => return Err(usage("weak greedy needs --l 1; use expander")),
        (Algo::Greedy, Mode::Weak) => ("weak-greedy", weak_greedy(g, p.k, seed)?),
        (Algo::Greedy, Mode::Strong) if p.ell == 1 => ("strong-greedy", strong_greedy(g, p.k)?),
        (Algo::Greedy, Mode::Strong) => ("strong-greedy-kl", strong_greedy_kl(g, p.k, p.ell)?),
        (Algo::Expander, Mode::Strong) => return Err(usage("expander is weak mode only")),
        (Algo::Expander, Mode::Weak) => ("expander", weak_expander(g, p.k, p.ell, seed)?),
        (Algo::Auto, _) => unreachable!("resolved above"),
    })
}

fn labeled(text_edges: &[Edge], n: usize, labels: Option<&[String]>) -> String {
    match labels {
        None => format_edges(n, text_edges),
        Some(names) => {
            let mut out = format!("n {n}\n");
            for &(u, v) in text_edges {
                let _ = writeln!(out, "{} {}", names[u], names[v]);
            }
            out
        }
    }
}

fn anonymize(
    input: &Path,
    target: &Target,
    algo: Algo,
    linear: bool,
    seed: u64,
    out: Option<&Path>,
    machine: bool,
) -> Result<u8> {
    let parsed = read_graph(input)?;
    let g = &parsed.graph;
    let p = target.params()?;
    let start = Instant::now();
    let (name, plan) = dispatch(g, target, algo, linear, seed)?;
    let elapsed = start.elapsed();

    let ok = match target.mode() {
        Mode::Weak => residual(&plan.result, p).total == 0,
        Mode::Strong => is_strong_transformation(g, &plan.result, p)?,
    };
    if !ok || plan.residual_after != 0 || plan.result.edge_count() != g.edge_count() + plan.edge_count() {
        bail!(Internal(format!("{name} produced a graph that fails the checker")));
    }

    let mut edges: Vec<Edge> = g.edges().collect();
    edges.extend(plan.added_edges.iter().copied());
    write_or_print(out, &labeled(&edges, g.vertex_count(), parsed.labels.as_deref()))?;

    let degrees = plan.added_degrees();
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let mean = if degrees.is_empty() {
        0.0
    } else {
        degrees.iter().sum::<usize>() as f64 / degrees.len() as f64
    };
    let mut r = Report::new(machine);
    r.add("algorithm", name);
    r.add("k", p.k);
    r.add("l", p.ell);
    r.add("mode", target.mode());
    r.add("seed", seed);
    r.add("edges_added", plan.edge_count());
    r.add("residual_before", plan.residual_before);
    r.add("residual_after", plan.residual_after);
    r.add("wall_ms", format!("{:.3}", elapsed.as_secs_f64() * 1e3));
    r.add("added_degree_max", max_degree);
    r.add("added_degree_mean", format!("{mean:.4}"));
    r.add("output", out.map_or("-".to_string(), |p| p.display().to_string()));
    let text = r.render();
    if out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    Ok(0)
}

fn oracle(input: &Path, target: &Target, budget: Option<usize>, out: Option<&Path>, machine: bool) -> Result<u8> {
    let parsed = read_graph(input)?;
    let g = &parsed.graph;
    let opts = OracleOptions {
        max_budget: budget,
        ..OracleOptions::default()
    };
    let result = solve(g, target.params()?, target.mode(), opts)?;
    let mut r = Report::new(machine);
    r.add("explored", result.explored);
    match result.minimum {
        Minimum::Value(v) => {
            r.add("minimum", v);
            if let Some(path) = out {
                fs::write(
                    path,
                    labeled(&result.witness, g.vertex_count(), parsed.labels.as_deref()),
                )
                .with_context(|| format!("writing {}", path.display()))?;
                r.add("witness", path.display());
            } else {
                let w: Vec<String> = result.witness.iter().map(|(u, v)| format!("{u}-{v}")).collect();
                r.add("witness", w.join(","));
            }
            print!("{}", r.render());
            Ok(0)
        }
        Minimum::Infeasible => {
            r.add("minimum", "infeasible");
            print!("{}", r.render());
            Ok(INFEASIBLE)
        }
    }
}

fn generate(kind: GenKind) -> Result<u8> {
    match kind {
        GenKind::Random { n, p, seed, out } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(usage(format!("edge probability {p} outside [0, 1]")));
            }
            let g = random_graph(n, p, seed);
            let edges: Vec<Edge> = g.edges().collect();
            write_or_print(out.as_deref(), &format_edges(n, &edges))?;
        }
        GenKind::Hard { m, k, seed, out } => {
            let inst = random_normalized_instance(m, seed)?;
            let red = reduction_graph(&inst, k)?;
            let edges: Vec<Edge> = red.graph.edges().collect();
            fs::write(&out, format_edges(red.graph.vertex_count(), &edges))
                .with_context(|| format!("writing {}", out.display()))?;
            let mut meta = String::new();
            let _ = writeln!(meta, "m={}", red.m);
            let _ = writeln!(meta, "k={}", red.k);
            let _ = writeln!(meta, "satisfiable={}", inst.is_satisfiable());
            let u: Vec<String> = red.u_vertices.iter().map(ToString::to_string).collect();
            let _ = writeln!(meta, "u_vertices={}", u.join(","));
            let mut meta_path = out.clone().into_os_string();
            meta_path.push(".meta");
            fs::write(&meta_path, meta).context("writing metadata")?;
        }
    }
    Ok(0)
}
