//! Command-line front end: enumerate weighted connected graphs, evaluate
//! n-point functions for declared models, run consistency check suites and
//! export graphs.
//!
//! Exit codes: 0 success, 1 check failure, 2 invalid flags or model,
//! 3 resource guard tripped.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hopfgraph::dot::graph_to_dot;
use hopfgraph::feynman::{evaluate_sum, pipeline_coefficient, zero_d_connected_oracle};
use hopfgraph::generator::Generator;
use hopfgraph::model::FieldModel;
use hopfgraph::series::Series;
use hopfgraph::weight::{format_rat, rat_int, Rat};
use hopfgraph::{Error, Graph, GraphSum, Label, Species};

const PHI3_TOML: &str = include_str!("../models/phi3.toml");
const PHI4_TOML: &str = include_str!("../models/phi4.toml");

#[derive(Parser)]
#[command(name = "hopfgraph", version, about = "Weighted connected-graph enumeration and evaluation")]
struct Cli {
    /// Optional TOML config with `max_edges` and `threads` defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate weighted connected graphs for fixed loop, vertex and leg counts
    Enum(EnumArgs),
    /// Evaluate the connected n-point function of a model, order by order
    Eval(EvalArgs),
    /// Run a consistency suite; nonzero exit on any violation
    Check(CheckArgs),
    /// List tree graphs with their weight-1 guarantee
    Trees(TreesArgs),
    /// Export a full graph sum as one JSON document or DOT text
    Export(ExportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Table,
}

#[derive(Args)]
struct EnumArgs {
    #[arg(long)]
    loops: u32,
    #[arg(long)]
    vertices: u32,
    #[arg(long, default_value_t = 0)]
    legs: u32,
    /// Print the vertex-ordered sum instead of the unordered one
    #[arg(long)]
    ordered: bool,
    #[arg(long, default_value_t = 1)]
    species: u8,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Edge-count guard; refuses larger instances (exit 3)
    #[arg(long)]
    max_edges: Option<u32>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model file path, or one of the built-ins `phi3`, `phi4`
    #[arg(long)]
    model: String,
    #[arg(long)]
    legs: u32,
    /// Highest coupling order to print (defaults to the model's max_order)
    #[arg(long)]
    max_order: Option<u32>,
    /// Also print each (loops, vertices) contribution separately
    #[arg(long)]
    per_loop: bool,
    /// Report the 1-point function as zero (the vanishing-tadpole
    /// convention) instead of its raw diagrammatic value
    #[arg(long)]
    drop_one_point: bool,
    #[arg(long)]
    max_edges: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Weights,
    Equivalence,
    Oracle,
    Trees,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 4)]
    max_edges: u32,
}

#[derive(Args)]
struct TreesArgs {
    #[arg(long)]
    vertices: u32,
    #[arg(long)]
    legs: u32,
    /// Restrict to trees with every vertex of valence >= 3
    #[arg(long)]
    modified: bool,
    #[arg(long)]
    max_edges: Option<u32>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    loops: u32,
    #[arg(long)]
    vertices: u32,
    #[arg(long, default_value_t = 0)]
    legs: u32,
    #[arg(long, default_value_t = 1)]
    species: u8,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    max_edges: Option<u32>,
}

struct Config {
    max_edges: u32,
    threads: usize,
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, String> {
    let mut cfg = Config { max_edges: 10, threads: 1 };
    if let Ok(v) = std::env::var("HOPFGRAPH_MAX_EDGES") {
        cfg.max_edges = v
            .parse()
            .map_err(|_| format!("HOPFGRAPH_MAX_EDGES: bad value `{v}`"))?;
    }
    if let Ok(v) = std::env::var("HOPFGRAPH_THREADS") {
        cfg.threads = v
            .parse()
            .map_err(|_| format!("HOPFGRAPH_THREADS: bad value `{v}`"))?;
    }
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
        let doc: toml::Value = text.parse().map_err(|e| format!("{}: {e}", p.display()))?;
        if let Some(m) = doc.get("max_edges").and_then(|v| v.as_integer()) {
            cfg.max_edges = m as u32;
        }
        if let Some(t) = doc.get("threads").and_then(|v| v.as_integer()) {
            cfg.threads = t.max(1) as usize;
        }
    }
    Ok(cfg)
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(m) => {
            eprintln!("error: {m}");
            return 2;
        }
    };
    let result = match cli.cmd {
        Cmd::Enum(a) => cmd_enum(&a, &cfg),
        Cmd::Eval(a) => cmd_eval(&a, &cfg),
        Cmd::Check(a) => cmd_check(&a, &cfg),
        Cmd::Trees(a) => cmd_trees(&a, &cfg),
        Cmd::Export(a) => cmd_export(&a, &cfg),
    };
    match result {
        Ok(code) => code,
        Err(Error::ResourceGuard(m)) => {
            eprintln!("error: resource guard: {m}");
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn labels(n: u32) -> Vec<(Label, Species)> {
    (1..=n as u8).map(|k| (Label(k), Species(1))).collect()
}

fn guard_edges(l: u32, v: u32, cap: u32) -> Result<(), Error> {
    let e = l + v - 1;
    if e > cap {
        return Err(Error::ResourceGuard(format!(
            "{e} edges exceeds the cap of {cap} (raise with --max-edges or HOPFGRAPH_MAX_EDGES)"
        )));
    }
    Ok(())
}

/// Compact one-line graph signature for the table format.
fn signature(g: &Graph) -> String {
    use std::fmt::Write as _;
    let mut s = format!("v{}", g.vertex_count());
    if g.leg_count() > 0 {
        s.push_str(" legs[");
        for (i, leg) in g.legs().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{}:x{}", leg.vertex, leg.label.0);
            if leg.species.0 > 1 {
                let _ = write!(s, "s{}", leg.species.0);
            }
        }
        s.push(']');
    }
    s.push_str(" edges[");
    for (i, e) in g.edges().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "({},{})", e.a, e.b);
        if e.species.0 > 1 {
            let _ = write!(s, "s{}", e.species.0);
        }
    }
    s.push(']');
    s
}

fn print_sum_stream(sum: &GraphSum, format: Format, with_symmetry: bool) -> Result<i32, Error> {
    match format {
        Format::Json => {
            for (g, w) in sum.iter() {
                let line = serde_json::json!({
                    "graph": g.to_json(),
                    "weight": format_rat(w),
                });
                println!("{line}");
            }
            let footer = serde_json::json!({
                "terms": sum.len(),
                "total_weight": format_rat(&sum.total_weight()),
            });
            println!("{footer}");
        }
        Format::Dot => {
            for (i, (g, w)) in sum.iter().enumerate() {
                print!("{}", graph_to_dot(g, &format!("g{i}"), Some(w)));
            }
        }
        Format::Table => {
            for (g, w) in sum.iter() {
                if with_symmetry {
                    let s = g.symmetry_factor()?;
                    let ok = w * Rat::from_integer(s.clone().into()) == rat_int(1);
                    println!(
                        "{}  weight {}  S {}  {}",
                        signature(g),
                        format_rat(w),
                        s,
                        if ok { "ok" } else { "MISMATCH" }
                    );
                } else {
                    println!("{}  weight {}", signature(g), format_rat(w));
                }
            }
            println!(
                "total: {} terms, weight sum {}",
                sum.len(),
                format_rat(&sum.total_weight())
            );
        }
    }
    Ok(0)
}

fn cmd_enum(a: &EnumArgs, cfg: &Config) -> Result<i32, Error> {
    if a.vertices < 1 || a.species < 1 {
        return Err(Error::BadOmegaParams { l: a.loops, v: a.vertices });
    }
    guard_edges(a.loops, a.vertices, a.max_edges.unwrap_or(cfg.max_edges))?;
    let gen = Generator::new(a.species);
    let ordered = gen.omega(a.loops, a.vertices, &labels(a.legs))?;
    if a.ordered {
        return print_sum_stream(&ordered, a.format, false);
    }
    let sum = ordered.forget_order_threaded(cfg.threads);
    print_sum_stream(&sum, a.format, a.format == Format::Table)
}

fn load_model(name: &str) -> Result<FieldModel, Error> {
    let text = match name {
        "phi3" => PHI3_TOML.to_string(),
        "phi4" => PHI4_TOML.to_string(),
        path => std::fs::read_to_string(path)
            .map_err(|e| Error::Model(format!("{path}: {e}")))?,
    };
    FieldModel::from_toml_str(&text)
}

fn cmd_eval(a: &EvalArgs, cfg: &Config) -> Result<i32, Error> {
    let model = load_model(&a.model)?;
    if model.species_count() != 1 {
        return Err(Error::Model(
            "eval drives single-species models only".into(),
        ));
    }
    let order = a.max_order.unwrap_or_else(|| model.order());
    if order > model.order() {
        return Err(Error::Model(format!(
            "--max-order {order} exceeds the model's max_order {}",
            model.order()
        )));
    }
    let n = a.legs;
    let cap = a.max_edges.unwrap_or(cfg.max_edges);
    let maxdeg = model.max_coupling_degree();
    let gen = Generator::new(1);
    let mut total = model.zero_series();
    if n == 2 {
        // the vertex-free bare line
        let g0 = Series::constant(
            &["g"],
            &[model.order()],
            model.propagator(Species(1))?.clone(),
        );
        total = total.add(&g0)?;
    }
    if a.drop_one_point && n == 1 {
        println!("{}", truncated_table(&total, order));
        return Ok(0);
    }
    for v in 1..=order {
        for l in 0.. {
            let e = l + v - 1;
            if 2 * e + n > v * maxdeg {
                break;
            }
            guard_edges(l, v, cap)?;
            let sum = gen
                .omega(l, v, &labels(n))?
                .forget_order_threaded(cfg.threads);
            let val = evaluate_sum(&sum, &model)?;
            if a.per_loop && !val.is_zero() {
                println!("# l={l} v={v}");
                print!("{}", truncated_table(&val, order));
            }
            total = total.add(&val)?;
        }
    }
    println!("{}", truncated_table(&total, order).trim_end());
    Ok(0)
}

/// Table of g-coefficients up to the requested order only.
fn truncated_table(s: &Series, order: u32) -> String {
    let mut kept = Series::zero(&["g"], s.caps());
    let mono = Series::var(&["g"], s.caps(), 0);
    for (e, c) in s.terms() {
        if e[0] <= order {
            kept = kept
                .add(&mono.pow(e[0]).expect("same shape").scale(c))
                .expect("same shape");
        }
    }
    kept.to_table_string()
}

fn counterexample(kind: &str, detail: serde_json::Value) -> i32 {
    println!(
        "{}",
        serde_json::json!({ "failure": kind, "detail": detail })
    );
    1
}

fn cmd_check(a: &CheckArgs, cfg: &Config) -> Result<i32, Error> {
    let e_cap = a.max_edges.min(cfg.max_edges);
    match a.suite {
        Suite::Weights => {
            let gen = Generator::new(1);
            for v in 1..=e_cap + 1 {
                for l in 0..=e_cap + 1 - v {
                    for n in 0..=3u32 {
                        let sum = gen.enumerate_connected(l, v, &labels(n))?;
                        for (g, w) in sum.iter() {
                            let s = g.symmetry_factor()?;
                            if w * Rat::from_integer(s.clone().into()) != rat_int(1) {
                                return Ok(counterexample(
                                    "weight times symmetry factor is not 1",
                                    serde_json::json!({
                                        "graph": g.to_json(),
                                        "weight": format_rat(w),
                                        "symmetry_factor": s.to_string(),
                                    }),
                                ));
                            }
                        }
                    }
                }
            }
            println!("weights: ok up to {e_cap} edges");
            Ok(0)
        }
        Suite::Equivalence => {
            let gen = Generator::new(1);
            for v in 1..=e_cap + 1 {
                for l in 0..=e_cap + 1 - v {
                    if l == 0 && v == 1 {
                        continue;
                    }
                    for n in 0..=3u32 {
                        let a_sum = gen.omega(l, v, &labels(n))?;
                        let b_sum = gen.omega_alt(l, v, &labels(n))?;
                        if a_sum != b_sum {
                            return Ok(counterexample(
                                "recursions disagree",
                                serde_json::json!({ "l": l, "v": v, "n": n }),
                            ));
                        }
                    }
                }
            }
            println!("equivalence: ok up to {e_cap} edges");
            Ok(0)
        }
        Suite::Oracle => {
            for (k, ns) in [(3u32, vec![0u32, 2, 3, 4]), (4, vec![0, 2, 4])] {
                let gen = Generator::new(1);
                let model = load_model(if k == 3 { "phi3" } else { "phi4" })?;
                let order = 3u32;
                for &n in &ns {
                    let oracle = zero_d_connected_oracle(k, &rat_int(1), n, order)?;
                    for p in 0..=order {
                        let got = pipeline_coefficient(&gen, &model, k, n, p)?;
                        let want = oracle.coeff(&[p]);
                        if got != want {
                            return Ok(counterexample(
                                "pipeline disagrees with the series oracle",
                                serde_json::json!({
                                    "k": k, "n": n, "coupling_order": p,
                                    "pipeline": format_rat(&got),
                                    "oracle": format_rat(&want),
                                }),
                            ));
                        }
                    }
                }
            }
            println!("oracle: ok for phi3 and phi4");
            Ok(0)
        }
        Suite::Trees => {
            let gen = Generator::new(1);
            for v in 1..=e_cap + 1 {
                for n in 0..=5u32 {
                    let sum = gen.enumerate_connected(0, v, &labels(n))?;
                    for (g, w) in sum.iter() {
                        if g.min_valence() >= 2 && w != &rat_int(1) {
                            return Ok(counterexample(
                                "min-valence-2 tree with weight other than 1",
                                serde_json::json!({
                                    "graph": g.to_json(),
                                    "weight": format_rat(w),
                                }),
                            ));
                        }
                    }
                }
            }
            println!("trees: ok up to {} vertices", e_cap + 1);
            Ok(0)
        }
    }
}

fn cmd_trees(a: &TreesArgs, cfg: &Config) -> Result<i32, Error> {
    if a.vertices < 1 {
        return Err(Error::BadOmegaParams { l: 0, v: a.vertices });
    }
    guard_edges(0, a.vertices, a.max_edges.unwrap_or(cfg.max_edges))?;
    let gen = Generator::new(1);
    let sum = gen.enumerate_connected(0, a.vertices, &labels(a.legs))?;
    let min_val = if a.modified { 3 } else { 2 };
    let mut count = 0usize;
    let mut bad = 0usize;
    for (g, w) in sum.iter() {
        if g.min_valence() < min_val {
            continue;
        }
        count += 1;
        let weight_one = w == &rat_int(1);
        if !weight_one {
            bad += 1;
        }
        let line = serde_json::json!({
            "graph": g.to_json(),
            "weight": format_rat(w),
            "weight_is_one": weight_one,
        });
        println!("{line}");
    }
    println!(
        "{}",
        serde_json::json!({ "trees": count, "weight_violations": bad })
    );
    Ok(if bad == 0 { 0 } else { 1 })
}

fn cmd_export(a: &ExportArgs, cfg: &Config) -> Result<i32, Error> {
    if a.vertices < 1 || a.species < 1 {
        return Err(Error::BadOmegaParams { l: a.loops, v: a.vertices });
    }
    guard_edges(a.loops, a.vertices, a.max_edges.unwrap_or(cfg.max_edges))?;
    let gen = Generator::new(a.species);
    let sum = gen
        .omega(a.loops, a.vertices, &labels(a.legs))?
        .forget_order_threaded(cfg.threads);
    match a.format {
        Format::Json => println!("{}", sum.to_json()),
        Format::Dot => {
            for (i, (g, w)) in sum.iter().enumerate() {
                print!("{}", graph_to_dot(g, &format!("g{i}"), Some(w)));
            }
        }
        Format::Table => {
            return Err(Error::Parse("export supports json or dot".into()));
        }
    }
    Ok(0)
}
