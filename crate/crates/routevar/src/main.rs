use std::io::Read;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use routevar::api::{router, AppState};
use routevar::error::{Error, Result};
use routevar::formats;
use routevar::pipeline::{self, API_VERSION};
use routevar::store::Store;
use routevar::sweep::build_map_with_threads;
use routevar_core::chaos::{generate_variation, render_plan, PlanFormat, State3, VariationConfig};
use routevar_core::frameparse::{parse_move, render_parses, Grammar};
use routevar_core::icmap::{build_map, pick_ic, MetricRange};
use routevar_core::symbolize::SymbolSetId;
use routevar_core::vomm::DEFAULT_ORDER;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "routevar",
    version,
    about = "Chaotic variation of climbing routes"
)]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Grammar file to parse move descriptions with (default: bundled).
    #[arg(long, global = true)]
    grammar: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse move descriptions into frames and symbols.
    Parse(ParseArgs),
    /// Generate a variation plan from CRDL routes.
    Vary(VaryArgs),
    /// Sweep variation initial conditions and record effect/change.
    Map(MapArgs),
    /// Pick initial conditions from a map by effect and change.
    PickIc(PickArgs),
    /// Train a sequence model on routes or symbol sequences.
    Train(TrainArgs),
    /// Score routes, plans or sequences under a model.
    Score(ScoreArgs),
    /// Suggest short insertions that smooth a plan.
    Smooth(SmoothArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// Move lines, optionally starting with a hand token; `-` or none reads stdin.
    text: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct ConfigArgs {
    /// default, more-variation or identity.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// VariationConfig JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<VariationConfig> {
        let cfg = self
            .config
            .as_deref()
            .map(formats::read_config)
            .transpose()?;
        pipeline::resolve_config(self.preset.as_deref(), cfg)
    }
}

#[derive(Args)]
struct VaryArgs {
    /// CRDL route file; repeat to mix routes.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plan format (default: json for .json outputs and --json, text otherwise).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct MapArgs {
    /// Grid points per axis.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Grid spacing.
    #[arg(long, default_value_t = 0.1)]
    s: f64,
    /// Fixed axis, e.g. z=52 (default: z through the center).
    #[arg(long, conflicts_with = "full_3d")]
    slice: Option<String>,
    /// Sweep the full N x N x N cube.
    #[arg(long)]
    full_3d: bool,
    /// Sequence length n.
    #[arg(long = "len", default_value_t = 30)]
    length: usize,
    /// Grid center as x,y,z (default: the configuration's ic_r).
    #[arg(long)]
    center: Option<String>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write cells as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Evaluate cells on one thread.
    #[arg(long, conflicts_with = "threads")]
    serial: bool,
}

#[derive(Args)]
struct PickArgs {
    #[arg(long)]
    map: PathBuf,
    /// Effect range lo,hi (either end may be empty).
    #[arg(long)]
    effect: Option<String>,
    /// Change range lo,hi.
    #[arg(long)]
    change: Option<String>,
    #[arg(long, default_value_t = 10)]
    limit: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// CRDL route files.
    #[arg(long = "in")]
    inputs: Vec<PathBuf>,
    /// Symbol sequences, one per line, whitespace separated.
    #[arg(long, conflicts_with = "inputs")]
    sequences: Option<PathBuf>,
    #[arg(long, default_value = "s1")]
    set: String,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    /// Corpus descriptor stored in the model.
    #[arg(long, default_value = "all")]
    tag: String,
    #[arg(long)]
    out: PathBuf,
    /// Write the route alphabet as CSV (symbol,set,count).
    #[arg(long)]
    alphabet_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    /// CRDL route files.
    #[arg(long = "in")]
    inputs: Vec<PathBuf>,
    /// Plan files.
    #[arg(long)]
    plan: Vec<PathBuf>,
    /// A whitespace-separated symbol sequence.
    #[arg(long)]
    sequence: Vec<String>,
    #[arg(long, default_value = "s1")]
    set: String,
}

#[derive(Args)]
struct SmoothArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1)]
    jmax: usize,
    #[arg(long, default_value = "s1")]
    set: String,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "ROUTEVAR_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "ROUTEVAR_HOST", default_value = "127.0.0.1")]
    host: String,
    #[arg(long, env = "ROUTEVAR_STORE", default_value = "routevar-store")]
    store: PathBuf,
    /// Directory of static files served at /.
    #[arg(long = "static", env = "ROUTEVAR_STATIC")]
    static_dir: Option<PathBuf>,
    /// Map jobs allowed to run at once.
    #[arg(long, default_value_t = 2)]
    workers: usize,
}

fn parse_set(s: &str) -> Result<SymbolSetId> {
    SymbolSetId::parse(s)
        .ok_or_else(|| Error::validation(format!("unknown symbol set {s:?}; expected s1..s4")))
}

fn parse_state(text: &str) -> Result<State3> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::validation(format!("bad point {text:?}; expected x,y,z")))?;
    match parts[..] {
        [x, y, z] => Ok(State3::new(x, y, z)),
        _ => Err(Error::validation(format!(
            "bad point {text:?}; expected x,y,z"
        ))),
    }
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json"));
}

fn run_parse(args: ParseArgs, json_out: bool, grammar: &Grammar) -> Result<()> {
    let mut lines = args.text;
    if lines.is_empty() || lines == ["-"] {
        let mut input = String::new();
        std::io::stdin()
            .read_to_string(&mut input)
            .map_err(|e| Error::io(Path::new("<stdin>"), e))?;
        lines = input
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(String::from)
            .collect();
    }
    let mut results = Vec::new();
    for line in &lines {
        let result = pipeline::parse_description(line, grammar)
            .map_err(|e| e.with_detail(json!({ "text": line })))?;
        if !json_out {
            print!(
                "{}",
                render_parses(&parse_move(&result.text, grammar), grammar)
            );
            for (set, symbol) in &result.symbols {
                println!("{set}: {}", symbol.as_deref().unwrap_or("-"));
            }
        }
        results.push(result);
    }
    if json_out {
        print_json(&json!({ "api_version": API_VERSION, "results": results }));
    }
    Ok(())
}

fn run_vary(args: VaryArgs, json_out: bool) -> Result<()> {
    let cfg = args.config.resolve()?;
    let routes = args
        .inputs
        .iter()
        .map(|p| formats::read_route(p))
        .collect::<Result<Vec<_>>>()?;
    let plan = generate_variation(&routes, &cfg)?;
    let format = args.format.unwrap_or_else(|| {
        let json_file = args
            .out
            .as_ref()
            .is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
        if json_out || json_file {
            Format::Json
        } else {
            Format::Text
        }
    });
    let text = render_plan(
        &plan,
        match format {
            Format::Text => PlanFormat::Text,
            Format::Json => PlanFormat::Json,
        },
    );
    match &args.out {
        Some(path) => {
            formats::write_text(path, &text)?;
            if json_out {
                print_json(
                    &json!({ "api_version": API_VERSION, "out": path, "summary": plan.summary }),
                );
            } else {
                eprintln!(
                    "varied {} of {} moves -> {}",
                    plan.summary.changed,
                    plan.summary.total,
                    path.display()
                );
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run_map(args: MapArgs, json_out: bool) -> Result<()> {
    let cfg = args.config.resolve()?;
    let center = args
        .center
        .as_deref()
        .map(parse_state)
        .transpose()?
        .unwrap_or(cfg.ic_r);
    let slice = args
        .slice
        .as_deref()
        .map(pipeline::parse_slice)
        .transpose()?;
    let spec = pipeline::grid(center, args.n, args.s, slice, args.full_3d)?;
    let map = if args.serial {
        build_map(spec, &cfg, args.length)?
    } else {
        let threads = args
            .threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        build_map_with_threads(spec, &cfg, args.length, threads)?
    };
    if let Some(path) = &args.out {
        formats::save_map(&map, path)?;
    }
    if let Some(path) = &args.csv {
        formats::write_text(path, &formats::cells_csv(&map))?;
    }
    let live = map.cells.iter().filter(|c| !c.poisoned);
    let max_effect = live.clone().map(|c| c.effect).max().unwrap_or(0);
    let min_effect = live.clone().map(|c| c.effect).min().unwrap_or(0);
    let center_cell = map.cells[map.center_index()];
    let summary = json!({
        "api_version": API_VERSION,
        "cells": map.cells.len(),
        "poisoned": map.cells.iter().filter(|c| c.poisoned).count(),
        "sequence_length": map.sequence_length,
        "center": center_cell,
        "effect_min": min_effect,
        "effect_max": max_effect,
        "out": args.out,
        "csv": args.csv,
    });
    if json_out {
        print_json(&summary);
    } else {
        println!(
            "{} cells, effect {}..{} of {}, center effect {} change {}",
            map.cells.len(),
            min_effect,
            max_effect,
            map.sequence_length,
            center_cell.effect,
            center_cell.change
        );
    }
    Ok(())
}

fn run_pick(args: PickArgs, json_out: bool) -> Result<()> {
    let map = formats::load_map(&args.map)?;
    let range = |s: &Option<String>| {
        s.as_deref()
            .map(pipeline::parse_range)
            .unwrap_or(Ok(MetricRange::everything()))
    };
    let picked = pick_ic(&map, range(&args.effect)?, range(&args.change)?, args.limit);
    if json_out {
        print_json(&json!({ "api_version": API_VERSION, "candidates": picked }));
    } else {
        for c in &picked {
            println!(
                "{:>7}  ic ({}, {}, {})  effect {}  change {:.3}",
                c.index, c.cell.ic.x, c.cell.ic.y, c.cell.ic.z, c.cell.effect, c.cell.change
            );
        }
        if picked.is_empty() {
            eprintln!("no cell matches");
        }
    }
    Ok(())
}

fn read_sequences(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(formats::read_text(path)?
        .lines()
        .map(|l| l.split_whitespace().map(String::from).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect())
}

fn run_train(args: TrainArgs, json_out: bool, grammar: &Grammar) -> Result<()> {
    let set = parse_set(&args.set)?;
    let (model, report) = match &args.sequences {
        Some(path) => {
            pipeline::train_on_sequences(&read_sequences(path)?, set, args.order, &args.tag, 0)?
        }
        None => {
            if args.inputs.is_empty() {
                return Err(Error::validation("give --in route files or --sequences"));
            }
            let routes = args
                .inputs
                .iter()
                .map(|p| formats::read_route(p))
                .collect::<Result<Vec<_>>>()?;
            if let Some(path) = &args.alphabet_csv {
                let entries = pipeline::route_alphabet(&routes, grammar, set);
                formats::write_text(path, &formats::alphabet_csv(&entries, set))?;
            }
            pipeline::train_on_routes(&routes, grammar, set, args.order, &args.tag)?
        }
    };
    formats::save_model(&model, &args.out)?;
    if json_out {
        print_json(&json!({ "api_version": API_VERSION, "out": args.out, "report": report }));
    } else {
        println!(
            "trained order {} on {} symbols over {} sequences, alphabet {} ({} moves skipped) -> {}",
            report.max_order,
            report.training_symbols,
            report.sequences,
            report.alphabet.len(),
            report.skipped_moves,
            args.out.display()
        );
    }
    Ok(())
}

fn run_score(args: ScoreArgs, json_out: bool, grammar: &Grammar) -> Result<()> {
    let model = formats::load_model(&args.model)?;
    let set = parse_set(&args.set)?;
    let mut items: Vec<(String, Vec<String>, usize)> = Vec::new();
    for path in &args.inputs {
        let route = formats::read_route(path)?;
        let symbols = pipeline::route_symbols(&route, grammar, set);
        let skipped = symbols.iter().filter(|s| s.is_none()).count();
        items.push((
            path.display().to_string(),
            symbols.into_iter().flatten().collect(),
            skipped,
        ));
    }
    for path in &args.plan {
        let plan = formats::read_plan(path)?;
        let symbols: Vec<Option<String>> = plan
            .planned_moves()
            .map(|m| pipeline::symbol_of(&m.text, false, grammar, set))
            .collect();
        let skipped = symbols.iter().filter(|s| s.is_none()).count() + plan.summary.gaps;
        items.push((
            path.display().to_string(),
            symbols.into_iter().flatten().collect(),
            skipped,
        ));
    }
    for seq in &args.sequence {
        items.push((
            seq.clone(),
            seq.split_whitespace().map(String::from).collect(),
            0,
        ));
    }
    if items.is_empty() {
        return Err(Error::validation("give --in, --plan or --sequence"));
    }
    let mut scores = Vec::new();
    for (source, symbols, skipped) in items {
        let l = model
            .likelihood(&symbols)
            .map_err(|e| Error::from(e).with_detail(json!({ "source": source })))?;
        if !json_out {
            println!(
                "{source}: {:.3} bits, {:.3} bits/symbol over {} symbols",
                l.total_bits,
                l.per_symbol_bits,
                symbols.len()
            );
        }
        scores.push(
            json!({ "source": source, "symbols": symbols, "skipped": skipped, "likelihood": l }),
        );
    }
    if json_out {
        print_json(&json!({ "api_version": API_VERSION, "scores": scores }));
    }
    Ok(())
}

fn run_smooth(args: SmoothArgs, json_out: bool, grammar: &Grammar) -> Result<()> {
    let plan = formats::read_plan(&args.plan)?;
    let model = formats::load_model(&args.model)?;
    let report = pipeline::smooth_plan(&plan, &model, grammar, parse_set(&args.set)?, args.jmax)?;
    if json_out {
        let mut body = serde_json::to_value(&report).expect("report serializes");
        body["api_version"] = json!(API_VERSION);
        print_json(&body);
    } else {
        for s in &report.suggestions {
            let moves: Vec<String> = s
                .moves
                .iter()
                .map(|m| format!("{} {}", m.hand, m.symbol))
                .collect();
            println!(
                "after move {}: insert {} (suggested; {:.3} -> {:.3} bits)",
                s.after + 1,
                moves.join(", "),
                s.baseline_bits,
                s.bits
            );
        }
        if report.suggestions.is_empty() {
            println!(
                "no insertion improves the plan ({} pairs searched)",
                report.anchors
            );
        }
    }
    Ok(())
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
}

fn run_serve(args: ServeArgs, grammar: Grammar) -> Result<()> {
    let store = Store::open(&args.store)?;
    let app = router(AppState::new(store, grammar, args.workers), args.static_dir);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|_| {
            Error::validation(format!("bad listen address {}:{}", args.host, args.port))
        })?;
    let runtime =
        tokio::runtime::Runtime::new().map_err(|e| Error::io(Path::new("<runtime>"), e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Error::io(Path::new(&addr.to_string()), e))?;
        eprintln!(
            "listening on http://{}",
            listener
                .local_addr()
                .map_err(|e| Error::io(Path::new("<socket>"), e))?
        );
        axum::serve(listener, app)
            .with_graceful_shutdown(shutdown_signal())
            .await
            .map_err(|e| Error::io(Path::new(&addr.to_string()), e))
    })
}

fn run(cli: Cli) -> Result<()> {
    let grammar = formats::grammar(cli.grammar.as_deref())?;
    let json_out = cli.json;
    match cli.command {
        Command::Parse(a) => run_parse(a, json_out, &grammar),
        Command::Vary(a) => run_vary(a, json_out),
        Command::Map(a) => run_map(a, json_out),
        Command::PickIc(a) => run_pick(a, json_out),
        Command::Train(a) => run_train(a, json_out, &grammar),
        Command::Score(a) => run_score(a, json_out, &grammar),
        Command::Smooth(a) => run_smooth(a, json_out, &grammar),
        Command::Serve(a) => run_serve(a, grammar),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
