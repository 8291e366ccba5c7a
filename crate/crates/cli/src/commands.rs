use std::fs;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gridroute::engine::{run_engine, EngineConfig, RepairMode};
use gridroute::format::{emit_routes, parse_instance, parse_routes};
use gridroute::grid::{generate_synthetic, Instance};
use gridroute::metrics::{compute_metrics, geo_mean};
use gridroute::oracle::{enumerate_routings, EnumerationLimits};
use gridroute::repair::RepairConfig;

use crate::report;
use crate::svg::render_svg;

#[derive(Parser)]
#[command(name = "gridroute", version, about = "Parallel net routing on grid graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Route an instance and write report, routes, and optional rendering.
    Route(RouteArgs),
    /// Time a run at 1, 2, 4, and 8 threads and report speedups.
    Bench(BenchArgs),
    /// Render an instance plus routes file as an SVG.
    Render(RenderArgs),
    /// Exhaustively solve a tiny instance (debugging aid).
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
pub struct InputArgs {
    /// Instance file to route.
    #[arg(long, conflicts_with = "gen")]
    pub input: Option<PathBuf>,
    /// Generate a synthetic instance, e.g. `50x50:1000:3`
    /// (rows x cols : nets : terminals per net).
    #[arg(long)]
    pub gen: Option<GenSpec>,
    /// Seed for generation and for routing-internal sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone)]
pub struct EngineArgs {
    /// Iteration cap for the outer loop.
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Initial budget is ceil(width_factor * W_min).
    #[arg(long, default_value_t = 1.2)]
    pub width_factor: f64,
    /// Candidate detours evaluated per repair pass.
    #[arg(long, default_value_t = 3)]
    pub beta: usize,
    /// Repair variant: `base` (single path), `a` (beta paths), or `b`
    /// (beta paths plus net ordering).
    #[arg(long, value_enum, default_value_t = Variant::B)]
    pub variant: Variant,
    /// When the repair pass runs.
    #[arg(long, value_enum, default_value_t = RepairWhen::Post)]
    pub repair: RepairWhen,
    /// Recompute Steiner candidates every iteration.
    #[arg(long)]
    pub recompute_steiner: bool,
}

#[derive(Args)]
pub struct RouteArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Worker threads for the routing phase.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Directory for routes.txt, report.txt, and report.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Also write solution.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Additional instance files to bench.
    #[arg(long = "also", value_name = "FILE")]
    pub also: Vec<PathBuf>,
}

#[derive(Args)]
pub struct RenderArgs {
    /// Instance file.
    #[arg(long)]
    pub input: PathBuf,
    /// Routes file produced by `route`.
    #[arg(long)]
    pub routes: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    pub out: PathBuf,
    /// Budget override for violation highlighting (defaults to the routes
    /// file metadata).
    #[arg(long)]
    pub width: Option<u32>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Base,
    A,
    B,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RepairWhen {
    Post,
    PerIter,
    Off,
}

/// Generator spec `RxC:N:T`.
#[derive(Clone, Copy)]
pub struct GenSpec {
    pub rows: usize,
    pub cols: usize,
    pub nets: usize,
    pub terminals: usize,
}

impl FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let bad = || format!("expected RxC:N:T, got `{s}`");
        let mut parts = s.split(':');
        let dims = parts.next().ok_or_else(bad)?;
        let (rows, cols) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
        let rows = rows.parse().map_err(|_| bad())?;
        let cols = cols.parse().map_err(|_| bad())?;
        let nets = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let terminals = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(GenSpec {
            rows,
            cols,
            nets,
            terminals,
        })
    }
}

pub fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Route(args) => cmd_route(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Render(args) => cmd_render(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn load_instance(input: &InputArgs) -> Result<(String, Instance)> {
    match (&input.input, &input.gen) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let instance = parse_instance(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into());
            Ok((name, instance))
        }
        (None, Some(spec)) => {
            let instance =
                generate_synthetic(spec.rows, spec.cols, spec.nets, spec.terminals, input.seed)?;
            Ok((
                format!(
                    "gen-{}x{}-{}n-{}t-s{}",
                    spec.rows, spec.cols, spec.nets, spec.terminals, input.seed
                ),
                instance,
            ))
        }
        (None, None) => bail!("one of --input or --gen is required"),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    }
}

fn engine_config(engine: &EngineArgs, threads: usize, seed: u64) -> EngineConfig {
    let repair = match engine.variant {
        Variant::Base => RepairConfig {
            beta: 1,
            sort_nets: false,
            ..RepairConfig::default()
        },
        Variant::A => RepairConfig {
            beta: engine.beta,
            sort_nets: false,
            ..RepairConfig::default()
        },
        Variant::B => RepairConfig {
            beta: engine.beta,
            sort_nets: true,
            ..RepairConfig::default()
        },
    };
    EngineConfig {
        max_iter: engine.max_iter,
        width_factor: engine.width_factor,
        threads,
        seed,
        repair_mode: match engine.repair {
            RepairWhen::Post => RepairMode::Post,
            RepairWhen::PerIter => RepairMode::PerIteration,
            RepairWhen::Off => RepairMode::Off,
        },
        repair,
        recompute_steiner: engine.recompute_steiner,
    }
}

fn cmd_route(args: RouteArgs) -> Result<i32> {
    let (_, instance) = load_instance(&args.input)?;
    let config = engine_config(&args.engine, args.threads, args.input.seed);

    let started = Instant::now();
    let outcome = run_engine(&instance, &config)?;
    let runtime = started.elapsed().as_secs_f64();
    let metrics = compute_metrics(&outcome.solution, &instance, runtime, config.threads);

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let routes_text = emit_routes(
        &instance.graph,
        &outcome.solution.route_trees,
        outcome.solution.width,
    );
    fs::write(args.out_dir.join("routes.txt"), &routes_text)?;

    let text = report::text_report(&metrics, &outcome);
    fs::write(args.out_dir.join("report.txt"), &text)?;
    let json = report::json_report(&metrics, &outcome)?;
    fs::write(args.out_dir.join("report.json"), json)?;

    if args.svg {
        let routes = parse_routes(&instance.graph, &routes_text)?;
        let svg = render_svg(&instance, &routes.nets, routes.width);
        fs::write(args.out_dir.join("solution.svg"), svg)?;
    }

    print!("{text}");
    Ok(if metrics.total_excess > 0 { 2 } else { 0 })
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let mut instances = vec![load_instance(&args.input)?];
    for path in &args.also {
        let extra = InputArgs {
            input: Some(path.clone()),
            gen: None,
            seed: args.input.seed,
        };
        instances.push(load_instance(&extra)?);
    }

    let thread_counts = [1usize, 2, 4, 8];
    let mut per_thread_speedups: Vec<Vec<f64>> = vec![Vec::new(); thread_counts.len()];
    println!("{:<28} {:>8} {:>10} {:>9}", "instance", "threads", "wall_s", "speedup");
    for (name, instance) in &instances {
        let mut walls = Vec::new();
        let mut outputs = Vec::new();
        for &threads in &thread_counts {
            let config = engine_config(&args.engine, threads, args.input.seed);
            let started = Instant::now();
            let outcome = run_engine(instance, &config)?;
            walls.push(started.elapsed().as_secs_f64());
            outputs.push(emit_routes(
                &instance.graph,
                &outcome.solution.route_trees,
                outcome.solution.width,
            ));
        }
        if !bench_outputs_match(&outputs) {
            bail!("determinism violation: {name} produced differing routes across thread counts");
        }
        for (slot, (&threads, &wall)) in thread_counts.iter().zip(&walls).enumerate() {
            let speedup = walls[0] / wall;
            per_thread_speedups[slot].push(speedup);
            println!("{name:<28} {threads:>8} {wall:>10.3} {speedup:>9.2}");
        }
    }
    if instances.len() > 1 {
        print!("{:<28}", "geo-mean");
        for (slot, &threads) in thread_counts.iter().enumerate() {
            let gm = geo_mean(&per_thread_speedups[slot])?;
            print!(" t{threads}={gm:.2}");
        }
        println!();
    }
    Ok(0)
}

fn cmd_render(args: RenderArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let instance = parse_instance(&text)?;
    let routes_text = fs::read_to_string(&args.routes)
        .with_context(|| format!("reading {}", args.routes.display()))?;
    let routes = parse_routes(&instance.graph, &routes_text)?;
    let width = args.width.or(routes.width);
    let svg = render_svg(&instance, &routes.nets, width);
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&args.out, svg).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(0)
}

fn cmd_oracle(args: OracleArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.input)?;
    let instance = parse_instance(&text)?;
    let result = enumerate_routings(&instance, &EnumerationLimits::default())?;
    match result.optimal_wire_length {
        Some(len) => println!("optimal_wire_length {len}"),
        None => println!("optimal_wire_length infeasible"),
    }
    println!("min_channel_width {}", result.min_channel_width);
    for (i, tree) in result.width_witness.iter().enumerate() {
        let coords: Vec<String> = tree
            .iter()
            .map(|&e| {
                let (a, b) = instance.graph.endpoints(e);
                let (r1, c1) = instance.graph.coords(a);
                let (r2, c2) = instance.graph.coords(b);
                format!("({r1},{c1})-({r2},{c2})")
            })
            .collect();
        println!("width_witness net {}: {}", instance.nets[i].id, coords.join(" "));
    }
    Ok(0)
}

pub fn bench_outputs_match(outputs: &[String]) -> bool {
    outputs.windows(2).all(|w| w[0] == w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_spec_parses() {
        let spec: GenSpec = "50x50:1000:3".parse().unwrap();
        assert_eq!(
            (spec.rows, spec.cols, spec.nets, spec.terminals),
            (50, 50, 1000, 3)
        );
        assert!("50x50:1000".parse::<GenSpec>().is_err());
        assert!("50:1000:3".parse::<GenSpec>().is_err());
        assert!("axb:1:2".parse::<GenSpec>().is_err());
    }

    #[test]
    fn variant_maps_to_repair_config() {
        let engine = EngineArgs {
            max_iter: 50,
            width_factor: 1.2,
            beta: 5,
            variant: Variant::Base,
            repair: RepairWhen::Post,
            recompute_steiner: false,
        };
        let config = engine_config(&engine, 1, 0);
        assert_eq!(config.repair.beta, 1);
        assert!(!config.repair.sort_nets);

        let config = engine_config(
            &EngineArgs {
                variant: Variant::A,
                ..engine.clone()
            },
            1,
            0,
        );
        assert_eq!(config.repair.beta, 5);
        assert!(!config.repair.sort_nets);

        let config = engine_config(
            &EngineArgs {
                variant: Variant::B,
                ..engine
            },
            1,
            0,
        );
        assert_eq!(config.repair.beta, 5);
        assert!(config.repair.sort_nets);
    }

    #[test]
    fn mismatching_bench_outputs_are_a_hard_failure() {
        let ok = vec!["a".to_string(), "a".to_string()];
        let bad = vec!["a".to_string(), "b".to_string()];
        assert!(bench_outputs_match(&ok));
        assert!(!bench_outputs_match(&bad));
    }
}
