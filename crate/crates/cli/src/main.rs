mod config;
mod solution;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use rgvroute::heuristic::{rule_route, DispatchRule};
use rgvroute::milp::{
    build_model, complete_arcs, model_stats, oracle_report, reduce_arcs, write_lp, write_stats_csv, ArcSet, CutGroups,
    ModelOptions,
};
use rgvroute::milpsolver::{solve_milp, MilpOptions, MilpStatus};
use rgvroute::rolling::{Backend as RollingBackend, RollingConfig};
use rgvroute::seqsolver::{solve_exact_with, SeqError, SeqOptions};
use rgvroute::simulator::{
    gen_dynamic, gen_static, run_experiment, summarize, write_results_csv, write_summary_csv, ArrivalReading,
    ControllerKind, GenConfig, ResultRow, TwMode,
};
use rgvroute::toy::toy_reconstruction;
use rgvroute::{evaluate_route, Instance, Objective};

use config::RgvOverride;
use solution::SolutionFile;

/// Routing toolkit for a two-sided rail-guided vehicle.
#[derive(Parser)]
#[command(name = "rgvroute", version)]
struct Cli {
    /// Directory that relative output paths are written into.
    #[arg(long, global = true, env = "RGV_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// TOML (or .json) file overriding vehicle parameters: w_rgv, accel, cruise_speed, mu, g.
    #[arg(long, global = true)]
    rgv_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Solve an instance and write a solution file.
    Solve(SolveArgs),
    /// Write the model of an instance in LP format.
    ExportLp(ExportArgs),
    /// Run controllers over seeded dynamic streams and write a metrics CSV.
    Simulate(SimArgs),
    /// Solve a suite of static instances under several cut sets and write a CSV.
    Bench(BenchArgs),
    /// Check model against deck oracle on small instances, or re-check a solution file.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Static,
    Dynamic,
    /// Hand-made seven-request layout (invented coordinates; demo only).
    Toy,
}

#[derive(Clone, Copy, ValueEnum)]
enum TwArg {
    None,
    Mixed,
}

impl From<TwArg> for TwMode {
    fn from(t: TwArg) -> Self {
        match t {
            TwArg::None => TwMode::None,
            TwArg::Mixed => TwMode::Mixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReadingArg {
    Mean,
    Rate,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "static")]
    kind: GenKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Station pairs.
    #[arg(long)]
    m: Option<u32>,
    /// Fixed request count (dynamic default 50; static default draws queue lengths).
    #[arg(long)]
    n: Option<usize>,
    /// Static queue-length bound per station side.
    #[arg(long, default_value_t = 1)]
    a: u32,
    #[arg(long = "Q", default_value_t = 2)]
    capacity: u32,
    #[arg(long, value_enum, default_value = "none")]
    tw: TwArg,
    #[arg(long, default_value_t = 0.5)]
    arrival_mean: f64,
    #[arg(long, value_enum, default_value = "mean")]
    arrival_reading: ReadingArg,
    #[arg(short, long, default_value = "instance.json")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum BackendArg {
    Seq,
    Milp,
    Rule,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArcArg {
    Reduced,
    Complete,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "energy")]
    objective: Objective,
    #[arg(long, default_value = "none")]
    cuts: CutGroups,
    #[arg(long, value_enum, default_value = "reduced")]
    arcs: ArcArg,
}

impl ModelArgs {
    fn options(&self) -> ModelOptions {
        ModelOptions { objective: self.objective, ..ModelOptions::with_cuts(self.cuts) }
    }

    fn arc_set(&self, inst: &Instance) -> ArcSet {
        match self.arcs {
            ArcArg::Reduced => reduce_arcs(inst),
            ArcArg::Complete => complete_arcs(inst),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "seq")]
    backend: BackendArg,
    #[command(flatten)]
    model: ModelArgs,
    /// Seconds; the MILP backend reports its gap when stopped.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(short, long, default_value = "solution.json")]
    output: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(short, long, default_value = "model.lp")]
    output: PathBuf,
    /// Also write a one-row model size CSV here.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ControllerArg {
    Rolling,
    Rule,
    Both,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum, default_value = "rolling")]
    controller: ControllerArg,
    #[arg(long, default_value_t = 8)]
    horizon: usize,
    #[arg(long = "Q", default_value_t = 2)]
    capacity: u32,
    #[arg(long, value_enum, default_value = "none")]
    tw: TwArg,
    /// Horizon solver of the rolling controller.
    #[arg(long, value_enum, default_value = "seq")]
    backend: BackendArg,
    #[arg(long, default_value = "g123")]
    cuts: CutGroups,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of streams, seeds `seed..seed+count`.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    m: u32,
    #[arg(long, default_value_t = 0.5)]
    arrival_mean: f64,
    #[arg(long, value_enum, default_value = "mean")]
    arrival_reading: ReadingArg,
    /// Simulated decision latency.
    #[arg(long, default_value_t = 0.0)]
    latency: f64,
    /// Run this stream file instead of generated ones.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Write per-run event logs (CSV) and traces (JSON lines).
    #[arg(long)]
    traces: bool,
    #[arg(short, long, default_value = "metrics.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Request counts.
    #[arg(long, value_delimiter = ',', default_value = "7,8")]
    sizes: Vec<usize>,
    /// Capacities.
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    caps: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "none,g23")]
    cuts: Vec<CutGroups>,
    /// Instances per (size, capacity).
    #[arg(long, default_value_t = 5)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 9)]
    m: u32,
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(short, long, default_value = "bench.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Re-check this solution file against `--instance` instead of running the suite.
    #[arg(long, requires = "instance")]
    solution: Option<PathBuf>,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    count: u64,
    #[arg(long, default_value_t = 4)]
    max_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "g123")]
    cuts: CutGroups,
    #[arg(long, value_enum, default_value = "reduced")]
    arcs: ArcArg,
}

/// How a command ended, mapped onto the exit status.
enum Failure {
    Infeasible(String),
    Usage(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    out_dir: PathBuf,
    rgv: Option<RgvOverride>,
}

impl Ctx {
    fn out(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }

    fn write(&self, p: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<PathBuf> {
        let path = self.out(p);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn adjust(&self, mut inst: Instance) -> Instance {
        if let Some(o) = &self.rgv {
            inst.rgv = o.apply(inst.rgv);
        }
        inst
    }

    fn load_instance(&self, p: &Path) -> Result<Instance, Failure> {
        let text = fs::read_to_string(p).map_err(|e| Failure::Usage(anyhow!("reading {}: {e}", p.display())))?;
        let inst: Instance = serde_json::from_str(&text).map_err(|e| Failure::Usage(anyhow!("{}: {e}", p.display())))?;
        let inst = self.adjust(inst);
        inst.validate().map_err(|e| Failure::Usage(anyhow!("{}: {e}", p.display())))?;
        Ok(inst)
    }

    fn gen_config(&self, mut cfg: GenConfig) -> GenConfig {
        if let Some(o) = &self.rgv {
            cfg.rgv = o.apply(cfg.rgv);
        }
        cfg
    }
}

fn reading(r: ReadingArg) -> ArrivalReading {
    match r {
        ReadingArg::Mean => ArrivalReading::InterArrivalMean,
        ReadingArg::Rate => ArrivalReading::Rate,
    }
}

fn gen(ctx: &Ctx, a: &GenArgs) -> Outcome {
    let inst = match a.kind {
        GenKind::Toy => ctx.adjust(toy_reconstruction(a.capacity)),
        GenKind::Static | GenKind::Dynamic => {
            let base = GenConfig {
                seed: a.seed,
                n: a.n,
                a: a.a,
                capacity: a.capacity,
                tw: a.tw.into(),
                arrival_mean: a.arrival_mean,
                arrival_reading: reading(a.arrival_reading),
                ..GenConfig::default()
            };
            let cfg = ctx.gen_config(GenConfig { m: a.m.unwrap_or(base.m), ..base });
            if matches!(a.kind, GenKind::Static) {
                gen_static(&GenConfig { m: a.m.unwrap_or(9), ..cfg })
            } else {
                gen_dynamic(&cfg)
            }
        }
    };
    let path = ctx.write(&a.output, serde_json::to_string_pretty(&inst).map_err(anyhow::Error::from)?)?;
    println!("wrote {} ({} requests, {} station pairs)", path.display(), inst.n(), inst.m);
    Ok(())
}

fn solve(ctx: &Ctx, a: &SolveArgs) -> Outcome {
    let inst = ctx.load_instance(&a.instance)?;
    let objective = a.model.objective;
    let obj_name = match objective {
        Objective::Energy => "energy",
        Objective::Distance => "distance",
    };
    let sol = match a.backend {
        BackendArg::Rule => {
            let rule = DispatchRule::for_instance(&inst);
            let ev = rule_route(&inst, rule);
            SolutionFile::new("rule", obj_name, None, "heuristic", &ev, 0, None)
        }
        BackendArg::Seq => {
            let opts = SeqOptions { objective, threads: a.threads.max(1), ..SeqOptions::default() };
            match solve_exact_with(&inst, &opts) {
                Ok(s) => {
                    let status = if s.proven_optimal { "optimal" } else { "feasible" };
                    SolutionFile::new("seq", obj_name, None, status, &s.eval, s.nodes, None)
                }
                Err(e @ (SeqError::Infeasible { .. } | SeqError::DeadlineUnreachable(_))) => {
                    return Err(Failure::Infeasible(e.to_string()))
                }
                Err(e @ SeqError::TooLarge(_)) => return Err(Failure::Usage(anyhow!(e))),
                Err(e) => return Err(Failure::Internal(anyhow!(e))),
            }
        }
        BackendArg::Milp => {
            let model = build_model(&inst, &a.model.arc_set(&inst), a.model.options()).map_err(|e| Failure::Usage(anyhow!(e)))?;
            let warm = rule_route(&inst, DispatchRule::for_instance(&inst));
            let opts = MilpOptions {
                time_limit: a.time_limit.map(Duration::from_secs_f64),
                node_limit: None,
                warm_start: warm.feasible.then_some(warm.route),
            };
            let res = solve_milp(&model, &inst, &opts).map_err(|e| Failure::Internal(anyhow!(e)))?;
            if res.status == MilpStatus::Infeasible {
                let cert = res.certificate.as_ref().map(|c| c.families.join(", ")).unwrap_or_default();
                let why = if cert.is_empty() { "search tree exhausted".to_string() } else { format!("row families {cert}") };
                return Err(Failure::Infeasible(format!("model infeasible: {why}")));
            }
            let route = res.route.clone().ok_or_else(|| Failure::Internal(anyhow!("time limit reached before any route was found")))?;
            let ev = evaluate_route(&inst, &route).map_err(|e| Failure::Internal(anyhow!(e)))?;
            let status = if res.status == MilpStatus::Optimal { "optimal" } else { "feasible" };
            SolutionFile::new("milp", obj_name, Some(a.model.cuts.to_string()), status, &ev, res.nodes, res.gap())
        }
    };
    let path = ctx.write(&a.output, serde_json::to_string_pretty(&sol).map_err(anyhow::Error::from)?)?;
    println!("backend   {} ({})", sol.backend, sol.status);
    println!("route     {}", sol.route.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" -> "));
    println!("energy    {:.6}", sol.energy);
    println!("distance  {:.6}", sol.distance);
    println!("completed {:.6}", sol.completion_time);
    if sol.tw_misses > 0 {
        println!("deadline misses {}", sol.tw_misses);
    }
    if let Some(g) = sol.gap {
        println!("gap       {:.4}%", 100.0 * g);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn export_lp(ctx: &Ctx, a: &ExportArgs) -> Outcome {
    let inst = ctx.load_instance(&a.instance)?;
    let model = build_model(&inst, &a.model.arc_set(&inst), a.model.options()).map_err(|e| Failure::Usage(anyhow!(e)))?;
    let path = ctx.out(&a.output);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(anyhow::Error::from)?;
    }
    write_lp(&model, &path).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} ({} columns, {} rows)", path.display(), model.vars.len(), model.rows.len());
    if let Some(s) = &a.stats {
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &[model_stats(&model)]).map_err(anyhow::Error::from)?;
        let p = ctx.write(s, buf)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn simulate(ctx: &Ctx, a: &SimArgs) -> Outcome {
    let backend = match a.backend {
        BackendArg::Seq => RollingBackend::Seq,
        BackendArg::Milp => RollingBackend::Milp { cuts: a.cuts, time_limit: None },
        BackendArg::Rule => return Err(Failure::Usage(anyhow!("the rolling controller needs an exact backend (seq or milp)"))),
    };
    let rolling = ControllerKind::Rolling(RollingConfig { horizon: a.horizon, backend, latency: a.latency, ..RollingConfig::default() });
    let controllers: Vec<ControllerKind> = match a.controller {
        ControllerArg::Rolling => vec![rolling],
        ControllerArg::Rule => vec![ControllerKind::Rule],
        ControllerArg::Both => vec![ControllerKind::Rule, rolling],
    };
    let streams: Vec<(String, u64, Instance)> = match &a.instance {
        Some(p) => vec![(p.display().to_string(), 0, ctx.load_instance(p)?)],
        None => (a.seed..a.seed + a.count)
            .map(|seed| {
                let cfg = ctx.gen_config(GenConfig {
                    n: Some(a.n),
                    m: a.m,
                    arrival_mean: a.arrival_mean,
                    arrival_reading: reading(a.arrival_reading),
                    ..GenConfig::dynamic(seed, a.capacity, a.tw.into())
                });
                (format!("dyn-{seed}"), seed, gen_dynamic(&cfg))
            })
            .collect(),
    };
    let mut rows = Vec::new();
    for (name, seed, stream) in &streams {
        for &c in &controllers {
            let (metrics, trace) = run_experiment(stream, c);
            if a.traces {
                let stem = format!("{name}-{}", c.label()).replace(['/', '\\'], "_");
                let mut log = Vec::new();
                trace.write_event_log(&mut log).map_err(anyhow::Error::from)?;
                ctx.write(Path::new(&format!("{stem}.events.csv")), log)?;
                let mut lines = Vec::new();
                trace.write_jsonl(&mut lines).map_err(anyhow::Error::from)?;
                ctx.write(Path::new(&format!("{stem}.trace.jsonl")), lines)?;
            }
            rows.push(ResultRow {
                instance: name.clone(),
                seed: *seed,
                controller: c.label().into(),
                capacity: stream.capacity,
                tw: stream.has_deadlines(),
                metrics,
            });
        }
    }
    let mut buf = Vec::new();
    write_results_csv(&mut buf, &rows).map_err(anyhow::Error::from)?;
    let path = ctx.write(&a.output, buf)?;
    let summary = summarize(&rows);
    let mut sbuf = Vec::new();
    write_summary_csv(&mut sbuf, &summary).map_err(anyhow::Error::from)?;
    let spath = ctx.write(&a.output.with_extension("summary.csv"), sbuf)?;
    for r in &rows {
        println!(
            "{:<12} {:<8} Q={} energy {:>10.3} distance {:>8.1} done {:>9.2} tw misses {}",
            r.instance, r.controller, r.capacity, r.metrics.energy, r.metrics.distance, r.metrics.completion_time, r.metrics.tw_violations
        );
    }
    for s in &summary {
        if s.rule_energy.is_finite() && s.rolling_energy.is_finite() {
            println!("Q={} tw={} rule {:.3} rolling {:.3} saving {:.2}%", s.capacity, s.tw, s.rule_energy, s.rolling_energy, s.saving_pct);
        }
    }
    println!("wrote {} and {}", path.display(), spath.display());
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    instance: String,
    #[serde(rename = "P")]
    requests: usize,
    #[serde(rename = "Q")]
    capacity: u32,
    cuts: String,
    status: String,
    nodes: u64,
    wall_time_s: f64,
    root_bound: Option<f64>,
    objective: Option<f64>,
    root_gap: Option<f64>,
    rows: usize,
}

fn bench(ctx: &Ctx, a: &BenchArgs) -> Outcome {
    let mut jobs = Vec::new();
    for &p in &a.sizes {
        for &q in &a.caps {
            for k in 0..a.count {
                let seed = a.seed + k;
                let cfg = ctx.gen_config(GenConfig { seed, m: a.m, n: Some(p), capacity: q, ..GenConfig::default() });
                let inst = gen_static(&cfg);
                for &c in &a.cuts {
                    jobs.push((format!("s{p}-q{q}-{seed}"), inst.clone(), c));
                }
            }
        }
    }
    let limit = Duration::from_secs_f64(a.time_limit);
    let run = |(name, inst, cuts): &(String, Instance, CutGroups)| -> anyhow::Result<BenchRow> {
        let model = build_model(inst, &reduce_arcs(inst), ModelOptions::with_cuts(*cuts))?;
        let res = solve_milp(&model, inst, &MilpOptions { time_limit: Some(limit), ..MilpOptions::default() })?;
        Ok(BenchRow {
            instance: name.clone(),
            requests: inst.n(),
            capacity: inst.capacity,
            cuts: cuts.to_string(),
            status: format!("{:?}", res.status).to_lowercase(),
            nodes: res.nodes,
            wall_time_s: res.elapsed.as_secs_f64(),
            root_bound: res.root_bound,
            objective: res.objective,
            root_gap: res.root_gap(),
            rows: model.rows.len(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.workers.max(1)).build().map_err(anyhow::Error::from)?;
    let rows: Vec<BenchRow> = pool.install(|| jobs.par_iter().map(run).collect::<anyhow::Result<_>>())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(anyhow::Error::from)?;
        println!(
            "{:<14} cuts {:<5} {:<8} nodes {:>6} time {:>8.2}s root gap {}",
            r.instance,
            r.cuts,
            r.status,
            r.nodes,
            r.wall_time_s,
            r.root_gap.map_or("-".into(), |g| format!("{:.2}%", 100.0 * g))
        );
    }
    let path = ctx.write(&a.output, w.into_inner().map_err(|e| anyhow!(e.to_string()))?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn random_small(r: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let n = r.random_range(1..=max_n);
    let cfg = GenConfig { seed: r.random(), m: 5, n: Some(n), capacity: r.random_range(1..=3), ..GenConfig::default() };
    let mut inst = gen_static(&cfg);
    for q in &mut inst.requests {
        if r.random_bool(0.3) {
            q.l = r.random_range(8.0..40.0);
        }
    }
    inst
}

fn validate(ctx: &Ctx, a: &ValidateArgs) -> Outcome {
    if let Some(sol_path) = &a.solution {
        let inst = ctx.load_instance(a.instance.as_ref().expect("clap enforces --instance"))?;
        let text = fs::read_to_string(sol_path).map_err(|e| Failure::Usage(anyhow!("reading {}: {e}", sol_path.display())))?;
        let sol: SolutionFile = serde_json::from_str(&text).map_err(|e| Failure::Usage(anyhow!("{}: {e}", sol_path.display())))?;
        let issues = sol.discrepancies(&inst);
        if issues.is_empty() {
            println!("solution consistent: energy {:.6}, distance {:.6}, feasible {}", sol.energy, sol.distance, sol.feasible);
            return Ok(());
        }
        for i in &issues {
            println!("mismatch: {i}");
        }
        return Err(Failure::Internal(anyhow!("{} discrepancies", issues.len())));
    }
    let mut r = ChaCha8Rng::seed_from_u64(a.seed);
    let opts = ModelOptions::with_cuts(a.cuts);
    let mut failures = 0;
    let mut routes = 0;
    for k in 0..a.count {
        let inst = ctx.adjust(random_small(&mut r, a.max_n));
        let arcs = match a.arcs {
            ArcArg::Reduced => reduce_arcs(&inst),
            ArcArg::Complete => complete_arcs(&inst),
        };
        let rep = oracle_report(&inst, &arcs, opts, 1 << 22).map_err(|e| anyhow!(e))?;
        routes += rep.candidate_routes;
        if !rep.agrees() {
            failures += 1;
            println!("instance {k}: {} mismatches, {} feasible routes outside the arc set", rep.mismatches.len(), rep.missing_arc_routes.len());
            println!("  {}", serde_json::to_string(&inst).map_err(anyhow::Error::from)?);
        }
    }
    println!("{} instances, {routes} candidate routes, {failures} disagreements", a.count);
    if failures > 0 {
        return Err(Failure::Internal(anyhow!("model and deck oracle disagree on {failures} instances")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rgv = match cli.rgv_config.as_deref().map(RgvOverride::load).transpose() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let ctx = Ctx { out_dir: cli.out_dir, rgv };
    let outcome = match &cli.command {
        Command::Gen(a) => gen(&ctx, a),
        Command::Solve(a) => solve(&ctx, a),
        Command::ExportLp(a) => export_lp(&ctx, a),
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Bench(a) => bench(&ctx, a),
        Command::Validate(a) => validate(&ctx, a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("failure: {e:#}");
            ExitCode::from(3)
        }
    }
}
