use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use herdplan_core::bench::export::{export_run, ExportFormat};
use herdplan_core::bench::{self, suite, SweepParam};
use herdplan_core::geometry::Vec2;
use herdplan_core::grid::rasterize;
use herdplan_core::mission::{Method, MissionConfig};
use herdplan_core::planner::{mark_threat, plan_path, CostWeights, ThreatField};
use herdplan_core::rng::{self, Stream};
use herdplan_core::tsp::{mmas_solve, InstanceFile, MmasParams};
use herdplan_core::world::generate_scenario;

#[derive(Parser)]
#[command(name = "herdplan", version, about = "Planning-assisted swarm shepherding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Reactive,
    Taskplan,
    Full,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Reactive => Method::Reactive,
            MethodArg::Taskplan => Method::TaskPlan,
            MethodArg::Full => Method::Full,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
    Svg,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ExportFormat::Csv,
            FormatArg::Jsonl => ExportFormat::Jsonl,
            FormatArg::Svg => ExportFormat::Svg,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    /// Threat radius over 4..=8.
    RTh,
    /// Threat weight over 0, 20, ..., 100.
    Alpha2,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case repeatedly and summarise.
    Run {
        /// Case number (1-20) or scenario file.
        #[arg(long)]
        case: String,
        #[arg(long, value_enum, default_value = "full")]
        method: MethodArg,
        #[arg(long, default_value_t = 1)]
        dogs: usize,
        #[arg(long, default_value_t = 20)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for runs.csv and summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every method on every case of a group.
    Suite {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        group: u8,
        #[arg(long, default_value_t = 1)]
        dogs: usize,
        #[arg(long, default_value_t = 20)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a sequencing instance with the ant system.
    SolveTsp {
        /// Instance file (TOML with `cities`, optional `cost` and `n_dogs`).
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        iterations: Option<usize>,
        /// Write the best-so-far cost per iteration here as CSV.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Plan a dog path in a scenario.
    PlanPath {
        /// Case number (1-20) or scenario file.
        #[arg(long)]
        case: String,
        #[arg(long, value_parser = parse_point)]
        start: Vec2,
        #[arg(long, value_parser = parse_point)]
        goal: Vec2,
        #[arg(long, default_value_t = 1.0)]
        alpha1: f64,
        #[arg(long, default_value_t = 100.0)]
        alpha2: f64,
        #[arg(long, default_value_t = 4.0)]
        threat_radius: f64,
        /// Place the scenario's sheep with this seed and treat them as threats.
        #[arg(long)]
        sheep_seed: Option<u64>,
        /// Waypoint CSV destination; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one mission and write its trajectory.
    Export {
        #[arg(long)]
        case: String,
        #[arg(long, value_enum, default_value = "full")]
        method: MethodArg,
        #[arg(long, default_value_t = 1)]
        dogs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the threat radius or threat weight on one case.
    Sweep {
        #[arg(long)]
        case: String,
        #[arg(long, value_enum)]
        param: SweepArg,
        #[arg(long, default_value_t = 1)]
        dogs: usize,
        #[arg(long, default_value_t = 20)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| e.to_string());
    Ok(Vec2::new(p(x)?, p(y)?))
}

fn config(method: MethodArg, dogs: usize) -> Result<MissionConfig> {
    let c = MissionConfig { method: method.into(), n_dogs: dogs, ..Default::default() };
    c.validate()?;
    Ok(c)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn runs_csv(metrics: &[bench::RunMetrics]) -> String {
    let mut s = String::from("seed,success,steps,max_path_length,total_path_length\n");
    for m in metrics {
        s.push_str(&format!("{},{},{},{},{}\n", m.seed, m.success, m.steps, m.max_path_length, m.total_path_length));
    }
    s
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { case, method, dogs, runs, seed, out } => {
            let spec = suite::resolve(&case)?;
            let metrics = bench::run_case(&spec, &config(method, dogs)?, runs, seed);
            let label = format!("{} {} x{dogs}", spec.name.as_deref().unwrap_or(&case), Method::from(method));
            let rows = bench::compare_rows(vec![(label, metrics.clone())]);
            print!("{}", bench::summary_table(&rows));
            if let Some(dir) = out {
                write_file(&dir.join("runs.csv"), &runs_csv(&metrics))?;
                write_file(&dir.join("summary.csv"), &bench::summary_csv(&rows))?;
            }
        }
        Command::Suite { group, dogs, runs, seed, out } => {
            for n in suite::group(group)? {
                let spec = suite::case(n)?;
                let mut rows = Vec::new();
                for m in [MethodArg::Reactive, MethodArg::Taskplan, MethodArg::Full] {
                    let label = format!("case{n:02} {}", Method::from(m));
                    rows.push((label, bench::run_case(&spec, &config(m, dogs)?, runs, seed)));
                }
                let rows = bench::compare_rows(rows);
                print!("{}", bench::summary_table(&rows));
                if let Some(dir) = &out {
                    write_file(&dir.join(format!("case{n:02}.csv")), &bench::summary_csv(&rows))?;
                }
            }
        }
        Command::SolveTsp { instance, seed, iterations, curve } => {
            let inst = InstanceFile::read(&instance)?.to_instance()?;
            let mut params = MmasParams::default();
            if let Some(it) = iterations {
                params.iterations = it;
            }
            let outcome = mmas_solve(&inst, &params, &mut rng::stream(seed, Stream::Sequencing))?;
            let order: Vec<String> = outcome.best.order.iter().map(|c| c.to_string()).collect();
            println!("tour: {}", order.join(" "));
            println!("cost: {}", outcome.best.cost);
            if let Some(path) = curve {
                let mut s = String::from("iteration,best_cost\n");
                for (i, c) in outcome.history.iter().enumerate() {
                    s.push_str(&format!("{},{c}\n", i + 1));
                }
                write_file(&path, &s)?;
            }
        }
        Command::PlanPath { case, start, goal, alpha1, alpha2, threat_radius, sheep_seed, out } => {
            let mut spec = suite::resolve(&case)?;
            let env = spec.environment();
            let weights = CostWeights::new(alpha1, alpha2)?;
            let mut grid = rasterize(&env, 1.0)?;
            let mut field = None;
            if let Some(s) = sheep_seed {
                spec.seed = s;
                let sheep = generate_scenario(&spec)?.sheep_positions();
                grid = mark_threat(&grid, &sheep, &[], threat_radius);
                field = Some(ThreatField::from_sheep(&sheep, &[], threat_radius));
            }
            let path = plan_path(&grid, &env.obstacles, start, goal, &weights, field.as_ref())?;
            let mut s = String::from("x,y\n");
            for w in &path.waypoints {
                s.push_str(&format!("{},{}\n", w.x, w.y));
            }
            match out {
                Some(p) => write_file(&p, &s)?,
                None => print!("{s}"),
            }
            eprintln!(
                "waypoints: {}  length: {:.3}  threatened segments: {}  search cost: {:.3}",
                path.waypoints.len(),
                path.length_cost,
                path.threat_cost.unwrap_or(0),
                path.search_cost
            );
        }
        Command::Export { case, method, dogs, seed, format, out } => {
            let spec = suite::resolve(&case)?;
            let cfg = MissionConfig { record: true, ..config(method, dogs)? };
            let outcome = bench::run_seed(&spec, &cfg, seed);
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            export_run(&outcome, format.into(), &out)?;
            eprintln!("success: {}  steps: {}", outcome.success, outcome.steps);
        }
        Command::Sweep { case, param, dogs, runs, seed, out } => {
            let spec = suite::resolve(&case)?;
            let param = match param {
                SweepArg::RTh => SweepParam::ThreatRadius,
                SweepArg::Alpha2 => SweepParam::ThreatWeight,
            };
            let rows = bench::sweep(&spec, &config(MethodArg::Full, dogs)?, param, param.default_values(), runs, seed);
            print!("{}", bench::summary_table(&rows));
            if let Some(dir) = out {
                write_file(&dir.join(format!("sweep_{}.csv", param.name())), &bench::summary_csv(&rows))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
