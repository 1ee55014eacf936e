//! Batch execution, metrics, significance tests, sweeps and export.

pub mod export;
pub mod stats;
pub mod suite;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mission::{run_mission, MissionConfig, MissionOutcome};
use crate::world::{generate_scenario, ScenarioSpec};

pub use stats::{rank_sum_test, summarize, CaseSummary, RunMetrics, Stat};

/// Conventional significance level for the rank-sum comparisons.
pub const SIGNIFICANCE: f64 = 0.05;

/// Runs one mission for `seed`. The seed drives both the placement of the
/// sheep inside the scenario's clusters and every stochastic choice of the
/// run. A scenario that cannot be generated is reported as a failed run.
pub fn run_seed(spec: &ScenarioSpec, config: &MissionConfig, seed: u64) -> MissionOutcome {
    let mut spec = spec.clone();
    spec.seed = seed;
    let params = spec.model_params();
    match generate_scenario(&spec) {
        Ok(world) => run_mission(world, &params, config, seed),
        Err(e) => MissionOutcome {
            method: config.method,
            seed,
            success: false,
            steps: 0,
            t_max: 0,
            per_dog_path_length: vec![0.0; config.n_dogs],
            events: Vec::new(),
            failure: Some(e.to_string()),
            n_sheep: spec.n_sheep(),
            env: spec.environment(),
            frames: Vec::new(),
        },
    }
}

/// `runs` missions with seeds `base_seed..base_seed + runs`, in parallel,
/// returned in seed order.
pub fn run_outcomes(spec: &ScenarioSpec, config: &MissionConfig, runs: u64, base_seed: u64) -> Vec<MissionOutcome> {
    let mut out: Vec<MissionOutcome> =
        (base_seed..base_seed + runs).into_par_iter().map(|seed| run_seed(spec, config, seed)).collect();
    out.sort_by_key(|o| o.seed);
    out
}

pub fn run_case(spec: &ScenarioSpec, config: &MissionConfig, runs: u64, base_seed: u64) -> Vec<RunMetrics> {
    run_outcomes(spec, config, runs, base_seed).iter().map(RunMetrics::from).collect()
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub summary: CaseSummary,
    /// Rank-sum p-value of this row's steps against the best row's, when
    /// both have successful runs and this row is not the best.
    pub p_vs_best: Option<f64>,
    pub best: bool,
}

/// Marks the best row (highest SR, then fewest mean steps) and tests every
/// other row's steps against it.
pub fn compare_rows(rows: Vec<(String, Vec<RunMetrics>)>) -> Vec<SummaryRow> {
    let summaries: Vec<CaseSummary> = rows.iter().map(|(_, m)| summarize(m)).collect();
    let best = (0..rows.len())
        .filter(|&i| summaries[i].steps.is_some())
        .min_by(|&a, &b| {
            let (sa, sb) = (&summaries[a], &summaries[b]);
            sb.sr.total_cmp(&sa.sr).then(sa.steps.unwrap().mean.total_cmp(&sb.steps.unwrap().mean))
        });
    let steps = |m: &[RunMetrics]| m.iter().filter(|r| r.success).map(|r| r.steps as f64).collect::<Vec<_>>();
    rows.iter()
        .zip(summaries)
        .enumerate()
        .map(|(i, ((label, m), summary))| {
            let p_vs_best = match best {
                Some(b) if b != i && summary.steps.is_some() => Some(rank_sum_test(&steps(m), &steps(&rows[b].1))),
                _ => None,
            };
            SummaryRow { label: label.clone(), summary, p_vs_best, best: best == Some(i) }
        })
        .collect()
}

fn stat_cells(s: Option<Stat>) -> [String; 2] {
    match s {
        Some(s) => [format!("{}", s.mean), format!("{}", s.std)],
        None => [String::new(), String::new()],
    }
}

/// CSV table: `label,runs,sr,steps_mean,steps_std,path_mean,path_std,
/// total_path_mean,total_path_std,p_vs_best,best`. Absent statistics are
/// empty cells.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "label",
        "runs",
        "sr",
        "steps_mean",
        "steps_std",
        "path_mean",
        "path_std",
        "total_path_mean",
        "total_path_std",
        "p_vs_best",
        "best",
    ];
    w.write_record(header).expect("in-memory csv write");
    for r in rows {
        let s = &r.summary;
        let mut rec = vec![r.label.clone(), s.runs.to_string(), s.sr.to_string()];
        rec.extend(stat_cells(s.steps));
        rec.extend(stat_cells(s.path));
        rec.extend(stat_cells(s.total_path));
        rec.push(r.p_vs_best.map(|p| p.to_string()).unwrap_or_default());
        rec.push(r.best.to_string());
        w.write_record(&rec).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8")
}

/// Human-readable table in the usual `SR | steps | path` layout; absent
/// statistics print as `----` and significant differences from the best row
/// carry a `*`.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut out = format!("{:<24} {:>5} {:>22} {:>22}\n", "", "SR", "No. of steps", "Path length");
    for r in rows {
        let s = &r.summary;
        let star = if r.p_vs_best.is_some_and(|p| p < SIGNIFICANCE) { "*" } else { "" };
        let cell = |x: Option<Stat>| x.map_or("----".to_string(), |s| format!("{s}{star}"));
        let mark = if r.best { " (best)" } else { "" };
        out.push_str(&format!(
            "{:<24} {:>5.2} {:>22} {:>22}{mark}\n",
            r.label,
            s.sr,
            cell(s.steps),
            cell(s.path)
        ));
    }
    out
}

/// Threat radii covered by the radius sweep.
pub const THREAT_RADII: [f64; 5] = [4.0, 5.0, 6.0, 7.0, 8.0];
/// Threat weights covered by the weight sweep.
pub const THREAT_WEIGHTS: [f64; 6] = [0.0, 20.0, 40.0, 60.0, 80.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    ThreatRadius,
    ThreatWeight,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::ThreatRadius => "r_th",
            SweepParam::ThreatWeight => "alpha2",
        }
    }

    pub fn default_values(self) -> &'static [f64] {
        match self {
            SweepParam::ThreatRadius => &THREAT_RADII,
            SweepParam::ThreatWeight => &THREAT_WEIGHTS,
        }
    }

    fn apply(self, base: &MissionConfig, value: f64) -> MissionConfig {
        let mut c = base.clone();
        match self {
            SweepParam::ThreatRadius => c.threat_radius = value,
            SweepParam::ThreatWeight => c.weights.threat = value,
        }
        c
    }
}

/// Runs `spec` once per parameter value on matched seeds and compares the
/// results against the best value.
pub fn sweep(
    spec: &ScenarioSpec,
    base: &MissionConfig,
    param: SweepParam,
    values: &[f64],
    runs: u64,
    base_seed: u64,
) -> Vec<SummaryRow> {
    let rows = values
        .iter()
        .map(|&v| (format!("{}={v}", param.name()), run_case(spec, &param.apply(base, v), runs, base_seed)))
        .collect();
    compare_rows(rows)
}
