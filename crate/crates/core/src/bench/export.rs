//! Trajectory export.
//!
//! CSV and JSON-lines carry one row per agent per step, for steps
//! `1..=steps`, with columns `t, agent_kind, agent_id, x, y, mode,
//! subtask_q`. Sheep rows leave `mode` and `subtask_q` empty, as do dog rows
//! of the reactive method. Coordinates are written in shortest round-trip
//! form, so parsing a file back reproduces the trajectories bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mission::{Frame, MissionOutcome};

pub const CSV_HEADER: [&str; 7] = ["t", "agent_kind", "agent_id", "x", "y", "mode", "subtask_q"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Sheep,
    Dog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: u64,
    pub agent_kind: AgentKind,
    pub agent_id: usize,
    pub x: f64,
    pub y: f64,
    pub mode: Option<String>,
    pub subtask_q: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Jsonl,
    Svg,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "jsonl" => Ok(ExportFormat::Jsonl),
            "svg" => Ok(ExportFormat::Svg),
            _ => Err(Error::InvalidParameter(format!("unknown export format {s:?}"))),
        }
    }
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Jsonl => "jsonl",
            ExportFormat::Svg => "svg",
        }
    }
}

fn frame_rows(f: &Frame) -> impl Iterator<Item = TrajectoryRow> + '_ {
    let sheep = f.sheep.iter().enumerate().map(move |(i, p)| TrajectoryRow {
        t: f.t,
        agent_kind: AgentKind::Sheep,
        agent_id: i,
        x: p.x,
        y: p.y,
        mode: None,
        subtask_q: None,
    });
    let dogs = f.dogs.iter().enumerate().map(move |(i, p)| TrajectoryRow {
        t: f.t,
        agent_kind: AgentKind::Dog,
        agent_id: i,
        x: p.x,
        y: p.y,
        mode: f.modes[i].map(|m| m.name().to_string()),
        subtask_q: f.q[i],
    });
    sheep.chain(dogs)
}

/// Rows for every recorded step after the initial state.
pub fn trajectory_rows(outcome: &MissionOutcome) -> Vec<TrajectoryRow> {
    outcome.frames.iter().filter(|f| f.t >= 1).flat_map(frame_rows).collect()
}

pub fn to_csv(outcome: &MissionOutcome) -> String {
    // writing plain rows into memory cannot fail
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory csv write");
    for r in trajectory_rows(outcome) {
        w.serialize(&r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

pub fn parse_csv(text: &str) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .collect::<std::result::Result<Vec<TrajectoryRow>, _>>()
        .map_err(|e| Error::parse("<csv>", e))
}

pub fn to_jsonl(outcome: &MissionOutcome) -> String {
    let mut out = String::new();
    for r in trajectory_rows(outcome) {
        out.push_str(&serde_json::to_string(&r).expect("rows always serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<TrajectoryRow>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::parse("<jsonl>", e)))
        .collect()
}

/// Static plot: obstacles, goal disc, faint sheep tracks and bold dog tracks.
pub fn to_svg(outcome: &MissionOutcome) -> String {
    let env = &outcome.env;
    let scale = 800.0 / env.width.max(env.height);
    let (w, h) = (env.width * scale, env.height * scale);
    // y grows upwards in the world, downwards in SVG
    let px = |p: Vec2| (p.x * scale, (env.height - p.y) * scale);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#);
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="#ffffff" stroke="#000000"/>"##);
    for o in &env.obstacles {
        let (x0, y0) = px(Vec2::new(o.xmin, o.ymax));
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#555555"/>"##,
            (o.xmax - o.xmin) * scale,
            (o.ymax - o.ymin) * scale
        );
    }
    let (gx, gy) = px(env.goal);
    let _ = writeln!(
        s,
        r##"<circle cx="{gx:.2}" cy="{gy:.2}" r="{:.2}" fill="#9be29b" fill-opacity="0.5" stroke="#2e8b2e"/>"##,
        env.goal_radius * scale
    );

    let polyline = |s: &mut String, pts: &mut dyn Iterator<Item = Vec2>, style: &str| {
        let coords: Vec<String> = pts.map(&px).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
    };
    let frames = &outcome.frames;
    if let Some(first) = frames.first() {
        for i in 0..first.sheep.len() {
            polyline(&mut s, &mut frames.iter().map(|f| f.sheep[i]), r##"stroke="#4a7bd0" stroke-width="0.8" stroke-opacity="0.6""##);
        }
        const DOG_COLOURS: [&str; 2] = ["#d0352b", "#e08a00"];
        for d in 0..first.dogs.len() {
            let style = format!(r#"stroke="{}" stroke-width="2""#, DOG_COLOURS[d % 2]);
            polyline(&mut s, &mut frames.iter().map(|f| f.dogs[d]), &style);
        }
        let last = frames.last().expect("non-empty");
        for p in &last.sheep {
            let (x, y) = px(*p);
            let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="#1f3f7a"/>"##);
        }
        for (d, p) in last.dogs.iter().enumerate() {
            let (x, y) = px(*p);
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{}"/>"#, DOG_COLOURS[d % 2]);
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn render(outcome: &MissionOutcome, format: ExportFormat) -> Result<String> {
    match format {
        ExportFormat::Csv => Ok(to_csv(outcome)),
        ExportFormat::Jsonl => Ok(to_jsonl(outcome)),
        ExportFormat::Svg => Ok(to_svg(outcome)),
    }
}

pub fn export_run(outcome: &MissionOutcome, format: ExportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render(outcome, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
