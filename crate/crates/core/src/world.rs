//! Environment, agent state and seeded scenario generation.
//!
//! Scenario files are TOML documents:
//!
//! ```toml
//! width = 100.0
//! height = 100.0
//! seed = 3
//!
//! [goal]
//! x = 90.0
//! y = 90.0
//! radius = 6.0      # optional, defaults to R_pp * sqrt(2N)
//!
//! [[obstacles]]
//! xmin = 40.0
//! ymin = 0.0
//! xmax = 45.0
//! ymax = 60.0
//!
//! [[clusters]]
//! cx = 20.0
//! cy = 30.0
//! r = 5.0
//! count = 10
//!
//! [[dogs]]
//! x = 5.0
//! y = 5.0
//! ```
//!
//! Positions are clamped to the world bounds after every integration step,
//! so the bounds behave like walls.

use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flock::ModelParams;
use crate::geometry::{Obstacle, Vec2};
use crate::rng::{self, Stream};

/// Rejection-sampling budget per sheep.
pub const PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Obstacle>,
    pub goal: Vec2,
    pub goal_radius: f64,
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.width > 0.0 && self.height > 0.0 && self.width.is_finite() && self.height.is_finite()) {
            return bad(format!("bad extent {}x{}", self.width, self.height));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.is_well_formed() {
                return bad(format!("obstacle {i} has min corner above max corner"));
            }
            if o.xmin < 0.0 || o.ymin < 0.0 || o.xmax > self.width || o.ymax > self.height {
                return bad(format!("obstacle {i} extends outside the environment"));
            }
        }
        if !self.in_bounds(self.goal) {
            return bad("goal outside environment".into());
        }
        if self.obstacles.iter().any(|o| o.contains(self.goal)) {
            return bad("goal inside an obstacle".into());
        }
        if !(self.goal_radius > 0.0 && self.goal_radius.is_finite()) {
            return bad(format!("goal radius must be positive, got {}", self.goal_radius));
        }
        Ok(())
    }

    pub fn in_bounds(&self, p: Vec2) -> bool {
        p.is_finite() && p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width && p.y <= self.height
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }

    /// Inside bounds and outside every (closed) obstacle.
    pub fn is_free(&self, p: Vec2) -> bool {
        self.in_bounds(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn has_obstacles(&self) -> bool {
        !self.obstacles.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheepState {
    pub pos: Vec2,
    /// Total force of the previous step (inertia term).
    pub prev_force: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DogState {
    pub pos: Vec2,
    pub speed: f64,
    pub path_length_accum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub env: Arc<Environment>,
    pub sheep: Vec<SheepState>,
    pub dogs: Vec<DogState>,
    /// Simulation clock in steps.
    pub t: u64,
}

impl WorldState {
    pub fn sheep_positions(&self) -> Vec<Vec2> {
        self.sheep.iter().map(|s| s.pos).collect()
    }

    pub fn all_sheep_in_goal(&self) -> bool {
        let env = &self.env;
        self.sheep.iter().all(|s| s.pos.dist(env.goal) <= env.goal_radius)
    }

    /// Copy keeping only the first `n` dogs.
    pub fn with_dogs(mut self, n: usize) -> Self {
        self.dogs.truncate(n);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub count: usize,
}

impl ClusterSpec {
    pub fn centre(&self) -> Vec2 {
        Vec2::new(self.cx, self.cy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DogStart {
    pub x: f64,
    pub y: f64,
}

/// Declarative scenario, the in-memory form of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub width: f64,
    pub height: f64,
    pub seed: u64,
    pub goal: GoalSpec,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub clusters: Vec<ClusterSpec>,
    pub dogs: Vec<DogStart>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
}

impl ScenarioSpec {
    pub fn n_sheep(&self) -> usize {
        self.clusters.iter().map(|c| c.count).sum()
    }

    pub fn model_params(&self) -> ModelParams {
        self.params.unwrap_or_default()
    }

    pub fn dog_starts(&self) -> Vec<Vec2> {
        self.dogs.iter().map(|d| Vec2::new(d.x, d.y)).collect()
    }

    /// Environment with the goal radius resolved (default: neighbourhood
    /// range of the whole flock).
    pub fn environment(&self) -> Environment {
        let params = self.model_params();
        Environment {
            width: self.width,
            height: self.height,
            obstacles: self.obstacles.clone(),
            goal: Vec2::new(self.goal.x, self.goal.y),
            goal_radius: self
                .goal
                .radius
                .unwrap_or_else(|| params.neighbourhood_range(self.n_sheep().max(1))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let env = self.environment();
        env.validate()?;
        if self.seed > i64::MAX as u64 {
            return Err(Error::InvalidScenario("seed must fit in a signed 64-bit integer".into()));
        }
        if self.dogs.is_empty() {
            return Err(Error::InvalidScenario("at least one dog start is required".into()));
        }
        for (i, d) in self.dog_starts().into_iter().enumerate() {
            if !env.in_bounds(d) {
                return Err(Error::InvalidScenario(format!("dog {i} starts outside the environment")));
            }
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if !(c.r >= 0.0 && c.r.is_finite()) || !env.in_bounds(c.centre()) {
                return Err(Error::InvalidScenario(format!("cluster {i} has a bad centre or radius")));
            }
        }
        self.model_params().validate()
    }

    pub fn from_toml_str(s: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario specs always serialize")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec = Self::from_toml_str(&text).map_err(|e| Error::parse(path, e))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }
}

/// Places the flock and dogs. Same spec (including seed) gives the same world.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<WorldState> {
    spec.validate()?;
    let env = spec.environment();
    let params = spec.model_params();
    let mut rng = rng::stream(spec.seed, Stream::Scenario);

    let mut sheep = Vec::with_capacity(spec.n_sheep());
    for (ci, cluster) in spec.clusters.iter().enumerate() {
        for _ in 0..cluster.count {
            let pos = sample_in_disc(&env, cluster, &mut rng)
                .ok_or(Error::InfeasibleCluster { cluster: ci, attempts: PLACEMENT_ATTEMPTS })?;
            sheep.push(SheepState { pos, prev_force: Vec2::ZERO });
        }
    }
    let dogs = spec
        .dog_starts()
        .into_iter()
        .map(|pos| DogState { pos, speed: params.dog_speed, path_length_accum: 0.0 })
        .collect();
    Ok(WorldState { env: Arc::new(env), sheep, dogs, t: 0 })
}

fn sample_in_disc<R: Rng + ?Sized>(env: &Environment, c: &ClusterSpec, rng: &mut R) -> Option<Vec2> {
    (0..PLACEMENT_ATTEMPTS).find_map(|_| {
        let rho = c.r * rng.random::<f64>().sqrt();
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let p = c.centre() + Vec2::from_angle(theta) * rho;
        env.is_free(p).then_some(p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn spec() -> ScenarioSpec {
        ScenarioSpec {
            name: None,
            width: 50.0,
            height: 50.0,
            seed: 11,
            goal: GoalSpec { x: 45.0, y: 45.0, radius: None },
            obstacles: vec![Obstacle::new(20.0, 20.0, 25.0, 30.0)],
            clusters: vec![
                ClusterSpec { cx: 10.0, cy: 10.0, r: 4.0, count: 7 },
                ClusterSpec { cx: 22.0, cy: 25.0, r: 6.0, count: 5 },
            ],
            dogs: vec![DogStart { x: 1.0, y: 49.0 }],
            params: None,
        }
    }

    #[test]
    fn degenerate_disc_places_all_at_centre() {
        let mut s = spec();
        s.obstacles.clear();
        s.clusters = vec![ClusterSpec { cx: 10.0, cy: 10.0, r: 0.0, count: 3 }];
        let w = generate_scenario(&s).unwrap();
        assert_eq!(w.sheep.len(), 3);
        assert!(w.sheep.iter().all(|sh| sh.pos == Vec2::new(10.0, 10.0)));
    }

    #[test]
    fn same_seed_same_world() {
        let a = generate_scenario(&spec()).unwrap();
        let b = generate_scenario(&spec()).unwrap();
        assert_eq!(a, b);
        let mut other = spec();
        other.seed = 12;
        assert_ne!(a.sheep, generate_scenario(&other).unwrap().sheep);
    }

    #[test]
    fn sheep_avoid_obstacles_and_stay_in_bounds() {
        let w = generate_scenario(&spec()).unwrap();
        assert_eq!(w.sheep.len(), 12);
        assert!(w.sheep.iter().all(|s| w.env.is_free(s.pos)));
    }

    #[test]
    fn cluster_inside_obstacle_is_infeasible() {
        let mut s = spec();
        s.clusters = vec![ClusterSpec { cx: 22.0, cy: 25.0, r: 1.0, count: 1 }];
        match generate_scenario(&s) {
            Err(Error::InfeasibleCluster { cluster: 0, attempts }) => assert_eq!(attempts, PLACEMENT_ATTEMPTS),
            other => panic!("expected infeasible cluster, got {other:?}"),
        }
    }

    #[test]
    fn default_goal_radius_is_neighbourhood_range() {
        let env = spec().environment();
        assert!((env.goal_radius - 0.4 * (24.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_goal_in_obstacle() {
        let mut s = spec();
        s.goal = GoalSpec { x: 22.0, y: 22.0, radius: Some(2.0) };
        assert!(s.validate().is_err());
        let mut s = spec();
        s.obstacles.push(Obstacle::new(45.0, 0.0, 55.0, 5.0));
        assert!(s.validate().is_err());
    }

    #[test]
    fn toml_round_trip_is_identity() {
        let mut s = spec();
        s.name = Some("demo".into());
        s.goal.radius = Some(0.1 + 0.2);
        s.clusters[0].cx = std::f64::consts::PI;
        s.params = Some(ModelParams::default());
        let text = s.to_toml_string();
        let back = ScenarioSpec::from_toml_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_toml_string(), text);
    }
}
