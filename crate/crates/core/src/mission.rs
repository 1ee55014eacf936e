//! The planning-assisted shepherding loop.
//!
//! Offline, the flock is split into sub-swarms and their visiting order is
//! solved as a travelling salesperson problem. Online, each dog works through
//! its route one sub-task at a time: drive the current (merged) sub-swarm
//! towards the next one, absorb it once the two touch, and on the last
//! sub-task drive everything into the goal.
//!
//! Each dog is in one of two modes. In [`Mode::NoInteraction`] it repositions
//! to the driving point along a path that avoids the threat discs around
//! sheep. On arrival it switches to [`Mode::Interaction`] and herds the
//! sub-swarm along its planned sub-swarm path. A merge sends it back to
//! repositioning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flock::{herding_target, reactive_step, step_agents, DogCommand, ModelParams};
use crate::geometry::{segment_collides, Vec2};
use crate::grid::{rasterize, GridMap};
use crate::grouping::{compute_lcm, group_sheep, min_separation, SubSwarm};
use crate::planner::{exempt_threat, mark_threat, plan_path, CostWeights, ThreatField};
use crate::rng::{self, SimRng, Stream};
use crate::tsp::{build_bi_instance, build_single_instance, euclidean, mmas_solve, split_bi_tour, MmasParams, Tour};
use crate::world::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Drive/collect on the whole flock, no planning.
    Reactive,
    /// Grouping and sequencing, straight-line motion.
    TaskPlan,
    /// Grouping, sequencing and path planning.
    Full,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Reactive, Method::TaskPlan, Method::Full];

    pub fn name(self) -> &'static str {
        match self {
            Method::Reactive => "reactive",
            Method::TaskPlan => "taskplan",
            Method::Full => "full",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reactive" | "1" => Ok(Method::Reactive),
            "taskplan" | "2" => Ok(Method::TaskPlan),
            "full" | "3" => Ok(Method::Full),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NoInteraction,
    Interaction,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::NoInteraction => "no_interaction",
            Mode::Interaction => "interaction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionConfig {
    pub method: Method,
    pub n_dogs: usize,
    /// Radius of the threat disc around each sheep.
    pub threat_radius: f64,
    /// Path cost weights used while repositioning.
    pub weights: CostWeights,
    /// Sub-swarm paths are refreshed every this many steps while herding.
    pub replan_period: u64,
    /// Distance at which a dog counts as arrived at the driving point;
    /// `None` means one dog step.
    pub arrival_tolerance: Option<f64>,
    /// Overrides the environment's goal radius.
    pub goal_radius: Option<f64>,
    /// Step budget; `None` means `300 + 20 N`.
    pub max_steps: Option<u64>,
    pub cell_size: f64,
    pub mmas: MmasParams,
    /// Keep a full trajectory record.
    pub record: bool,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            method: Method::Full,
            n_dogs: 1,
            threat_radius: 4.0,
            weights: CostWeights::default(),
            replan_period: 10,
            arrival_tolerance: None,
            goal_radius: None,
            max_steps: None,
            cell_size: 1.0,
            mmas: MmasParams::default(),
            record: false,
        }
    }
}

impl MissionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_dogs == 1 || self.n_dogs == 2) {
            return Err(Error::InvalidParameter(format!("n_dogs must be 1 or 2, got {}", self.n_dogs)));
        }
        if !(self.threat_radius >= 0.0 && self.threat_radius.is_finite()) {
            return Err(Error::InvalidParameter("threat_radius must be non-negative".into()));
        }
        CostWeights::new(self.weights.length, self.weights.threat)?;
        if self.replan_period == 0 {
            return Err(Error::InvalidParameter("replan_period must be positive".into()));
        }
        if let Some(r) = self.goal_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter("goal_radius must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Default step budget for `n` sheep.
pub fn step_budget(n: usize) -> u64 {
    300 + 20 * n as u64
}

/// Something that happened to one dog's task state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum MissionEvent {
    ModeChange { t: u64, dog: usize, from: Mode, to: Mode },
    /// The dog's sub-task index rose to `q` after a merge.
    Subtask { t: u64, dog: usize, q: usize },
    /// Both dogs were on their last sub-task with touching swarms; `to`
    /// took over the sheep of `from`, which stands off from then on.
    Handover { t: u64, from: usize, to: usize },
}

/// Checks a log against the mode automaton: repositioning may end in herding
/// at any time, herding may only go back to repositioning together with a
/// sub-task advance, and sub-task indices only grow.
pub fn validate_events(events: &[MissionEvent], n_dogs: usize) -> std::result::Result<(), String> {
    let mut mode = vec![Mode::NoInteraction; n_dogs];
    let mut q = vec![1usize; n_dogs];
    let mut advanced_at: Vec<Option<u64>> = vec![None; n_dogs];
    for e in events {
        match *e {
            MissionEvent::Subtask { t, dog, q: nq } => {
                if nq <= q[dog] {
                    return Err(format!("dog {dog}: sub-task went from {} to {nq} at t={t}", q[dog]));
                }
                q[dog] = nq;
                advanced_at[dog] = Some(t);
            }
            MissionEvent::Handover { .. } => {}
            MissionEvent::ModeChange { t, dog, from, to } => {
                if from != mode[dog] {
                    return Err(format!("dog {dog}: change from {from:?} while in {:?} at t={t}", mode[dog]));
                }
                match (from, to) {
                    (Mode::NoInteraction, Mode::Interaction) => {}
                    (Mode::Interaction, Mode::NoInteraction) if advanced_at[dog] == Some(t) => {}
                    _ => return Err(format!("dog {dog}: illegal change {from:?} -> {to:?} at t={t}")),
                }
                mode[dog] = to;
            }
        }
    }
    Ok(())
}

/// Per-dog progress through its route.
#[derive(Debug, Clone, PartialEq)]
pub struct DogTask {
    /// Indices into [`MissionState::groups`], in visiting order.
    pub route: Vec<usize>,
    /// 1-based current sub-task; sub-task `q < route.len()` drives the
    /// merged swarm towards `route[q]`, the last one drives it to the goal.
    pub q: usize,
    pub mode: Mode,
    /// Sheep currently driven by this dog.
    pub members: Vec<usize>,
    /// Cached sub-swarm path, first waypoint at the swarm centre.
    pub swarm_path: Vec<Vec2>,
    /// Index of the waypoint the swarm is heading for.
    pub cursor: usize,
    pub subgoal: Vec2,
    /// Set while every member sits inside the goal on the last sub-task.
    pub parked: bool,
}

impl DogTask {
    fn new(route: Vec<usize>, groups: &[SubSwarm]) -> Self {
        let members = route.first().map(|&g| groups[g].members.clone()).unwrap_or_default();
        Self {
            route,
            q: 1,
            mode: Mode::NoInteraction,
            members,
            swarm_path: Vec::new(),
            cursor: 0,
            subgoal: Vec2::ZERO,
            parked: false,
        }
    }

    pub fn is_last_subtask(&self) -> bool {
        self.q >= self.route.len()
    }

    /// Group the current swarm is being driven towards, if any.
    pub fn next_group(&self) -> Option<usize> {
        self.route.get(self.q).copied()
    }
}

#[derive(Debug, Clone)]
pub struct MissionState {
    pub world: WorldState,
    pub method: Method,
    /// Sub-swarms found at planning time.
    pub groups: Vec<SubSwarm>,
    /// Sequencing solution over the city list.
    pub tour: Tour,
    pub tasks: Vec<DogTask>,
    pub t_max: u64,
    pub events: Vec<MissionEvent>,
    grid: GridMap,
}

impl MissionState {
    pub fn t(&self) -> u64 {
        self.world.t
    }

    pub fn grid(&self) -> &GridMap {
        &self.grid
    }

    pub fn is_complete(&self) -> bool {
        self.world.all_sheep_in_goal()
    }
}

/// Point `R_n + R_s` behind a sub-swarm of `n_members` sheep centred at
/// `lcm`, on the side away from `subgoal`.
pub fn subswarm_driving_point(lcm: Vec2, subgoal: Vec2, n_members: usize, params: &ModelParams) -> Result<Vec2> {
    let ahead = lcm.unit_towards(subgoal).ok_or(Error::CoincidentSubgoal)?;
    let r_n = params.neighbourhood_range(n_members);
    Ok(lcm - ahead * (r_n + params.safe_distance))
}

/// Whether two sub-swarms touch: closest members at most `cohesion_range` apart.
pub fn check_merge(a: &[usize], b: &[usize], positions: &[Vec2], cohesion_range: f64) -> bool {
    min_separation(a, b, positions) <= cohesion_range
}

/// `p` itself if its grid cell is free, else the centre of the nearest free cell.
fn free_point(grid: &GridMap, p: Vec2) -> Vec2 {
    let c = grid.cell_of(p);
    if !grid.is_blocked(c) {
        return p;
    }
    grid.nearest_free_cell(p).map_or(p, |c| grid.centre(c))
}

/// Waypoints from `from` to `to`: straight when the segment is clear of
/// obstacles (and of threat discs if they are weighted), else planned.
fn route_between(
    grid: &GridMap,
    world: &WorldState,
    from: Vec2,
    to: Vec2,
    weights: &CostWeights,
    threats: Option<&ThreatField>,
) -> Result<Vec<Vec2>> {
    let obstacles = &world.env.obstacles;
    let threat_free = match threats {
        Some(f) if weights.threat > 0.0 => !f.segment_threatened(from, to),
        _ => true,
    };
    if threat_free && !segment_collides(from, to, obstacles, 0.0) {
        return Ok(vec![from, to]);
    }
    let start = free_point(grid, from);
    let goal = free_point(grid, to);
    let mut wp = plan_path(grid, obstacles, start, goal, weights, threats)?.waypoints;
    if start != from {
        wp.insert(0, from);
    }
    Ok(wp)
}

/// Groups the flock, sequences the sub-swarms and sets up each dog's route.
pub fn plan_mission(
    world: WorldState,
    params: &ModelParams,
    config: &MissionConfig,
    rng: &mut SimRng,
) -> Result<MissionState> {
    config.validate()?;
    if world.sheep.is_empty() {
        return Err(Error::InvalidScenario("no sheep to herd".into()));
    }
    if world.dogs.len() < config.n_dogs {
        return Err(Error::InvalidScenario(format!(
            "{} dog(s) requested but the scenario places {}",
            config.n_dogs,
            world.dogs.len()
        )));
    }
    let mut world = world.with_dogs(config.n_dogs);
    if let Some(r) = config.goal_radius {
        let mut env = (*world.env).clone();
        env.goal_radius = r;
        world.env = env.into();
    }
    let grid = rasterize(&world.env, config.cell_size)?;
    let positions = world.sheep_positions();
    let groups = group_sheep(&positions, params.cohesion_range);
    let lcms: Vec<Vec2> = groups.iter().map(|g| g.lcm).collect();
    let goal = world.env.goal;

    let obstacles = world.env.obstacles.clone();
    let path_cost = |a: Vec2, b: Vec2| -> Option<f64> {
        if obstacles.is_empty() {
            return euclidean(a, b);
        }
        let (a, b) = (free_point(&grid, a), free_point(&grid, b));
        plan_path(&grid, &obstacles, a, b, &CostWeights::LENGTH_ONLY, None).ok().map(|p| p.length_cost)
    };

    let (tour, routes) = if config.n_dogs == 1 {
        let inst = build_single_instance(world.dogs[0].pos, &lcms, goal, path_cost)?;
        let tour = mmas_solve(&inst, &config.mmas, rng)?.best;
        let route = tour.order[1..tour.order.len() - 1].iter().map(|&c| c - 1).collect();
        (tour, vec![route])
    } else {
        let inst = build_bi_instance(world.dogs[0].pos, world.dogs[1].pos, &lcms, goal, path_cost)?;
        let tour = mmas_solve(&inst, &config.mmas, rng)?.best;
        let (first, second) = split_bi_tour(&tour.order, inst.q);
        let interior = |r: &[usize]| r[1..r.len() - 1].iter().map(|&c| c - 1).collect::<Vec<_>>();
        let routes = vec![interior(&first), interior(&second)];
        (tour, routes)
    };

    let tasks = routes.into_iter().map(|r| DogTask::new(r, &groups)).collect();
    let t_max = config.max_steps.unwrap_or_else(|| step_budget(world.sheep.len()));
    Ok(MissionState { world, method: config.method, groups, tour, tasks, t_max, events: Vec::new(), grid })
}

/// Where a dog with nothing to herd waits: straight out from the goal,
/// far enough that sheep inside the goal do not feel it. `None` if it is
/// already that far out.
fn standoff_point(world: &WorldState, grid: &GridMap, dog_pos: Vec2, params: &ModelParams) -> Option<Vec2> {
    let env = &world.env;
    let reach = params.dog_influence_range + env.goal_radius + 1.0;
    if dog_pos.dist(env.goal) >= reach {
        return None;
    }
    let away = env.goal.unit_towards(dog_pos).unwrap_or(Vec2::new(1.0, 0.0));
    Some(free_point(grid, env.clamp(env.goal + away * reach)))
}

/// The sub-swarm's current destination: the next group's centre, or the goal.
fn task_target(task: &DogTask, state: &MissionState, positions: &[Vec2]) -> Vec2 {
    match task.next_group() {
        Some(g) => compute_lcm(&state.groups[g].members, positions),
        None => state.world.env.goal,
    }
}

/// Updates the dog's sub-goal.
///
/// While repositioning, and on every `replan_period`-th step, the sub-swarm
/// path to the current target is replanned and the sub-goal becomes its
/// first waypoint after the start. Otherwise the sub-goal advances along the
/// cached path past every waypoint the sub-swarm centre has come within
/// `R_n` of.
pub fn select_subgoal(
    state: &mut MissionState,
    dog: usize,
    params: &ModelParams,
    config: &MissionConfig,
) -> Result<Vec2> {
    let positions = state.world.sheep_positions();
    let task = &state.tasks[dog];
    let lcm = compute_lcm(&task.members, &positions);
    let target = task_target(task, state, &positions);
    let t = state.world.t + 1;
    let replan = task.mode == Mode::NoInteraction || t % config.replan_period == 1 % config.replan_period;

    let task = &mut state.tasks[dog];
    if replan || task.swarm_path.is_empty() {
        task.swarm_path = match state.method {
            Method::Full => {
                route_between(&state.grid, &state.world, lcm, target, &CostWeights::LENGTH_ONLY, None)?
            }
            _ => vec![lcm, target],
        };
        task.cursor = 1.min(task.swarm_path.len() - 1);
    } else {
        let r_n = params.neighbourhood_range(task.members.len());
        let last = task.swarm_path.len() - 1;
        while task.cursor < last && lcm.dist(task.swarm_path[task.cursor]) <= r_n {
            task.cursor += 1;
        }
        // the final waypoint tracks the (moving) target
        task.swarm_path[last] = target;
    }
    task.subgoal = task.swarm_path[task.cursor];
    Ok(task.subgoal)
}

/// Merge and completion bookkeeping at the start of a step.
fn update_progress(state: &mut MissionState, dog: usize, params: &ModelParams) {
    let positions = state.world.sheep_positions();
    let t = state.world.t + 1;
    let env = state.world.env.clone();
    let task = &mut state.tasks[dog];
    if task.members.is_empty() {
        task.parked = true;
        return;
    }
    while let Some(next) = task.next_group() {
        let other = &state.groups[next].members;
        if !check_merge(&task.members, other, &positions, params.cohesion_range) {
            break;
        }
        task.members.extend_from_slice(other);
        task.members.sort_unstable();
        task.members.dedup();
        task.q += 1;
        task.swarm_path.clear();
        state.events.push(MissionEvent::Subtask { t, dog, q: task.q });
        if task.mode == Mode::Interaction {
            task.mode = Mode::NoInteraction;
            state.events.push(MissionEvent::ModeChange { t, dog, from: Mode::Interaction, to: Mode::NoInteraction });
        }
    }
    task.parked =
        task.is_last_subtask() && task.members.iter().all(|&i| positions[i].dist(env.goal) <= env.goal_radius);
}

/// With two dogs on their last sub-task and touching swarms, one dog takes
/// both so they are not pushed against each other: the one still herding
/// if the other is parked, else the one with the larger swarm.
fn hand_over(state: &mut MissionState, params: &ModelParams) {
    if state.tasks.len() != 2 || !state.tasks.iter().all(|t| t.is_last_subtask() && !t.members.is_empty()) {
        return;
    }
    let positions = state.world.sheep_positions();
    if !check_merge(&state.tasks[0].members, &state.tasks[1].members, &positions, params.cohesion_range) {
        return;
    }
    let (a, b) = (&state.tasks[0], &state.tasks[1]);
    let second_keeps = match (a.parked, b.parked) {
        (true, false) => true,
        (false, true) => false,
        _ => b.members.len() > a.members.len(),
    };
    let (to, from) = if second_keeps { (1, 0) } else { (0, 1) };
    let moved = std::mem::take(&mut state.tasks[from].members);
    let task = &mut state.tasks[to];
    task.members.extend(moved);
    task.members.sort_unstable();
    state.events.push(MissionEvent::Handover { t: state.world.t + 1, from, to });
}

/// Movement command for one dog.
fn dog_command(state: &mut MissionState, dog: usize, params: &ModelParams, config: &MissionConfig) -> Result<DogCommand> {
    let world = &state.world;
    let dog_pos = world.dogs[dog].pos;
    let grid = &state.grid;
    let tol = config.arrival_tolerance.unwrap_or(params.dog_speed);
    let full = state.method == Method::Full;
    let positions = world.sheep_positions();

    let go = |to: Vec2, weights: &CostWeights, threats: Option<(&GridMap, &ThreatField)>| -> Result<DogCommand> {
        if dog_pos == to {
            return Ok(DogCommand::Hold);
        }
        if !full {
            return Ok(DogCommand::Waypoint(to));
        }
        let (g, field) = match threats {
            Some((g, f)) => (g, Some(f)),
            None => (grid, None),
        };
        let wp = route_between(g, world, dog_pos, to, weights, field)?;
        Ok(wp.get(1).map_or(DogCommand::Hold, |&w| DogCommand::Waypoint(w)))
    };
    let threat_layers = |exempt: Option<Vec2>| {
        let mut g = mark_threat(grid, &positions, &[], config.threat_radius);
        if let Some(p) = exempt {
            exempt_threat(&mut g, p, params.safe_distance);
        }
        (g, ThreatField::from_sheep(&positions, &[], config.threat_radius))
    };

    let task = &state.tasks[dog];
    if task.parked {
        let Some(to) = standoff_point(world, grid, dog_pos, params) else {
            return Ok(DogCommand::Hold);
        };
        let (g, f) = threat_layers(Some(to));
        return go(to, &config.weights, Some((&g, &f)));
    }

    let lcm = compute_lcm(&task.members, &positions);
    let subgoal = task.subgoal;
    let mode = task.mode;
    let n = task.members.len();

    if mode == Mode::NoInteraction {
        let drive = match subswarm_driving_point(lcm, subgoal, n, params) {
            Ok(p) => p,
            // the swarm already sits on its sub-goal: reposition to herd it as is
            Err(_) => herding_target(subgoal, &task.members, world, params).0,
        };
        let drive = free_point(grid, world.env.clamp(drive));
        if dog_pos.dist(drive) > tol {
            let (g, f) = threat_layers(Some(drive));
            return go(drive, &config.weights, Some((&g, &f)));
        }
        let t = world.t + 1;
        state.tasks[dog].mode = Mode::Interaction;
        state.events.push(MissionEvent::ModeChange { t, dog, from: Mode::NoInteraction, to: Mode::Interaction });
    }

    let world = &state.world;
    let task = &state.tasks[dog];
    let (point, _) = herding_target(subgoal, &task.members, world, params);
    let point = free_point(grid, world.env.clamp(point));
    go(point, &CostWeights::LENGTH_ONLY, None)
}

/// Advances the mission by one simulation step.
pub fn engine_step(
    state: &mut MissionState,
    params: &ModelParams,
    config: &MissionConfig,
    rng: &mut SimRng,
) -> Result<()> {
    let n_dogs = state.tasks.len();
    let mut commands = Vec::with_capacity(n_dogs);
    hand_over(state, params);
    for dog in 0..n_dogs {
        update_progress(state, dog, params);
        if !state.tasks[dog].parked {
            select_subgoal(state, dog, params, config)?;
        }
        commands.push(dog_command(state, dog, params, config)?);
    }
    state.world = step_agents(&state.world, &commands, params, rng);
    Ok(())
}

/// One recorded step: positions after the step plus each dog's task state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: u64,
    pub sheep: Vec<Vec2>,
    pub dogs: Vec<Vec2>,
    /// `None` for the reactive method, which has no modes.
    pub modes: Vec<Option<Mode>>,
    pub q: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionOutcome {
    pub method: Method,
    pub seed: u64,
    pub success: bool,
    /// Steps taken: the completion step on success, else the budget or the
    /// step at which the mission was aborted.
    pub steps: u64,
    pub t_max: u64,
    pub per_dog_path_length: Vec<f64>,
    pub events: Vec<MissionEvent>,
    /// Why the mission stopped early, if it did.
    pub failure: Option<String>,
    pub n_sheep: usize,
    /// Scenario the run used, for rendering.
    pub env: crate::world::Environment,
    /// Initial positions (step 0) followed by one frame per step when recorded.
    pub frames: Vec<Frame>,
}

fn frame_of(world: &WorldState, tasks: Option<&[DogTask]>) -> Frame {
    let n = world.dogs.len();
    Frame {
        t: world.t,
        sheep: world.sheep_positions(),
        dogs: world.dogs.iter().map(|d| d.pos).collect(),
        modes: match tasks {
            Some(ts) => ts.iter().map(|t| Some(t.mode)).collect(),
            None => vec![None; n],
        },
        q: match tasks {
            Some(ts) => ts.iter().map(|t| Some(t.q)).collect(),
            None => vec![None; n],
        },
    }
}

/// Runs a whole mission from an initial world. Failures (timeout, planning
/// errors) are reported in the outcome rather than returned.
pub fn run_mission(world: WorldState, params: &ModelParams, config: &MissionConfig, seed: u64) -> MissionOutcome {
    let n_sheep = world.sheep.len();
    let mut sim = rng::stream(seed, Stream::Simulation);
    let mut out = MissionOutcome {
        method: config.method,
        seed,
        success: false,
        steps: 0,
        t_max: config.max_steps.unwrap_or_else(|| step_budget(n_sheep)),
        per_dog_path_length: vec![0.0; config.n_dogs],
        events: Vec::new(),
        failure: None,
        n_sheep,
        env: (*world.env).clone(),
        frames: Vec::new(),
    };

    if config.method == Method::Reactive {
        if let Err(e) = config.validate() {
            out.failure = Some(e.to_string());
            return out;
        }
        if world.dogs.len() < config.n_dogs {
            out.failure = Some(format!("scenario places only {} dog(s)", world.dogs.len()));
            return out;
        }
        let mut world = world.with_dogs(config.n_dogs);
        if let Some(r) = config.goal_radius {
            let mut env = (*world.env).clone();
            env.goal_radius = r;
            world.env = env.into();
        }
        out.env = (*world.env).clone();
        if config.record {
            out.frames.push(frame_of(&world, None));
        }
        while world.t < out.t_max && !world.all_sheep_in_goal() {
            world = reactive_step(&world, params, &mut sim);
            if config.record {
                out.frames.push(frame_of(&world, None));
            }
        }
        out.success = world.all_sheep_in_goal();
        out.steps = world.t;
        out.per_dog_path_length = world.dogs.iter().map(|d| d.path_length_accum).collect();
        return out;
    }

    let mut seq = rng::stream(seed, Stream::Sequencing);
    let mut state = match plan_mission(world, params, config, &mut seq) {
        Ok(s) => s,
        Err(e) => {
            out.failure = Some(e.to_string());
            return out;
        }
    };
    out.env = (*state.world.env).clone();
    out.t_max = state.t_max;
    if config.record {
        out.frames.push(frame_of(&state.world, Some(&state.tasks)));
    }
    while state.world.t < state.t_max && !state.is_complete() {
        if let Err(e) = engine_step(&mut state, params, config, &mut sim) {
            out.failure = Some(e.to_string());
            break;
        }
        if config.record {
            out.frames.push(frame_of(&state.world, Some(&state.tasks)));
        }
    }
    out.success = state.is_complete();
    out.steps = state.world.t;
    out.per_dog_path_length = state.world.dogs.iter().map(|d| d.path_length_accum).collect();
    out.events = state.events;
    out
}
