//! Force model for sheep and sheepdogs, the drive/collect decision and the
//! purely reactive shepherding baseline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::rng::unit_vector;
use crate::world::{Environment, WorldState};

/// Weights, ranges and speeds of the agent model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    /// Weight of the previous total force.
    pub w_inertia: f64,
    /// Attraction to neighbours within `cohesion_range`.
    pub w_attraction: f64,
    /// Repulsion from dogs within `dog_influence_range`.
    pub w_dog_repulsion: f64,
    /// Repulsion from sheep within `sheep_avoid_range`.
    pub w_sheep_repulsion: f64,
    /// Repulsion from obstacles within `obstacle_avoid_range`.
    pub w_obstacle_repulsion: f64,
    pub w_sheep_noise: f64,
    pub w_dog_noise: f64,
    pub cohesion_range: f64,
    pub dog_influence_range: f64,
    pub sheep_avoid_range: f64,
    pub obstacle_avoid_range: f64,
    /// Safe operating distance between a dog and a sheep.
    pub safe_distance: f64,
    pub sheep_speed: f64,
    pub dog_speed: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            w_inertia: 0.5,
            w_attraction: 1.05,
            w_dog_repulsion: 1.0,
            w_sheep_repulsion: 2.0,
            w_obstacle_repulsion: 3.0,
            w_sheep_noise: 0.3,
            w_dog_noise: 0.3,
            cohesion_range: 4.0,
            dog_influence_range: 8.0,
            sheep_avoid_range: 0.4,
            obstacle_avoid_range: 2.0,
            safe_distance: 4.0,
            sheep_speed: 1.0,
            dog_speed: 1.5,
        }
    }
}

impl ModelParams {
    /// `R_pp * sqrt(2n)`: the flock radius below which a group counts as gathered.
    pub fn neighbourhood_range(&self, n: usize) -> f64 {
        self.sheep_avoid_range * (2.0 * n as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let weights = [
            self.w_inertia,
            self.w_attraction,
            self.w_dog_repulsion,
            self.w_sheep_repulsion,
            self.w_obstacle_repulsion,
            self.w_sheep_noise,
            self.w_dog_noise,
        ];
        let radii = [
            self.cohesion_range,
            self.dog_influence_range,
            self.sheep_avoid_range,
            self.obstacle_avoid_range,
            self.safe_distance,
            self.sheep_speed,
            self.dog_speed,
        ];
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("model weights must be finite and non-negative".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter("model ranges and speeds must be positive".into()));
        }
        Ok(())
    }
}

/// Total force on sheep `i`. Consumes exactly one random direction from `rng`.
pub fn sheep_force<R: Rng + ?Sized>(i: usize, world: &WorldState, params: &ModelParams, rng: &mut R) -> Vec2 {
    let me = world.sheep[i];
    let p = me.pos;

    let mut neighbour_sum = Vec2::ZERO;
    let mut neighbours = 0usize;
    let mut crowding = Vec2::ZERO;
    for (j, other) in world.sheep.iter().enumerate() {
        if j == i {
            continue;
        }
        let d = p.dist(other.pos);
        if d <= params.cohesion_range {
            neighbour_sum += other.pos;
            neighbours += 1;
        }
        if d <= params.sheep_avoid_range && d > 0.0 {
            crowding += (p - other.pos).normalized();
        }
    }
    let attraction = if neighbours > 0 {
        (neighbour_sum * (1.0 / neighbours as f64) - p).normalized()
    } else {
        Vec2::ZERO
    };

    let mut dogs = Vec2::ZERO;
    for dog in &world.dogs {
        let d = p.dist(dog.pos);
        if d <= params.dog_influence_range && d > 0.0 {
            dogs += (p - dog.pos).normalized();
        }
    }

    let mut walls = Vec2::ZERO;
    for o in &world.env.obstacles {
        let q = o.closest_point(p);
        let d = p.dist(q);
        if d <= params.obstacle_avoid_range && d > 0.0 {
            walls += (p - q).normalized();
        }
    }

    let noise = unit_vector(rng);

    me.prev_force * params.w_inertia
        + attraction * params.w_attraction
        + dogs.normalized() * params.w_dog_repulsion
        + crowding.normalized() * params.w_sheep_repulsion
        + walls.normalized() * params.w_obstacle_repulsion
        + noise * params.w_sheep_noise
}

/// Force steering a dog at `dog_pos` towards `target`, plus the noise term.
pub fn dog_force<R: Rng + ?Sized>(dog_pos: Vec2, target: Vec2, params: &ModelParams, rng: &mut R) -> Vec2 {
    let toward = dog_pos.unit_towards(target).unwrap_or(Vec2::ZERO);
    toward + unit_vector(rng) * params.w_dog_noise
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HerdingKind {
    Drive,
    Collect,
}

/// Drive or collect point for a group of sheep heading to `goal`.
///
/// With the group gathered (furthest member within `R_n` of the centre) the
/// dog stands `R_n + R_s` behind the centre, opposite the goal. Otherwise it
/// stands `R_s` behind the furthest member, on the far side from the centre.
pub fn herding_target(goal: Vec2, members: &[usize], world: &WorldState, params: &ModelParams) -> (Vec2, HerdingKind) {
    assert!(!members.is_empty(), "herding_target needs a non-empty flock");
    let com = Vec2::mean(members.iter().map(|&i| world.sheep[i].pos)).expect("non-empty");
    let r_n = params.neighbourhood_range(members.len());

    let mut furthest = members[0];
    let mut far_d = -1.0;
    for &i in members {
        let d = world.sheep[i].pos.dist(com);
        if d > far_d {
            far_d = d;
            furthest = i;
        }
    }

    if far_d > r_n {
        let fp = world.sheep[furthest].pos;
        // on the far side of the straggler so it is pushed back towards the centre
        let out = com.unit_towards(fp).unwrap_or(Vec2::ZERO);
        (fp + out * params.safe_distance, HerdingKind::Collect)
    } else {
        let ahead = com.unit_towards(goal).unwrap_or(Vec2::ZERO);
        (com - ahead * (r_n + params.safe_distance), HerdingKind::Drive)
    }
}

/// How a dog moves during one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DogCommand {
    /// Head straight for the point, stopping on it rather than overshooting.
    Waypoint(Vec2),
    /// Move a full step along the direction of the force.
    Force(Vec2),
    Hold,
}

/// Moves from `from` towards `to`, refusing to enter an obstacle interior. A
/// blocked move slides along whichever axis is still free, else stays put.
pub fn resolve_move(env: &Environment, from: Vec2, to: Vec2) -> Vec2 {
    let to = env.clamp(to);
    let enters = |a: Vec2, b: Vec2| env.obstacles.iter().any(|o| segment_enters_interior(o, a, b));
    if !enters(from, to) {
        return to;
    }
    let slides = [Vec2::new(to.x, from.y), Vec2::new(from.x, to.y)];
    let mut best: Option<(f64, Vec2)> = None;
    for s in slides {
        let gain = s.dist(from);
        if gain > 0.0 && !enters(from, s) && best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, s));
        }
    }
    best.map_or(from, |(_, s)| s)
}

/// Whether the segment passes through the open interior of the rectangle.
fn segment_enters_interior(o: &crate::geometry::Obstacle, a: Vec2, b: Vec2) -> bool {
    let d = b - a;
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    for (p, q) in [(-d.x, a.x - o.xmin), (d.x, o.xmax - a.x), (-d.y, a.y - o.ymin), (d.y, o.ymax - a.y)] {
        if p == 0.0 {
            if q <= 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    t0 < t1 && o.contains_strict(a + d * (0.5 * (t0 + t1)))
}

/// Advances every agent by one step: dogs first, then sheep, which react to
/// the dogs' new positions.
pub fn step_agents<R: Rng + ?Sized>(
    world: &WorldState,
    commands: &[DogCommand],
    params: &ModelParams,
    rng: &mut R,
) -> WorldState {
    let mut next = world.clone();
    let env = world.env.clone();

    for (dog, cmd) in next.dogs.iter_mut().zip(commands) {
        let target = match *cmd {
            DogCommand::Waypoint(w) => {
                let gap = w - dog.pos;
                let n = gap.norm();
                if n <= dog.speed {
                    w
                } else {
                    dog.pos + gap * (dog.speed / n)
                }
            }
            DogCommand::Force(f) => dog.pos + f.normalized() * dog.speed,
            DogCommand::Hold => dog.pos,
        };
        let moved = resolve_move(&env, dog.pos, target);
        dog.path_length_accum += moved.dist(dog.pos);
        dog.pos = moved;
    }

    let snapshot = WorldState { dogs: next.dogs.clone(), ..world.clone() };
    let forces: Vec<Vec2> = (0..world.sheep.len())
        .map(|i| sheep_force(i, &snapshot, params, rng))
        .collect();
    for (sheep, f) in next.sheep.iter_mut().zip(forces) {
        let target = sheep.pos + f.normalized() * params.sheep_speed;
        sheep.pos = resolve_move(&env, sheep.pos, target);
        sheep.prev_force = f;
    }
    next.t += 1;
    next
}

/// One step of the reactive baseline: every dog heads for the drive/collect
/// point of the whole flock relative to the final goal.
pub fn reactive_step<R: Rng + ?Sized>(world: &WorldState, params: &ModelParams, rng: &mut R) -> WorldState {
    let all: Vec<usize> = (0..world.sheep.len()).collect();
    let commands: Vec<DogCommand> = world
        .dogs
        .iter()
        .map(|dog| {
            if all.is_empty() {
                return DogCommand::Hold;
            }
            let (target, _) = herding_target(world.env.goal, &all, world, params);
            DogCommand::Force(dog_force(dog.pos, target, params, rng))
        })
        .collect();
    step_agents(world, &commands, params, rng)
}
