//! Threat-aware A* on the 8-connected grid plus line-of-sight pruning.
//!
//! Search-time edge cost is `a1 * step_length + a2 * [destination cell is
//! threatened]`, with steps of one cell or one diagonal. Obstacles are hard
//! constraints; sheep threat is a soft penalty so targets next to sheep stay
//! reachable. A diagonal step needs both orthogonal neighbours free.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segment_collides, segment_hits_circle, Obstacle, Vec2};
use crate::grid::{Cell, GridMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub length: f64,
    pub threat: f64,
}

impl CostWeights {
    pub const LENGTH_ONLY: CostWeights = CostWeights { length: 1.0, threat: 0.0 };

    pub fn new(length: f64, threat: f64) -> Result<Self> {
        if !(length >= 0.0 && threat >= 0.0 && length.is_finite() && threat.is_finite()) {
            return Err(Error::InvalidParameter(format!("cost weights must be non-negative, got {length}, {threat}")));
        }
        Ok(Self { length, threat })
    }
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { length: 1.0, threat: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub waypoints: Vec<Vec2>,
    /// Sum of segment lengths.
    pub length_cost: f64,
    /// Number of threatened segments; `None` when not evaluated.
    pub threat_cost: Option<usize>,
    /// Optimal cost under the grid model, as found by the search.
    pub search_cost: f64,
}

impl PlannedPath {
    fn from_waypoints(waypoints: Vec<Vec2>, threat_cost: Option<usize>, search_cost: f64) -> Self {
        let length_cost = path_length(&waypoints);
        Self { waypoints, length_cost, threat_cost, search_cost }
    }

    pub fn start(&self) -> Vec2 {
        self.waypoints[0]
    }

    pub fn goal(&self) -> Vec2 {
        *self.waypoints.last().expect("paths hold at least one waypoint")
    }
}

pub fn path_length(waypoints: &[Vec2]) -> f64 {
    waypoints.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Threat discs around sheep.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreatField {
    pub centres: Vec<Vec2>,
    pub radius: f64,
}

impl ThreatField {
    /// Discs around every sheep whose index is not in `exclude`.
    pub fn from_sheep(positions: &[Vec2], exclude: &[usize], radius: f64) -> Self {
        let centres = positions
            .iter()
            .enumerate()
            .filter(|(i, _)| !exclude.contains(i))
            .map(|(_, p)| *p)
            .collect();
        Self { centres, radius }
    }

    pub fn segment_threatened(&self, a: Vec2, b: Vec2) -> bool {
        self.centres.iter().any(|&c| segment_hits_circle(a, b, c, self.radius))
    }

    /// Threatened-segment count of a waypoint list.
    pub fn count(&self, waypoints: &[Vec2]) -> usize {
        waypoints.windows(2).filter(|w| self.segment_threatened(w[0], w[1])).count()
    }
}

/// Copy of `grid` whose threat layer marks every cell with its centre within
/// `radius` of a sheep not listed in `exclude`.
pub fn mark_threat(grid: &GridMap, positions: &[Vec2], exclude: &[usize], radius: f64) -> GridMap {
    let mut g = grid.clone();
    g.clear_threat();
    add_threat(&mut g, positions.iter().enumerate().filter(|(i, _)| !exclude.contains(i)).map(|(_, p)| *p), radius);
    g
}

/// Marks cells whose centre lies within `radius` of any given point.
pub fn add_threat(grid: &mut GridMap, centres: impl IntoIterator<Item = Vec2>, radius: f64) {
    for c in centres {
        let lo = grid.cell_of(Vec2::new(c.x - radius, c.y - radius));
        let hi = grid.cell_of(Vec2::new(c.x + radius, c.y + radius));
        for row in lo.row..=hi.row {
            for col in lo.col..=hi.col {
                let cell = Cell::new(col, row);
                if grid.centre(cell).dist(c) <= radius {
                    let i = grid.index(cell);
                    grid.threat[i] = true;
                }
            }
        }
    }
}

/// Clears threat on cells whose centre lies within `radius` of `at`.
pub fn exempt_threat(grid: &mut GridMap, at: Vec2, radius: f64) {
    let lo = grid.cell_of(Vec2::new(at.x - radius, at.y - radius));
    let hi = grid.cell_of(Vec2::new(at.x + radius, at.y + radius));
    for row in lo.row..=hi.row {
        for col in lo.col..=hi.col {
            let cell = Cell::new(col, row);
            if grid.centre(cell).dist(at) <= radius {
                let i = grid.index(cell);
                grid.threat[i] = false;
            }
        }
    }
    // the target's own cell is always reachable without penalty
    let i = grid.index(grid.cell_of(at));
    grid.threat[i] = false;
}

#[derive(Clone, Copy, PartialEq)]
struct Key {
    f: f64,
    h: f64,
    index: usize,
}

impl Eq for Key {}

impl Ord for Key {
    // reversed so the max-heap pops the smallest f, then h, then index
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f)
            .then_with(|| o.h.total_cmp(&self.h))
            .then_with(|| o.index.cmp(&self.index))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Cost of stepping from `from` to `to`, or `None` if the step is illegal.
pub(crate) fn step_cost(grid: &GridMap, from: Cell, to: Cell, dc: i32, dr: i32, w: &CostWeights) -> Option<f64> {
    if grid.is_blocked(to) {
        return None;
    }
    let diagonal = dc != 0 && dr != 0;
    if diagonal {
        let side_a = Cell::new(to.col, from.row);
        let side_b = Cell::new(from.col, to.row);
        if grid.is_blocked(side_a) || grid.is_blocked(side_b) {
            return None;
        }
    }
    let len = if diagonal { std::f64::consts::SQRT_2 } else { 1.0 } * grid.cell_size;
    let threat = if grid.is_threat(to) { w.threat } else { 0.0 };
    Some(w.length * len + threat)
}

/// Optimal grid path between the cells containing `start` and `goal`;
/// waypoints are the visited cell centres.
pub fn astar(grid: &GridMap, start: Vec2, goal: Vec2, weights: &CostWeights) -> Result<PlannedPath> {
    astar_traced(grid, start, goal, weights, None)
}

/// [`astar`] that also records `(cell, h)` for every expanded node.
pub fn astar_traced(
    grid: &GridMap,
    start: Vec2,
    goal: Vec2,
    weights: &CostWeights,
    mut trace: Option<&mut Vec<(Cell, f64)>>,
) -> Result<PlannedPath> {
    let sc = grid.cell_of(start);
    let gc = grid.cell_of(goal);
    if grid.is_blocked(sc) {
        return Err(Error::BlockedEndpoint(start));
    }
    if grid.is_blocked(gc) {
        return Err(Error::BlockedEndpoint(goal));
    }
    let goal_centre = grid.centre(gc);
    let h = |c: Cell| weights.length * grid.centre(c).dist(goal_centre);

    let n = grid.len();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    let si = grid.index(sc);
    let gi = grid.index(gc);
    g[si] = 0.0;
    open.push(Key { f: h(sc), h: h(sc), index: si });

    while let Some(Key { index, h: hn, .. }) = open.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        let cell = grid.cell_at(index);
        if let Some(t) = trace.as_deref_mut() {
            t.push((cell, hn));
        }
        if index == gi {
            break;
        }
        for (m, dc, dr) in grid.neighbours(cell) {
            let mi = grid.index(m);
            if closed[mi] {
                continue;
            }
            let Some(c) = step_cost(grid, cell, m, dc, dr, weights) else {
                continue;
            };
            let cand = g[index] + c;
            if cand < g[mi] {
                g[mi] = cand;
                parent[mi] = index;
                let hm = h(m);
                open.push(Key { f: cand + hm, h: hm, index: mi });
            }
        }
    }

    if !closed[gi] {
        return Err(Error::NoPath { start, goal });
    }
    let mut cells = vec![gi];
    let mut cur = gi;
    while cur != si {
        cur = parent[cur];
        cells.push(cur);
    }
    cells.reverse();
    let threatened = cells[1..].iter().filter(|&&i| grid.threat[i]).count();
    let waypoints = cells.iter().map(|&i| grid.centre(grid.cell_at(i))).collect();
    Ok(PlannedPath::from_waypoints(waypoints, Some(threatened), g[gi]))
}

/// `a1 * length + a2 * threatened segments`, with threat tested against the
/// continuous discs.
pub fn evaluate_path_cost(path: &PlannedPath, weights: &CostWeights, threats: &ThreatField) -> f64 {
    weights.length * path_length(&path.waypoints) + weights.threat * threats.count(&path.waypoints) as f64
}

/// Greedy forward line-of-sight pruning against obstacles.
pub fn prune_path(path: &PlannedPath, obstacles: &[Obstacle]) -> PlannedPath {
    let wp = &path.waypoints;
    prune_with(path, |i, j| !segment_collides(wp[i], wp[j], obstacles, 0.0))
}

/// Greedy forward pruning: from waypoint `i`, keep extending to `i + 2`,
/// `i + 3`, ... while `visible(i, j)` holds and jump to the last visible one.
/// Adjacent waypoints are always kept connected. Endpoints are preserved.
pub fn prune_with<F>(path: &PlannedPath, mut visible: F) -> PlannedPath
where
    F: FnMut(usize, usize) -> bool,
{
    let wp = &path.waypoints;
    let n = wp.len();
    if n <= 2 {
        return PlannedPath::from_waypoints(wp.clone(), path.threat_cost, path.search_cost);
    }
    let mut out = vec![wp[0]];
    let mut i = 0;
    while i < n - 1 {
        let mut j = i + 1;
        while j + 1 < n && visible(i, j + 1) {
            j += 1;
        }
        out.push(wp[j]);
        i = j;
    }
    PlannedPath::from_waypoints(out, None, path.search_cost)
}

/// Full planner: A*, exact endpoints, then pruning.
///
/// The grid path's first and last cell centres are replaced by `start` and
/// `goal` themselves. With a threat field and a non-zero threat weight, a
/// shortcut is only taken if it crosses no more threat discs than the
/// stretch of path it replaces.
pub fn plan_path(
    grid: &GridMap,
    obstacles: &[Obstacle],
    start: Vec2,
    goal: Vec2,
    weights: &CostWeights,
    threats: Option<&ThreatField>,
) -> Result<PlannedPath> {
    let raw = astar(grid, start, goal, weights)?;
    let mut wp = raw.waypoints.clone();
    if wp.len() == 1 {
        wp = vec![start, goal];
    } else {
        wp[0] = start;
        *wp.last_mut().expect("non-empty") = goal;
    }
    let snapped = PlannedPath::from_waypoints(wp, None, raw.search_cost);
    let w = &snapped.waypoints;

    let pruned = match threats.filter(|_| weights.threat > 0.0) {
        Some(field) => {
            let seg_threat: Vec<bool> = w.windows(2).map(|s| field.segment_threatened(s[0], s[1])).collect();
            prune_with(&snapped, |i, j| {
                if segment_collides(w[i], w[j], obstacles, 0.0) {
                    return false;
                }
                let replaced = seg_threat[i..j].iter().filter(|&&t| t).count();
                replaced > 0 || !field.segment_threatened(w[i], w[j])
            })
        }
        None => prune_with(&snapped, |i, j| !segment_collides(w[i], w[j], obstacles, 0.0)),
    };
    let threat_cost = threats.map(|f| f.count(&pruned.waypoints));
    Ok(PlannedPath { threat_cost, ..pruned })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::rasterize;
    use crate::world::Environment;

    fn open_grid(w: f64, h: f64, obstacles: Vec<Obstacle>) -> (GridMap, Environment) {
        let env = Environment { width: w, height: h, obstacles, goal: Vec2::new(0.5, 0.5), goal_radius: 1.0 };
        (rasterize(&env, 1.0).unwrap(), env)
    }

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn threat_marks_cells_within_radius() {
        let (g, _) = open_grid(20.0, 20.0, vec![]);
        let t = mark_threat(&g, &[v(5.0, 5.0)], &[], 4.0);
        assert!(t.is_threat(g.cell_of(v(5.0, 5.0))));
        assert!(!t.is_threat(Cell::new(10, 10)));
        // excluded sheep leave no trace
        assert_eq!(mark_threat(&g, &[v(5.0, 5.0)], &[0], 4.0).threat_count(), 0);
    }

    #[test]
    fn overlapping_threat_discs_form_union() {
        let (g, _) = open_grid(30.0, 30.0, vec![]);
        let sheep = [v(10.0, 10.0), v(13.0, 11.5)];
        let t = mark_threat(&g, &sheep, &[], 4.0);
        let mut expect = 0;
        for r in 0..30 {
            for c in 0..30 {
                let centre = v(c as f64 + 0.5, r as f64 + 0.5);
                let hit = sheep.iter().any(|s| s.dist(centre) <= 4.0);
                assert_eq!(t.is_threat(Cell::new(c, r)), hit);
                expect += hit as usize;
            }
        }
        assert_eq!(t.threat_count(), expect);
    }

    #[test]
    fn start_equals_goal() {
        let (g, _) = open_grid(5.0, 5.0, vec![]);
        let p = astar(&g, v(2.5, 2.5), v(2.5, 2.5), &CostWeights::default()).unwrap();
        assert_eq!(p.waypoints.len(), 1);
        assert_eq!(p.search_cost, 0.0);
        assert_eq!(p.length_cost, 0.0);
    }

    #[test]
    fn open_diagonal() {
        let (g, _) = open_grid(5.0, 5.0, vec![]);
        let p = astar(&g, v(0.5, 0.5), v(4.5, 4.5), &CostWeights::default()).unwrap();
        assert!((p.length_cost - 4.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((p.search_cost - 5.656854).abs() < 1e-6);
        assert_eq!(p.waypoints.len(), 5);
    }

    #[test]
    fn blocked_endpoint_and_no_path() {
        let (g, _) = open_grid(10.0, 10.0, vec![Obstacle::new(4.0, 0.0, 5.0, 10.0)]);
        assert!(matches!(
            astar(&g, v(4.5, 2.0), v(8.0, 8.0), &CostWeights::default()),
            Err(Error::BlockedEndpoint(_))
        ));
        assert!(matches!(astar(&g, v(1.0, 1.0), v(8.0, 8.0), &CostWeights::default()), Err(Error::NoPath { .. })));
    }

    #[test]
    fn no_corner_cutting() {
        // two blocks touching diagonally at (5,5): the diagonal gap is closed
        let (g, _) = open_grid(
            10.0,
            10.0,
            vec![Obstacle::new(0.0, 0.0, 5.0, 5.0), Obstacle::new(5.0, 5.0, 10.0, 10.0)],
        );
        assert!(matches!(
            astar(&g, v(2.5, 7.5), v(7.5, 2.5), &CostWeights::default()),
            Err(Error::NoPath { .. })
        ));
        let (g2, _) = open_grid(
            10.0,
            10.0,
            vec![Obstacle::new(0.0, 5.0, 5.0, 10.0), Obstacle::new(5.0, 0.0, 10.0, 5.0)],
        );
        assert!(matches!(
            astar(&g2, v(2.5, 2.5), v(7.5, 7.5), &CostWeights::default()),
            Err(Error::NoPath { .. })
        ));
    }

    #[test]
    fn detours_around_a_threatened_cell() {
        let (g, _) = open_grid(9.0, 3.0, vec![]);
        let mut t = g.clone();
        let i = t.index(Cell::new(4, 1));
        t.threat[i] = true;
        let p = astar(&t, v(0.5, 1.5), v(8.5, 1.5), &CostWeights::default()).unwrap();
        // two diagonals replace two straight steps: 6 + 2*sqrt(2)
        assert!((p.search_cost - (6.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(p.threat_cost, Some(0));
    }

    #[test]
    fn path_cost_evaluation() {
        let field = ThreatField { centres: vec![], radius: 4.0 };
        let one = PlannedPath::from_waypoints(vec![v(1.0, 1.0)], None, 0.0);
        assert_eq!(evaluate_path_cost(&one, &CostWeights::default(), &field), 0.0);
        let two = PlannedPath::from_waypoints(vec![v(0.0, 0.0), v(3.0, 0.0), v(3.0, 4.0)], None, 0.0);
        assert_eq!(evaluate_path_cost(&two, &CostWeights::LENGTH_ONLY, &field), 7.0);

        // one segment passing two discs counts once
        let field = ThreatField { centres: vec![v(1.0, 1.0), v(1.5, -1.0)], radius: 1.5 };
        assert_eq!(evaluate_path_cost(&two, &CostWeights::default(), &field), 107.0);
    }

    #[test]
    fn prune_collinear_and_short() {
        let p = PlannedPath::from_waypoints(vec![v(0.0, 0.0), v(1.0, 1.0), v(2.0, 2.0)], None, 0.0);
        assert_eq!(prune_path(&p, &[]).waypoints, vec![v(0.0, 0.0), v(2.0, 2.0)]);
        let p = PlannedPath::from_waypoints(vec![v(0.0, 0.0), v(5.0, 1.0)], None, 0.0);
        assert_eq!(prune_path(&p, &[]).waypoints, p.waypoints);
    }

    #[test]
    fn prune_keeps_corner_around_block() {
        let obstacles = vec![Obstacle::new(2.0, 0.0, 4.0, 3.0)];
        let (g, _) = open_grid(6.0, 6.0, obstacles.clone());
        let raw = astar(&g, v(0.5, 0.5), v(5.5, 0.5), &CostWeights::LENGTH_ONLY).unwrap();
        let pruned = prune_path(&raw, &obstacles);
        assert!(pruned.length_cost <= raw.length_cost + 1e-12);
        assert!(pruned.waypoints.len() >= 3);
        assert_eq!(pruned.start(), raw.start());
        assert_eq!(pruned.goal(), raw.goal());
        for w in pruned.waypoints.windows(2) {
            assert!(!segment_collides(w[0], w[1], &obstacles, 0.0));
        }
    }

    #[test]
    fn plan_path_uses_exact_endpoints() {
        let (g, env) = open_grid(20.0, 20.0, vec![]);
        let p = plan_path(&g, &env.obstacles, v(1.2, 1.7), v(15.3, 9.9), &CostWeights::LENGTH_ONLY, None).unwrap();
        assert_eq!(p.waypoints, vec![v(1.2, 1.7), v(15.3, 9.9)]);
    }

    #[test]
    fn threat_aware_pruning_keeps_detour() {
        let (g, env) = open_grid(30.0, 30.0, vec![]);
        let sheep = [v(15.0, 15.0)];
        let t = mark_threat(&g, &sheep, &[], 4.0);
        let field = ThreatField::from_sheep(&sheep, &[], 4.0);
        let p = plan_path(&t, &env.obstacles, v(2.0, 15.0), v(28.0, 15.0), &CostWeights::default(), Some(&field)).unwrap();
        assert_eq!(p.threat_cost, Some(0));
        assert!(p.waypoints.len() > 2);
        // pruning on obstacles only would cut straight through the flock
        let straight = plan_path(&t, &env.obstacles, v(2.0, 15.0), v(28.0, 15.0), &CostWeights::LENGTH_ONLY, Some(&field)).unwrap();
        assert_eq!(straight.threat_cost, Some(1));
    }
}
