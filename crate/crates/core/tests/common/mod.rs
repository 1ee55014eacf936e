//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use herdplan_core::geometry::{Obstacle, Vec2};
use herdplan_core::grid::{rasterize, Cell, GridMap};
use herdplan_core::world::Environment;
use rand::Rng;

/// Connected components of the `<= range` proximity graph by breadth-first
/// search, as a set of sorted member lists.
pub fn bfs_components(positions: &[Vec2], range: f64) -> BTreeSet<Vec<usize>> {
    let n = positions.len();
    let mut seen = vec![false; n];
    let mut out = BTreeSet::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !seen[j] && positions[i].dist(positions[j]) <= range {
                    seen[j] = true;
                    comp.push(j);
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        out.insert(comp);
    }
    out
}

/// Random flock: a few Gaussian-ish blobs plus stragglers, with some exact
/// duplicates and pairs at exactly `range` apart to exercise the boundary.
pub fn random_flock<R: Rng>(rng: &mut R, n: usize, range: f64) -> Vec<Vec2> {
    let blobs = rng.random_range(1..=6);
    let centres: Vec<Vec2> =
        (0..blobs).map(|_| Vec2::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))).collect();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let roll: f64 = rng.random();
        let p = if roll < 0.05 && !out.is_empty() {
            out[rng.random_range(0..out.len())]
        } else if roll < 0.15 && !out.is_empty() {
            let q: Vec2 = out[rng.random_range(0..out.len())];
            q + Vec2::new(range, 0.0)
        } else if roll < 0.3 {
            Vec2::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))
        } else {
            let c = centres[rng.random_range(0..blobs)];
            let spread = rng.random_range(1.0..12.0);
            c + Vec2::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread))
        };
        out.push(p);
    }
    out
}

/// Every permutation of the interior cities by Heap's algorithm; returns the
/// smallest open-path cost from city 0 to the last city.
pub fn exhaustive_tour_cost(cost: &dyn Fn(usize, usize) -> f64, n: usize) -> f64 {
    let mut interior: Vec<usize> = (1..n - 1).collect();
    let eval = |v: &[usize]| {
        let mut c = 0.0;
        let mut prev = 0;
        for &x in v {
            c += cost(prev, x);
            prev = x;
        }
        c + cost(prev, n - 1)
    };
    let k = interior.len();
    let mut best = eval(&interior);
    let mut counters = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if counters[i] < i {
            if i % 2 == 0 {
                interior.swap(0, i);
            } else {
                interior.swap(counters[i], i);
            }
            best = best.min(eval(&interior));
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    best
}

/// Random grid of `size x size` unit cells with `blocked_frac` of them as
/// obstacles, returned with the matching obstacle list.
pub fn random_grid<R: Rng>(rng: &mut R, size: usize, blocked_frac: f64) -> (GridMap, Vec<Obstacle>) {
    let mut obstacles = Vec::new();
    for r in 0..size {
        for c in 0..size {
            if rng.random::<f64>() < blocked_frac {
                obstacles.push(Obstacle::new(c as f64, r as f64, c as f64 + 1.0, r as f64 + 1.0));
            }
        }
    }
    let env = Environment {
        width: size as f64,
        height: size as f64,
        obstacles: obstacles.clone(),
        goal: Vec2::new(size as f64 - 0.5, size as f64 - 0.5),
        goal_radius: 1.0,
    };
    (rasterize(&env, 1.0).expect("valid grid"), obstacles)
}

pub fn random_free_cell<R: Rng>(rng: &mut R, grid: &GridMap) -> Cell {
    loop {
        let c = Cell::new(rng.random_range(0..grid.cols), rng.random_range(0..grid.rows));
        if !grid.blocked[c.row * grid.cols + c.col] {
            return c;
        }
    }
}

/// Plain Dijkstra over the same move model the planner uses: 8-connected,
/// blocked cells impassable, diagonals need both side cells free, each step
/// costs `a1 * length + a2` when it enters a threatened cell.
pub fn dijkstra(grid: &GridMap, start: Cell, goal: Cell, a1: f64, a2: f64) -> Option<f64> {
    let (cols, rows) = (grid.cols as i64, grid.rows as i64);
    let idx = |c: i64, r: i64| (r * cols + c) as usize;
    let free = |c: i64, r: i64| c >= 0 && r >= 0 && c < cols && r < rows && !grid.blocked[idx(c, r)];
    let n = grid.cols * grid.rows;
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[idx(start.col as i64, start.row as i64)] = 0.0;
    // O(V^2) selection keeps this oracle free of any shared priority-queue code
    loop {
        let mut u = None;
        let mut best = f64::INFINITY;
        for (i, &d) in dist.iter().enumerate() {
            if !done[i] && d < best {
                best = d;
                u = Some(i);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        let (uc, ur) = ((u % grid.cols) as i64, (u / grid.cols) as i64);
        if uc == goal.col as i64 && ur == goal.row as i64 {
            return Some(best);
        }
        for dc in -1..=1i64 {
            for dr in -1..=1i64 {
                if dc == 0 && dr == 0 {
                    continue;
                }
                let (vc, vr) = (uc + dc, ur + dr);
                if !free(vc, vr) {
                    continue;
                }
                let diagonal = dc != 0 && dr != 0;
                if diagonal && !(free(vc, ur) && free(uc, vr)) {
                    continue;
                }
                let len = if diagonal { 2f64.sqrt() } else { 1.0 } * grid.cell_size;
                let v = idx(vc, vr);
                let step = a1 * len + if grid.threat[v] { a2 } else { 0.0 };
                if best + step < dist[v] {
                    dist[v] = best + step;
                }
            }
        }
    }
    None
}

/// True when some sample along `a -> b` lies strictly inside an obstacle.
pub fn sampled_collision(a: Vec2, b: Vec2, obstacles: &[Obstacle]) -> bool {
    let steps = ((a.dist(b) / 1e-3).ceil() as usize).max(1);
    (0..=steps).any(|k| {
        let t = k as f64 / steps as f64;
        let p = a + (b - a) * t;
        obstacles.iter().any(|o| p.x > o.xmin && p.x < o.xmax && p.y > o.ymin && p.y < o.ymax)
    })
}

/// Exact two-sided rank-sum p-value for untied samples, from the counting
/// recurrence `f(u; m, n) = f(u - n; m - 1, n) + f(u; m, n - 1)`.
pub fn rank_sum_exact_untied(a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = (a.len(), b.len());
    let u: usize = a.iter().map(|x| b.iter().filter(|y| *y < x).count()).sum();
    let max_u = m * n;
    // table[m][n][u]
    let mut f = vec![vec![vec![0f64; max_u + 1]; n + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=n {
            if i == 0 || j == 0 {
                f[i][j][0] = 1.0;
                continue;
            }
            for v in 0..=i * j {
                let take = if v >= j { f[i - 1][j][v - j] } else { 0.0 };
                let skip = if v <= i * (j - 1) { f[i][j - 1][v] } else { 0.0 };
                f[i][j][v] = take + skip;
            }
        }
    }
    let total: f64 = f[m][n].iter().sum();
    let lower: f64 = f[m][n][..=u.min(max_u - u)].iter().sum();
    (2.0 * lower / total).min(1.0)
}
