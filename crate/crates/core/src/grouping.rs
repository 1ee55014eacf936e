//! Splits a dispersed flock into sub-swarms.
//!
//! Two sheep are linked when they are at most the cohesion range apart and a
//! sub-swarm is a connected component of that graph. Components are reported
//! in ascending order of their closest member's distance to sheep 0.

use crate::geometry::Vec2;

#[derive(Debug, Clone, PartialEq)]
pub struct SubSwarm {
    /// Sorted sheep indices.
    pub members: Vec<usize>,
    /// Local centre of mass.
    pub lcm: Vec2,
}

impl SubSwarm {
    pub fn from_members(mut members: Vec<usize>, positions: &[Vec2]) -> Self {
        members.sort_unstable();
        members.dedup();
        let lcm = compute_lcm(&members, positions);
        Self { members, lcm }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn refresh_lcm(&mut self, positions: &[Vec2]) {
        self.lcm = compute_lcm(&self.members, positions);
    }

    /// Union of two sub-swarms.
    pub fn absorb(&mut self, other: &SubSwarm, positions: &[Vec2]) {
        self.members.extend_from_slice(&other.members);
        self.members.sort_unstable();
        self.members.dedup();
        self.refresh_lcm(positions);
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

pub fn group_sheep(positions: &[Vec2], cohesion_range: f64) -> Vec<SubSwarm> {
    let n = positions.len();
    if n == 0 {
        return Vec::new();
    }
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if positions[i].dist(positions[j]) <= cohesion_range {
                uf.union(i, j);
            }
        }
    }

    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = uf.find(i);
        by_root[r].push(i);
    }
    let anchor = positions[0];
    let mut groups: Vec<(f64, usize, Vec<usize>)> = by_root
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|m| {
            let closest = m.iter().map(|&i| positions[i].dist(anchor)).fold(f64::INFINITY, f64::min);
            (closest, m[0], m)
        })
        .collect();
    groups.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    groups
        .into_iter()
        .map(|(_, _, m)| SubSwarm::from_members(m, positions))
        .collect()
}

/// Mean position of the members. Panics on an empty member list.
pub fn compute_lcm(members: &[usize], positions: &[Vec2]) -> Vec2 {
    Vec2::mean(members.iter().map(|&i| positions[i])).expect("sub-swarm must be non-empty")
}

/// Smallest pairwise distance between members of two groups.
pub fn min_separation(a: &[usize], b: &[usize], positions: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for &i in a {
        for &j in b {
            best = best.min(positions[i].dist(positions[j]));
        }
    }
    best
}
