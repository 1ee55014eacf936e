//! Sequencing sub-swarms as a fixed-endpoint travelling salesperson problem.
//!
//! Single dog: cities are `[dog, lcm_1 .. lcm_Q, goal]`, the tour starts at
//! the dog and ends at the goal. Two dogs: `[dog_1, lcm_1 .. lcm_Q, goal,
//! dog_2]`; the tour starts at dog 1, ends at dog 2, and cutting it at the
//! goal yields one route per dog.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Largest interior city count accepted by [`brute_force_tour`].
pub const BRUTE_FORCE_MAX_INTERIOR: usize = 10;

/// Heuristic desirability `1/C` is capped here so zero-cost edges stay finite.
pub const ETA_CEILING: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    pub city_pos: Vec<Vec2>,
    /// Row-major `n x n` symmetric cost matrix with zero diagonal.
    pub cost: Vec<f64>,
    pub n_dogs: usize,
    /// Number of sub-swarms.
    pub q: usize,
}

impl TspInstance {
    pub fn dimension(&self) -> usize {
        self.city_pos.len()
    }

    pub fn start(&self) -> usize {
        0
    }

    pub fn end(&self) -> usize {
        self.dimension() - 1
    }

    pub fn goal_index(&self) -> usize {
        self.q + 1
    }

    pub fn c(&self, a: usize, b: usize) -> f64 {
        self.cost[a * self.dimension() + b]
    }

    /// Builds an instance from explicit data, checking every invariant.
    pub fn from_parts(city_pos: Vec<Vec2>, cost: Vec<f64>, n_dogs: usize) -> Result<Self> {
        let n = city_pos.len();
        if !(n_dogs == 1 || n_dogs == 2) {
            return Err(Error::InvalidInstance(format!("n_dogs must be 1 or 2, got {n_dogs}")));
        }
        if n < 2 + n_dogs {
            return Err(Error::InvalidInstance(format!(
                "{n} cities leave no sub-swarm to herd with {n_dogs} dog(s)"
            )));
        }
        if cost.len() != n * n {
            return Err(Error::InvalidInstance(format!("cost matrix has {} entries, expected {}", cost.len(), n * n)));
        }
        for a in 0..n {
            if cost[a * n + a] != 0.0 {
                return Err(Error::InvalidInstance(format!("non-zero diagonal at {a}")));
            }
            for b in 0..n {
                let v = cost[a * n + b];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInstance(format!("bad cost {v} at ({a},{b})")));
                }
                if v != cost[b * n + a] {
                    return Err(Error::InvalidInstance(format!("asymmetric cost at ({a},{b})")));
                }
            }
        }
        Ok(Self { q: n - 1 - n_dogs, city_pos, cost, n_dogs })
    }

    fn from_cities<F>(city_pos: Vec<Vec2>, n_dogs: usize, mut cost_fn: F) -> Result<Self>
    where
        F: FnMut(Vec2, Vec2) -> Option<f64>,
    {
        let n = city_pos.len();
        let mut cost = vec![0.0; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let c = cost_fn(city_pos[a], city_pos[b]).ok_or(Error::UnreachableCities { from: a, to: b })?;
                cost[a * n + b] = c;
                cost[b * n + a] = c;
            }
        }
        Self::from_parts(city_pos, cost, n_dogs)
    }
}

pub fn euclidean(a: Vec2, b: Vec2) -> Option<f64> {
    Some(a.dist(b))
}

/// `cost_fn` returns `None` for an unreachable pair.
pub fn build_single_instance<F>(dog: Vec2, lcms: &[Vec2], goal: Vec2, cost_fn: F) -> Result<TspInstance>
where
    F: FnMut(Vec2, Vec2) -> Option<f64>,
{
    if lcms.is_empty() {
        return Err(Error::InvalidInstance("no sub-swarms to herd".into()));
    }
    let mut cities = Vec::with_capacity(lcms.len() + 2);
    cities.push(dog);
    cities.extend_from_slice(lcms);
    cities.push(goal);
    TspInstance::from_cities(cities, 1, cost_fn)
}

pub fn build_bi_instance<F>(dog1: Vec2, dog2: Vec2, lcms: &[Vec2], goal: Vec2, cost_fn: F) -> Result<TspInstance>
where
    F: FnMut(Vec2, Vec2) -> Option<f64>,
{
    if lcms.is_empty() {
        return Err(Error::InvalidInstance("no sub-swarms to herd".into()));
    }
    let mut cities = Vec::with_capacity(lcms.len() + 3);
    cities.push(dog1);
    cities.extend_from_slice(lcms);
    cities.push(goal);
    cities.push(dog2);
    TspInstance::from_cities(cities, 2, cost_fn)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub order: Vec<usize>,
    pub cost: f64,
}

fn check_order(inst: &TspInstance, order: &[usize]) -> Result<()> {
    let n = inst.dimension();
    if order.len() != n {
        return Err(Error::InvalidTour(format!("{} cities in tour, expected {n}", order.len())));
    }
    if order[0] != inst.start() || order[n - 1] != inst.end() {
        return Err(Error::InvalidTour("tour must start at city 0 and end at the last city".into()));
    }
    let mut seen = vec![false; n];
    for &c in order {
        if c >= n || seen[c] {
            return Err(Error::InvalidTour(format!("city {c} repeated or out of range")));
        }
        seen[c] = true;
    }
    Ok(())
}

fn order_cost(inst: &TspInstance, order: &[usize]) -> f64 {
    order.windows(2).map(|w| inst.c(w[0], w[1])).sum()
}

/// Sum of consecutive edge costs of a valid endpoint-fixed permutation.
pub fn tour_cost(inst: &TspInstance, order: &[usize]) -> Result<f64> {
    check_order(inst, order)?;
    Ok(order_cost(inst, order))
}

/// Exhaustive search, returning the lexicographically smallest optimal order.
pub fn brute_force_tour(inst: &TspInstance) -> Result<Tour> {
    let n = inst.dimension();
    let interior_count = n - 2;
    if interior_count > BRUTE_FORCE_MAX_INTERIOR {
        return Err(Error::InstanceTooLarge { interior: interior_count, max: BRUTE_FORCE_MAX_INTERIOR });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = Tour { order: order.clone(), cost: order_cost(inst, &order) };
    while next_permutation(&mut order[1..n - 1]) {
        let c = order_cost(inst, &order);
        if c < best.cost {
            best = Tour { order: order.clone(), cost: c };
        }
    }
    Ok(best)
}

/// Rearranges into the next lexicographic permutation; false once exhausted.
fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let Some(i) = (0..xs.len() - 1).rev().find(|&i| xs[i] < xs[i + 1]) else {
        return false;
    };
    let j = (i + 1..xs.len()).rev().find(|&j| xs[j] > xs[i]).expect("pivot has a successor");
    xs.swap(i, j);
    xs[i + 1..].reverse();
    true
}

/// Cuts a two-dog tour at the goal. Both routes run from a dog to the goal.
pub fn split_bi_tour(order: &[usize], q: usize) -> (Vec<usize>, Vec<usize>) {
    let goal = q + 1;
    let at = order.iter().position(|&c| c == goal).expect("goal city must be on the tour");
    let first = order[..=at].to_vec();
    let mut second = order[at..].to_vec();
    second.reverse();
    (first, second)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MmasParams {
    pub iterations: usize,
    /// Ants per iteration; `None` means one per city.
    pub colony_size: Option<usize>,
    /// Pheromone exponent.
    pub alpha: f64,
    /// Heuristic exponent.
    pub gamma: f64,
    /// Fraction of pheromone lost per iteration.
    pub evaporation: f64,
    /// `None` means `1 / dimension`.
    pub tau_min: Option<f64>,
    pub tau_max: f64,
}

impl Default for MmasParams {
    fn default() -> Self {
        Self {
            iterations: 600,
            colony_size: None,
            alpha: 1.0,
            gamma: 2.0,
            evaporation: 0.02,
            tau_min: None,
            tau_max: 1.0,
        }
    }
}

/// Iteration state of a MAX-MIN ant system run.
pub struct MmasSolver<'a> {
    inst: &'a TspInstance,
    params: MmasParams,
    tau: Vec<f64>,
    eta_pow: Vec<f64>,
    tau_min: f64,
    ants: usize,
    best: Option<Tour>,
    history: Vec<f64>,
}

impl<'a> MmasSolver<'a> {
    pub fn new(inst: &'a TspInstance, params: MmasParams) -> Result<Self> {
        let n = inst.dimension();
        let tau_min = params.tau_min.unwrap_or(1.0 / n as f64);
        if !(params.evaporation > 0.0 && params.evaporation < 1.0) {
            return Err(Error::InvalidParameter(format!("evaporation must be in (0,1), got {}", params.evaporation)));
        }
        if !(tau_min > 0.0 && tau_min <= params.tau_max) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < tau_min <= tau_max, got {tau_min} and {}",
                params.tau_max
            )));
        }
        let ants = params.colony_size.unwrap_or(n);
        if ants == 0 {
            return Err(Error::InvalidParameter("colony must hold at least one ant".into()));
        }
        let eta_pow = inst
            .cost
            .iter()
            .map(|&c| {
                let eta = if c > 0.0 { (1.0 / c).min(ETA_CEILING) } else { ETA_CEILING };
                eta.powf(params.gamma)
            })
            .collect();
        Ok(Self {
            inst,
            params,
            tau: vec![params.tau_max; n * n],
            eta_pow,
            tau_min,
            ants,
            best: None,
            history: Vec::with_capacity(params.iterations),
        })
    }

    pub fn pheromone(&self, a: usize, b: usize) -> f64 {
        self.tau[a * self.inst.dimension() + b]
    }

    pub fn pheromones(&self) -> &[f64] {
        &self.tau
    }

    pub fn tau_bounds(&self) -> (f64, f64) {
        (self.tau_min, self.params.tau_max)
    }

    pub fn best(&self) -> Option<&Tour> {
        self.best.as_ref()
    }

    /// Best-so-far cost after each completed iteration.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Selection probabilities from `from` over `candidates`.
    pub fn transition_probabilities(&self, from: usize, candidates: &[usize]) -> Vec<f64> {
        let w: Vec<f64> = candidates.iter().map(|&c| self.weight(from, c)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 && total.is_finite() {
            w.iter().map(|x| x / total).collect()
        } else {
            vec![1.0 / candidates.len() as f64; candidates.len()]
        }
    }

    fn weight(&self, a: usize, b: usize) -> f64 {
        let i = a * self.inst.dimension() + b;
        self.tau[i].powf(self.params.alpha) * self.eta_pow[i]
    }

    fn construct<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let n = self.inst.dimension();
        let mut order = Vec::with_capacity(n);
        order.push(0);
        let mut open: Vec<usize> = (1..n - 1).collect();
        let mut weights = Vec::with_capacity(open.len());
        let mut current = 0;
        while !open.is_empty() {
            weights.clear();
            weights.extend(open.iter().map(|&c| self.weight(current, c)));
            let total: f64 = weights.iter().sum();
            let pick = if total > 0.0 && total.is_finite() {
                let mut r = rng.random::<f64>() * total;
                let mut k = open.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if r < *w {
                        k = i;
                        break;
                    }
                    r -= w;
                }
                k
            } else {
                rng.random_range(0..open.len())
            };
            current = open.remove(pick);
            order.push(current);
        }
        order.push(n - 1);
        order
    }

    /// Runs one iteration: build every ant's tour, then the best ant of the
    /// iteration reinforces its edges while all trails evaporate and get
    /// clamped. Returns the best-so-far cost.
    pub fn iterate<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let mut iter_best: Option<Tour> = None;
        for _ in 0..self.ants {
            let order = self.construct(rng);
            let cost = order_cost(self.inst, &order);
            if iter_best.as_ref().is_none_or(|b| cost < b.cost) {
                iter_best = Some(Tour { order, cost });
            }
        }
        let ib = iter_best.expect("at least one ant");

        let n = self.inst.dimension();
        let keep = 1.0 - self.params.evaporation;
        self.tau.iter_mut().for_each(|t| *t *= keep);
        let deposit = 1.0 / ib.cost;
        for w in ib.order.windows(2) {
            self.tau[w[0] * n + w[1]] += deposit;
            self.tau[w[1] * n + w[0]] += deposit;
        }
        let (lo, hi) = (self.tau_min, self.params.tau_max);
        self.tau.iter_mut().for_each(|t| *t = t.clamp(lo, hi));

        if self.best.as_ref().is_none_or(|b| ib.cost < b.cost) {
            self.best = Some(ib);
        }
        let c = self.best.as_ref().map(|b| b.cost).expect("set above");
        self.history.push(c);
        c
    }

    pub fn run<R: Rng + ?Sized>(mut self, rng: &mut R) -> MmasOutcome {
        for _ in 0..self.params.iterations.max(1) {
            self.iterate(rng);
        }
        MmasOutcome { best: self.best.expect("ran at least once"), history: self.history }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmasOutcome {
    pub best: Tour,
    /// Best-so-far cost per iteration.
    pub history: Vec<f64>,
}

pub fn mmas_solve<R: Rng + ?Sized>(inst: &TspInstance, params: &MmasParams, rng: &mut R) -> Result<MmasOutcome> {
    Ok(MmasSolver::new(inst, *params)?.run(rng))
}

/// On-disk instance description for the `solve-tsp` command.
///
/// ```toml
/// n_dogs = 1
/// cities = [[0.0, 0.0], [3.0, 4.0], [3.0, 8.0]]
/// # cost = [[0.0, 5.0, 8.5], ...]   optional, Euclidean when absent
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default = "one")]
    pub n_dogs: usize,
    pub cities: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Vec<Vec<f64>>>,
}

fn one() -> usize {
    1
}

impl InstanceFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path, e))
    }

    pub fn to_instance(&self) -> Result<TspInstance> {
        let pos: Vec<Vec2> = self.cities.iter().map(|c| Vec2::new(c[0], c[1])).collect();
        match &self.cost {
            Some(rows) => {
                if rows.len() != pos.len() || rows.iter().any(|r| r.len() != pos.len()) {
                    return Err(Error::InvalidInstance("cost matrix shape does not match the city list".into()));
                }
                TspInstance::from_parts(pos, rows.concat(), self.n_dogs)
            }
            None => TspInstance::from_cities(pos, self.n_dogs, euclidean),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn single_instance_costs() {
        let inst = build_single_instance(v(0.0, 0.0), &[v(3.0, 4.0)], v(3.0, 8.0), euclidean).unwrap();
        assert_eq!(inst.dimension(), 3);
        assert_eq!(inst.c(0, 1), 5.0);
        assert_eq!(inst.c(1, 2), 4.0);
        assert_eq!(tour_cost(&inst, &[0, 1, 2]).unwrap(), 9.0);
        let t = brute_force_tour(&inst).unwrap();
        assert_eq!((t.order, t.cost), (vec![0, 1, 2], 9.0));
    }

    #[test]
    fn empty_lcm_list_rejected() {
        assert!(build_single_instance(v(0.0, 0.0), &[], v(1.0, 1.0), euclidean).is_err());
        assert!(build_bi_instance(v(0.0, 0.0), v(1.0, 0.0), &[], v(1.0, 1.0), euclidean).is_err());
    }

    #[test]
    fn unreachable_pair_is_named() {
        let cut = (v(1.0, 0.0), v(2.0, 0.0));
        let err = build_single_instance(v(0.0, 0.0), &[cut.0], cut.1, |a, b| (a, b).ne(&cut).then(|| a.dist(b)))
            .unwrap_err();
        assert!(matches!(err, Error::UnreachableCities { from: 1, to: 2 }), "{err}");
    }

    #[test]
    fn bi_instance_layout() {
        let lcms = [v(10.0, 0.0), v(20.0, 0.0), v(30.0, 0.0)];
        let inst = build_bi_instance(v(0.0, 0.0), v(0.0, 0.0), &lcms, v(50.0, 50.0), euclidean).unwrap();
        assert_eq!(inst.dimension(), 6);
        assert_eq!((inst.start(), inst.end(), inst.goal_index()), (0, 5, 4));
        assert_eq!(inst.c(0, 5), 0.0);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(inst.c(a, b), inst.c(b, a));
            }
        }
    }

    #[test]
    fn invalid_tours_rejected() {
        let inst = build_single_instance(v(0.0, 0.0), &[v(1.0, 0.0), v(2.0, 0.0)], v(3.0, 0.0), euclidean).unwrap();
        assert!(tour_cost(&inst, &[0, 1, 3]).is_err());
        assert!(tour_cost(&inst, &[1, 0, 2, 3]).is_err());
        assert!(tour_cost(&inst, &[0, 1, 1, 3]).is_err());
        assert!(tour_cost(&inst, &[0, 2, 1, 3]).is_ok());
    }

    #[test]
    fn reversed_interior_keeps_cost_on_mirrored_square() {
        // start and end on the same side of a unit square: start (0,0), end (1,0)
        let inst = TspInstance::from_cities(
            vec![v(0.0, 0.0), v(0.0, 1.0), v(1.0, 1.0), v(1.0, 0.0)],
            1,
            euclidean,
        )
        .unwrap();
        let fwd = tour_cost(&inst, &[0, 1, 2, 3]).unwrap();
        assert_eq!(fwd, 3.0);
        let cross = tour_cost(&inst, &[0, 2, 1, 3]).unwrap();
        assert!((cross - (1.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn brute_force_line_is_left_to_right() {
        let lcms = [v(30.0, 0.0), v(10.0, 0.0), v(40.0, 0.0), v(20.0, 0.0)];
        let inst = build_single_instance(v(0.0, 0.0), &lcms, v(50.0, 0.0), euclidean).unwrap();
        let t = brute_force_tour(&inst).unwrap();
        assert_eq!(t.order, vec![0, 2, 4, 1, 3, 5]);
        assert_eq!(t.cost, 50.0);
    }

    #[test]
    fn brute_force_tie_break_is_lexicographic() {
        let n = 5;
        let mut cost = vec![1.0; n * n];
        (0..n).for_each(|i| cost[i * n + i] = 0.0);
        let inst = TspInstance::from_parts(vec![Vec2::ZERO; n], cost, 1).unwrap();
        assert_eq!(brute_force_tour(&inst).unwrap().order, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn brute_force_size_limit() {
        let lcms: Vec<Vec2> = (0..11).map(|i| v(i as f64, 1.0)).collect();
        let inst = build_single_instance(v(0.0, 0.0), &lcms, v(20.0, 0.0), euclidean).unwrap();
        assert!(matches!(brute_force_tour(&inst), Err(Error::InstanceTooLarge { interior: 11, .. })));
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_bi_tour(&[0, 2, 4, 3, 1, 5], 3), (vec![0, 2, 4], vec![5, 1, 3, 4]));
        assert_eq!(split_bi_tour(&[0, 4, 1, 2, 3, 5], 3), (vec![0, 4], vec![5, 3, 2, 1, 4]));
    }

    #[test]
    fn equal_weights_split_evenly_and_heuristic_ratio_squares() {
        // city 0 at origin, 1 and 2 equidistant, 3 at twice the distance of 1
        let inst = TspInstance::from_cities(
            vec![v(0.0, 0.0), v(1.0, 0.0), v(0.0, 1.0), v(2.0, 0.0), v(9.0, 9.0)],
            1,
            euclidean,
        )
        .unwrap();
        let s = MmasSolver::new(&inst, MmasParams::default()).unwrap();
        let p = s.transition_probabilities(0, &[1, 2]);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = s.transition_probabilities(0, &[1, 3]);
        assert!((p[0] - 0.8).abs() < 1e-12 && (p[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn zero_cost_edges_stay_finite() {
        let inst = build_single_instance(v(0.0, 0.0), &[v(0.0, 0.0), v(5.0, 5.0)], v(5.0, 5.0), euclidean).unwrap();
        let out = mmas_solve(&inst, &MmasParams { iterations: 20, ..Default::default() }, &mut stream(1, Stream::Sequencing)).unwrap();
        assert!(out.best.cost.is_finite());
        assert!((out.best.cost - 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let inst = build_single_instance(v(0.0, 0.0), &[v(1.0, 0.0)], v(2.0, 0.0), euclidean).unwrap();
        let bad = MmasParams { evaporation: 1.0, ..Default::default() };
        assert!(MmasSolver::new(&inst, bad).is_err());
        let bad = MmasParams { tau_min: Some(2.0), ..Default::default() };
        assert!(MmasSolver::new(&inst, bad).is_err());
    }

    #[test]
    fn instance_file_parses() {
        let f: InstanceFile = toml::from_str("cities = [[0.0, 0.0], [3.0, 4.0], [3.0, 8.0]]").unwrap();
        let inst = f.to_instance().unwrap();
        assert_eq!((inst.n_dogs, inst.q), (1, 1));
        assert_eq!(inst.c(0, 1), 5.0);
        let f: InstanceFile =
            toml::from_str("cities = [[0.0,0.0],[1.0,0.0],[2.0,0.0]]\ncost = [[0.0,1.0,2.0],[1.0,0.0,7.0],[2.0,7.0,0.0]]")
                .unwrap();
        assert_eq!(f.to_instance().unwrap().c(1, 2), 7.0);
    }
}
