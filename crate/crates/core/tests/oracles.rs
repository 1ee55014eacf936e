mod common;

use std::collections::BTreeSet;

use herdplan_core::bench::{rank_sum_test, summarize, RunMetrics};
use herdplan_core::geometry::{segment_collides, Vec2};
use herdplan_core::grouping::group_sheep;
use herdplan_core::planner::{astar, path_length, plan_path, prune_path, CostWeights, ThreatField};
use herdplan_core::rng::{self, Stream};
use herdplan_core::tsp::{brute_force_tour, build_bi_instance, build_single_instance, euclidean, split_bi_tour};
use rand::Rng;

#[test]
fn grouping_matches_bfs() {
    let mut rng = rng::stream(11, Stream::Bench);
    for _ in 0..50 {
        let n = rng.random_range(1..=100);
        let pts = common::random_flock(&mut rng, n, 4.0);
        let got: BTreeSet<Vec<usize>> = group_sheep(&pts, 4.0).into_iter().map(|g| g.members).collect();
        assert_eq!(got, common::bfs_components(&pts, 4.0));
    }
}

#[test]
fn brute_force_agrees_with_heap_permutations() {
    let mut rng = rng::stream(12, Stream::Bench);
    for k in 1..=6 {
        let pt = |r: &mut rng::SimRng| Vec2::new(r.random_range(0.0..100.0), r.random_range(0.0..100.0));
        let dog = pt(&mut rng);
        let goal = pt(&mut rng);
        let lcms: Vec<Vec2> = (0..k).map(|_| pt(&mut rng)).collect();
        let inst = build_single_instance(dog, &lcms, goal, euclidean).unwrap();
        let best = brute_force_tour(&inst).unwrap();
        let oracle = common::exhaustive_tour_cost(&|a, b| inst.c(a, b), inst.dimension());
        assert!((best.cost - oracle).abs() <= 1e-9 * oracle.max(1.0), "{} vs {oracle}", best.cost);
    }
}

#[test]
fn bi_tour_splits_into_two_routes_ending_at_goal() {
    let lcms = [Vec2::new(10.0, 10.0), Vec2::new(80.0, 10.0), Vec2::new(20.0, 20.0)];
    let inst = build_bi_instance(Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0), &lcms, Vec2::new(50.0, 90.0), euclidean)
        .unwrap();
    let best = brute_force_tour(&inst).unwrap();
    let (a, b) = split_bi_tour(&best.order, inst.q);
    assert_eq!(a[0], 0);
    assert_eq!(b[0], inst.end());
    assert_eq!(*a.last().unwrap(), inst.goal_index());
    assert_eq!(*b.last().unwrap(), inst.goal_index());
    // the near-side swarms go to the near dog
    assert!(a.contains(&1) && a.contains(&3));
    assert!(b.contains(&2));
}

#[test]
fn astar_matches_dijkstra_small() {
    let mut rng = rng::stream(13, Stream::Bench);
    for _ in 0..20 {
        let (mut grid, obstacles) = common::random_grid(&mut rng, 20, 0.25);
        for t in grid.threat.iter_mut() {
            *t = rng.random::<f64>() < 0.2;
        }
        let s = common::random_free_cell(&mut rng, &grid);
        let g = common::random_free_cell(&mut rng, &grid);
        let w = CostWeights::new(1.0, rng.random_range(0.0..50.0)).unwrap();
        let oracle = common::dijkstra(&grid, s, g, w.length, w.threat);
        let got = astar(&grid, grid.centre(s), grid.centre(g), &w);
        match (oracle, got) {
            (Some(d), Ok(p)) => {
                assert!((p.search_cost - d).abs() <= 1e-9 * d.max(1.0));
                let pruned = prune_path(&p, &obstacles);
                assert!(pruned.length_cost <= p.length_cost + 1e-9);
                for seg in pruned.waypoints.windows(2) {
                    assert!(!common::sampled_collision(seg[0], seg[1], &obstacles));
                }
            }
            (None, Err(_)) => {}
            (d, p) => panic!("feasibility disagrees: oracle {d:?}, planner {:?}", p.map(|p| p.search_cost)),
        }
    }
}

#[test]
fn planned_path_avoids_obstacles_and_keeps_endpoints() {
    let mut rng = rng::stream(14, Stream::Bench);
    let (grid, obstacles) = common::random_grid(&mut rng, 30, 0.15);
    let field = ThreatField::from_sheep(&[Vec2::new(15.0, 15.0)], &[], 4.0);
    for _ in 0..10 {
        let s = grid.centre(common::random_free_cell(&mut rng, &grid)) + Vec2::new(0.2, -0.1);
        let g = grid.centre(common::random_free_cell(&mut rng, &grid)) + Vec2::new(-0.3, 0.25);
        let Ok(p) = plan_path(&grid, &obstacles, s, g, &CostWeights::default(), Some(&field)) else {
            continue;
        };
        assert_eq!(p.start(), s);
        assert_eq!(p.goal(), g);
        assert!((p.length_cost - path_length(&p.waypoints)).abs() < 1e-9);
        for seg in p.waypoints.windows(2) {
            assert!(!segment_collides(seg[0], seg[1], &obstacles, 0.0));
        }
    }
}

#[test]
fn rank_sum_matches_counting_recurrence() {
    let mut rng = rng::stream(15, Stream::Bench);
    for _ in 0..40 {
        let m = rng.random_range(1..=9);
        let n = rng.random_range(1..=(19 - m).min(10));
        // distinct values so the untied recurrence applies
        let mut vals: Vec<f64> = (0..m + n).map(|i| i as f64 + rng.random::<f64>() * 0.5).collect();
        for i in (1..vals.len()).rev() {
            vals.swap(i, rng.random_range(0..=i));
        }
        let (a, b) = vals.split_at(m);
        let p = rank_sum_test(a, b);
        let oracle = common::rank_sum_exact_untied(a, b);
        assert!((p - oracle).abs() < 1e-12, "m={m} n={n}: {p} vs {oracle}");
    }
}

#[test]
fn summary_matches_two_pass_statistics() {
    let mut rng = rng::stream(16, Stream::Bench);
    let metrics: Vec<RunMetrics> = (0..25)
        .map(|seed| {
            let steps = rng.random_range(100..900);
            let len = rng.random_range(50.0..500.0);
            RunMetrics {
                seed,
                success: rng.random::<f64>() < 0.8,
                steps,
                per_dog_path_length: vec![len],
                max_path_length: len,
                total_path_length: len,
            }
        })
        .collect();
    let s = summarize(&metrics);
    let ok: Vec<f64> = metrics.iter().filter(|m| m.success).map(|m| m.steps as f64).collect();
    let mean = ok.iter().sum::<f64>() / ok.len() as f64;
    let var = ok.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (ok.len() - 1) as f64;
    let st = s.steps.unwrap();
    assert!((st.mean - mean).abs() < 1e-9);
    assert!((st.std - var.sqrt()).abs() < 1e-9);
    assert!((s.sr - ok.len() as f64 / 25.0).abs() < 1e-15);
}
