// SPDX-License-Identifier: Apache-2.0

use chipvec_dse::objectives::{placement_surrogate, zdt1};
use chipvec_dse::{
    crowding_distance, hypervolume_2d, nondominated_sort, run, suggest, trials_hypervolume, Dimension, MotpeConfig,
    Objective, ParamSpace, ParamValue, Params, Sampler, TrialRecord,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reals(p: &Params) -> Vec<f64> {
    p.iter().map(|v| v.real().unwrap()).collect()
}

fn zdt1_run(seed: u64, sampler: Sampler) -> Vec<TrialRecord> {
    let space = ParamSpace::unit_cube(5);
    let objs = [Objective::minimize("f1"), Objective::minimize("f2")];
    run(&space, &objs, |p| Ok(zdt1(&reals(p))), 100, seed, sampler, &MotpeConfig::default()).unwrap().history
}

#[test]
fn motpe_beats_random_search_on_zdt1() {
    let reference = [1.1, 1.1];
    let mut wins = 0;
    for seed in 0..10 {
        let m = trials_hypervolume(&zdt1_run(seed, Sampler::Motpe), reference).unwrap();
        let r = trials_hypervolume(&zdt1_run(seed, Sampler::Random), reference).unwrap();
        eprintln!("seed {seed}: motpe {m:.4} random {r:.4}");
        wins += usize::from(m >= r);
    }
    assert!(wins >= 8, "{wins}/10");
}

#[test]
fn one_dimensional_optimum_is_found() {
    let space = ParamSpace::new(vec![Dimension::uniform("x", 0.0, 1.0)]).unwrap();
    let objs = [Objective::minimize("f")];
    let mut hits = 0;
    for seed in 0..10 {
        let h = run(&space, &objs, |p| Ok(vec![(reals(p)[0] - 0.3).powi(2)]), 200, seed, Sampler::Motpe, &MotpeConfig::default())
            .unwrap()
            .history;
        let near = h[150..].iter().filter(|t| (reals(&t.params)[0] - 0.3).abs() < 0.1).count();
        eprintln!("seed {seed}: {near}/50 near the optimum");
        hits += near;
    }
    // uniform sampling would land there 20% of the time
    assert!(hits as f64 >= 0.8 * 500.0, "{hits}/500");
}

#[test]
fn empty_budget_and_determinism() {
    let space = ParamSpace::placement();
    let objs = [Objective::minimize("wl"), Objective::minimize("overflow")];
    let cfg = MotpeConfig::default();
    let f = |p: &Params| Ok(placement_surrogate(&ParamSpace::placement(), p));
    let r = run(&space, &objs, f, 0, 1, Sampler::Motpe, &cfg).unwrap();
    assert!(r.history.is_empty() && r.front.is_empty());
    let a = run(&space, &objs, f, 40, 9, Sampler::Motpe, &cfg).unwrap();
    let b = run(&space, &objs, f, 40, 9, Sampler::Motpe, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.history.len(), 40);
    assert!(a.history.iter().all(|t| space.contains(&t.params)));
}

#[test]
fn failed_trials_count_against_budget() {
    let space = ParamSpace::unit_cube(2);
    let objs = [Objective::minimize("f")];
    let r = run(
        &space,
        &objs,
        |p| {
            let x = reals(p);
            if x[0] < 0.3 {
                Err("diverged".into())
            } else if x[0] < 0.4 {
                Ok(vec![f64::NAN])
            } else {
                Ok(vec![x[0] + x[1]])
            }
        },
        60,
        2,
        Sampler::Motpe,
        &MotpeConfig::default(),
    )
    .unwrap();
    assert_eq!(r.history.len(), 60);
    let failed: Vec<_> = r.history.iter().filter(|t| !t.completed()).collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|t| t.rank.is_none() && t.objectives.is_empty()));
    assert!(r.front.iter().all(|t| t.completed()));
}

#[test]
fn running_hypervolume_never_decreases() {
    let h = zdt1_run(4, Sampler::Motpe);
    let mut last = 0.0;
    for k in 1..=h.len() {
        let v = trials_hypervolume(&h[..k], [1.1, 1.1]).unwrap();
        assert!(v >= last);
        last = v;
    }
}

fn oracle_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let dom = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y);
    let mut rank = vec![usize::MAX; points.len()];
    let mut r = 0;
    while rank.contains(&usize::MAX) {
        let left: Vec<usize> = (0..points.len()).filter(|&i| rank[i] == usize::MAX).collect();
        let layer: Vec<usize> =
            left.iter().copied().filter(|&i| !left.iter().any(|&j| dom(&points[j], &points[i]))).collect();
        for i in layer {
            rank[i] = r;
        }
        r += 1;
    }
    rank
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    // coarse values make ties and duplicates common
    (0..n).map(|_| (0..m).map(|_| rng.gen_range(0..8) as f64).collect()).collect()
}

#[test]
fn nondominated_sort_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..1000 {
        let pts = random_points(&mut rng, 1 + k % 60, 1 + k % 4);
        assert_eq!(nondominated_sort(&pts).unwrap(), oracle_ranks(&pts));
    }
}

#[test]
fn hypervolume_matches_grid_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let front: Vec<[f64; 2]> = (0..rng.gen_range(1..8)).map(|_| [rng.gen_range(0..40) as f64 / 40.0, rng.gen_range(0..40) as f64 / 40.0]).collect();
        // cells of a 400 x 400 grid over the unit box, counted when dominated
        let n = 400;
        let mut covered = 0usize;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                covered += usize::from(front.iter().any(|p| p[0] <= x && p[1] <= y));
            }
        }
        let grid = covered as f64 / (n * n) as f64;
        assert!((hypervolume_2d(&front, [1.0, 1.0]).unwrap() - grid).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn suggestions_respect_random_spaces(
        bounds in proptest::collection::vec((-1e3f64..1e3, 1e-3f64..1e3), 1..5),
        cats in proptest::collection::vec(1usize..6, 0..3),
        seed in any::<u64>(),
    ) {
        let mut dims: Vec<Dimension> =
            bounds.iter().enumerate().map(|(i, (lo, w))| Dimension::uniform(&format!("u{i}"), *lo, lo + w)).collect();
        dims.extend(cats.iter().enumerate().map(|(i, &k)| Dimension::categorical(&format!("c{i}"), (0..k).map(serde_json::Value::from).collect())));
        let space = ParamSpace::new(dims).unwrap();
        let objs = [Objective::minimize("a"), Objective::maximize("b")];
        let f = |p: &Params| {
            let s: f64 = p.iter().map(|v| match v { ParamValue::Real(x) => *x, ParamValue::Choice(k) => *k as f64 }).sum();
            Ok(vec![s.sin(), s.cos()])
        };
        let r = run(&space, &objs, f, 30, seed, Sampler::Motpe, &MotpeConfig { n_startup: 5, ..MotpeConfig::default() }).unwrap();
        for t in &r.history {
            prop_assert!(space.contains(&t.params));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(space.contains(&suggest(&space, &[], &objs, &MotpeConfig::default(), &mut rng)));
    }

    #[test]
    fn ranks_and_crowding_ignore_positive_scaling(seed in any::<u64>(), scale in 1e-3f64..1e3, which in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_points(&mut rng, 40, 3);
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| {
            let mut q = p.clone();
            q[which] *= scale;
            q
        }).collect();
        prop_assert_eq!(nondominated_sort(&pts).unwrap(), nondominated_sort(&scaled).unwrap());
        let (a, b) = (crowding_distance(&pts), crowding_distance(&scaled));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x == y || (x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }
}
