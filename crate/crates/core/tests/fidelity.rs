// SPDX-License-Identifier: Apache-2.0

mod common;

use chipvec::design::{generate_synthetic, Design, SynthParams};
use chipvec::fidelity::{
    cell_density_map, compare, pearson, reconstruct, resample, DensityGrid, FidelityError, FidelityOptions,
};
use chipvec::geom::GcellGrid;
use chipvec::store::{load_bundle, save_bundle, Level};
use chipvec::vector::{analyze, VectorConfig};
use common::*;

fn synth(cells: usize, seed: u64) -> Design {
    generate_synthetic(&SynthParams::for_cells(cells).with_seed(seed)).unwrap()
}

#[test]
fn bundle_round_trip_is_exact() {
    let d = synth(2500, 7);
    let cfg = VectorConfig::default();
    let f = analyze(&d, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_bundle(dir.path(), &f, &Level::ALL).unwrap();
    let (loaded, _) = load_bundle(dir.path()).unwrap();
    let r = reconstruct(&loaded, d.tech.clone()).unwrap();
    assert_eq!(r, d);
    let rwl: i64 = r.nets.iter().flat_map(|n| &n.routing).map(|w| w.length()).sum();
    assert_eq!(rwl, f.design.total_rwl);
    let rep = compare(&d, &r, &cfg, FidelityOptions::default()).unwrap();
    for m in [rep.wirelength, rep.wns, rep.tns, rep.power] {
        assert_eq!(m.ratio, Some(1.0));
    }
    assert_eq!(rep.density_correlation, 1.0);
    assert_eq!(rep.violating_paths.0, rep.violating_paths.1);
    assert!(rep.passed());
}

#[test]
fn coarser_reconstruction_stays_correlated() {
    let cfg = VectorConfig::default();
    let opts = FidelityOptions { coarsen: 2, ..FidelityOptions::default() };
    for (cells, seed) in [(1000, 1), (4000, 2), (9000, 3)] {
        let d = synth(cells, seed);
        let r = reconstruct(&analyze(&d, &cfg).unwrap(), d.tech.clone()).unwrap();
        let rep = compare(&d, &r, &cfg, opts).unwrap();
        assert!(rep.density_correlation >= 0.95, "{cells} cells: {}", rep.density_correlation);
        assert!(rep.density_grids[1].0 * 2 >= rep.density_grids[0].0);
    }
}

#[test]
fn resampling_a_block_map_is_exact() {
    // a map constant on 2 x 2 blocks survives coarsening unchanged
    let fine = GcellGrid::covering(rect(0, 0, 80, 80), 10, 10).unwrap();
    let coarse = fine.coarsened(2).unwrap();
    let mut m = chipvec::geom::FeatureMap::zeros(4, 4);
    for k in 0..16 {
        m.values[k] = (k * 7 % 5) as f64 * 0.25;
    }
    let up = resample(&m, &coarse, &fine);
    let down = resample(&up, &fine, &coarse);
    assert_eq!(down, m);
    assert_eq!(up.get(5, 2), m.get(2, 1));
}

#[test]
fn density_map_matches_hand_count() {
    let tech = tiny_tech(1);
    let d = design(&tech, rect(0, 0, 4, 4), vec![inst("a", "G", 0, 0), inst("b", "G", 1, 2)], vec![], vec![]);
    let g = GcellGrid::covering(d.die, 2, 2).unwrap();
    let m = cell_density_map(&d, &g);
    // a fills cell (0,0); b covers half of (0,1) and half of (1,1)
    assert_eq!(m.values, vec![1.0, 0.0, 0.5, 0.5]);
}

#[test]
fn incomplete_bundles_are_rejected() {
    let d = synth(600, 4);
    let f = analyze(&d, &VectorConfig::default()).unwrap();
    let mut no_placement = f.clone();
    no_placement.layout.instances.clear();
    assert!(matches!(reconstruct(&no_placement, d.tech.clone()), Err(FidelityError::IncompleteBundle(_))));
    let mut no_nets = f.clone();
    no_nets.nets.clear();
    assert!(matches!(reconstruct(&no_nets, d.tech.clone()), Err(FidelityError::IncompleteBundle(_))));
}

#[test]
fn different_dies_are_incomparable() {
    let a = synth(500, 1);
    let b = synth(900, 1);
    let e = compare(&a, &b, &VectorConfig::default(), FidelityOptions::default());
    assert!(matches!(e, Err(FidelityError::IncomparableDesigns(_))));
}

#[test]
fn empty_placement_has_no_correlation() {
    let tech = tiny_tech(1);
    let d = design(&tech, rect(0, 0, 40, 40), vec![], vec![], vec![]);
    let opts = FidelityOptions { density_grid: DensityGrid::Patch, ..FidelityOptions::default() };
    let e = compare(&d, &d, &VectorConfig::default(), opts);
    assert!(matches!(e, Err(FidelityError::ConstantMap("original"))));
}

#[test]
fn pearson_agrees_with_one_pass_formula() {
    let a: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
    let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v * 0.5 + ((i * 13) % 17) as f64).collect();
    let n = a.len() as f64;
    let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
    let sab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let saa: f64 = a.iter().map(|x| x * x).sum();
    let sbb: f64 = b.iter().map(|y| y * y).sum();
    let want = (n * sab - sa * sb) / ((n * saa - sa * sa).sqrt() * (n * sbb - sb * sb).sqrt());
    assert!((pearson(&a, &b).unwrap() - want).abs() < 1e-12);
    assert!((pearson(&a, &b).unwrap() - common::pearson(&a, &b)).abs() < 1e-12);
}
