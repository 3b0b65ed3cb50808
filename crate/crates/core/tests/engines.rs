// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::BTreeSet;

use chipvec::design::{generate_synthetic, Design, NetPinRole, PinDirection, SynthParams};
use chipvec::engines::{
    denormalize, emit_datasets, graph_batch, routing_mask, sequence_paths, spatial_congestion, split_stratified,
    tabular_wirelength, EngineConfig, EngineError, Normalization, SEQUENCE_FEATURES,
};
use chipvec::store::{read_npy, NpyElement};
use chipvec::vector::{analyze_with_threads, Foundation, VectorConfig};
use common::*;
use proptest::prelude::*;

fn synthetic(cells: usize, seed: u64) -> Foundation {
    let d = generate_synthetic(&SynthParams::for_cells(cells).with_seed(seed)).unwrap();
    analyze_with_threads(&d, &VectorConfig::default(), 2).unwrap()
}

fn cfg(patch_multiple: u32) -> VectorConfig {
    VectorConfig { patch_multiple, clock_period: 1000.0, ..VectorConfig::default() }
}

/// 100 x 100 die with pitch 2 and patch multiple 5: a 10 x 10 patch grid.
/// One straight horizontal two-pin route from port `in` to `g0/A` at y = 55.
fn grid_design() -> Design {
    let tech = tiny_tech(2);
    let mut cells: Vec<_> = (0..12).map(|k| inst(&format!("c{k}"), "G", 3 + 7 * k, 10 + 6 * (k % 5))).collect();
    let g0 = inst("g0", "G", 60, 54);
    let mut nets = vec![net(
        "straight",
        vec![port_pin("in", 5, 55, NetPinRole::Driver), inst_pin(&g0, "A", NetPinRole::Load)],
        vec![wire(5, 55, 60, 55, 1)],
        vec![],
    )];
    nets.push(net(
        "bent",
        vec![inst_pin(&cells[0], "Z", NetPinRole::Driver), inst_pin(&cells[5], "A", NetPinRole::Load)],
        vec![wire(5, 11, 38, 11, 1), wire(38, 11, 38, 16, 2), wire(38, 16, 38, 16, 1)],
        vec![via(38, 11, 1), via(38, 16, 1)],
    ));
    cells.push(g0);
    design(&tech, rect(0, 0, 100, 100), cells, vec![port("in", 5, 55, PinDirection::Input)], nets)
}

#[test]
fn ten_by_ten_grid_gives_nine_windows() {
    let f = analyze_with_threads(&grid_design(), &cfg(5), 1).unwrap();
    assert_eq!((f.grid.nx, f.grid.ny), (10, 10));
    let s = spatial_congestion(&f, 0, 4, 3).unwrap();
    assert_eq!(s.shape(), [9, 4, 4, 4]);
    assert_eq!(s.labels.len(), 9 * 16);
    let want: Vec<(usize, usize)> = (0..3).flat_map(|y| (0..3).map(move |x| (3 * x, 3 * y))).collect();
    assert_eq!(s.origins, want);
}

#[test]
fn overlapping_windows_average_back_to_the_map() {
    let f = analyze_with_threads(&grid_design(), &cfg(5), 1).unwrap();
    let s = spatial_congestion(&f, 0, 4, 3).unwrap();
    let (nx, ny) = (f.grid.nx, f.grid.ny);
    let mut sum = vec![[0.0f64; 4]; nx * ny];
    let mut hits = vec![0usize; nx * ny];
    for (k, &(x0, y0)) in s.origins.iter().enumerate() {
        for y in 0..4 {
            for x in 0..4 {
                let cell = (y0 + y) * nx + x0 + x;
                hits[cell] += 1;
                for c in 0..4 {
                    sum[cell][c] += s.inputs[((k * 4 + c) * 4 + y) * 4 + x];
                }
            }
        }
    }
    for iy in 0..ny {
        for ix in 0..nx {
            let p = &f.patches[f.grid.index(ix, iy)];
            let cell = iy * nx + ix;
            assert!(hits[cell] > 0);
            let got: Vec<f64> = sum[cell].iter().map(|v| v / hits[cell] as f64).collect();
            let want = [p.cell_density, p.pin_density, p.net_density, p.rudy];
            for c in 0..4 {
                assert!((got[c] - want[c]).abs() <= 1e-12 * want[c].abs().max(1.0), "({ix},{iy}) channel {c}");
            }
        }
    }
}

#[test]
fn empty_design_gives_zero_tensors() {
    let tech = tiny_tech(2);
    let d = design(&tech, rect(0, 0, 100, 100), vec![], vec![], vec![]);
    let f = analyze_with_threads(&d, &cfg(5), 1).unwrap();
    let s = spatial_congestion(&f, 0, 4, 3).unwrap();
    assert!(s.inputs.iter().chain(&s.labels).all(|&v| v == 0.0));
}

#[test]
fn grid_smaller_than_window_is_rejected() {
    let f = analyze_with_threads(&grid_design(), &cfg(25), 1).unwrap();
    assert!(matches!(spatial_congestion(&f, 0, 4, 3), Err(EngineError::GridTooSmall { nx: 2, ny: 2, window: 4 })));
}

#[test]
fn straight_route_masks_one_row() {
    let f = analyze_with_threads(&grid_design(), &cfg(5), 1).unwrap();
    let s = routing_mask(&f, 0, 16, 0.4, 0, 0).unwrap();
    assert_eq!(s.shape()[1..], [10, 16, 16]);
    let k = s.origins.iter().position(|o| f.nets[o.0].name == "straight").unwrap();
    let plane = 256;
    let x = &s.inputs[k * 10 * plane..(k + 1) * 10 * plane];
    assert_eq!(x[8 * plane..9 * plane].iter().sum::<f64>(), 1.0);
    assert_eq!(x[9 * plane..10 * plane].iter().sum::<f64>(), 1.0);
    assert!(x[8 * plane..].iter().all(|&v| v == 0.0 || v == 1.0));
    let label = &s.labels[k * plane..(k + 1) * plane];
    let rows: BTreeSet<usize> = (0..plane).filter(|&i| label[i] == 1.0).map(|i| i / 16).collect();
    assert_eq!(rows.len(), 1);
    let row = *rows.iter().next().unwrap();
    let cols: Vec<usize> = (0..16).filter(|&c| label[row * 16 + c] == 1.0).collect();
    assert!(cols.len() >= 8);
    assert_eq!(cols.last().unwrap() - cols[0] + 1, cols.len(), "contiguous");
    // source and target sit on the labelled row
    let src = x[8 * plane..9 * plane].iter().position(|&v| v == 1.0).unwrap();
    let dst = x[9 * plane..].iter().position(|&v| v == 1.0).unwrap();
    assert_eq!((src / 16, dst / 16), (row, row));
    // relative channels have zero mean over the sample
    for c in 4..8 {
        assert!(x[c * plane..(c + 1) * plane].iter().sum::<f64>().abs() < 1e-9);
    }
}

#[test]
fn mask_sampling_is_seeded() {
    let f = synthetic(1500, 4);
    let a = routing_mask(&f, 0, 16, 0.4, 20, 9).unwrap();
    let b = routing_mask(&f, 0, 16, 0.4, 20, 9).unwrap();
    assert_eq!(a.samples + a.skipped, 20);
    assert_eq!(a, b);
    assert!(a.inputs.iter().chain(&a.labels).all(|v| v.is_finite()));
}

#[test]
fn sequences_pad_truncate_and_invert() {
    let bundles = [synthetic(1200, 1), synthetic(900, 2)];
    let l = 36;
    let s = sequence_paths(&bundles, l, Normalization::ZScore).unwrap();
    let raw: Vec<_> = bundles.iter().flat_map(|b| &b.paths).collect();
    assert_eq!(s.samples, raw.len());
    assert!(s.lengths.iter().any(|&n| n < l) && s.lengths.iter().any(|&n| n > l));
    let f = s.features.len();
    for (i, p) in raw.iter().enumerate() {
        assert_eq!(s.lengths[i], p.nodes.len());
        let mask = &s.mask[i * l..(i + 1) * l];
        assert_eq!(mask.iter().sum::<f64>(), p.nodes.len().min(l) as f64);
        for t in 0..l {
            let row = &s.tensor[(i * l + t) * f..(i * l + t + 1) * f];
            if t >= p.nodes.len() {
                assert!(row.iter().all(|&v| v == 0.0));
                continue;
            }
            let n = &p.nodes[t];
            let want = [n.resistance, n.capacitance, n.slew, n.incremental_delay];
            for (j, name) in s.features.iter().enumerate() {
                let k = SEQUENCE_FEATURES.iter().position(|x| x == name).unwrap();
                let back = denormalize(&s, j, row[j]);
                assert!((back - want[k]).abs() <= 1e-6 * want[k].abs().max(1e-12), "{name}");
            }
        }
    }
    assert!(s.tensor.iter().all(|v| v.is_finite()));
}

#[test]
fn sequence_rejects_zero_length() {
    assert!(matches!(sequence_paths(&[], 0, Normalization::ZScore), Err(EngineError::Config(f)) if f == "max_len"));
}

#[test]
fn robust_scaling_centers_on_median() {
    let s = sequence_paths(&[synthetic(800, 3)], 16, Normalization::Robust).unwrap();
    let l = 16;
    for (j, st) in s.stats.iter().enumerate() {
        let mut v: Vec<f64> = (0..s.samples * l)
            .filter(|&r| s.mask[r] == 1.0)
            .map(|r| denormalize(&s, j, s.tensor[r * s.features.len() + j]))
            .collect();
        v.sort_by(f64::total_cmp);
        let m = v.len();
        let median = if m % 2 == 1 { v[m / 2] } else { (v[m / 2 - 1] + v[m / 2]) / 2.0 };
        assert!((st.center - median).abs() <= 1e-9 * median.abs().max(1e-15), "{}", st.name);
    }
}

#[test]
fn tabular_rows_match_recount() {
    let bundles = [synthetic(700, 5), synthetic(500, 6)];
    let t = tabular_wirelength(&bundles).unwrap();
    let recount: usize = bundles.iter().map(|b| b.nets.iter().filter(|n| n.features.rsmt > 0).count()).sum();
    assert_eq!(t.rows, recount);
    assert_eq!(t.features.len(), t.rows * 5);
    assert_eq!(t.targets.len(), t.rows * 2);
    assert!(t.features.iter().chain(&t.targets).all(|v| v.is_finite()));
    let b0 = &bundles[0];
    let n = b0.nets.iter().find(|n| n.features.rsmt > 0).unwrap();
    assert_eq!(t.targets[1], n.features.rwl as f64 / n.features.rsmt as f64);
    assert_eq!(t.targets[0], n.features.via_count as f64);
}

#[test]
fn straight_two_pin_ratio_is_one() {
    let f = analyze_with_threads(&grid_design(), &cfg(5), 1).unwrap();
    let t = tabular_wirelength(std::slice::from_ref(&f)).unwrap();
    let r = t.nets.iter().position(|n| n == "straight").unwrap();
    assert_eq!(t.targets[2 * r + 1], 1.0);
    assert_eq!(t.targets[2 * r], 0.0);
}

/// Flip-flop, `gates` inverters in series, flip-flop.
fn chain(gates: usize) -> Foundation {
    let tech = tiny_tech(1);
    let mut cells = vec![inst("ff1", "FF", 0, 0)];
    cells.extend((0..gates).map(|k| inst(&format!("g{k}"), "G", 10 * (k as i64 + 1), 0)));
    cells.push(inst("ff2", "FF", 10 * (gates as i64 + 1), 0));
    let mut nets = Vec::new();
    for k in 0..cells.len() - 1 {
        let (a, b) = (&cells[k], &cells[k + 1]);
        let out = if k == 0 { "Q" } else { "Z" };
        let inp = if k + 1 == cells.len() - 1 { "D" } else { "A" };
        let x0 = a.origin.x + 2;
        nets.push(net(
            &format!("n{k}"),
            vec![inst_pin(a, out, NetPinRole::Driver), inst_pin(b, inp, NetPinRole::Load)],
            vec![wire(x0, 1, b.origin.x, 1, 1)],
            vec![],
        ));
    }
    let last = cells.len() - 1;
    nets.push(net(
        "clk",
        vec![
            port_pin("clk", 0, 10, NetPinRole::Driver),
            inst_pin(&cells[0], "CK", NetPinRole::Load),
            inst_pin(&cells[last], "CK", NetPinRole::Load),
        ],
        vec![],
        vec![],
    ));
    let w = 10 * (gates as i64 + 3);
    let d = design(&tech, rect(0, 0, w, 30), cells, vec![port("clk", 0, 10, PinDirection::Input)], nets);
    analyze_with_threads(&d, &VectorConfig { clock_period: 1000.0, ..VectorConfig::default() }, 1).unwrap()
}

#[test]
fn graph_offsets_for_three_and_four_nodes() {
    let g = graph_batch(&[chain(1), chain(2)]);
    assert_eq!(g.node_offsets, vec![0, 3, 7]);
    assert_eq!(g.edge_offsets, vec![0, 2, 5]);
    // nodes ordered by name: ff1, ff2, g0
    assert_eq!(g.edges[..2], [[0, 2], [2, 1]]);
    assert_eq!(g.feature_names.len(), 9);
    // every node is a logic cell
    let f = g.feature_names.len();
    let logic = g.feature_names.iter().position(|n| n == "class_logic").unwrap();
    assert!((0..g.num_nodes).all(|i| g.node_features[i * f + logic] == 1.0));
}

#[test]
fn graph_invariants_on_synthetic_designs() {
    let bundles = [synthetic(900, 7), synthetic(1300, 8), synthetic(600, 9)];
    let g = graph_batch(&bundles);
    assert_eq!(g.groups, vec![0, 1, 2]);
    assert!(g.node_offsets.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*g.node_offsets.last().unwrap(), g.num_nodes);
    assert_eq!(g.node_features.len(), g.num_nodes * g.feature_names.len());
    for k in 0..g.groups.len() {
        let (lo, hi) = (g.node_offsets[k], g.node_offsets[k + 1]);
        for e in &g.edges[g.edge_offsets[k]..g.edge_offsets[k + 1]] {
            assert!((lo..hi).contains(&e[0]) && (lo..hi).contains(&e[1]));
        }
        let t = &g.targets[lo..hi];
        let n = t.len() as f64;
        let mean = t.iter().sum::<f64>() / n;
        let sd = (t.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1e-6 && (sd - 1.0).abs() < 1e-6, "design {k}: mean {mean} sd {sd}");
    }
    assert!(g.node_features.iter().all(|v| v.is_finite()));
}

#[test]
fn split_of_thirty_designs() {
    let sizes: Vec<usize> = (0..30).map(|i| (i * 37) % 101 + 20).collect();
    let s = split_stratified(&sizes, 3, [19.0 / 30.0, 3.0 / 30.0, 8.0 / 30.0], 11).unwrap();
    assert_eq!((s.train.len(), s.val.len(), s.test.len()), (19, 3, 8));
    // each stratum of ten designs contributes to training
    let mut order: Vec<usize> = (0..30).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    for stratum in order.chunks(10) {
        assert!(stratum.iter().filter(|d| s.train.contains(d)).count() >= 6);
    }
    assert!(matches!(
        split_stratified(&sizes, 3, [0.5, 0.1, 0.1], 0),
        Err(EngineError::Config(f)) if f == "fractions"
    ));
}

proptest! {
    #[test]
    fn split_partitions_designs(
        sizes in proptest::collection::vec(1usize..500, 3..40),
        strata in 1usize..4,
        seed in any::<u64>(),
    ) {
        let fr = [0.6, 0.15, 0.25];
        let s = split_stratified(&sizes, strata, fr, seed).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..sizes.len()).collect::<Vec<_>>());
        let n = sizes.len() as f64;
        for (got, f) in [(s.train.len(), fr[0]), (s.val.len(), fr[1]), (s.test.len(), fr[2])] {
            prop_assert!((got as f64 - f * n).abs() < 1.0);
        }
        prop_assert_eq!(split_stratified(&sizes, strata, fr, seed).unwrap(), s);
    }
}

fn npy<T: NpyElement>(dir: &std::path::Path, name: &str) -> (Vec<T>, Vec<usize>) {
    read_npy::<T>(&std::fs::read(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn emitted_datasets_are_consistent() {
    let bundles: Vec<Foundation> = (0..4).map(|s| synthetic(600 + 200 * s as usize, 20 + s)).collect();
    let dir = tempfile::tempdir().unwrap();
    let cfg = EngineConfig { mask_samples: 30, strata: 2, ..EngineConfig::default() };
    let m = emit_datasets(&bundles, &cfg, dir.path()).unwrap();
    for t in &m.tensors {
        let bytes = std::fs::read(dir.path().join(&t.file)).unwrap();
        assert_eq!(t.hash, format!("{:016x}", chipvec::store::fnv1a(&bytes)));
        if t.dtype == "<f8" {
            let (v, shape) = read_npy::<f64>(&bytes).unwrap();
            assert_eq!(shape, t.shape);
            assert!(v.iter().all(|x| x.is_finite()), "{}", t.file);
        }
    }
    let (x, shape) = npy::<f64>(dir.path(), "sequence_x.npy");
    assert_eq!(shape, vec![m.counts["sequence"], 32, m.channels["sequence"].len()]);
    assert_eq!(x.len(), shape.iter().product::<usize>());
    let paths: usize = bundles.iter().map(|b| b.paths.len()).sum();
    assert_eq!(m.counts["sequence"], paths);
    let (_, shape) = npy::<f64>(dir.path(), "routing_mask_x.npy");
    assert_eq!(shape[1..], [10, 16, 16]);
    let (groups, _) = npy::<i64>(dir.path(), "tabular_groups.npy");
    assert_eq!(groups.len(), m.counts["tabular"]);
    let (_, rows) = chipvec::store::parse_csv(&std::fs::read(dir.path().join("tabular.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), m.counts["tabular"]);
    let split: BTreeSet<usize> = m.splits.values().flatten().copied().collect();
    assert_eq!(split.len(), 4);
    let again = tempfile::tempdir().unwrap();
    assert_eq!(emit_datasets(&bundles, &cfg, again.path()).unwrap(), m);
}
