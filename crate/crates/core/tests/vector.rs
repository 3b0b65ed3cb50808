// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use chipvec::design::{
    generate_synthetic, Design, NetPinRole, PinDirection, PinOwner, SynthParams, TechLib,
};
use chipvec::geom::{hpwl, Point, Rect};
use chipvec::vector::elmore::RcTree;
use chipvec::vector::rsmt::{estimate_rsmt, rmst_length};
use chipvec::vector::{
    analyze_with_threads, build_graph, decompose_all, decompose_net, extract_design_stats, extract_paths,
    patch_features, NetVec, PathLimits, PathNodeKind, PowerModel, VectorConfig, VectorError,
};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------- RSMT ----------

fn mst_oracle(pts: &[Point]) -> i64 {
    // O(n^2) Prim written independently of the library
    let n = pts.len();
    if n < 2 {
        return 0;
    }
    let mut dist = vec![i64::MAX; n];
    let mut used = vec![false; n];
    dist[0] = 0;
    let mut total = 0;
    for _ in 0..n {
        let u = (0..n).filter(|&i| !used[i]).min_by_key(|&i| dist[i]).unwrap();
        used[u] = true;
        total += dist[u];
        for v in 0..n {
            let d = (pts[u].x - pts[v].x).abs() + (pts[u].y - pts[v].y).abs();
            if !used[v] && d < dist[v] {
                dist[v] = d;
            }
        }
    }
    total
}

/// Exact RSMT for small nets: some optimal tree uses at most n-2 Hanan points.
fn hanan_optimum(pins: &[Point]) -> i64 {
    let mut pts = pins.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let n = pts.len();
    let xs: Vec<i64> = pts.iter().map(|p| p.x).collect();
    let ys: Vec<i64> = pts.iter().map(|p| p.y).collect();
    let mut cand = Vec::new();
    for &x in &xs {
        for &y in &ys {
            let p = Point::new(x, y);
            if !pts.contains(&p) && !cand.contains(&p) {
                cand.push(p);
            }
        }
    }
    let mut best = mst_oracle(&pts);
    let k_max = n.saturating_sub(2).min(cand.len());
    fn rec(cand: &[Point], start: usize, left: usize, cur: &mut Vec<Point>, best: &mut i64) {
        *best = (*best).min(mst_oracle(cur));
        if left == 0 {
            return;
        }
        for i in start..cand.len() {
            cur.push(cand[i]);
            rec(cand, i + 1, left - 1, cur, best);
            cur.pop();
        }
    }
    let mut cur = pts.clone();
    rec(&cand, 0, k_max, &mut cur, &mut best);
    best
}

#[test]
fn rsmt_close_to_hanan_optimum_on_small_nets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 1.0;
    for _ in 0..500 {
        let k = rng.gen_range(2..=5);
        let pins: Vec<Point> = (0..k).map(|_| Point::new(rng.gen_range(0..100), rng.gen_range(0..100))).collect();
        let opt = hanan_optimum(&pins);
        let est = estimate_rsmt(&pins);
        assert!(est >= opt, "{pins:?}: estimate {est} below optimum {opt}");
        if opt > 0 {
            worst = worst.max(est as f64 / opt as f64);
        }
    }
    assert!(worst <= 1.05, "worst ratio {worst}");
}

#[test]
fn rsmt_square_matches_oracle() {
    let sq = [Point::new(0, 0), Point::new(0, 10), Point::new(10, 0), Point::new(10, 10)];
    assert_eq!(hanan_optimum(&sq), 30);
    assert_eq!(estimate_rsmt(&sq), 30);
}

proptest! {
    #[test]
    fn rsmt_between_hpwl_and_rmst(pins in prop::collection::vec((0i64..500, 0i64..500), 1..40)) {
        let pts: Vec<Point> = pins.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let est = estimate_rsmt(&pts);
        prop_assert!(hpwl(&pts).unwrap() <= est);
        prop_assert!(est <= rmst_length(&pts));
        prop_assert_eq!(rmst_length(&pts), { let mut p = pts.clone(); p.sort_unstable(); p.dedup(); mst_oracle(&p) });
    }
}

// ---------- Elmore ----------

fn elmore_oracle(parent: &[usize], r: &[f64], c: &[f64]) -> Vec<f64> {
    let n = parent.len();
    let ancestors = |v: usize| {
        let mut s = Vec::new();
        let mut u = v;
        while u != 0 {
            s.push(u);
            u = parent[u];
        }
        s
    };
    (0..n)
        .map(|v| {
            let av: HashSet<usize> = ancestors(v).into_iter().collect();
            (0..n)
                .map(|k| c[k] * ancestors(k).into_iter().filter(|e| av.contains(e)).map(|e| r[e]).sum::<f64>())
                .sum()
        })
        .collect()
}

#[test]
fn elmore_matches_shared_resistance_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=64);
        let mut parent = vec![0usize];
        let mut r = vec![0.0];
        let mut c = vec![rng.gen_range(0.0..1e-13)];
        let mut t = RcTree::new(c[0]);
        for v in 1..n {
            let p = rng.gen_range(0..v);
            let (rv, cv) = (rng.gen_range(0.1..500.0), rng.gen_range(1e-16..1e-13));
            assert_eq!(t.add_node(p, rv, cv), v);
            parent.push(p);
            r.push(rv);
            c.push(cv);
        }
        let got = t.elmore_delays();
        let want = elmore_oracle(&parent, &r, &c);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12 * w.abs().max(f64::MIN_POSITIVE), "{g} vs {w}");
        }
    }
}

// ---------- nets ----------

fn l_route_design() -> Design {
    let tech = tiny_tech(1);
    design(
        &tech,
        rect(0, 0, 100, 100),
        vec![],
        vec![port("a", 0, 0, PinDirection::Input), port("b", 10, 5, PinDirection::Output)],
        vec![net(
            "n",
            vec![port_pin("a", 0, 0, NetPinRole::Driver), port_pin("b", 10, 5, NetPinRole::Load)],
            vec![wire(0, 0, 10, 0, 1), wire(10, 0, 10, 5, 2)],
            vec![via(10, 0, 1)],
        )],
    )
}

#[test]
fn l_route_decomposes_into_tuples() {
    let d = l_route_design();
    let nv = decompose_net(&d, 0, &PowerModel::default(), 1).unwrap();
    assert_eq!(nv.wires.len(), 2);
    assert_eq!(nv.vias.len(), 1);
    let first: [i64; 5] = nv.wires[0].into();
    assert_eq!(first, [0, 0, 10, 0, 1]);
    assert_eq!(nv.subnets.len(), 1);
    assert_eq!(nv.subnets[0].bends, 1);
    assert_eq!(nv.features.rwl, 15);
    assert_eq!(nv.features.hpwl, 15);
    assert_eq!(nv.features.layer_wirelength, BTreeMap::from([(1, 10), (2, 5)]));
    assert_eq!(nv.features.lness, 1.0);
    // pi segments: C/2 at each end, via between the two layers
    let (c1, c2) = (10.0, 5.0);
    let want = 10.0 * (c1 / 2.0 + c2) + 0.5 * c2 + 5.0 * (c2 / 2.0);
    assert!((nv.electricals.delays[0] - want).abs() < 1e-12 * want);
    assert_eq!(nv.electricals.resistance, 15.5);
    assert_eq!(nv.electricals.capacitance, 15.0);
    assert!((nv.electricals.slews[0] - 9f64.ln() * want).abs() < 1e-9);
}

fn tree_design() -> Design {
    let tech = tiny_tech(1);
    design(
        &tech,
        rect(0, 0, 100, 100),
        vec![],
        vec![
            port("d", 0, 50, PinDirection::Input),
            port("e", 100, 50, PinDirection::Output),
            port("n", 50, 100, PinDirection::Output),
            port("s", 50, 0, PinDirection::Output),
        ],
        vec![net(
            "t",
            vec![
                port_pin("d", 0, 50, NetPinRole::Driver),
                port_pin("e", 100, 50, NetPinRole::Load),
                port_pin("n", 50, 100, NetPinRole::Load),
                port_pin("s", 50, 0, NetPinRole::Load),
            ],
            vec![wire(0, 50, 100, 50, 1), wire(50, 0, 50, 100, 2)],
            vec![via(50, 50, 1)],
        )],
    )
}

#[test]
fn three_load_tree_gives_one_subnet_per_load() {
    let d = tree_design();
    let nv = decompose_net(&d, 0, &PowerModel::default(), 1).unwrap();
    assert_eq!(nv.subnets.len(), 3);
    let mut loads: Vec<usize> = nv.subnets.iter().map(|s| s.load).collect();
    loads.sort_unstable();
    assert_eq!(loads, nv.load_indices());
    let drv = nv.pins.iter().find(|p| p.role == NetPinRole::Driver).unwrap().position;
    for s in &nv.subnets {
        let (first, last) = (s.nodes.first().unwrap(), s.nodes.last().unwrap());
        assert_eq!(Point::new(first.x, first.y), drv);
        assert_eq!(Point::new(last.x, last.y), nv.pins[s.load].position);
        // every walk passes the branch at the via
        assert!(s.nodes.iter().any(|n| n.steiner && n.x == 50 && n.y == 50));
    }
    // north and south loads are symmetric
    let by_name = |name: &str| {
        let k = nv.load_indices().iter().position(|&i| nv.pins[i].owner == PinOwner::Port(name.into())).unwrap();
        nv.electricals.delays[k]
    };
    assert_eq!(by_name("n"), by_name("s"));
    assert!(by_name("e") > 0.0);
}

#[test]
fn doubling_lengths_doubles_r_and_c() {
    let tech = tiny_tech(1);
    let make = |k: i64| {
        design(
            &tech,
            rect(0, 0, 100, 100),
            vec![],
            vec![port("a", 0, 0, PinDirection::Input), port("b", 7 * k, 0, PinDirection::Output)],
            vec![net(
                "n",
                vec![port_pin("a", 0, 0, NetPinRole::Driver), port_pin("b", 7 * k, 0, NetPinRole::Load)],
                vec![wire(0, 0, 3 * k, 0, 1), wire(3 * k, 0, 7 * k, 0, 1)],
                vec![],
            )],
        )
    };
    let one = decompose_net(&make(1), 0, &PowerModel::default(), 1).unwrap().electricals;
    let two = decompose_net(&make(2), 0, &PowerModel::default(), 1).unwrap().electricals;
    assert_eq!(two.resistance, 2.0 * one.resistance);
    assert_eq!(two.capacitance, 2.0 * one.capacitance);
}

#[test]
fn zero_length_routing_leaves_only_pin_caps() {
    let tech = tiny_tech(1);
    let g = inst("g", "G", 10, 10);
    let a = inst_pin(&g, "A", NetPinRole::Load);
    let d = design(
        &tech,
        rect(0, 0, 100, 100),
        vec![g],
        vec![port("p", 10, 11, PinDirection::Input)],
        vec![net(
            "n",
            vec![port_pin("p", 10, 11, NetPinRole::Driver), a],
            vec![wire(10, 11, 10, 11, 1)],
            vec![],
        )],
    );
    let e = decompose_net(&d, 0, &PowerModel::default(), 1).unwrap().electricals;
    assert_eq!(e.resistance, 0.0);
    assert_eq!(e.capacitance, 0.25);
    assert_eq!(e.delays, vec![0.0]);
}

#[test]
fn broken_routing_reports_unreached_pins() {
    let tech = tiny_tech(1);
    let d = design(
        &tech,
        rect(0, 0, 100, 100),
        vec![],
        vec![port("a", 0, 0, PinDirection::Input), port("b", 20, 0, PinDirection::Output)],
        vec![net(
            "n",
            vec![port_pin("a", 0, 0, NetPinRole::Driver), port_pin("b", 20, 0, NetPinRole::Load)],
            vec![wire(0, 0, 8, 0, 1), wire(12, 0, 20, 0, 1)],
            vec![],
        )],
    );
    match decompose_net(&d, 0, &PowerModel::default(), 1) {
        Err(VectorError::Connectivity { net, unreached }) => {
            assert_eq!(net, "n");
            assert_eq!(unreached, vec!["b".to_string()]);
        }
        other => panic!("expected connectivity error, got {other:?}"),
    }
}

#[test]
fn missing_unit_rc_is_a_tech_error() {
    let d = l_route_design();
    let mut tech: TechLib = (*d.tech).clone();
    tech.layers[1].unit_r = 0.0;
    tech.layers[1].unit_c = 0.0;
    let d2 = Design::new("t", Arc::new(tech), d.die, d.core, vec![], d.ports.clone(), d.nets.clone()).unwrap();
    assert!(matches!(decompose_net(&d2, 0, &PowerModel::default(), 1), Err(VectorError::Tech(_))));
}

fn corpus(n: usize) -> Vec<Design> {
    (0..n as u64)
        .map(|s| generate_synthetic(&SynthParams::for_cells(600 + 400 * s as usize).with_seed(s)).unwrap())
        .collect()
}

#[test]
fn net_invariants_on_synthetic_designs() {
    for d in corpus(3) {
        let nets = decompose_all(&d, &VectorConfig::default()).unwrap();
        for (i, nv) in nets.iter().enumerate() {
            let net = &d.nets[i];
            assert_eq!(nv.index, i);
            assert_eq!(nv.features.rwl, nv.wires.iter().map(|w| w.length()).sum::<i64>());
            assert_eq!(nv.features.fanout, net.fanout());
            assert_eq!(nv.subnets.len(), net.fanout());
            let pts = net.pin_points();
            let rsmt = estimate_rsmt(&pts);
            assert!(hpwl(&pts).unwrap() <= rsmt && rsmt <= rmst_length(&pts));
            if net.pins.len() >= 2 {
                assert!(nv.features.hpwl <= nv.features.rwl, "{}", net.name);
            }
            let wl: i64 = nv.features.layer_wirelength.values().sum();
            assert_eq!(wl, nv.features.rwl);
            let e = &nv.electricals;
            assert!((e.capacitance - e.wire_capacitance - e.pin_capacitance).abs() <= 1e-12 * e.capacitance);
            assert!(e.delays.iter().all(|&x| x >= 0.0 && x.is_finite()));
        }
    }
}

// ---------- graph ----------

#[test]
fn graph_edges_equal_total_fanout() {
    for d in corpus(3) {
        let g = build_graph(&d);
        assert_eq!(g.nodes.len(), d.instances.len() + d.ports.len());
        assert!(g.nodes.iter().enumerate().all(|(i, n)| n.id == i));
        let fanout: usize = d
            .nets
            .iter()
            .map(|n| {
                let drv = &n.pins.iter().find(|p| p.role == NetPinRole::Driver).unwrap().owner;
                n.pins.iter().filter(|p| p.role == NetPinRole::Load && &p.owner != drv).count()
            })
            .sum();
        assert_eq!(g.edges.len(), fanout);
        assert!(g.edges.iter().all(|e| e.src != e.dst && e.src < g.nodes.len() && e.dst < g.nodes.len()));
        let _ = decompose_all(&d, &VectorConfig::default()).unwrap();
        assert_eq!(build_graph(&d), g);
    }
}

#[test]
fn graph_star_expansion_on_small_net() {
    let d = tree_design();
    let g = build_graph(&d);
    assert_eq!(g.nodes.len(), 4);
    assert_eq!(g.edges.len(), 3);
    assert!(g.edges.iter().all(|e| e.src == 0 && e.net == "t"));
}

// ---------- paths ----------

fn chain_design() -> Design {
    let tech = tiny_tech(1);
    let (f1, g, f2) = (inst("ff1", "FF", 0, 0), inst("g", "G", 10, 0), inst("ff2", "FF", 20, 0));
    let nets = vec![
        net(
            "n1",
            vec![inst_pin(&f1, "Q", NetPinRole::Driver), inst_pin(&g, "A", NetPinRole::Load)],
            vec![wire(2, 1, 10, 1, 1)],
            vec![],
        ),
        net(
            "n2",
            vec![inst_pin(&g, "Z", NetPinRole::Driver), inst_pin(&f2, "D", NetPinRole::Load)],
            vec![wire(12, 1, 20, 1, 1)],
            vec![],
        ),
        net(
            "clk",
            vec![
                port_pin("clk", 0, 10, NetPinRole::Driver),
                inst_pin(&f1, "CK", NetPinRole::Load),
                inst_pin(&f2, "CK", NetPinRole::Load),
            ],
            vec![],
            vec![],
        ),
    ];
    design(&tech, rect(0, 0, 30, 30), vec![f1, g, f2], vec![port("clk", 0, 10, PinDirection::Input)], nets)
}

#[test]
fn ff_gate_ff_chain_has_one_two_stage_path() {
    let d = chain_design();
    let nets = decompose_all(&d, &VectorConfig::default()).unwrap();
    let (paths, _) = extract_paths(&d, &nets, PathLimits { max_paths: 10, max_stages: 64 }, 100.0);
    assert_eq!(paths.len(), 1);
    let p = &paths[0];
    assert_eq!(p.stage_count, 2);
    let names: Vec<&str> = p.nodes.iter().map(|n| n.name.as_str()).collect();
    assert_eq!(names, ["ff1/Q", "g/A", "g/Z", "ff2/D"]);
    // n1: C = 8 + 0.25, Elmore = 8 * (4 + 0.25); n2: C = 8 + 0.5, Elmore = 8 * (4 + 0.5)
    let stage1 = (2.0 + 3.0 * 8.25) + 8.0 * 4.25;
    let stage2 = (1.0 + 2.0 * 8.5) + 8.0 * 4.5;
    assert!((p.total_delay - (stage1 + stage2)).abs() < 1e-9);
    assert!((p.slack - (100.0 - stage1 - stage2)).abs() < 1e-9);
    assert_eq!(p.launch, "ff1/Q");
    assert_eq!(p.capture, "ff2/D");
}

#[test]
fn zero_max_paths_and_no_flops() {
    let d = chain_design();
    let nets = decompose_all(&d, &VectorConfig::default()).unwrap();
    assert!(extract_paths(&d, &nets, PathLimits { max_paths: 0, max_stages: 64 }, 1.0).0.is_empty());
    let d = l_route_design();
    let nets = decompose_all(&d, &VectorConfig::default()).unwrap();
    let (paths, diags) = extract_paths(&d, &nets, PathLimits { max_paths: 10, max_stages: 64 }, 1.0);
    assert!(paths.is_empty());
    assert_eq!(diags.len(), 1);
}

/// Every launch-to-capture path delay by plain recursive enumeration.
fn all_path_delays(d: &Design, nets: &[NetVec]) -> Vec<f64> {
    let mut out_edges: BTreeMap<PinOwner, Vec<(PinOwner, bool, f64)>> = BTreeMap::new();
    for (i, net) in d.nets.iter().enumerate() {
        let drv = net.pins.iter().find(|p| p.role == NetPinRole::Driver).unwrap();
        let cell = match &drv.owner {
            PinOwner::Instance(n) => {
                let m = d.master_of(d.instance(n).unwrap());
                m.intrinsic_delay + m.drive_resistance * nets[i].electricals.capacitance
            }
            PinOwner::Port(_) => 0.0,
        };
        for (k, load) in net.pins.iter().filter(|p| p.role == NetPinRole::Load).enumerate() {
            let PinOwner::Instance(n) = &load.owner else { continue };
            if load.owner == drv.owner {
                continue;
            }
            let m = d.master_of(d.instance(n).unwrap());
            if m.pin(&load.pin).unwrap().is_clock {
                continue;
            }
            out_edges.entry(drv.owner.clone()).or_default().push((
                load.owner.clone(),
                m.is_sequential,
                cell + nets[i].electricals.delays[k],
            ));
        }
    }
    fn walk(v: &PinOwner, acc: f64, e: &BTreeMap<PinOwner, Vec<(PinOwner, bool, f64)>>, out: &mut Vec<f64>) {
        for (t, capture, dl) in e.get(v).map(|v| v.as_slice()).unwrap_or(&[]) {
            if *capture {
                out.push(acc + dl);
            } else {
                walk(t, acc + dl, e, out);
            }
        }
    }
    let mut out = Vec::new();
    for i in &d.instances {
        if d.master_of(i).is_sequential {
            walk(&PinOwner::Instance(i.name.clone()), 0.0, &out_edges, &mut out);
        }
    }
    for p in d.ports.iter().filter(|p| p.direction == PinDirection::Input) {
        walk(&PinOwner::Port(p.name.clone()), 0.0, &out_edges, &mut out);
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

#[test]
fn top_k_paths_match_exhaustive_enumeration() {
    for seed in 0..3 {
        let mut p = SynthParams::for_cells(220).with_seed(seed);
        p.logic_levels = 6;
        let d = generate_synthetic(&p).unwrap();
        let nets = decompose_all(&d, &VectorConfig::default()).unwrap();
        let want = all_path_delays(&d, &nets);
        assert!(want.len() >= 50, "only {} paths", want.len());
        let k = 200.min(want.len());
        let (paths, _) = extract_paths(&d, &nets, PathLimits { max_paths: k, max_stages: 64 }, 1e-9);
        assert_eq!(paths.len(), k);
        for (p, w) in paths.iter().zip(&want) {
            assert!((p.total_delay - w).abs() <= 1e-9 * w, "{} vs {w}", p.total_delay);
        }
    }
}

#[test]
fn path_invariants_on_synthetic_design() {
    let d = generate_synthetic(&SynthParams::for_cells(2000).with_seed(4)).unwrap();
    let nets = decompose_all(&d, &VectorConfig::default()).unwrap();
    let (paths, _) = extract_paths(&d, &nets, PathLimits { max_paths: 300, max_stages: 64 }, 1e-9);
    assert_eq!(paths.len(), 300);
    for w in paths.windows(2) {
        assert!(w[0].total_delay >= w[1].total_delay - 1e-18);
    }
    for p in &paths {
        let sum: f64 = p.nodes.iter().map(|n| n.incremental_delay).sum();
        assert_eq!(sum, p.total_delay);
        let pins = p.nodes.iter().filter(|n| n.kind == PathNodeKind::CellPin).count();
        assert_eq!(pins, 2 * p.stage_count);
        let last = d.instance(p.capture.split('/').next().unwrap()).unwrap();
        assert!(d.master_of(last).is_sequential);
    }
    let (short, _) = extract_paths(&d, &nets, PathLimits { max_paths: 300, max_stages: 3 }, 1e-9);
    assert!(short.iter().all(|p| p.stage_count <= 3));
}

// ---------- patches ----------

#[test]
fn cell_density_of_small_cell() {
    let tech = tiny_tech(10);
    let d = design(&tech, rect(0, 0, 30, 30), vec![inst("g", "G", 14, 14)], vec![], vec![]);
    let (grid, patches) = patch_features(&d, 1, 1, &[]).unwrap();
    assert_eq!((grid.nx, grid.ny), (3, 3));
    assert_eq!(patches[grid.index(1, 1)].cell_density, 0.04);
    assert_eq!(patches.iter().filter(|p| p.cell_density > 0.0).count(), 1);
}

#[test]
fn rudy_closed_form_and_mass() {
    let tech = tiny_tech(1);
    let d = design(
        &tech,
        rect(0, 0, 10, 10),
        vec![],
        vec![port("a", 0, 0, PinDirection::Input), port("b", 4, 2, PinDirection::Output)],
        vec![net("n", vec![port_pin("a", 0, 0, NetPinRole::Driver), port_pin("b", 4, 2, NetPinRole::Load)], vec![], vec![])],
    );
    let (grid, patches) = patch_features(&d, 1, 1, &[]).unwrap();
    // unit patch (1, 0) lies inside the 4x2 box
    assert_eq!(patches[grid.index(1, 0)].rudy, 0.75);
    // per-unit-cell integration: total mass equals w + h
    let mass: f64 = patches.iter().map(|p| p.rudy * p.boundary.area() as f64).sum();
    assert!((mass - 6.0).abs() < 1e-12);
}

#[test]
fn wire_demand_split_across_patches() {
    let tech = tiny_tech(10);
    let d = design(
        &tech,
        rect(0, 0, 30, 10),
        vec![],
        vec![port("a", 0, 5, PinDirection::Input), port("b", 25, 5, PinDirection::Output)],
        vec![net(
            "n",
            vec![port_pin("a", 0, 5, NetPinRole::Driver), port_pin("b", 25, 5, NetPinRole::Load)],
            vec![wire(0, 5, 25, 5, 1)],
            vec![],
        )],
    );
    let (_, patches) = patch_features(&d, 1, 1, &[]).unwrap();
    let wl: Vec<i64> = patches.iter().map(|p| p.layer_wirelength.get(&1).copied().unwrap_or(0)).collect();
    assert_eq!(wl, vec![10, 10, 5]);
    let frag: Vec<i64> = patches.iter().flat_map(|p| p.fragments.iter().map(|f| f.wire.length())).collect();
    assert_eq!(frag, vec![10, 10, 5]);
    // 10 DBU on a 10x10 patch at pitch 10 is one full track
    assert_eq!(patches[0].congestion[&1], 1.0);
}

#[test]
fn patch_conservation_and_ranges() {
    for d in corpus(3) {
        let nets = decompose_all(&d, &VectorConfig::default()).unwrap();
        let (grid, patches) = patch_features(&d, 9, 1, &[]).unwrap();
        let mut from_nets: BTreeMap<u32, i64> = BTreeMap::new();
        for nv in &nets {
            for (&l, &wl) in &nv.features.layer_wirelength {
                *from_nets.entry(l).or_default() += wl;
            }
        }
        let mut from_patches: BTreeMap<u32, i64> = BTreeMap::new();
        let mut frag: BTreeMap<u32, i64> = BTreeMap::new();
        for p in &patches {
            for (&l, &wl) in &p.layer_wirelength {
                *from_patches.entry(l).or_default() += wl;
            }
            for f in &p.fragments {
                *frag.entry(f.wire.layer).or_default() += f.wire.length();
            }
            assert_eq!(p.boundary, grid.cell_rect(p.ix, p.iy));
            assert!(p.cell_density >= 0.0 && p.cell_density <= 1.0 + 1e-12);
            assert!(p.pin_density >= 0.0 && p.pin_density <= 1.0);
            assert!(p.net_density >= 0.0 && p.net_density <= 1.0);
            assert!(p.rudy >= 0.0 && p.congestion.values().all(|&c| c >= 0.0));
        }
        assert_eq!(from_nets, from_patches);
        assert_eq!(from_nets, frag);
        // RUDY mass: each net spreads w + h over its (1 DBU inflated) box
        let mass: f64 = patches.iter().map(|p| p.rudy * p.boundary.area() as f64).sum();
        let want: f64 = d
            .nets
            .iter()
            .map(|n| {
                let b = Rect::bounding(n.pin_points()).unwrap();
                if b.width() == 0 && b.height() == 0 {
                    0.0
                } else {
                    (b.width().max(1) + b.height().max(1)) as f64
                }
            })
            .sum();
        assert!((mass - want).abs() <= 1e-9 * want);
    }
}

fn scaled(d: &Design, k: i64) -> Design {
    let mut tech: TechLib = (*d.tech).clone();
    for l in &mut tech.layers {
        l.pitch *= k;
    }
    for s in &mut tech.sites {
        s.width *= k;
        s.height *= k;
    }
    let sp = |p: Point| Point::new(p.x * k, p.y * k);
    let sr = |r: Rect| Rect { lo: sp(r.lo), hi: sp(r.hi) };
    for m in &mut tech.masters {
        m.width *= k;
        m.height *= k;
        for p in &mut m.pins {
            p.offset = sp(p.offset);
            p.shape = sr(p.shape);
        }
    }
    let mut instances = d.instances.clone();
    for i in &mut instances {
        i.origin = sp(i.origin);
    }
    let mut ports = d.ports.clone();
    for p in &mut ports {
        p.position = sp(p.position);
    }
    let mut nets = d.nets.clone();
    for n in &mut nets {
        for p in &mut n.pins {
            p.position = sp(p.position);
        }
        for w in &mut n.routing {
            (w.xs, w.ys, w.xe, w.ye) = (w.xs * k, w.ys * k, w.xe * k, w.ye * k);
        }
        for v in &mut n.vias {
            (v.xc, v.yc) = (v.xc * k, v.yc * k);
        }
    }
    Design::new(d.name.clone(), Arc::new(tech), sr(d.die), sr(d.core), instances, ports, nets).unwrap()
}

#[test]
fn cell_density_ranking_survives_dbu_rescaling() {
    let d = generate_synthetic(&SynthParams::for_cells(800).with_seed(9)).unwrap();
    let big = scaled(&d, 3);
    let (_, a) = patch_features(&d, 9, 1, &[]).unwrap();
    let (_, b) = patch_features(&big, 9, 1, &[]).unwrap();
    let rank = |p: &[chipvec::vector::PatchVec]| {
        let mut idx: Vec<usize> = (0..p.len()).collect();
        idx.sort_by(|&i, &j| p[j].cell_density.total_cmp(&p[i].cell_density).then(i.cmp(&j)));
        idx
    };
    assert_eq!(rank(&a), rank(&b));
}

// ---------- design level and driver ----------

#[test]
fn core_usage_and_class_shares() {
    let tech = tiny_tech(1);
    let d = design(&tech, rect(0, 0, 10, 10), vec![inst("a", "G", 0, 0), inst("b", "G", 4, 4)], vec![], vec![]);
    let s = extract_design_stats(&d, &[], &[], &chipvec::geom::GcellGrid::covering(d.die, 5, 5).unwrap(), &[], 1.0);
    assert_eq!(s.core_usage, 0.08);
    assert_eq!(s.class_shares.values().sum::<f64>(), 1.0);
    for d in corpus(2) {
        let f = analyze_with_threads(&d, &VectorConfig::default(), 1).unwrap();
        let sum: f64 = f.design.class_shares.values().sum();
        assert!((sum - 1.0).abs() <= 1e-9);
        let area: i128 = d.instances.iter().map(|i| d.footprint(i).area()).sum();
        assert_eq!(f.design.core_usage, area as f64 / d.core.area() as f64);
        assert_eq!(f.design.num_wires, d.nets.iter().map(|n| n.routing.len()).sum::<usize>());
        let slacks: Vec<f64> = f.paths.iter().map(|p| p.slack).collect();
        assert_eq!(f.design.violating_paths, slacks.iter().filter(|&&s| s < 0.0).count());
        assert_eq!(f.design.tns, slacks.iter().filter(|&&s| s < 0.0).sum::<f64>());
    }
}

#[test]
fn extraction_independent_of_thread_count() {
    let d = generate_synthetic(&SynthParams::for_cells(3000).with_seed(2)).unwrap();
    let one = analyze_with_threads(&d, &VectorConfig::default(), 1).unwrap();
    let four = analyze_with_threads(&d, &VectorConfig::default(), 4).unwrap();
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
}

#[test]
fn config_rejects_zero_patch_multiple() {
    let d = l_route_design();
    let cfg = VectorConfig { patch_multiple: 0, ..VectorConfig::default() };
    assert!(matches!(analyze_with_threads(&d, &cfg, 1), Err(VectorError::Config(f)) if f == "patch_multiple"));
}
