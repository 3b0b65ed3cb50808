// SPDX-License-Identifier: Apache-2.0

// Small hand-built designs shared by integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use chipvec::design::{
    Design, Instance, InstanceClass, Layer, LayerDirection, Master, MasterClass, MasterPin, Net, NetPin,
    NetPinRole, Orient, PinDirection, PinOwner, Port, Site, TechLib, ViaDef,
};
use chipvec::geom::{Point, Rect, ViaInstance, WireSegment};

pub fn rect(x0: i64, y0: i64, x1: i64, y1: i64) -> Rect {
    Rect::new(Point::new(x0, y0), Point::new(x1, y1)).unwrap()
}

pub fn wire(xs: i64, ys: i64, xe: i64, ye: i64, l: u32) -> WireSegment {
    WireSegment::new(xs, ys, xe, ye, l).unwrap()
}

pub fn via(x: i64, y: i64, bot: u32) -> ViaInstance {
    ViaInstance { xc: x, yc: y, layer_bot: bot, layer_top: bot + 1 }
}

fn mpin(name: &str, dir: PinDirection, at: Point, cap: f64, clock: bool) -> MasterPin {
    MasterPin {
        name: name.into(),
        direction: dir,
        is_clock: clock,
        offset: at,
        shape: Rect { lo: at, hi: at },
        capacitance: cap,
    }
}

/// Two layers of the given pitch with unit R = 1 and C = 1, a 2x2 gate `G`
/// (A at (0,1), Z at (2,1)) and a 2x2 flip-flop `FF` (D, CK, Q).
pub fn tiny_tech(pitch: i64) -> Arc<TechLib> {
    let layers = (1..=2)
        .map(|i| Layer {
            name: format!("M{i}"),
            index: i,
            pitch,
            direction: if i == 1 { LayerDirection::Horizontal } else { LayerDirection::Vertical },
            unit_r: 1.0,
            unit_c: 1.0,
        })
        .collect();
    let vias = vec![ViaDef { name: "V12".into(), layer_bot: 1, layer_top: 2, resistance: 0.5 }];
    let gate = Master {
        name: "G".into(),
        width: 2,
        height: 2,
        class: Some(MasterClass::Core),
        pins: vec![
            mpin("A", PinDirection::Input, Point::new(0, 1), 0.25, false),
            mpin("Z", PinDirection::Output, Point::new(2, 1), 0.0, false),
        ],
        drive_resistance: 2.0,
        intrinsic_delay: 1.0,
        is_sequential: false,
    };
    let ff = Master {
        name: "FF".into(),
        width: 2,
        height: 2,
        class: Some(MasterClass::Core),
        pins: vec![
            mpin("D", PinDirection::Input, Point::new(0, 1), 0.5, false),
            mpin("CK", PinDirection::Input, Point::new(1, 0), 0.5, true),
            mpin("Q", PinDirection::Output, Point::new(2, 1), 0.0, false),
        ],
        drive_resistance: 3.0,
        intrinsic_delay: 2.0,
        is_sequential: true,
    };
    Arc::new(
        TechLib::new(1000, layers, vias, vec![Site { name: "core".into(), width: 1, height: 2 }], vec![gate, ff], vec![])
            .unwrap(),
    )
}

pub fn inst(name: &str, master: &str, x: i64, y: i64) -> Instance {
    Instance {
        name: name.into(),
        master: master.into(),
        origin: Point::new(x, y),
        orient: Orient::N,
        fixed: false,
        class: InstanceClass::Logic,
    }
}

pub fn port(name: &str, x: i64, y: i64, dir: PinDirection) -> Port {
    Port { name: name.into(), position: Point::new(x, y), direction: dir }
}

pub fn port_pin(name: &str, x: i64, y: i64, role: NetPinRole) -> NetPin {
    NetPin { owner: PinOwner::Port(name.into()), pin: "PIN".into(), position: Point::new(x, y), role }
}

/// Instance pin at the position `tiny_tech` masters give it.
pub fn inst_pin(i: &Instance, pin: &str, role: NetPinRole) -> NetPin {
    let off = match pin {
        "A" | "D" => (0, 1),
        "Z" | "Q" => (2, 1),
        "CK" => (1, 0),
        _ => panic!("unknown pin {pin}"),
    };
    NetPin {
        owner: PinOwner::Instance(i.name.clone()),
        pin: pin.into(),
        position: Point::new(i.origin.x + off.0, i.origin.y + off.1),
        role,
    }
}

pub fn net(name: &str, pins: Vec<NetPin>, routing: Vec<WireSegment>, vias: Vec<ViaInstance>) -> Net {
    Net { name: name.into(), pins, routing, vias }
}

pub fn design(
    tech: &Arc<TechLib>,
    die: Rect,
    instances: Vec<Instance>,
    ports: Vec<Port>,
    nets: Vec<Net>,
) -> Design {
    Design::new("t", tech.clone(), die, die, instances, ports, nets).unwrap()
}

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
