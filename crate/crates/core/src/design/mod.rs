// SPDX-License-Identifier: Apache-2.0

//! Design database: technology, placed instances, ports and routed nets.
//!
//! A [`Design`] is always kept in canonical order (instances, ports and nets
//! sorted by name) so that writing and re-parsing yields an equal value.

mod def;
mod lef;
mod lex;
mod synth;
mod tech;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{GeomError, Point, Rect, ViaInstance, WireSegment};

pub use def::{parse_def, write_def};
pub use lef::{parse_lef, write_lef};
pub use synth::{
    generate_synthetic, synthetic_tech, SynthParams, DEFAULT_PIN_DISTRIBUTION, ROW_HEIGHT, SITE_WIDTH,
};
pub use tech::{
    classify_instance, ClassRule, Layer, LayerDirection, Master, MasterClass, MasterPin, PinDirection,
    SidecarLayer, SidecarMaster, SidecarVia, Site, TechLib, TechSidecar, ViaDef,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate name: {0}")]
    DuplicateName(String),
    #[error("unknown master: {0}")]
    UnknownMaster(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("technology error: {0}")]
    Tech(String),
    #[error("invalid design: {0}")]
    Invalid(String),
}

impl From<GeomError> for DesignError {
    fn from(e: GeomError) -> Self {
        DesignError::Geometry(e.to_string())
    }
}

/// A non-fatal note produced while reading or building a design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// A parsed value together with the warnings collected on the way.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceClass {
    Clock,
    Logic,
    Macro,
    #[serde(rename = "iopad")]
    IoPad,
}

impl InstanceClass {
    pub const ALL: [InstanceClass; 4] =
        [InstanceClass::Clock, InstanceClass::Logic, InstanceClass::Macro, InstanceClass::IoPad];

    pub fn name(self) -> &'static str {
        match self {
            InstanceClass::Clock => "clock",
            InstanceClass::Logic => "logic",
            InstanceClass::Macro => "macro",
            InstanceClass::IoPad => "iopad",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Orient {
    #[default]
    N,
    S,
    E,
    W,
    FN,
    FS,
    FE,
    FW,
}

impl Orient {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "N" => Orient::N,
            "S" => Orient::S,
            "E" => Orient::E,
            "W" => Orient::W,
            "FN" => Orient::FN,
            "FS" => Orient::FS,
            "FE" => Orient::FE,
            "FW" => Orient::FW,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Orient::N => "N",
            Orient::S => "S",
            Orient::E => "E",
            Orient::W => "W",
            Orient::FN => "FN",
            Orient::FS => "FS",
            Orient::FE => "FE",
            Orient::FW => "FW",
        }
    }

    fn swaps_axes(self) -> bool {
        matches!(self, Orient::E | Orient::W | Orient::FE | Orient::FW)
    }

    /// Placed footprint size of a `w x h` master.
    pub fn footprint(self, w: i64, h: i64) -> (i64, i64) {
        if self.swaps_axes() {
            (h, w)
        } else {
            (w, h)
        }
    }

    /// Maps a master-relative offset into the placed footprint frame.
    pub fn transform(self, p: Point, w: i64, h: i64) -> Point {
        let (x, y) = (p.x, p.y);
        match self {
            Orient::N => Point::new(x, y),
            Orient::S => Point::new(w - x, h - y),
            Orient::FN => Point::new(w - x, y),
            Orient::FS => Point::new(x, h - y),
            Orient::W => Point::new(h - y, x),
            Orient::E => Point::new(y, w - x),
            Orient::FW => Point::new(y, x),
            Orient::FE => Point::new(h - y, w - x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub master: String,
    pub origin: Point,
    #[serde(default)]
    pub orient: Orient,
    #[serde(default)]
    pub fixed: bool,
    pub class: InstanceClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub position: Point,
    pub direction: PinDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum PinOwner {
    Instance(String),
    Port(String),
}

impl PinOwner {
    pub fn name(&self) -> &str {
        match self {
            PinOwner::Instance(n) | PinOwner::Port(n) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetPinRole {
    Driver,
    Load,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetPin {
    pub owner: PinOwner,
    /// Master pin name; `"PIN"` for ports.
    pub pin: String,
    pub position: Point,
    pub role: NetPinRole,
}

impl NetPin {
    pub fn label(&self) -> String {
        match &self.owner {
            PinOwner::Instance(i) => format!("{i}/{}", self.pin),
            PinOwner::Port(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub pins: Vec<NetPin>,
    pub routing: Vec<WireSegment>,
    pub vias: Vec<ViaInstance>,
}

impl Net {
    pub fn driver(&self) -> Option<&NetPin> {
        self.pins.iter().find(|p| p.role == NetPinRole::Driver)
    }

    pub fn loads(&self) -> impl Iterator<Item = &NetPin> {
        self.pins.iter().filter(|p| p.role == NetPinRole::Load)
    }

    pub fn fanout(&self) -> usize {
        self.loads().count()
    }

    pub fn is_routed(&self) -> bool {
        !self.routing.is_empty() || !self.vias.is_empty()
    }

    pub fn routed_length(&self) -> i64 {
        self.routing.iter().map(WireSegment::length).sum()
    }

    pub fn pin_points(&self) -> Vec<Point> {
        self.pins.iter().map(|p| p.position).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub name: String,
    pub tech: Arc<TechLib>,
    pub die: Rect,
    pub core: Rect,
    pub instances: Vec<Instance>,
    pub ports: Vec<Port>,
    pub nets: Vec<Net>,
}

impl Design {
    /// Canonicalizes (sorts by name) and validates a design.
    pub fn new(
        name: impl Into<String>,
        tech: Arc<TechLib>,
        die: Rect,
        core: Rect,
        mut instances: Vec<Instance>,
        mut ports: Vec<Port>,
        mut nets: Vec<Net>,
    ) -> Result<Self, DesignError> {
        instances.sort_by(|a, b| a.name.cmp(&b.name));
        ports.sort_by(|a, b| a.name.cmp(&b.name));
        nets.sort_by(|a, b| a.name.cmp(&b.name));
        let d = Self { name: name.into(), tech, die, core, instances, ports, nets };
        d.validate()?;
        Ok(d)
    }

    pub fn instance(&self, name: &str) -> Option<&Instance> {
        self.instances
            .binary_search_by(|i| i.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.instances[i])
    }

    pub fn instance_index(&self, name: &str) -> Option<usize> {
        self.instances.binary_search_by(|i| i.name.as_str().cmp(name)).ok()
    }

    pub fn port_index(&self, name: &str) -> Option<usize> {
        self.ports.binary_search_by(|p| p.name.as_str().cmp(name)).ok()
    }

    pub fn master_of(&self, inst: &Instance) -> &Master {
        self.tech.master(&inst.master).expect("validated design references known masters")
    }

    /// Placed footprint of an instance.
    pub fn footprint(&self, inst: &Instance) -> Rect {
        let m = self.master_of(inst);
        let (w, h) = inst.orient.footprint(m.width, m.height);
        Rect { lo: inst.origin, hi: Point::new(inst.origin.x + w, inst.origin.y + h) }
    }

    /// Absolute location of a master pin on a placed instance.
    pub fn pin_position(&self, inst: &Instance, pin: &MasterPin) -> Point {
        let m = self.master_of(inst);
        let p = inst.orient.transform(pin.offset, m.width, m.height);
        Point::new(inst.origin.x + p.x, inst.origin.y + p.y)
    }

    /// Absolute pin shape, for snapping route endpoints onto pins.
    pub fn pin_shape(&self, inst: &Instance, pin: &MasterPin) -> Rect {
        let m = self.master_of(inst);
        let a = inst.orient.transform(pin.shape.lo, m.width, m.height);
        let b = inst.orient.transform(pin.shape.hi, m.width, m.height);
        let r = Rect::from_corners(a, b);
        Rect {
            lo: Point::new(inst.origin.x + r.lo.x, inst.origin.y + r.lo.y),
            hi: Point::new(inst.origin.x + r.hi.x, inst.origin.y + r.hi.y),
        }
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let invalid = |m: String| Err(DesignError::Invalid(m));
        if !self.die.contains_rect(&self.core) {
            return invalid("core outside die".into());
        }
        for w in self.instances.windows(2) {
            if w[0].name == w[1].name {
                return Err(DesignError::DuplicateName(format!("instance {}", w[0].name)));
            }
        }
        for w in self.ports.windows(2) {
            if w[0].name == w[1].name {
                return Err(DesignError::DuplicateName(format!("port {}", w[0].name)));
            }
        }
        for w in self.nets.windows(2) {
            if w[0].name == w[1].name {
                return Err(DesignError::DuplicateName(format!("net {}", w[0].name)));
            }
        }
        for inst in &self.instances {
            if self.tech.master(&inst.master).is_none() {
                return Err(DesignError::UnknownMaster(inst.master.clone()));
            }
            if !self.die.contains(inst.origin) {
                return invalid(format!("instance {} origin outside die", inst.name));
            }
        }
        for p in &self.ports {
            if !self.die.contains(p.position) {
                return invalid(format!("port {} outside die", p.name));
            }
        }
        let mut seen_pins: HashMap<(&PinOwner, &str), &str> = HashMap::new();
        for net in &self.nets {
            if net.pins.is_empty() {
                return invalid(format!("net {} has no pins", net.name));
            }
            if net.pins.iter().filter(|p| p.role == NetPinRole::Driver).count() > 1 {
                return invalid(format!("net {} has more than one driver", net.name));
            }
            for p in &net.pins {
                let expected = match &p.owner {
                    PinOwner::Instance(i) => {
                        let inst = self
                            .instance(i)
                            .ok_or_else(|| DesignError::Invalid(format!("net {} references unknown instance {i}", net.name)))?;
                        let mpin = self.master_of(inst).pin(&p.pin).ok_or_else(|| {
                            DesignError::Invalid(format!("net {} references unknown pin {i}/{}", net.name, p.pin))
                        })?;
                        self.pin_position(inst, mpin)
                    }
                    PinOwner::Port(n) => {
                        let idx = self
                            .port_index(n)
                            .ok_or_else(|| DesignError::Invalid(format!("net {} references unknown port {n}", net.name)))?;
                        self.ports[idx].position
                    }
                };
                if expected != p.position {
                    return invalid(format!("net {} pin {} position mismatch", net.name, p.label()));
                }
                if let Some(other) = seen_pins.insert((&p.owner, p.pin.as_str()), net.name.as_str()) {
                    return invalid(format!("pin {} on nets {other} and {}", p.label(), net.name));
                }
            }
            for s in &net.routing {
                if s.xs != s.xe && s.ys != s.ye {
                    return Err(DesignError::Geometry(format!("net {} has a diagonal segment", net.name)));
                }
                if self.tech.layer(s.layer).is_none() {
                    return Err(DesignError::Tech(format!("net {} uses unknown layer {}", net.name, s.layer)));
                }
                if !self.die.contains(s.start()) || !self.die.contains(s.end()) {
                    return Err(DesignError::Geometry(format!("net {} routes outside the die", net.name)));
                }
            }
            for v in &net.vias {
                if self.tech.via_def(v.layer_bot, v.layer_top).is_none() {
                    return Err(DesignError::Tech(format!(
                        "net {} uses via {}-{} with no definition",
                        net.name, v.layer_bot, v.layer_top
                    )));
                }
                if !self.die.contains(v.at()) {
                    return Err(DesignError::Geometry(format!("net {} has a via outside the die", net.name)));
                }
            }
        }
        Ok(())
    }

    /// Number of connected pins across all nets.
    pub fn pin_count(&self) -> usize {
        self.nets.iter().map(|n| n.pins.len()).sum()
    }
}

/// Resolves pin roles: the OUTPUT instance pin or INPUT port drives the net.
/// Nets without such a pin take their first pin as driver.
pub(crate) fn assign_roles(
    net_name: &str,
    pins: &mut [NetPin],
    directions: &[PinDirection],
    line: Option<usize>,
    diags: &mut Vec<Diagnostic>,
) -> Result<(), DesignError> {
    let mut driver = None;
    for (i, (p, d)) in pins.iter().zip(directions).enumerate() {
        let drives = match p.owner {
            PinOwner::Instance(_) => *d == PinDirection::Output,
            PinOwner::Port(_) => *d == PinDirection::Input,
        };
        if drives {
            if driver.is_some() {
                return Err(DesignError::Invalid(format!("net {net_name} has more than one driver")));
            }
            driver = Some(i);
        }
    }
    let driver = match driver {
        Some(d) => d,
        None => {
            if pins.is_empty() {
                return Ok(());
            }
            diags.push(Diagnostic::new(line, format!("net {net_name} has no driver; using first pin")));
            0
        }
    };
    for (i, p) in pins.iter_mut().enumerate() {
        p.role = if i == driver { NetPinRole::Driver } else { NetPinRole::Load };
    }
    Ok(())
}
