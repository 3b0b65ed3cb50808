// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{DesignError, InstanceClass};
use crate::geom::{Point, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerDirection {
    Horizontal,
    Vertical,
}

/// A routing layer. `index` is the 1-based routing-layer ordinal (M1 = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub index: u32,
    pub pitch: i64,
    pub direction: LayerDirection,
    /// Resistance per DBU of wire, ohm.
    pub unit_r: f64,
    /// Capacitance per DBU of wire, farad.
    pub unit_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViaDef {
    pub name: String,
    pub layer_bot: u32,
    pub layer_top: u32,
    /// Ohm; zero when unknown.
    pub resistance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PinDirection {
    Input,
    Output,
    Inout,
}

impl PinDirection {
    pub fn keyword(self) -> &'static str {
        match self {
            PinDirection::Input => "INPUT",
            PinDirection::Output => "OUTPUT",
            PinDirection::Inout => "INOUT",
        }
    }
}

/// LEF macro class, kept when it determines an instance class on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MasterClass {
    Core,
    Block,
    Pad,
    Other,
}

impl MasterClass {
    pub fn keyword(self) -> &'static str {
        match self {
            MasterClass::Core => "CORE",
            MasterClass::Block => "BLOCK",
            MasterClass::Pad => "PAD",
            MasterClass::Other => "COVER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterPin {
    pub name: String,
    pub direction: PinDirection,
    pub is_clock: bool,
    /// Pin reference point relative to the master origin.
    pub offset: Point,
    /// Pin shape relative to the master origin.
    pub shape: Rect,
    /// Farad.
    pub capacitance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Master {
    pub name: String,
    pub width: i64,
    pub height: i64,
    pub class: Option<MasterClass>,
    pub pins: Vec<MasterPin>,
    /// Ohm.
    pub drive_resistance: f64,
    /// Seconds.
    pub intrinsic_delay: f64,
    pub is_sequential: bool,
}

impl Master {
    pub fn pin(&self, name: &str) -> Option<&MasterPin> {
        self.pins.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub name: String,
    pub width: i64,
    pub height: i64,
}

/// Maps master names starting with `prefix` to an instance class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRule {
    pub prefix: String,
    pub class: InstanceClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TechLib {
    pub dbu_per_micron: u32,
    pub layers: Vec<Layer>,
    pub vias: Vec<ViaDef>,
    pub sites: Vec<Site>,
    pub masters: Vec<Master>,
    pub class_rules: Vec<ClassRule>,
    #[serde(skip)]
    master_index: HashMap<String, usize>,
}

impl TechLib {
    pub fn new(
        dbu_per_micron: u32,
        layers: Vec<Layer>,
        vias: Vec<ViaDef>,
        sites: Vec<Site>,
        masters: Vec<Master>,
        class_rules: Vec<ClassRule>,
    ) -> Result<Self, DesignError> {
        let mut tech = Self {
            dbu_per_micron,
            layers,
            vias,
            sites,
            masters,
            class_rules,
            master_index: HashMap::new(),
        };
        tech.reindex()?;
        tech.validate()?;
        Ok(tech)
    }

    fn reindex(&mut self) -> Result<(), DesignError> {
        self.master_index.clear();
        for (i, m) in self.masters.iter().enumerate() {
            if self.master_index.insert(m.name.clone(), i).is_some() {
                return Err(DesignError::DuplicateName(format!("master {}", m.name)));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        if self.dbu_per_micron == 0 {
            return Err(DesignError::Tech("dbu_per_micron must be positive".into()));
        }
        let mut names = std::collections::HashSet::new();
        for (i, l) in self.layers.iter().enumerate() {
            if !names.insert(l.name.as_str()) {
                return Err(DesignError::DuplicateName(format!("layer {}", l.name)));
            }
            if i > 0 && l.index <= self.layers[i - 1].index {
                return Err(DesignError::Tech(format!("layer {} index not increasing", l.name)));
            }
            if l.index == 0 || l.pitch <= 0 {
                return Err(DesignError::Tech(format!("layer {} needs index >= 1 and pitch > 0", l.name)));
            }
        }
        for v in &self.vias {
            if v.layer_bot >= v.layer_top || self.layer(v.layer_bot).is_none() || self.layer(v.layer_top).is_none() {
                return Err(DesignError::Tech(format!("via {} references invalid layers", v.name)));
            }
        }
        for m in &self.masters {
            let footprint = Rect { lo: Point::new(0, 0), hi: Point::new(m.width, m.height) };
            if m.width < 0 || m.height < 0 {
                return Err(DesignError::Tech(format!("master {} has negative size", m.name)));
            }
            for p in &m.pins {
                if !footprint.contains(p.offset) {
                    return Err(DesignError::Tech(format!(
                        "pin {}/{} offset outside footprint",
                        m.name, p.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn master(&self, name: &str) -> Option<&Master> {
        self.master_index.get(name).map(|&i| &self.masters[i])
    }

    pub fn layer(&self, index: u32) -> Option<&Layer> {
        self.layers.iter().find(|l| l.index == index)
    }

    pub fn layer_by_name(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn via_def(&self, bot: u32, top: u32) -> Option<&ViaDef> {
        self.vias.iter().find(|v| v.layer_bot == bot && v.layer_top == top)
    }

    pub fn via_by_name(&self, name: &str) -> Option<&ViaDef> {
        self.vias.iter().find(|v| v.name == name)
    }

    pub fn site(&self, name: &str) -> Option<&Site> {
        self.sites.iter().find(|s| s.name == name)
    }

    /// Overlays electrical data and class rules from a sidecar description.
    pub fn apply_sidecar(&mut self, sidecar: &TechSidecar) -> Result<(), DesignError> {
        if let Some(dbu) = sidecar.dbu_per_micron {
            if dbu != self.dbu_per_micron {
                return Err(DesignError::Tech(format!(
                    "sidecar dbu_per_micron {dbu} differs from library {}",
                    self.dbu_per_micron
                )));
            }
        }
        for sl in &sidecar.layers {
            let layer = self
                .layers
                .iter_mut()
                .find(|l| l.name == sl.name)
                .ok_or_else(|| DesignError::Tech(format!("sidecar layer {} not in library", sl.name)))?;
            layer.unit_r = sl.unit_r;
            layer.unit_c = sl.unit_c;
        }
        for sv in &sidecar.vias {
            let via = self
                .vias
                .iter_mut()
                .find(|v| v.name == sv.name)
                .ok_or_else(|| DesignError::Tech(format!("sidecar via {} not in library", sv.name)))?;
            via.resistance = sv.resistance;
        }
        for sm in &sidecar.masters {
            let idx = *self
                .master_index
                .get(&sm.name)
                .ok_or_else(|| DesignError::UnknownMaster(sm.name.clone()))?;
            let m = &mut self.masters[idx];
            m.drive_resistance = sm.drive_resistance;
            m.intrinsic_delay = sm.intrinsic_delay;
            m.is_sequential = sm.is_sequential;
            for (pin, cap) in &sm.pins {
                let p = m.pins.iter_mut().find(|p| &p.name == pin).ok_or_else(|| {
                    DesignError::Tech(format!("sidecar pin {}/{} not in library", sm.name, pin))
                })?;
                p.capacitance = *cap;
            }
        }
        if !sidecar.class_rules.is_empty() {
            self.class_rules = sidecar.class_rules.clone();
        }
        Ok(())
    }

    /// Extracts the sidecar that, applied to the LEF view of this library, restores it.
    pub fn sidecar(&self) -> TechSidecar {
        TechSidecar {
            dbu_per_micron: Some(self.dbu_per_micron),
            layers: self
                .layers
                .iter()
                .map(|l| SidecarLayer { name: l.name.clone(), unit_r: l.unit_r, unit_c: l.unit_c })
                .collect(),
            vias: self
                .vias
                .iter()
                .map(|v| SidecarVia { name: v.name.clone(), resistance: v.resistance })
                .collect(),
            masters: self
                .masters
                .iter()
                .map(|m| SidecarMaster {
                    name: m.name.clone(),
                    drive_resistance: m.drive_resistance,
                    intrinsic_delay: m.intrinsic_delay,
                    is_sequential: m.is_sequential,
                    pins: m.pins.iter().map(|p| (p.name.clone(), p.capacitance)).collect(),
                })
                .collect(),
            class_rules: self.class_rules.clone(),
        }
    }
}

/// Electrical parameters that the LEF subset does not carry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechSidecar {
    #[serde(default)]
    pub dbu_per_micron: Option<u32>,
    #[serde(default)]
    pub layers: Vec<SidecarLayer>,
    #[serde(default)]
    pub vias: Vec<SidecarVia>,
    #[serde(default)]
    pub masters: Vec<SidecarMaster>,
    #[serde(default)]
    pub class_rules: Vec<ClassRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarLayer {
    pub name: String,
    pub unit_r: f64,
    pub unit_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarVia {
    pub name: String,
    pub resistance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarMaster {
    pub name: String,
    #[serde(default)]
    pub drive_resistance: f64,
    #[serde(default)]
    pub intrinsic_delay: f64,
    #[serde(default)]
    pub is_sequential: bool,
    /// Pin name to input capacitance, farad.
    #[serde(default)]
    pub pins: std::collections::BTreeMap<String, f64>,
}

/// Instance class of a master: LEF class first, then name-prefix rules, else logic.
pub fn classify_instance(master: &str, tech: &TechLib) -> Result<InstanceClass, DesignError> {
    let m = tech.master(master).ok_or_else(|| DesignError::UnknownMaster(master.to_string()))?;
    match m.class {
        Some(MasterClass::Pad) => return Ok(InstanceClass::IoPad),
        Some(MasterClass::Block) => return Ok(InstanceClass::Macro),
        _ => {}
    }
    Ok(tech
        .class_rules
        .iter()
        .find(|r| master.starts_with(&r.prefix))
        .map(|r| r.class)
        .unwrap_or(InstanceClass::Logic))
}
