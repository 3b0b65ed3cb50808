// SPDX-License-Identifier: Apache-2.0

//! LEF subset: `UNITS`, `SITE`, routing `LAYER`s, `VIA`s and `MACRO`s with pins.
//! The grammar is documented in `docs/formats.md`.

use std::fmt::Write as _;

use super::lex::{Lexer, COORD_LIMIT};
use super::tech::{Layer, LayerDirection, Master, MasterClass, MasterPin, PinDirection, Site, TechLib, ViaDef};
use super::{DesignError, Diagnostic, Parsed};
use crate::geom::{Point, Rect};

struct LefReader<'a> {
    lx: Lexer<'a>,
    dbu: Option<u32>,
    diags: Vec<Diagnostic>,
    layers: Vec<Layer>,
    cut_layers: Vec<String>,
    vias: Vec<ViaDef>,
    sites: Vec<Site>,
    masters: Vec<Master>,
}

impl<'a> LefReader<'a> {
    fn warn(&mut self, msg: impl Into<String>) {
        let line = self.lx.line();
        self.diags.push(Diagnostic::new(Some(line), msg));
    }

    fn dist(&mut self) -> Result<i64, DesignError> {
        let dbu = self.dbu.ok_or_else(|| self.lx.err("missing UNITS DATABASE MICRONS before first dimension"))?;
        let v = self.lx.float()? * dbu as f64;
        if v.abs() > COORD_LIMIT as f64 {
            return Err(self.lx.err(format!("dimension {v} out of range")));
        }
        Ok(v.round() as i64)
    }

    fn name_taken(&self, name: &str) -> bool {
        self.layers.iter().any(|l| l.name == name) || self.cut_layers.iter().any(|c| c == name)
    }

    fn parse(mut self) -> Result<Parsed<TechLib>, DesignError> {
        while let Some(tok) = self.lx.next() {
            match tok {
                "UNITS" => self.units()?,
                "LAYER" => self.layer()?,
                "VIA" => self.via()?,
                "SITE" => self.site()?,
                "MACRO" => self.macro_()?,
                "END" => {
                    if self.lx.eat("LIBRARY") {
                        break;
                    }
                    return Err(self.lx.err("unexpected END"));
                }
                "PROPERTYDEFINITIONS" | "SPACING" => {
                    self.warn(format!("skipped {tok} section"));
                    self.lx.skip_block(tok)?;
                }
                "VIARULE" | "NONDEFAULTRULE" => {
                    let name = self.lx.expect_any("name")?;
                    self.warn(format!("skipped {tok} {name}"));
                    self.lx.skip_block(name)?;
                }
                "VERSION" | "DIVIDERCHAR" | "BUSBITCHARS" => self.lx.skip_statement()?,
                other => {
                    self.warn(format!("skipped statement {other}"));
                    self.lx.skip_statement()?;
                }
            }
        }
        let dbu = self.dbu.ok_or_else(|| DesignError::Parse { line: 1, message: "missing UNITS DATABASE MICRONS".into() })?;
        let tech = TechLib::new(dbu, self.layers, self.vias, self.sites, self.masters, Vec::new())?;
        Ok(Parsed { value: tech, diagnostics: self.diags })
    }

    fn units(&mut self) -> Result<(), DesignError> {
        loop {
            match self.lx.expect_any("UNITS statement")? {
                "END" => {
                    self.lx.expect("UNITS")?;
                    return Ok(());
                }
                "DATABASE" => {
                    self.lx.expect("MICRONS")?;
                    let v = self.lx.int()?;
                    if !(1..=1_000_000).contains(&v) {
                        return Err(self.lx.err(format!("invalid DATABASE MICRONS {v}")));
                    }
                    self.dbu = Some(v as u32);
                    self.lx.expect(";")?;
                }
                _ => self.lx.skip_statement()?,
            }
        }
    }

    fn layer(&mut self) -> Result<(), DesignError> {
        let name = self.lx.expect_any("layer name")?;
        if self.name_taken(name) {
            return Err(DesignError::DuplicateName(format!("layer {name}")));
        }
        let mut ty = None;
        let mut pitch = None;
        let mut direction = None;
        loop {
            match self.lx.expect_any("layer statement")? {
                "END" => {
                    self.lx.expect(name)?;
                    break;
                }
                "TYPE" => {
                    ty = Some(self.lx.expect_any("layer type")?);
                    self.lx.expect(";")?;
                }
                "PITCH" => {
                    pitch = Some(self.dist()?);
                    if !self.lx.eat(";") {
                        self.dist()?;
                        self.lx.expect(";")?;
                    }
                }
                "DIRECTION" => {
                    direction = match self.lx.expect_any("direction")? {
                        "HORIZONTAL" => Some(LayerDirection::Horizontal),
                        "VERTICAL" => Some(LayerDirection::Vertical),
                        other => return Err(self.lx.err(format!("unsupported direction {other}"))),
                    };
                    self.lx.expect(";")?;
                }
                _ => self.lx.skip_statement()?,
            }
        }
        match ty {
            Some("ROUTING") => {
                let index = self.layers.len() as u32 + 1;
                let pitch = pitch.ok_or_else(|| self.lx.err(format!("routing layer {name} has no PITCH")))?;
                if pitch <= 0 {
                    return Err(self.lx.err(format!("routing layer {name} has non-positive PITCH")));
                }
                let direction = direction.unwrap_or(if index % 2 == 1 {
                    LayerDirection::Horizontal
                } else {
                    LayerDirection::Vertical
                });
                self.layers.push(Layer { name: name.to_string(), index, pitch, direction, unit_r: 0.0, unit_c: 0.0 });
            }
            Some(_) => self.cut_layers.push(name.to_string()),
            None => return Err(self.lx.err(format!("layer {name} has no TYPE"))),
        }
        Ok(())
    }

    fn via(&mut self) -> Result<(), DesignError> {
        let name = self.lx.expect_any("via name")?;
        if self.vias.iter().any(|v| v.name == name) {
            return Err(DesignError::DuplicateName(format!("via {name}")));
        }
        let mut routing = Vec::new();
        let mut resistance = 0.0;
        self.lx.eat("DEFAULT");
        loop {
            match self.lx.expect_any("via statement")? {
                "END" => {
                    self.lx.expect(name)?;
                    break;
                }
                "LAYER" => {
                    let l = self.lx.expect_any("layer name")?;
                    if let Some(layer) = self.layers.iter().find(|x| x.name == l) {
                        routing.push(layer.index);
                    } else if !self.cut_layers.iter().any(|c| c == l) {
                        return Err(self.lx.err(format!("via {name} references unknown layer {l}")));
                    }
                    self.lx.expect(";")?;
                }
                "RESISTANCE" => {
                    resistance = self.lx.float()?;
                    self.lx.expect(";")?;
                }
                _ => self.lx.skip_statement()?,
            }
        }
        routing.sort_unstable();
        routing.dedup();
        match routing.as_slice() {
            [bot, top] => {
                self.vias.push(ViaDef { name: name.to_string(), layer_bot: *bot, layer_top: *top, resistance });
            }
            _ => self.warn(format!("via {name} does not join exactly two routing layers; skipped")),
        }
        Ok(())
    }

    fn site(&mut self) -> Result<(), DesignError> {
        let name = self.lx.expect_any("site name")?;
        let mut size = None;
        loop {
            match self.lx.expect_any("site statement")? {
                "END" => {
                    self.lx.expect(name)?;
                    break;
                }
                "SIZE" => {
                    let w = self.dist()?;
                    self.lx.expect("BY")?;
                    let h = self.dist()?;
                    self.lx.expect(";")?;
                    size = Some((w, h));
                }
                _ => self.lx.skip_statement()?,
            }
        }
        let (width, height) = size.ok_or_else(|| self.lx.err(format!("site {name} has no SIZE")))?;
        if self.sites.iter().any(|s| s.name == name) {
            return Err(DesignError::DuplicateName(format!("site {name}")));
        }
        self.sites.push(Site { name: name.to_string(), width, height });
        Ok(())
    }

    fn macro_(&mut self) -> Result<(), DesignError> {
        let name = self.lx.expect_any("macro name")?;
        if self.masters.iter().any(|m| m.name == name) {
            return Err(DesignError::DuplicateName(format!("master {name}")));
        }
        let mut class = None;
        let mut size = None;
        let mut origin = Point::new(0, 0);
        let mut pins: Vec<(MasterPin, bool)> = Vec::new();
        loop {
            match self.lx.expect_any("macro statement")? {
                "END" => {
                    self.lx.expect(name)?;
                    break;
                }
                "CLASS" => {
                    class = Some(match self.lx.expect_any("class")? {
                        "CORE" => MasterClass::Core,
                        "BLOCK" => MasterClass::Block,
                        "PAD" => MasterClass::Pad,
                        _ => MasterClass::Other,
                    });
                    self.lx.skip_statement()?;
                }
                "SIZE" => {
                    let w = self.dist()?;
                    self.lx.expect("BY")?;
                    let h = self.dist()?;
                    self.lx.expect(";")?;
                    size = Some((w, h));
                }
                "ORIGIN" => {
                    origin = Point::new(self.dist()?, self.dist()?);
                    self.lx.expect(";")?;
                }
                "PIN" => {
                    if let Some(p) = self.pin(origin)? {
                        if pins.iter().any(|(q, _)| q.name == p.0.name) {
                            return Err(DesignError::DuplicateName(format!("pin {name}/{}", p.0.name)));
                        }
                        pins.push(p);
                    }
                }
                "OBS" => loop {
                    if self.lx.eat("END") {
                        break;
                    }
                    self.lx.skip_statement()?;
                },
                _ => self.lx.skip_statement()?,
            }
        }
        let (width, height) = size.ok_or_else(|| self.lx.err(format!("macro {name} has no SIZE")))?;
        let center = Point::new(width / 2, height / 2);
        let pins = pins
            .into_iter()
            .map(|(mut p, has_shape)| {
                if !has_shape {
                    p.offset = center;
                    p.shape = Rect { lo: center, hi: center };
                }
                p
            })
            .collect();
        self.masters.push(Master {
            name: name.to_string(),
            width,
            height,
            class,
            pins,
            drive_resistance: 0.0,
            intrinsic_delay: 0.0,
            is_sequential: false,
        });
        Ok(())
    }

    /// Returns `None` for power/ground pins.
    fn pin(&mut self, origin: Point) -> Result<Option<(MasterPin, bool)>, DesignError> {
        let name = self.lx.expect_any("pin name")?;
        let mut direction = PinDirection::Input;
        let mut use_ = "SIGNAL";
        let mut shape = None;
        loop {
            match self.lx.expect_any("pin statement")? {
                "END" => {
                    self.lx.expect(name)?;
                    break;
                }
                "DIRECTION" => {
                    direction = match self.lx.expect_any("direction")? {
                        "INPUT" => PinDirection::Input,
                        "OUTPUT" => PinDirection::Output,
                        _ => PinDirection::Inout,
                    };
                    self.lx.skip_statement()?;
                }
                "USE" => {
                    use_ = self.lx.expect_any("use")?;
                    self.lx.expect(";")?;
                }
                "PORT" => loop {
                    match self.lx.expect_any("port statement")? {
                        "END" => break,
                        "RECT" if shape.is_none() => {
                            let (x1, y1, x2, y2) = (self.dist()?, self.dist()?, self.dist()?, self.dist()?);
                            self.lx.expect(";")?;
                            let a = Point::new(x1 + origin.x, y1 + origin.y);
                            let b = Point::new(x2 + origin.x, y2 + origin.y);
                            shape = Some(Rect::from_corners(a, b));
                        }
                        _ => self.lx.skip_statement()?,
                    }
                },
                _ => self.lx.skip_statement()?,
            }
        }
        if matches!(use_, "POWER" | "GROUND") {
            return Ok(None);
        }
        let s = shape.unwrap_or(Rect { lo: Point::new(0, 0), hi: Point::new(0, 0) });
        let offset = Point::new((s.lo.x + s.hi.x).div_euclid(2), (s.lo.y + s.hi.y).div_euclid(2));
        Ok(Some((
            MasterPin { name: name.to_string(), direction, is_clock: use_ == "CLOCK", offset, shape: s, capacitance: 0.0 },
            shape.is_some(),
        )))
    }
}

/// Parses the supported LEF subset. Electrical values are left at zero; apply a
/// [`TechSidecar`](super::TechSidecar) to fill them in.
pub fn parse_lef(text: &str) -> Result<Parsed<TechLib>, DesignError> {
    LefReader {
        lx: Lexer::new(text),
        dbu: None,
        diags: Vec::new(),
        layers: Vec::new(),
        cut_layers: Vec::new(),
        vias: Vec::new(),
        sites: Vec::new(),
        masters: Vec::new(),
    }
    .parse()
}

fn microns(v: i64, dbu: u32) -> String {
    format!("{}", v as f64 / dbu as f64)
}

/// Writes the geometric part of a library in the LEF subset.
pub fn write_lef(tech: &TechLib) -> String {
    let dbu = tech.dbu_per_micron;
    let um = |v: i64| microns(v, dbu);
    let mut out = String::new();
    let _ = writeln!(out, "VERSION 5.8 ;\nUNITS\n  DATABASE MICRONS {dbu} ;\nEND UNITS\n");
    for s in &tech.sites {
        let _ = writeln!(out, "SITE {}\n  CLASS CORE ;\n  SIZE {} BY {} ;\nEND {}\n", s.name, um(s.width), um(s.height), s.name);
    }
    for l in &tech.layers {
        let dir = match l.direction {
            LayerDirection::Horizontal => "HORIZONTAL",
            LayerDirection::Vertical => "VERTICAL",
        };
        let _ = writeln!(
            out,
            "LAYER {}\n  TYPE ROUTING ;\n  DIRECTION {dir} ;\n  PITCH {} ;\nEND {}\n",
            l.name,
            um(l.pitch),
            l.name
        );
    }
    for v in &tech.vias {
        let bot = tech.layer(v.layer_bot).map(|l| l.name.as_str()).unwrap_or("?");
        let top = tech.layer(v.layer_top).map(|l| l.name.as_str()).unwrap_or("?");
        let _ = writeln!(out, "VIA {} DEFAULT\n  LAYER {bot} ;\n  LAYER {top} ;\nEND {}\n", v.name, v.name);
    }
    let pin_layer = tech.layers.first().map(|l| l.name.as_str()).unwrap_or("M1");
    for m in &tech.masters {
        let _ = writeln!(out, "MACRO {}", m.name);
        if let Some(c) = m.class {
            let _ = writeln!(out, "  CLASS {} ;", c.keyword());
        }
        let _ = writeln!(out, "  SIZE {} BY {} ;", um(m.width), um(m.height));
        for p in &m.pins {
            let _ = writeln!(out, "  PIN {}\n    DIRECTION {} ;", p.name, p.direction.keyword());
            if p.is_clock {
                let _ = writeln!(out, "    USE CLOCK ;");
            }
            let _ = writeln!(
                out,
                "    PORT\n      LAYER {pin_layer} ;\n      RECT {} {} {} {} ;\n    END\n  END {}",
                um(p.shape.lo.x),
                um(p.shape.lo.y),
                um(p.shape.hi.x),
                um(p.shape.hi.y),
                p.name
            );
        }
        let _ = writeln!(out, "END {}\n", m.name);
    }
    out.push_str("END LIBRARY\n");
    out
}
