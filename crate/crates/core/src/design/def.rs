// SPDX-License-Identifier: Apache-2.0

//! DEF subset: `DIEAREA`, `ROW`, `COMPONENTS`, `PINS` and `NETS` with routed
//! wiring. The grammar is documented in `docs/formats.md`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use super::lex::Lexer;
use super::tech::{PinDirection, TechLib};
use super::{
    assign_roles, classify_instance, Design, DesignError, Diagnostic, Instance, Net, NetPin, NetPinRole, Orient,
    Parsed, PinOwner, Port,
};
use crate::geom::{Point, Rect, ViaInstance, WireSegment};

/// Sections skipped wholesale, terminated by `END <keyword>`.
const SKIPPED_SECTIONS: &[&str] = &[
    "VIAS",
    "SPECIALNETS",
    "BLOCKAGES",
    "REGIONS",
    "GROUPS",
    "PROPERTYDEFINITIONS",
    "NONDEFAULTRULES",
    "FILLS",
    "SCANCHAINS",
    "STYLES",
    "SLOTS",
    "PINPROPERTIES",
];

struct DefReader<'a, 't> {
    lx: Lexer<'a>,
    tech: &'t TechLib,
    diags: Vec<Diagnostic>,
}

struct RawPort {
    port: Port,
}

impl<'a> DefReader<'a, '_> {
    fn warn(&mut self, msg: impl Into<String>) {
        let line = self.lx.line();
        self.diags.push(Diagnostic::new(Some(line), msg));
    }

    fn point(&mut self) -> Result<Point, DesignError> {
        self.lx.expect("(")?;
        let p = Point::new(self.lx.int()?, self.lx.int()?);
        self.lx.expect(")")?;
        Ok(p)
    }

    /// Skips `+ KEYWORD ...` attributes up to the next `+` or `;`.
    fn skip_attribute(&mut self) -> Result<(), DesignError> {
        loop {
            match self.lx.peek() {
                Some("+") | Some(";") => return Ok(()),
                Some(_) => {
                    self.lx.next();
                }
                None => return Err(self.lx.err("unterminated statement")),
            }
        }
    }

    fn parse(mut self) -> Result<Parsed<Design>, DesignError> {
        let mut name = None;
        let mut die = None;
        let mut rows: Vec<Rect> = Vec::new();
        let mut instances = None;
        let mut ports = None;
        let mut nets = None;
        while let Some(tok) = self.lx.next() {
            match tok {
                "DESIGN" => {
                    name = Some(self.lx.expect_any("design name")?.to_string());
                    self.lx.expect(";")?;
                }
                "UNITS" => {
                    self.lx.expect("DISTANCE")?;
                    self.lx.expect("MICRONS")?;
                    let dbu = self.lx.int()?;
                    if dbu != self.tech.dbu_per_micron as i64 {
                        return Err(self.lx.err(format!(
                            "UNITS DISTANCE MICRONS {dbu} differs from library {}",
                            self.tech.dbu_per_micron
                        )));
                    }
                    self.lx.expect(";")?;
                }
                "DIEAREA" => {
                    let mut pts = Vec::new();
                    while self.lx.peek() == Some("(") {
                        pts.push(self.point()?);
                    }
                    self.lx.expect(";")?;
                    if pts.len() < 2 {
                        return Err(self.lx.err("DIEAREA needs at least two points"));
                    }
                    die = Rect::bounding(pts);
                }
                "ROW" => rows.push(self.row()?),
                "COMPONENTS" => instances = Some(self.components()?),
                "PINS" => ports = Some(self.pins()?),
                "NETS" => {
                    let ports_ref = ports.as_deref().unwrap_or(&[]);
                    let insts_ref = instances.as_deref().unwrap_or(&[]);
                    nets = Some(self.nets(insts_ref, ports_ref)?);
                }
                "END" => {
                    self.lx.expect("DESIGN")?;
                    break;
                }
                s if SKIPPED_SECTIONS.contains(&s) => {
                    self.warn(format!("skipped {s} section"));
                    self.lx.skip_block(s)?;
                }
                "VERSION" | "DIVIDERCHAR" | "BUSBITCHARS" => self.lx.skip_statement()?,
                other => {
                    self.warn(format!("skipped statement {other}"));
                    self.lx.skip_statement()?;
                }
            }
        }
        let die = die.ok_or_else(|| DesignError::Parse { line: self.lx.line(), message: "missing DIEAREA".into() })?;
        let core = Rect::bounding(rows.iter().flat_map(|r| [r.lo, r.hi])).unwrap_or(die);
        let name = name.unwrap_or_else(|| "design".to_string());
        let instances = instances.unwrap_or_default();
        let ports: Vec<Port> = ports.unwrap_or_default().into_iter().map(|p| p.port).collect();
        let nets = nets.unwrap_or_default();
        let design = Design::new(name, Arc::new(self.tech.clone()), die, core, instances, ports, nets)?;
        Ok(Parsed { value: design, diagnostics: self.diags })
    }

    fn row(&mut self) -> Result<Rect, DesignError> {
        let _name = self.lx.expect_any("row name")?;
        let site = self.lx.expect_any("site name")?;
        let origin = Point::new(self.lx.int()?, self.lx.int()?);
        let _orient = self.lx.expect_any("orientation")?;
        let (mut nx, mut ny, mut sx, mut sy) = (1, 1, 0, 0);
        if self.lx.eat("DO") {
            nx = self.lx.int()?;
            self.lx.expect("BY")?;
            ny = self.lx.int()?;
            if self.lx.eat("STEP") {
                sx = self.lx.int()?;
                sy = self.lx.int()?;
            }
        }
        self.skip_attribute()?;
        while self.lx.eat("+") {
            self.skip_attribute()?;
        }
        self.lx.expect(";")?;
        if nx < 1 || ny < 1 || sx < 0 || sy < 0 {
            return Err(self.lx.err("invalid ROW repetition"));
        }
        let site_dims = self.tech.site(site).map(|s| (s.width, s.height));
        let unit_w = if sx > 0 { Some(sx) } else { site_dims.map(|s| s.0) };
        let unit_h = if sy > 0 { Some(sy) } else { site_dims.map(|s| s.1) };
        let (uw, uh) = match (unit_w, unit_h) {
            (Some(w), Some(h)) => (w, h),
            _ => return Err(self.lx.err(format!("ROW uses unknown site {site} without STEP"))),
        };
        let hi = Point::new(origin.x + nx * uw, origin.y + ny * uh);
        Ok(Rect { lo: origin, hi })
    }

    fn components(&mut self) -> Result<Vec<Instance>, DesignError> {
        let expected = self.lx.count()?;
        self.lx.expect(";")?;
        let mut out = Vec::new();
        loop {
            match self.lx.expect_any("component")? {
                "END" => {
                    self.lx.expect("COMPONENTS")?;
                    break;
                }
                "-" => {}
                other => return Err(self.lx.err(format!("expected '-' in COMPONENTS, found '{other}'"))),
            }
            let name = self.lx.expect_any("component name")?.to_string();
            let master = self.lx.expect_any("master name")?.to_string();
            let mut placement = None;
            loop {
                match self.lx.expect_any("component attribute")? {
                    ";" => break,
                    "+" => match self.lx.expect_any("attribute")? {
                        kw @ ("PLACED" | "FIXED") => {
                            let p = self.point()?;
                            let o = self.lx.expect_any("orientation")?;
                            let orient = Orient::parse(o).ok_or_else(|| self.lx.err(format!("bad orientation {o}")))?;
                            placement = Some((p, orient, kw == "FIXED"));
                        }
                        "UNPLACED" => return Err(self.lx.err(format!("component {name} is unplaced"))),
                        _ => self.skip_attribute()?,
                    },
                    other => return Err(self.lx.err(format!("unexpected '{other}' in component {name}"))),
                }
            }
            let (origin, orient, fixed) =
                placement.ok_or_else(|| self.lx.err(format!("component {name} has no placement")))?;
            let class = classify_instance(&master, self.tech)?;
            out.push(Instance { name, master, origin, orient, fixed, class });
        }
        if out.len() != expected {
            return Err(self.lx.err(format!("COMPONENTS declares {expected} but lists {}", out.len())));
        }
        Ok(out)
    }

    fn pins(&mut self) -> Result<Vec<RawPort>, DesignError> {
        let expected = self.lx.count()?;
        self.lx.expect(";")?;
        let mut out = Vec::new();
        loop {
            match self.lx.expect_any("pin")? {
                "END" => {
                    self.lx.expect("PINS")?;
                    break;
                }
                "-" => {}
                other => return Err(self.lx.err(format!("expected '-' in PINS, found '{other}'"))),
            }
            let name = self.lx.expect_any("pin name")?.to_string();
            let mut direction = PinDirection::Inout;
            let mut position = None;
            loop {
                match self.lx.expect_any("pin attribute")? {
                    ";" => break,
                    "+" => match self.lx.expect_any("attribute")? {
                        "DIRECTION" => {
                            direction = match self.lx.expect_any("direction")? {
                                "INPUT" => PinDirection::Input,
                                "OUTPUT" => PinDirection::Output,
                                _ => PinDirection::Inout,
                            }
                        }
                        "PLACED" | "FIXED" | "COVER" => {
                            position = Some(self.point()?);
                            self.lx.expect_any("orientation")?;
                        }
                        _ => self.skip_attribute()?,
                    },
                    other => return Err(self.lx.err(format!("unexpected '{other}' in pin {name}"))),
                }
            }
            let position = position.ok_or_else(|| self.lx.err(format!("pin {name} has no placement")))?;
            out.push(RawPort { port: Port { name, position, direction } });
        }
        if out.len() != expected {
            return Err(self.lx.err(format!("PINS declares {expected} but lists {}", out.len())));
        }
        Ok(out)
    }

    fn nets(&mut self, instances: &[Instance], ports: &[RawPort]) -> Result<Vec<Net>, DesignError> {
        let inst_by_name: HashMap<&str, &Instance> = instances.iter().map(|i| (i.name.as_str(), i)).collect();
        let port_by_name: HashMap<&str, &Port> = ports.iter().map(|p| (p.port.name.as_str(), &p.port)).collect();
        let expected = self.lx.count()?;
        self.lx.expect(";")?;
        let mut out = Vec::new();
        loop {
            match self.lx.expect_any("net")? {
                "END" => {
                    self.lx.expect("NETS")?;
                    break;
                }
                "-" => {}
                other => return Err(self.lx.err(format!("expected '-' in NETS, found '{other}'"))),
            }
            let line = self.lx.line();
            let name = self.lx.expect_any("net name")?.to_string();
            let mut pins = Vec::new();
            let mut dirs = Vec::new();
            while self.lx.eat("(") {
                let owner = self.lx.expect_any("pin owner")?;
                let pin = self.lx.expect_any("pin name")?;
                self.lx.expect(")")?;
                if owner == "PIN" {
                    let port = port_by_name.get(pin).ok_or_else(|| self.lx.err(format!("net {name} references unknown pin {pin}")))?;
                    pins.push(NetPin {
                        owner: PinOwner::Port(pin.to_string()),
                        pin: "PIN".to_string(),
                        position: port.position,
                        role: NetPinRole::Load,
                    });
                    dirs.push(port.direction);
                } else {
                    let inst = inst_by_name
                        .get(owner)
                        .ok_or_else(|| self.lx.err(format!("net {name} references unknown component {owner}")))?;
                    let master = self.tech.master(&inst.master).ok_or_else(|| DesignError::UnknownMaster(inst.master.clone()))?;
                    let mpin = master
                        .pin(pin)
                        .ok_or_else(|| self.lx.err(format!("net {name} references unknown pin {owner}/{pin}")))?;
                    let off = inst.orient.transform(mpin.offset, master.width, master.height);
                    pins.push(NetPin {
                        owner: PinOwner::Instance(owner.to_string()),
                        pin: pin.to_string(),
                        position: Point::new(inst.origin.x + off.x, inst.origin.y + off.y),
                        role: NetPinRole::Load,
                    });
                    dirs.push(mpin.direction);
                }
            }
            let mut routing = Vec::new();
            let mut vias = Vec::new();
            loop {
                match self.lx.expect_any("net attribute")? {
                    ";" => break,
                    "+" => match self.lx.expect_any("attribute")? {
                        "ROUTED" | "FIXED" | "COVER" | "NOSHIELD" => self.wiring(&name, &mut routing, &mut vias)?,
                        _ => self.skip_attribute()?,
                    },
                    other => return Err(self.lx.err(format!("unexpected '{other}' in net {name}"))),
                }
            }
            if pins.is_empty() {
                return Err(DesignError::Parse { line, message: format!("net {name} has no pins") });
            }
            assign_roles(&name, &mut pins, &dirs, Some(line), &mut self.diags)?;
            out.push(Net { name, pins, routing, vias });
        }
        if out.len() != expected {
            return Err(self.lx.err(format!("NETS declares {expected} but lists {}", out.len())));
        }
        Ok(out)
    }

    fn route_point(&mut self, prev: Option<Point>) -> Result<Point, DesignError> {
        self.lx.expect("(")?;
        let coord = |lx: &mut Lexer<'a>, prev: Option<i64>| -> Result<i64, DesignError> {
            if lx.eat("*") {
                prev.ok_or_else(|| lx.err("'*' without a previous point"))
            } else {
                lx.int()
            }
        };
        let x = coord(&mut self.lx, prev.map(|p| p.x))?;
        let y = coord(&mut self.lx, prev.map(|p| p.y))?;
        if !self.lx.eat(")") {
            // optional extension value
            self.lx.int()?;
            self.lx.expect(")")?;
        }
        Ok(Point::new(x, y))
    }

    fn wiring(&mut self, net: &str, routing: &mut Vec<WireSegment>, vias: &mut Vec<ViaInstance>) -> Result<(), DesignError> {
        'paths: loop {
            let lname = self.lx.expect_any("layer name")?;
            let mut layer = self
                .tech
                .layer_by_name(lname)
                .ok_or_else(|| self.lx.err(format!("net {net} uses unknown layer {lname}")))?
                .index;
            let mut prev: Option<Point> = None;
            loop {
                match self.lx.peek() {
                    Some("(") => {
                        let p = self.route_point(prev)?;
                        if let Some(q) = prev {
                            let seg = WireSegment::new(q.x, q.y, p.x, p.y, layer).map_err(|_| {
                                DesignError::Geometry(format!(
                                    "net {net}: non-rectilinear route ({},{})->({},{}) near line {}",
                                    q.x,
                                    q.y,
                                    p.x,
                                    p.y,
                                    self.lx.line()
                                ))
                            })?;
                            routing.push(seg);
                        }
                        prev = Some(p);
                    }
                    Some("NEW") => {
                        self.lx.next();
                        continue 'paths;
                    }
                    Some("+") | Some(";") => return Ok(()),
                    Some("TAPER") => {
                        self.lx.next();
                    }
                    Some("TAPERRULE") | Some("STYLE") | Some("MASK") | Some("SHAPE") => {
                        self.lx.next();
                        self.lx.expect_any("value")?;
                    }
                    Some(via_name) => {
                        let at = prev.ok_or_else(|| self.lx.err(format!("via {via_name} before any point")))?;
                        let def = self
                            .tech
                            .via_by_name(via_name)
                            .ok_or_else(|| self.lx.err(format!("net {net} uses unknown via {via_name}")))?;
                        layer = if layer == def.layer_bot {
                            def.layer_top
                        } else if layer == def.layer_top {
                            def.layer_bot
                        } else {
                            return Err(self.lx.err(format!("via {via_name} does not touch the current layer")));
                        };
                        vias.push(ViaInstance { xc: at.x, yc: at.y, layer_bot: def.layer_bot, layer_top: def.layer_top });
                        self.lx.next();
                    }
                    None => return Err(self.lx.err("unterminated wiring")),
                }
            }
        }
    }
}

/// Parses the supported DEF subset against a technology library.
pub fn parse_def(text: &str, tech: &TechLib) -> Result<Parsed<Design>, DesignError> {
    DefReader { lx: Lexer::new(text), tech, diags: Vec::new() }.parse()
}

/// Writes a design in the DEF subset. Output is deterministic: items are
/// emitted in canonical (name) order and each wire or via is its own path.
pub fn write_def(design: &Design) -> String {
    let tech = &design.tech;
    let layer_name = |i: u32| tech.layer(i).map(|l| l.name.as_str()).unwrap_or("?");
    let mut out = String::with_capacity(256 + design.nets.len() * 160);
    let _ = writeln!(out, "VERSION 5.8 ;\nDIVIDERCHAR \"/\" ;\nBUSBITCHARS \"[]\" ;\nDESIGN {} ;", design.name);
    let _ = writeln!(out, "UNITS DISTANCE MICRONS {} ;", tech.dbu_per_micron);
    let d = design.die;
    let _ = writeln!(out, "DIEAREA ( {} {} ) ( {} {} ) ;", d.lo.x, d.lo.y, d.hi.x, d.hi.y);
    if design.core != design.die {
        let c = design.core;
        let _ = writeln!(
            out,
            "ROW CORE_ROW core {} {} N DO 1 BY 1 STEP {} {} ;",
            c.lo.x,
            c.lo.y,
            c.width(),
            c.height()
        );
    }
    let _ = writeln!(out, "\nCOMPONENTS {} ;", design.instances.len());
    for i in &design.instances {
        let status = if i.fixed { "FIXED" } else { "PLACED" };
        let _ = writeln!(
            out,
            "- {} {} + {status} ( {} {} ) {} ;",
            i.name,
            i.master,
            i.origin.x,
            i.origin.y,
            i.orient.keyword()
        );
    }
    out.push_str("END COMPONENTS\n");

    let mut port_net: HashMap<&str, &str> = HashMap::new();
    for n in &design.nets {
        for p in &n.pins {
            if let PinOwner::Port(name) = &p.owner {
                port_net.insert(name.as_str(), n.name.as_str());
            }
        }
    }
    let _ = writeln!(out, "\nPINS {} ;", design.ports.len());
    for p in &design.ports {
        let net = port_net.get(p.name.as_str()).copied().unwrap_or(p.name.as_str());
        let _ = writeln!(
            out,
            "- {} + NET {net} + DIRECTION {} + USE SIGNAL + PLACED ( {} {} ) N ;",
            p.name,
            p.direction.keyword(),
            p.position.x,
            p.position.y
        );
    }
    out.push_str("END PINS\n");

    let _ = writeln!(out, "\nNETS {} ;", design.nets.len());
    for n in &design.nets {
        let _ = write!(out, "- {}", n.name);
        for p in &n.pins {
            match &p.owner {
                PinOwner::Instance(i) => {
                    let _ = write!(out, " ( {i} {} )", p.pin);
                }
                PinOwner::Port(name) => {
                    let _ = write!(out, " ( PIN {name} )");
                }
            }
        }
        out.push('\n');
        let mut first = true;
        let mut lead = |out: &mut String| {
            out.push_str(if first { "  + ROUTED " } else { "    NEW " });
            first = false;
        };
        for s in &n.routing {
            lead(&mut out);
            let _ = writeln!(out, "{} ( {} {} ) ( {} {} )", layer_name(s.layer), s.xs, s.ys, s.xe, s.ye);
        }
        for v in &n.vias {
            lead(&mut out);
            let via = tech.via_def(v.layer_bot, v.layer_top).map(|d| d.name.as_str()).unwrap_or("?");
            let _ = writeln!(out, "{} ( {} {} ) {via}", layer_name(v.layer_bot), v.xc, v.yc);
        }
        out.push_str("  ;\n");
    }
    out.push_str("END NETS\n\nEND DESIGN\n");
    out
}
