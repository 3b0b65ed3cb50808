// SPDX-License-Identifier: Apache-2.0

//! Workspace-level steps shared by the verbs and the acceptance suite.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chipvec::design::{
    generate_synthetic, parse_def, parse_lef, write_def, write_lef, Design, DesignError, Diagnostic, Parsed,
    SynthParams, TechLib, TechSidecar,
};
use chipvec::engines::EngineError;
use chipvec::fidelity::FidelityError;
use chipvec::insight::InsightError;
use chipvec::store::{load_bundle, StoreError, Workspace};
use chipvec::vector::{Foundation, VectorError};
use chipvec_dse::DseError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
    #[error(transparent)]
    Insight(#[from] InsightError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Dse(#[from] DseError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
}

pub const DEF_FILE: &str = "result/design.def";
pub const LEF_FILE: &str = "result/tech.lef";
pub const SIDECAR_FILE: &str = "result/tech.json";

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn sidecar_json(tech: &TechLib) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(&tech.sidecar()).expect("sidecar serializes");
    v.push(b'\n');
    v
}

/// Technology from the configured LEF plus its optional sidecar.
pub fn load_tech(ws: &Workspace) -> Result<Parsed<Arc<TechLib>>, CliError> {
    let inputs = &ws.config.inputs;
    let lef = inputs.lef.as_ref().ok_or_else(|| CliError::Input("workspace has no LEF input; run generate or ingest".into()))?;
    let Parsed { value: mut tech, mut diagnostics } = parse_lef(&read_text(&ws.resolve(lef))?)?;
    if let Some(sc) = &inputs.tech_sidecar {
        let path = ws.resolve(sc);
        let sidecar: TechSidecar = serde_json::from_str(&read_text(&path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        tech.apply_sidecar(&sidecar)?;
    } else {
        diagnostics.push(Diagnostic::new(None, "no technology sidecar; unit R/C and drive values from LEF only"));
    }
    Ok(Parsed { value: Arc::new(tech), diagnostics })
}

/// The configured design, parsed against the configured technology.
pub fn load_design(ws: &Workspace) -> Result<Parsed<Design>, CliError> {
    let Parsed { value: tech, mut diagnostics } = load_tech(ws)?;
    let def = ws.config.inputs.def.as_ref().ok_or_else(|| CliError::Input("workspace has no DEF input".into()))?;
    let parsed = parse_def(&read_text(&ws.resolve(def))?, &tech)?;
    diagnostics.extend(parsed.diagnostics);
    Ok(Parsed { value: parsed.value, diagnostics })
}

/// Generates a synthetic design, writes its DEF, LEF and sidecar under
/// `result/` and records them and the parameters in the config.
pub fn generate_into(ws: &mut Workspace, params: &SynthParams) -> Result<Design, CliError> {
    let d = generate_synthetic(params)?;
    write_file(&ws.root.join(DEF_FILE), write_def(&d).as_bytes())?;
    write_file(&ws.root.join(LEF_FILE), write_lef(&d.tech).as_bytes())?;
    write_file(&ws.root.join(SIDECAR_FILE), &sidecar_json(&d.tech))?;
    let inputs = &mut ws.config.inputs;
    inputs.def = Some(DEF_FILE.into());
    inputs.lef = Some(LEF_FILE.into());
    inputs.tech_sidecar = Some(SIDECAR_FILE.into());
    inputs.synthetic = Some(params.clone());
    ws.save_config()?;
    Ok(d)
}

/// Validates external DEF/LEF (and sidecar) and copies them into `result/`.
pub fn ingest_into(
    ws: &mut Workspace,
    def: &Path,
    lef: &Path,
    sidecar: Option<&Path>,
) -> Result<Parsed<Design>, CliError> {
    let lef_text = read_text(lef)?;
    let def_text = read_text(def)?;
    let sidecar_text = sidecar.map(read_text).transpose()?;
    let Parsed { value: mut tech, mut diagnostics } = parse_lef(&lef_text)?;
    if let Some(text) = &sidecar_text {
        let sc: TechSidecar = serde_json::from_str(text).map_err(|e| CliError::Input(format!("sidecar: {e}")))?;
        tech.apply_sidecar(&sc)?;
    }
    let parsed = parse_def(&def_text, &tech)?;
    diagnostics.extend(parsed.diagnostics);
    write_file(&ws.root.join(DEF_FILE), def_text.as_bytes())?;
    write_file(&ws.root.join(LEF_FILE), lef_text.as_bytes())?;
    let inputs = &mut ws.config.inputs;
    inputs.def = Some(DEF_FILE.into());
    inputs.lef = Some(LEF_FILE.into());
    inputs.synthetic = None;
    inputs.tech_sidecar = match &sidecar_text {
        Some(text) => {
            write_file(&ws.root.join(SIDECAR_FILE), text.as_bytes())?;
            Some(SIDECAR_FILE.into())
        }
        None => None,
    };
    ws.save_config()?;
    Ok(Parsed { value: parsed.value, diagnostics })
}

/// A workspace root resolves to its bundle; anything else is a bundle directory.
pub fn load_bundle_at(path: &Path) -> Result<Foundation, CliError> {
    let dir = if path.join("config.json").is_file() { Workspace::open(path)?.bundle_dir() } else { path.to_path_buf() };
    Ok(load_bundle(&dir)?.0)
}
