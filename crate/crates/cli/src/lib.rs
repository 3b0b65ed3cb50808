// SPDX-License-Identifier: Apache-2.0

//! `chipvec` verbs. Exit codes: 0 success, 1 domain error, 2 usage error.
//! Diagnostics and errors go to stderr; results to stdout.

pub mod pipeline;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use chipvec::design::{Diagnostic, SynthParams};
use chipvec::engines::emit_datasets;
use chipvec::fidelity::{compare, reconstruct, DensityGrid, FidelityOptions};
use chipvec::insight::write_report;
use chipvec::store::{json, save_bundle, Level, Workspace, WorkspaceConfig};
use chipvec::vector::analyze;
use chipvec_dse::objectives::{placement_surrogate, sphere, zdt1};
use chipvec_dse::{front_json, history_csv, run as run_dse, MotpeConfig, Objective, ParamSpace, Params, Sampler};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pipeline::{generate_into, ingest_into, load_bundle_at, load_design, CliError};

#[derive(Debug, Parser)]
#[command(name = "chipvec", version, about = "Design-to-vector extraction for placed-and-routed designs")]
pub struct Cli {
    /// Worker threads (0 = all cores); overrides the config value.
    #[arg(long, global = true, env = "CHIPVEC_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct WsArg {
    /// Workspace root.
    pub workspace: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Net,
    Graph,
    Path,
    Patch,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    /// ZDT1 on the unit cube, two objectives.
    Zdt1,
    /// Sum of squares on [-1, 1]^n.
    Sphere,
    /// Toy placement surrogate over the placement parameter space.
    Placement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Motpe,
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a workspace with a default config.
    Init {
        #[command(flatten)]
        ws: WsArg,
        /// Start from this config file instead of defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a synthetic placed-and-routed design into the workspace.
    Generate {
        #[command(flatten)]
        ws: WsArg,
        #[arg(long, default_value_t = 1000)]
        cells: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "synth")]
        name: String,
        /// Signal nets; defaults to 90% of the cell count.
        #[arg(long)]
        nets: Option<usize>,
        #[arg(long)]
        layers: Option<u32>,
        #[arg(long)]
        utilization: Option<f64>,
    },
    /// Copy an external DEF/LEF pair (and sidecar) into the workspace.
    Ingest {
        #[command(flatten)]
        ws: WsArg,
        #[arg(long)]
        def: PathBuf,
        #[arg(long)]
        lef: PathBuf,
        /// JSON with unit R/C, via resistance and cell drive data.
        #[arg(long)]
        tech: Option<PathBuf>,
    },
    /// Extract Foundation Data into `vectors/`.
    Vectorize {
        #[command(flatten)]
        ws: WsArg,
        #[arg(long, value_enum, default_values_t = [LevelArg::All])]
        level: Vec<LevelArg>,
    },
    /// Rebuild the design from its bundle and compare with the original.
    Fidelity {
        #[command(flatten)]
        ws: WsArg,
        /// Reconstructed density grid is this many times coarser.
        #[arg(long, default_value_t = 1)]
        coarsen: u32,
        /// Density grid: `patch` or the mean instance count per bin.
        #[arg(long, default_value = "8")]
        density_grid: String,
    },
    /// Write `report/report.md`, `report/stats.json` and heatmaps.
    Report {
        #[command(flatten)]
        ws: WsArg,
        /// More workspaces or bundle directories to pool.
        #[arg(long)]
        include: Vec<PathBuf>,
    },
    /// Emit ML datasets into `feature/dataset/`.
    Dataset {
        #[command(flatten)]
        ws: WsArg,
        #[arg(long)]
        include: Vec<PathBuf>,
        /// Overrides the engine seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run parameter exploration on a built-in objective into `result/dse/`.
    Dse {
        #[command(flatten)]
        ws: WsArg,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Zdt1)]
        objective: ObjectiveArg,
        /// Parameter space JSON; defaults per objective.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Dimensions of the default zdt1 and sphere spaces.
        #[arg(long, default_value_t = 5)]
        dims: usize,
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SamplerArg::Motpe)]
        sampler: SamplerArg,
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
        #[arg(long, default_value_t = 24)]
        candidates: usize,
        #[arg(long, default_value_t = 10)]
        startup: usize,
    },
}

/// Parses `args` (program name first) and runs the verb.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

const SHOWN_DIAGNOSTICS: usize = 20;

fn warn(diags: &[Diagnostic]) {
    for d in diags.iter().take(SHOWN_DIAGNOSTICS) {
        match d.line {
            Some(l) => eprintln!("warning: line {l}: {}", d.message),
            None => eprintln!("warning: {}", d.message),
        }
    }
    if diags.len() > SHOWN_DIAGNOSTICS {
        eprintln!("warning: {} more diagnostic(s)", diags.len() - SHOWN_DIAGNOSTICS);
    }
}

fn levels(args: &[LevelArg]) -> Vec<Level> {
    let mut out: Vec<Level> = Vec::new();
    for a in args {
        let add: &[Level] = match a {
            LevelArg::Net => &[Level::Net],
            LevelArg::Graph => &[Level::Graph],
            LevelArg::Path => &[Level::Path],
            LevelArg::Patch => &[Level::Patch],
            LevelArg::All => &Level::ALL,
        };
        out.extend(add);
    }
    out.sort();
    out.dedup();
    out
}

fn density_grid(s: &str) -> Result<DensityGrid, CliError> {
    if s == "patch" {
        return Ok(DensityGrid::Patch);
    }
    s.parse::<usize>()
        .ok()
        .filter(|&k| k > 0)
        .map(DensityGrid::CellsPerBin)
        .ok_or_else(|| CliError::Input(format!("density grid {s:?}: expected `patch` or a positive count")))
}

fn threads_for(cli_threads: Option<usize>, ws: Option<&Workspace>) -> usize {
    cli_threads.or(ws.map(|w| w.config.threads)).unwrap_or(0)
}

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn bundles_for(ws: &Workspace, include: &[PathBuf]) -> Result<Vec<chipvec::vector::Foundation>, CliError> {
    let mut out = vec![load_bundle_at(&ws.bundle_dir())?];
    for p in include {
        out.push(load_bundle_at(p)?);
    }
    Ok(out)
}

fn write_out(path: &std::path::Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d).map_err(|source| CliError::Io { path: d.to_path_buf(), source })?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Init { ws, config } => {
            let cfg = match config {
                Some(p) => WorkspaceConfig::from_json(
                    &fs::read(&p).map_err(|source| CliError::Io { path: p.clone(), source })?,
                )?,
                None => WorkspaceConfig::default(),
            };
            let w = Workspace::create(&ws.workspace, cfg)?;
            println!("workspace {}", w.root.display());
        }
        Command::Generate { ws, cells, seed, name, nets, layers, utilization } => {
            let mut w = Workspace::open(&ws.workspace)?;
            let mut p = SynthParams::for_cells(cells).with_seed(seed);
            p.name = name;
            if let Some(n) = nets {
                p.num_nets = n;
            }
            if let Some(l) = layers {
                p.num_layers = l;
            }
            if let Some(u) = utilization {
                p.utilization = u;
            }
            let d = generate_into(&mut w, &p)?;
            println!("generated {}: {} instances, {} nets", d.name, d.instances.len(), d.nets.len());
        }
        Command::Ingest { ws, def, lef, tech } => {
            let mut w = Workspace::open(&ws.workspace)?;
            let parsed = ingest_into(&mut w, &def, &lef, tech.as_deref())?;
            warn(&parsed.diagnostics);
            let d = parsed.value;
            println!("ingested {}: {} instances, {} nets", d.name, d.instances.len(), d.nets.len());
        }
        Command::Vectorize { ws, level } => {
            let w = Workspace::open(&ws.workspace)?;
            let parsed = load_design(&w)?;
            warn(&parsed.diagnostics);
            let f = in_pool(threads_for(cli.threads, Some(&w)), || analyze(&parsed.value, &w.config.vector))??;
            warn(&f.diagnostics);
            let m = save_bundle(&w.bundle_dir(), &f, &levels(&level))?;
            let c = &m.counts;
            println!(
                "vectorized {}: {} nets, {} graph nodes, {} paths, {} patches",
                m.design, c.nets, c.graph_nodes, c.paths, c.patches
            );
        }
        Command::Fidelity { ws, coarsen, density_grid: grid } => {
            let w = Workspace::open(&ws.workspace)?;
            let opts = FidelityOptions { density_grid: density_grid(&grid)?, coarsen, ..FidelityOptions::default() };
            let threads = threads_for(cli.threads, Some(&w));
            let report = in_pool(threads, || -> Result<_, CliError> {
                let original = load_design(&w)?.value;
                let bundle = load_bundle_at(&w.bundle_dir())?;
                let rebuilt = reconstruct(&bundle, original.tech.clone())?;
                Ok(compare(&original, &rebuilt, &w.config.vector, opts)?)
            })??;
            let bytes = json::to_bytes(&report).map_err(|e| CliError::Input(e.to_string()))?;
            write_out(&w.fidelity_path(), &bytes)?;
            for (k, ok) in &report.passes {
                println!("{k}: {}", if *ok { "pass" } else { "FAIL" });
            }
            println!("density correlation {:.6}", report.density_correlation);
        }
        Command::Report { ws, include } => {
            let w = Workspace::open(&ws.workspace)?;
            let files = in_pool(threads_for(cli.threads, Some(&w)), || -> Result<_, CliError> {
                let bundles = bundles_for(&w, &include)?;
                Ok(write_report(&w, &bundles)?)
            })??;
            println!("report {}", files.report.display());
        }
        Command::Dataset { ws, include, seed } => {
            let w = Workspace::open(&ws.workspace)?;
            let mut cfg = w.config.engines.clone();
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let m = in_pool(threads_for(cli.threads, Some(&w)), || -> Result<_, CliError> {
                let bundles = bundles_for(&w, &include)?;
                Ok(emit_datasets(&bundles, &cfg, &w.dataset_dir())?)
            })??;
            warn(&m.diagnostics);
            for (k, v) in &m.counts {
                println!("{k}: {v} samples");
            }
        }
        Command::Dse { ws, objective, space, dims, budget, seed, sampler, gamma, candidates, startup } => {
            let w = Workspace::open(&ws.workspace)?;
            let space = match &space {
                Some(p) => ParamSpace::from_json(&fs::read(p).map_err(|source| CliError::Io { path: p.clone(), source })?)?,
                None => match objective {
                    ObjectiveArg::Zdt1 => ParamSpace::unit_cube(dims),
                    ObjectiveArg::Sphere => ParamSpace::new(
                        (0..dims).map(|i| chipvec_dse::Dimension::uniform(&format!("x{i}"), -1.0, 1.0)).collect(),
                    )?,
                    ObjectiveArg::Placement => ParamSpace::placement(),
                },
            };
            let reals = |p: &Params| -> Result<Vec<f64>, String> {
                p.iter().map(|v| v.real().ok_or_else(|| "categorical dimension in a numeric objective".to_string())).collect()
            };
            let (objectives, f): (Vec<Objective>, Box<dyn Fn(&Params) -> Result<Vec<f64>, String>>) = match objective {
                ObjectiveArg::Zdt1 => {
                    (vec![Objective::minimize("f1"), Objective::minimize("f2")], Box::new(move |p| reals(p).map(|x| zdt1(&x))))
                }
                ObjectiveArg::Sphere => (vec![Objective::minimize("f")], Box::new(move |p| reals(p).map(|x| sphere(&x)))),
                ObjectiveArg::Placement => {
                    let s = space.clone();
                    (
                        vec![Objective::minimize("wirelength"), Objective::minimize("overflow")],
                        Box::new(move |p| Ok(placement_surrogate(&s, p))),
                    )
                }
            };
            let cfg = MotpeConfig { gamma, n_candidates: candidates, n_startup: startup };
            let sampler = match sampler {
                SamplerArg::Motpe => Sampler::Motpe,
                SamplerArg::Random => Sampler::Random,
            };
            let r = run_dse(&space, &objectives, f, budget, seed, sampler, &cfg)?;
            let dir = w.result_dir().join("dse");
            let mut space_json = serde_json::to_vec_pretty(&space).expect("space serializes");
            space_json.push(b'\n');
            write_out(&dir.join("space.json"), &space_json)?;
            write_out(&dir.join("history.csv"), &history_csv(&space, &objectives, &r.history)?)?;
            write_out(&dir.join("front.json"), &front_json(&space, &objectives, &r.front))?;
            let failed = r.history.iter().filter(|t| !t.completed()).count();
            println!("{} trials ({failed} failed), front of {}", r.history.len(), r.front.len());
        }
    }
    Ok(())
}
