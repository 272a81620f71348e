//! Command-line front end.
//!
//! Exit codes: 0 all-pass, 1 any identity failed, 2 usage or I/O error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use wz_core::leanemit::{emit_direct, emit_lean, write_manifest};
use wz_core::orchestrator::{
    numeric_verify, run_pipeline, Config, HttpBackend, NullBackend, ProverBackend, VerifyOptions,
};
use wz_core::parser::parse_identity;
use wz_core::sketch::build_sketch;
use wz_core::telescope::Relation;

#[derive(Parser)]
#[command(
    name = "wz",
    version,
    about = "Wilf-Zeilberger certificate engine and Lean proof-sketch compiler"
)]
struct Cli {
    /// Configuration file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the proof sketch and its obligation pool
    Sketch { file: PathBuf },
    /// Synthesize and verify the certificate
    Certify { file: PathBuf },
    /// Exact numeric verification of the identity
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        n_max: i64,
    },
    /// Emit the Lean sketch and JSON manifest
    Emit {
        file: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Process a directory of identity files end to end
    Batch {
        dir: PathBuf,
        #[arg(long, default_value = "null")]
        backend: String,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, String> {
    match path {
        Some(p) => Config::load(p).map_err(|e| e.to_string()),
        None => Ok(Config::default()),
    }
}

fn read(file: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(file).map_err(|e| format!("cannot read {}: {}", file.display(), e))
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    let config = load_config(&cli.config)?;
    match cli.command {
        Command::Sketch { file } => {
            let text = read(&file)?;
            let id = parse_identity(&text).map_err(|e| e.to_string())?;
            let sk = build_sketch(&id, config.engine.max_order).map_err(|e| e.to_string())?;
            if sk.uncovered {
                println!("uncovered: no certificate up to order {}", config.engine.max_order);
                println!("the identity becomes a direct-prove goal");
                return Ok(true);
            }
            let rel = sk.relation.as_ref().unwrap();
            println!("covered: order {} relation", rel.order());
            println!("certificate R(n,k) = {}", rel.certificate().render());
            if let Some(b) = &sk.base_case {
                println!("base case: S({}) = {}", b.n0, b.value_text);
            }
            for w in &sk.warnings {
                println!("warning: {}", w);
            }
            println!("obligations ({}):", sk.obligations.len());
            for ob in &sk.obligations {
                println!("  [{}] {} ({})", ob.kind.as_str(), ob.id, ob.provenance);
                println!("      {}", ob.goal_internal);
            }
            Ok(true)
        }
        Command::Certify { file } => {
            let text = read(&file)?;
            let id = parse_identity(&text).map_err(|e| e.to_string())?;
            let started = Instant::now();
            let sk = build_sketch(&id, config.engine.max_order).map_err(|e| e.to_string())?;
            let elapsed = started.elapsed();
            match &sk.relation {
                Some(rel) => {
                    println!("certificate R(n,k) = {}", rel.certificate().render());
                    match rel {
                        Relation::Wz(p) => {
                            println!("residual: 0 (verified: {})", p.residual_verified)
                        }
                        Relation::Creative(r) => {
                            println!("order {} relation with coefficients:", r.order);
                            for (j, a) in r.coeffs.iter().enumerate() {
                                println!("  a_{} = {}", j, a.render());
                            }
                            println!("residual: 0 (verified symbolically)");
                        }
                    }
                    println!("elapsed: {:.3}s", elapsed.as_secs_f64());
                    Ok(true)
                }
                None => {
                    println!(
                        "no certificate up to order {} ({:.3}s)",
                        config.engine.max_order,
                        elapsed.as_secs_f64()
                    );
                    Ok(false)
                }
            }
        }
        Command::Verify { file, n_max } => {
            let text = read(&file)?;
            let id = parse_identity(&text).map_err(|e| e.to_string())?;
            let opts = VerifyOptions {
                n_max,
                param_min: config.engine.param_min,
                param_max: config.engine.param_max,
                ..Default::default()
            };
            let rep = numeric_verify(&id, &opts);
            println!(
                "checked {} points: {} equal, {} unequal, {} skipped (poles)",
                rep.checked, rep.equal, rep.unequal, rep.skipped
            );
            for f in &rep.failures {
                println!(
                    "  n = {} {:?}: {:?} {}",
                    f.n,
                    f.params,
                    f.status,
                    f.detail.clone().unwrap_or_default()
                );
            }
            println!("{}", if rep.pass { "PASS" } else { "FAIL" });
            Ok(rep.pass)
        }
        Command::Emit { file, out } => {
            let text = read(&file)?;
            let name = file
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "identity".to_string());
            let id = parse_identity(&text).map_err(|e| e.to_string())?;
            let sk = build_sketch(&id, config.engine.max_order).map_err(|e| e.to_string())?;
            let lean = if sk.uncovered {
                emit_direct(&sk.identity, &name, &config.lean)
            } else {
                emit_lean(&sk, &name, &config.lean, &BTreeMap::new()).map_err(|e| e.to_string())?
            };
            let manifest = write_manifest(&sk);
            std::fs::create_dir_all(&out)
                .map_err(|e| format!("cannot create {}: {}", out.display(), e))?;
            let stem: String = name
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect();
            let lean_path = out.join(format!("{}.lean", stem));
            let man_path = out.join(format!("{}.manifest.json", stem));
            std::fs::write(&lean_path, &lean.text)
                .map_err(|e| format!("cannot write {}: {}", lean_path.display(), e))?;
            std::fs::write(&man_path, manifest.to_json())
                .map_err(|e| format!("cannot write {}: {}", man_path.display(), e))?;
            println!("wrote {}", lean_path.display());
            println!("wrote {}", man_path.display());
            println!(
                "{} obligations ({} open placeholders)",
                manifest.obligations.len(),
                lean.placeholder_map.len()
            );
            Ok(true)
        }
        Command::Batch {
            dir,
            backend,
            jobs,
            report,
            out,
        } => {
            let mut config = config;
            if let Some(j) = jobs {
                config.engine.jobs = j;
            }
            let mut inputs: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| format!("cannot read {}: {}", dir.display(), e))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().map(|x| x == "wz").unwrap_or(false))
                .collect();
            inputs.sort();
            if inputs.is_empty() {
                return Err(format!("no .wz files in {}", dir.display()));
            }
            let boxed: Box<dyn ProverBackend> = match backend.as_str() {
                "null" => Box::new(NullBackend),
                "http" => {
                    if config.backend.endpoint.is_empty() {
                        return Err("http backend requires backend.endpoint in config".into());
                    }
                    Box::new(HttpBackend::new(config.backend.clone()))
                }
                other => return Err(format!("unknown backend `{}`", other)),
            };
            let batch = run_pipeline(&inputs, &config, boxed.as_ref(), out.as_deref());
            for r in &batch.identities {
                println!(
                    "{}: {} ({}, {} open / {} discharged){}",
                    r.name,
                    r.status,
                    if r.covered { "covered" } else { "uncovered" },
                    r.open,
                    r.discharged,
                    r.error
                        .as_ref()
                        .map(|e| format!(" - {}", e))
                        .unwrap_or_default()
                );
            }
            println!(
                "totals: {} identities, {} covered, {} failed, {} obligations ({} discharged), {} duplicate goals skipped",
                batch.totals.identities,
                batch.totals.covered,
                batch.totals.failed,
                batch.totals.obligations,
                batch.totals.discharged,
                batch.totals.duplicates_skipped
            );
            if let Some(path) = report {
                let json =
                    serde_json::to_string_pretty(&batch).map_err(|e| e.to_string())?;
                std::fs::write(&path, json + "\n")
                    .map_err(|e| format!("cannot write {}: {}", path.display(), e))?;
                println!("report written to {}", path.display());
            }
            Ok(batch.all_pass())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}
