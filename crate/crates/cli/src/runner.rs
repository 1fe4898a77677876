//! Runs an experiment and writes its artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ris_core::montecarlo::{run_sweep, Scheme, SweepResult, SweepVariable};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::derived::derive;
use crate::presets::preset;
use crate::CliError;

/// Command-line overrides applied on top of a preset or config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub elements: Option<usize>,
    /// Replaces every quantized scheme; continuous phases are kept.
    pub method: Option<Scheme>,
    /// Keep only the channels with these labels.
    pub channels: Option<Vec<String>>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(m) = self.elements {
            if cfg.sweep.variable == SweepVariable::Elements {
                log::warn!("--m is ignored for element-count sweeps");
            } else {
                cfg.scene.elements = m;
            }
        }
        if let Some(method) = self.method {
            let mut schemes: Vec<Scheme> = cfg
                .sweep
                .methods
                .iter()
                .copied()
                .filter(|s| *s == Scheme::Continuous)
                .collect();
            if method != Scheme::Continuous {
                schemes.push(method);
            }
            cfg.sweep.methods = schemes;
        }
        if let Some(keep) = &self.channels {
            let unknown: Vec<_> = keep
                .iter()
                .filter(|k| !cfg.channels.iter().any(|c| &c.label == *k))
                .collect();
            if !unknown.is_empty() {
                return Err(CliError::Config(format!(
                    "unknown channel label(s): {unknown:?}"
                )));
            }
            cfg.channels.retain(|c| keep.contains(&c.label));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub name: String,
    pub sha256: String,
}

/// Written last into the output directory; lists everything else written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Preset name or config path as given.
    pub source: String,
    /// As passed on the command line.
    pub output_dir: PathBuf,
    pub overrides: Overrides,
    pub spec_hash: String,
    pub files: Vec<ManifestFile>,
    pub derived: BTreeMap<String, f64>,
}

/// Resolves a preset name or a path to a TOML file.
pub fn load_config(target: &str) -> Result<(ExperimentConfig, PathBuf), CliError> {
    if let Some(cfg) = preset(target) {
        return Ok((cfg, PathBuf::from(".")));
    }
    let path = Path::new(target);
    if !path.is_file() {
        return Err(CliError::Config(format!(
            "`{target}` is neither a preset nor a readable config file"
        )));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {target}: {e}")))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((ExperimentConfig::from_toml(&text)?, base))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(
    dir: &Path,
    name: &str,
    bytes: &[u8],
    files: &mut Vec<ManifestFile>,
) -> Result<(), CliError> {
    fs::write(dir.join(name), bytes)?;
    files.push(ManifestFile {
        name: name.into(),
        sha256: sha256_hex(bytes),
    });
    Ok(())
}

/// Runs `target` and writes `<name>.csv`, `<name>.json` and `manifest.json` into `out`.
pub fn run(
    target: &str,
    out: &Path,
    overrides: &Overrides,
) -> Result<(SweepResult, RunManifest), CliError> {
    let (mut cfg, base) = load_config(target)?;
    overrides.apply(&mut cfg)?;
    let spec = cfg.to_spec(&base)?;
    log::info!(
        "running {} ({} points, {} trials each)",
        spec.name,
        spec.values.len() * spec.channels.len(),
        spec.trials
    );
    let result = run_sweep(&spec)?;
    let derived = derive(spec.sweep, &result.rows);

    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    write_file(out, &format!("{}.csv", spec.name), &csv, &mut files)?;
    let mut meta = Vec::new();
    result.write_metadata(&mut meta)?;
    write_file(out, &format!("{}.json", spec.name), &meta, &mut files)?;

    let manifest = RunManifest {
        source: target.into(),
        output_dir: out.to_path_buf(),
        overrides: overrides.clone(),
        spec_hash: result.metadata.spec_hash.clone(),
        files,
        derived,
    };
    fs::write(
        out.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest)?,
    )?;
    Ok((result, manifest))
}
