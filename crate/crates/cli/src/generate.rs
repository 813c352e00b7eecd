//! `generate`: write a synthetic scenario's streams to CSV with a manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use melanie_core::datagen::{self, Protocol, Scenario};
use melanie_core::LabeledExample;

use crate::config::{ExperimentConfig, ScenarioSpec};
use crate::error::{CliError, ConfigError};
use crate::output::{write_atomic, write_json};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamFile {
    pub file: String,
    pub role: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub kind: String,
    pub class_size: usize,
    pub seed: u64,
    pub drift_points: Vec<usize>,
    pub protocol: String,
    pub num_features: usize,
    pub num_classes: usize,
    pub streams: Vec<StreamFile>,
}

fn write_stream(path: &Path, stream: &[LabeledExample], num_features: usize) -> Result<(), CliError> {
    write_atomic(path, |w| {
        let header: Vec<String> = (1..=num_features).map(|i| format!("x{i}")).collect();
        writeln!(w, "seq,{},label", header.join(","))?;
        for ex in stream {
            write!(w, "{}", ex.seq)?;
            for v in ex.x.iter() {
                // shortest round-trip representation: exact and platform independent
                write!(w, ",{v:?}")?;
            }
            writeln!(w, ",{}", ex.y.index())?;
        }
        Ok(())
    })
}

pub fn generate(
    config: &ExperimentConfig,
    config_path: &Path,
    seed: Option<u64>,
    out: &Path,
) -> Result<Manifest, CliError> {
    let ScenarioSpec::Synthetic {
        kind,
        class_size,
        seed: configured,
    } = config.scenario
    else {
        return Err(CliError::Config {
            path: config_path.to_path_buf(),
            error: ConfigError::new(None, "generate needs a synthetic scenario, not csv"),
        });
    };
    let scenario: Scenario = datagen::build(kind, class_size, seed.unwrap_or(configured))?;
    let mut streams = Vec::new();
    for (i, source) in scenario.sources.iter().enumerate() {
        let file = format!("source_{}.csv", i + 1);
        write_stream(&out.join(&file), source, scenario.num_features)?;
        streams.push(StreamFile {
            file,
            role: format!("source {}", i + 1),
            rows: source.len(),
        });
    }
    write_stream(&out.join("target.csv"), &scenario.target, scenario.num_features)?;
    streams.push(StreamFile {
        file: "target.csv".into(),
        role: "target".into(),
        rows: scenario.target.len(),
    });
    let manifest = Manifest {
        scenario: scenario.name(),
        kind: scenario.kind.to_string(),
        class_size,
        seed: scenario.seed,
        drift_points: scenario.drift_points.clone(),
        protocol: match scenario.protocol {
            Protocol::SourceFirst => "source_first",
            Protocol::Interleaved => "interleaved",
        }
        .into(),
        num_features: scenario.num_features,
        num_classes: scenario.num_classes,
        streams,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn written_files(manifest: &Manifest, out: &Path) -> Vec<PathBuf> {
    manifest
        .streams
        .iter()
        .map(|s| out.join(&s.file))
        .chain(std::iter::once(out.join(MANIFEST_FILE)))
        .collect()
}
