//! File formats shared by the subcommands, and all-or-nothing file writing.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const RESULTS_FILE: &str = "results.csv";
pub const METADATA_FILE: &str = "metadata.json";
pub const GRID_SUMMARY_FILE: &str = "grid_summary.csv";
pub const RANKS_FILE: &str = "ranks.csv";

/// Writes through a temporary file in the destination directory and renames it
/// into place, so an interrupted command never leaves a partial file behind.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::output(path, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf).map_err(|e| CliError::output(path, e))?;
        buf.flush().map_err(|e| CliError::output(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::output(path, e.error))?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        for row in rows {
            csv.serialize(row).map_err(std::io::Error::other)?;
        }
        csv.flush()
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
        writeln!(w)
    })
}

/// Fixed six-decimal rendering used for every real number in result files.
pub fn fixed6(v: f64) -> String {
    format!("{v:.6}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub approach: String,
    pub run: usize,
    pub seq: u64,
    pub correct: u8,
    pub acc_running: String,
    pub acc_window: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummaryRow {
    pub scenario: String,
    pub approach: String,
    pub grid_point: String,
    pub mean_accuracy: String,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub scenario: String,
    pub approach: String,
    pub mean_rank: String,
    #[serde(rename = "chi2F")]
    pub chi2f: String,
    #[serde(rename = "CD")]
    pub cd: String,
    pub bold: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub kind: String,
    pub class_size: usize,
    pub seed: u64,
    pub drift_points: Vec<usize>,
    pub target_length: usize,
    pub sources: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachInfo {
    pub label: String,
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub deterministic: bool,
    pub runs: usize,
    pub mean_accuracy: f64,
    pub best: bool,
}

/// Written next to the results so `stats` and `plot` know how to read them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub experiment: String,
    pub scenario: ScenarioInfo,
    pub runs: usize,
    pub base_seed: u64,
    pub metric: String,
    pub window_fraction: f64,
    pub friedman_unit: String,
    pub approaches: Vec<ApproachInfo>,
}

pub const FRIEDMAN_UNIT: &str = "time point (per-index accuracy averaged over runs)";

/// Metadata sitting beside `results`, if any.
pub fn metadata_for(results: &Path) -> Result<Option<RunMetadata>, CliError> {
    let path = sibling(results, METADATA_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new(".")).join(name)
}

/// Per-approach accuracy series of one scenario, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachSeries {
    pub approach: String,
    /// `runs[r][t] = (acc_running, acc_window)`
    pub runs: Vec<Vec<(f64, f64)>>,
}

impl ApproachSeries {
    /// Mean over runs at every target index.
    pub fn mean(&self, window: bool) -> Vec<f64> {
        let len = self.runs.first().map_or(0, Vec::len);
        (0..len)
            .map(|t| {
                self.runs
                    .iter()
                    .map(|r| if window { r[t].1 } else { r[t].0 })
                    .sum::<f64>()
                    / self.runs.len() as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSeries {
    pub scenario: String,
    pub approaches: Vec<ApproachSeries>,
}

impl ScenarioSeries {
    pub fn target_length(&self) -> usize {
        self.approaches.first().and_then(|a| a.runs.first()).map_or(0, Vec::len)
    }
}

fn parse_unit(value: &str, row: usize, column: &str) -> Result<f64, CliError> {
    match value.trim().parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(CliError::Data(format!("row {row}: `{column}` = `{value}` is not an accuracy in [0, 1]"))),
    }
}

/// Reads a results CSV and groups it by scenario and approach, checking that
/// runs are contiguous and every series in a scenario has the same length.
pub fn read_results(path: &Path) -> Result<Vec<ScenarioSeries>, CliError> {
    let data_err = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(data_err)?;
    let mut out: Vec<ScenarioSeries> = Vec::new();
    for (i, row) in reader.deserialize::<ResultRow>().enumerate() {
        let row = row.map_err(data_err)?;
        let line = i + 2;
        let point = (
            parse_unit(&row.acc_running, line, "acc_running")?,
            parse_unit(&row.acc_window, line, "acc_window")?,
        );
        if row.correct > 1 {
            return Err(CliError::Data(format!("row {line}: `correct` must be 0 or 1")));
        }
        let scenario = match out.iter_mut().position(|s| s.scenario == row.scenario) {
            Some(i) => &mut out[i],
            None => {
                out.push(ScenarioSeries {
                    scenario: row.scenario.clone(),
                    approaches: Vec::new(),
                });
                out.last_mut().expect("just pushed")
            }
        };
        let series = match scenario.approaches.iter_mut().position(|a| a.approach == row.approach) {
            Some(i) => &mut scenario.approaches[i],
            None => {
                scenario.approaches.push(ApproachSeries {
                    approach: row.approach.clone(),
                    runs: Vec::new(),
                });
                scenario.approaches.last_mut().expect("just pushed")
            }
        };
        match row.run.cmp(&series.runs.len()) {
            std::cmp::Ordering::Less if row.run + 1 == series.runs.len() => {}
            std::cmp::Ordering::Equal => series.runs.push(Vec::new()),
            _ => {
                return Err(CliError::Data(format!(
                    "row {line}: run {} of `{}` is out of order",
                    row.run, row.approach
                )))
            }
        }
        series.runs.last_mut().expect("run exists").push(point);
    }
    for s in &out {
        let len = s.target_length();
        for a in &s.approaches {
            if a.runs.iter().any(|r| r.len() != len) {
                return Err(CliError::Data(format!(
                    "scenario `{}`: `{}` has runs of differing length",
                    s.scenario, a.approach
                )));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_precision() {
        assert_eq!(fixed6(0.5), "0.500000");
        assert_eq!(fixed6(2.0 / 3.0), "0.666667");
        assert_eq!(fixed6(1.0), "1.000000");
    }

    #[test]
    fn atomic_write_failure_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let err = write_atomic(&path, |w| {
            w.write_all(b"partial")?;
            Err(std::io::Error::other("interrupted"))
        });
        assert!(err.is_err());
        assert!(!path.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
        write_atomic(&path, |w| w.write_all(b"ok")).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "ok");
    }

    fn results(body: &str) -> Result<Vec<ScenarioSeries>, CliError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, format!("scenario,approach,run,seq,correct,acc_running,acc_window\n{body}")).unwrap();
        read_results(&path)
    }

    #[test]
    fn groups_rows() {
        let s = results(
            "s,a,0,0,1,1.000000,1.000000\ns,a,0,1,0,0.500000,0.500000\n\
             s,a,1,0,0,0.000000,0.000000\ns,a,1,1,1,0.500000,0.500000\n\
             s,b,0,0,1,1.000000,1.000000\ns,b,0,1,1,1.000000,1.000000\n",
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].approaches.len(), 2);
        assert_eq!(s[0].approaches[0].mean(false), vec![0.5, 0.5]);
        assert_eq!(s[0].target_length(), 2);
    }

    #[test]
    fn malformed_results_are_data_errors() {
        for body in [
            "s,a,0,0,1,1.5,1.0\n",
            "s,a,0,0,1,abc,1.0\n",
            "s,a,1,0,1,1.0,1.0\n",
            "s,a,0,0,1,1.0,1.0\ns,a,1,0,1,1.0,1.0\ns,a,1,1,1,1.0,1.0\n",
            "s,a,0\n",
        ] {
            let e = results(body).unwrap_err();
            assert_eq!(e.exit_code(), 3, "{body}");
        }
    }
}
