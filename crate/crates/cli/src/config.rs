//! JSON run configuration. Every field is optional; command-line flags
//! override file values, and unknown keys are rejected.

use std::path::Path;

use kamlab_core::averaging::DriftSampling;
use kamlab_core::sweep::SweepConfig;
use kamlab_core::{FourierShape, StepPolicy};
use serde::Deserialize;

use crate::CliError;

/// Settings shared by the single-orbit and scaling commands.
#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub mu: Option<f64>,
    pub omega: Option<f64>,
    pub shape: Option<FourierShape>,
    pub policy: Option<StepPolicy>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub t_max: Option<f64>,
    pub stride: Option<usize>,
    pub n: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub omegas: Option<Vec<f64>>,
    pub window: Option<f64>,
    pub sampling: Option<DriftSampling>,
}

/// A sweep file: the [`SweepConfig`] fields at top level, plus optional
/// `cells` (list of `[mu, omega]`) and `policy`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFile {
    pub sweep: SweepConfig,
    pub cells: Option<Vec<(f64, f64)>>,
    pub policy: Option<StepPolicy>,
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

fn bad(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config {}: {e}", path.display()))
}

pub fn load_run(path: Option<&Path>) -> Result<RunFile, CliError> {
    match path {
        None => Ok(RunFile::default()),
        Some(p) => serde_json::from_value(read_json(p)?).map_err(|e| bad(p, e)),
    }
}

pub fn load_sweep(path: Option<&Path>) -> Result<SweepFile, CliError> {
    let Some(p) = path else {
        return Ok(SweepFile {
            sweep: SweepConfig::default(),
            cells: None,
            policy: None,
        });
    };
    let serde_json::Value::Object(mut map) = read_json(p)? else {
        return Err(bad(p, "expected a JSON object"));
    };
    let cells = map
        .remove("cells")
        .map(serde_json::from_value::<Vec<(f64, f64)>>)
        .transpose()
        .map_err(|e| bad(p, format!("cells: {e}")))?;
    let policy = map
        .remove("policy")
        .map(serde_json::from_value::<StepPolicy>)
        .transpose()
        .map_err(|e| bad(p, format!("policy: {e}")))?;
    let sweep = serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| bad(p, e))?;
    Ok(SweepFile {
        sweep,
        cells,
        policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), text).unwrap();
        f
    }

    #[test]
    fn run_file_fragment() {
        let f = write(r#"{"mu": 0.8, "omega": 0.2, "shape": {"cos": [1.0], "sin": []}}"#);
        let run = load_run(Some(f.path())).unwrap();
        assert_eq!(run.mu, Some(0.8));
        assert_eq!(run.shape, Some(FourierShape::cosine()));
        assert!(load_run(Some(write(r#"{"muu": 1}"#).path())).is_err());
        assert!(load_run(Some(write(r#"{"shape": {"cos": [2.0]}}"#).path())).is_err());
        assert!(load_run(Some(Path::new("/nonexistent/c.json"))).is_err());
    }

    #[test]
    fn sweep_file_split() {
        let f = write(
            r#"{"n_ics": 10, "seed": 3, "cells": [[0.8, 0.05]], "policy": {"h0": 0.005},
                "horizon": {"max_time": 200.0}}"#,
        );
        let s = load_sweep(Some(f.path())).unwrap();
        assert_eq!(s.sweep.n_ics, 10);
        assert_eq!(s.sweep.horizon.max_time, 200.0);
        assert_eq!(s.sweep.horizon.min_time, 1e3);
        assert_eq!(s.cells, Some(vec![(0.8, 0.05)]));
        assert_eq!(s.policy.unwrap().h0, 0.005);
        assert!(load_sweep(Some(write(r#"{"n_icz": 10}"#).path())).is_err());
        assert!(load_sweep(Some(write("[1, 2]").path())).is_err());
        assert_eq!(load_sweep(None).unwrap().sweep, SweepConfig::default());
    }
}
