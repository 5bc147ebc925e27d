//! Artifact writers. Floats use 17 significant digits so reruns are byte-identical.

use std::path::Path;

use serde::Serialize;

use sben_core::sben::StepResidual;
use sben_core::scenarios::TimeSeries;
use sben_core::ExtReal;

use crate::error::CliError;

pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

fn ext(v: ExtReal) -> String {
    num(v.to_f64())
}

/// `t, <observer columns>, gap`.
pub fn write_series_csv(path: &Path, ts: &TimeSeries) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(ts.columns.iter().cloned());
    header.push("gap".into());
    w.write_record(&header)?;
    for r in &ts.records {
        let mut row = vec![num(r.t)];
        row.extend(r.values.iter().map(|v| num(*v)));
        row.push(num(r.gap));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_csv(path: &Path, times: &[f64], profile: &[StepResidual]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "t", "dissipation_term", "pairing_term", "gap"])?;
    for r in profile {
        w.write_record([r.index.to_string(), num(times[r.index + 1]), ext(r.dissipation_term), num(r.pairing_term), ext(r.gap)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
