//! Scale-invariant signal-to-distortion ratio and per-scene reporting.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const SI_SDR_EPS: f64 = 1e-12;
pub const SI_SDR_CAP_DB: f64 = 100.0;

/// SI-SDR in dB: the estimate is projected onto the reference and the
/// residual counted as distortion. Capped at +100 dB.
pub fn si_sdr(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::Shape(format!(
            "reference length {} vs estimate length {}",
            reference.len(),
            estimate.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::InvalidArgument("empty signals".into()));
    }
    let ref_energy: f64 = reference.iter().map(|x| x * x).sum();
    if ref_energy <= 0.0 {
        return Err(Error::InvalidArgument("reference is all zeros".into()));
    }
    let dot: f64 = reference.iter().zip(estimate).map(|(r, e)| r * e).sum();
    let alpha = dot / ref_energy;
    let signal: f64 = alpha * alpha * ref_energy;
    let noise: f64 = reference
        .iter()
        .zip(estimate)
        .map(|(r, e)| (e - alpha * r).powi(2))
        .sum();
    // the guard scales with the signal term so the metric stays exactly
    // scale invariant while perfect reconstruction still hits the cap
    Ok((10.0 * (signal / (noise + SI_SDR_EPS * signal.max(SI_SDR_EPS))).log10()).min(SI_SDR_CAP_DB))
}

/// One evaluated (scene, condition) pair.
#[derive(Debug, Clone)]
pub struct SceneMetric {
    pub scene_id: String,
    pub condition: String,
    pub si_sdr_mix: f64,
    pub si_sdr_enh: f64,
}

impl SceneMetric {
    pub fn delta(&self) -> f64 {
        self.si_sdr_enh - self.si_sdr_mix
    }
}

/// Collection of per-scene metrics with aggregate means per condition.
#[derive(Debug, Clone, Default)]
pub struct MetricReport {
    pub rows: Vec<SceneMetric>,
}

impl MetricReport {
    pub fn push(&mut self, row: SceneMetric) {
        self.rows.push(row);
    }

    pub fn conditions(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.condition) {
                out.push(r.condition.clone());
            }
        }
        out
    }

    pub fn mean_delta(&self, condition: &str) -> Option<f64> {
        let deltas: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.condition == condition)
            .map(|r| r.delta())
            .collect();
        if deltas.is_empty() {
            None
        } else {
            Some(deltas.iter().sum::<f64>() / deltas.len() as f64)
        }
    }

    /// CSV layout: scene id, condition, si_sdr_mix, si_sdr_enh, delta,
    /// one mean row appended per condition.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(file, "scene_id,condition,si_sdr_mix,si_sdr_enh,delta")
            .map_err(|e| Error::io(path, e))?;
        for r in &self.rows {
            writeln!(
                file,
                "{},{},{:.4},{:.4},{:.4}",
                r.scene_id,
                r.condition,
                r.si_sdr_mix,
                r.si_sdr_enh,
                r.delta()
            )
            .map_err(|e| Error::io(path, e))?;
        }
        for cond in self.conditions() {
            let rows: Vec<&SceneMetric> = self.rows.iter().filter(|r| r.condition == cond).collect();
            let mean = |f: fn(&SceneMetric) -> f64| {
                rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64
            };
            writeln!(
                file,
                "mean,{},{:.4},{:.4},{:.4}",
                cond,
                mean(|r| r.si_sdr_mix),
                mean(|r| r.si_sdr_enh),
                mean(|r| r.delta())
            )
            .map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}
