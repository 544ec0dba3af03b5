//! Deterministic CSV trace output.
//!
//! One row per recorded step: `step,stage,beta,eta,U,grad_norm,u_norm`
//! plus `theta0..theta{p-1}` columns when the parameter vector is small
//! (p ≤ 8) or explicitly requested. Values are written with Rust's
//! shortest-roundtrip float formatting, so identical runs produce
//! byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::core::ParamVector;
use crate::santa::{Stage, StepReport, TraceSink};

/// Maximum dimension at which θ columns are included by default.
pub const THETA_COLUMN_LIMIT: usize = 8;

/// One trace row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    pub stage: Stage,
    pub beta: f64,
    pub eta: f64,
    pub u_value: f64,
    pub grad_norm: f64,
    pub u_norm: f64,
    /// Present only when θ columns are enabled for the run.
    pub theta: Option<Vec<f64>>,
}

impl TraceRecord {
    pub fn from_report(report: &StepReport, u_value: f64, theta: Option<Vec<f64>>) -> Self {
        Self {
            step: report.t,
            stage: report.stage,
            beta: report.beta,
            eta: report.eta,
            u_value,
            grad_norm: report.grad_norm,
            u_norm: report.u_norm,
            theta,
        }
    }
}

/// Stride-filtered CSV writer. Rows arrive for every step; only steps with
/// `step % stride == 0` are written immediately, and [`CsvTraceSink::finish`]
/// flushes the final step seen (run end or divergence point) if the stride
/// skipped it.
pub struct CsvTraceSink {
    writer: BufWriter<File>,
    path: PathBuf,
    stride: u64,
    include_theta: bool,
    dim: usize,
    pending: Option<TraceRecord>,
    last_written: Option<u64>,
    error: Option<std::io::Error>,
}

impl CsvTraceSink {
    pub fn create(
        path: impl AsRef<Path>,
        dim: usize,
        stride: u64,
        full_theta: bool,
    ) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let include_theta = full_theta || dim <= THETA_COLUMN_LIMIT;
        let mut writer = BufWriter::new(File::create(&path)?);
        let mut header = String::from("step,stage,beta,eta,U,grad_norm,u_norm");
        if include_theta {
            for i in 0..dim {
                header.push_str(&format!(",theta{i}"));
            }
        }
        writeln!(writer, "{header}")?;
        Ok(Self {
            writer,
            path,
            stride: stride.max(1),
            include_theta,
            dim,
            pending: None,
            last_written: None,
            error: None,
        })
    }

    pub fn include_theta(&self) -> bool {
        self.include_theta
    }

    fn write_row(&mut self, rec: &TraceRecord) {
        if self.error.is_some() {
            return;
        }
        let mut row = format!(
            "{},{},{},{},{},{},{}",
            rec.step,
            rec.stage.tag(),
            rec.beta,
            rec.eta,
            rec.u_value,
            rec.grad_norm,
            rec.u_norm
        );
        if self.include_theta {
            match &rec.theta {
                Some(theta) => {
                    for x in theta {
                        row.push(',');
                        row.push_str(&format!("{x}"));
                    }
                }
                None => {
                    for _ in 0..self.dim {
                        row.push(',');
                    }
                }
            }
        }
        if let Err(e) = writeln!(self.writer, "{row}") {
            self.error = Some(e);
        }
        self.last_written = Some(rec.step);
    }

    /// Feeds one row, applying the stride filter.
    pub fn record_row(&mut self, rec: TraceRecord) {
        if rec.step.is_multiple_of(self.stride) {
            self.write_row(&rec);
            self.pending = None;
        } else {
            self.pending = Some(rec);
        }
    }

    /// Writes the held-back final row (if any) and flushes the file.
    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        if let Some(rec) = self.pending.take() {
            if self.last_written != Some(rec.step) {
                self.write_row(&rec);
            }
        }
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.writer.flush()?;
        Ok(self.path)
    }
}

impl TraceSink for CsvTraceSink {
    fn record(&mut self, report: &StepReport, u_value: f64, theta: &ParamVector) {
        let theta_copy = if self.include_theta {
            Some(theta.as_slice().to_vec())
        } else {
            None
        };
        self.record_row(TraceRecord::from_report(report, u_value, theta_copy));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(t: u64) -> StepReport {
        StepReport {
            t,
            stage: if t < 3 {
                Stage::Exploration
            } else {
                Stage::Refinement
            },
            beta: t as f64,
            eta: 0.01,
            grad_norm: 1.0,
            u_norm: 0.5,
            alpha_mean: 0.0,
            g_min: 1.0,
            g_max: 1.0,
        }
    }

    #[test]
    fn stride_keeps_multiples_and_final_step() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let mut sink = CsvTraceSink::create(&path, 1, 4, false).unwrap();
        let theta = ParamVector::zeros(1);
        for t in 1..=10 {
            sink.record(&report(t), 0.0, &theta);
        }
        sink.finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let steps: Vec<u64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(steps, vec![4, 8, 10]);
    }

    #[test]
    fn header_matches_theta_inclusion() {
        let dir = tempfile::tempdir().unwrap();
        let small = dir.path().join("small.csv");
        let sink = CsvTraceSink::create(&small, 2, 1, false).unwrap();
        assert!(sink.include_theta());
        sink.finish().unwrap();
        let text = std::fs::read_to_string(&small).unwrap();
        assert_eq!(
            text.trim(),
            "step,stage,beta,eta,U,grad_norm,u_norm,theta0,theta1"
        );

        let big = dir.path().join("big.csv");
        let sink = CsvTraceSink::create(&big, 100, 1, false).unwrap();
        assert!(!sink.include_theta());
        sink.finish().unwrap();
        let text = std::fs::read_to_string(&big).unwrap();
        assert_eq!(text.trim(), "step,stage,beta,eta,U,grad_norm,u_norm");
    }
}
