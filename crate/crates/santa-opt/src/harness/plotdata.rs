//! Tidy long-format extraction from trace CSVs, for external plotters.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotDataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("trace {path} has no data rows")]
    EmptyTrace { path: String },
    #[error("column {column:?} not present in {path} (header: {header})")]
    MissingColumn {
        column: String,
        path: String,
        header: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PlotDataError + '_ {
    move |source| PlotDataError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads a trace CSV into (header, rows-of-strings). Values stay as raw
/// strings so re-emission never reformats numbers.
pub fn read_trace_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), PlotDataError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows: Vec<Vec<String>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    if header.len() <= 1 || rows.is_empty() {
        return Err(PlotDataError::EmptyTrace {
            path: path.display().to_string(),
        });
    }
    Ok((header, rows))
}

/// Merges one named column from several traces into a tidy long-format CSV
/// (`step,series,value`), one series per input file (named by file stem).
/// Traces with different strides are emitted as-is, without resampling.
pub fn emit_plot_data(
    traces: &[PathBuf],
    column: &str,
    out: &Path,
) -> Result<PathBuf, PlotDataError> {
    let mut writer = BufWriter::new(File::create(out).map_err(io_err(out))?);
    writeln!(writer, "step,series,value").map_err(io_err(out))?;
    for path in traces {
        let (header, rows) = read_trace_columns(path)?;
        let col = header.iter().position(|h| h == column).ok_or_else(|| {
            PlotDataError::MissingColumn {
                column: column.to_string(),
                path: path.display().to_string(),
                header: header.join(","),
            }
        })?;
        let series = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        for row in &rows {
            let step = row.first().map(String::as_str).unwrap_or("");
            let value = row.get(col).map(String::as_str).unwrap_or("");
            writeln!(writer, "{step},{series},{value}").map_err(io_err(out))?;
        }
    }
    writer.flush().map_err(io_err(out))?;
    Ok(out.to_path_buf())
}
