//! IDX-format image/label files (the MNIST on-disk format).
//!
//! Images: big-endian magic 0x00000803, dims [n, rows, cols], unsigned bytes.
//! Labels: big-endian magic 0x00000801, dims [n], unsigned bytes.
//! A gzip wrapper is detected from the 0x1f 0x8b magic and decompressed
//! transparently. Pixels are scaled to [0, 1] by division by 255.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use thiserror::Error;

use super::{Dataset, Split};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("{path}: expected magic {expected:#010x}, found {found:#010x}")]
    BadMagic {
        path: String,
        expected: u32,
        found: u32,
    },
    #[error("{path}: truncated file ({context})")]
    Truncated { path: String, context: String },
    #[error("image/label count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> IdxError {
    IdxError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn open_maybe_gzip(path: &Path) -> Result<Box<dyn Read>, IdxError> {
    let mut file = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let mut head = [0u8; 2];
    let got = file.read(&mut head).map_err(|e| io_err(path, e))?;
    if got < 2 {
        return Err(IdxError::Truncated {
            path: path.display().to_string(),
            context: "shorter than two bytes".to_string(),
        });
    }
    let rest = std::io::Cursor::new(head.to_vec()).chain(file);
    if head == [0x1f, 0x8b] {
        Ok(Box::new(MultiGzDecoder::new(rest)))
    } else {
        Ok(Box::new(rest))
    }
}

fn read_u32_be(reader: &mut dyn Read, path: &Path, what: &str) -> Result<u32, IdxError> {
    let mut buf = [0u8; 4];
    reader
        .read_exact(&mut buf)
        .map_err(|_| IdxError::Truncated {
            path: path.display().to_string(),
            context: format!("while reading {what}"),
        })?;
    Ok(u32::from_be_bytes(buf))
}

fn read_payload(
    reader: &mut dyn Read,
    len: usize,
    path: &Path,
    what: &str,
) -> Result<Vec<u8>, IdxError> {
    let mut data = vec![0u8; len];
    reader
        .read_exact(&mut data)
        .map_err(|_| IdxError::Truncated {
            path: path.display().to_string(),
            context: format!("while reading {what}"),
        })?;
    Ok(data)
}

/// Loads an IDX image/label file pair into a [`Dataset`], scaling pixels
/// to [0, 1].
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    split: Split,
) -> Result<Dataset, IdxError> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();

    let mut images = open_maybe_gzip(images_path)?;
    let magic = read_u32_be(&mut images, images_path, "magic")?;
    if magic != IMAGE_MAGIC {
        return Err(IdxError::BadMagic {
            path: images_path.display().to_string(),
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let n = read_u32_be(&mut images, images_path, "image count")? as usize;
    let rows = read_u32_be(&mut images, images_path, "row count")? as usize;
    let cols = read_u32_be(&mut images, images_path, "column count")? as usize;
    let pixels = read_payload(&mut images, n * rows * cols, images_path, "pixel data")?;

    let mut labels = open_maybe_gzip(labels_path)?;
    let magic = read_u32_be(&mut labels, labels_path, "magic")?;
    if magic != LABEL_MAGIC {
        return Err(IdxError::BadMagic {
            path: labels_path.display().to_string(),
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let n_labels = read_u32_be(&mut labels, labels_path, "label count")? as usize;
    let label_bytes = read_payload(&mut labels, n_labels, labels_path, "label data")?;

    if n != n_labels {
        return Err(IdxError::CountMismatch {
            images: n,
            labels: n_labels,
        });
    }

    let features: Vec<f64> = pixels.iter().map(|&b| b as f64 / 255.0).collect();
    let labels: Vec<usize> = label_bytes.iter().map(|&b| b as usize).collect();
    Dataset::new(features, rows * cols, labels, 10, split).map_err(|_| IdxError::CountMismatch {
        images: n,
        labels: n_labels,
    })
}

/// Writes a dataset back out as an uncompressed IDX pair, rounding pixels to
/// their byte values. Round-trips files produced by [`load_idx`] exactly
/// (for non-gzip inputs).
pub fn write_idx(
    data: &Dataset,
    rows: usize,
    cols: usize,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<(), IdxError> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    assert_eq!(rows * cols, data.feature_dim(), "image shape mismatch");

    let mut img = BufWriter::new(File::create(images_path).map_err(|e| io_err(images_path, e))?);
    img.write_all(&IMAGE_MAGIC.to_be_bytes())
        .and_then(|_| img.write_all(&(data.len() as u32).to_be_bytes()))
        .and_then(|_| img.write_all(&(rows as u32).to_be_bytes()))
        .and_then(|_| img.write_all(&(cols as u32).to_be_bytes()))
        .map_err(|e| io_err(images_path, e))?;
    let bytes: Vec<u8> = data
        .features()
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    img.write_all(&bytes).map_err(|e| io_err(images_path, e))?;
    img.flush().map_err(|e| io_err(images_path, e))?;

    let mut lbl = BufWriter::new(File::create(labels_path).map_err(|e| io_err(labels_path, e))?);
    lbl.write_all(&LABEL_MAGIC.to_be_bytes())
        .and_then(|_| lbl.write_all(&(data.len() as u32).to_be_bytes()))
        .map_err(|e| io_err(labels_path, e))?;
    let label_bytes: Vec<u8> = data.labels().iter().map(|&l| l as u8).collect();
    lbl.write_all(&label_bytes)
        .map_err(|e| io_err(labels_path, e))?;
    lbl.flush().map_err(|e| io_err(labels_path, e))?;
    Ok(())
}
