//! Attribution exports: long-format CSV and a binary columnar dump with a
//! JSON sidecar carrying shape metadata.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shap::{InteractionTensor, ShapMatrix};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("sidecar JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("binary payload holds {got} values, sidecar shape implies {want}")]
    ShapeMismatch { got: usize, want: usize },
    #[error("unsupported dtype {0:?} (expected f64)")]
    Dtype(String),
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    dtype: String,
    byte_order: String,
    shape: Vec<usize>,
    base_value: f64,
    feature_names: Vec<String>,
    sample_ids: Vec<u64>,
}

/// Long format: `sample_id,feature,value`.
pub fn write_matrix_csv(m: &ShapMatrix, writer: impl Write) -> Result<(), ExportError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["sample_id", "feature", "value"])?;
    for i in 0..m.n_samples() {
        for (j, name) in m.feature_names.iter().enumerate() {
            wtr.write_record([
                m.sample_ids[i].to_string(),
                name.clone(),
                format!("{}", m.value(i, j)),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Long format: `sample_id,feature,feature_2,value`.
pub fn write_tensor_csv(t: &InteractionTensor, writer: impl Write) -> Result<(), ExportError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["sample_id", "feature", "feature_2", "value"])?;
    for i in 0..t.n_samples() {
        for (j, name_j) in t.feature_names.iter().enumerate() {
            for (k, name_k) in t.feature_names.iter().enumerate() {
                wtr.write_record([
                    t.sample_ids[i].to_string(),
                    name_j.clone(),
                    name_k.clone(),
                    format!("{}", t.value(i, j, k)),
                ])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_matrix_binary(
    m: &ShapMatrix,
    bin_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<(), ExportError> {
    write_binary(
        m.values(),
        vec![m.n_samples(), m.n_features()],
        m.base_value,
        m.feature_names.clone(),
        m.sample_ids.clone(),
        bin_path,
        sidecar_path,
    )
}

pub fn write_tensor_binary(
    t: &InteractionTensor,
    bin_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<(), ExportError> {
    write_binary(
        t.values(),
        vec![t.n_samples(), t.n_features(), t.n_features()],
        t.base_value,
        t.feature_names.clone(),
        t.sample_ids.clone(),
        bin_path,
        sidecar_path,
    )
}

pub fn read_matrix_binary(
    bin_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<ShapMatrix, ExportError> {
    let (sidecar, values) = read_binary(bin_path, sidecar_path, 2)?;
    Ok(ShapMatrix::new(
        sidecar.base_value,
        sidecar.feature_names,
        sidecar.sample_ids,
        values,
    ))
}

pub fn read_tensor_binary(
    bin_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<InteractionTensor, ExportError> {
    let (sidecar, values) = read_binary(bin_path, sidecar_path, 3)?;
    Ok(InteractionTensor::new(
        sidecar.base_value,
        sidecar.feature_names,
        sidecar.sample_ids,
        values,
    ))
}

fn write_binary(
    values: &[f64],
    shape: Vec<usize>,
    base_value: f64,
    feature_names: Vec<String>,
    sample_ids: Vec<u64>,
    bin_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<(), ExportError> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(bin_path, bytes)?;
    let sidecar = Sidecar {
        dtype: "f64".to_string(),
        byte_order: "little".to_string(),
        shape,
        base_value,
        feature_names,
        sample_ids,
    };
    std::fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

fn read_binary(
    bin_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
    rank: usize,
) -> Result<(Sidecar, Vec<f64>), ExportError> {
    let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
    if sidecar.dtype != "f64" {
        return Err(ExportError::Dtype(sidecar.dtype));
    }
    let bytes = std::fs::read(bin_path)?;
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let want: usize = sidecar.shape.iter().product();
    if values.len() != want || sidecar.shape.len() != rank {
        return Err(ExportError::ShapeMismatch { got: values.len(), want });
    }
    Ok((sidecar, values))
}
