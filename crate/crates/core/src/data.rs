//! Weighted survey samples, label construction, and CSV ingestion.
//!
//! Occupation arrives as a single three-valued column and is the single
//! source of truth for the three binary experiment labels, so the labels
//! can never disagree with each other.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{FeatureKind, FeatureSchema};

/// The three binary classification experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Having a job or not.
    Work,
    /// Having a blue-collar job or not.
    Blue,
    /// Having a white-collar job or not.
    White,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [Experiment::Work, Experiment::Blue, Experiment::White];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Work => "work",
            Experiment::Blue => "blue",
            Experiment::White => "white",
        }
    }

    pub fn parse(s: &str) -> Option<Experiment> {
        match s {
            "work" => Some(Experiment::Work),
            "blue" => Some(Experiment::Blue),
            "white" => Some(Experiment::White),
            _ => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Occupation category from the label column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupation {
    Unemployed,
    Blue,
    White,
}

impl Occupation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Occupation::Unemployed => "unemployed",
            Occupation::Blue => "blue",
            Occupation::White => "white",
        }
    }

    pub fn parse(s: &str) -> Option<Occupation> {
        match s {
            "unemployed" => Some(Occupation::Unemployed),
            "blue" => Some(Occupation::Blue),
            "white" => Some(Occupation::White),
            _ => None,
        }
    }
}

/// The three binary labels derived from one occupation value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Labels {
    pub work_status: bool,
    pub blue_collar: bool,
    pub white_collar: bool,
}

/// One weighted survey respondent.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Stable row identifier, preserved through splits and subsampling.
    pub id: u64,
    /// Feature values in schema order; categoricals as integer codes.
    pub features: Vec<f64>,
    /// Survey sampling weight, strictly positive.
    pub weight: f64,
    pub occupation: Occupation,
}

impl Sample {
    pub fn labels(&self) -> Labels {
        Labels {
            work_status: self.occupation != Occupation::Unemployed,
            blue_collar: self.occupation == Occupation::Blue,
            white_collar: self.occupation == Occupation::White,
        }
    }

    /// Binary label for one experiment.
    pub fn label(&self, experiment: Experiment) -> bool {
        match experiment {
            Experiment::Work => self.occupation != Occupation::Unemployed,
            Experiment::Blue => self.occupation == Occupation::Blue,
            Experiment::White => self.occupation == Occupation::White,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Ingested,
    Synthetic,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing column: {0}")]
    MissingColumn(String),
    #[error("row {row}: feature {feature} value {value} is out of range")]
    OutOfRange { row: usize, feature: String, value: f64 },
    #[error("row {row}: weight {weight} is not positive")]
    NonPositiveWeight { row: usize, weight: f64 },
    #[error("row {row}: exactly one caste flag must be 1")]
    CasteOneHot { row: usize },
    #[error("row {row}: column {column}: {message}")]
    InvalidValue { row: usize, column: String, message: String },
    #[error("dataset is empty")]
    Empty,
    #[error("sample has {got} features, schema has {want}")]
    FeatureCount { got: usize, want: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// An immutable collection of schema-conforming weighted samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    samples: Vec<Sample>,
    provenance: Provenance,
}

impl Dataset {
    /// Build a dataset, validating every sample against the schema,
    /// positive weights, and the caste one-hot invariant (when the four
    /// caste flags are present in the schema).
    pub fn new(
        schema: FeatureSchema,
        samples: Vec<Sample>,
        provenance: Provenance,
    ) -> Result<Self, DataError> {
        if samples.is_empty() {
            return Err(DataError::Empty);
        }
        let caste = schema.caste_indices();
        for (row, s) in samples.iter().enumerate() {
            validate_sample(&schema, caste, row, s)?;
        }
        Ok(Dataset { schema, samples, provenance })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// New dataset holding the samples at `indices`, in the given order.
    pub(crate) fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            provenance: self.provenance,
        }
    }

    /// Unweighted positive-class fraction for one experiment.
    pub fn class_balance(&self, experiment: Experiment) -> f64 {
        let pos = self.samples.iter().filter(|s| s.label(experiment)).count();
        pos as f64 / self.samples.len() as f64
    }

    /// Per-feature unweighted mean and sample standard deviation;
    /// categorical features report code frequencies instead.
    pub fn summary_stats(&self) -> Vec<FeatureSummary> {
        let n = self.samples.len();
        self.schema
            .features()
            .iter()
            .enumerate()
            .map(|(j, spec)| match spec.kind {
                FeatureKind::Categorical { categories } => {
                    let mut counts = vec![0usize; categories as usize];
                    for s in &self.samples {
                        counts[s.features[j] as usize] += 1;
                    }
                    FeatureSummary {
                        feature: spec.name.clone(),
                        stat: SummaryStat::Frequencies(counts),
                    }
                }
                _ => {
                    let mean = self.samples.iter().map(|s| s.features[j]).sum::<f64>() / n as f64;
                    let std = if n > 1 {
                        let ss = self
                            .samples
                            .iter()
                            .map(|s| {
                                let d = s.features[j] - mean;
                                d * d
                            })
                            .sum::<f64>();
                        (ss / (n - 1) as f64).sqrt()
                    } else {
                        0.0
                    };
                    FeatureSummary {
                        feature: spec.name.clone(),
                        stat: SummaryStat::Moments { mean, std },
                    }
                }
            })
            .collect()
    }

    /// Read a dataset from CSV. The header must contain every schema
    /// feature name, the label column, and the weight column; extra
    /// columns are ignored.
    pub fn load_csv(
        path: impl AsRef<Path>,
        schema: &FeatureSchema,
        label_column: &str,
        weight_column: &str,
    ) -> Result<Dataset, DataError> {
        let file = std::fs::File::open(path)?;
        Dataset::read_csv(file, schema, label_column, weight_column)
    }

    /// Same as [`Dataset::load_csv`] but from any reader.
    pub fn read_csv(
        reader: impl Read,
        schema: &FeatureSchema,
        label_column: &str,
        weight_column: &str,
    ) -> Result<Dataset, DataError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col_index = |name: &str| -> Result<usize, DataError> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::MissingColumn(name.to_string()))
        };

        let feature_cols: Vec<usize> = schema
            .features()
            .iter()
            .map(|f| col_index(&f.name))
            .collect::<Result<_, _>>()?;
        let label_col = col_index(label_column)?;
        let weight_col = col_index(weight_column)?;

        let caste = schema.caste_indices();
        let mut samples = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let mut features = Vec::with_capacity(schema.len());
            for (j, &col) in feature_cols.iter().enumerate() {
                let raw = &record[col];
                let value: f64 = raw.trim().parse().map_err(|_| DataError::InvalidValue {
                    row,
                    column: schema.feature(j).name.clone(),
                    message: format!("cannot parse {raw:?} as a number"),
                })?;
                features.push(value);
            }
            let weight: f64 =
                record[weight_col].trim().parse().map_err(|_| DataError::InvalidValue {
                    row,
                    column: weight_column.to_string(),
                    message: format!("cannot parse {:?} as a number", &record[weight_col]),
                })?;
            let occupation = Occupation::parse(record[label_col].trim()).ok_or_else(|| {
                DataError::InvalidValue {
                    row,
                    column: label_column.to_string(),
                    message: format!(
                        "expected one of unemployed/blue/white, got {:?}",
                        &record[label_col]
                    ),
                }
            })?;
            let sample = Sample { id: row as u64, features, weight, occupation };
            validate_sample(schema, caste, row, &sample)?;
            samples.push(sample);
        }
        if samples.is_empty() {
            return Err(DataError::Empty);
        }
        Ok(Dataset { schema: schema.clone(), samples, provenance: Provenance::Ingested })
    }

    /// Write the dataset in the same CSV format `load_csv` ingests:
    /// schema columns in order, then `occupation` and `weight`.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), DataError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.schema.names();
        header.push("occupation".to_string());
        header.push("weight".to_string());
        wtr.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for s in &self.samples {
            record.clear();
            for v in &s.features {
                record.push(format_value(*v));
            }
            record.push(s.occupation.as_str().to_string());
            record.push(format_value(s.weight));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }
}

/// Shortest decimal form that parses back to the same f64.
fn format_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn validate_sample(
    schema: &FeatureSchema,
    caste: Option<[usize; 4]>,
    row: usize,
    s: &Sample,
) -> Result<(), DataError> {
    if s.features.len() != schema.len() {
        return Err(DataError::FeatureCount { got: s.features.len(), want: schema.len() });
    }
    for (j, spec) in schema.features().iter().enumerate() {
        if !spec.accepts(s.features[j]) {
            return Err(DataError::OutOfRange {
                row,
                feature: spec.name.clone(),
                value: s.features[j],
            });
        }
    }
    if !(s.weight > 0.0 && s.weight.is_finite()) {
        return Err(DataError::NonPositiveWeight { row, weight: s.weight });
    }
    if let Some(idx) = caste {
        let ones = idx.iter().filter(|&&j| s.features[j] == 1.0).count();
        if ones != 1 {
            return Err(DataError::CasteOneHot { row });
        }
    }
    Ok(())
}

/// Summary statistics for one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSummary {
    pub feature: String,
    pub stat: SummaryStat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SummaryStat {
    Moments { mean: f64, std: f64 },
    Frequencies(Vec<usize>),
}
