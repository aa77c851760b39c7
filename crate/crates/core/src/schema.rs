//! Feature schema: names, kinds, and valid ranges for the survey features.
//!
//! The schema fixes the feature order; every downstream matrix (training
//! columns, attribution matrices, interaction tensors) is indexed by it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What kind of values a feature holds, plus its valid range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FeatureKind {
    /// Real-valued within inclusive bounds.
    Numeric { min: f64, max: f64 },
    /// 0 or 1.
    Binary,
    /// Dense integer codes `0..categories`.
    Categorical { categories: u32 },
}

/// One feature declaration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn numeric(name: &str, min: f64, max: f64) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Numeric { min, max },
        }
    }

    pub fn binary(name: &str) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Binary,
        }
    }

    pub fn categorical(name: &str, categories: u32) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Categorical { categories },
        }
    }

    /// Whether `value` is valid for this feature.
    pub fn accepts(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match self.kind {
            FeatureKind::Numeric { min, max } => value >= min && value <= max,
            FeatureKind::Binary => value == 0.0 || value == 1.0,
            FeatureKind::Categorical { categories } => {
                value.fract() == 0.0 && value >= 0.0 && value < f64::from(categories)
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("duplicate feature name: {0}")]
    DuplicateName(String),
    #[error("feature {0}: invalid numeric range [{1}, {2}]")]
    InvalidRange(String, f64, f64),
    #[error("feature {0}: categorical must have at least 2 categories")]
    TooFewCategories(String),
    #[error("schema must declare at least one feature")]
    Empty,
    #[error("schema JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Ordered feature declarations. The order indexes all downstream matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self, SchemaError> {
        if features.is_empty() {
            return Err(SchemaError::Empty);
        }
        for (i, f) in features.iter().enumerate() {
            if features[..i].iter().any(|g| g.name == f.name) {
                return Err(SchemaError::DuplicateName(f.name.clone()));
            }
            match f.kind {
                FeatureKind::Numeric { min, max } => {
                    if !(min.is_finite() && max.is_finite() && min < max) {
                        return Err(SchemaError::InvalidRange(f.name.clone(), min, max));
                    }
                }
                FeatureKind::Categorical { categories } => {
                    if categories < 2 {
                        return Err(SchemaError::TooFewCategories(f.name.clone()));
                    }
                }
                FeatureKind::Binary => {}
            }
        }
        Ok(FeatureSchema { features })
    }

    /// The built-in 16-feature survey schema.
    pub fn survey() -> Self {
        FeatureSchema::new(vec![
            FeatureSpec::numeric("age", 21.0, 49.0),
            FeatureSpec::numeric("years_of_education", 0.0, 20.0),
            FeatureSpec::categorical("state", 36),
            FeatureSpec::binary("residence_type"),
            FeatureSpec::categorical("household_religion", 10),
            FeatureSpec::numeric("wealth_index", 0.0, 4.0),
            FeatureSpec::numeric("household_members", 1.0, 39.0),
            FeatureSpec::numeric("freq_of_tv", 0.0, 3.0),
            FeatureSpec::numeric("total_children", 0.0, 15.0),
            FeatureSpec::numeric("children_below_5", 0.0, 9.0),
            FeatureSpec::binary("anemic"),
            FeatureSpec::binary("obese"),
            FeatureSpec::binary("caste_general"),
            FeatureSpec::binary("caste_scst"),
            FeatureSpec::binary("caste_obc"),
            FeatureSpec::binary("caste_unknown"),
        ])
        .expect("built-in schema is valid")
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature(&self, index: usize) -> &FeatureSpec {
        &self.features[index]
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Indices of the four caste one-hot flags, when all are present.
    pub fn caste_indices(&self) -> Option<[usize; 4]> {
        Some([
            self.index_of("caste_general")?,
            self.index_of("caste_scst")?,
            self.index_of("caste_obc")?,
            self.index_of("caste_unknown")?,
        ])
    }

    pub fn from_json(json: &str) -> Result<Self, SchemaError> {
        let parsed: FeatureSchema = serde_json::from_str(json)?;
        FeatureSchema::new(parsed.features)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survey_schema_matches_survey_feature_table() {
        let s = FeatureSchema::survey();
        assert_eq!(s.len(), 16);
        assert_eq!(s.feature(0).name, "age");
        assert_eq!(s.feature(0).kind, FeatureKind::Numeric { min: 21.0, max: 49.0 });
        assert_eq!(s.feature(2).kind, FeatureKind::Categorical { categories: 36 });
        assert_eq!(s.feature(4).kind, FeatureKind::Categorical { categories: 10 });
        assert_eq!(s.feature(6).kind, FeatureKind::Numeric { min: 1.0, max: 39.0 });
        assert_eq!(s.feature(15).name, "caste_unknown");
        assert_eq!(s.caste_indices(), Some([12, 13, 14, 15]));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = FeatureSchema::new(vec![FeatureSpec::binary("a"), FeatureSpec::binary("a")]);
        assert!(matches!(err, Err(SchemaError::DuplicateName(_))));
    }

    #[test]
    fn accepts_respects_kind() {
        let num = FeatureSpec::numeric("x", 0.0, 4.0);
        assert!(num.accepts(2.5));
        assert!(!num.accepts(4.1));
        let bin = FeatureSpec::binary("b");
        assert!(bin.accepts(1.0));
        assert!(!bin.accepts(0.5));
        let cat = FeatureSpec::categorical("c", 3);
        assert!(cat.accepts(2.0));
        assert!(!cat.accepts(3.0));
        assert!(!cat.accepts(1.5));
    }

    #[test]
    fn json_round_trip() {
        let s = FeatureSchema::survey();
        let back = FeatureSchema::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
    }
}
