//! Reading and writing spaces, free vectors and Lipschitz functions.
//!
//! Space JSON: `{"labels": [...], "base": "<label>", "dist": [[...]]}` with
//! entries as `"p/q"` or decimal strings (JSON numbers are also accepted and
//! read from their decimal text). CSV: a header row of labels followed by the
//! matrix rows; an empty leading header cell marks a row-label column. A tree
//! document (see [`crate::tree::TreeDocument`]) is read as the path metric on
//! its labelled nodes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::FormatError;
use crate::free_space::{FreeVector, LipFunction};
use crate::metric::FiniteMetricSpace;
use crate::rational::{self, Rational};
use crate::tree::TreeDocument;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDocument {
    pub labels: Vec<String>,
    pub base: String,
    pub dist: Vec<DistRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistRow(#[serde(with = "rational::serde_text_vec")] pub Vec<Rational>);

impl SpaceDocument {
    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        Self {
            labels: space.labels().to_vec(),
            base: space.label(space.base()).to_string(),
            dist: space.matrix().iter().map(|r| DistRow(r.clone())).collect(),
        }
    }

    pub fn to_space(&self) -> Result<FiniteMetricSpace, FormatError> {
        let dist = self.dist.iter().map(|r| r.0.clone()).collect();
        Ok(FiniteMetricSpace::new(self.labels.clone(), &self.base, dist)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// Distance-matrix JSON or CSV.
    Matrix,
    /// Weighted tree JSON.
    Tree,
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a space, picking the format from `format`, the file extension and
/// the JSON keys present, in that order.
pub fn load_space(path: &Path, format: Option<InputFormat>) -> Result<FiniteMetricSpace, FormatError> {
    let text = read_text(path)?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        if format == Some(InputFormat::Tree) {
            return Err(FormatError::Invalid("tree input must be JSON".into()));
        }
        return parse_space_csv(&text, None);
    }
    parse_space(&text, format)
}

/// Parses space JSON or tree JSON.
pub fn parse_space(text: &str, format: Option<InputFormat>) -> Result<FiniteMetricSpace, FormatError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let format = format.unwrap_or(if value.get("nodes").is_some() {
        InputFormat::Tree
    } else {
        InputFormat::Matrix
    });
    match format {
        InputFormat::Matrix => {
            let doc: SpaceDocument = serde_json::from_value(value).map_err(|e| FormatError::Invalid(e.to_string()))?;
            doc.to_space()
        }
        InputFormat::Tree => {
            let doc: TreeDocument = serde_json::from_value(value).map_err(|e| FormatError::Invalid(e.to_string()))?;
            doc.to_space()
        }
    }
}

/// Parses a CSV matrix; the base defaults to the first label.
pub fn parse_space_csv(text: &str, base: Option<&str>) -> Result<FiniteMetricSpace, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| FormatError::Csv(e.to_string()))?.clone();
    let row_labels = header.get(0) == Some("");
    let labels: Vec<String> = header.iter().skip(usize::from(row_labels)).map(str::to_string).collect();
    let mut dist = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FormatError::Csv(e.to_string()))?;
        let row: Result<Vec<Rational>, _> = record
            .iter()
            .skip(usize::from(row_labels))
            .map(rational::parse)
            .collect();
        dist.push(row.map_err(|e| FormatError::Csv(format!("row {}: {e}", line + 2)))?);
    }
    let base = match base {
        Some(b) => b.to_string(),
        None => labels.first().cloned().ok_or_else(|| FormatError::Csv("empty header".into()))?,
    };
    Ok(FiniteMetricSpace::new(labels, &base, dist)?)
}

/// A free vector or a Lipschitz function, keyed by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormInput {
    Vector(FreeVector),
    Function(LipFunction),
}

fn labelled_values(
    space: &FiniteMetricSpace,
    map: &serde_json::Map<String, serde_json::Value>,
) -> Result<Vec<(usize, Rational)>, FormatError> {
    map.iter()
        .map(|(label, v)| Ok((space.index_of(label)?, rational::from_json(v)?)))
        .collect()
}

/// Parses `{"coeffs": {label: value}}` or `{"values": {label: value}}`.
/// Unlisted points are zero. A coefficient on the base point is rejected
/// since `delta_base = 0`; a function must vanish at the base.
pub fn parse_norm_input(space: &FiniteMetricSpace, text: &str) -> Result<NormInput, FormatError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if let Some(coeffs) = value.get("coeffs").and_then(|c| c.as_object()) {
        let pairs = labelled_values(space, coeffs)?;
        if pairs.iter().any(|(p, c)| *p == space.base() && !num_traits::Zero::is_zero(c)) {
            return Err(FormatError::Invalid("the base point carries no coefficient".into()));
        }
        return Ok(NormInput::Vector(FreeVector::from_pairs(space, pairs)));
    }
    if let Some(values) = value.get("values").and_then(|c| c.as_object()) {
        let mut full = vec![num_traits::Zero::zero(); space.len()];
        for (p, v) in labelled_values(space, values)? {
            full[p] = v;
        }
        return LipFunction::new(space, full)
            .map(NormInput::Function)
            .ok_or_else(|| FormatError::Invalid("a Lipschitz function must vanish at the base".into()));
    }
    Err(FormatError::Invalid("expected an object with \"coeffs\" or \"values\"".into()))
}

pub fn vector_to_json(space: &FiniteMetricSpace, v: &FreeVector) -> serde_json::Value {
    let map: BTreeMap<String, String> = v
        .support()
        .map(|(p, c)| (space.label(p).to_string(), rational::to_text(c)))
        .collect();
    serde_json::json!({ "coeffs": map })
}

pub fn function_to_json(space: &FiniteMetricSpace, f: &LipFunction) -> serde_json::Value {
    let map: BTreeMap<String, String> = f
        .values()
        .iter()
        .enumerate()
        .map(|(p, v)| (space.label(p).to_string(), rational::to_text(v)))
        .collect();
    serde_json::json!({ "values": map })
}
