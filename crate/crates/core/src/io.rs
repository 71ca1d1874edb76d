//! JSON file formats. Every rational is a `"num/den"` string in lowest terms.
//!
//! ```json
//! {"labels": ["a", "b"], "d": [["0/1", "1/1"], ["1/1", "0/1"]]}
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::MetricType;
use crate::metric::FiniteMetricSpace;
use crate::rational::Rat;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    labels: Vec<String>,
    d: Vec<Vec<Rat>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeFile {
    p: Vec<Rat>,
}

/// Map file: `{"pairs": [[source, target], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub pairs: Vec<(usize, usize)>,
}

pub fn space_from_json(text: &str) -> Result<FiniteMetricSpace> {
    let f: SpaceFile = serde_json::from_str(text)?;
    FiniteMetricSpace::new(f.labels, f.d)
}

pub fn space_to_json(space: &FiniteMetricSpace) -> String {
    let f = SpaceFile { labels: space.labels().to_vec(), d: space.matrix().to_vec() };
    let mut s = serde_json::to_string(&f).expect("space serializes");
    s.push('\n');
    s
}

pub fn type_from_json(text: &str) -> Result<MetricType> {
    let f: TypeFile = serde_json::from_str(text)?;
    Ok(MetricType::new(f.p))
}

pub fn type_to_json(t: &MetricType) -> String {
    serde_json::to_string(&TypeFile { p: t.p.clone() }).expect("type serializes")
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn read_space(path: &Path) -> Result<FiniteMetricSpace> {
    space_from_json(&read_text(path)?).map_err(|e| in_file(path, e))
}

pub fn write_space(space: &FiniteMetricSpace, path: &Path) -> Result<()> {
    write_text(path, &space_to_json(space))
}

/// Reads any JSON document with a strict schema.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| in_file(path, e.into()))
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Json(j) => Error::malformed(format!("{}: {j}", path.display())),
        other => other,
    }
}
