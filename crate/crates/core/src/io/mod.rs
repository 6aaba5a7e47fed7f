//! Versioned JSON formats, the compound dataset importer and run configuration.

mod config;
mod dataset;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::coexistence::CoexistenceReport;
use crate::error::{Error, Result};
use crate::hull::{AxisDescriptor, Facet, LabeledPoint, LowerHull, PointCloud};

pub use config::RunConfig;
pub use dataset::{import_compound_dataset, parse_compound_dataset, ChemicalSystem, CompoundEntry};

pub const CLOUD_SCHEMA: &str = "gibbsd-cloud/1";
pub const HULL_SCHEMA: &str = "gibbsd-hull/1";
pub const REPORT_SCHEMA: &str = "gibbsd-report/1";

#[derive(Serialize, Deserialize)]
struct CloudFile {
    schema: String,
    variables: Vec<AxisDescriptor>,
    points: Vec<LabeledPoint>,
}

#[derive(Serialize, Deserialize)]
struct HullFile {
    schema: String,
    tolerance: f64,
    cloud: CloudBody,
    facets: Vec<Facet>,
    hull_vertices: Vec<usize>,
    metastable: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CloudBody {
    variables: Vec<AxisDescriptor>,
    points: Vec<LabeledPoint>,
}

fn check_schema(value: &serde_json::Value, expected: &str) -> Result<()> {
    let found = value
        .get("schema")
        .and_then(|s| s.as_str())
        .unwrap_or("")
        .to_string();
    if found != expected {
        return Err(Error::SchemaVersionMismatch {
            expected: expected.to_string(),
            found,
        });
    }
    Ok(())
}

fn decode<T: DeserializeOwned>(text: &str, schema: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    check_schema(&value, schema)?;
    Ok(serde_json::from_value(value)?)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn cloud_to_json(cloud: &PointCloud) -> Result<String> {
    pretty(&CloudFile {
        schema: CLOUD_SCHEMA.into(),
        variables: cloud.variables.clone(),
        points: cloud.points.clone(),
    })
}

pub fn cloud_from_json(text: &str) -> Result<PointCloud> {
    let file: CloudFile = decode(text, CLOUD_SCHEMA)?;
    PointCloud::new(file.variables, file.points)
}

pub fn parse_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    cloud_from_json(&read(path.as_ref())?)
}

pub fn write_cloud(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &cloud_to_json(cloud)?)
}

pub fn hull_to_json(hull: &LowerHull) -> Result<String> {
    pretty(&HullFile {
        schema: HULL_SCHEMA.into(),
        tolerance: hull.tolerance,
        cloud: CloudBody {
            variables: hull.cloud.variables.clone(),
            points: hull.cloud.points.clone(),
        },
        facets: hull.facets.clone(),
        hull_vertices: hull.hull_vertices.clone(),
        metastable: hull.metastable.clone(),
    })
}

pub fn hull_from_json(text: &str) -> Result<LowerHull> {
    let file: HullFile = decode(text, HULL_SCHEMA)?;
    let cloud = PointCloud::new(file.cloud.variables, file.cloud.points).map_err(|e| match e {
        Error::Validation { pointer, message } => {
            Error::validation(format!("/cloud{pointer}"), message)
        }
        other => other,
    })?;
    let hull = LowerHull::from_parts(cloud, file.facets, file.tolerance)?;
    if hull.hull_vertices != file.hull_vertices {
        return Err(Error::validation(
            "/hull_vertices",
            "does not match the facets",
        ));
    }
    if hull.metastable != file.metastable {
        return Err(Error::validation(
            "/metastable",
            "does not match the facets",
        ));
    }
    Ok(hull)
}

pub fn parse_hull(path: impl AsRef<Path>) -> Result<LowerHull> {
    hull_from_json(&read(path.as_ref())?)
}

pub fn write_hull(hull: &LowerHull, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &hull_to_json(hull)?)
}

/// Serializes `body` as a JSON object carrying a `schema` member.
pub(crate) fn with_schema<T: Serialize>(schema: &str, body: &T) -> Result<String> {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), serde_json::Value::String(schema.into()));
    if let serde_json::Value::Object(fields) = serde_json::to_value(body)? {
        map.extend(fields);
    }
    pretty(&map)
}

/// Inverse of [`with_schema`].
pub(crate) fn without_schema<T: DeserializeOwned>(text: &str, schema: &str) -> Result<T> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    check_schema(&value, schema)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("schema");
    }
    Ok(serde_json::from_value(value)?)
}

pub fn report_to_json(report: &CoexistenceReport) -> Result<String> {
    with_schema(REPORT_SCHEMA, report)
}

pub fn report_from_json(text: &str) -> Result<CoexistenceReport> {
    without_schema(text, REPORT_SCHEMA)
}

pub fn parse_report(path: impl AsRef<Path>) -> Result<CoexistenceReport> {
    report_from_json(&read(path.as_ref())?)
}

pub fn write_report(report: &CoexistenceReport, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &report_to_json(report)?)
}

pub(crate) fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    write(path.as_ref(), text)
}
