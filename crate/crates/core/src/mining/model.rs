use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::{norm3, Vec3, UNIT_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfmImageRecord {
    pub id: String,
    #[serde(deserialize_with = "cluster_label")]
    pub cluster: String,
    pub camera_center: Vec3,
    pub optical_axis: Vec3,
    #[serde(default)]
    pub points: Vec<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trimmed_lightness: Option<f64>,
}

fn cluster_label<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Label {
        Text(String),
        Number(i64),
    }
    Ok(match Label::deserialize(d)? {
        Label::Text(s) => s,
        Label::Number(n) => n.to_string(),
    })
}

#[derive(Deserialize)]
struct Wrapped {
    images: Vec<SfmImageRecord>,
}

/// Parses a model given either as a JSON array of image records or as
/// `{"images": [...]}`.
pub fn parse_sfm_model(text: &str) -> Result<Vec<SfmImageRecord>> {
    let records = if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<SfmImageRecord>>(text)
    } else {
        serde_json::from_str::<Wrapped>(text).map(|w| w.images)
    }
    .map_err(|e| Error::invalid(format!("model JSON: {e}")))?;

    let mut ids = HashSet::new();
    for (i, r) in records.iter().enumerate() {
        if r.id.is_empty() {
            return Err(Error::invalid(format!("images[{i}].id: empty")));
        }
        if !ids.insert(r.id.as_str()) {
            return Err(Error::invalid(format!("images[{i}].id: duplicate `{}`", r.id)));
        }
        let n = norm3(r.optical_axis);
        if !((n - 1.0).abs() <= UNIT_TOLERANCE) {
            return Err(Error::invalid(format!("images[{i}].optical_axis: norm {n}, expected 1")));
        }
        if let Some(k) = r.points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::invalid(format!("images[{i}].points[{k}]: non-finite coordinate")));
        }
    }
    Ok(records)
}

pub fn load_sfm_model(path: impl AsRef<Path>) -> Result<Vec<SfmImageRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sfm_model(&text).map_err(|e| Error::Decode {
        path: path.into(),
        message: e.to_string(),
    })
}

#[derive(Deserialize)]
struct LightnessRow {
    image_id: String,
    lightness: f64,
}

/// Reads `image_id,lightness` CSV with a header row.
pub fn load_lightness_csv(path: impl AsRef<Path>) -> Result<HashMap<String, f64>> {
    let path = path.as_ref();
    let decode = |e: csv::Error| Error::Decode {
        path: path.into(),
        message: e.to_string(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(decode)?;
    reader
        .deserialize::<LightnessRow>()
        .map(|row| row.map(|r| (r.image_id, r.lightness)).map_err(decode))
        .collect()
}

/// Writes a two-column pair CSV with the given header.
pub fn write_pairs_csv<'a>(
    path: impl AsRef<Path>,
    header: (&str, &str),
    pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<()> {
    let path = path.as_ref();
    let io = |e: csv::Error| Error::Decode {
        path: path.into(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record([header.0, header.1]).map_err(io)?;
    for (a, b) in pairs {
        w.write_record([a, b]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_shapes_parse() {
        let rec = r#"{"id":"a","cluster":3,"camera_center":[0,0,0],"optical_axis":[0,0,1],"points":[[0,0,0],[1,1,1]]}"#;
        let list = parse_sfm_model(&format!("[{rec}]")).unwrap();
        assert_eq!(list[0].cluster, "3");
        let wrapped = parse_sfm_model(&format!("{{\"images\":[{rec}]}}")).unwrap();
        assert_eq!(list, wrapped);
        assert!(parse_sfm_model("[]").unwrap().is_empty());
    }

    #[test]
    fn schema_errors_have_locations() {
        let msg = parse_sfm_model("[\n{\"id\":\"a\",\"cluster\":\"c\",\"camera_center\":[0,0],\"optical_axis\":[0,0,1]}]")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("line 2"), "{msg}");
        let msg = parse_sfm_model(r#"[{"id":"a","cluster":"c","camera_center":[0,0,0],"optical_axis":[0,0,2]}]"#)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("images[0].optical_axis"), "{msg}");
    }

    #[test]
    fn lightness_and_pairs_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.csv");
        std::fs::write(&path, "image_id,lightness\na, 20.5\nb,70\n").unwrap();
        let l = load_lightness_csv(&path).unwrap();
        assert_eq!(l["a"], 20.5);
        let out = dir.path().join("p.csv");
        write_pairs_csv(&out, ("anchor", "positive"), [("a", "b")]).unwrap();
        assert_eq!(std::fs::read_to_string(out).unwrap(), "anchor,positive\na,b\n");
    }
}
