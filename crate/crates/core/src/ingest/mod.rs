//! Scene manifests: the instance detections a matting run starts from.
//!
//! ```json
//! {
//!   "image": "scene.png",
//!   "instances": [
//!     { "id": 1, "label": "person", "score": 0.97,
//!       "bbox": [10, 20, 110, 220], "mask": "person_mask.png" },
//!     { "id": 2, "label": "dog",
//!       "mask": { "size": [240, 320], "counts": [500, 20, 300] } }
//!   ]
//! }
//! ```
//!
//! `image`, `score` (default 1.0) and `bbox` (default: the mask's tight box,
//! `[x0, y0, x1, y1]` with exclusive upper corner) are optional. Mask paths
//! are resolved against the manifest's directory.

pub mod rle;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::io;
use crate::pipeline::InstanceAnnotation;
use crate::raster::{BinaryMask, BoundingBox};

pub use rle::{decode_rle, encode_rle};

#[derive(Clone, Debug, PartialEq)]
pub struct SceneManifest {
    pub image_path: Option<PathBuf>,
    pub instances: Vec<InstanceAnnotation>,
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(format!("{path}.{key}"), "missing"))
}

fn as_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::schema(path, format!("expected a non-negative integer, got {v}")))
}

fn as_u32(v: &Value, path: &str) -> Result<u32> {
    u32::try_from(as_u64(v, path)?).map_err(|_| Error::schema(path, "value too large"))
}

fn parse_mask(v: &Value, path: &str, base_dir: &Path) -> Result<BinaryMask> {
    match v {
        Value::String(p) => io::read_mask(&base_dir.join(p)),
        Value::Object(obj) => {
            let size = field(obj, "size", path)?
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::schema(format!("{path}.size"), "expected [height, width]"))?;
            let h = as_u32(&size[0], &format!("{path}.size[0]"))?;
            let w = as_u32(&size[1], &format!("{path}.size[1]"))?;
            let counts = field(obj, "counts", path)?
                .as_array()
                .ok_or_else(|| Error::schema(format!("{path}.counts"), "expected an array of run lengths"))?
                .iter()
                .enumerate()
                .map(|(i, c)| as_u64(c, &format!("{path}.counts[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            decode_rle(h, w, &counts)
        }
        _ => Err(Error::schema(path, "expected a file path or an RLE object")),
    }
}

fn parse_instance(v: &Value, path: &str, base_dir: &Path, image_dims: (u32, u32)) -> Result<InstanceAnnotation> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::schema(path, "expected an object"))?;
    let id = as_u64(field(obj, "id", path)?, &format!("{path}.id"))?;
    let label = field(obj, "label", path)?
        .as_str()
        .ok_or_else(|| Error::schema(format!("{path}.label"), "expected a string"))?
        .to_owned();
    let score = match obj.get("score") {
        None | Some(Value::Null) => 1.0,
        Some(s) => s
            .as_f64()
            .filter(|s| (0.0..=1.0).contains(s))
            .ok_or_else(|| Error::schema(format!("{path}.score"), format!("expected a number in [0, 1], got {s}")))?,
    };

    let mask = parse_mask(field(obj, "mask", path)?, &format!("{path}.mask"), base_dir)?;
    crate::raster::ensure_same_dims(image_dims, mask.dims())?;
    if mask.is_empty() {
        return Err(Error::schema(format!("{path}.mask"), "mask has no foreground pixel"));
    }

    let bbox = match obj.get("bbox") {
        None | Some(Value::Null) => mask.tight_bbox().expect("nonempty mask"),
        Some(b) => {
            let bpath = format!("{path}.bbox");
            let coords = b
                .as_array()
                .filter(|a| a.len() == 4)
                .ok_or_else(|| Error::schema(&bpath, "expected [x0, y0, x1, y1]"))?
                .iter()
                .enumerate()
                .map(|(i, c)| as_u32(c, &format!("{bpath}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let bbox = BoundingBox::new(coords[0], coords[1], coords[2], coords[3])
                .map_err(|e| Error::schema(&bpath, e.to_string()))?;
            if !bbox.fits_within(image_dims.0, image_dims.1) {
                return Err(Error::schema(bpath, "box extends beyond the image"));
            }
            bbox
        }
    };

    Ok(InstanceAnnotation {
        id,
        label,
        score,
        bbox,
        mask,
    })
}

/// Parses and validates a manifest document against an image of
/// `image_dims`. Either the whole manifest is valid or an error names the
/// first offending field.
pub fn parse_manifest(document: &str, base_dir: &Path, image_dims: (u32, u32)) -> Result<SceneManifest> {
    let root: Value = serde_json::from_str(document).map_err(|e| Error::schema("$", e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::schema("$", "expected an object"))?;
    let image_path = match obj.get("image") {
        None | Some(Value::Null) => None,
        Some(Value::String(p)) => Some(base_dir.join(p)),
        Some(_) => return Err(Error::schema("$.image", "expected a string")),
    };
    let list = field(obj, "instances", "$")?
        .as_array()
        .ok_or_else(|| Error::schema("$.instances", "expected an array"))?;

    let mut seen = HashSet::new();
    let mut instances = Vec::with_capacity(list.len());
    for (i, v) in list.iter().enumerate() {
        let inst = parse_instance(v, &format!("$.instances[{i}]"), base_dir, image_dims)?;
        if !seen.insert(inst.id) {
            return Err(Error::DuplicateId(inst.id));
        }
        instances.push(inst);
    }
    Ok(SceneManifest {
        image_path,
        instances,
    })
}

pub fn read_manifest(path: &Path, image_dims: (u32, u32)) -> Result<SceneManifest> {
    let doc = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&doc, base, image_dims)
}

/// Manifest document for one instance whose mask is stored in a file.
pub fn single_instance_document(image: &str, id: u64, label: &str, bbox: &BoundingBox, mask_file: &str) -> String {
    let doc = json!({
        "image": image,
        "instances": [{
            "id": id,
            "label": label,
            "score": 1.0,
            "bbox": [bbox.x0, bbox.y0, bbox.x1, bbox.y1],
            "mask": mask_file,
        }]
    });
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_mask(dir: &Path, name: &str, w: u32, h: u32, f: impl FnMut(u32, u32) -> bool) {
        io::write_mask(&dir.join(name), &BinaryMask::from_fn(w, h, f).unwrap()).unwrap();
    }

    #[test]
    fn minimal_manifest_derives_bbox() {
        let dir = tempfile::tempdir().unwrap();
        write_mask(dir.path(), "m.png", 40, 30, |x, y| (5..15).contains(&x) && (8..20).contains(&y));
        let doc = r#"{"instances": [{"id": 3, "label": "cat", "mask": "m.png"}]}"#;
        let m = parse_manifest(doc, dir.path(), (40, 30)).unwrap();
        assert_eq!(m.image_path, None);
        let inst = &m.instances[0];
        assert_eq!(inst.bbox, BoundingBox::new(5, 8, 15, 20).unwrap());
        assert_eq!(inst.score, 1.0);
        assert_eq!(inst.label, "cat");
    }

    #[test]
    fn rle_masks_are_accepted() {
        let doc = r#"{"image": "x.png", "instances": [
            {"id": 1, "label": "a", "score": 0.5, "mask": {"size": [3, 3], "counts": [4, 2, 3]}}]}"#;
        let m = parse_manifest(doc, Path::new("/data"), (3, 3)).unwrap();
        assert_eq!(m.image_path, Some(PathBuf::from("/data/x.png")));
        assert_eq!(m.instances[0].mask.count(), 2);
        assert_eq!(m.instances[0].bbox, BoundingBox::new(1, 1, 2, 3).unwrap());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let rle = r#"{"size": [2, 2], "counts": [0, 4]}"#;
        let doc = format!(
            r#"{{"instances": [{{"id": 7, "label": "a", "mask": {rle}}}, {{"id": 7, "label": "b", "mask": {rle}}}]}}"#
        );
        assert!(matches!(parse_manifest(&doc, Path::new("."), (2, 2)), Err(Error::DuplicateId(7))));
    }

    #[test]
    fn mask_dimension_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_mask(dir.path(), "small.png", 100, 100, |x, _| x < 50);
        let doc = r#"{"instances": [{"id": 1, "label": "a", "mask": "small.png"}]}"#;
        assert!(matches!(
            parse_manifest(doc, dir.path(), (200, 200)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn schema_errors_name_the_field() {
        let rle = r#"{"size": [2, 2], "counts": [0, 4]}"#;
        let cases = [
            (r#"{"instances": 5}"#.to_string(), "$.instances"),
            (format!(r#"{{"instances": [{{"label": "a", "mask": {rle}}}]}}"#), "$.instances[0].id"),
            (format!(r#"{{"instances": [{{"id": 1, "label": "a", "score": 3, "mask": {rle}}}]}}"#), "$.instances[0].score"),
            (format!(r#"{{"instances": [{{"id": 1, "label": "a", "bbox": [0, 0, 1], "mask": {rle}}}]}}"#), "$.instances[0].bbox"),
            (format!(r#"{{"instances": [{{"id": 1, "label": "a", "bbox": [0, 0, 3, 1], "mask": {rle}}}]}}"#), "$.instances[0].bbox"),
            (r#"{"instances": [{"id": 1, "label": "a", "mask": {"size": [2, 2], "counts": [0, -4]}}]}"#.to_string(), "$.instances[0].mask.counts[1]"),
            (r#"{"instances": [{"id": 1, "label": "a", "mask": {"size": [2, 2], "counts": [4]}}]}"#.to_string(), "$.instances[0].mask"),
            ("not json".to_string(), "$"),
        ];
        for (doc, expected) in cases {
            match parse_manifest(&doc, Path::new("."), (2, 2)) {
                Err(Error::Schema { field, .. }) => assert_eq!(field, expected, "{doc}"),
                other => panic!("{doc}: expected schema error, got {other:?}"),
            }
        }
    }

    #[test]
    fn rle_length_mismatch_propagates() {
        let doc = r#"{"instances": [{"id": 1, "label": "a", "mask": {"size": [2, 2], "counts": [1, 1]}}]}"#;
        assert!(matches!(
            parse_manifest(doc, Path::new("."), (2, 2)),
            Err(Error::RleLengthMismatch { .. })
        ));
    }

    #[test]
    fn generated_document_parses() {
        let dir = tempfile::tempdir().unwrap();
        write_mask(dir.path(), "mask.png", 10, 10, |x, y| x > 2 && y > 3);
        let bbox = BoundingBox::new(3, 4, 10, 10).unwrap();
        let doc = single_instance_document("image.png", 1, "object", &bbox, "mask.png");
        let m = parse_manifest(&doc, dir.path(), (10, 10)).unwrap();
        assert_eq!(m.instances[0].bbox, bbox);
    }
}
