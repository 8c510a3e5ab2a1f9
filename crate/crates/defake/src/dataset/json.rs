use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use super::{DatasetError, Result};

/// One news post as named fields; the unit of JSON ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub fields: BTreeMap<String, FieldValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Str(String),
    Int(i64),
    Float(f64),
    IntArray(ArrayD<i64>),
    FloatArray(ArrayD<f64>),
}

/// Load a top-level JSON array of objects into records, preserving order.
///
/// `"image"` paths are resolved relative to the JSON file's directory.
pub fn load_json_dataset(path: &Path, required_fields: &[&str]) -> Result<Vec<SampleRecord>> {
    let raw = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: serde_json::Value =
        serde_json::from_str(&raw).map_err(|e| DatasetError::Parse {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
    let serde_json::Value::Array(elements) = value else {
        return Err(DatasetError::NotAnArray);
    };
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));

    let mut records = Vec::with_capacity(elements.len());
    let mut first_keys: Option<Vec<String>> = None;
    for (index, element) in elements.into_iter().enumerate() {
        let serde_json::Value::Object(object) = element else {
            return Err(DatasetError::BadField {
                index,
                detail: "element is not a JSON object".into(),
            });
        };
        for &field in required_fields {
            if !object.contains_key(field) {
                return Err(DatasetError::MissingField {
                    index,
                    field: field.to_string(),
                });
            }
        }
        let mut fields = BTreeMap::new();
        for (key, value) in object {
            let parsed = match value {
                serde_json::Value::String(s) => {
                    if key == "image" {
                        FieldValue::Str(base_dir.join(s).to_string_lossy().into_owned())
                    } else {
                        FieldValue::Str(s)
                    }
                }
                serde_json::Value::Number(n) => {
                    if let Some(i) = n.as_i64() {
                        FieldValue::Int(i)
                    } else {
                        FieldValue::Float(n.as_f64().ok_or_else(|| DatasetError::BadField {
                            index,
                            detail: format!("field {key:?}: unrepresentable number"),
                        })?)
                    }
                }
                serde_json::Value::Array(_) => parse_array(index, &key, &value)?,
                other => {
                    return Err(DatasetError::BadField {
                        index,
                        detail: format!("field {key:?}: unsupported value {other}"),
                    })
                }
            };
            if key == "label" && !matches!(parsed, FieldValue::Int(_)) {
                return Err(DatasetError::NonIntegerLabel { index });
            }
            fields.insert(key, parsed);
        }
        let keys: Vec<String> = fields.keys().cloned().collect();
        match &first_keys {
            None => first_keys = Some(keys),
            Some(expected) if *expected != keys => {
                return Err(DatasetError::InconsistentFields {
                    index,
                    detail: format!("{keys:?} vs {expected:?}"),
                })
            }
            _ => {}
        }
        records.push(SampleRecord { fields });
    }
    Ok(records)
}

/// Nested numeric JSON arrays become dense tensors; all-integer arrays stay
/// integral (edge lists, node counts).
fn parse_array(index: usize, key: &str, value: &serde_json::Value) -> Result<FieldValue> {
    let mut shape = Vec::new();
    infer_shape(index, key, value, &mut shape)?;
    let mut ints = Vec::new();
    let mut floats = Vec::new();
    let mut all_int = true;
    flatten(index, key, value, &mut ints, &mut floats, &mut all_int)?;
    if floats.len() != shape.iter().product::<usize>() {
        return Err(DatasetError::BadField {
            index,
            detail: format!("field {key:?}: ragged nested array"),
        });
    }
    if all_int {
        Ok(FieldValue::IntArray(
            ArrayD::from_shape_vec(IxDyn(&shape), ints).expect("shape inferred from data"),
        ))
    } else {
        Ok(FieldValue::FloatArray(
            ArrayD::from_shape_vec(IxDyn(&shape), floats).expect("shape inferred from data"),
        ))
    }
}

fn infer_shape(
    index: usize,
    key: &str,
    value: &serde_json::Value,
    shape: &mut Vec<usize>,
) -> Result<()> {
    if let serde_json::Value::Array(items) = value {
        shape.push(items.len());
        if let Some(first) = items.first() {
            infer_shape(index, key, first, shape)?;
        }
    }
    Ok(())
}

fn flatten(
    index: usize,
    key: &str,
    value: &serde_json::Value,
    ints: &mut Vec<i64>,
    floats: &mut Vec<f64>,
    all_int: &mut bool,
) -> Result<()> {
    match value {
        serde_json::Value::Array(items) => {
            for item in items {
                flatten(index, key, item, ints, floats, all_int)?;
            }
            Ok(())
        }
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                ints.push(i);
                floats.push(i as f64);
            } else {
                *all_int = false;
                floats.push(n.as_f64().unwrap_or(f64::NAN));
            }
            Ok(())
        }
        other => Err(DatasetError::BadField {
            index,
            detail: format!("field {key:?}: non-numeric value {other} inside array"),
        }),
    }
}
