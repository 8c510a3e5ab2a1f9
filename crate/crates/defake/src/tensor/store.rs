use std::collections::BTreeMap;

use ndarray::ArrayD;

use super::{Result, TensorError};

/// Handle to a parameter registered in a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub(crate) usize);

/// Named parameter arrays owned by a model.
///
/// Indices are stable for the lifetime of the store, so models keep
/// `ParamId` fields and the optimizer keeps per-index state.
#[derive(Debug, Default, Clone)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<ArrayD<f64>>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, value: ArrayD<f64>) -> Result<ParamId> {
        if self.names.iter().any(|n| n == name) {
            return Err(TensorError::DuplicateParam(name.to_string()));
        }
        self.names.push(name.to_string());
        self.values.push(value);
        Ok(ParamId(self.names.len() - 1))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, id: ParamId) -> &ArrayD<f64> {
        &self.values[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut ArrayD<f64> {
        &mut self.values[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ArrayD<f64>)> {
        self.names
            .iter()
            .map(|n| n.as_str())
            .zip(self.values.iter())
    }

    /// Total number of scalar parameters.
    pub fn num_scalars(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }

    /// Overwrite every parameter from a name -> array map. Shapes must match.
    pub fn load_named(&mut self, arrays: &BTreeMap<String, ArrayD<f64>>) -> Result<()> {
        for (name, value) in self.names.iter().zip(self.values.iter_mut()) {
            let src = arrays
                .get(name)
                .ok_or_else(|| TensorError::InvalidArgument {
                    op: "load_named",
                    detail: format!("missing parameter {name:?}"),
                })?;
            if src.shape() != value.shape() {
                return Err(TensorError::ShapeMismatch {
                    op: "load_named",
                    detail: format!(
                        "parameter {name:?} expects {:?}, got {:?}",
                        value.shape(),
                        src.shape()
                    ),
                });
            }
            value.assign(src);
        }
        Ok(())
    }

    /// Order-insensitive checksum over all scalars, used to assert that
    /// evaluation passes leave parameters untouched.
    pub fn checksum(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for (name, value) in self.iter() {
            name.hash(&mut h);
            for v in value.iter() {
                v.to_bits().hash(&mut h);
            }
        }
        h.finish()
    }
}
