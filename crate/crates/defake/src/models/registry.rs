use std::collections::BTreeMap;

use serde_json::Value;

use super::{AbstractModel, ModelError, Result};

pub type ModelFactory =
    Box<dyn Fn(&serde_json::Map<String, Value>, u64) -> Result<Box<dyn AbstractModel>>>;

/// Name-keyed model factories; lookups are case-insensitive, stored names
/// are lowercase.
pub struct ModelRegistry {
    factories: BTreeMap<String, ModelFactory>,
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, factory: ModelFactory) -> Result<()> {
        let key = name.to_lowercase();
        if self.factories.contains_key(&key) {
            return Err(ModelError::DuplicateModel(key));
        }
        self.factories.insert(key, factory);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.factories.keys().cloned().collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(&name.to_lowercase())
    }

    /// Build a freshly initialized model. Unknown parameter keys are
    /// rejected by the factory.
    pub fn resolve(
        &self,
        name: &str,
        params: &serde_json::Map<String, Value>,
        seed: u64,
    ) -> Result<Box<dyn AbstractModel>> {
        let factory =
            self.factories
                .get(&name.to_lowercase())
                .ok_or_else(|| ModelError::UnknownModel {
                    name: name.to_string(),
                    known: self.names(),
                })?;
        factory(params, seed)
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        Self::new()
    }
}

/// Registry preloaded with the built-in zoo.
pub fn builtin_registry() -> ModelRegistry {
    let mut registry = ModelRegistry::new();
    registry
        .register("textcnn", Box::new(|p, s| super::build_textcnn(p, s)))
        .expect("empty registry");
    registry
        .register("mdfend", Box::new(|p, s| super::build_mdfend(p, s)))
        .expect("empty registry");
    registry
        .register("eann", Box::new(|p, s| super::build_eann(p, s)))
        .expect("empty registry");
    registry
        .register("bigcn", Box::new(|p, s| super::build_bigcn_lite(p, s)))
        .expect("empty registry");
    registry
        .register("toytext", Box::new(|p, s| super::build_toy_text_model(p, s)))
        .expect("empty registry");
    registry
}

/// Typed access to a factory parameter map with unknown-key rejection.
pub(crate) struct ParamReader<'a> {
    model: &'static str,
    map: &'a serde_json::Map<String, Value>,
    used: std::cell::RefCell<Vec<String>>,
}

impl<'a> ParamReader<'a> {
    pub fn new(model: &'static str, map: &'a serde_json::Map<String, Value>) -> Self {
        Self {
            model,
            map,
            used: std::cell::RefCell::new(Vec::new()),
        }
    }

    fn touch(&self, key: &str) -> Option<&'a Value> {
        self.used.borrow_mut().push(key.to_string());
        self.map.get(key)
    }

    fn invalid(&self, key: &str, detail: String) -> ModelError {
        ModelError::InvalidParam {
            model: self.model.to_string(),
            key: key.to_string(),
            detail,
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.touch(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| self.invalid(key, format!("expected non-negative integer, got {v}"))),
        }
    }

    pub fn positive(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.usize(key, default)?;
        if v == 0 {
            return Err(self.invalid(key, "must be >= 1".into()));
        }
        Ok(v)
    }

    pub fn required_positive(&self, key: &str) -> Result<usize> {
        match self.touch(key) {
            None => Err(self.invalid(key, "required parameter is missing".into())),
            Some(v) => match v.as_u64() {
                Some(u) if u > 0 => Ok(u as usize),
                _ => Err(self.invalid(key, format!("expected positive integer, got {v}"))),
            },
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.touch(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| self.invalid(key, format!("expected number, got {v}"))),
        }
    }

    pub fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.touch(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| self.invalid(key, format!("expected integers, got {v}")))
                })
                .collect(),
            Some(v) => Err(self.invalid(key, format!("expected list of integers, got {v}"))),
        }
    }

    /// Every key must have been read; leftovers are rejected.
    pub fn finish(self) -> Result<()> {
        let used = self.used.into_inner();
        let unknown: Vec<String> = self
            .map
            .keys()
            .filter(|k| !used.contains(k))
            .cloned()
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(ModelError::UnknownParams {
                model: self.model.to_string(),
                keys: unknown,
            })
        }
    }
}
