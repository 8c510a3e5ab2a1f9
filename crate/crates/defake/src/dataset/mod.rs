//! Data ingestion and batching.
//!
//! JSON sample files are loaded into [`SampleRecord`]s, processed into a
//! [`TextDataset`] (text tokenized eagerly at construction) or a
//! [`MultiModalDataset`] (images loaded lazily on item access), and grouped
//! into [`KeyedBatch`]es — the sole currency between data, model and
//! trainer.

mod batch;
mod image;
mod json;
mod split;
mod tokenize;

#[cfg(test)]
mod tests;

pub use batch::make_batches;
pub use image::{reference_transform, write_ppm, ImageTensor};
pub use json::{load_json_dataset, FieldValue, SampleRecord};
pub use split::split_data;
pub use tokenize::{reference_tokenize, TokenSequence, Vocabulary, PAD_ID, UNK_ID};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayD, Axis, IxDyn};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("top-level JSON value is not an array")]
    NotAnArray,
    #[error("element {index}: missing required field {field:?}")]
    MissingField { index: usize, field: String },
    #[error("element {index}: field \"label\" is not an integer")]
    NonIntegerLabel { index: usize },
    #[error("element {index}: label {label} is negative")]
    NegativeLabel { index: usize, label: i64 },
    #[error("element {index}: field set differs from element 0 ({detail})")]
    InconsistentFields { index: usize, detail: String },
    #[error("element {index}: {detail}")]
    BadField { index: usize, detail: String },
    #[error("dataset is empty")]
    Empty,
    #[error("index {index} out of range for dataset of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("split ratios invalid: {0}")]
    BadRatios(String),
    #[error("batch size must be >= 1")]
    BadBatchSize,
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("max_len must be >= 1")]
    BadMaxLen,
    #[error("image {path}: {detail}")]
    BadImage { path: PathBuf, detail: String },
    #[error("transform failed for {path}: {source}")]
    TransformFailed {
        path: PathBuf,
        #[source]
        source: Box<DatasetError>,
    },
    #[error("samples disagree on feature {key:?} shape: {detail}")]
    RaggedFeature { key: String, detail: String },
}

pub type Result<T> = std::result::Result<T, DatasetError>;

/// One dense feature array; token ids, labels and friends stay integral.
#[derive(Debug, Clone, PartialEq)]
pub enum Feature {
    Int(ArrayD<i64>),
    Float(ArrayD<f64>),
}

impl Feature {
    pub fn shape(&self) -> &[usize] {
        match self {
            Feature::Int(a) => a.shape(),
            Feature::Float(a) => a.shape(),
        }
    }

    /// Stack per-sample arrays along a new leading axis.
    fn stack(key: &str, rows: &[&Feature]) -> Result<Feature> {
        let first_shape = rows[0].shape().to_vec();
        for r in rows {
            if r.shape() != first_shape {
                return Err(DatasetError::RaggedFeature {
                    key: key.to_string(),
                    detail: format!("{:?} vs {:?}", first_shape, r.shape()),
                });
            }
        }
        let mut shape = vec![rows.len()];
        shape.extend_from_slice(&first_shape);
        match rows[0] {
            Feature::Int(_) => {
                let mut out = ArrayD::<i64>::zeros(IxDyn(&shape));
                for (i, r) in rows.iter().enumerate() {
                    let Feature::Int(a) = r else {
                        return Err(DatasetError::RaggedFeature {
                            key: key.to_string(),
                            detail: "mixed integer/float values".into(),
                        });
                    };
                    out.index_axis_mut(Axis(0), i).assign(a);
                }
                Ok(Feature::Int(out))
            }
            Feature::Float(_) => {
                let mut out = ArrayD::<f64>::zeros(IxDyn(&shape));
                for (i, r) in rows.iter().enumerate() {
                    let Feature::Float(a) = r else {
                        return Err(DatasetError::RaggedFeature {
                            key: key.to_string(),
                            detail: "mixed integer/float values".into(),
                        });
                    };
                    out.index_axis_mut(Axis(0), i).assign(a);
                }
                Ok(Feature::Float(out))
            }
        }
    }
}

/// Features of a single sample, without the batch dimension.
pub type KeyedSample = BTreeMap<String, Feature>;

/// A mapping from feature name to a dense array whose leading dimension is
/// the batch size.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyedBatch {
    features: BTreeMap<String, Feature>,
    batch_size: usize,
}

impl KeyedBatch {
    pub fn from_samples(samples: &[KeyedSample]) -> Result<Self> {
        if samples.is_empty() {
            return Err(DatasetError::Empty);
        }
        let keys: Vec<&String> = samples[0].keys().collect();
        let mut features = BTreeMap::new();
        for key in keys {
            let rows: Vec<&Feature> = samples
                .iter()
                .map(|s| {
                    s.get(key).ok_or_else(|| DatasetError::RaggedFeature {
                        key: key.clone(),
                        detail: "missing in a later sample".into(),
                    })
                })
                .collect::<Result<_>>()?;
            features.insert(key.clone(), Feature::stack(key, &rows)?);
        }
        Ok(Self {
            features,
            batch_size: samples.len(),
        })
    }

    /// Build a batch directly from full-size arrays (leading dim = batch).
    pub fn from_features(features: BTreeMap<String, Feature>) -> Result<Self> {
        let mut batch_size = None;
        for f in features.values() {
            let lead = *f.shape().first().ok_or(DatasetError::Empty)?;
            match batch_size {
                None => batch_size = Some(lead),
                Some(b) if b != lead => {
                    return Err(DatasetError::RaggedFeature {
                        key: "<batch>".into(),
                        detail: format!("leading dims {b} vs {lead}"),
                    })
                }
                _ => {}
            }
        }
        let batch_size = batch_size.ok_or(DatasetError::Empty)?;
        Ok(Self {
            features,
            batch_size,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.features.keys().map(|k| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Feature> {
        self.features.get(key)
    }

    pub fn int(&self, key: &str) -> Option<&ArrayD<i64>> {
        match self.features.get(key) {
            Some(Feature::Int(a)) => Some(a),
            _ => None,
        }
    }

    pub fn float(&self, key: &str) -> Option<&ArrayD<f64>> {
        match self.features.get(key) {
            Some(Feature::Float(a)) => Some(a),
            _ => None,
        }
    }

    /// Labels as a flat vector; present in every training batch.
    pub fn labels(&self) -> Option<Vec<i64>> {
        self.int("label").map(|a| a.iter().cloned().collect())
    }
}

/// Index access shared by the built-in datasets.
pub trait IndexedDataset {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Features for one sample; may invoke lazy hooks (image transforms).
    fn get(&self, index: usize) -> Result<KeyedSample>;

    fn labels(&self) -> &[i64];
}

type TokenizeFn = Box<dyn Fn(&str) -> TokenSequence>;
type TransformFn = Box<dyn Fn(&Path) -> Result<ImageTensor>>;

/// Text dataset: tokenizes the text field eagerly at construction and keeps
/// every numeric auxiliary field as a stacked array.
pub struct TextDataset {
    labels: Vec<i64>,
    token_ids: Option<Array2<i64>>,
    mask: Option<Array2<i64>>,
    aux: BTreeMap<String, Vec<Feature>>,
}

impl TextDataset {
    /// `tokenizer` pairs the text field name with the user hook; pass `None`
    /// for datasets without text (e.g. propagation graphs).
    pub fn new(records: &[SampleRecord], tokenizer: Option<(&str, TokenizeFn)>) -> Result<Self> {
        if records.is_empty() {
            return Err(DatasetError::Empty);
        }
        let mut labels = Vec::with_capacity(records.len());
        let mut aux: BTreeMap<String, Vec<Feature>> = BTreeMap::new();
        let mut ids_rows: Vec<TokenSequence> = Vec::new();
        let text_field = tokenizer.as_ref().map(|(f, _)| f.to_string());

        for (index, record) in records.iter().enumerate() {
            let label = match record.fields.get("label") {
                Some(FieldValue::Int(l)) => *l,
                Some(_) => return Err(DatasetError::NonIntegerLabel { index }),
                None => {
                    return Err(DatasetError::MissingField {
                        index,
                        field: "label".into(),
                    })
                }
            };
            if label < 0 {
                return Err(DatasetError::NegativeLabel { index, label });
            }
            labels.push(label);

            if let Some((field, tokenize)) = &tokenizer {
                match record.fields.get(*field) {
                    Some(FieldValue::Str(text)) => ids_rows.push(tokenize(text)),
                    Some(_) => {
                        return Err(DatasetError::BadField {
                            index,
                            detail: format!("text field {field:?} is not a string"),
                        })
                    }
                    None => {
                        return Err(DatasetError::MissingField {
                            index,
                            field: field.to_string(),
                        })
                    }
                }
            }

            for (key, value) in &record.fields {
                if key == "label" || Some(key) == text_field.as_ref() {
                    continue;
                }
                let feature = match value {
                    FieldValue::Int(v) => Feature::Int(ArrayD::from_elem(IxDyn(&[]), *v)),
                    FieldValue::Float(v) => Feature::Float(ArrayD::from_elem(IxDyn(&[]), *v)),
                    FieldValue::IntArray(a) => Feature::Int(a.clone()),
                    FieldValue::FloatArray(a) => Feature::Float(a.clone()),
                    // raw strings (image paths etc.) do not flow into batches
                    FieldValue::Str(_) => continue,
                };
                aux.entry(key.clone()).or_default().push(feature);
            }
        }

        let (token_ids, mask) = if let Some(first) = ids_rows.first() {
            let len = first.ids.len();
            let mut ids = Array2::<i64>::zeros((records.len(), len));
            let mut mk = Array2::<i64>::zeros((records.len(), len));
            for (i, seq) in ids_rows.iter().enumerate() {
                for (j, (&id, &m)) in seq.ids.iter().zip(&seq.mask).enumerate() {
                    ids[(i, j)] = id;
                    mk[(i, j)] = m;
                }
            }
            (Some(ids), Some(mk))
        } else {
            (None, None)
        };

        Ok(Self {
            labels,
            token_ids,
            mask,
            aux,
        })
    }
}

impl IndexedDataset for TextDataset {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn get(&self, index: usize) -> Result<KeyedSample> {
        if index >= self.len() {
            return Err(DatasetError::IndexOutOfRange {
                index,
                size: self.len(),
            });
        }
        let mut sample = KeyedSample::new();
        sample.insert(
            "label".into(),
            Feature::Int(ArrayD::from_elem(IxDyn(&[]), self.labels[index])),
        );
        if let (Some(ids), Some(mask)) = (&self.token_ids, &self.mask) {
            sample.insert(
                "token_ids".into(),
                Feature::Int(ids.row(index).to_owned().into_dyn()),
            );
            sample.insert(
                "mask".into(),
                Feature::Int(mask.row(index).to_owned().into_dyn()),
            );
        }
        for (key, rows) in &self.aux {
            sample.insert(key.clone(), rows[index].clone());
        }
        Ok(sample)
    }

    fn labels(&self) -> &[i64] {
        &self.labels
    }
}

/// Multi-modal dataset: everything [`TextDataset`] does, plus an image per
/// sample that is decoded through the user transform hook only when the
/// sample is accessed. No decoded image is cached.
pub struct MultiModalDataset {
    text: TextDataset,
    image_paths: Vec<PathBuf>,
    transform: TransformFn,
}

impl MultiModalDataset {
    pub fn new(
        records: &[SampleRecord],
        tokenizer: Option<(&str, TokenizeFn)>,
        image_field: &str,
        transform: TransformFn,
    ) -> Result<Self> {
        let mut image_paths = Vec::with_capacity(records.len());
        for (index, record) in records.iter().enumerate() {
            match record.fields.get(image_field) {
                Some(FieldValue::Str(p)) => image_paths.push(PathBuf::from(p)),
                Some(_) => {
                    return Err(DatasetError::BadField {
                        index,
                        detail: format!("image field {image_field:?} is not a path string"),
                    })
                }
                None => {
                    return Err(DatasetError::MissingField {
                        index,
                        field: image_field.to_string(),
                    })
                }
            }
        }
        let text = TextDataset::new(records, tokenizer)?;
        Ok(Self {
            text,
            image_paths,
            transform,
        })
    }
}

impl IndexedDataset for MultiModalDataset {
    fn len(&self) -> usize {
        self.text.len()
    }

    fn get(&self, index: usize) -> Result<KeyedSample> {
        let mut sample = self.text.get(index)?;
        let path = &self.image_paths[index];
        let image = (self.transform)(path).map_err(|source| DatasetError::TransformFailed {
            path: path.clone(),
            source: Box::new(source),
        })?;
        sample.insert("image".into(), Feature::Float(image.pixels.into_dyn()));
        Ok(sample)
    }

    fn labels(&self) -> &[i64] {
        self.text.labels()
    }
}
