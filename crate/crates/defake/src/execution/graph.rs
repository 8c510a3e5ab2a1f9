//! Ingestion for propagation-graph datasets (the "bigcn" model): one JSON
//! record per graph with per-node features, a directed edge list and a
//! root index, padded into rectangular batches.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayD, IxDyn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Feature, FieldValue, KeyedBatch, SampleRecord};

use super::{ExecError, Result};

pub struct GraphRecord {
    pub features: Array2<f64>,
    pub edges: Vec<(i64, i64)>,
    pub root: i64,
    pub label: i64,
}

fn bad(index: usize, detail: impl Into<String>) -> ExecError {
    ExecError::BadData(format!("graph record {index}: {}", detail.into()))
}

pub fn parse_graph_records(records: &[SampleRecord]) -> Result<Vec<GraphRecord>> {
    records
        .iter()
        .enumerate()
        .map(|(index, record)| {
            let features = match record.fields.get("node_features") {
                Some(FieldValue::FloatArray(a)) => a.clone(),
                Some(FieldValue::IntArray(a)) => a.mapv(|v| v as f64),
                _ => return Err(bad(index, "node_features must be a nested numeric array")),
            };
            let features = features
                .into_dimensionality::<ndarray::Ix2>()
                .map_err(|_| bad(index, "node_features must be rank 2 ([nodes, features])"))?;
            let edges = match record.fields.get("edges") {
                Some(FieldValue::IntArray(a)) if a.len() == 0 => Vec::new(),
                Some(FieldValue::IntArray(a)) => {
                    let a = a
                        .clone()
                        .into_dimensionality::<ndarray::Ix2>()
                        .map_err(|_| bad(index, "edges must be rank 2 ([edges, 2])"))?;
                    if a.ncols() != 2 {
                        return Err(bad(index, "edges rows must be (src, dst) pairs"));
                    }
                    a.rows().into_iter().map(|r| (r[0], r[1])).collect()
                }
                _ => return Err(bad(index, "edges must be a nested integer array")),
            };
            let root = match record.fields.get("root") {
                Some(FieldValue::Int(r)) => *r,
                _ => return Err(bad(index, "root must be an integer")),
            };
            let label = match record.fields.get("label") {
                Some(FieldValue::Int(l)) => *l,
                _ => return Err(bad(index, "label must be an integer")),
            };
            Ok(GraphRecord {
                features,
                edges,
                root,
                label,
            })
        })
        .collect()
}

/// Pad a set of graphs into rectangular batches with the keys the graph
/// model expects; `[-1, -1]` marks edge padding.
pub fn graph_batches(
    records: &[GraphRecord],
    feature_dim: usize,
    batch_size: usize,
    shuffle: bool,
    seed: u64,
) -> Result<Vec<KeyedBatch>> {
    if records.is_empty() {
        return Err(ExecError::BadData("no graph records".into()));
    }
    for (index, record) in records.iter().enumerate() {
        if record.features.ncols() != feature_dim {
            return Err(bad(
                index,
                format!(
                    "node_features has {} columns, expected feature_dim {feature_dim}",
                    record.features.ncols()
                ),
            ));
        }
        if record.features.nrows() == 0 {
            return Err(bad(index, "graph has no nodes"));
        }
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    if shuffle {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut batches = Vec::new();
    for chunk in order.chunks(batch_size.max(1)) {
        let graphs: Vec<&GraphRecord> = chunk.iter().map(|&i| &records[i]).collect();
        let max_nodes = graphs.iter().map(|g| g.features.nrows()).max().unwrap();
        let max_edges = graphs.iter().map(|g| g.edges.len()).max().unwrap().max(1);
        let b = graphs.len();

        let mut features = ArrayD::zeros(IxDyn(&[b, max_nodes, feature_dim]));
        let mut edges = ArrayD::from_elem(IxDyn(&[b, max_edges, 2]), -1i64);
        let mut num_nodes = Vec::with_capacity(b);
        let mut roots = Vec::with_capacity(b);
        let mut labels = Vec::with_capacity(b);
        for (g, graph) in graphs.iter().enumerate() {
            for ((i, j), &v) in graph.features.indexed_iter() {
                features[[g, i, j]] = v;
            }
            for (e, &(s, d)) in graph.edges.iter().enumerate() {
                edges[[g, e, 0]] = s;
                edges[[g, e, 1]] = d;
            }
            num_nodes.push(graph.features.nrows() as i64);
            roots.push(graph.root);
            labels.push(graph.label);
        }
        let mut m = BTreeMap::new();
        m.insert("node_features".to_string(), Feature::Float(features));
        m.insert("edges".to_string(), Feature::Int(edges));
        m.insert(
            "num_nodes".to_string(),
            Feature::Int(ArrayD::from_shape_vec(IxDyn(&[b]), num_nodes).unwrap()),
        );
        m.insert(
            "root".to_string(),
            Feature::Int(ArrayD::from_shape_vec(IxDyn(&[b]), roots).unwrap()),
        );
        m.insert(
            "label".to_string(),
            Feature::Int(ArrayD::from_shape_vec(IxDyn(&[b]), labels).unwrap()),
        );
        batches.push(KeyedBatch::from_features(m).map_err(ExecError::Data)?);
    }
    Ok(batches)
}
