use ndarray::{Array2, ArrayD, Axis};
use serde_json::{json, Map, Value};

use crate::dataset::KeyedBatch;
use crate::tensor::{NodeId, ParamId, ParamInit, ParamStore, Tape};

use super::components::{gcn_layer, Activation, Affine};
use super::registry::ParamReader;
use super::{float_feature, int_feature, AbstractModel, ModelError, Result};

/// Propagation-tree classifier: two 2-layer graph-convolution stacks, one
/// for the top-down orientation and one for the bottom-up orientation, each
/// mean-pooled per graph and concatenated into an affine head.
///
/// Graphs are batched with padding. Expected features:
/// - "node_features": float `[B, N, F]`, rows past a graph's node count ignored
/// - "edges": int `[B, E, 2]` directed (src, dst) pairs, `[-1, -1]` = padding
/// - "num_nodes": int `[B]`
/// - "root": int `[B]` index of the source post's node
///
/// Each orientation's adjacency is symmetrized over its own edge support
/// before normalization, as the graph-convolution layer requires a
/// symmetric input; the two stacks keep separate weights.
pub struct BiGcnLite {
    store: ParamStore,
    td: [ParamId; 2],
    bu: [ParamId; 2],
    head: Affine,
    feature_dim: usize,
    hidden_dim: usize,
}

impl BiGcnLite {
    pub fn new(feature_dim: usize, hidden_dim: usize, seed: u64) -> Result<Self> {
        let mut store = ParamStore::new();
        let mut init = ParamInit::new(seed);
        let td = [
            store.register("td.w1", init.affine_weight(feature_dim, hidden_dim))?,
            store.register("td.w2", init.affine_weight(hidden_dim, hidden_dim))?,
        ];
        let bu = [
            store.register("bu.w1", init.affine_weight(feature_dim, hidden_dim))?,
            store.register("bu.w2", init.affine_weight(hidden_dim, hidden_dim))?,
        ];
        let head = Affine::new(&mut store, &mut init, "head", 2 * hidden_dim, 2)?;
        Ok(Self {
            store,
            td,
            bu,
            head,
            feature_dim,
            hidden_dim,
        })
    }

    /// One 2-layer stack over a single graph; `x: [n, F]` -> `[n, H]`.
    fn stack(
        &self,
        tape: &mut Tape<'_>,
        x: NodeId,
        adjacency: &Array2<f64>,
        weights: &[ParamId; 2],
    ) -> Result<NodeId> {
        let w1 = tape.param(weights[0]);
        let w2 = tape.param(weights[1]);
        let h = gcn_layer(tape, x, adjacency.view(), w1, Activation::Relu)?;
        gcn_layer(tape, h, adjacency.view(), w2, Activation::Relu)
    }
}

fn bad(key: &str, detail: String) -> ModelError {
    ModelError::BadFeature {
        key: key.into(),
        detail,
    }
}

/// Directed edge lists for one graph, with padding rows dropped and indices
/// validated against the node count.
fn graph_edges(edges: &ArrayD<i64>, graph: usize, n: usize) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let rows = edges.shape()[1];
    for e in 0..rows {
        let src = edges[[graph, e, 0]];
        let dst = edges[[graph, e, 1]];
        if src == -1 && dst == -1 {
            continue;
        }
        let (src, dst) = (
            usize::try_from(src).ok(),
            usize::try_from(dst).ok(),
        );
        match (src, dst) {
            (Some(s), Some(d)) if s < n && d < n => out.push((s, d)),
            _ => {
                return Err(bad(
                    "edges",
                    format!(
                        "edge ({}, {}) of graph {graph} is outside 0..{n}",
                        edges[[graph, e, 0]],
                        edges[[graph, e, 1]]
                    ),
                ))
            }
        }
    }
    Ok(out)
}

/// Undirected support of the given orientation as a 0/1 adjacency matrix;
/// self-loops are dropped (normalization adds them back).
fn support_adjacency(edges: &[(usize, usize)], n: usize, transpose: bool) -> Array2<f64> {
    let mut a = Array2::<f64>::zeros((n, n));
    for &(src, dst) in edges {
        let (i, j) = if transpose { (dst, src) } else { (src, dst) };
        if i != j {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
    }
    a
}

impl AbstractModel for BiGcnLite {
    fn name(&self) -> &'static str {
        "bigcn"
    }

    fn construction_params(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("feature_dim".into(), json!(self.feature_dim));
        m.insert("hidden_dim".into(), json!(self.hidden_dim));
        m
    }

    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn feature_keys(&self) -> &'static [&'static str] {
        &["node_features", "edges", "num_nodes", "root"]
    }

    fn forward(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, _train: bool) -> Result<NodeId> {
        let features = float_feature(batch, "node_features")?;
        let edges = int_feature(batch, "edges")?;
        let num_nodes = int_feature(batch, "num_nodes")?;
        let roots = int_feature(batch, "root")
            .map_err(|_| ModelError::MissingFeature("root".into()))?;
        if features.ndim() != 3 || features.shape()[2] != self.feature_dim {
            return Err(bad(
                "node_features",
                format!("expected [B, N, {}], got {:?}", self.feature_dim, features.shape()),
            ));
        }
        if edges.ndim() != 3 || edges.shape()[2] != 2 {
            return Err(bad("edges", format!("expected [B, E, 2], got {:?}", edges.shape())));
        }
        let batch_size = features.shape()[0];
        let max_nodes = features.shape()[1];

        let mut pooled = Vec::with_capacity(batch_size);
        for g in 0..batch_size {
            let n = usize::try_from(num_nodes[[g]])
                .map_err(|_| bad("num_nodes", format!("negative count in graph {g}")))?;
            if n == 0 || n > max_nodes {
                return Err(bad(
                    "num_nodes",
                    format!("graph {g} claims {n} nodes of {max_nodes} available"),
                ));
            }
            let root = roots[[g]];
            if usize::try_from(root).map_or(true, |r| r >= n) {
                return Err(bad("root", format!("root {root} of graph {g} is outside 0..{n}")));
            }
            let edge_list = graph_edges(edges, g, n)?;
            let td_adj = support_adjacency(&edge_list, n, false);
            let bu_adj = support_adjacency(&edge_list, n, true);

            let x = features
                .index_axis(Axis(0), g)
                .slice(ndarray::s![..n, ..])
                .to_owned()
                .into_dyn();
            let x = tape.constant(x);
            let td = self.stack(tape, x, &td_adj, &self.td)?;
            let bu = self.stack(tape, x, &bu_adj, &self.bu)?;
            let both = tape.concat_last(&[td, bu])?;
            let seq = tape.reshape(both, &[1, n, 2 * self.hidden_dim])?;
            pooled.push(tape.mean_pool_masked(seq, &Array2::ones((1, n)))?);
        }
        let features = tape.concat_axis0(&pooled)?;
        self.head.forward(tape, features)
    }
}

pub fn build_bigcn_lite(params: &Map<String, Value>, seed: u64) -> Result<Box<dyn AbstractModel>> {
    let reader = ParamReader::new("bigcn", params);
    let feature_dim = reader.required_positive("feature_dim")?;
    let hidden_dim = reader.positive("hidden_dim", 32)?;
    reader.finish()?;
    Ok(Box::new(BiGcnLite::new(feature_dim, hidden_dim, seed)?))
}
