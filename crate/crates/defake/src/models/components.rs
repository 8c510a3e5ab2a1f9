//! Reusable neural components: affine heads, the TextCNN feature layer,
//! orthonormal 2-D DCT, graph convolution and co-attention fusion.

use ndarray::{Array2, ArrayView2, Axis};

use crate::tensor::{NodeId, ParamId, ParamInit, ParamStore, Tape, TensorError};

use super::Result;

/// Fully connected layer `x W + b`.
#[derive(Debug, Clone, Copy)]
pub struct Affine {
    pub w: ParamId,
    pub b: ParamId,
}

impl Affine {
    pub fn new(
        store: &mut ParamStore,
        init: &mut ParamInit,
        prefix: &str,
        fan_in: usize,
        fan_out: usize,
    ) -> Result<Self> {
        let w = store.register(&format!("{prefix}.w"), init.affine_weight(fan_in, fan_out))?;
        let b = store.register(&format!("{prefix}.b"), init.zeros(&[fan_out]))?;
        Ok(Self { w, b })
    }

    pub fn forward(&self, tape: &mut Tape<'_>, x: NodeId) -> Result<NodeId> {
        let w = tape.param(self.w);
        let b = tape.param(self.b);
        let h = tape.matmul_last(x, w)?;
        Ok(tape.add_bias(h, b)?)
    }
}

/// TextCNN feature extractor: per filter size a 1-d convolution over time,
/// rectifier, then global max-pool; outputs are concatenated to
/// `[B, channels * |filter_sizes|]`.
pub struct TextCnnLayer {
    filters: Vec<(ParamId, ParamId, usize)>,
    channels: usize,
}

impl TextCnnLayer {
    pub fn new(
        store: &mut ParamStore,
        init: &mut ParamInit,
        prefix: &str,
        embed_dim: usize,
        filter_sizes: &[usize],
        channels: usize,
    ) -> Result<Self> {
        if filter_sizes.is_empty() || channels == 0 {
            return Err(TensorError::InvalidArgument {
                op: "textcnn_layer",
                detail: "filter_sizes and channels must be nonempty/positive".into(),
            }
            .into());
        }
        let mut filters = Vec::with_capacity(filter_sizes.len());
        for &k in filter_sizes {
            if k == 0 {
                return Err(TensorError::InvalidArgument {
                    op: "textcnn_layer",
                    detail: "filter size 0".into(),
                }
                .into());
            }
            let w = store.register(
                &format!("{prefix}.conv{k}.w"),
                init.conv_weight(channels, k, embed_dim),
            )?;
            let b = store.register(&format!("{prefix}.conv{k}.b"), init.zeros(&[channels]))?;
            filters.push((w, b, k));
        }
        Ok(Self { filters, channels })
    }

    pub fn output_dim(&self) -> usize {
        self.channels * self.filters.len()
    }

    /// `embedded: [B, L, D]` -> `[B, output_dim]`; errors when `L` is
    /// shorter than a filter size.
    pub fn forward(&self, tape: &mut Tape<'_>, embedded: NodeId) -> Result<NodeId> {
        let mut pooled = Vec::with_capacity(self.filters.len());
        for &(w, b, k) in &self.filters {
            let wn = tape.param(w);
            let bn = tape.param(b);
            let conv = tape.conv1d(embedded, wn, bn, k)?;
            let act = tape.relu(conv);
            pooled.push(tape.max_over_time(act)?);
        }
        Ok(tape.concat_last(&pooled)?)
    }
}

fn dct_basis(n: usize) -> Array2<f64> {
    let mut t = Array2::<f64>::zeros((n, n));
    for u in 0..n {
        let a = if u == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        for x in 0..n {
            t[(u, x)] = a * (std::f64::consts::PI * (2.0 * x as f64 + 1.0) * u as f64
                / (2.0 * n as f64))
                .cos();
        }
    }
    t
}

/// Orthonormal type-II 2-D discrete cosine transform of a square block.
pub fn dct2d(block: ArrayView2<'_, f64>) -> std::result::Result<Array2<f64>, TensorError> {
    let (rows, cols) = block.dim();
    if rows != cols || rows == 0 {
        return Err(TensorError::ShapeMismatch {
            op: "dct2d",
            detail: format!("expected square nonempty block, got {rows}x{cols}"),
        });
    }
    let t = dct_basis(rows);
    Ok(t.dot(&block).dot(&t.t()))
}

/// Exact inverse of [`dct2d`].
pub fn idct2d(coeffs: ArrayView2<'_, f64>) -> std::result::Result<Array2<f64>, TensorError> {
    let (rows, cols) = coeffs.dim();
    if rows != cols || rows == 0 {
        return Err(TensorError::ShapeMismatch {
            op: "idct2d",
            detail: format!("expected square nonempty block, got {rows}x{cols}"),
        });
    }
    let t = dct_basis(rows);
    Ok(t.t().dot(&coeffs).dot(&t))
}

/// Symmetric normalization with self-loops:
/// `A_hat = D~^{-1/2} (A + I) D~^{-1/2}` where `D~` is the degree matrix of
/// `A + I`. Requires `A` symmetric, non-negative, zero diagonal.
pub fn normalized_adjacency(a: ArrayView2<'_, f64>) -> std::result::Result<Array2<f64>, TensorError> {
    let (n, m) = a.dim();
    if n != m {
        return Err(TensorError::ShapeMismatch {
            op: "normalized_adjacency",
            detail: format!("adjacency is {n}x{m}"),
        });
    }
    for i in 0..n {
        if a[(i, i)] != 0.0 {
            return Err(TensorError::InvalidArgument {
                op: "normalized_adjacency",
                detail: format!("nonzero diagonal at {i}"),
            });
        }
        for j in 0..n {
            if a[(i, j)] < 0.0 {
                return Err(TensorError::InvalidArgument {
                    op: "normalized_adjacency",
                    detail: format!("negative entry at ({i},{j})"),
                });
            }
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 {
                return Err(TensorError::InvalidArgument {
                    op: "normalized_adjacency",
                    detail: format!("asymmetric at ({i},{j})"),
                });
            }
        }
    }
    let mut with_loops = a.to_owned();
    for i in 0..n {
        with_loops[(i, i)] += 1.0;
    }
    let inv_sqrt_deg: Vec<f64> = with_loops
        .axis_iter(Axis(0))
        .map(|row| 1.0 / row.sum().sqrt())
        .collect();
    let mut out = with_loops;
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

/// One graph convolution: `activation(A_hat X W)` on a single graph with
/// node features `x: [N, F]` and weights `w: [F, F']`.
pub fn gcn_layer(
    tape: &mut Tape<'_>,
    x: NodeId,
    adjacency: ArrayView2<'_, f64>,
    w: NodeId,
    activation: Activation,
) -> Result<NodeId> {
    let a_hat = normalized_adjacency(adjacency)?;
    let a_node = tape.constant(a_hat.into_dyn());
    let xw = tape.matmul(x, w)?;
    let h = tape.matmul(a_node, xw)?;
    Ok(match activation {
        Activation::Relu => tape.relu(h),
        Activation::Identity => h,
    })
}

/// One direction of scaled dot-product cross-attention, mean-pooled over
/// the query sequence: `q [B,Lq,D]` attends `kv [B,Lk,D]` -> `[B,D]`.
pub fn cross_attend(
    tape: &mut Tape<'_>,
    q_seq: NodeId,
    kv_seq: NodeId,
    wq: NodeId,
    wk: NodeId,
    wv: NodeId,
) -> Result<NodeId> {
    let d = *tape.value(q_seq).shape().last().unwrap() as f64;
    let q = tape.matmul_last(q_seq, wq)?;
    let k = tape.matmul_last(kv_seq, wk)?;
    let v = tape.matmul_last(kv_seq, wv)?;
    let kt = tape.transpose_last2(k)?;
    let scores = tape.batched_matmul(q, kt)?;
    let scaled = tape.scale(scores, 1.0 / d.sqrt());
    let weights = tape.softmax_last(scaled);
    let attended = tape.batched_matmul(weights, v)?;
    let shape = tape.value(attended).shape().to_vec();
    let ones = Array2::<f64>::ones((shape[0], shape[1]));
    Ok(tape.mean_pool_masked(attended, &ones)?)
}

/// Bidirectional co-attention fusion: text attends image and image attends
/// text, each attended sequence is mean-pooled, results are concatenated to
/// `[B, 2D]`.
pub struct CoAttention {
    pub text_to_image: [ParamId; 3],
    pub image_to_text: [ParamId; 3],
}

impl CoAttention {
    pub fn new(
        store: &mut ParamStore,
        init: &mut ParamInit,
        prefix: &str,
        dim: usize,
    ) -> Result<Self> {
        let make = |name: &str, init: &mut ParamInit, store: &mut ParamStore| {
            store.register(&format!("{prefix}.{name}"), init.affine_weight(dim, dim))
        };
        Ok(Self {
            text_to_image: [
                make("t2i.wq", init, store)?,
                make("t2i.wk", init, store)?,
                make("t2i.wv", init, store)?,
            ],
            image_to_text: [
                make("i2t.wq", init, store)?,
                make("i2t.wk", init, store)?,
                make("i2t.wv", init, store)?,
            ],
        })
    }

    /// `text: [B, Lt, D]`, `image: [B, Li, D]` -> `[B, 2D]`; the feature
    /// dimensions must match.
    pub fn forward(&self, tape: &mut Tape<'_>, text: NodeId, image: NodeId) -> Result<NodeId> {
        let dt = *tape.value(text).shape().last().unwrap();
        let di = *tape.value(image).shape().last().unwrap();
        if dt != di {
            return Err(TensorError::ShapeMismatch {
                op: "coattention_fuse",
                detail: format!("text dim {dt} vs image dim {di}"),
            }
            .into());
        }
        let [wq, wk, wv] = self.text_to_image.map(|p| tape.param(p));
        let t2i = cross_attend(tape, text, image, wq, wk, wv)?;
        let [wq, wk, wv] = self.image_to_text.map(|p| tape.param(p));
        let i2t = cross_attend(tape, image, text, wq, wk, wv)?;
        Ok(tape.concat_last(&[t2i, i2t])?)
    }
}
