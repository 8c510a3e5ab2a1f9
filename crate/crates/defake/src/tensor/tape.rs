use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayD, ArrayViewD, Axis, Ix2, Ix3, IxDyn};
use rand::Rng;

use super::store::{ParamId, ParamStore};
use super::{Result, TensorError};

/// Index of a node on a [`Tape`].
pub type NodeId = usize;

type BackwardFn = Box<dyn Fn(&ArrayD<f64>) -> Vec<ArrayD<f64>>>;

struct Node {
    value: ArrayD<f64>,
    parents: Vec<NodeId>,
    backward: Option<BackwardFn>,
}

/// Records a forward computation over a borrowed [`ParamStore`] and replays
/// it in reverse to obtain parameter gradients.
///
/// Nodes are created in topological order by construction, so the backward
/// sweep is a single reverse walk. Binding the same parameter twice returns
/// the same node, which makes weight sharing accumulate gradients naturally.
pub struct Tape<'a> {
    nodes: Vec<Node>,
    store: &'a ParamStore,
    bound: BTreeMap<ParamId, NodeId>,
}

impl<'a> Tape<'a> {
    pub fn new(store: &'a ParamStore) -> Self {
        Self {
            nodes: Vec::new(),
            store,
            bound: BTreeMap::new(),
        }
    }

    pub fn value(&self, id: NodeId) -> ArrayViewD<'_, f64> {
        self.nodes[id].value.view()
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id].value.len(), 1);
        *self.nodes[id].value.iter().next().unwrap()
    }

    fn push(&mut self, value: ArrayD<f64>, parents: Vec<NodeId>, backward: BackwardFn) -> NodeId {
        self.nodes.push(Node {
            value,
            parents,
            backward: Some(backward),
        });
        self.nodes.len() - 1
    }

    /// Leaf with no gradient flow.
    pub fn constant(&mut self, value: ArrayD<f64>) -> NodeId {
        self.nodes.push(Node {
            value,
            parents: Vec::new(),
            backward: None,
        });
        self.nodes.len() - 1
    }

    /// Bind a stored parameter as a leaf node.
    pub fn param(&mut self, id: ParamId) -> NodeId {
        if let Some(&node) = self.bound.get(&id) {
            return node;
        }
        let node = self.constant(self.store.value(id).clone());
        self.bound.insert(id, node);
        node
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        if va.shape() != vb.shape() {
            return Err(shape("add", format!("{:?} vs {:?}", va.shape(), vb.shape())));
        }
        let out = va + vb;
        Ok(self.push(out, vec![a, b], Box::new(|g| vec![g.clone(), g.clone()])))
    }

    /// `x + b` where `b` broadcasts over all leading axes of `x`.
    pub fn add_bias(&mut self, x: NodeId, b: NodeId) -> Result<NodeId> {
        let (vx, vb) = (&self.nodes[x].value, &self.nodes[b].value);
        let f = *vx.shape().last().unwrap_or(&0);
        if vb.ndim() != 1 || vb.len() != f {
            return Err(shape(
                "add_bias",
                format!("bias {:?} vs features {f}", vb.shape()),
            ));
        }
        let mut out = vx.clone();
        let bias = vb.clone();
        for mut lane in out.lanes_mut(Axis(vx.ndim() - 1)) {
            for (o, bv) in lane.iter_mut().zip(bias.iter()) {
                *o += bv;
            }
        }
        Ok(self.push(
            out,
            vec![x, b],
            Box::new(move |g| {
                let mut db = ArrayD::zeros(IxDyn(&[f]));
                for lane in g.lanes(Axis(g.ndim() - 1)) {
                    for (d, gv) in db.iter_mut().zip(lane.iter()) {
                        *d += gv;
                    }
                }
                vec![g.clone(), db]
            }),
        ))
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> NodeId {
        let out = &self.nodes[x].value * c;
        self.push(out, vec![x], Box::new(move |g| vec![g * c]))
    }

    /// 2-D matrix product `[M,K] x [K,N]`.
    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let va = as2("matmul", &self.nodes[a].value)?;
        let vb = as2("matmul", &self.nodes[b].value)?;
        if va.ncols() != vb.nrows() {
            return Err(shape(
                "matmul",
                format!("{:?} x {:?}", va.shape(), vb.shape()),
            ));
        }
        let out = va.dot(&vb).into_dyn();
        let (ca, cb) = (va.to_owned(), vb.to_owned());
        Ok(self.push(
            out,
            vec![a, b],
            Box::new(move |g| {
                let g2 = g.view().into_dimensionality::<Ix2>().unwrap();
                vec![
                    g2.dot(&cb.t()).into_dyn(),
                    ca.t().dot(&g2).into_dyn(),
                ]
            }),
        ))
    }

    /// Batched matrix product `[B,M,K] x [B,K,N]`.
    pub fn batched_matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let va = as3("batched_matmul", &self.nodes[a].value)?;
        let vb = as3("batched_matmul", &self.nodes[b].value)?;
        let (bs, m, k) = va.dim();
        let (bs2, k2, n) = vb.dim();
        if bs != bs2 || k != k2 {
            return Err(shape(
                "batched_matmul",
                format!("{:?} x {:?}", va.shape(), vb.shape()),
            ));
        }
        let mut out = ndarray::Array3::<f64>::zeros((bs, m, n));
        for i in 0..bs {
            out.index_axis_mut(Axis(0), i)
                .assign(&va.index_axis(Axis(0), i).dot(&vb.index_axis(Axis(0), i)));
        }
        let (ca, cb) = (va.to_owned(), vb.to_owned());
        Ok(self.push(
            out.into_dyn(),
            vec![a, b],
            Box::new(move |g| {
                let g3 = g.view().into_dimensionality::<Ix3>().unwrap();
                let mut da = ndarray::Array3::<f64>::zeros(ca.dim());
                let mut db = ndarray::Array3::<f64>::zeros(cb.dim());
                for i in 0..g3.dim().0 {
                    let gi = g3.index_axis(Axis(0), i);
                    da.index_axis_mut(Axis(0), i)
                        .assign(&gi.dot(&cb.index_axis(Axis(0), i).t()));
                    db.index_axis_mut(Axis(0), i)
                        .assign(&ca.index_axis(Axis(0), i).t().dot(&gi));
                }
                vec![da.into_dyn(), db.into_dyn()]
            }),
        ))
    }

    /// `[.., K] x [K, N]` applied along the last axis.
    pub fn matmul_last(&mut self, x: NodeId, w: NodeId) -> Result<NodeId> {
        let xs = self.nodes[x].value.shape().to_vec();
        let k = *xs.last().ok_or_else(|| shape("matmul_last", "rank 0 input".into()))?;
        let ws = self.nodes[w].value.shape().to_vec();
        if ws.len() != 2 || ws[0] != k {
            return Err(shape("matmul_last", format!("{xs:?} x {ws:?}")));
        }
        let rows: usize = xs[..xs.len() - 1].iter().product();
        let flat = self.reshape(x, &[rows, k])?;
        let prod = self.matmul(flat, w)?;
        let mut out_shape = xs[..xs.len() - 1].to_vec();
        out_shape.push(ws[1]);
        self.reshape(prod, &out_shape)
    }

    pub fn reshape(&mut self, x: NodeId, new_shape: &[usize]) -> Result<NodeId> {
        let v = &self.nodes[x].value;
        if v.len() != new_shape.iter().product::<usize>() {
            return Err(shape(
                "reshape",
                format!("{:?} -> {:?}", v.shape(), new_shape),
            ));
        }
        let old_shape = v.shape().to_vec();
        let out = v
            .clone()
            .into_shape(IxDyn(new_shape))
            .expect("checked length");
        Ok(self.push(
            out,
            vec![x],
            Box::new(move |g| {
                vec![g.clone().into_shape(IxDyn(&old_shape)).expect("same length")]
            }),
        ))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let out = v.mapv(|a| a.max(0.0));
        let mask = v.mapv(|a| if a > 0.0 { 1.0 } else { 0.0 });
        self.push(out, vec![x], Box::new(move |g| vec![g * &mask]))
    }

    /// Softmax over the last axis.
    pub fn softmax_last(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let mut out = v.clone();
        for mut lane in out.lanes_mut(Axis(v.ndim() - 1)) {
            let max = lane.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for a in lane.iter_mut() {
                *a = (*a - max).exp();
                sum += *a;
            }
            for a in lane.iter_mut() {
                *a /= sum;
            }
        }
        let y = out.clone();
        self.push(
            out,
            vec![x],
            Box::new(move |g| {
                let mut dx = g * &y;
                let last = Axis(dx.ndim() - 1);
                for (mut dl, yl) in dx.lanes_mut(last).into_iter().zip(y.lanes(last)) {
                    let dot: f64 = dl.iter().zip(yl.iter()).map(|(d, _)| *d).sum();
                    for (d, yv) in dl.iter_mut().zip(yl.iter()) {
                        *d -= dot * yv;
                    }
                }
                vec![dx]
            }),
        )
    }

    /// Mean cross-entropy of logits `[B,C]` against class indices.
    pub fn cross_entropy_mean(&mut self, logits: NodeId, labels: &[usize]) -> Result<NodeId> {
        let v = as2("cross_entropy", &self.nodes[logits].value)?;
        let (bs, c) = v.dim();
        if labels.len() != bs {
            return Err(shape(
                "cross_entropy",
                format!("{bs} rows vs {} labels", labels.len()),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
            return Err(TensorError::IndexOutOfRange {
                op: "cross_entropy",
                index: bad as i64,
                bound: c,
            });
        }
        let mut probs = Array2::<f64>::zeros((bs, c));
        let mut loss = 0.0;
        for (i, row) in v.outer_iter().enumerate() {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for (j, &a) in row.iter().enumerate() {
                let e = (a - max).exp();
                probs[(i, j)] = e;
                sum += e;
            }
            for j in 0..c {
                probs[(i, j)] /= sum;
            }
            loss += max + sum.ln() - row[labels[i]];
        }
        loss /= bs as f64;
        let labels = labels.to_vec();
        let out = ArrayD::from_elem(IxDyn(&[]), loss);
        Ok(self.push(
            out,
            vec![logits],
            Box::new(move |g| {
                let gv = *g.iter().next().unwrap();
                let mut dx = probs.clone();
                for (i, &l) in labels.iter().enumerate() {
                    dx[(i, l)] -= 1.0;
                }
                dx *= gv / labels.len() as f64;
                vec![dx.into_dyn()]
            }),
        ))
    }

    /// Row lookup: weights `[V,D]`, integer ids of any shape -> `ids.shape + [D]`.
    pub fn embedding(&mut self, weights: NodeId, ids: &ArrayD<i64>) -> Result<NodeId> {
        let w = as2("embedding", &self.nodes[weights].value)?;
        let (vocab, dim) = w.dim();
        let mut out_shape = ids.shape().to_vec();
        out_shape.push(dim);
        let mut out = ArrayD::zeros(IxDyn(&out_shape));
        {
            let mut flat = out
                .view_mut()
                .into_shape((ids.len(), dim))
                .expect("contiguous");
            for (mut row, &id) in flat.outer_iter_mut().zip(ids.iter()) {
                if id < 0 || id as usize >= vocab {
                    return Err(TensorError::IndexOutOfRange {
                        op: "embedding",
                        index: id,
                        bound: vocab,
                    });
                }
                row.assign(&w.row(id as usize));
            }
        }
        let ids: Vec<i64> = ids.iter().cloned().collect();
        Ok(self.push(
            out,
            vec![weights],
            Box::new(move |g| {
                let mut dw = Array2::<f64>::zeros((vocab, dim));
                let flat = g.view().into_shape((ids.len(), dim)).expect("contiguous");
                for (row, &id) in flat.outer_iter().zip(ids.iter()) {
                    let mut target = dw.row_mut(id as usize);
                    target += &row;
                }
                vec![dw.into_dyn()]
            }),
        ))
    }

    /// 1-d convolution over time via im2col.
    ///
    /// `x: [B,L,D]`, kernels flattened as `w: [K, width*D]`, `b: [K]`;
    /// output `[B, L-width+1, K]`.
    pub fn conv1d(&mut self, x: NodeId, w: NodeId, b: NodeId, width: usize) -> Result<NodeId> {
        let vx = as3("conv1d", &self.nodes[x].value)?;
        let vw = as2("conv1d", &self.nodes[w].value)?;
        let (bs, l, d) = vx.dim();
        let (channels, kd) = vw.dim();
        if kd != width * d {
            return Err(shape(
                "conv1d",
                format!("kernel cols {kd} vs width {width} * dim {d}"),
            ));
        }
        if l < width {
            return Err(shape(
                "conv1d",
                format!("sequence length {l} shorter than filter size {width}"),
            ));
        }
        let lp = l - width + 1;
        let mut cols = Array2::<f64>::zeros((bs * lp, kd));
        for bi in 0..bs {
            for t in 0..lp {
                let mut row = cols.row_mut(bi * lp + t);
                for u in 0..width {
                    for f in 0..d {
                        row[u * d + f] = vx[(bi, t + u, f)];
                    }
                }
            }
        }
        let mut out_flat = cols.dot(&vw.t());
        let vb = &self.nodes[b].value;
        if vb.len() != channels {
            return Err(shape("conv1d", format!("bias {:?}", vb.shape())));
        }
        let bias = Array1::from_iter(vb.iter().cloned());
        out_flat += &bias;
        let out = out_flat
            .into_shape((bs, lp, channels))
            .expect("contiguous")
            .into_dyn();
        let cw = vw.to_owned();
        Ok(self.push(
            out,
            vec![x, w, b],
            Box::new(move |g| {
                let gf = g
                    .view()
                    .into_shape((bs * lp, channels))
                    .expect("contiguous");
                let dw = gf.t().dot(&cols);
                let db = gf.sum_axis(Axis(0));
                let dcols = gf.dot(&cw);
                let mut dx = ndarray::Array3::<f64>::zeros((bs, l, d));
                for bi in 0..bs {
                    for t in 0..lp {
                        let row = dcols.row(bi * lp + t);
                        for u in 0..width {
                            for f in 0..d {
                                dx[(bi, t + u, f)] += row[u * d + f];
                            }
                        }
                    }
                }
                vec![dx.into_dyn(), dw.into_dyn(), db.into_dyn()]
            }),
        ))
    }

    /// Global max over the time axis of `[B,L,K]`; ties resolve to the
    /// earliest position.
    pub fn max_over_time(&mut self, x: NodeId) -> Result<NodeId> {
        let v = as3("max_over_time", &self.nodes[x].value)?;
        let (bs, l, k) = v.dim();
        let mut out = Array2::<f64>::zeros((bs, k));
        let mut arg = vec![0usize; bs * k];
        for bi in 0..bs {
            for c in 0..k {
                let mut best = v[(bi, 0, c)];
                let mut best_t = 0;
                for t in 1..l {
                    if v[(bi, t, c)] > best {
                        best = v[(bi, t, c)];
                        best_t = t;
                    }
                }
                out[(bi, c)] = best;
                arg[bi * k + c] = best_t;
            }
        }
        Ok(self.push(
            out.into_dyn(),
            vec![x],
            Box::new(move |g| {
                let g2 = g.view().into_dimensionality::<Ix2>().unwrap();
                let mut dx = ndarray::Array3::<f64>::zeros((bs, l, k));
                for bi in 0..bs {
                    for c in 0..k {
                        dx[(bi, arg[bi * k + c], c)] = g2[(bi, c)];
                    }
                }
                vec![dx.into_dyn()]
            }),
        ))
    }

    /// Mask-weighted mean over the time axis: `x [B,L,D]`, `mask [B,L]` ->
    /// `[B,D]`. An all-zero mask row pools to zero.
    pub fn mean_pool_masked(&mut self, x: NodeId, mask: &Array2<f64>) -> Result<NodeId> {
        let v = as3("mean_pool_masked", &self.nodes[x].value)?;
        let (bs, l, d) = v.dim();
        if mask.dim() != (bs, l) {
            return Err(shape(
                "mean_pool_masked",
                format!("mask {:?} vs x {:?}", mask.dim(), v.dim()),
            ));
        }
        let denom: Vec<f64> = mask
            .outer_iter()
            .map(|r| r.sum().max(1.0))
            .collect();
        let mut out = Array2::<f64>::zeros((bs, d));
        for bi in 0..bs {
            for t in 0..l {
                let m = mask[(bi, t)];
                if m != 0.0 {
                    for f in 0..d {
                        out[(bi, f)] += m * v[(bi, t, f)];
                    }
                }
            }
            for f in 0..d {
                out[(bi, f)] /= denom[bi];
            }
        }
        let mask = mask.clone();
        Ok(self.push(
            out.into_dyn(),
            vec![x],
            Box::new(move |g| {
                let g2 = g.view().into_dimensionality::<Ix2>().unwrap();
                let mut dx = ndarray::Array3::<f64>::zeros((bs, l, d));
                for bi in 0..bs {
                    for t in 0..l {
                        let w = mask[(bi, t)] / denom[bi];
                        if w != 0.0 {
                            for f in 0..d {
                                dx[(bi, t, f)] = w * g2[(bi, f)];
                            }
                        }
                    }
                }
                vec![dx.into_dyn()]
            }),
        ))
    }

    /// Concatenate along the last axis.
    pub fn concat_last(&mut self, xs: &[NodeId]) -> Result<NodeId> {
        if xs.is_empty() {
            return Err(shape("concat_last", "no inputs".into()));
        }
        let lead = self.nodes[xs[0]].value.shape()[..self.nodes[xs[0]].value.ndim() - 1].to_vec();
        let mut widths = Vec::with_capacity(xs.len());
        for &x in xs {
            let s = self.nodes[x].value.shape();
            if s[..s.len() - 1] != lead[..] {
                return Err(shape(
                    "concat_last",
                    format!("{:?} vs leading {:?}", s, lead),
                ));
            }
            widths.push(*s.last().unwrap());
        }
        let views: Vec<_> = xs.iter().map(|&x| self.nodes[x].value.view()).collect();
        let last = Axis(views[0].ndim() - 1);
        let out = ndarray::concatenate(last, &views).expect("validated shapes");
        Ok(self.push(
            out,
            xs.to_vec(),
            Box::new(move |g| {
                let last = Axis(g.ndim() - 1);
                let mut grads = Vec::with_capacity(widths.len());
                let mut offset = 0;
                for &w in &widths {
                    grads.push(
                        g.slice_axis(last, ndarray::Slice::from(offset..offset + w as isize))
                            .to_owned(),
                    );
                    offset += w as isize;
                }
                grads
            }),
        ))
    }

    /// Inverted dropout; active only when the caller is in training mode.
    pub fn dropout<R: Rng>(&mut self, x: NodeId, p: f64, rng: &mut R) -> Result<NodeId> {
        if !(0.0..1.0).contains(&p) {
            return Err(TensorError::InvalidArgument {
                op: "dropout",
                detail: format!("rate {p} not in [0,1)"),
            });
        }
        if p == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 - p;
        let v = &self.nodes[x].value;
        let mask = v.mapv(|_| {
            if rng.gen::<f64>() < keep {
                1.0 / keep
            } else {
                0.0
            }
        });
        let out = v * &mask;
        Ok(self.push(out, vec![x], Box::new(move |g| vec![g * &mask])))
    }

    /// Identity forward; backward multiplies the upstream gradient by
    /// `-lambda`.
    pub fn grad_reverse(&mut self, x: NodeId, lambda: f64) -> Result<NodeId> {
        if lambda < 0.0 {
            return Err(TensorError::InvalidArgument {
                op: "grad_reverse",
                detail: format!("negative lambda {lambda}"),
            });
        }
        let out = self.nodes[x].value.clone();
        Ok(self.push(out, vec![x], Box::new(move |g| vec![g * (-lambda)])))
    }

    /// Gate-weighted sum of expert features: gate `[B,E]`, each expert
    /// `[B,F]` -> `[B,F]`.
    pub fn weighted_expert_sum(&mut self, gate: NodeId, experts: &[NodeId]) -> Result<NodeId> {
        let vg = as2("weighted_expert_sum", &self.nodes[gate].value)?;
        let (bs, e) = vg.dim();
        if e != experts.len() {
            return Err(shape(
                "weighted_expert_sum",
                format!("gate width {e} vs {} experts", experts.len()),
            ));
        }
        let mut feats = Vec::with_capacity(e);
        for &x in experts {
            let v = as2("weighted_expert_sum", &self.nodes[x].value)?;
            if v.nrows() != bs {
                return Err(shape(
                    "weighted_expert_sum",
                    format!("expert rows {} vs batch {bs}", v.nrows()),
                ));
            }
            feats.push(v.to_owned());
        }
        let f = feats[0].ncols();
        let mut out = Array2::<f64>::zeros((bs, f));
        for (ei, feat) in feats.iter().enumerate() {
            for bi in 0..bs {
                let w = vg[(bi, ei)];
                for fi in 0..f {
                    out[(bi, fi)] += w * feat[(bi, fi)];
                }
            }
        }
        let gate_vals = vg.to_owned();
        let mut parents = vec![gate];
        parents.extend_from_slice(experts);
        Ok(self.push(
            out.into_dyn(),
            parents,
            Box::new(move |g| {
                let g2 = g.view().into_dimensionality::<Ix2>().unwrap();
                let mut dgate = Array2::<f64>::zeros((bs, feats.len()));
                let mut grads = Vec::with_capacity(feats.len() + 1);
                for (ei, feat) in feats.iter().enumerate() {
                    let mut dfeat = Array2::<f64>::zeros((bs, f));
                    for bi in 0..bs {
                        let mut acc = 0.0;
                        for fi in 0..f {
                            acc += g2[(bi, fi)] * feat[(bi, fi)];
                            dfeat[(bi, fi)] = gate_vals[(bi, ei)] * g2[(bi, fi)];
                        }
                        dgate[(bi, ei)] = acc;
                    }
                    grads.push(dfeat.into_dyn());
                }
                let mut all = vec![dgate.into_dyn()];
                all.extend(grads);
                all
            }),
        ))
    }

    /// Concatenate along the leading axis.
    pub fn concat_axis0(&mut self, xs: &[NodeId]) -> Result<NodeId> {
        if xs.is_empty() {
            return Err(shape("concat_axis0", "no inputs".into()));
        }
        let trailing = self.nodes[xs[0]].value.shape()[1..].to_vec();
        let mut leads = Vec::with_capacity(xs.len());
        for &x in xs {
            let s = self.nodes[x].value.shape();
            if s.is_empty() || s[1..] != trailing[..] {
                return Err(shape(
                    "concat_axis0",
                    format!("{:?} vs trailing {:?}", s, trailing),
                ));
            }
            leads.push(s[0]);
        }
        let views: Vec<_> = xs.iter().map(|&x| self.nodes[x].value.view()).collect();
        let out = ndarray::concatenate(Axis(0), &views).expect("validated shapes");
        Ok(self.push(
            out,
            xs.to_vec(),
            Box::new(move |g| {
                let mut grads = Vec::with_capacity(leads.len());
                let mut offset = 0isize;
                for &n in &leads {
                    grads.push(
                        g.slice_axis(Axis(0), ndarray::Slice::from(offset..offset + n as isize))
                            .to_owned(),
                    );
                    offset += n as isize;
                }
                grads
            }),
        ))
    }

    /// Transpose the last two axes of a rank-3 array.
    pub fn transpose_last2(&mut self, x: NodeId) -> Result<NodeId> {
        let v = as3("transpose_last2", &self.nodes[x].value)?;
        let out = v.to_owned().permuted_axes([0, 2, 1]).as_standard_layout().to_owned();
        Ok(self.push(
            out.into_dyn(),
            vec![x],
            Box::new(move |g| {
                let g3 = g.view().into_dimensionality::<Ix3>().unwrap();
                vec![g3
                    .to_owned()
                    .permuted_axes([0, 2, 1])
                    .as_standard_layout()
                    .to_owned()
                    .into_dyn()]
            }),
        ))
    }

    /// Gradients with respect to every bound parameter, seeded from a
    /// scalar `root`.
    pub fn backward(&self, root: NodeId) -> BTreeMap<ParamId, ArrayD<f64>> {
        let mut grads: Vec<Option<ArrayD<f64>>> = vec![None; self.nodes.len()];
        grads[root] = Some(ArrayD::ones(IxDyn(self.nodes[root].value.shape())));
        for idx in (0..=root).rev() {
            let Some(grad) = grads[idx].take() else {
                continue;
            };
            if let Some(backward) = &self.nodes[idx].backward {
                let parent_grads = backward(&grad);
                debug_assert_eq!(parent_grads.len(), self.nodes[idx].parents.len());
                for (&p, pg) in self.nodes[idx].parents.iter().zip(parent_grads) {
                    match &mut grads[p] {
                        Some(acc) => *acc += &pg,
                        slot => *slot = Some(pg),
                    }
                }
            }
            grads[idx] = Some(grad);
        }
        self.bound
            .iter()
            .map(|(&pid, &node)| {
                let g = grads[node].clone().unwrap_or_else(|| {
                    ArrayD::zeros(IxDyn(self.nodes[node].value.shape()))
                });
                (pid, g)
            })
            .collect()
    }
}

fn shape(op: &'static str, detail: String) -> TensorError {
    TensorError::ShapeMismatch { op, detail }
}

fn as2<'v>(op: &'static str, v: &'v ArrayD<f64>) -> Result<ndarray::ArrayView2<'v, f64>> {
    v.view()
        .into_dimensionality::<Ix2>()
        .map_err(|_| shape(op, format!("expected rank 2, got {:?}", v.shape())))
}

fn as3<'v>(op: &'static str, v: &'v ArrayD<f64>) -> Result<ndarray::ArrayView3<'v, f64>> {
    v.view()
        .into_dimensionality::<Ix3>()
        .map_err(|_| shape(op, format!("expected rank 3, got {:?}", v.shape())))
}
