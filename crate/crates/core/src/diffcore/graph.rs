use super::array::{gemm_acc, gemm_nt_acc, gemm_tn_acc, NdArray};
use crate::error::{Error, Result};

/// Handle to a node inside a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unary {
    Relu,
    Tanh,
    Sigmoid,
    Abs,
}

#[derive(Debug, Clone)]
pub enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    AddScalar(NodeId, f64),
    /// `[r×c] + [c]`, the bias row repeated over every row.
    AddRow(NodeId, NodeId),
    MatMul(NodeId, NodeId),
    /// Concatenation along the leading (time) axis.
    Concat(Vec<NodeId>),
    Slice {
        src: NodeId,
        axis: usize,
        start: usize,
        end: usize,
    },
    Unary(Unary, NodeId),
    CausalConv {
        input: NodeId,
        weight: NodeId,
        dilation: usize,
    },
    Sum(NodeId),
    L2Norm {
        src: NodeId,
        axis: usize,
    },
}

#[derive(Debug, Clone)]
struct Node {
    value: NdArray,
    op: Op,
    requires_grad: bool,
}

/// Append-only computation graph. Values are computed eagerly as nodes are
/// created, so creation order is a topological order.
#[derive(Debug, Default, Clone)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Adjoints of the differentiable leaves after a backward pass.
#[derive(Debug, Clone)]
pub struct Gradients {
    adjoints: Vec<Option<NdArray>>,
}

impl Gradients {
    pub fn get(&self, id: NodeId) -> Option<&NdArray> {
        self.adjoints.get(id.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, id: NodeId) -> Option<NdArray> {
        self.adjoints.get_mut(id.0).and_then(Option::take)
    }
}

fn outer_inner(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drop every node created after the first `len`; handles to dropped
    /// nodes must not be used again.
    pub fn truncate(&mut self, len: usize) {
        self.nodes.truncate(len);
    }

    pub fn value(&self, id: NodeId) -> &NdArray {
        &self.nodes[id.0].value
    }

    pub fn op(&self, id: NodeId) -> &Op {
        &self.nodes[id.0].op
    }

    pub fn requires_grad(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    fn shape(&self, id: NodeId) -> &[usize] {
        self.nodes[id.0].value.shape()
    }

    fn push(&mut self, value: NdArray, op: Op, requires_grad: bool) -> NodeId {
        self.nodes.push(Node { value, op, requires_grad });
        NodeId(self.nodes.len() - 1)
    }

    /// Differentiable leaf.
    pub fn variable(&mut self, value: NdArray) -> NodeId {
        self.push(value, Op::Leaf, true)
    }

    /// Leaf excluded from differentiation.
    pub fn constant(&mut self, value: NdArray) -> NodeId {
        self.push(value, Op::Leaf, false)
    }

    fn any_grad(&self, ids: &[NodeId]) -> bool {
        ids.iter().any(|&i| self.nodes[i.0].requires_grad)
    }

    fn same_shape(&self, op: &'static str, a: NodeId, b: NodeId) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(op, &[self.shape(a), self.shape(b)]));
        }
        Ok(())
    }

    fn zip_with(&mut self, op: Op, a: NodeId, b: NodeId, f: impl Fn(f64, f64) -> f64) -> NodeId {
        let va = &self.nodes[a.0].value;
        let vb = &self.nodes[b.0].value;
        let data = va.data().iter().zip(vb.data()).map(|(&x, &y)| f(x, y)).collect();
        let value = NdArray::new(va.shape().to_vec(), data).expect("same shape");
        let rg = self.any_grad(&[a, b]);
        self.push(value, op, rg)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.same_shape("add", a, b)?;
        Ok(self.zip_with(Op::Add(a, b), a, b, |x, y| x + y))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.same_shape("subtract", a, b)?;
        Ok(self.zip_with(Op::Sub(a, b), a, b, |x, y| x - y))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.same_shape("element-multiply", a, b)?;
        Ok(self.zip_with(Op::Mul(a, b), a, b, |x, y| x * y))
    }

    pub fn scale(&mut self, a: NodeId, k: f64) -> NodeId {
        let value = self.nodes[a.0].value.map(|x| k * x);
        let rg = self.any_grad(&[a]);
        self.push(value, Op::Scale(a, k), rg)
    }

    pub fn add_scalar(&mut self, a: NodeId, k: f64) -> NodeId {
        let value = self.nodes[a.0].value.map(|x| x + k);
        let rg = self.any_grad(&[a]);
        self.push(value, Op::AddScalar(a, k), rg)
    }

    pub fn add_row(&mut self, a: NodeId, bias: NodeId) -> Result<NodeId> {
        let (sa, sb) = (self.shape(a), self.shape(bias));
        if sa.len() != 2 || sb.len() != 1 || sa[1] != sb[0] {
            return Err(Error::shape("add-row", &[sa, sb]));
        }
        let cols = sa[1];
        let mut value = self.nodes[a.0].value.clone();
        let b = self.nodes[bias.0].value.data();
        for row in value.data_mut().chunks_mut(cols) {
            for (v, &bv) in row.iter_mut().zip(b) {
                *v += bv;
            }
        }
        let rg = self.any_grad(&[a, bias]);
        Ok(self.push(value, Op::AddRow(a, bias), rg))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::shape("matmul", &[sa, sb]));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let mut out = vec![0.0; m * n];
        gemm_acc(self.nodes[a.0].value.data(), self.nodes[b.0].value.data(), &mut out, m, k, n);
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(NdArray::new(vec![m, n], out)?, Op::MatMul(a, b), rg))
    }

    /// Concatenate along the leading (time) axis.
    pub fn concat(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        let first = parts.first().ok_or_else(|| Error::invalid("concat", "no inputs"))?;
        let head = self.shape(*first).to_vec();
        if head.is_empty() {
            return Err(Error::shape("concat", &[&head]));
        }
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            let s = self.shape(p);
            if s.len() != head.len() || s[1..] != head[1..] {
                return Err(Error::shape("concat", &[&head, s]));
            }
            rows += s[0];
            data.extend_from_slice(self.nodes[p.0].value.data());
        }
        let mut shape = head;
        shape[0] = rows;
        let rg = self.any_grad(parts);
        Ok(self.push(NdArray::new(shape, data)?, Op::Concat(parts.to_vec()), rg))
    }

    /// Half-open range `start..end` along `axis`.
    pub fn slice(&mut self, src: NodeId, axis: usize, start: usize, end: usize) -> Result<NodeId> {
        let s = self.shape(src).to_vec();
        if axis >= s.len() || start > end || end > s[axis] {
            return Err(Error::invalid("slice", format!("range {start}..{end} on axis {axis} of shape {s:?}")));
        }
        let (outer, n, inner) = outer_inner(&s, axis);
        let width = end - start;
        let src_data = self.nodes[src.0].value.data();
        let mut data = Vec::with_capacity(outer * width * inner);
        for o in 0..outer {
            let base = o * n * inner;
            data.extend_from_slice(&src_data[base + start * inner..base + end * inner]);
        }
        let mut shape = s;
        shape[axis] = width;
        let rg = self.any_grad(&[src]);
        Ok(self.push(NdArray::new(shape, data)?, Op::Slice { src, axis, start, end }, rg))
    }

    pub fn unary(&mut self, kind: Unary, a: NodeId) -> NodeId {
        let f: fn(f64) -> f64 = match kind {
            Unary::Relu => |x| if x > 0.0 { x } else { 0.0 },
            Unary::Tanh => f64::tanh,
            Unary::Sigmoid => sigmoid,
            Unary::Abs => f64::abs,
        };
        let value = self.nodes[a.0].value.map(f);
        let rg = self.any_grad(&[a]);
        self.push(value, Op::Unary(kind, a), rg)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        self.unary(Unary::Relu, a)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.unary(Unary::Tanh, a)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.unary(Unary::Sigmoid, a)
    }

    pub fn abs(&mut self, a: NodeId) -> NodeId {
        self.unary(Unary::Abs, a)
    }

    /// Causal dilated 1-D convolution of a `[T×C_in]` sequence with a
    /// `[K×C_in×C_out]` kernel. The input is implicitly left-padded with
    /// `(K-1)·dilation` zero frames, so output frame `t` sees inputs
    /// `t-(K-1)·d, …, t-d, t` only.
    pub fn causal_conv(&mut self, input: NodeId, weight: NodeId, dilation: usize) -> Result<NodeId> {
        let (si, sw) = (self.shape(input), self.shape(weight));
        if si.len() != 2 || sw.len() != 3 || si[1] != sw[1] || dilation == 0 {
            return Err(Error::shape("causal-conv", &[si, sw]));
        }
        let (t_len, c_in) = (si[0], si[1]);
        let (k_width, c_out) = (sw[0], sw[2]);
        let x = self.nodes[input.0].value.data();
        let w = self.nodes[weight.0].value.data();
        let mut out = vec![0.0; t_len * c_out];
        for k in 0..k_width {
            let shift = (k_width - 1 - k) * dilation;
            if shift >= t_len {
                continue;
            }
            let rows = t_len - shift;
            let wk = &w[k * c_in * c_out..(k + 1) * c_in * c_out];
            gemm_acc(&x[..rows * c_in], wk, &mut out[shift * c_out..], rows, c_in, c_out);
        }
        let rg = self.any_grad(&[input, weight]);
        let value = NdArray::new(vec![t_len, c_out], out)?;
        Ok(self.push(value, Op::CausalConv { input, weight, dilation }, rg))
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let total = self.nodes[a.0].value.data().iter().sum();
        let rg = self.any_grad(&[a]);
        self.push(NdArray::scalar(total), Op::Sum(a), rg)
    }

    /// Euclidean norm along `axis`; the axis is removed from the shape.
    pub fn l2_norm(&mut self, src: NodeId, axis: usize) -> Result<NodeId> {
        let s = self.shape(src).to_vec();
        if axis >= s.len() {
            return Err(Error::invalid("l2-norm", format!("axis {axis} of shape {s:?}")));
        }
        let (outer, n, inner) = outer_inner(&s, axis);
        let x = self.nodes[src.0].value.data();
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            for i in 0..inner {
                let mut acc = 0.0;
                for j in 0..n {
                    let v = x[(o * n + j) * inner + i];
                    acc += v * v;
                }
                out[o * inner + i] = acc.sqrt();
            }
        }
        let mut shape = s;
        shape.remove(axis);
        let rg = self.any_grad(&[src]);
        Ok(self.push(NdArray::new(shape, out)?, Op::L2Norm { src, axis }, rg))
    }

    /// Reverse-mode sweep from a single-element root. Only differentiable
    /// leaves carry an adjoint in the result; leaves unreachable from the
    /// root get an all-zero adjoint.
    pub fn backward(&self, root: NodeId) -> Result<Gradients> {
        let root_value = &self.nodes[root.0].value;
        if root_value.len() != 1 {
            return Err(Error::NonScalarRoot(root_value.shape().to_vec()));
        }
        let mut adj: Vec<Option<NdArray>> = vec![None; self.nodes.len()];
        adj[root.0] = Some(NdArray::full(root_value.shape(), 1.0));

        for idx in (0..=root.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                adj[idx] = None;
                continue;
            }
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = adj[idx].take() else { continue };
            self.propagate(&node.op, &node.value, &g, &mut adj);
        }

        for (idx, node) in self.nodes.iter().enumerate() {
            if node.requires_grad && matches!(node.op, Op::Leaf) && adj[idx].is_none() {
                adj[idx] = Some(NdArray::zeros(node.value.shape()));
            }
        }
        Ok(Gradients { adjoints: adj })
    }

    fn accumulate(&self, adj: &mut [Option<NdArray>], id: NodeId, contrib: NdArray) {
        if !self.nodes[id.0].requires_grad {
            return;
        }
        match &mut adj[id.0] {
            Some(existing) => existing.add_assign(&contrib),
            slot => *slot = Some(contrib),
        }
    }

    /// Like `accumulate` but builds the contribution lazily into the slot.
    fn accumulate_with(&self, adj: &mut [Option<NdArray>], id: NodeId, f: impl FnOnce(&mut NdArray)) {
        if !self.nodes[id.0].requires_grad {
            return;
        }
        let slot = adj[id.0].get_or_insert_with(|| NdArray::zeros(self.nodes[id.0].value.shape()));
        f(slot);
    }

    fn propagate(&self, op: &Op, out: &NdArray, g: &NdArray, adj: &mut [Option<NdArray>]) {
        match *op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                self.accumulate(adj, a, g.clone());
                self.accumulate(adj, b, g.clone());
            }
            Op::Sub(a, b) => {
                self.accumulate(adj, a, g.clone());
                self.accumulate_with(adj, b, |s| s.add_scaled(g, -1.0));
            }
            Op::Mul(a, b) => {
                let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                self.accumulate_with(adj, a, |s| {
                    for ((sv, &gv), &bv) in s.data_mut().iter_mut().zip(g.data()).zip(vb.data()) {
                        *sv += gv * bv;
                    }
                });
                self.accumulate_with(adj, b, |s| {
                    for ((sv, &gv), &av) in s.data_mut().iter_mut().zip(g.data()).zip(va.data()) {
                        *sv += gv * av;
                    }
                });
            }
            Op::Scale(a, k) => self.accumulate_with(adj, a, |s| s.add_scaled(g, k)),
            Op::AddScalar(a, _) => self.accumulate(adj, a, g.clone()),
            Op::AddRow(a, bias) => {
                self.accumulate(adj, a, g.clone());
                self.accumulate_with(adj, bias, |s| {
                    let cols = s.len();
                    for row in g.data().chunks(cols) {
                        for (sv, &gv) in s.data_mut().iter_mut().zip(row) {
                            *sv += gv;
                        }
                    }
                });
            }
            Op::MatMul(a, b) => {
                let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                let (m, k, n) = (va.shape()[0], va.shape()[1], vb.shape()[1]);
                // dA = G·Bᵀ, dB = Aᵀ·G
                self.accumulate_with(adj, a, |s| gemm_nt_acc(g.data(), vb.data(), s.data_mut(), m, n, k));
                self.accumulate_with(adj, b, |s| gemm_tn_acc(va.data(), g.data(), s.data_mut(), m, k, n));
            }
            Op::Concat(ref parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.nodes[p.0].value.len();
                    let chunk = &g.data()[offset..offset + len];
                    self.accumulate_with(adj, p, |s| {
                        for (sv, &gv) in s.data_mut().iter_mut().zip(chunk) {
                            *sv += gv;
                        }
                    });
                    offset += len;
                }
            }
            Op::Slice { src, axis, start, end } => {
                let s_shape = self.nodes[src.0].value.shape();
                let (outer, n, inner) = outer_inner(s_shape, axis);
                let width = end - start;
                self.accumulate_with(adj, src, |s| {
                    let sd = s.data_mut();
                    for o in 0..outer {
                        let dst = o * n * inner + start * inner;
                        let src_off = o * width * inner;
                        for (sv, &gv) in
                            sd[dst..dst + width * inner].iter_mut().zip(&g.data()[src_off..src_off + width * inner])
                        {
                            *sv += gv;
                        }
                    }
                });
            }
            Op::Unary(kind, a) => {
                let x = &self.nodes[a.0].value;
                self.accumulate_with(adj, a, |s| {
                    let it = s.data_mut().iter_mut().zip(g.data()).zip(x.data().iter().zip(out.data()));
                    for ((sv, &gv), (&xv, &yv)) in it {
                        let d = match kind {
                            Unary::Relu => {
                                if xv > 0.0 {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                            Unary::Tanh => 1.0 - yv * yv,
                            Unary::Sigmoid => yv * (1.0 - yv),
                            Unary::Abs => sign(xv),
                        };
                        *sv += gv * d;
                    }
                });
            }
            Op::CausalConv { input, weight, dilation } => {
                let (vx, vw) = (&self.nodes[input.0].value, &self.nodes[weight.0].value);
                let (t_len, c_in) = (vx.shape()[0], vx.shape()[1]);
                let (k_width, c_out) = (vw.shape()[0], vw.shape()[2]);
                let gd = g.data();
                self.accumulate_with(adj, input, |s| {
                    for k in 0..k_width {
                        let shift = (k_width - 1 - k) * dilation;
                        if shift >= t_len {
                            continue;
                        }
                        let rows = t_len - shift;
                        let wk = &vw.data()[k * c_in * c_out..(k + 1) * c_in * c_out];
                        gemm_nt_acc(&gd[shift * c_out..], wk, &mut s.data_mut()[..rows * c_in], rows, c_out, c_in);
                    }
                });
                self.accumulate_with(adj, weight, |s| {
                    for k in 0..k_width {
                        let shift = (k_width - 1 - k) * dilation;
                        if shift >= t_len {
                            continue;
                        }
                        let rows = t_len - shift;
                        let dwk = &mut s.data_mut()[k * c_in * c_out..(k + 1) * c_in * c_out];
                        gemm_tn_acc(&vx.data()[..rows * c_in], &gd[shift * c_out..], dwk, rows, c_in, c_out);
                    }
                });
            }
            Op::Sum(a) => {
                let gv = g.data()[0];
                self.accumulate_with(adj, a, |s| {
                    for sv in s.data_mut() {
                        *sv += gv;
                    }
                });
            }
            Op::L2Norm { src, axis } => {
                let x = &self.nodes[src.0].value;
                let (outer, n, inner) = outer_inner(x.shape(), axis);
                self.accumulate_with(adj, src, |s| {
                    let sd = s.data_mut();
                    for o in 0..outer {
                        for i in 0..inner {
                            let norm = out.data()[o * inner + i];
                            // subgradient 0 at the origin
                            if norm == 0.0 {
                                continue;
                            }
                            let gv = g.data()[o * inner + i];
                            for j in 0..n {
                                let at = (o * n + j) * inner + i;
                                sd[at] += gv * x.data()[at] / norm;
                            }
                        }
                    }
                });
            }
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `sign` with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
