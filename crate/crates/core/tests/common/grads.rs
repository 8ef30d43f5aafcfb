//! Gradient checks shared by the `gradcheck` tests and the acceptance run.

use aia::attack::{adv_loss_on, spatial_loss, temporal_loss};
use aia::diffcore::{Graph, NdArray, NodeId};
use aia::models::{ArchKind, Architecture, SequenceRegressor};
use aia::skeldata::SkeletonSequence;
use aia::Result;

use super::*;

fn check(
    out: &mut Vec<(String, f64)>,
    name: &str,
    inputs: Vec<NdArray>,
    f: &dyn Fn(&mut Graph, &[NodeId]) -> Result<NodeId>,
) {
    out.push((name.to_string(), max_grad_error(&inputs, f)));
}

/// Worst relative error for every op kind.
pub fn op_errors() -> Vec<(String, f64)> {
    let mut out = Vec::new();
    elementwise_binary_ops(&mut out);
    scalar_ops(&mut out);
    add_row_and_matmul(&mut out);
    concat_and_slice(&mut out);
    unary_ops(&mut out);
    causal_convolution(&mut out);
    reductions(&mut out);
    composite_graph(&mut out);
    out
}

fn elementwise_binary_ops(out: &mut Vec<(String, f64)>) {
    let mut r = rng(1);
    let a = random_array(&mut r, &[3, 4], -2.0, 2.0, 0.0);
    let b = random_array(&mut r, &[3, 4], -2.0, 2.0, 0.0);
    check(out, "add", vec![a.clone(), b.clone()], &|g, x| {
        let y = g.add(x[0], x[1])?;
        weighted_sum(g, y, 10)
    });
    check(out, "sub", vec![a.clone(), b.clone()], &|g, x| {
        let y = g.sub(x[0], x[1])?;
        weighted_sum(g, y, 11)
    });
    check(out, "mul", vec![a, b], &|g, x| {
        let y = g.mul(x[0], x[1])?;
        weighted_sum(g, y, 12)
    });
}

fn scalar_ops(out: &mut Vec<(String, f64)>) {
    let a = random_array(&mut rng(2), &[5], -1.0, 1.0, 0.0);
    check(out, "scale", vec![a.clone()], &|g, x| {
        let y = g.scale(x[0], -2.5);
        weighted_sum(g, y, 20)
    });
    check(out, "add-scalar", vec![a], &|g, x| {
        let y = g.add_scalar(x[0], 0.7);
        let y = g.mul(y, y)?;
        weighted_sum(g, y, 21)
    });
}

fn add_row_and_matmul(out: &mut Vec<(String, f64)>) {
    let mut r = rng(3);
    let a = random_array(&mut r, &[4, 3], -1.0, 1.0, 0.0);
    let b = random_array(&mut r, &[3, 5], -1.0, 1.0, 0.0);
    let bias = random_array(&mut r, &[5], -1.0, 1.0, 0.0);
    check(out, "matmul", vec![a.clone(), b.clone()], &|g, x| {
        let y = g.matmul(x[0], x[1])?;
        weighted_sum(g, y, 30)
    });
    check(out, "add-row", vec![a, b, bias], &|g, x| {
        let y = g.matmul(x[0], x[1])?;
        let y = g.add_row(y, x[2])?;
        weighted_sum(g, y, 31)
    });
}

fn concat_and_slice(out: &mut Vec<(String, f64)>) {
    let mut r = rng(4);
    let a = random_array(&mut r, &[2, 3], -1.0, 1.0, 0.0);
    let b = random_array(&mut r, &[4, 3], -1.0, 1.0, 0.0);
    check(out, "concat", vec![a.clone(), b.clone()], &|g, x| {
        let y = g.concat(&[x[0], x[1], x[0]])?;
        weighted_sum(g, y, 40)
    });
    check(out, "slice-rows", vec![b.clone()], &|g, x| {
        let y = g.slice(x[0], 0, 1, 3)?;
        weighted_sum(g, y, 41)
    });
    check(out, "slice-cols", vec![b], &|g, x| {
        let y = g.slice(x[0], 1, 1, 3)?;
        weighted_sum(g, y, 42)
    });
}

fn unary_ops(out: &mut Vec<(String, f64)>) {
    // kept away from the kinks of relu and abs
    let a = random_array(&mut rng(5), &[3, 4], -3.0, 3.0, 1e-2);
    for (name, seed) in [("relu", 50), ("tanh", 51), ("sigmoid", 52), ("abs", 53)] {
        check(out, name, vec![a.clone()], &|g, x| {
            let y = match name {
                "relu" => g.relu(x[0]),
                "tanh" => g.tanh(x[0]),
                "sigmoid" => g.sigmoid(x[0]),
                _ => g.abs(x[0]),
            };
            weighted_sum(g, y, seed)
        });
    }
}

fn causal_convolution(out: &mut Vec<(String, f64)>) {
    let mut r = rng(6);
    for dilation in [1, 2, 3] {
        let input = random_array(&mut r, &[7, 3], -1.0, 1.0, 0.0);
        let weight = random_array(&mut r, &[3, 3, 2], -1.0, 1.0, 0.0);
        check(out, &format!("causal-conv d={dilation}"), vec![input, weight], &|g, x| {
            let y = g.causal_conv(x[0], x[1], dilation)?;
            weighted_sum(g, y, 60)
        });
    }
}

fn reductions(out: &mut Vec<(String, f64)>) {
    let mut r = rng(7);
    let a = random_array(&mut r, &[4, 3], -1.0, 1.0, 0.1);
    check(out, "sum", vec![a.clone()], &|g, x| {
        let y = g.mul(x[0], x[0])?;
        Ok(g.sum(y))
    });
    for axis in [0, 1] {
        check(out, &format!("l2-norm axis {axis}"), vec![a.clone()], &|g, x| {
            let y = g.l2_norm(x[0], axis)?;
            weighted_sum(g, y, 70)
        });
    }
}

fn composite_graph(out: &mut Vec<(String, f64)>) {
    let mut r = rng(8);
    let x = random_array(&mut r, &[5, 4], -1.0, 1.0, 0.0);
    let w = random_array(&mut r, &[4, 4], -1.0, 1.0, 0.0);
    check(out, "composite", vec![x, w], &|g, v| {
        let h = g.matmul(v[0], v[1])?;
        let h = g.tanh(h);
        let s = g.sigmoid(h);
        let p = g.mul(h, s)?;
        let n = g.l2_norm(p, 1)?;
        let n = g.add_scalar(n, -0.3);
        let n = g.abs(n);
        Ok(g.sum(n))
    });
}

fn seq(a: &NdArray) -> SkeletonSequence {
    SkeletonSequence::from_ndarray(a).unwrap()
}

/// The objective's gradient with respect to the input, checked against
/// central differences of the value-form losses evaluated through
/// `predict`.
pub fn adv_loss_gradient_error(kind: ArchKind, lambda: f64) -> f64 {
    let model = SequenceRegressor::new(Architecture::tiny(kind, 6), 5).unwrap();
    let mut r = rng(9);
    let x = random_array(&mut r, &[6, 6], 0.1, 0.9, 0.0);
    let target = random_array(&mut r, &[6, 6], 0.1, 0.9, 0.0);
    let eta = 0.05;

    let mut g = Graph::new();
    let bound = model.params().bind(&mut g, false);
    let nodes = adv_loss_on(&mut g, &model, &bound, &x, &target, eta, lambda).unwrap();
    let grads = g.backward(nodes.total).unwrap();
    let analytic = grads.get(nodes.input).unwrap();

    let value = |x: &NdArray| {
        let out = model.predict(&seq(x)).unwrap();
        let mut v = spatial_loss(&out, &seq(&target), eta).unwrap();
        if lambda != 0.0 {
            v += lambda * temporal_loss(&seq(x)).unwrap();
        }
        v
    };
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let mut hi = x.clone();
        hi.data_mut()[i] += FD_STEP;
        let mut lo = x.clone();
        lo.data_mut()[i] -= FD_STEP;
        let numeric = (value(&hi) - value(&lo)) / (2.0 * FD_STEP);
        worst = worst.max(rel_err(analytic.data()[i], numeric));
    }
    worst
}

/// Worst relative error over sampled parameter entries of a tiny model under
/// the training loss.
pub fn parameter_gradient_error(kind: ArchKind) -> f64 {
    let mut worst = 0.0_f64;
    let model = SequenceRegressor::new(Architecture::tiny(kind, 3), 1).unwrap();
    let mut r = rng(10);
    let x = random_array(&mut r, &[4, 3], 0.0, 1.0, 0.0);
    let y = random_array(&mut r, &[4, 3], 0.0, 1.0, 0.0);
    let names: Vec<String> = model.params().names().to_vec();
    let loss = |m: &SequenceRegressor| {
        let out = m.predict_array(&x).unwrap();
        out.data().iter().zip(y.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    };
    let mut g = Graph::new();
    let bound = model.params().bind(&mut g, true);
    let xin = g.constant(x.clone());
    let out = model.forward(&mut g, &bound, xin).unwrap();
    let yc = g.constant(y.clone());
    let d = g.sub(out, yc).unwrap();
    let sq = g.mul(d, d).unwrap();
    let root = g.sum(sq);
    let grads = g.backward(root).unwrap();
    for (name, id) in names.iter().zip(bound.ids()) {
        let analytic = grads.get(*id).unwrap();
        // a few entries per tensor keep the check fast
        for i in (0..analytic.len()).step_by((analytic.len() / 5).max(1)) {
            let mut hi = model.clone();
            hi.params_mut().get_mut(name).unwrap().data_mut()[i] += FD_STEP;
            let mut lo = model.clone();
            lo.params_mut().get_mut(name).unwrap().data_mut()[i] -= FD_STEP;
            let numeric = (loss(&hi) - loss(&lo)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(analytic.data()[i], numeric));
        }
    }
    worst
}
