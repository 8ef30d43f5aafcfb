#![allow(dead_code)]

use aia::diffcore::{Graph, NdArray, NodeId};
use aia::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod grads;

pub const FD_STEP: f64 = 1e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform entries in `[lo, hi]` whose magnitude is at least `gap`, so that
/// finite differences do not straddle a kink at zero.
pub fn random_array(rng: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64, gap: f64) -> NdArray {
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| loop {
            let v: f64 = rng.gen_range(lo..hi);
            if v.abs() >= gap {
                break v;
            }
        })
        .collect();
    NdArray::new(shape.to_vec(), data).unwrap()
}

/// `|a − n| / max(|a|, |n|, 1e-3)`; the floor keeps near-zero gradients
/// from turning rounding noise into large ratios.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

/// Central-difference gradient of `f` with respect to element `i` of input
/// `k`, evaluated by rebuilding the graph.
pub fn numeric_partial(
    inputs: &[NdArray],
    k: usize,
    i: usize,
    f: &dyn Fn(&mut Graph, &[NodeId]) -> Result<NodeId>,
) -> f64 {
    let eval = |delta: f64| {
        let mut xs = inputs.to_vec();
        xs[k].data_mut()[i] += delta;
        let mut g = Graph::new();
        let ids: Vec<NodeId> = xs.into_iter().map(|x| g.constant(x)).collect();
        let root = f(&mut g, &ids).unwrap();
        g.value(root).item().unwrap()
    };
    (eval(FD_STEP) - eval(-FD_STEP)) / (2.0 * FD_STEP)
}

/// Largest relative error between backward and central differences over
/// every element of every input.
pub fn max_grad_error(inputs: &[NdArray], f: &dyn Fn(&mut Graph, &[NodeId]) -> Result<NodeId>) -> f64 {
    let mut g = Graph::new();
    let ids: Vec<NodeId> = inputs.iter().map(|x| g.variable(x.clone())).collect();
    let root = f(&mut g, &ids).unwrap();
    let grads = g.backward(root).unwrap();
    let mut worst = 0.0_f64;
    for (k, id) in ids.iter().enumerate() {
        let analytic = grads.get(*id).unwrap();
        for i in 0..inputs[k].len() {
            worst = worst.max(rel_err(analytic.data()[i], numeric_partial(inputs, k, i, f)));
        }
    }
    worst
}

/// Reduce any node to a scalar with fixed random weights so every output
/// element gets a distinct adjoint.
pub fn weighted_sum(g: &mut Graph, x: NodeId, seed: u64) -> Result<NodeId> {
    let shape = g.value(x).shape().to_vec();
    let w = random_array(&mut rng(seed), &shape, -1.0, 1.0, 0.0);
    let w = g.constant(w);
    let p = g.mul(x, w)?;
    Ok(g.sum(p))
}

/// Uniform point on the unit sphere in three dimensions, by rejection from
/// the cube.
pub fn unit_sphere_point(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let p: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            break p.map(|v| v / n);
        }
    }
}

/// Worst gap between the closed-form spatial loss of a single-joint frame
/// and the smallest distance from the output to `samples` points drawn
/// uniformly on the sphere of radius η around the target.
pub fn sphere_oracle_gap(frames: usize, samples: usize, seed: u64) -> f64 {
    use aia::attack::spatial_loss;
    use aia::skeldata::SkeletonSequence;
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..frames {
        let o: [f64; 3] = [r.gen(), r.gen(), r.gen()];
        let y: [f64; 3] = [r.gen(), r.gen(), r.gen()];
        let eta: f64 = r.gen_range(0.05..1.0);
        let closed = spatial_loss(
            &SkeletonSequence::new(1, o.to_vec()).unwrap(),
            &SkeletonSequence::new(1, y.to_vec()).unwrap(),
            eta,
        )
        .unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..samples {
            let u = unit_sphere_point(&mut r);
            let d: f64 = (0..3).map(|k| (o[k] - (y[k] + eta * u[k])).powi(2)).sum::<f64>().sqrt();
            best = best.min(d);
        }
        worst = worst.max((closed - best).abs());
    }
    worst
}
