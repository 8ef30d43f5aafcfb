use crate::diffcore::{Graph, NdArray, NodeId};
use crate::error::{Error, Result};
use crate::skeldata::SkeletonSequence;

fn check_pair(op: &'static str, a: &SkeletonSequence, b: &SkeletonSequence) -> Result<()> {
    if a.frames() != b.frames() || a.dim() != b.dim() {
        return Err(Error::shape(op, &[&[a.frames(), a.dim()], &[b.frames(), b.dim()]]));
    }
    Ok(())
}

fn frame_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `Σ_t ‖o_t − y′_t‖₂`, the quantity compared against the tolerance κ.
pub fn distance_sum(output: &SkeletonSequence, target: &SkeletonSequence) -> Result<f64> {
    check_pair("distance-sum", output, target)?;
    Ok(output.iter_frames().zip(target.iter_frames()).map(|(o, y)| frame_dist(o, y)).sum())
}

/// Distance from each output frame to the sphere of radius `eta` around
/// the matching target frame, summed over time: `Σ_t |‖o_t − y′_t‖₂ − η|`.
pub fn spatial_loss(output: &SkeletonSequence, target: &SkeletonSequence, eta: f64) -> Result<f64> {
    check_pair("spatial-loss", output, target)?;
    if eta.is_nan() || eta < 0.0 {
        return Err(Error::invalid("spatial-loss", format!("sphere radius must be ≥ 0, got {eta}")));
    }
    Ok(output.iter_frames().zip(target.iter_frames()).map(|(o, y)| (frame_dist(o, y) - eta).abs()).sum())
}

/// `Σ_t (‖x_t − x_{t−1}‖₂ + ‖x_t − x_{t+1}‖₂)` with the out-of-range
/// neighbours at both ends omitted, i.e. twice the summed frame-to-frame
/// distance.
pub fn temporal_loss(x: &SkeletonSequence) -> Result<f64> {
    if x.frames() < 2 {
        return Err(Error::invalid("temporal-loss", format!("needs at least 2 frames, got {}", x.frames())));
    }
    let steps: f64 = (1..x.frames()).map(|t| frame_dist(x.frame(t), x.frame(t - 1))).sum();
    Ok(2.0 * steps)
}

/// Graph form of [`spatial_loss`]; `output` and `target` are `T × D` nodes.
pub fn spatial_loss_node(g: &mut Graph, output: NodeId, target: NodeId, eta: f64) -> Result<NodeId> {
    let diff = g.sub(output, target)?;
    let dist = g.l2_norm(diff, 1)?;
    let gap = g.add_scalar(dist, -eta);
    let gap = g.abs(gap);
    Ok(g.sum(gap))
}

/// Graph form of [`temporal_loss`] on a `T × D` node.
pub fn temporal_loss_node(g: &mut Graph, x: NodeId) -> Result<NodeId> {
    let frames = g.value(x).rows();
    if frames < 2 || g.value(x).ndim() != 2 {
        return Err(Error::invalid("temporal-loss", format!("needs at least 2 frames, got {frames}")));
    }
    let later = g.slice(x, 0, 1, frames)?;
    let earlier = g.slice(x, 0, 0, frames - 1)?;
    let step = g.sub(later, earlier)?;
    let dist = g.l2_norm(step, 1)?;
    let total = g.sum(dist);
    Ok(g.scale(total, 2.0))
}

/// Nodes of one evaluation of `L_spatial + λ·L_temporal`.
#[derive(Debug, Clone, Copy)]
pub struct AdvLossNodes {
    pub input: NodeId,
    pub output: NodeId,
    pub spatial: NodeId,
    pub total: NodeId,
}

/// Record the adversarial objective on `g` with `x_adv` as the
/// differentiable leaf. The temporal term is left out entirely when
/// `lambda == 0`, so single-frame inputs are allowed in that case.
pub fn adv_loss_on(
    g: &mut Graph,
    model: &crate::models::SequenceRegressor,
    params: &crate::models::Bound<'_>,
    x_adv: &NdArray,
    target: &NdArray,
    eta: f64,
    lambda: f64,
) -> Result<AdvLossNodes> {
    let input = g.variable(x_adv.clone());
    let output = model.forward(g, params, input)?;
    let y = g.constant(target.clone());
    let spatial = spatial_loss_node(g, output, y, eta)?;
    let total = if lambda == 0.0 {
        spatial
    } else {
        let temporal = temporal_loss_node(g, input)?;
        let weighted = g.scale(temporal, lambda);
        g.add(spatial, weighted)?
    };
    Ok(AdvLossNodes { input, output, spatial, total })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(frames: Vec<Vec<f64>>) -> SkeletonSequence {
        SkeletonSequence::from_frames(frames).unwrap()
    }

    #[test]
    fn outputs_on_the_sphere_cost_nothing() {
        let y = seq(vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]);
        let o = seq(vec![vec![0.5, 0.0, 0.0], vec![1.0, 1.5, 1.0]]);
        assert_eq!(spatial_loss(&o, &y, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn point_to_sphere_distance() {
        let y = seq(vec![vec![0.0, 0.0, 0.0]]);
        let o = seq(vec![vec![3.0, 4.0, 0.0]]);
        assert_eq!(spatial_loss(&o, &y, 2.0).unwrap(), 3.0);
        assert_eq!(distance_sum(&o, &y).unwrap(), 5.0);
    }

    #[test]
    fn spatial_loss_rejects_mismatched_shapes() {
        let y = seq(vec![vec![0.0, 0.0, 0.0]]);
        let o = seq(vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]);
        assert!(matches!(spatial_loss(&o, &y, 1.0), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn temporal_loss_cases() {
        let c = seq(vec![vec![0.2, 0.3, 1.0]; 4]);
        assert_eq!(temporal_loss(&c).unwrap(), 0.0);
        let two = seq(vec![vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        assert_eq!(temporal_loss(&two).unwrap(), 2.0);
        assert!(temporal_loss(&seq(vec![vec![0.0; 3]])).is_err());
    }

    #[test]
    fn temporal_loss_is_positively_homogeneous() {
        let x = seq(vec![vec![0.1, -0.2, 0.3], vec![-0.1, 0.4, 0.0], vec![0.0, -0.2, -0.3]]);
        let doubled = SkeletonSequence::new(1, x.data().iter().map(|v| 2.0 * v).collect()).unwrap();
        let (a, b) = (temporal_loss(&x).unwrap(), temporal_loss(&doubled).unwrap());
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn node_forms_match_value_forms() {
        let x = seq(vec![vec![0.1, 0.7, 2.0], vec![0.3, 0.2, 2.5], vec![0.9, 0.4, 3.0]]);
        let y = seq(vec![vec![0.5, 0.5, 2.2], vec![0.1, 0.6, 2.9], vec![0.2, 0.2, 2.0]]);
        let mut g = Graph::new();
        let xn = g.constant(x.to_ndarray());
        let yn = g.constant(y.to_ndarray());
        let s = spatial_loss_node(&mut g, xn, yn, 0.3).unwrap();
        let t = temporal_loss_node(&mut g, xn).unwrap();
        assert!((g.value(s).item().unwrap() - spatial_loss(&x, &y, 0.3).unwrap()).abs() < 1e-12);
        assert!((g.value(t).item().unwrap() - temporal_loss(&x).unwrap()).abs() < 1e-12);
    }
}
