//! Compare reverse-mode gradients against central differences on a small
//! graph built from several op kinds.
//!
//! cargo run --example gradient_check

use aia::diffcore::{Graph, NdArray, NodeId};

fn build(g: &mut Graph, x: NodeId, w: NodeId) -> NodeId {
    let h = g.causal_conv(x, w, 2).unwrap();
    let h = g.tanh(h);
    let n = g.l2_norm(h, 1).unwrap();
    let n = g.add_scalar(n, -0.5);
    let n = g.abs(n);
    g.sum(n)
}

fn value(x: &NdArray, w: &NdArray) -> f64 {
    let mut g = Graph::new();
    let (xc, wc) = (g.constant(x.clone()), g.constant(w.clone()));
    let root = build(&mut g, xc, wc);
    g.value(root).item().unwrap()
}

fn main() {
    let x = NdArray::new(vec![6, 2], (0..12).map(|i| (i as f64 * 0.7).sin()).collect()).unwrap();
    let w = NdArray::new(vec![3, 2, 3], (0..18).map(|i| (i as f64 * 1.3).cos() * 0.5).collect()).unwrap();

    let mut g = Graph::new();
    let (xv, wv) = (g.variable(x.clone()), g.variable(w.clone()));
    let root = build(&mut g, xv, wv);
    let grads = g.backward(root).unwrap();

    let h = 1e-5;
    let mut worst = 0.0_f64;
    for (which, analytic) in [(0, grads.get(xv).unwrap()), (1, grads.get(wv).unwrap())] {
        for i in 0..analytic.len() {
            let (mut xp, mut wp, mut xm, mut wm) = (x.clone(), w.clone(), x.clone(), w.clone());
            if which == 0 {
                xp.data_mut()[i] += h;
                xm.data_mut()[i] -= h;
            } else {
                wp.data_mut()[i] += h;
                wm.data_mut()[i] -= h;
            }
            let numeric = (value(&xp, &wp) - value(&xm, &wm)) / (2.0 * h);
            let a = analytic.data()[i];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-3));
        }
    }
    println!("loss {:.6}", g.value(root).item().unwrap());
    println!("max relative gradient error {worst:.2e}");
}
