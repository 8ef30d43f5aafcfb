use serde::{Deserialize, Serialize};

use crate::diffcore::{sign, NdArray};
use crate::error::{Error, Result};
use crate::skeldata::{coord_bounds, COORDS};

/// Which coordinates of each frame the attack may change.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationMask {
    /// Depth of every joint; x and y untouched.
    Depth,
    All,
    /// Explicit per-coordinate flags for one flattened frame.
    Custom(Vec<bool>),
}

impl PerturbationMask {
    /// Flags for one frame of width `dim`.
    pub fn resolve(&self, dim: usize) -> Result<Vec<bool>> {
        match self {
            PerturbationMask::Depth => Ok((0..dim).map(|k| k % COORDS == 2).collect()),
            PerturbationMask::All => Ok(vec![true; dim]),
            PerturbationMask::Custom(flags) if flags.len() == dim => Ok(flags.clone()),
            PerturbationMask::Custom(flags) => {
                Err(Error::invalid("mask", format!("mask has {} flags but frames have {dim} coordinates", flags.len())))
            }
        }
    }
}

impl std::str::FromStr for PerturbationMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depth" => Ok(PerturbationMask::Depth),
            "all" => Ok(PerturbationMask::All),
            other => Err(Error::Config(format!("unknown mask '{other}' (expected depth or all)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum UpdateRule {
    /// `X′ ← X′ − α·sign(∇)`
    Pgd,
    /// Adam on `X′` in place of the sign step.
    Adam { learning_rate: f64 },
}

/// Map one candidate coordinate back into the feasible set.
///
/// The ε-interval is enforced on the value as it will be compared later,
/// `|c − x| ≤ ε` evaluated in floating point, so the bound holds exactly.
fn project_coord(x: f64, candidate: f64, eps: f64, bounds: Option<(f64, f64)>) -> f64 {
    let mut c = candidate.clamp(x - eps, x + eps);
    while (c - x).abs() > eps {
        c = if c > x { c.next_down() } else { c.next_up() };
    }
    if let Some((lo, hi)) = bounds {
        let clamped = c.clamp(lo, hi);
        // only when x itself lies outside the domain can clamping leave the ball
        if (clamped - x).abs() <= eps {
            c = clamped;
        }
    }
    c
}

/// `Π_{X,ε}`: clip `candidate` into the ℓ∞ ball of radius `eps` around
/// `original`, restore masked-off coordinates exactly, and optionally clamp
/// to the SBU coordinate ranges.
pub fn project(original: &NdArray, candidate: &NdArray, eps: f64, mask: &[bool], clamp_domain: bool) -> NdArray {
    let dim = mask.len();
    let data = original
        .data()
        .iter()
        .zip(candidate.data())
        .enumerate()
        .map(|(i, (&x, &c))| {
            let k = i % dim;
            if !mask[k] {
                x
            } else {
                project_coord(x, c, eps, clamp_domain.then(|| coord_bounds(k)))
            }
        })
        .collect();
    NdArray::new(original.shape().to_vec(), data).expect("same shape")
}

/// One projected sign-gradient step.
pub fn pgd_step(
    original: &NdArray,
    current: &NdArray,
    grad: &NdArray,
    alpha: f64,
    eps: f64,
    mask: &[bool],
    clamp_domain: bool,
) -> NdArray {
    let candidate = NdArray::new(
        current.shape().to_vec(),
        current.data().iter().zip(grad.data()).map(|(&x, &g)| x - alpha * sign(g)).collect(),
    )
    .expect("same shape");
    project(original, &candidate, eps, mask, clamp_domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arr(v: &[f64]) -> NdArray {
        NdArray::new(vec![1, v.len()], v.to_vec()).unwrap()
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let x = arr(&[0.2, 0.4, 3.0]);
        let cur = arr(&[0.2, 0.4, 3.1]);
        let next = pgd_step(&x, &cur, &arr(&[0.0; 3]), 0.03, 0.45, &[true; 3], true);
        assert_eq!(next, cur);
    }

    #[test]
    fn single_sign_step_moves_masked_coords_by_alpha() {
        let zero = arr(&[0.0; 6]);
        let mask = PerturbationMask::Depth.resolve(6).unwrap();
        let next = pgd_step(&zero, &zero, &arr(&[1.0; 6]), 0.03, 0.1, &mask, false);
        assert_eq!(next.data(), &[0.0, 0.0, -0.03, 0.0, 0.0, -0.03]);
    }

    #[test]
    fn projection_clips_to_epsilon() {
        let x = arr(&[0.0]);
        let p = project(&x, &arr(&[0.5]), 0.1, &[true], false);
        assert_eq!(p.data(), &[0.1]);
        let p = project(&x, &arr(&[-0.5]), 0.1, &[true], false);
        assert_eq!(p.data(), &[-0.1]);
    }

    #[test]
    fn projection_bound_holds_in_floating_point() {
        // 0.1 + 0.45 rounds up, so a naive clamp overshoots the ball
        let x = arr(&[0.1, 0.7, 2.3]);
        let p = project(&x, &arr(&[5.0, -5.0, 9.0]), 0.45, &[true; 3], false);
        for (a, b) in p.data().iter().zip(x.data()) {
            assert!((a - b).abs() <= 0.45);
        }
    }

    #[test]
    fn domain_clamp_keeps_coordinates_physical() {
        let x = arr(&[0.02, 0.98, 0.1]);
        let p = project(&x, &arr(&[-0.3, 1.3, -0.3]), 0.45, &[true; 3], true);
        assert_eq!(p.data(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn custom_mask_width_checked() {
        assert!(PerturbationMask::Custom(vec![true; 4]).resolve(6).is_err());
        assert_eq!(PerturbationMask::All.resolve(3).unwrap(), vec![true; 3]);
    }
}
