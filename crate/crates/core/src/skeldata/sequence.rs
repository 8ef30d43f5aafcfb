use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diffcore::NdArray;
use crate::error::{Error, Result};

/// Joints per skeleton in SBU-format data.
pub const SBU_JOINTS: usize = 15;
/// Coordinates per joint: x, y, depth.
pub const COORDS: usize = 3;
pub const XY_RANGE: (f64, f64) = (0.0, 1.0);
pub const DEPTH_RANGE: (f64, f64) = (0.0, 7.8125);

/// Valid range of flattened coordinate `k` (joint-major, `(x, y, depth)`).
pub fn coord_bounds(k: usize) -> (f64, f64) {
    if k % COORDS == 2 {
        DEPTH_RANGE
    } else {
        XY_RANGE
    }
}

/// `T` frames of `N` joints, stored flattened as `T × 3N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SkeletonSequence {
    joints: usize,
    data: Vec<f64>,
}

impl SkeletonSequence {
    pub fn new(joints: usize, data: Vec<f64>) -> Result<Self> {
        let dim = joints * COORDS;
        if joints == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::Dataset(format!("{} values cannot form frames of {joints} joints", data.len())));
        }
        Ok(Self { joints, data })
    }

    pub fn from_frames(frames: Vec<Vec<f64>>) -> Result<Self> {
        let dim = frames.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || !dim.is_multiple_of(COORDS) {
            return Err(Error::Dataset(format!("frame width {dim} is not a positive multiple of 3")));
        }
        if let Some(t) = frames.iter().position(|f| f.len() != dim) {
            return Err(Error::Dataset(format!("frame {t} has {} values, expected {dim}", frames[t].len())));
        }
        Self::new(dim / COORDS, frames.concat())
    }

    pub fn from_ndarray(a: &NdArray) -> Result<Self> {
        if a.ndim() != 2 {
            return Err(Error::shape("sequence", &[a.shape()]));
        }
        if !a.cols().is_multiple_of(COORDS) {
            return Err(Error::Dataset(format!("frame width {} is not a multiple of 3", a.cols())));
        }
        Self::new(a.cols() / COORDS, a.data().to_vec())
    }

    pub fn to_ndarray(&self) -> NdArray {
        NdArray::new(vec![self.frames(), self.dim()], self.data.clone()).expect("consistent")
    }

    pub fn frames(&self) -> usize {
        self.data.len() / self.dim()
    }

    pub fn joints(&self) -> usize {
        self.joints
    }

    /// Width of a flattened frame, `3N`.
    pub fn dim(&self) -> usize {
        self.joints * COORDS
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let d = self.dim();
        &self.data[t * d..(t + 1) * d]
    }

    pub fn joint(&self, t: usize, j: usize) -> [f64; 3] {
        let f = self.frame(t);
        [f[j * 3], f[j * 3 + 1], f[j * 3 + 2]]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter_frames(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim())
    }

    /// First `t` frames.
    pub fn prefix(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.frames() {
            return Err(Error::invalid("prefix", format!("{t} of {} frames", self.frames())));
        }
        Self::new(self.joints, self.data[..t * self.dim()].to_vec())
    }

    /// Truncate, or repeat the last frame, to exactly `t` frames.
    pub fn fit_length(&self, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("fit_length", "zero frames"));
        }
        if t <= self.frames() {
            return self.prefix(t);
        }
        let mut data = self.data.clone();
        let last = self.frame(self.frames() - 1).to_vec();
        for _ in self.frames()..t {
            data.extend_from_slice(&last);
        }
        Self::new(self.joints, data)
    }

    /// Check every coordinate against the SBU value ranges.
    pub fn validate_ranges(&self) -> Result<()> {
        let d = self.dim();
        for (i, &v) in self.data.iter().enumerate() {
            let k = i % d;
            let (lo, hi) = coord_bounds(k);
            if !(lo..=hi).contains(&v) {
                let field = match k % COORDS {
                    0 => "x",
                    1 => "y",
                    _ => "depth",
                };
                return Err(Error::OutOfRange { field, value: v, frame: i / d, joint: k / COORDS });
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for SkeletonSequence {
    type Error = Error;

    fn try_from(frames: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_frames(frames)
    }
}

impl From<SkeletonSequence> for Vec<Vec<f64>> {
    fn from(s: SkeletonSequence) -> Self {
        s.iter_frames().map(<[f64]>::to_vec).collect()
    }
}

/// The eight two-person interaction classes, in SBU folder order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Approaching,
    Departing,
    Kicking,
    Punching,
    Pushing,
    Hugging,
    Handshaking,
    Exchanging,
}

impl Interaction {
    pub const ALL: [Interaction; 8] = [
        Interaction::Approaching,
        Interaction::Departing,
        Interaction::Kicking,
        Interaction::Punching,
        Interaction::Pushing,
        Interaction::Hugging,
        Interaction::Handshaking,
        Interaction::Exchanging,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Interaction::Approaching => "approaching",
            Interaction::Departing => "departing",
            Interaction::Kicking => "kicking",
            Interaction::Punching => "punching",
            Interaction::Pushing => "pushing",
            Interaction::Hugging => "hugging",
            Interaction::Handshaking => "handshaking",
            Interaction::Exchanging => "exchanging",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// 1-based class folder number used by the SBU release.
    pub fn from_sbu_folder(n: usize) -> Option<Self> {
        Self::ALL.get(n.checked_sub(1)?).copied()
    }
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Interaction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.label() == s || (s == "shakinghands" && *c == Interaction::Handshaking))
            .ok_or_else(|| Error::Dataset(format!("unknown interaction label '{s}'")))
    }
}

/// One recorded two-person interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord", into = "RawRecord")]
pub struct InteractionRecord {
    pub category: Interaction,
    pub set_id: String,
    pub actor: SkeletonSequence,
    pub reactor: SkeletonSequence,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    category: Interaction,
    set_id: String,
    actor: SkeletonSequence,
    reactor: SkeletonSequence,
}

impl InteractionRecord {
    pub fn new(
        category: Interaction,
        set_id: impl Into<String>,
        actor: SkeletonSequence,
        reactor: SkeletonSequence,
    ) -> Result<Self> {
        if actor.frames() != reactor.frames() || actor.joints() != reactor.joints() {
            return Err(Error::Dataset(format!(
                "actor is {}×{} but reactor is {}×{}",
                actor.frames(),
                actor.joints(),
                reactor.frames(),
                reactor.joints()
            )));
        }
        Ok(Self { category, set_id: set_id.into(), actor, reactor })
    }

    pub fn frames(&self) -> usize {
        self.actor.frames()
    }
}

impl TryFrom<RawRecord> for InteractionRecord {
    type Error = Error;

    fn try_from(r: RawRecord) -> Result<Self> {
        Self::new(r.category, r.set_id, r.actor, r.reactor)
    }
}

impl From<InteractionRecord> for RawRecord {
    fn from(r: InteractionRecord) -> Self {
        RawRecord { category: r.category, set_id: r.set_id, actor: r.actor, reactor: r.reactor }
    }
}
