//! Parametric two-person interactions in SBU coordinates.
//!
//! Each class combines a class-specific stance (separation and base depth)
//! with linear and sinusoidal joint trajectories. Per-record amplitude,
//! tempo and placement are drawn from a seeded ChaCha stream, so output is
//! a pure function of the arguments.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sequence::{coord_bounds, Interaction, InteractionRecord, SkeletonSequence, COORDS};
use super::split::SYNTH_SET_ORDER;
use crate::error::{Error, Result};

const TEMPLATE_JOINTS: usize = 15;
const TORSO: usize = 2;
const HEAD: usize = 0;
const NECK: usize = 1;
const L_HAND: usize = 5;
const R_ELBOW: usize = 7;
const R_HAND: usize = 8;
const L_ELBOW: usize = 4;
const L_FOOT: usize = 11;
const R_KNEE: usize = 13;
const R_FOOT: usize = 14;

/// Rest pose relative to the torso: (toward partner, down, lateral).
const TEMPLATE: [[f64; 3]; TEMPLATE_JOINTS] = [
    [0.00, -0.20, 0.00],
    [0.00, -0.13, 0.00],
    [0.00, 0.00, 0.00],
    [0.00, -0.12, 0.08],
    [0.02, -0.05, 0.10],
    [0.03, 0.02, 0.10],
    [0.00, -0.12, -0.08],
    [0.02, -0.05, -0.10],
    [0.03, 0.02, -0.10],
    [0.00, 0.07, 0.05],
    [0.01, 0.16, 0.05],
    [0.00, 0.25, 0.05],
    [0.00, 0.07, -0.05],
    [0.01, 0.16, -0.05],
    [0.00, 0.25, -0.05],
];

const NOISE: f64 = 0.003;

/// Index of the joint that carries a person's root motion.
pub fn root_joint(joints: usize) -> usize {
    if joints > TORSO {
        TORSO
    } else {
        0
    }
}

struct Person {
    facing: f64,
    root: [f64; 3],
    /// Per-template-joint displacement in (forward, down, lateral).
    offsets: [[f64; 3]; TEMPLATE_JOINTS],
}

impl Person {
    fn new(facing: f64, root: [f64; 3]) -> Self {
        Self { facing, root, offsets: [[0.0; 3]; TEMPLATE_JOINTS] }
    }

    fn forward(&mut self, d: f64) {
        self.root[0] += self.facing * d;
    }

    fn limb(&mut self, joint: usize, fwd: f64, down: f64, lateral: f64) {
        self.offsets[joint][0] += fwd;
        self.offsets[joint][1] += down;
        self.offsets[joint][2] += lateral;
    }

    fn write(&self, joints: usize, frame: &mut [f64]) {
        for j in 0..joints {
            let tj = j % TEMPLATE_JOINTS;
            let layer = (j / TEMPLATE_JOINTS) as f64 * 0.005;
            let [tx, ty, tz] = TEMPLATE[tj];
            let [ox, oy, oz] = self.offsets[tj];
            frame[j * COORDS] = self.root[0] + self.facing * (tx + ox);
            frame[j * COORDS + 1] = self.root[1] + ty + oy + layer;
            frame[j * COORDS + 2] = self.root[2] + tz + oz;
        }
    }
}

struct RecordParams {
    amp: f64,
    tempo: f64,
    actor_x: f64,
    reactor_x: f64,
    depth: f64,
    sway_phase: f64,
}

fn pulse(s: f64, center: f64, width: f64) -> f64 {
    (-((s - center) / width).powi(2)).exp()
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

fn stance(category: Interaction) -> (f64, f64) {
    match category {
        Interaction::Approaching => (0.22, 0.72),
        Interaction::Departing => (0.40, 0.68),
        Interaction::Hugging => (0.34, 0.66),
        Interaction::Handshaking => (0.33, 0.67),
        _ => (0.32, 0.68),
    }
}

fn pose(category: Interaction, p: &RecordParams, s_lin: f64) -> (Person, Person) {
    // tempo warps time monotonically, keeping s in [0, 1]
    let s = s_lin.powf(p.tempo);
    let a = p.amp;
    let (ax, rx) = stance(category);
    let mut actor = Person::new(1.0, [ax + p.actor_x, 0.5, p.depth]);
    let mut reactor = Person::new(-1.0, [rx + p.reactor_x, 0.5, p.depth]);
    let gait = 0.03 * (4.0 * PI * s).sin();

    match category {
        Interaction::Approaching => {
            actor.forward(0.18 * a * s);
            actor.root[2] -= 0.45 * a * s;
            actor.limb(L_FOOT, gait, 0.0, 0.0);
            actor.limb(R_FOOT, -gait, 0.0, 0.0);
        }
        Interaction::Departing => {
            actor.forward(-0.16 * a * s);
            actor.root[2] += 0.45 * a * s;
            actor.limb(L_FOOT, gait, 0.0, 0.0);
            actor.limb(R_FOOT, -gait, 0.0, 0.0);
        }
        Interaction::Kicking => {
            let k = pulse(s, 0.45, 0.15) * a;
            actor.limb(R_FOOT, 0.16 * k, -0.10 * k, 0.0);
            actor.limb(R_KNEE, 0.08 * k, -0.05 * k, 0.0);
            let recoil = smoothstep((s - 0.45) / 0.55) * a;
            reactor.forward(-0.05 * recoil);
            reactor.root[2] += 0.12 * recoil;
        }
        Interaction::Punching => {
            let k = pulse(s, 0.5, 0.1) * a;
            actor.limb(R_HAND, 0.20 * k, 0.0, -0.05 * k);
            actor.limb(R_ELBOW, 0.10 * k, 0.0, -0.02 * k);
            let flinch = pulse(s, 0.6, 0.12) * a;
            reactor.limb(HEAD, -0.05 * flinch, 0.0, 0.0);
            reactor.limb(NECK, -0.03 * flinch, 0.0, 0.0);
            reactor.root[2] += 0.10 * flinch;
        }
        Interaction::Pushing => {
            let k = pulse(s, 0.45, 0.15) * a;
            actor.limb(R_HAND, 0.14 * k, 0.0, 0.0);
            actor.limb(L_HAND, 0.14 * k, 0.0, 0.0);
            actor.limb(R_ELBOW, 0.07 * k, 0.0, 0.0);
            actor.limb(L_ELBOW, 0.07 * k, 0.0, 0.0);
            actor.forward(0.04 * smoothstep(s));
            let shove = smoothstep((s - 0.4) / 0.6) * a;
            reactor.forward(-0.12 * shove);
            reactor.root[2] -= 0.15 * shove;
        }
        Interaction::Hugging => {
            let k = smoothstep(s) * a;
            let sway = 0.06 * (2.0 * PI * s).sin();
            for person in [&mut actor, &mut reactor] {
                person.forward(0.08 * k);
                person.limb(R_HAND, 0.12 * k, -0.04 * k, 0.05 * k);
                person.limb(L_HAND, 0.12 * k, -0.04 * k, -0.05 * k);
                person.root[2] += sway;
            }
        }
        Interaction::Handshaking => {
            let reach = smoothstep(2.0 * s) * a;
            let shake = 0.015 * (8.0 * PI * s).sin() * reach;
            for person in [&mut actor, &mut reactor] {
                person.forward(0.04 * smoothstep(s));
                person.limb(R_HAND, 0.12 * reach, shake, 0.0);
                person.limb(R_ELBOW, 0.05 * reach, 0.0, 0.0);
                person.root[2] -= 0.05 * reach;
            }
        }
        Interaction::Exchanging => {
            let give = (2.0 * PI * s).sin().abs() * a;
            let take = (2.0 * PI * s + PI / 2.0).sin().abs() * a;
            actor.limb(R_HAND, 0.12 * give, 0.0, 0.0);
            reactor.limb(R_HAND, 0.12 * take, 0.0, 0.0);
            let lean = 0.08 * (PI * s).sin();
            actor.root[2] += lean;
            reactor.root[2] += lean;
        }
    }

    let sway = 0.004 * (2.0 * PI * s + p.sway_phase).sin();
    actor.root[1] += sway;
    reactor.root[1] -= sway;
    (actor, reactor)
}

fn finish(mut data: Vec<f64>, joints: usize, rng: &mut ChaCha8Rng) -> Result<SkeletonSequence> {
    let dim = joints * COORDS;
    let root = root_joint(joints);
    for (i, v) in data.iter_mut().enumerate() {
        let k = i % dim;
        if k / COORDS != root {
            *v += rng.gen_range(-NOISE..NOISE);
        }
        let (lo, hi) = coord_bounds(k);
        *v = v.clamp(lo, hi);
    }
    SkeletonSequence::new(joints, data)
}

/// Generate `per_category` records for each of the eight classes.
pub fn synth_generate(seed: u64, per_category: usize, frames: usize, joints: usize) -> Result<Vec<InteractionRecord>> {
    if frames < 2 {
        return Err(Error::invalid("synth", format!("need at least 2 frames, got {frames}")));
    }
    if joints == 0 {
        return Err(Error::invalid("synth", "need at least one joint"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = joints * COORDS;
    let mut out = Vec::with_capacity(8 * per_category);

    for category in Interaction::ALL {
        let base_depth = 2.5 + 0.12 * category.index() as f64;
        for i in 0..per_category {
            let params = RecordParams {
                amp: rng.gen_range(0.85..1.15),
                tempo: rng.gen_range(0.9..1.1),
                actor_x: rng.gen_range(-0.02..0.02),
                reactor_x: rng.gen_range(-0.02..0.02),
                depth: base_depth + rng.gen_range(-0.03..0.03),
                sway_phase: rng.gen_range(0.0..2.0 * PI),
            };
            let mut actor = vec![0.0; frames * dim];
            let mut reactor = vec![0.0; frames * dim];
            for t in 0..frames {
                let s = t as f64 / (frames - 1) as f64;
                let (a, r) = pose(category, &params, s);
                a.write(joints, &mut actor[t * dim..(t + 1) * dim]);
                r.write(joints, &mut reactor[t * dim..(t + 1) * dim]);
            }
            let actor = finish(actor, joints, &mut rng)?;
            let reactor = finish(reactor, joints, &mut rng)?;
            let set_id = SYNTH_SET_ORDER[(category.index() * per_category + i) % SYNTH_SET_ORDER.len()];
            out.push(InteractionRecord::new(category, set_id, actor, reactor)?);
        }
    }
    Ok(out)
}
