//! Seeded synthetic affinity volumes with known ground truth.
//!
//! Ground-truth segments grow from random seed voxels by a randomized
//! best-first flood, which gives compact segments with ragged boundaries.
//! Disaffinities inside a segment and across segment boundaries are drawn
//! from two normal distributions and clamped to [0, 1].

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::AffinityVolume;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// `(Z, Y, X)`.
    pub shape: [usize; 3],
    pub blobs: usize,
    pub interior_mean: f64,
    pub interior_sd: f64,
    pub boundary_mean: f64,
    pub boundary_sd: f64,
    /// Probability that an edge draws from the other distribution.
    pub swap_prob: f64,
    /// Random priority added per growth step; larger is more ragged.
    pub roughness: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Well-separated defaults at the given shape and seed.
    pub fn new(shape: [usize; 3], blobs: usize, seed: u64) -> Self {
        SynthSpec {
            shape,
            blobs,
            interior_mean: 0.1,
            interior_sd: 0.05,
            boundary_mean: 0.9,
            boundary_sd: 0.05,
            swap_prob: 0.0,
            roughness: 2.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSynth(msg));
        if self.shape.contains(&0) {
            return bad(format!("shape {:?} has an empty axis", self.shape));
        }
        let voxels: usize = self.shape.iter().product();
        if voxels > u32::MAX as usize {
            return bad(format!("{voxels} voxels exceed the u32 id range"));
        }
        if self.blobs == 0 || self.blobs > voxels {
            return bad(format!("blob count {} must be in 1..={voxels}", self.blobs));
        }
        for (name, m) in [
            ("interior", self.interior_mean),
            ("boundary", self.boundary_mean),
        ] {
            if !(0.0..=1.0).contains(&m) {
                return bad(format!("{name} mean {m} is outside [0, 1]"));
            }
        }
        if self.interior_mean >= self.boundary_mean {
            return bad("interior mean must be below boundary mean".into());
        }
        for (name, sd) in [
            ("interior", self.interior_sd),
            ("boundary", self.boundary_sd),
        ] {
            if !(sd >= 0.0 && sd.is_finite()) {
                return bad(format!("{name} sd {sd} must be non-negative"));
            }
        }
        if !(0.0..=1.0).contains(&self.swap_prob) {
            return bad(format!(
                "swap probability {} is outside [0, 1]",
                self.swap_prob
            ));
        }
        if !(self.roughness >= 0.0 && self.roughness.is_finite()) {
            return bad(format!("roughness {} must be non-negative", self.roughness));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthVolume {
    pub affinity: AffinityVolume,
    /// Labels `1..=blobs`, row-major over `(Z, Y, X)`.
    pub ground_truth: Vec<u32>,
}

fn neighbors(shape: [usize; 3], i: usize) -> impl Iterator<Item = usize> {
    let [zs, ys, xs] = shape;
    let (z, y, x) = (i / (ys * xs), (i / xs) % ys, i % xs);
    let plane = ys * xs;
    [
        (x > 0).then(|| i - 1),
        (x + 1 < xs).then(|| i + 1),
        (y > 0).then(|| i - xs),
        (y + 1 < ys).then(|| i + xs),
        (z > 0).then(|| i - plane),
        (z + 1 < zs).then(|| i + plane),
    ]
    .into_iter()
    .flatten()
}

fn grow_segments(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let voxels: usize = spec.shape.iter().product();
    let mut labels = vec![0u32; voxels];
    // Priorities are non-negative, so their bit patterns order correctly.
    let mut heap: BinaryHeap<Reverse<(u64, u32, u32)>> = BinaryHeap::new();
    for (k, seed) in sample(rng, voxels, spec.blobs).into_iter().enumerate() {
        heap.push(Reverse((0f64.to_bits(), seed as u32, k as u32 + 1)));
    }
    while let Some(Reverse((prio, voxel, label))) = heap.pop() {
        if labels[voxel as usize] != 0 {
            continue;
        }
        labels[voxel as usize] = label;
        let base = f64::from_bits(prio) + 1.0;
        for n in neighbors(spec.shape, voxel as usize) {
            if labels[n] == 0 {
                let p = base + spec.roughness * rng.random::<f64>();
                heap.push(Reverse((p.to_bits(), n as u32, label)));
            }
        }
    }
    labels
}

/// Deterministic for a given spec.
pub fn synthesize(spec: &SynthSpec) -> Result<SynthVolume> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels = grow_segments(spec, &mut rng);

    let interior = Normal::new(spec.interior_mean, spec.interior_sd)
        .map_err(|e| Error::InvalidSynth(e.to_string()))?;
    let boundary = Normal::new(spec.boundary_mean, spec.boundary_sd)
        .map_err(|e| Error::InvalidSynth(e.to_string()))?;

    let [zs, ys, xs] = spec.shape;
    let strides = [1usize, xs, xs * ys];
    let mut data = Vec::with_capacity(3 * zs * ys * xs);
    for (axis, &stride) in strides.iter().enumerate() {
        for z in 0..zs {
            for y in 0..ys {
                for x in 0..xs {
                    let in_range = match axis {
                        0 => x + 1 < xs,
                        1 => y + 1 < ys,
                        _ => z + 1 < zs,
                    };
                    if !in_range {
                        data.push(1.0);
                        continue;
                    }
                    let i = (z * ys + y) * xs + x;
                    let mut same = labels[i] == labels[i + stride];
                    if spec.swap_prob > 0.0 && rng.random::<f64>() < spec.swap_prob {
                        same = !same;
                    }
                    let value = if same {
                        interior.sample(&mut rng)
                    } else {
                        boundary.sample(&mut rng)
                    };
                    data.push(value.clamp(0.0, 1.0) as f32);
                }
            }
        }
    }
    Ok(SynthVolume {
        affinity: AffinityVolume::new(spec.shape, data)?,
        ground_truth: labels,
    })
}
