//! Planted-neuron fixtures: networks and contrasting corpora in which a known
//! set of units separates the corpora perfectly and every other unit barely
//! distinguishes them.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{Layer, NeuronId, ToyNetwork};
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct PlantedFixture<T> {
    pub network: ToyNetwork<T>,
    pub high: Vec<Vec<T>>,
    pub low: Vec<Vec<T>>,
    /// Units firing on every high sample and no low sample.
    pub positive: BTreeSet<NeuronId>,
    /// Units firing on every low sample and no high sample.
    pub negative: BTreeSet<NeuronId>,
}

#[derive(Debug, Clone, Copy)]
pub struct PlantedSpec {
    pub noise_dims: usize,
    pub hidden: usize,
    /// Planted (positive, negative) counts in each of the two layers.
    pub planted_per_layer: [(usize, usize); 2],
    pub samples: usize,
    /// Fraction of low samples whose background noise is redrawn instead of
    /// mirrored from the paired high sample. Bounds every background |δ|.
    pub background_drift: f64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            noise_dims: 16,
            hidden: 64,
            planted_per_layer: [(3, 3), (2, 2)],
            samples: 200,
            background_drift: 0.1,
        }
    }
}

/// Builds a two-layer fixture.
///
/// Input coordinate 0 is the trait feature (+1 in high samples, -1 in low);
/// the rest is uniform noise in [-1, 1]. Layer-0 planted units read only the
/// feature; layer-1 planted units read only a layer-0 positive unit. All
/// other units read noise (layer 0) or background layer-0 units (layer 1),
/// so their firing differs between corpora on at most the drifted samples.
pub fn planted_fixture<T: Scalar>(spec: &PlantedSpec, seed: u64) -> Result<PlantedFixture<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input_dim = 1 + spec.noise_dims;
    let h = spec.hidden;
    let uniform = |rng: &mut ChaCha8Rng| T::lit(rng.gen_range(-0.5..=0.5));

    let mut positive = BTreeSet::new();
    let mut negative = BTreeSet::new();

    // layer 0
    let (p0, n0) = spec.planted_per_layer[0];
    let picks = sample(&mut rng, h, p0 + n0).into_vec();
    let (pos0, neg0) = picks.split_at(p0);
    let mut w0 = vec![T::zero(); h * input_dim];
    let mut b0 = vec![T::zero(); h];
    for u in 0..h {
        let row = &mut w0[u * input_dim..(u + 1) * input_dim];
        if pos0.contains(&u) {
            row[0] = T::one();
        } else if neg0.contains(&u) {
            row[0] = -T::one();
        } else {
            for w in &mut row[1..] {
                *w = uniform(&mut rng);
            }
            b0[u] = uniform(&mut rng);
        }
    }
    positive.extend(pos0.iter().map(|&u| NeuronId::new(0, u)));
    negative.extend(neg0.iter().map(|&u| NeuronId::new(0, u)));

    // layer 1
    let (p1, n1) = spec.planted_per_layer[1];
    let picks = sample(&mut rng, h, p1 + n1).into_vec();
    let (pos1, neg1) = picks.split_at(p1);
    let planted0: BTreeSet<usize> = pos0.iter().chain(neg0).copied().collect();
    let driver = pos0[0];
    let half = T::lit(0.5);
    let mut w1 = vec![T::zero(); h * h];
    let mut b1 = vec![T::zero(); h];
    for u in 0..h {
        let row = &mut w1[u * h..(u + 1) * h];
        if pos1.contains(&u) {
            row[driver] = T::one();
        } else if neg1.contains(&u) {
            // fires at +0.5 unless the driver is on
            row[driver] = -T::one();
            b1[u] = half;
        } else {
            for (j, w) in row.iter_mut().enumerate() {
                if !planted0.contains(&j) {
                    *w = uniform(&mut rng);
                }
            }
            b1[u] = uniform(&mut rng);
        }
    }
    positive.extend(pos1.iter().map(|&u| NeuronId::new(1, u)));
    negative.extend(neg1.iter().map(|&u| NeuronId::new(1, u)));

    let network = ToyNetwork::new(
        input_dim,
        vec![
            Layer::new(input_dim, h, w0, b0)?,
            Layer::new(h, h, w1, b1)?,
        ],
    )?
    .with_seed(Some(seed));

    let noise = |rng: &mut ChaCha8Rng| -> Vec<T> {
        (0..spec.noise_dims)
            .map(|_| T::lit(rng.gen_range(-1.0..=1.0)))
            .collect()
    };
    let drift_count = ((spec.samples as f64) * spec.background_drift).floor() as usize;
    let drifted: BTreeSet<usize> = sample(&mut rng, spec.samples, drift_count.min(spec.samples))
        .into_iter()
        .collect();
    let mut high = Vec::with_capacity(spec.samples);
    let mut low = Vec::with_capacity(spec.samples);
    for i in 0..spec.samples {
        let z = noise(&mut rng);
        let z_low = if drifted.contains(&i) { noise(&mut rng) } else { z.clone() };
        high.push(std::iter::once(T::one()).chain(z).collect());
        low.push(std::iter::once(-T::one()).chain(z_low).collect());
    }

    Ok(PlantedFixture {
        network,
        high,
        low,
        positive,
        negative,
    })
}
