//! Randomized small instances for oracle-agreement runs: d ≤ 2, M ≤ 3,
//! T ≤ 6, mild noise scales, contexts drawn from the prior itself so that
//! prior-proposal importance sampling stays well conditioned.

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use mixprior_core::{
    sample_pretrain_sequence, substream, Component, ContextSequence, Hyper, MixturePrior,
};

pub const STREAM_INSTANCE: u64 = 0x51;

#[derive(Debug, Clone, Serialize)]
pub struct SmallInstance {
    pub prior: MixturePrior,
    pub context: ContextSequence,
    pub dim: usize,
    pub components: usize,
    pub context_len: usize,
}

fn build(seed: u64, index: u64, force_d1: bool) -> SmallInstance {
    let mut rng = substream(seed, STREAM_INSTANCE, index);
    let d = if force_d1 { 1 } else { rng.gen_range(1..=2usize) };
    let m = rng.gen_range(1..=3usize);
    let t = rng.gen_range(1..=6usize);

    let sigma_y = rng.gen_range(0.6..=1.2);
    let sigma_mu = rng.gen_range(0.3..=0.8);
    let sigma_w = rng.gen_range(0.3..=0.8);
    let hyper = Hyper::new(1.0, sigma_y, sigma_mu, sigma_w).unwrap();

    let mut pis: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..=1.0)).collect();
    let total: f64 = pis.iter().sum();
    for p in &mut pis {
        *p /= total;
    }
    let head: f64 = pis[..m - 1].iter().sum();
    pis[m - 1] = 1.0 - head;

    let center = |rng: &mut rand_chacha::ChaCha8Rng| {
        DVector::from_fn(d, |_, _| rng.gen_range(-1.0..=1.0))
    };
    let components: Vec<Component> = pis
        .into_iter()
        .map(|pi| {
            let mu = center(&mut rng);
            let w = center(&mut rng);
            Component::new(pi, mu, w).unwrap()
        })
        .collect();
    let prior = MixturePrior::new(components, hyper).unwrap();

    let draw_seed: u64 = rng.gen();
    let draw = sample_pretrain_sequence(&prior, t, draw_seed).unwrap();
    SmallInstance {
        dim: d,
        components: m,
        context_len: t,
        context: draw.context,
        prior,
    }
}

/// Instance `index` of the d ≤ 2 family.
pub fn random_small_instance(seed: u64, index: u64) -> SmallInstance {
    build(seed, index, false)
}

/// Instance `index` restricted to d = 1 (for the quadrature oracle).
pub fn random_small_instance_1d(seed: u64, index: u64) -> SmallInstance {
    build(seed, index.wrapping_add(1 << 32), true)
}
