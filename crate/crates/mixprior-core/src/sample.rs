//! Sampling from the generative pretraining model.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::context::ContextSequence;
use crate::error::Result;
use crate::mixture::MixturePrior;
use crate::rng::substream;

/// RNG stream label for pretraining-sequence draws.
pub const STREAM_PRETRAIN: u64 = 0x11;

/// A sampled sequence together with the held-out query label and the latent
/// variables that generated it.
#[derive(Debug, Clone)]
pub struct PretrainDraw {
    pub context: ContextSequence,
    /// True label of the query input, kept out of the context.
    pub query_label: f64,
    /// Index of the mixture component the sequence was drawn from.
    pub component: usize,
    /// Latent input mean mu for this sequence.
    pub mu: DVector<f64>,
    /// Latent task weight w for this sequence.
    pub w: DVector<f64>,
}

pub(crate) fn standard_normal_vector<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Draw one sequence: component m ~ pi, then mu ~ N(mu_m, sigma_mu² I),
/// w ~ N(w_m, sigma_w² I), then T+1 pairs x_i ~ N(mu, sigma_x² I),
/// y_i = ⟨x_i, w⟩ + N(0, sigma_y²). The final pair becomes the query and its
/// label is returned separately.
pub fn sample_pretrain_sequence(prior: &MixturePrior, t: usize, seed: u64) -> Result<PretrainDraw> {
    let mut rng = substream(seed, STREAM_PRETRAIN, 0);
    let h = prior.hyper();
    let d = prior.dim();

    let u: f64 = rng.gen();
    let mut component = prior.len() - 1;
    let mut acc = 0.0;
    for (m, c) in prior.components().iter().enumerate() {
        acc += c.pi();
        if u < acc {
            component = m;
            break;
        }
    }

    let center = prior.component(component)?;
    let mu = center.mu() + h.sigma_mu() * standard_normal_vector(&mut rng, d);
    let w = center.w() + h.sigma_w() * standard_normal_vector(&mut rng, d);

    let mut xs = Vec::with_capacity(t);
    let mut ys = Vec::with_capacity(t);
    let mut query = DVector::zeros(d);
    let mut query_label = 0.0;
    for i in 0..=t {
        let x = &mu + h.sigma_x() * standard_normal_vector(&mut rng, d);
        let noise: f64 = rng.sample(StandardNormal);
        let y = w.dot(&x) + h.sigma_y() * noise;
        if i < t {
            xs.push(x);
            ys.push(y);
        } else {
            query = x;
            query_label = y;
        }
    }

    Ok(PretrainDraw {
        context: ContextSequence::new(xs, ys, query)?,
        query_label,
        component,
        mu,
        w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyper::Hyper;
    use crate::mixture::Component;

    fn tight_prior() -> MixturePrior {
        // sigma_mu = sigma_w = sigma_y ≈ 0 pins the task to the center exactly.
        let hyper = Hyper::new(1.0, 1e-12, 1e-12, 1e-12).unwrap();
        let c = Component::new(
            1.0,
            DVector::from_vec(vec![0.5, -0.5]),
            DVector::from_vec(vec![1.0, 2.0]),
        )
        .unwrap();
        MixturePrior::new(vec![c], hyper).unwrap()
    }

    #[test]
    fn degenerate_prior_pins_labels_to_center_weight() {
        let prior = tight_prior();
        let draw = sample_pretrain_sequence(&prior, 3, 42).unwrap();
        let w1 = prior.component(0).unwrap().w();
        for (x, y) in draw.context.xs().iter().zip(draw.context.ys()) {
            assert!((y - w1.dot(x)).abs() < 1e-6);
        }
        assert!((draw.query_label - w1.dot(draw.context.query())).abs() < 1e-6);
    }

    #[test]
    fn fixed_seed_reproduces_bit_for_bit() {
        let prior = tight_prior();
        let a = sample_pretrain_sequence(&prior, 5, 7).unwrap();
        let b = sample_pretrain_sequence(&prior, 5, 7).unwrap();
        assert_eq!(a.context, b.context);
        assert_eq!(a.query_label.to_bits(), b.query_label.to_bits());
        assert_eq!(a.component, b.component);
    }

    #[test]
    fn t_zero_gives_empty_context_with_query() {
        let prior = tight_prior();
        let draw = sample_pretrain_sequence(&prior, 0, 1).unwrap();
        assert_eq!(draw.context.len(), 0);
        assert_eq!(draw.context.dim(), 2);
    }
}
