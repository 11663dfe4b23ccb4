//! Central finite-difference checks of the analytic gradients.
//!
//! Errors are relative, `|analytic - numeric| / max(|analytic|, |numeric|, 1e-6)`;
//! the floor keeps coordinates whose true gradient is essentially zero from
//! reporting rounding noise as a large relative error.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scorer::{init_params, ScorerError, ScorerParams, ScorerSpec, Upstream};
use crate::training::{bt_listwise_grad, bt_listwise_loss, TrainError};

const STEP: f64 = 1e-5;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Outcome of a gradient check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSummary {
    pub instances: usize,
    pub coordinates: usize,
    pub max_rel_error: f64,
}

/// Checks `bt_listwise_grad` on `instances` random score vectors of length
/// 2 to 8 with entries in `[-5, 5]`, every coordinate.
pub fn check_bt_gradient(instances: usize, seed: u64) -> Result<CheckSummary, TrainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = CheckSummary {
        instances,
        coordinates: 0,
        max_rel_error: 0.0,
    };
    for _ in 0..instances {
        let n = rng.gen_range(2..=8);
        let means: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let grad = bt_listwise_grad(&means)?;
        let mut probe = means.clone();
        for i in 0..n {
            probe[i] = means[i] + STEP;
            let up = bt_listwise_loss(&probe)?;
            probe[i] = means[i] - STEP;
            let down = bt_listwise_loss(&probe)?;
            probe[i] = means[i];
            let numeric = (up - down) / (2.0 * STEP);
            summary.max_rel_error = summary.max_rel_error.max(relative_error(grad[i], numeric));
            summary.coordinates += 1;
        }
    }
    Ok(summary)
}

/// Scalar probe `Σ upstream ⊙ outputs`; its gradient is `backward(upstream)`.
fn probe(params: &ScorerParams, x: &[f64], up: &Upstream) -> Result<f64, ScorerError> {
    let out = params.forward(x)?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    Ok(dot(&up.d_logits, &out.policy_logits)
        + up.d_value * out.value
        + up.d_beta * out.beta
        + dot(&up.d_rank_logits, &out.rank_logits))
}

/// Checks `ScorerParams::backward` on `instances` random draws of parameters,
/// input and upstream derivatives. Each instance exercises one output head,
/// cycling policy, value, strength and (when present) rank, so every head
/// gets at least `instances / heads` draws. Inputs mix zeros, ones and
/// fractions, with the move one-hot set when the spec has a move readout.
/// Up to `max_coords` parameter coordinates are checked per instance (all of
/// them when the network is smaller).
pub fn check_scorer_gradient(
    spec: ScorerSpec,
    instances: usize,
    max_coords: usize,
    seed: u64,
) -> Result<CheckSummary, ScorerError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let heads = if spec.ranks > 0 { 4 } else { 3 };
    let mut summary = CheckSummary {
        instances,
        coordinates: 0,
        max_rel_error: 0.0,
    };
    for inst in 0..instances {
        let mut params = init_params(spec, rng.gen())?;
        // Larger weights than the initialiser so the tanh units are not all
        // in their linear range.
        params.values_mut().iter_mut().for_each(|v| *v *= 2.0);

        let mut x: Vec<f64> = (0..spec.input_len)
            .map(|_| match rng.gen_range(0..3) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen_range(0.0..1.0),
            })
            .collect();
        if let Some(o) = spec.move_readout {
            x[o..o + spec.actions].iter_mut().for_each(|v| *v = 0.0);
            x[o + rng.gen_range(0..spec.actions)] = 1.0;
        }

        let mut up = Upstream::default();
        match inst % heads {
            0 => up.d_logits = (0..spec.actions).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            1 => up.d_value = rng.gen_range(-1.0..1.0),
            2 => up.d_beta = rng.gen_range(-1.0..1.0),
            _ => up.d_rank_logits = (0..spec.ranks).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }

        let grad = params.backward(&x, &up)?;
        let coords: Vec<usize> = if params.len() <= max_coords {
            (0..params.len()).collect()
        } else {
            rand::seq::index::sample(&mut rng, params.len(), max_coords).into_vec()
        };
        for k in coords {
            let orig = params.values()[k];
            params.values_mut()[k] = orig + STEP;
            let f_up = probe(&params, &x, &up)?;
            params.values_mut()[k] = orig - STEP;
            let f_down = probe(&params, &x, &up)?;
            params.values_mut()[k] = orig;
            let numeric = (f_up - f_down) / (2.0 * STEP);
            summary.max_rel_error = summary.max_rel_error.max(relative_error(grad[k], numeric));
            summary.coordinates += 1;
        }
    }
    Ok(summary)
}
