//! Clipped-surrogate policy optimization over a [`TrajectoryBatch`].
//!
//! Gradients are accumulated sample by sample in index order, so an update
//! is a pure function of (params, batch, config, rng): repeated runs are
//! bit-identical regardless of machine load.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Error;
use crate::Result;

use super::gae::TrajectoryBatch;
use super::net::{GaussianPolicy, MlpCache, PolicyParams, ACTION_DIM};

#[derive(Debug, Clone, PartialEq)]
pub struct PpoConfig {
    pub learning_rate: f64,
    /// Control steps gathered per update across all environments.
    pub batch_steps: usize,
    pub gamma: f64,
    pub lambda: f64,
    /// Ratio clip half-width.
    pub clip: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Cap on the joint gradient 2-norm per minibatch.
    pub max_grad_norm: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            learning_rate: 3e-4,
            batch_steps: 8192,
            gamma: 0.99,
            lambda: 0.95,
            clip: 0.2,
            epochs: 5,
            minibatch: 2048,
            entropy_coef: 0.005,
            value_coef: 0.5,
            max_grad_norm: 1.0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let non_negative = |name: &'static str, v: f64| -> Result<()> {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, "must be finite and non-negative", v));
            }
            Ok(())
        };
        non_negative("learning_rate", self.learning_rate)?;
        non_negative("value_coef", self.value_coef)?;
        non_negative("entropy_coef", self.entropy_coef)?;
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::param("gamma", "outside [0, 1]", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::param("lambda", "outside [0, 1]", self.lambda));
        }
        if !self.clip.is_finite() || self.clip <= 0.0 || self.clip >= 1.0 {
            return Err(Error::param("clip", "outside (0, 1)", self.clip));
        }
        if !self.max_grad_norm.is_finite() || self.max_grad_norm <= 0.0 {
            return Err(Error::param(
                "max_grad_norm",
                "must be finite and positive",
                self.max_grad_norm,
            ));
        }
        if self.epochs == 0 {
            return Err(Error::param("epochs", "must be at least 1", 0.0));
        }
        if self.minibatch == 0 || self.minibatch > self.batch_steps {
            return Err(Error::param(
                "minibatch",
                "must be in [1, batch_steps]",
                self.minibatch as f64,
            ));
        }
        if self.batch_steps == 0 {
            return Err(Error::param("batch_steps", "must be at least 1", 0.0));
        }
        Ok(())
    }
}

/// Adam with the usual bias correction. `lr = 0` leaves parameters
/// bit-identical while still advancing the moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(param_count: usize) -> Self {
        Adam {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

/// Loss statistics for one set of samples.
#[derive(Debug, Clone, Copy, Default)]
pub struct LossTerms {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Per-update statistics, averaged over minibatches.
#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    /// Mean pre-clip gradient norm.
    pub grad_norm: f64,
    pub minibatches: usize,
}

/// Mean loss over `idx`, optionally accumulating its parameter gradient.
///
/// The loss is `-min(ratio a, clip(ratio) a) + value_coef (v - ret)^2
/// - entropy_coef H`, averaged over the index set.
pub fn ppo_loss_grad(
    params: &PolicyParams,
    batch: &TrajectoryBatch,
    idx: &[usize],
    cfg: &PpoConfig,
    mut grad: Option<&mut [f64]>,
) -> Result<LossTerms> {
    if idx.is_empty() {
        return Err(Error::param("minibatch", "empty index set", 0.0));
    }
    if batch.advantages.len() != batch.len() || batch.returns.len() != batch.len() {
        return Err(Error::param(
            "batch",
            "advantages not computed",
            batch.advantages.len() as f64,
        ));
    }
    let inv = 1.0 / idx.len() as f64;
    let log_std = params.log_std().to_vec();
    let sigma: Vec<f64> = log_std.iter().map(|ls| ls.exp()).collect();
    let entropy = GaussianPolicy::entropy(&log_std);

    let mut pi_cache = MlpCache::for_net(&params.pi);
    let mut vf_cache = MlpCache::for_net(&params.vf);
    let mut terms = LossTerms::default();
    let mut mean_grad = [0.0f64; ACTION_DIM];

    for &i in idx {
        let obs = batch.obs_row(i);
        let action = batch.action_row(i);
        let adv = batch.advantages[i];
        let ret = batch.returns[i];
        let lp_old = batch.log_probs[i];

        let value = params.value(obs, &mut vf_cache);
        params.policy_mean(obs, &mut pi_cache);
        let mean = pi_cache.output();
        let lp_new = GaussianPolicy::log_prob(mean, &log_std, action);
        let ratio = (lp_new - lp_old).exp();
        let clipped = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip);
        let surrogate = (ratio * adv).min(clipped * adv);

        let verr = value - ret;
        terms.policy += -surrogate * inv;
        terms.value += verr * verr * inv;
        terms.approx_kl += (lp_old - lp_new) * inv;
        if (ratio - 1.0).abs() > cfg.clip {
            terms.clip_fraction += inv;
        }

        if let Some(g) = grad.as_deref_mut() {
            // Policy gradient flows only through the unclipped branch.
            let active = if adv >= 0.0 {
                ratio <= 1.0 + cfg.clip
            } else {
                ratio >= 1.0 - cfg.clip
            };
            if active {
                let dl_dlp = -adv * ratio * inv;
                let (pi_grad, ls_grad, _) = params.split_grad(&mut *g);
                for j in 0..ACTION_DIM {
                    let z = (action[j] - mean[j]) / sigma[j];
                    mean_grad[j] = dl_dlp * z / sigma[j];
                    ls_grad[j] += dl_dlp * (z * z - 1.0);
                }
                params
                    .pi
                    .backward(params.pi_params(), &mut pi_cache, &mean_grad, pi_grad);
            }
            let (_, _, vf_grad) = params.split_grad(&mut *g);
            let dv = 2.0 * cfg.value_coef * verr * inv;
            params
                .vf
                .backward(params.vf_params(), &mut vf_cache, &[dv], vf_grad);
        }
    }

    terms.entropy = entropy;
    if let Some(g) = grad.as_deref_mut() {
        let (_, ls_grad, _) = params.split_grad(g);
        for lg in ls_grad.iter_mut() {
            *lg -= cfg.entropy_coef;
        }
    }
    terms.total = terms.policy + cfg.value_coef * terms.value - cfg.entropy_coef * entropy;
    if !terms.total.is_finite() {
        return Err(Error::NonFiniteLoss {
            update: 0,
            detail: format!(
                "policy {} value {} entropy {}",
                terms.policy, terms.value, terms.entropy
            ),
        });
    }
    Ok(terms)
}

/// Scale `grad` so its 2-norm does not exceed `cap`; returns the pre-clip
/// norm.
pub fn clip_grad_norm(grad: &mut [f64], cap: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > cap {
        let scale = cap / norm;
        for g in grad.iter_mut() {
            *g *= scale;
        }
    }
    norm
}

/// One optimization pass: `epochs` sweeps of shuffled minibatches with
/// Adam steps under a gradient-norm cap. A non-finite loss aborts with
/// the parameters untouched since the start of the offending minibatch.
pub fn ppo_update<R: Rng>(
    params: &mut PolicyParams,
    adam: &mut Adam,
    batch: &TrajectoryBatch,
    cfg: &PpoConfig,
    update_index: u64,
    rng: &mut R,
) -> Result<UpdateStats> {
    cfg.validate()?;
    if batch.is_empty() {
        return Err(Error::param("batch", "empty batch", 0.0));
    }
    let mut indices: Vec<usize> = (0..batch.len()).collect();
    let mut grad = vec![0.0; params.param_count()];
    let mut stats = UpdateStats::default();

    for _ in 0..cfg.epochs {
        indices.shuffle(rng);
        for chunk in indices.chunks(cfg.minibatch) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let terms = ppo_loss_grad(params, batch, chunk, cfg, Some(&mut grad))
                .map_err(|e| match e {
                    Error::NonFiniteLoss { detail, .. } => Error::NonFiniteLoss {
                        update: update_index,
                        detail,
                    },
                    other => other,
                })?;
            let norm = clip_grad_norm(&mut grad, cfg.max_grad_norm);
            adam.step(&mut params.theta, &grad, cfg.learning_rate);

            stats.policy_loss += terms.policy;
            stats.value_loss += terms.value;
            stats.entropy = terms.entropy;
            stats.approx_kl += terms.approx_kl;
            stats.clip_fraction += terms.clip_fraction;
            stats.grad_norm += norm;
            stats.minibatches += 1;
        }
    }
    let n = stats.minibatches.max(1) as f64;
    stats.policy_loss /= n;
    stats.value_loss /= n;
    stats.approx_kl /= n;
    stats.clip_fraction /= n;
    stats.grad_norm /= n;
    Ok(stats)
}
