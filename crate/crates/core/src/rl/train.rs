//! Training loop: vectorized rollouts, advantage estimation, policy
//! updates, metrics, and checkpoints.
//!
//! Every stochastic element draws from its own counter-based generator
//! stream (parameter init and minibatch shuffling on stream 0, each
//! environment and its action sampler on streams derived from the env
//! index), so a run is a pure function of its configuration. Parallel
//! rollouts only split work across environments, never across a stream,
//! which keeps parallel and sequential runs bit-identical.

use std::collections::VecDeque;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::sim::Morphology;
use crate::util::fmt_f64;
use crate::Result;

use super::env::{EnvStep, EpisodeConfig, EpisodeStats, GaitEnv};
use super::gae::{gae_advantages, TrajectoryBatch};
use super::net::{GaussianPolicy, MlpCache, PolicyParams, ACTION_DIM};
use super::obs::STACK_DIM;
use super::ppo::{ppo_update, Adam, PpoConfig};

/// Stop once the rolling episode window is good enough.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStop {
    /// Rolling mean |v_x - v_cmd| at or below this.
    pub tracking: f64,
    /// Rolling mean contact/clock agreement at or above this.
    pub agreement: f64,
    /// Completed episodes required before the check applies.
    pub min_episodes: usize,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub episode: EpisodeConfig,
    pub morph: Morphology,
    /// Hidden layer widths shared by the policy and value networks.
    pub hidden: Vec<usize>,
    /// Initial log standard deviation of every action dimension.
    pub init_log_std: f64,
    pub ppo: PpoConfig,
    pub num_envs: usize,
    /// Stop after this many environment steps (rounded up to a batch).
    pub total_steps: u64,
    pub seed: u64,
    /// Roll environments out across threads. Results are identical either
    /// way; this only trades wall time.
    pub parallel: bool,
    /// Write a checkpoint every this many updates (0 disables periodic
    /// checkpoints; a final checkpoint is always written when a directory
    /// is set).
    pub checkpoint_every: usize,
    pub checkpoint_dir: Option<PathBuf>,
    /// Resume from a saved policy instead of a fresh random init. The
    /// checkpoint's hidden widths must match `hidden`.
    pub init_checkpoint: Option<PathBuf>,
    pub early_stop: Option<EarlyStop>,
}

impl TrainConfig {
    pub fn new(episode: EpisodeConfig) -> Self {
        TrainConfig {
            episode,
            morph: Morphology::default(),
            hidden: vec![128, 128],
            init_log_std: -0.5,
            ppo: PpoConfig::default(),
            num_envs: 64,
            total_steps: 5_000_000,
            seed: 0,
            parallel: true,
            checkpoint_every: 0,
            checkpoint_dir: None,
            init_checkpoint: None,
            early_stop: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.ppo.validate()?;
        if self.num_envs == 0 {
            return Err(Error::param("num_envs", "must be at least 1", 0.0));
        }
        if self.ppo.batch_steps % self.num_envs != 0 {
            return Err(Error::param(
                "batch_steps",
                "must be a multiple of num_envs",
                self.ppo.batch_steps as f64,
            ));
        }
        if self.total_steps == 0 {
            return Err(Error::param("total_steps", "must be at least 1", 0.0));
        }
        if !self.init_log_std.is_finite() {
            return Err(Error::param(
                "init_log_std",
                "must be finite",
                self.init_log_std,
            ));
        }
        if self.hidden.is_empty() || self.hidden.iter().any(|h| *h == 0) {
            return Err(Error::param(
                "hidden",
                "needs at least one non-empty layer",
                self.hidden.len() as f64,
            ));
        }
        Ok(())
    }
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub update: u64,
    pub env_steps: u64,
    /// Completed episodes so far.
    pub episodes: u64,
    pub mean_reward: f64,
    pub mean_command: f64,
    pub mean_smoothness: f64,
    pub mean_temporal: f64,
    pub mean_morphological: f64,
    /// Per-step |v_x - v_cmd| over the batch.
    pub mean_abs_vx_err: f64,
    /// Per-step contact/clock agreement over the batch.
    pub mean_agreement: f64,
    /// Means over the rolling episode window (0 until data exists).
    pub rolling_return: f64,
    pub rolling_tracking: f64,
    pub rolling_agreement: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub grad_norm: f64,
}

pub const METRICS_COLUMNS: [&str; 19] = [
    "update",
    "env_steps",
    "episodes",
    "mean_reward",
    "mean_command",
    "mean_smoothness",
    "mean_temporal",
    "mean_morphological",
    "mean_abs_vx_err",
    "mean_agreement",
    "rolling_return",
    "rolling_tracking",
    "rolling_agreement",
    "policy_loss",
    "value_loss",
    "entropy",
    "approx_kl",
    "clip_fraction",
    "grad_norm",
];

/// Serialize metrics deterministically: integers in decimal, floats in
/// full-precision scientific notation.
pub fn write_metrics_csv(rows: &[MetricsRow], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&METRICS_COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let floats = [
            r.mean_reward,
            r.mean_command,
            r.mean_smoothness,
            r.mean_temporal,
            r.mean_morphological,
            r.mean_abs_vx_err,
            r.mean_agreement,
            r.rolling_return,
            r.rolling_tracking,
            r.rolling_agreement,
            r.policy_loss,
            r.value_loss,
            r.entropy,
            r.approx_kl,
            r.clip_fraction,
            r.grad_norm,
        ];
        out.push_str(&format!("{},{},{}", r.update, r.env_steps, r.episodes));
        for f in floats {
            out.push(',');
            out.push_str(&fmt_f64(f));
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: PolicyParams,
    pub metrics: Vec<MetricsRow>,
    pub env_steps: u64,
    pub updates: u64,
    pub episodes: u64,
    pub stopped_early: bool,
}

/// Per-environment rollout state.
struct EnvWorker {
    env: GaitEnv,
    action_rng: ChaCha8Rng,
    pi_cache: MlpCache,
    vf_cache: MlpCache,
    last_obs: [f64; STACK_DIM],
    last_value: f64,
    seg: TrajectoryBatch,
    sum_terms: [f64; 5],
    sum_verr: f64,
    sum_agree: f64,
    finished: Vec<EpisodeStats>,
}

impl EnvWorker {
    /// Gather `horizon` steps. `last_value` must be refreshed by the
    /// caller whenever the parameters change.
    fn rollout(&mut self, params: &PolicyParams, horizon: usize) -> Result<()> {
        self.seg = TrajectoryBatch::with_dims(STACK_DIM, ACTION_DIM);
        self.sum_terms = [0.0; 5];
        self.sum_verr = 0.0;
        self.sum_agree = 0.0;
        self.finished.clear();
        self.last_value = params.value(&self.last_obs, &mut self.vf_cache);

        for t in 0..horizon {
            params.policy_mean(&self.last_obs, &mut self.pi_cache);
            let (action, log_prob) = GaussianPolicy::sample(
                self.pi_cache.output(),
                params.log_std(),
                &mut self.action_rng,
            );
            let action_arr: [f64; ACTION_DIM] = action.as_slice().try_into().unwrap();
            let step = self.env.step(&action_arr)?;
            self.seg
                .push(&self.last_obs, &action, log_prob, step.reward, self.last_value);
            self.record_step(&step);

            let i = self.seg.len() - 1;
            if step.done {
                self.seg.terminals[i] = true;
                self.seg.ends[i] = true;
                self.reset_env(params)?;
            } else if step.truncated {
                self.seg.ends[i] = true;
                self.seg.next_values[i] = params.value(&step.obs, &mut self.vf_cache);
                self.reset_env(params)?;
            } else {
                let v = params.value(&step.obs, &mut self.vf_cache);
                self.seg.next_values[i] = v;
                self.last_obs = step.obs;
                self.last_value = v;
                if t + 1 == horizon {
                    self.seg.ends[i] = true;
                }
            }
            if let Some(stats) = step.stats {
                self.finished.push(stats);
            }
        }
        Ok(())
    }

    fn reset_env(&mut self, params: &PolicyParams) -> Result<()> {
        self.last_obs = self.env.reset()?;
        self.last_value = params.value(&self.last_obs, &mut self.vf_cache);
        Ok(())
    }

    fn record_step(&mut self, step: &EnvStep) {
        self.sum_terms[0] += step.breakdown.total;
        self.sum_terms[1] += step.breakdown.command;
        self.sum_terms[2] += step.breakdown.smoothness;
        self.sum_terms[3] += step.breakdown.temporal;
        self.sum_terms[4] += step.breakdown.morphological;
        self.sum_verr += (step.snapshot.lin_vel[0] - self.env.command().v_x).abs();
        self.sum_agree += step.agreement;
    }
}

/// Run the full loop; `progress` sees each metrics row as it is produced.
pub fn train(cfg: &TrainConfig, mut progress: impl FnMut(&MetricsRow)) -> Result<TrainOutcome> {
    cfg.validate()?;
    if let Some(dir) = &cfg.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
    }
    let horizon = cfg.ppo.batch_steps / cfg.num_envs;

    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = match &cfg.init_checkpoint {
        Some(path) => {
            let loaded = PolicyParams::load(path)?;
            let want: Vec<usize> = loaded.pi.sizes()[1..loaded.pi.sizes().len() - 1].to_vec();
            if want != cfg.hidden {
                return Err(Error::Checkpoint(format!(
                    "hidden widths {:?} do not match configured {:?}",
                    want, cfg.hidden
                )));
            }
            // Burn the same draws a fresh init would take so the env and
            // shuffle streams line up with a cold start.
            PolicyParams::new(&cfg.hidden, cfg.init_log_std, &mut init_rng);
            loaded
        }
        None => PolicyParams::new(&cfg.hidden, cfg.init_log_std, &mut init_rng),
    };
    let mut adam = Adam::new(params.param_count());
    // The same stream continues as the minibatch shuffler.
    let mut shuffle_rng = init_rng;

    let mut workers = Vec::with_capacity(cfg.num_envs);
    for i in 0..cfg.num_envs {
        let env = GaitEnv::new(
            cfg.morph.clone(),
            cfg.episode.clone(),
            cfg.seed,
            (i + 1) as u64,
        )?;
        let mut action_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        action_rng.set_stream((cfg.num_envs + 1 + i) as u64);
        let mut w = EnvWorker {
            env,
            action_rng,
            pi_cache: MlpCache::for_net(&params.pi),
            vf_cache: MlpCache::for_net(&params.vf),
            last_obs: [0.0; STACK_DIM],
            last_value: 0.0,
            seg: TrajectoryBatch::with_dims(STACK_DIM, ACTION_DIM),
            sum_terms: [0.0; 5],
            sum_verr: 0.0,
            sum_agree: 0.0,
            finished: Vec::new(),
        };
        w.last_obs = w.env.reset()?;
        workers.push(w);
    }

    let mut metrics = Vec::new();
    let mut window: VecDeque<EpisodeStats> = VecDeque::with_capacity(100);
    let mut env_steps = 0u64;
    let mut episodes = 0u64;
    let mut update = 0u64;
    let mut stopped_early = false;

    while env_steps < cfg.total_steps && !stopped_early {
        // Rollout phase.
        if cfg.parallel {
            let results: Vec<Result<()>> = workers
                .par_iter_mut()
                .map(|w| w.rollout(&params, horizon))
                .collect();
            for r in results {
                r?;
            }
        } else {
            for w in workers.iter_mut() {
                w.rollout(&params, horizon)?;
            }
        }

        // Merge env-major.
        let mut batch = TrajectoryBatch::with_dims(STACK_DIM, ACTION_DIM);
        let mut terms = [0.0; 5];
        let mut verr = 0.0;
        let mut agree = 0.0;
        for w in workers.iter_mut() {
            batch.obs.append(&mut w.seg.obs);
            batch.actions.append(&mut w.seg.actions);
            batch.log_probs.append(&mut w.seg.log_probs);
            batch.rewards.append(&mut w.seg.rewards);
            batch.values.append(&mut w.seg.values);
            batch.next_values.append(&mut w.seg.next_values);
            batch.terminals.append(&mut w.seg.terminals);
            batch.ends.append(&mut w.seg.ends);
            for k in 0..5 {
                terms[k] += w.sum_terms[k];
            }
            verr += w.sum_verr;
            agree += w.sum_agree;
            episodes += w.finished.len() as u64;
            for stats in w.finished.drain(..) {
                if window.len() == 100 {
                    window.pop_front();
                }
                window.push_back(stats);
            }
        }
        let n = batch.len() as f64;

        gae_advantages(&mut batch, cfg.ppo.gamma, cfg.ppo.lambda)?;
        let stats = ppo_update(&mut params, &mut adam, &batch, &cfg.ppo, update, &mut shuffle_rng)?;
        update += 1;
        env_steps += batch.len() as u64;

        let (rolling_return, rolling_tracking, rolling_agreement) = if window.is_empty() {
            (0.0, 0.0, 0.0)
        } else {
            let m = window.len() as f64;
            (
                window.iter().map(|e| e.total_reward).sum::<f64>() / m,
                window.iter().map(|e| e.mean_abs_vx_err).sum::<f64>() / m,
                window.iter().map(|e| e.agreement).sum::<f64>() / m,
            )
        };

        let row = MetricsRow {
            update,
            env_steps,
            episodes,
            mean_reward: terms[0] / n,
            mean_command: terms[1] / n,
            mean_smoothness: terms[2] / n,
            mean_temporal: terms[3] / n,
            mean_morphological: terms[4] / n,
            mean_abs_vx_err: verr / n,
            mean_agreement: agree / n,
            rolling_return,
            rolling_tracking,
            rolling_agreement,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            approx_kl: stats.approx_kl,
            clip_fraction: stats.clip_fraction,
            grad_norm: stats.grad_norm,
        };
        progress(&row);
        metrics.push(row);

        if let Some(dir) = &cfg.checkpoint_dir {
            if cfg.checkpoint_every > 0 && update as usize % cfg.checkpoint_every == 0 {
                params.save(&dir.join(format!("policy_{update:06}.ckpt")))?;
            }
        }
        if let Some(es) = &cfg.early_stop {
            if episodes as usize >= es.min_episodes
                && !window.is_empty()
                && rolling_tracking <= es.tracking
                && rolling_agreement >= es.agreement
            {
                stopped_early = true;
            }
        }
    }

    if let Some(dir) = &cfg.checkpoint_dir {
        params.save(&dir.join("policy_final.ckpt"))?;
    }

    Ok(TrainOutcome {
        params,
        metrics,
        env_steps,
        updates: update,
        episodes,
        stopped_early,
    })
}
