//! Rollout storage and generalized advantage estimation.
//!
//! Batches are env-major: each environment contributes one contiguous
//! segment of control steps. Episodes may end inside a segment; the `ends`
//! flag cuts the advantage recursion there, and `terminals` distinguishes
//! failures (no bootstrap) from time or segment truncation (bootstrap from
//! the stored next-state value).

use crate::error::Error;
use crate::Result;

/// One batch of experience plus the derived advantage/return targets.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryBatch {
    pub obs_dim: usize,
    pub act_dim: usize,
    /// Stacked observations, `len x obs_dim`, row-major.
    pub obs: Vec<f64>,
    /// Actions as sampled, `len x act_dim`.
    pub actions: Vec<f64>,
    /// Log-density of each action under the behavior policy.
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    /// Value estimate of each visited state.
    pub values: Vec<f64>,
    /// Value estimate of the successor state (ignored at terminals).
    pub next_values: Vec<f64>,
    /// Episode ended at this step by failure: no bootstrap.
    pub terminals: Vec<bool>,
    /// Advantage recursion stops after this step (failure, timeout, or
    /// end of segment). The last step of every segment must be an end.
    pub ends: Vec<bool>,
    /// Normalized advantages, filled by [`gae_advantages`].
    pub advantages: Vec<f64>,
    /// Value regression targets (raw advantage plus value).
    pub returns: Vec<f64>,
}

impl TrajectoryBatch {
    pub fn with_dims(obs_dim: usize, act_dim: usize) -> Self {
        TrajectoryBatch {
            obs_dim,
            act_dim,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn obs_row(&self, i: usize) -> &[f64] {
        &self.obs[i * self.obs_dim..(i + 1) * self.obs_dim]
    }

    pub fn action_row(&self, i: usize) -> &[f64] {
        &self.actions[i * self.act_dim..(i + 1) * self.act_dim]
    }

    pub fn push(
        &mut self,
        obs: &[f64],
        action: &[f64],
        log_prob: f64,
        reward: f64,
        value: f64,
    ) {
        debug_assert_eq!(obs.len(), self.obs_dim);
        debug_assert_eq!(action.len(), self.act_dim);
        self.obs.extend_from_slice(obs);
        self.actions.extend_from_slice(action);
        self.log_probs.push(log_prob);
        self.rewards.push(reward);
        self.values.push(value);
        // Successor info is patched afterwards once known.
        self.next_values.push(0.0);
        self.terminals.push(false);
        self.ends.push(false);
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.len();
        let ok = self.obs.len() == n * self.obs_dim
            && self.actions.len() == n * self.act_dim
            && self.log_probs.len() == n
            && self.values.len() == n
            && self.next_values.len() == n
            && self.terminals.len() == n
            && self.ends.len() == n;
        if !ok {
            return Err(Error::param(
                "batch",
                "inconsistent field lengths",
                n as f64,
            ));
        }
        if n == 0 {
            return Err(Error::param("batch", "empty batch", 0.0));
        }
        if !self.ends[n - 1] {
            return Err(Error::param(
                "batch",
                "last step of a segment must be an end",
                (n - 1) as f64,
            ));
        }
        Ok(())
    }
}

/// Fill `advantages` and `returns` by the lambda-weighted temporal
/// difference recursion, then normalize advantages to zero mean and unit
/// scale. Returns keep the raw (unnormalized) advantages.
pub fn gae_advantages(batch: &mut TrajectoryBatch, gamma: f64, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::param("gamma", "outside [0, 1]", gamma));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::param("lambda", "outside [0, 1]", lambda));
    }
    batch.check_shape()?;

    let n = batch.len();
    batch.advantages.clear();
    batch.advantages.resize(n, 0.0);
    batch.returns.clear();
    batch.returns.resize(n, 0.0);

    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        if batch.ends[t] {
            next_adv = 0.0;
        }
        let bootstrap = if batch.terminals[t] {
            0.0
        } else {
            batch.next_values[t]
        };
        let delta = batch.rewards[t] + gamma * bootstrap - batch.values[t];
        let adv = delta + gamma * lambda * next_adv;
        batch.advantages[t] = adv;
        batch.returns[t] = adv + batch.values[t];
        next_adv = adv;
    }

    let mean = batch.advantages.iter().sum::<f64>() / n as f64;
    let var = batch
        .advantages
        .iter()
        .map(|a| (a - mean) * (a - mean))
        .sum::<f64>()
        / n as f64;
    let scale = 1.0 / (var.sqrt() + 1e-8);
    for a in &mut batch.advantages {
        *a = (*a - mean) * scale;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn batch_from(
        rewards: &[f64],
        values: &[f64],
        next_values: &[f64],
        terminals: &[bool],
        ends: &[bool],
    ) -> TrajectoryBatch {
        let mut b = TrajectoryBatch::with_dims(1, 1);
        for i in 0..rewards.len() {
            b.push(&[0.0], &[0.0], 0.0, rewards[i], values[i]);
            b.next_values[i] = next_values[i];
            b.terminals[i] = terminals[i];
            b.ends[i] = ends[i];
        }
        b
    }

    /// Quadratic-time reference: for each step, sum lambda-weighted
    /// k-step temporal differences within the episode segment.
    fn brute_force(batch: &TrajectoryBatch, gamma: f64, lambda: f64) -> Vec<f64> {
        let n = batch.len();
        let mut adv = vec![0.0; n];
        for t in 0..n {
            // Walk forward to the end of this step's episode segment.
            let mut stop = t;
            while !batch.ends[stop] {
                stop += 1;
            }
            let mut total = 0.0;
            for (k, s) in (t..=stop).enumerate() {
                let bootstrap = if batch.terminals[s] {
                    0.0
                } else {
                    batch.next_values[s]
                };
                let delta = batch.rewards[s] + gamma * bootstrap - batch.values[s];
                total += (gamma * lambda).powi(k as i32) * delta;
            }
            adv[t] = total;
        }
        adv
    }

    fn normalize(mut a: Vec<f64>) -> Vec<f64> {
        let n = a.len() as f64;
        let mean = a.iter().sum::<f64>() / n;
        let var = a.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let scale = 1.0 / (var.sqrt() + 1e-8);
        for x in &mut a {
            *x = (*x - mean) * scale;
        }
        a
    }

    #[test]
    fn matches_brute_force_on_random_batches() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..40);
            let mut rewards = Vec::new();
            let mut values = Vec::new();
            let mut next_values = Vec::new();
            let mut terminals = Vec::new();
            let mut ends = Vec::new();
            for i in 0..n {
                rewards.push(rng.gen_range(-1.0..1.0));
                values.push(rng.gen_range(-1.0..1.0));
                next_values.push(rng.gen_range(-1.0..1.0));
                let end = i + 1 == n || rng.gen_bool(0.2);
                ends.push(end);
                terminals.push(end && rng.gen_bool(0.5));
            }
            let mut batch = batch_from(&rewards, &values, &next_values, &terminals, &ends);
            let gamma = rng.gen_range(0.9..1.0);
            let lambda = rng.gen_range(0.8..1.0);
            let raw = brute_force(&batch, gamma, lambda);
            gae_advantages(&mut batch, gamma, lambda).unwrap();
            let want = normalize(raw.clone());
            for t in 0..n {
                assert!(
                    (batch.advantages[t] - want[t]).abs() < 1e-10,
                    "normalized adv mismatch at {t}"
                );
                assert!(
                    (batch.returns[t] - (raw[t] + values[t])).abs() < 1e-10,
                    "return mismatch at {t}"
                );
            }
        }
    }

    #[test]
    fn terminal_episode_with_unit_discount_telescopes() {
        // gamma = lambda = 1 and a terminal end: the return target at t is
        // the plain reward-to-go, independent of the value estimates.
        let rewards = [1.0, 2.0, 3.0];
        let values = [0.3, -0.4, 0.7];
        let next_values = [0.9, 0.9, 0.9];
        let terminals = [false, false, true];
        let ends = [false, false, true];
        let mut batch = batch_from(&rewards, &values, &next_values, &terminals, &ends);
        // Mid-episode steps bootstrap from the next value estimate.
        batch.next_values[0] = values[1];
        batch.next_values[1] = values[2];
        gae_advantages(&mut batch, 1.0, 1.0).unwrap();
        assert!((batch.returns[0] - 6.0).abs() < 1e-12);
        assert!((batch.returns[1] - 5.0).abs() < 1e-12);
        assert!((batch.returns[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_bootstraps_but_terminal_does_not() {
        let rewards = [1.0, 1.0];
        let values = [0.0, 0.0];
        let next_values = [5.0, 5.0];
        // Two one-step segments: first truncated, second terminal.
        let terminals = [false, true];
        let ends = [true, true];
        let mut batch = batch_from(&rewards, &values, &next_values, &terminals, &ends);
        gae_advantages(&mut batch, 0.5, 1.0).unwrap();
        assert!((batch.returns[0] - 3.5).abs() < 1e-12); // 1 + 0.5 * 5
        assert!((batch.returns[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn advantages_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 64;
        let mut b = TrajectoryBatch::with_dims(1, 1);
        for _ in 0..n {
            b.push(&[0.0], &[0.0], 0.0, rng.gen_range(-2.0..2.0), 0.1);
        }
        *b.ends.last_mut().unwrap() = true;
        gae_advantages(&mut b, 0.99, 0.95).unwrap();
        let mean: f64 = b.advantages.iter().sum::<f64>() / n as f64;
        let var: f64 = b.advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-12);
        assert!((var.sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_shapes_and_parameters() {
        let mut empty = TrajectoryBatch::with_dims(1, 1);
        assert!(gae_advantages(&mut empty, 0.99, 0.95).is_err());

        let mut open_end = batch_from(&[1.0], &[0.0], &[0.0], &[false], &[false]);
        assert!(gae_advantages(&mut open_end, 0.99, 0.95).is_err());

        let mut ok = batch_from(&[1.0], &[0.0], &[0.0], &[false], &[true]);
        assert!(gae_advantages(&mut ok, 1.5, 0.95).is_err());
        assert!(gae_advantages(&mut ok, 0.99, -0.1).is_err());
        assert!(gae_advantages(&mut ok, 0.99, 0.95).is_ok());
    }
}
