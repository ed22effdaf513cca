//! Quick throughput and learning probe for the full train loop.
//!
//! Args: [total_steps] [action_scale] [init_log_std] [hidden_width] [seed] [lr] [num_envs]

use gaitrl::gait::{GaitFamily, GaitSpec};
use gaitrl::rl::{train, EpisodeConfig, PpoConfig, TrainConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let arg = |i: usize, d: f64| -> f64 {
        args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d)
    };
    let total = arg(1, 3.0 * 8192.0) as u64;
    let scale = arg(2, 1.0);
    let log_std = arg(3, -0.5);
    let width = arg(4, 128.0) as usize;
    let seed = arg(5, 0.0) as u64;
    let lr = arg(6, 3e-4);
    let envs = arg(7, 64.0) as usize;

    let gait = GaitSpec::named(GaitFamily::Trot, 0.2).unwrap();
    let mut episode = EpisodeConfig::new(gait);
    episode.action_scale = scale;
    let mut cfg = TrainConfig::new(episode);
    cfg.hidden = vec![width, width];
    cfg.init_log_std = log_std;
    cfg.num_envs = envs;
    cfg.total_steps = total;
    cfg.seed = seed;
    cfg.ppo = PpoConfig {
        learning_rate: lr,
        ..PpoConfig::default()
    };
    cfg.parallel = true;
    let t0 = Instant::now();
    let out = train(&cfg, |r| {
        eprintln!(
            "upd {:3} steps {:7} rew {:+.3} cmd {:+.3} tem {:+.3} mor {:+.3} verr {:.3} agree {:.3} | eps {:4} roll_verr {:.3} roll_agree {:.3} | kl {:+.4} ent {:+.2} vf {:.2} gn {:.2} | {:.0}s",
            r.update, r.env_steps, r.mean_reward, r.mean_command, r.mean_temporal,
            r.mean_morphological, r.mean_abs_vx_err, r.mean_agreement,
            r.episodes, r.rolling_tracking, r.rolling_agreement,
            r.approx_kl, r.entropy, r.value_loss, r.grad_norm,
            t0.elapsed().as_secs_f64()
        );
    })
    .unwrap();
    let dt = t0.elapsed().as_secs_f64();
    eprintln!(
        "total: {} steps in {:.1}s = {:.0} steps/s",
        out.env_steps, dt, out.env_steps as f64 / dt,
    );
}
