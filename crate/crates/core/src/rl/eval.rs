//! Deterministic policy evaluation: mean actions, no observation noise,
//! no domain randomization, a scripted speed command, and a full trace.

use crate::error::Error;
use crate::gait::GaitSpec;
use crate::sim::{DomainRandomization, Morphology};
use crate::trace::{Trace, TraceRow};
use crate::Result;

use super::env::{EpisodeConfig, GaitEnv, CONTROL_DT};
use super::net::{MlpCache, PolicyParams, ACTION_DIM};

/// Speed command as a function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum CommandSchedule {
    Constant(f64),
    /// Piecewise constant: (start time, speed) pairs sorted by time, the
    /// first at time zero.
    Steps(Vec<(f64, f64)>),
    /// Linear ramp across the whole run.
    Ramp { from: f64, to: f64 },
}

impl CommandSchedule {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match self {
            CommandSchedule::Constant(v) => {
                if !finite(*v) {
                    return Err(Error::param("v_cmd", "must be finite", *v));
                }
            }
            CommandSchedule::Steps(steps) => {
                if steps.is_empty() {
                    return Err(Error::param("schedule", "needs at least one step", 0.0));
                }
                if steps[0].0 != 0.0 {
                    return Err(Error::param(
                        "schedule",
                        "first step must start at time zero",
                        steps[0].0,
                    ));
                }
                for pair in steps.windows(2) {
                    if pair[1].0 <= pair[0].0 {
                        return Err(Error::param(
                            "schedule",
                            "step times must increase",
                            pair[1].0,
                        ));
                    }
                }
                if steps.iter().any(|(t, v)| !finite(*t) || !finite(*v)) {
                    return Err(Error::param("schedule", "entries must be finite", 0.0));
                }
            }
            CommandSchedule::Ramp { from, to } => {
                if !finite(*from) || !finite(*to) {
                    return Err(Error::param("v_cmd", "ramp ends must be finite", *from));
                }
            }
        }
        Ok(())
    }

    /// Commanded speed at time `t` of a run lasting `duration`.
    pub fn value(&self, t: f64, duration: f64) -> f64 {
        match self {
            CommandSchedule::Constant(v) => *v,
            CommandSchedule::Steps(steps) => {
                let mut v = steps[0].1;
                for (start, speed) in steps {
                    if t >= *start {
                        v = *speed;
                    }
                }
                v
            }
            CommandSchedule::Ramp { from, to } => {
                let a = (t / duration).clamp(0.0, 1.0);
                from + (to - from) * a
            }
        }
    }
}

/// Aggregates over one evaluation rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    /// Control steps actually executed.
    pub steps: usize,
    /// Seconds simulated.
    pub duration: f64,
    /// Mean |v_x - v_cmd|.
    pub mean_abs_vx_err: f64,
    /// Mean contact/clock agreement.
    pub agreement: f64,
    pub mean_reward: f64,
    pub mean_command: f64,
    pub mean_smoothness: f64,
    pub mean_temporal: f64,
    pub mean_morphological: f64,
    /// The robot fell before the scheduled end.
    pub fell: bool,
    /// Physics faulted before the scheduled end.
    pub faulted: bool,
}

/// Roll the mean policy out for `duration` seconds and record a trace.
pub fn evaluate(
    params: &PolicyParams,
    morph: &Morphology,
    gait: &GaitSpec,
    schedule: &CommandSchedule,
    duration: f64,
    kappa: f64,
    seed: u64,
) -> Result<(Trace, EvalSummary)> {
    schedule.validate()?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::param("duration", "must be positive", duration));
    }

    let v0 = schedule.value(0.0, duration);
    let mut episode = EpisodeConfig::new(gait.with_command(v0));
    episode.max_duration = duration;
    episode.domain = DomainRandomization::none();
    episode.kappa = kappa;
    episode.timing_noise = false;
    episode.start_jitter = false;
    let mut env = GaitEnv::new(morph.clone(), episode, seed, 1)?;
    let mut obs = env.reset()?;
    let mut pi_cache = MlpCache::for_net(&params.pi);

    let total_steps = (duration / CONTROL_DT).round() as usize;
    let mut trace = Trace::default();
    let mut sums = [0.0f64; 7]; // reward, cmd, smooth, tem, mor, verr, agree
    let mut fell = false;
    let mut faulted = false;

    for k in 0..total_steps {
        let t = k as f64 * CONTROL_DT;
        let v = schedule.value(t, duration);
        if v != env.command().v_x {
            env.override_command(v)?;
        }

        params.policy_mean(&obs, &mut pi_cache);
        let action: [f64; ACTION_DIM] = pi_cache.output().try_into().unwrap();
        let step = env.step(&action)?;
        obs = step.obs;

        if step.faulted {
            faulted = true;
            trace.faulted = true;
            break;
        }

        trace.push(TraceRow {
            time: env.state().time,
            v_cmd: v,
            lin_vel: step.snapshot.lin_vel,
            yaw_rate: step.snapshot.yaw_rate,
            phases: step.snapshot.phases,
            contact: step.contact,
            grf: step.snapshot.foot_force,
            foot_speed: step.snapshot.foot_speed,
            r_cmd: step.breakdown.command,
            r_smooth: step.breakdown.smoothness,
            r_tem: step.breakdown.temporal,
            r_mor: step.breakdown.morphological,
            total: step.breakdown.total,
            dir: if env.clock().direction().sign() >= 0.0 {
                1
            } else {
                -1
            },
        });
        sums[0] += step.breakdown.total;
        sums[1] += step.breakdown.command;
        sums[2] += step.breakdown.smoothness;
        sums[3] += step.breakdown.temporal;
        sums[4] += step.breakdown.morphological;
        sums[5] += (step.snapshot.lin_vel[0] - v).abs();
        sums[6] += step.agreement;

        if step.done {
            fell = true;
            break;
        }
        if step.truncated {
            break;
        }
    }

    let n = trace.len().max(1) as f64;
    let summary = EvalSummary {
        steps: trace.len(),
        duration: trace.len() as f64 * CONTROL_DT,
        mean_abs_vx_err: sums[5] / n,
        agreement: sums[6] / n,
        mean_reward: sums[0] / n,
        mean_command: sums[1] / n,
        mean_smoothness: sums[2] / n,
        mean_temporal: sums[3] / n,
        mean_morphological: sums[4] / n,
        fell,
        faulted,
    };
    Ok((trace, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::GaitFamily;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_policy() -> PolicyParams {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        PolicyParams::new(&[16], -0.5, &mut rng)
    }

    #[test]
    fn schedules_evaluate() {
        let c = CommandSchedule::Constant(0.3);
        assert_eq!(c.value(0.0, 10.0), 0.3);
        assert_eq!(c.value(9.0, 10.0), 0.3);

        let s = CommandSchedule::Steps(vec![(0.0, 0.1), (2.0, 0.4), (5.0, -0.2)]);
        s.validate().unwrap();
        assert_eq!(s.value(0.0, 10.0), 0.1);
        assert_eq!(s.value(1.99, 10.0), 0.1);
        assert_eq!(s.value(2.0, 10.0), 0.4);
        assert_eq!(s.value(7.0, 10.0), -0.2);

        let r = CommandSchedule::Ramp { from: 0.0, to: 1.0 };
        assert!((r.value(5.0, 10.0) - 0.5).abs() < 1e-15);
        assert_eq!(r.value(20.0, 10.0), 1.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(CommandSchedule::Constant(f64::NAN).validate().is_err());
        assert!(CommandSchedule::Steps(vec![]).validate().is_err());
        assert!(CommandSchedule::Steps(vec![(1.0, 0.2)]).validate().is_err());
        assert!(
            CommandSchedule::Steps(vec![(0.0, 0.2), (0.0, 0.3)])
                .validate()
                .is_err()
        );
    }

    #[test]
    fn evaluation_produces_full_trace() {
        let params = test_policy();
        let gait = GaitSpec::named(GaitFamily::Trot, 0.2).unwrap();
        let (trace, summary) = evaluate(
            &params,
            &Morphology::default(),
            &gait,
            &CommandSchedule::Constant(0.2),
            1.0,
            32.0,
            0,
        )
        .unwrap();
        assert!(!summary.faulted);
        assert!(summary.steps > 0);
        assert_eq!(trace.len(), summary.steps);
        if !summary.fell {
            assert_eq!(trace.len(), 100);
        }
        for row in &trace.rows {
            assert!(row.total >= 0.0);
            assert_eq!(row.dir, 1);
            assert!((row.v_cmd - 0.2).abs() < 1e-15);
        }
        assert!((0.0..=1.0).contains(&summary.agreement));
    }

    #[test]
    fn evaluation_is_deterministic() {
        let params = test_policy();
        let gait = GaitSpec::named(GaitFamily::Trot, 0.2).unwrap();
        let run = || {
            evaluate(
                &params,
                &Morphology::default(),
                &gait,
                &CommandSchedule::Constant(0.2),
                0.5,
                32.0,
                3,
            )
            .unwrap()
        };
        let (ta, sa) = run();
        let (tb, sb) = run();
        assert_eq!(ta, tb);
        assert_eq!(sa, sb);
    }

    #[test]
    fn reversed_command_flags_direction() {
        let params = test_policy();
        let gait = GaitSpec::named(GaitFamily::Trot, 0.2).unwrap();
        let schedule = CommandSchedule::Steps(vec![(0.0, 0.2), (0.2, -0.2)]);
        let (trace, _) = evaluate(
            &params,
            &Morphology::default(),
            &gait,
            &schedule,
            0.5,
            32.0,
            0,
        )
        .unwrap();
        assert_eq!(trace.rows[0].dir, 1);
        if let Some(last) = trace.rows.last() {
            if trace.len() > 25 {
                assert_eq!(last.dir, -1);
            }
        }
    }
}
