//! Line-oriented sectioned `key = value` run configuration.
//!
//! The format is deliberately minimal: `[section]` headers, one `key = value`
//! per line, `#` comments, blank lines ignored. Unknown sections and keys are
//! rejected with the offending line number; omitted keys keep the defaults
//! listed by `RunConfig::default`. Serialization writes every key back in a
//! canonical order with lossless float formatting, so a resolved config
//! re-parses to an identical value.

use std::fmt;
use std::path::PathBuf;

use gaitrl::gait::{GaitFamily, GaitSpec};
use gaitrl::reward::RewardWeights;
use gaitrl::rl::{EarlyStop, EpisodeConfig, PpoConfig, TrainConfig};
use gaitrl::sim::{DomainRandomization, Morphology};
use gaitrl::symmetry::DEFAULT_KAPPA;
use gaitrl::util::fmt_f64;

/// A config error with the line it came from (0 for whole-file problems).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.msg)
        } else {
            write!(f, "config line {}: {}", self.line, self.msg)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        msg: msg.into(),
    }
}

/// Phase offsets either by family name or spelled out (LH, LF, RF; RH = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaitChoice {
    Named(GaitFamily),
    Offsets([f64; 3]),
}

/// Everything a run needs, resolved against defaults. Morphology geometry
/// (hip placement, segment inertia, torso box) stays at the library values;
/// the config exposes the scalar knobs that affect dynamics and contact.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [run]
    pub seed: u64,
    pub output_dir: PathBuf,

    // [gait]
    pub gait: GaitChoice,
    pub v_cmd_range: (f64, f64),
    pub kappa: f64,
    pub pair_eps: f64,

    // [morphology]
    pub torso_mass: f64,
    pub head_mass: f64,
    pub head_offset: f64,
    pub upper_leg: f64,
    pub lower_leg: f64,
    pub torque_limit: f64,
    pub joint_inertia: f64,
    pub gravity: f64,
    pub stand_shoulder: f64,
    pub stand_knee: f64,

    // [contact]
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub tangential_damping: f64,
    pub friction: f64,

    // [reward]
    pub weights: RewardWeights,

    // [ppo]
    pub ppo: PpoConfig,

    // [train]
    pub num_envs: usize,
    pub total_steps: u64,
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
    pub action_scale: f64,
    pub max_duration: f64,
    pub parallel: bool,
    pub checkpoint_every: usize,
    /// Resume training from this checkpoint instead of a random init.
    pub init_checkpoint: Option<PathBuf>,
    pub timing_noise: bool,
    pub start_jitter: bool,
    pub domain_randomization: bool,
    /// Stop once rolling tracking error and agreement both clear these
    /// bounds (tracking at or below, agreement at or above).
    pub early_stop: Option<(f64, f64, usize)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = Morphology::default();
        let train = TrainConfig::new(EpisodeConfig::new(
            GaitSpec::named(GaitFamily::Trot, 0.2).expect("default gait"),
        ));
        RunConfig {
            seed: 0,
            output_dir: PathBuf::from("out"),
            gait: GaitChoice::Named(GaitFamily::Trot),
            v_cmd_range: (0.2, 0.2),
            kappa: DEFAULT_KAPPA,
            pair_eps: 0.01,
            torso_mass: m.torso_mass,
            head_mass: m.head_mass,
            head_offset: m.head_offset,
            upper_leg: m.upper_leg,
            lower_leg: m.lower_leg,
            torque_limit: m.torque_limit,
            joint_inertia: m.joint_inertia,
            gravity: m.gravity,
            stand_shoulder: m.stand_shoulder,
            stand_knee: m.stand_knee,
            contact_stiffness: m.contact_stiffness,
            contact_damping: m.contact_damping,
            tangential_damping: m.tangential_damping,
            friction: m.friction,
            weights: RewardWeights::default(),
            ppo: train.ppo,
            num_envs: train.num_envs,
            total_steps: train.total_steps,
            hidden: train.hidden,
            init_log_std: train.init_log_std,
            action_scale: 1.0,
            max_duration: 10.0,
            parallel: train.parallel,
            checkpoint_every: 50,
            init_checkpoint: None,
            timing_noise: true,
            start_jitter: true,
            domain_randomization: true,
            early_stop: None,
        }
    }
}

fn family_key(f: GaitFamily) -> &'static str {
    match f {
        GaitFamily::Pronk => "pronk",
        GaitFamily::Trot => "trot",
        GaitFamily::Bound => "bound",
        GaitFamily::HalfBound => "half_bound",
        GaitFamily::Gallop => "gallop",
        GaitFamily::Other => "other",
    }
}

pub fn parse_family(s: &str) -> Option<GaitFamily> {
    match s.to_ascii_lowercase().replace('-', "_").as_str() {
        "pronk" => Some(GaitFamily::Pronk),
        "trot" => Some(GaitFamily::Trot),
        "bound" => Some(GaitFamily::Bound),
        "half_bound" | "halfbound" => Some(GaitFamily::HalfBound),
        "gallop" => Some(GaitFamily::Gallop),
        _ => None,
    }
}

impl RunConfig {
    /// Parse a config text. Omitted keys keep defaults; unknown sections,
    /// unknown keys, duplicates, and malformed values are rejected with
    /// their line number.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        let mut seen: Vec<String> = Vec::new();
        let mut saw_name = false;
        let mut saw_offsets = false;
        let mut saw_v = false;
        let mut saw_v_range = false;
        let mut es_tracking: Option<f64> = None;
        let mut es_agreement: Option<f64> = None;
        let mut es_min_episodes: usize = 100;

        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            let line = match raw.find('#') {
                Some(at) => &raw[..at],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(n, "unterminated section header"))?
                    .trim();
                const SECTIONS: [&str; 7] =
                    ["run", "gait", "morphology", "contact", "reward", "ppo", "train"];
                if !SECTIONS.contains(&name) {
                    return Err(err(n, format!("unknown section [{name}]")));
                }
                if seen.iter().any(|s| s == name) {
                    return Err(err(n, format!("duplicate section [{name}]")));
                }
                seen.push(name.to_string());
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(n, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            let section = section
                .as_deref()
                .ok_or_else(|| err(n, format!("key '{key}' appears before any [section]")))?;

            let f = |v: &str| -> Result<f64, ConfigError> {
                v.parse()
                    .map_err(|_| err(n, format!("key '{key}': expected a number, got '{v}'")))
            };
            let u = |v: &str| -> Result<u64, ConfigError> {
                v.parse()
                    .map_err(|_| err(n, format!("key '{key}': expected an integer, got '{v}'")))
            };
            let b = |v: &str| -> Result<bool, ConfigError> {
                match v {
                    "true" => Ok(true),
                    "false" => Ok(false),
                    _ => Err(err(n, format!("key '{key}': expected true or false, got '{v}'"))),
                }
            };

            match (section, key) {
                ("run", "seed") => cfg.seed = u(value)?,
                ("run", "output_dir") => cfg.output_dir = PathBuf::from(value),

                ("gait", "name") => {
                    let fam = parse_family(value).ok_or_else(|| {
                        err(n, format!("unknown gait name '{value}'"))
                    })?;
                    cfg.gait = GaitChoice::Named(fam);
                    saw_name = true;
                }
                ("gait", "offsets") => {
                    let parts: Vec<f64> = value
                        .split_whitespace()
                        .map(|p| f(p))
                        .collect::<Result<_, _>>()?;
                    if parts.len() != 3 {
                        return Err(err(n, "offsets needs exactly three values (LH LF RF)"));
                    }
                    cfg.gait = GaitChoice::Offsets([parts[0], parts[1], parts[2]]);
                    saw_offsets = true;
                }
                ("gait", "v_cmd") => {
                    let v = f(value)?;
                    cfg.v_cmd_range = (v, v);
                    saw_v = true;
                }
                ("gait", "v_cmd_min") => {
                    cfg.v_cmd_range.0 = f(value)?;
                    saw_v_range = true;
                }
                ("gait", "v_cmd_max") => {
                    cfg.v_cmd_range.1 = f(value)?;
                    saw_v_range = true;
                }
                ("gait", "kappa") => cfg.kappa = f(value)?,
                ("gait", "pair_eps") => cfg.pair_eps = f(value)?,

                ("morphology", "torso_mass") => cfg.torso_mass = f(value)?,
                ("morphology", "head_mass") => cfg.head_mass = f(value)?,
                ("morphology", "head_offset") => cfg.head_offset = f(value)?,
                ("morphology", "upper_leg") => cfg.upper_leg = f(value)?,
                ("morphology", "lower_leg") => cfg.lower_leg = f(value)?,
                ("morphology", "torque_limit") => cfg.torque_limit = f(value)?,
                ("morphology", "joint_inertia") => cfg.joint_inertia = f(value)?,
                ("morphology", "gravity") => cfg.gravity = f(value)?,
                ("morphology", "stand_shoulder") => cfg.stand_shoulder = f(value)?,
                ("morphology", "stand_knee") => cfg.stand_knee = f(value)?,

                ("contact", "stiffness") => cfg.contact_stiffness = f(value)?,
                ("contact", "damping") => cfg.contact_damping = f(value)?,
                ("contact", "tangential_damping") => cfg.tangential_damping = f(value)?,
                ("contact", "friction") => cfg.friction = f(value)?,

                ("reward", "forward") => cfg.weights.forward = f(value)?,
                ("reward", "lateral") => cfg.weights.lateral = f(value)?,
                ("reward", "yaw") => cfg.weights.yaw = f(value)?,
                ("reward", "vertical") => cfg.weights.vertical = f(value)?,
                ("reward", "torque_delta") => cfg.weights.torque_delta = f(value)?,
                ("reward", "swing_force") => cfg.weights.swing_force = f(value)?,
                ("reward", "stance_speed") => cfg.weights.stance_speed = f(value)?,
                ("reward", "morphological") => cfg.weights.morphological = f(value)?,

                ("ppo", "learning_rate") => cfg.ppo.learning_rate = f(value)?,
                ("ppo", "batch_steps") => cfg.ppo.batch_steps = u(value)? as usize,
                ("ppo", "gamma") => cfg.ppo.gamma = f(value)?,
                ("ppo", "lambda") => cfg.ppo.lambda = f(value)?,
                ("ppo", "clip") => cfg.ppo.clip = f(value)?,
                ("ppo", "epochs") => cfg.ppo.epochs = u(value)? as usize,
                ("ppo", "minibatch") => cfg.ppo.minibatch = u(value)? as usize,
                ("ppo", "entropy_coef") => cfg.ppo.entropy_coef = f(value)?,
                ("ppo", "value_coef") => cfg.ppo.value_coef = f(value)?,
                ("ppo", "max_grad_norm") => cfg.ppo.max_grad_norm = f(value)?,

                ("train", "num_envs") => cfg.num_envs = u(value)? as usize,
                ("train", "total_steps") => cfg.total_steps = u(value)?,
                ("train", "hidden") => {
                    let widths: Vec<usize> = value
                        .split_whitespace()
                        .map(|p| u(p).map(|x| x as usize))
                        .collect::<Result<_, _>>()?;
                    if widths.is_empty() {
                        return Err(err(n, "hidden needs at least one layer width"));
                    }
                    cfg.hidden = widths;
                }
                ("train", "init_log_std") => cfg.init_log_std = f(value)?,
                ("train", "action_scale") => cfg.action_scale = f(value)?,
                ("train", "max_duration") => cfg.max_duration = f(value)?,
                ("train", "parallel") => cfg.parallel = b(value)?,
                ("train", "checkpoint_every") => cfg.checkpoint_every = u(value)? as usize,
                ("train", "init_checkpoint") => {
                    cfg.init_checkpoint = Some(PathBuf::from(value));
                }
                ("train", "timing_noise") => cfg.timing_noise = b(value)?,
                ("train", "start_jitter") => cfg.start_jitter = b(value)?,
                ("train", "domain_randomization") => cfg.domain_randomization = b(value)?,
                ("train", "early_stop_tracking") => es_tracking = Some(f(value)?),
                ("train", "early_stop_agreement") => es_agreement = Some(f(value)?),
                ("train", "early_stop_min_episodes") => {
                    es_min_episodes = u(value)? as usize;
                }

                _ => {
                    return Err(err(
                        n,
                        format!("unknown key '{key}' in section [{section}]"),
                    ))
                }
            }
        }

        if saw_name && saw_offsets {
            return Err(err(0, "[gait] sets both name and offsets; pick one"));
        }
        if saw_v && saw_v_range {
            return Err(err(0, "[gait] sets both v_cmd and v_cmd_min/max; pick one"));
        }
        cfg.early_stop = match (es_tracking, es_agreement) {
            (Some(t), Some(a)) => Some((t, a, es_min_episodes)),
            (None, None) => None,
            _ => {
                return Err(err(
                    0,
                    "early_stop_tracking and early_stop_agreement must be set together",
                ))
            }
        };
        Ok(cfg)
    }

    /// Canonical serialization: every key, grouped by section, floats
    /// written losslessly. `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        fn push(s: &mut String, k: &str, v: String) {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        let mut s = String::new();
        s.push_str("[run]\n");
        push(&mut s, "seed", self.seed.to_string());
        push(
            &mut s,
            "output_dir",
            self.output_dir.to_string_lossy().into_owned(),
        );

        s.push_str("\n[gait]\n");
        match self.gait {
            GaitChoice::Named(fam) => push(&mut s, "name", family_key(fam).to_string()),
            GaitChoice::Offsets(o) => push(
                &mut s,
                "offsets",
                format!("{} {} {}", fmt_f64(o[0]), fmt_f64(o[1]), fmt_f64(o[2])),
            ),
        }
        if self.v_cmd_range.0 == self.v_cmd_range.1 {
            push(&mut s, "v_cmd", fmt_f64(self.v_cmd_range.0));
        } else {
            push(&mut s, "v_cmd_min", fmt_f64(self.v_cmd_range.0));
            push(&mut s, "v_cmd_max", fmt_f64(self.v_cmd_range.1));
        }
        push(&mut s, "kappa", fmt_f64(self.kappa));
        push(&mut s, "pair_eps", fmt_f64(self.pair_eps));

        s.push_str("\n[morphology]\n");
        push(&mut s, "torso_mass", fmt_f64(self.torso_mass));
        push(&mut s, "head_mass", fmt_f64(self.head_mass));
        push(&mut s, "head_offset", fmt_f64(self.head_offset));
        push(&mut s, "upper_leg", fmt_f64(self.upper_leg));
        push(&mut s, "lower_leg", fmt_f64(self.lower_leg));
        push(&mut s, "torque_limit", fmt_f64(self.torque_limit));
        push(&mut s, "joint_inertia", fmt_f64(self.joint_inertia));
        push(&mut s, "gravity", fmt_f64(self.gravity));
        push(&mut s, "stand_shoulder", fmt_f64(self.stand_shoulder));
        push(&mut s, "stand_knee", fmt_f64(self.stand_knee));

        s.push_str("\n[contact]\n");
        push(&mut s, "stiffness", fmt_f64(self.contact_stiffness));
        push(&mut s, "damping", fmt_f64(self.contact_damping));
        push(&mut s, "tangential_damping", fmt_f64(self.tangential_damping));
        push(&mut s, "friction", fmt_f64(self.friction));

        s.push_str("\n[reward]\n");
        push(&mut s, "forward", fmt_f64(self.weights.forward));
        push(&mut s, "lateral", fmt_f64(self.weights.lateral));
        push(&mut s, "yaw", fmt_f64(self.weights.yaw));
        push(&mut s, "vertical", fmt_f64(self.weights.vertical));
        push(&mut s, "torque_delta", fmt_f64(self.weights.torque_delta));
        push(&mut s, "swing_force", fmt_f64(self.weights.swing_force));
        push(&mut s, "stance_speed", fmt_f64(self.weights.stance_speed));
        push(&mut s, "morphological", fmt_f64(self.weights.morphological));

        s.push_str("\n[ppo]\n");
        push(&mut s, "learning_rate", fmt_f64(self.ppo.learning_rate));
        push(&mut s, "batch_steps", self.ppo.batch_steps.to_string());
        push(&mut s, "gamma", fmt_f64(self.ppo.gamma));
        push(&mut s, "lambda", fmt_f64(self.ppo.lambda));
        push(&mut s, "clip", fmt_f64(self.ppo.clip));
        push(&mut s, "epochs", self.ppo.epochs.to_string());
        push(&mut s, "minibatch", self.ppo.minibatch.to_string());
        push(&mut s, "entropy_coef", fmt_f64(self.ppo.entropy_coef));
        push(&mut s, "value_coef", fmt_f64(self.ppo.value_coef));
        push(&mut s, "max_grad_norm", fmt_f64(self.ppo.max_grad_norm));

        s.push_str("\n[train]\n");
        push(&mut s, "num_envs", self.num_envs.to_string());
        push(&mut s, "total_steps", self.total_steps.to_string());
        push(
            &mut s,
            "hidden",
            self.hidden
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        push(&mut s, "init_log_std", fmt_f64(self.init_log_std));
        push(&mut s, "action_scale", fmt_f64(self.action_scale));
        push(&mut s, "max_duration", fmt_f64(self.max_duration));
        push(&mut s, "parallel", self.parallel.to_string());
        push(&mut s, "checkpoint_every", self.checkpoint_every.to_string());
        if let Some(path) = &self.init_checkpoint {
            push(&mut s, "init_checkpoint", path.display().to_string());
        }
        push(&mut s, "timing_noise", self.timing_noise.to_string());
        push(&mut s, "start_jitter", self.start_jitter.to_string());
        push(
            &mut s,
            "domain_randomization",
            self.domain_randomization.to_string(),
        );
        if let Some((t, a, min_eps)) = self.early_stop {
            push(&mut s, "early_stop_tracking", fmt_f64(t));
            push(&mut s, "early_stop_agreement", fmt_f64(a));
            push(&mut s, "early_stop_min_episodes", min_eps.to_string());
        }
        s
    }

    /// The gait at the lower end of the command range (the range itself is
    /// sampled per episode during training).
    pub fn gait_spec(&self) -> gaitrl::Result<GaitSpec> {
        let v = self.v_cmd_range.0;
        match self.gait {
            GaitChoice::Named(fam) => GaitSpec::named(fam, v),
            GaitChoice::Offsets([lh, lf, rf]) => GaitSpec::new(lh, lf, rf, v),
        }
    }

    pub fn morphology(&self) -> Morphology {
        Morphology {
            torso_mass: self.torso_mass,
            head_mass: self.head_mass,
            head_offset: self.head_offset,
            upper_leg: self.upper_leg,
            lower_leg: self.lower_leg,
            torque_limit: self.torque_limit,
            joint_inertia: self.joint_inertia,
            gravity: self.gravity,
            stand_shoulder: self.stand_shoulder,
            stand_knee: self.stand_knee,
            contact_stiffness: self.contact_stiffness,
            contact_damping: self.contact_damping,
            tangential_damping: self.tangential_damping,
            friction: self.friction,
            ..Morphology::default()
        }
    }

    /// Resolve into the engine configuration. Checkpoints and metrics land
    /// under `output_dir`.
    pub fn to_train_config(&self) -> gaitrl::Result<TrainConfig> {
        let mut episode = EpisodeConfig::new(self.gait_spec()?);
        episode.v_cmd_range = self.v_cmd_range;
        episode.max_duration = self.max_duration;
        episode.kappa = self.kappa;
        episode.pair_eps = self.pair_eps;
        episode.action_scale = self.action_scale;
        episode.timing_noise = self.timing_noise;
        episode.start_jitter = self.start_jitter;
        episode.weights = self.weights;
        episode.domain = if self.domain_randomization {
            DomainRandomization::default()
        } else {
            DomainRandomization::none()
        };

        let mut train = TrainConfig::new(episode);
        train.morph = self.morphology();
        train.hidden = self.hidden.clone();
        train.init_log_std = self.init_log_std;
        train.ppo = self.ppo.clone();
        train.num_envs = self.num_envs;
        train.total_steps = self.total_steps;
        train.seed = self.seed;
        train.parallel = self.parallel;
        train.checkpoint_every = self.checkpoint_every;
        train.checkpoint_dir = Some(self.output_dir.join("checkpoints"));
        train.init_checkpoint = self.init_checkpoint.clone();
        train.early_stop = self.early_stop.map(|(t, a, min_episodes)| EarlyStop {
            tracking: t,
            agreement: a,
            min_episodes,
        });
        Ok(train)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.serialize();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn modified_config_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.seed = 42;
        cfg.gait = GaitChoice::Offsets([0.2, 0.5, 0.7]);
        cfg.v_cmd_range = (0.1, 0.45);
        cfg.kappa = 500.0;
        cfg.weights.morphological = 0.3;
        cfg.ppo.learning_rate = 1e-4;
        cfg.hidden = vec![64, 32, 16];
        cfg.early_stop = Some((0.1, 0.75, 50));
        cfg.domain_randomization = false;
        cfg.init_checkpoint = Some(PathBuf::from("warm/policy_final.ckpt"));
        let back = RunConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let cfg = RunConfig::parse("[gait]\nname = bound\nv_cmd = 0.3\n").unwrap();
        assert_eq!(cfg.gait, GaitChoice::Named(GaitFamily::Bound));
        assert_eq!(cfg.v_cmd_range, (0.3, 0.3));
        assert_eq!(cfg.num_envs, RunConfig::default().num_envs);
        assert_eq!(cfg.weights, RewardWeights::default());
    }

    #[test]
    fn unknown_key_names_line_and_key() {
        let e = RunConfig::parse("[gait]\nname = trot\nspeed = 0.2\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.msg.contains("'speed'"), "{e}");

        let e = RunConfig::parse("[rocket]\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.msg.contains("[rocket]"), "{e}");
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(RunConfig::parse("seed = 1\n").is_err(), "key before section");
        assert!(RunConfig::parse("[run]\nseed\n").is_err(), "missing =");
        assert!(RunConfig::parse("[run]\nseed = dog\n").is_err(), "bad int");
        assert!(RunConfig::parse("[run\n").is_err(), "unterminated header");
        assert!(
            RunConfig::parse("[gait]\nname = trot\noffsets = 0 0.5 0.5\n").is_err(),
            "name and offsets together"
        );
        assert!(
            RunConfig::parse("[train]\nearly_stop_tracking = 0.1\n").is_err(),
            "half an early-stop spec"
        );
        assert!(
            RunConfig::parse("[gait]\nname = trot\n[gait]\nname = bound\n").is_err(),
            "duplicate section"
        );
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# top comment\n\n[run]\nseed = 7 # trailing\n\n# another\n[gait]\nkappa = 64\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.kappa, 64.0);
    }

    #[test]
    fn resolves_to_engine_config() {
        let mut cfg = RunConfig::default();
        cfg.gait = GaitChoice::Named(GaitFamily::Bound);
        cfg.v_cmd_range = (0.2, 0.4);
        cfg.early_stop = Some((0.1, 0.75, 100));
        cfg.domain_randomization = false;
        let train = cfg.to_train_config().unwrap();
        assert_eq!(train.episode.v_cmd_range, (0.2, 0.4));
        assert_eq!(train.episode.gait.offsets(), [0.0, 0.5, 0.5, 0.0]);
        assert_eq!(train.episode.domain.mass_scale, (1.0, 1.0));
        assert_eq!(train.early_stop.unwrap().min_episodes, 100);
        assert_eq!(
            train.checkpoint_dir.as_deref(),
            Some(std::path::Path::new("out/checkpoints"))
        );
    }
}
