//! Policy and value networks: plain fully connected tanh MLPs over a flat
//! `f64` parameter vector, with hand-written backpropagation. The policy
//! head is a diagonal Gaussian with state-independent log standard
//! deviations. Checkpoints are a self-describing little-endian container.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::Error;
use crate::Result;

use super::obs::STACK_DIM;

/// Network action dimension: one position target per joint.
pub const ACTION_DIM: usize = 9;

const LOG_TAU: f64 = 1.837877066409345483560659472811; // ln(2 pi)

/// Dot product with four independent accumulators. The explicit
/// reassociation breaks the add dependency chain so the loop pipelines;
/// the summation order is fixed, keeping results run-to-run identical.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let (a4, a_rem) = a.split_at(a.len() & !3);
    let (b4, b_rem) = b.split_at(b.len() & !3);
    for (ca, cb) in a4.chunks_exact(4).zip(b4.chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (x, y) in a_rem.iter().zip(b_rem) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Shape of a fully connected network; parameters live externally in a
/// flat slice, layer by layer as row-major weights then biases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    sizes: Vec<usize>,
    /// Parameter offset of each layer.
    offsets: Vec<usize>,
    count: usize,
}

impl Mlp {
    /// `sizes` lists the input width, hidden widths, and output width.
    /// Hidden layers apply tanh; the output layer is linear.
    pub fn new(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "a network needs input and output sizes");
        assert!(sizes.iter().all(|s| *s > 0), "zero-width layer");
        let mut offsets = Vec::with_capacity(sizes.len() - 1);
        let mut count = 0;
        for w in sizes.windows(2) {
            offsets.push(count);
            count += w[0] * w[1] + w[1];
        }
        Mlp {
            sizes: sizes.to_vec(),
            offsets,
            count,
        }
    }

    pub fn param_count(&self) -> usize {
        self.count
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Uniform Xavier initialization.
    pub fn init_params<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut params = vec![0.0; self.count];
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (nin, nout) = (w[0], w[1]);
            let limit = (6.0 / (nin + nout) as f64).sqrt();
            let start = self.offsets[l];
            for p in &mut params[start..start + nin * nout] {
                *p = rng.gen_range(-limit..=limit);
            }
            // Biases start at zero.
        }
        params
    }

    /// Forward pass; activations land in `cache` for a later backward
    /// pass. Returns the linear output as a cache slice.
    pub fn forward<'c>(&self, params: &[f64], input: &[f64], cache: &'c mut MlpCache) -> &'c [f64] {
        debug_assert_eq!(params.len(), self.count);
        debug_assert_eq!(input.len(), self.sizes[0]);
        cache.acts[0].copy_from_slice(input);
        let layers = self.sizes.len() - 1;
        for l in 0..layers {
            let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
            let start = self.offsets[l];
            let weights = &params[start..start + nin * nout];
            let biases = &params[start + nin * nout..start + nin * nout + nout];
            let (before, after) = cache.acts.split_at_mut(l + 1);
            let x = &before[l];
            let y = &mut after[0];
            for (o, (yo, bias)) in y.iter_mut().zip(biases).enumerate() {
                let acc = bias + dot(&weights[o * nin..(o + 1) * nin], x);
                *yo = if l + 1 < layers { acc.tanh() } else { acc };
            }
        }
        &cache.acts[layers]
    }

    /// Accumulate parameter gradients for `d loss / d output = grad_out`
    /// into `grad_params`, using the activations of the latest forward
    /// pass through `cache`.
    pub fn backward(
        &self,
        params: &[f64],
        cache: &mut MlpCache,
        grad_out: &[f64],
        grad_params: &mut [f64],
    ) {
        debug_assert_eq!(grad_out.len(), self.output_dim());
        debug_assert_eq!(grad_params.len(), self.count);
        let layers = self.sizes.len() - 1;
        cache.delta.clear();
        cache.delta.extend_from_slice(grad_out);
        for l in (0..layers).rev() {
            let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
            let start = self.offsets[l];
            let weights = &params[start..start + nin * nout];
            let x = &cache.acts[l];
            let (gw, gb) = grad_params[start..start + nin * nout + nout].split_at_mut(nin * nout);
            for (o, d) in cache.delta.iter().enumerate() {
                gb[o] += d;
                let row = &mut gw[o * nin..(o + 1) * nin];
                for (g, xi) in row.iter_mut().zip(x.iter()) {
                    *g += d * xi;
                }
            }
            if l == 0 {
                break;
            }
            // Propagate to the previous layer through W and tanh.
            cache.prev_delta.clear();
            cache.prev_delta.resize(nin, 0.0);
            for (o, d) in cache.delta.iter().enumerate() {
                let row = &weights[o * nin..(o + 1) * nin];
                for (p, w) in cache.prev_delta.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            for (p, a) in cache.prev_delta.iter_mut().zip(x.iter()) {
                *p *= 1.0 - a * a;
            }
            std::mem::swap(&mut cache.delta, &mut cache.prev_delta);
        }
    }
}

/// Reusable activation and delta buffers for one network.
#[derive(Debug, Clone)]
pub struct MlpCache {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    prev_delta: Vec<f64>,
}

impl MlpCache {
    pub fn for_net(net: &Mlp) -> Self {
        MlpCache {
            acts: net.sizes.iter().map(|s| vec![0.0; *s]).collect(),
            delta: Vec::new(),
            prev_delta: Vec::new(),
        }
    }

    /// The network output from the latest forward pass.
    pub fn output(&self) -> &[f64] {
        self.acts.last().unwrap()
    }
}

/// Diagonal Gaussian over actions: a mean network plus state-independent
/// log standard deviations.
#[derive(Debug, Clone, Copy)]
pub struct GaussianPolicy;

impl GaussianPolicy {
    /// Joint log-density of `action` under the given mean and log-stds.
    pub fn log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
        let mut lp = 0.0;
        for ((m, ls), a) in mean.iter().zip(log_std).zip(action) {
            let z = (a - m) * (-ls).exp();
            lp += -0.5 * z * z - ls - 0.5 * LOG_TAU;
        }
        lp
    }

    /// Differential entropy; depends only on the log-stds.
    pub fn entropy(log_std: &[f64]) -> f64 {
        log_std.iter().map(|ls| ls + 0.5 * (1.0 + LOG_TAU)).sum()
    }

    /// Draw an action and return it with its log-density.
    pub fn sample<R: Rng>(mean: &[f64], log_std: &[f64], rng: &mut R) -> (Vec<f64>, f64) {
        let action: Vec<f64> = mean
            .iter()
            .zip(log_std)
            .map(|(m, ls)| m + ls.exp() * standard_normal(rng))
            .collect();
        let lp = Self::log_prob(mean, log_std, &action);
        (action, lp)
    }
}

/// Standard normal draw via the Box-Muller transform; consumes exactly two
/// uniform samples, keeping the stream layout deterministic.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    // 1 - u1 lies in (0, 1], keeping the log finite.
    (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// All trainable parameters: policy mean network, action log-stds, and the
/// value network, stored as one flat vector.
///
/// Layout: `[policy params | log stds (ACTION_DIM) | value params]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub pi: Mlp,
    pub vf: Mlp,
    pub theta: Vec<f64>,
}

/// Checkpoint container identification.
const CHECKPOINT_MAGIC: &[u8; 8] = b"GAITPOL\n";
const CHECKPOINT_VERSION: u32 = 1;

impl PolicyParams {
    /// Fresh networks over the stacked observation with the given hidden
    /// widths. The policy output layer starts small so initial actions
    /// stay near the standing pose.
    pub fn new<R: Rng>(hidden: &[usize], init_log_std: f64, rng: &mut R) -> Self {
        Self::with_input_dim(STACK_DIM, hidden, init_log_std, rng)
    }

    /// As [`PolicyParams::new`] with an explicit input width (used by
    /// small test networks).
    pub fn with_input_dim<R: Rng>(
        input_dim: usize,
        hidden: &[usize],
        init_log_std: f64,
        rng: &mut R,
    ) -> Self {
        let mut pi_sizes = vec![input_dim];
        pi_sizes.extend_from_slice(hidden);
        pi_sizes.push(ACTION_DIM);
        let mut vf_sizes = vec![input_dim];
        vf_sizes.extend_from_slice(hidden);
        vf_sizes.push(1);
        let pi = Mlp::new(&pi_sizes);
        let vf = Mlp::new(&vf_sizes);

        let mut theta = pi.init_params(rng);
        // Shrink the final policy layer: early actions should perturb, not
        // fling, the pose.
        let last_start = *pi.offsets.last().unwrap();
        for p in &mut theta[last_start..] {
            *p *= 0.01;
        }
        theta.extend(std::iter::repeat(init_log_std).take(ACTION_DIM));
        theta.extend(vf.init_params(rng));
        PolicyParams { pi, vf, theta }
    }

    pub fn param_count(&self) -> usize {
        self.theta.len()
    }

    fn log_std_start(&self) -> usize {
        self.pi.param_count()
    }

    fn vf_start(&self) -> usize {
        self.pi.param_count() + ACTION_DIM
    }

    pub fn pi_params(&self) -> &[f64] {
        &self.theta[..self.log_std_start()]
    }

    pub fn log_std(&self) -> &[f64] {
        &self.theta[self.log_std_start()..self.vf_start()]
    }

    pub fn vf_params(&self) -> &[f64] {
        &self.theta[self.vf_start()..]
    }

    /// Gradient slices matching the parameter layout.
    pub fn split_grad<'g>(&self, grad: &'g mut [f64]) -> (&'g mut [f64], &'g mut [f64], &'g mut [f64]) {
        debug_assert_eq!(grad.len(), self.theta.len());
        let (pi_grad, rest) = grad.split_at_mut(self.log_std_start());
        let (ls_grad, vf_grad) = rest.split_at_mut(ACTION_DIM);
        (pi_grad, ls_grad, vf_grad)
    }

    /// Policy mean for one input.
    pub fn policy_mean<'c>(&self, input: &[f64], cache: &'c mut MlpCache) -> &'c [f64] {
        self.pi.forward(self.pi_params(), input, cache)
    }

    /// Value estimate for one input.
    pub fn value(&self, input: &[f64], cache: &mut MlpCache) -> f64 {
        self.vf.forward(self.vf_params(), input, cache)[0]
    }

    /// Write a self-describing checkpoint.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        let sizes = self.pi.sizes();
        out.extend_from_slice(&(sizes[0] as u32).to_le_bytes());
        out.extend_from_slice(&(ACTION_DIM as u32).to_le_bytes());
        let hidden = &sizes[1..sizes.len() - 1];
        out.extend_from_slice(&(hidden.len() as u32).to_le_bytes());
        for h in hidden {
            out.extend_from_slice(&(*h as u32).to_le_bytes());
        }
        out.extend_from_slice(&(self.theta.len() as u64).to_le_bytes());
        for v in &self.theta {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&out)?;
        Ok(())
    }

    /// Load a checkpoint written by [`PolicyParams::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cur = Cursor {
            bytes: &bytes,
            at: 0,
        };

        if cur.take(8)? != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic string".into()));
        }
        let version = cur.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version}"
            )));
        }
        let input_dim = cur.u32()? as usize;
        let action_dim = cur.u32()? as usize;
        if action_dim != ACTION_DIM {
            return Err(Error::Checkpoint(format!(
                "checkpoint action dimension {action_dim}, expected {ACTION_DIM}"
            )));
        }
        let hidden_len = cur.u32()? as usize;
        if hidden_len > 16 {
            return Err(Error::Checkpoint(format!(
                "implausible hidden layer count {hidden_len}"
            )));
        }
        let mut hidden = Vec::with_capacity(hidden_len);
        for _ in 0..hidden_len {
            hidden.push(cur.u32()? as usize);
        }
        let count = u64::from_le_bytes(cur.take(8)?.try_into().unwrap()) as usize;

        let mut pi_sizes = vec![input_dim];
        pi_sizes.extend_from_slice(&hidden);
        pi_sizes.push(ACTION_DIM);
        let mut vf_sizes = vec![input_dim];
        vf_sizes.extend_from_slice(&hidden);
        vf_sizes.push(1);
        let pi = Mlp::new(&pi_sizes);
        let vf = Mlp::new(&vf_sizes);
        let expect = pi.param_count() + ACTION_DIM + vf.param_count();
        if count != expect {
            return Err(Error::Checkpoint(format!(
                "parameter count {count} does not match topology ({expect})"
            )));
        }
        let mut theta = Vec::with_capacity(count);
        for _ in 0..count {
            theta.push(f64::from_le_bytes(cur.take(8)?.try_into().unwrap()));
        }
        if cur.at != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Checkpoint("non-finite parameter".into()));
        }
        Ok(PolicyParams { pi, vf, theta })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(Error::Checkpoint("file truncated".into()));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// Alias kept for discoverability: the value network is the second half of
/// [`PolicyParams`].
pub type ValueNet = Mlp;
