use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::LearnerError;

/// Observations are 6-component vectors.
pub const OBSERVATION_DIM: usize = 6;

/// Fixed input pre-scaling applied by the forward pass when the input layer
/// is observation-shaped. Gap components arrive normalized by the full track
/// length, which squashes the car-following range into a few percent of the
/// input scale; amplifying them keeps the first layer sensitive where the
/// control problem lives.
pub(crate) const INPUT_SCALE: [f64; OBSERVATION_DIM] = [1.0, 1.0, 8.0, 1.0, 8.0, 1.0];

/// Magic bytes heading a serialized parameter vector.
const MODEL_MAGIC: &[u8; 4] = b"QNET";

/// A fully-connected Q-network: tanh hidden layers, identity output.
///
/// Parameters live in one flat vector laid out layer by layer, weights
/// first then biases: for layer `l` mapping `n_in -> n_out`, the weight
/// `W[o][i]` sits at `offset + o * n_in + i` (row-major) and is followed by
/// the `n_out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
}

fn param_count(layer_sizes: &[usize]) -> usize {
    layer_sizes
        .windows(2)
        .map(|w| w[0] * w[1] + w[1])
        .sum()
}

impl QNetwork {
    /// Zero-initialized network.
    pub fn zeros(layer_sizes: Vec<usize>) -> Result<Self, LearnerError> {
        Self::validate_sizes(&layer_sizes)?;
        let n = param_count(&layer_sizes);
        Ok(Self {
            layer_sizes,
            params: vec![0.0; n],
        })
    }

    /// Layer-wise uniform init in `±sqrt(6 / (fan_in + fan_out))`, from a
    /// ChaCha8 stream seeded with `seed`.
    pub fn xavier_init(layer_sizes: Vec<usize>, seed: u64) -> Result<Self, LearnerError> {
        let mut net = Self::zeros(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut offset = 0;
        for w in net.layer_sizes.clone().windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let limit = (6.0 / (n_in + n_out) as f64).sqrt();
            for p in &mut net.params[offset..offset + n_in * n_out] {
                *p = (rng.random::<f64>() * 2.0 - 1.0) * limit;
            }
            // Biases stay zero.
            offset += n_in * n_out + n_out;
        }
        Ok(net)
    }

    pub fn from_params(layer_sizes: Vec<usize>, params: Vec<f64>) -> Result<Self, LearnerError> {
        Self::validate_sizes(&layer_sizes)?;
        let expected = param_count(&layer_sizes);
        if params.len() != expected {
            return Err(LearnerError::Shape(format!(
                "expected {expected} parameters for layers {layer_sizes:?}, got {}",
                params.len()
            )));
        }
        Ok(Self {
            layer_sizes,
            params,
        })
    }

    fn validate_sizes(layer_sizes: &[usize]) -> Result<(), LearnerError> {
        if layer_sizes.len() < 2 {
            return Err(LearnerError::Shape(format!(
                "need at least input and output layers, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(LearnerError::Shape(format!(
                "zero-width layer in {layer_sizes:?}"
            )));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_len(&self) -> usize {
        self.params.len()
    }

    pub fn num_actions(&self) -> usize {
        *self.layer_sizes.last().expect("validated layout")
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.layer_sizes == other.layer_sizes
    }

    /// Adds a constant to every output bias, shifting all Q-values equally.
    pub fn offset_output_biases(&mut self, delta: f64) {
        let n_out = self.num_actions();
        let len = self.params.len();
        for p in &mut self.params[len - n_out..] {
            *p += delta;
        }
    }

    /// Deterministic forward pass; returns one Q-value per action.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, LearnerError> {
        if input.len() != self.layer_sizes[0] {
            return Err(LearnerError::Shape(format!(
                "input has {} components, network expects {}",
                input.len(),
                self.layer_sizes[0]
            )));
        }
        let mut x = self.scaled_input(input);
        let mut offset = 0;
        let last = self.layer_sizes.len() - 2;
        for (l, w) in self.layer_sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let biases = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let mut next = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &weights[o * n_in..(o + 1) * n_in];
                let mut z = biases[o];
                for i in 0..n_in {
                    z += row[i] * x[i];
                }
                next[o] = if l < last { z.tanh() } else { z };
            }
            x = next;
            offset += n_in * n_out + n_out;
        }
        Ok(x)
    }

    /// Observation-shaped inputs get the fixed component pre-scaling; other
    /// input widths pass through unchanged.
    fn scaled_input(&self, input: &[f64]) -> Vec<f64> {
        if input.len() == OBSERVATION_DIM {
            input
                .iter()
                .zip(INPUT_SCALE)
                .map(|(x, s)| x * s)
                .collect()
        } else {
            input.to_vec()
        }
    }

    /// Forward pass keeping post-activation values of every layer
    /// (activations[0] is the input) for backpropagation.
    pub(crate) fn forward_cached(&self, input: &[f64]) -> Result<Vec<Vec<f64>>, LearnerError> {
        if input.len() != self.layer_sizes[0] {
            return Err(LearnerError::Shape(format!(
                "input has {} components, network expects {}",
                input.len(),
                self.layer_sizes[0]
            )));
        }
        let mut acts = Vec::with_capacity(self.layer_sizes.len());
        acts.push(self.scaled_input(input));
        let mut offset = 0;
        let last = self.layer_sizes.len() - 2;
        for (l, w) in self.layer_sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let biases = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let x = acts.last().expect("has input");
            let mut next = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &weights[o * n_in..(o + 1) * n_in];
                let mut z = biases[o];
                for i in 0..n_in {
                    z += row[i] * x[i];
                }
                next[o] = if l < last { z.tanh() } else { z };
            }
            acts.push(next);
            offset += n_in * n_out + n_out;
        }
        Ok(acts)
    }

    /// Serializes to the checkpoint / model-message wire format:
    /// magic `QNET`, `u32` layer count, each layer size as `u32`, then all
    /// parameters as IEEE-754 `f64`; every integer and float little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(4 + 4 + 4 * self.layer_sizes.len() + 8 * self.params.len());
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&(self.layer_sizes.len() as u32).to_le_bytes());
        for &s in &self.layer_sizes {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        for &p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LearnerError> {
        let take = |range: std::ops::Range<usize>| -> Result<&[u8], LearnerError> {
            bytes
                .get(range)
                .ok_or_else(|| LearnerError::Deserialize("payload truncated".into()))
        };
        if take(0..4)? != MODEL_MAGIC {
            return Err(LearnerError::Deserialize("bad magic bytes".into()));
        }
        let n_layers = u32::from_le_bytes(take(4..8)?.try_into().unwrap()) as usize;
        if n_layers < 2 || n_layers > 64 {
            return Err(LearnerError::Deserialize(format!(
                "implausible layer count {n_layers}"
            )));
        }
        let mut layer_sizes = Vec::with_capacity(n_layers);
        let mut cursor = 8;
        for _ in 0..n_layers {
            let s = u32::from_le_bytes(take(cursor..cursor + 4)?.try_into().unwrap()) as usize;
            layer_sizes.push(s);
            cursor += 4;
        }
        Self::validate_sizes(&layer_sizes)
            .map_err(|e| LearnerError::Deserialize(e.to_string()))?;
        let expected = param_count(&layer_sizes);
        let body = take(cursor..cursor + 8 * expected)?;
        if bytes.len() != cursor + 8 * expected {
            return Err(LearnerError::Deserialize(format!(
                "expected {} payload bytes, got {}",
                cursor + 8 * expected,
                bytes.len()
            )));
        }
        let params = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            layer_sizes,
            params,
        })
    }
}
