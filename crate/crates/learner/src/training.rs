use rand::Rng;

use fedring_traffic::Observation;

use crate::error::LearnerError;
use crate::network::QNetwork;
use crate::replay::Minibatch;

/// A flat gradient aligned index-for-index with `QNetwork::params`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
    pub source_agent: usize,
    pub round_index: u64,
}

/// Index of the largest Q-value, ties resolved to the lowest index.
pub fn greedy_action(q_values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &q) in q_values.iter().enumerate().skip(1) {
        if q > q_values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy action selection.
///
/// Consumes one uniform f64 draw for the explore/exploit decision and, only
/// when exploring, one more bounded integer draw — so replaying the same rng
/// stream reproduces the same actions.
pub fn act<R: Rng>(
    net: &QNetwork,
    obs: &Observation,
    epsilon: f64,
    rng: &mut R,
) -> Result<usize, LearnerError> {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    let coin: f64 = rng.random();
    if coin < epsilon {
        return Ok(rng.random_range(0..net.num_actions()));
    }
    let q = net.forward(&obs.as_array())?;
    Ok(greedy_action(&q))
}

fn td_target(
    target_net: &QNetwork,
    reward: f64,
    next_obs: &Observation,
    terminal: bool,
    gamma: f64,
) -> Result<f64, LearnerError> {
    if terminal {
        return Ok(reward);
    }
    let next_q = target_net.forward(&next_obs.as_array())?;
    let best = next_q
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(reward + gamma * best)
}

/// One-step Q-learning objective: mean squared TD error over the batch,
/// with `y = r` for terminal transitions and
/// `y = r + gamma * max_a' Q_target(next_obs, a')` otherwise.
pub fn td_loss(
    net: &QNetwork,
    target_net: &QNetwork,
    batch: &Minibatch,
    gamma: f64,
) -> Result<f64, LearnerError> {
    if !net.same_layout(target_net) {
        return Err(LearnerError::Shape(
            "online and target networks differ in layout".into(),
        ));
    }
    if batch.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for t in batch.transitions() {
        let q = net.forward(&t.obs.as_array())?;
        let y = td_target(target_net, t.reward, &t.next_obs, t.terminal, gamma)?;
        let residual = q[t.action_index] - y;
        sum += residual * residual;
    }
    Ok(sum / batch.len() as f64)
}

/// Exact analytic gradient of `td_loss` with respect to `net`'s parameters,
/// the target network held constant.
pub fn compute_gradient(
    net: &QNetwork,
    target_net: &QNetwork,
    batch: &Minibatch,
    gamma: f64,
) -> Result<Gradient, LearnerError> {
    if !net.same_layout(target_net) {
        return Err(LearnerError::Shape(
            "online and target networks differ in layout".into(),
        ));
    }
    let sizes = net.layer_sizes().to_vec();
    let n_layers = sizes.len() - 1;
    let mut grad = vec![0.0; net.param_len()];
    let inv_n = 1.0 / batch.len().max(1) as f64;

    // Flat offsets of each layer's weight block.
    let mut offsets = Vec::with_capacity(n_layers);
    let mut off = 0;
    for w in sizes.windows(2) {
        offsets.push(off);
        off += w[0] * w[1] + w[1];
    }

    for t in batch.transitions() {
        let acts = net.forward_cached(&t.obs.as_array())?;
        let q = &acts[n_layers];
        if t.action_index >= q.len() {
            return Err(LearnerError::Shape(format!(
                "action index {} out of range for {} actions",
                t.action_index,
                q.len()
            )));
        }
        let y = td_target(target_net, t.reward, &t.next_obs, t.terminal, gamma)?;
        // d(loss)/d(q_a) for the mean-squared objective.
        let mut delta = vec![0.0; q.len()];
        delta[t.action_index] = 2.0 * (q[t.action_index] - y) * inv_n;

        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let w_off = offsets[l];
            let b_off = w_off + n_in * n_out;
            let x = &acts[l];
            let weights = &net.params()[w_off..b_off];

            let mut upstream = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                if !d.is_finite() {
                    return Err(LearnerError::NonFinite { layer: l });
                }
                grad[b_off + o] += d;
                let g_row = &mut grad[w_off + o * n_in..w_off + (o + 1) * n_in];
                let w_row = &weights[o * n_in..(o + 1) * n_in];
                for i in 0..n_in {
                    g_row[i] += d * x[i];
                    upstream[i] += d * w_row[i];
                }
            }
            if l > 0 {
                // Hidden activations are tanh: derivative 1 - x^2.
                for (u, &xi) in upstream.iter_mut().zip(x.iter()) {
                    *u *= 1.0 - xi * xi;
                }
                delta = upstream;
            }
        }
    }

    if let Some(pos) = grad.iter().position(|g| !g.is_finite()) {
        // Locate the offending layer for the error report.
        let mut layer = 0;
        for (l, &o) in offsets.iter().enumerate() {
            if pos >= o {
                layer = l;
            }
        }
        return Err(LearnerError::NonFinite { layer });
    }

    Ok(Gradient {
        values: grad,
        source_agent: 0,
        round_index: 0,
    })
}

/// One plain gradient-descent step: `params' = params - lr * g`.
pub fn apply_gradient(
    net: &QNetwork,
    g: &Gradient,
    learning_rate: f64,
) -> Result<QNetwork, LearnerError> {
    if g.values.len() != net.param_len() {
        return Err(LearnerError::Shape(format!(
            "gradient has {} entries, network has {} parameters",
            g.values.len(),
            net.param_len()
        )));
    }
    let mut out = net.clone();
    for (p, &gv) in out.params_mut().iter_mut().zip(&g.values) {
        *p -= learning_rate * gv;
    }
    Ok(out)
}

/// Element-wise arithmetic mean of gradients; `round_index` becomes the max
/// of the inputs and `source_agent` is carried from the first.
pub fn merge_gradients(gs: &[Gradient]) -> Result<Gradient, LearnerError> {
    let first = gs.first().ok_or(LearnerError::EmptyMerge)?;
    let len = first.values.len();
    if gs.iter().any(|g| g.values.len() != len) {
        return Err(LearnerError::Shape(
            "gradients of different lengths cannot merge".into(),
        ));
    }
    let mut values = vec![0.0; len];
    for g in gs {
        for (acc, &v) in values.iter_mut().zip(&g.values) {
            *acc += v;
        }
    }
    let inv = 1.0 / gs.len() as f64;
    for v in &mut values {
        *v *= inv;
    }
    Ok(Gradient {
        values,
        source_agent: first.source_agent,
        round_index: gs.iter().map(|g| g.round_index).max().unwrap_or(0),
    })
}
