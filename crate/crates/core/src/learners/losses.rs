//! Loss functions of the learner updates together with their analytic
//! parameter gradients.

use serde::{Deserialize, Serialize};

use crate::neuronet::MlpGenome;

/// Affine map from a tanh actor output in `[-1, 1]` to `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionScale {
    pub low: f64,
    pub high: f64,
}

impl ActionScale {
    pub fn half_range(&self) -> f64 {
        0.5 * (self.high - self.low)
    }

    pub fn apply(&self, squashed: f64) -> f64 {
        0.5 * (self.high + self.low) + self.half_range() * squashed
    }
}

fn critic_input(state: &[f64], action: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(state.len() + action.len());
    x.extend_from_slice(state);
    x.extend_from_slice(action);
    x
}

/// `mean_i (targets[i] - net(inputs[i])[outputs[i]])^2`.
pub fn q_regression_loss(net: &MlpGenome, inputs: &[Vec<f64>], outputs: &[usize], targets: &[f64]) -> f64 {
    let n = inputs.len() as f64;
    inputs
        .iter()
        .zip(outputs)
        .zip(targets)
        .map(|((x, &k), y)| (y - net.forward(x)[k]).powi(2))
        .sum::<f64>()
        / n
}

/// Loss and its gradient with the targets held constant.
pub fn q_regression_grad(net: &MlpGenome, inputs: &[Vec<f64>], outputs: &[usize], targets: &[f64]) -> (f64, Vec<f64>) {
    let n = inputs.len() as f64;
    let mut grads = vec![0.0; net.total_params()];
    let mut loss = 0.0;
    let mut g_out = vec![0.0; net.output_dim()];
    for ((x, &k), y) in inputs.iter().zip(outputs).zip(targets) {
        let trace = net.forward_trace(x);
        let err = trace.output()[k] - y;
        loss += err * err;
        g_out.fill(0.0);
        g_out[k] = 2.0 * err / n;
        net.backward(&trace, &g_out, &mut grads);
    }
    (loss / n, grads)
}

/// Deterministic actor output mapped into the action box.
pub fn actor_action(actor: &MlpGenome, scale: &ActionScale, state: &[f64]) -> Vec<f64> {
    actor.forward(state).into_iter().map(|u| scale.apply(u)).collect()
}

/// `mean_i critic(s_i, actor(s_i))`, the quantity the actor ascends.
pub fn actor_objective(actor: &MlpGenome, critic: &MlpGenome, scale: &ActionScale, states: &[Vec<f64>]) -> f64 {
    let n = states.len() as f64;
    states
        .iter()
        .map(|s| critic.forward(&critic_input(s, &actor_action(actor, scale, s)))[0])
        .sum::<f64>()
        / n
}

/// Actor loss (the negated objective) and its gradient with respect to the
/// actor's parameters, back-propagated through the critic's action inputs.
pub fn actor_loss_grad(actor: &MlpGenome, critic: &MlpGenome, scale: &ActionScale, states: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = states.len() as f64;
    let obs_dim = states.first().map_or(0, Vec::len);
    let mut grads = vec![0.0; actor.total_params()];
    let mut critic_scratch = vec![0.0; critic.total_params()];
    let mut objective = 0.0;
    for s in states {
        let actor_trace = actor.forward_trace(s);
        let action: Vec<f64> = actor_trace.output().iter().map(|u| scale.apply(*u)).collect();
        let critic_trace = critic.forward_trace(&critic_input(s, &action));
        objective += critic_trace.output()[0];
        let d_input = critic.backward(&critic_trace, &[-1.0 / n], &mut critic_scratch);
        let d_squashed: Vec<f64> = d_input[obs_dim..].iter().map(|g| g * scale.half_range()).collect();
        actor.backward(&actor_trace, &d_squashed, &mut grads);
    }
    (-objective / n, grads)
}
