#pragma once

#include <span>
#include <vector>

#include "mofir/agent/networks.hpp"
#include "mofir/env.hpp"

namespace mofir {

/// Minibatch of replayed transitions in network-ready form. States are kept
/// as (user, history) so they can be re-encoded with the current encoder.
template <typename Real>
struct UpdateBatch {
  std::vector<UserId> users;
  std::vector<std::vector<ItemId>> histories;
  std::vector<std::vector<ItemId>> next_histories;
  nn::Matrix<Real> actions;  // B x K*d stored proposal matrices
  nn::Matrix<Real> rewards;  // B x 2
  std::vector<bool> terminal;

  std::size_t size() const { return users.size(); }
};

// Every (transition, preference) pair is one row; row p = i * B + j pairs
// preference i with transition j.

template <typename Real>
nn::Matrix<Real> pair_preferences(std::span<const PreferenceVector> prefs, std::size_t batch) {
  nn::Matrix<Real> out(static_cast<nn::Index>(prefs.size() * batch), kNumObjectives);
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    for (std::size_t j = 0; j < batch; ++j) {
      const auto p = static_cast<nn::Index>(i * batch + j);
      out(p, 0) = static_cast<Real>(prefs[i].utility());
      out(p, 1) = static_cast<Real>(prefs[i].fairness());
    }
  }
  return out;
}

/// y = r + gamma * q_next componentwise; terminal rows do not bootstrap.
template <typename Real>
nn::Matrix<Real> bootstrap_targets(const nn::Matrix<Real>& rewards, const nn::Matrix<Real>& q_next,
                                   double gamma, const std::vector<bool>& terminal) {
  nn::Matrix<Real> y = rewards;
  for (nn::Index p = 0; p < y.rows(); ++p) {
    if (!terminal[static_cast<std::size_t>(p)]) y.row(p) += static_cast<Real>(gamma) * q_next.row(p);
  }
  return y;
}

template <typename Real>
void check_batch(const UpdateBatch<Real>& batch, std::span<const PreferenceVector> prefs) {
  if (batch.size() == 0) throw std::invalid_argument("update on an empty minibatch");
  if (prefs.empty()) throw std::invalid_argument("update without preferences");
}

/// Bootstrapped targets for every (transition, preference) pair: the target
/// actor's mean proposal at s' is scored by the target critic.
template <typename Real>
nn::Matrix<Real> critic_targets(const UpdateBatch<Real>& batch, std::span<const PreferenceVector> prefs,
                                const Actor<Real>& target_actor, const Critic<Real>& target_critic,
                                const EmbeddingTable& embeddings, double gamma) {
  check_batch(batch, prefs);
  const std::size_t copies = prefs.size();
  nn::Matrix<Real> next = encode_states<Real>(embeddings, target_actor.encoder(), target_actor.params,
                                              batch.users, batch.next_histories)
                              .replicate(static_cast<nn::Index>(copies), 1);
  nn::Matrix<Real> omega = pair_preferences<Real>(prefs, batch.size());
  nn::Matrix<Real> next_action = target_actor.mean(next, omega);
  nn::Matrix<Real> q_next = target_critic.forward(next, next_action, omega);
  std::vector<bool> terminal;
  for (std::size_t i = 0; i < copies; ++i) {
    terminal.insert(terminal.end(), batch.terminal.begin(), batch.terminal.end());
  }
  return bootstrap_targets<Real>(batch.rewards.replicate(static_cast<nn::Index>(copies), 1), q_next,
                                 gamma, terminal);
}

/// Mean over pairs of |y - Q(s, W, w)|^2. Accumulates the critic gradient;
/// `states` (B x state_dim) are treated as constants.
template <typename Real>
double critic_loss_and_grad(Critic<Real>& critic, const nn::Matrix<Real>& states,
                            const UpdateBatch<Real>& batch, std::span<const PreferenceVector> prefs,
                            const nn::Matrix<Real>& targets) {
  check_batch(batch, prefs);
  const auto copies = static_cast<nn::Index>(prefs.size());
  nn::MlpTape<Real> tape;
  nn::Matrix<Real> q = critic.forward(states.replicate(copies, 1), batch.actions.replicate(copies, 1),
                                      pair_preferences<Real>(prefs, batch.size()), &tape);
  if (q.rows() != targets.rows()) throw nn::ShapeError("critic targets do not match the batch");
  nn::Matrix<Real> diff = q - targets;
  const auto pairs = static_cast<Real>(q.rows());
  critic.backward(tape, (Real(2) / pairs) * diff);
  return static_cast<double>(diff.squaredNorm()) / static_cast<double>(q.rows());
}

/// Actor objective J = mean over pairs of w^T Q(s, mu(s, w), w). The gradient
/// of -J reaches the actor only through the mean proposal mu (the critic's
/// direct state input is held constant) and is accumulated into the actor's
/// parameters, GRU encoder included. The critic's own gradients are left
/// untouched.
///
/// `d_q_seed`, when given, replaces the default seed -w / P for d(-J)/dQ.
template <typename Real>
double actor_objective_and_grad(Actor<Real>& actor, Critic<Real>& critic,
                                const UpdateBatch<Real>& batch, std::span<const PreferenceVector> prefs,
                                const EmbeddingTable& embeddings,
                                const nn::Matrix<Real>* d_q_seed = nullptr) {
  check_batch(batch, prefs);
  const NetworkSpec& spec = actor.spec();
  const auto copies = static_cast<nn::Index>(prefs.size());
  const auto b = static_cast<nn::Index>(batch.size());
  const nn::Index state_dim = spec.state_dim();
  const nn::Index action_dim = spec.action_dim();

  typename nn::GruStack<Real>::Tape gru_tape;
  nn::Matrix<Real> states = encode_states<Real>(embeddings, actor.encoder(), actor.params,
                                                batch.users, batch.histories, &gru_tape);
  nn::Matrix<Real> tiled = states.replicate(copies, 1);
  nn::Matrix<Real> omega = pair_preferences<Real>(prefs, batch.size());

  nn::MlpTape<Real> head_tape;
  nn::Matrix<Real> raw = actor.forward_raw(tiled, omega, &head_tape);
  nn::Matrix<Real> mean = actor.mean_from_raw(raw);

  nn::MlpTape<Real> critic_tape;
  nn::Matrix<Real> q = critic.forward(tiled, mean, omega, &critic_tape);
  const auto pairs = static_cast<Real>(q.rows());
  const double objective =
      static_cast<double>(q.cwiseProduct(omega).sum()) / static_cast<double>(q.rows());

  nn::Matrix<Real> d_q = d_q_seed ? *d_q_seed : nn::Matrix<Real>(-omega / pairs);
  nn::Matrix<Real> d_in = critic.backward(critic_tape, d_q, /*accumulate=*/false);

  nn::Matrix<Real> d_raw = nn::Matrix<Real>::Zero(raw.rows(), raw.cols());
  d_raw.leftCols(action_dim) = actor.mean_backward(raw, d_in.middleCols(state_dim, action_dim));
  nn::Matrix<Real> d_head_in = actor.head().backward(actor.params, head_tape, d_raw);

  nn::Matrix<Real> d_states = nn::Matrix<Real>::Zero(b, state_dim);
  for (nn::Index i = 0; i < copies; ++i) d_states += d_head_in.block(i * b, 0, b, state_dim);
  nn::Matrix<Real> d_hidden = d_states.rightCols(spec.gru_hidden);
  actor.encoder().backward(actor.params, gru_tape, d_hidden);
  return objective;
}

}  // namespace mofir
