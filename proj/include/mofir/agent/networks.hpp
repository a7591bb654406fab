#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "mofir/agent/preference.hpp"
#include "mofir/nn/gru.hpp"
#include "mofir/nn/mlp.hpp"

namespace mofir {

inline constexpr int kNumObjectives = 2;
inline constexpr double kMinSigma = 1e-6;
inline constexpr double kMaxSigma = 10.0;
template <typename Real>
inline constexpr Real kRowNormEps = Real(1e-8);

/// Item matching only depends on the direction of each proposal row, so the
/// mean can be kept on the unit sphere per row without losing any policy.
///   kNone      raw output
///   kTanh      tanh(raw), entries in (-1, 1)
///   kUnitRows  each of the K rows scaled to unit length
enum class MeanSquash { kNone, kTanh, kUnitRows };

struct NetworkSpec {
  int embedding_dim = 16;  // d, shared by users and items
  int slate_size = 10;     // K
  int history_length = 5;  // N
  int gru_hidden = 16;
  int gru_layers = 2;
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  /// How the raw head output becomes the mean proposal.
  MeanSquash mean_squash = MeanSquash::kUnitRows;

  int state_dim() const { return embedding_dim + gru_hidden; }
  int action_dim() const { return slate_size * embedding_dim; }

  /// Flat description stored in checkpoints so mismatched architectures are
  /// rejected on load.
  std::vector<float> signature() const {
    std::vector<float> s{static_cast<float>(embedding_dim), static_cast<float>(slate_size),
                         static_cast<float>(history_length), static_cast<float>(gru_hidden),
                         static_cast<float>(gru_layers), static_cast<float>(actor_hidden.size())};
    for (int w : actor_hidden) s.push_back(static_cast<float>(w));
    s.push_back(static_cast<float>(critic_hidden.size()));
    for (int w : critic_hidden) s.push_back(static_cast<float>(w));
    s.push_back(static_cast<float>(mean_squash));
    return s;
  }
  bool operator==(const NetworkSpec&) const = default;
};

template <typename Real>
nn::Matrix<Real> preference_rows(std::span<const PreferenceVector> prefs) {
  nn::Matrix<Real> out(static_cast<nn::Index>(prefs.size()), kNumObjectives);
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    out(static_cast<nn::Index>(i), 0) = static_cast<Real>(prefs[i].utility());
    out(static_cast<nn::Index>(i), 1) = static_cast<Real>(prefs[i].fairness());
  }
  return out;
}

/// Preference-conditioned Gaussian actor: a GRU state encoder plus an MLP
/// mapping [s ; w] to the mean and log standard deviation of the K x d
/// proposal matrix.
template <typename Real>
class Actor {
 public:
  struct Output {
    nn::Matrix<Real> mean;   // batch x K*d
    nn::Matrix<Real> sigma;  // batch x K*d, clamped to [kMinSigma, kMaxSigma]
  };

  Actor() = default;
  explicit Actor(const NetworkSpec& spec) : spec_(spec) {
    encoder_ = nn::GruStack<Real>(params, "encoder",
                                  {spec.embedding_dim, spec.gru_hidden, spec.gru_layers});
    nn::MlpSpec mlp;
    mlp.widths.push_back(spec.state_dim() + kNumObjectives);
    for (int w : spec.actor_hidden) mlp.widths.push_back(w);
    mlp.widths.push_back(2 * spec.action_dim());
    head_ = nn::Mlp<Real>(params, "head", mlp);
  }

  template <typename Rng>
  void init(Rng& rng) {
    encoder_.init(params, rng);
    head_.init(params, rng);
  }

  const NetworkSpec& spec() const { return spec_; }
  const nn::GruStack<Real>& encoder() const { return encoder_; }
  const nn::Mlp<Real>& head() const { return head_; }

  static nn::Matrix<Real> join(const nn::Matrix<Real>& states, const nn::Matrix<Real>& prefs) {
    if (states.rows() != prefs.rows()) throw nn::ShapeError("actor: states/preferences rows differ");
    nn::Matrix<Real> x(states.rows(), states.cols() + prefs.cols());
    x << states, prefs;
    return x;
  }

  /// Raw head output: first K*d columns are the mean, the rest log sigma.
  nn::Matrix<Real> forward_raw(const nn::Matrix<Real>& states, const nn::Matrix<Real>& prefs,
                               nn::MlpTape<Real>* tape = nullptr) const {
    return head_.forward(params, join(states, prefs), tape);
  }

  /// Mean proposal from the raw head output.
  nn::Matrix<Real> mean_from_raw(const nn::Matrix<Real>& raw) const {
    const nn::Index a = spec_.action_dim();
    nn::Matrix<Real> m = raw.leftCols(a);
    switch (spec_.mean_squash) {
      case MeanSquash::kNone:
        break;
      case MeanSquash::kTanh:
        m = m.array().tanh().matrix();
        break;
      case MeanSquash::kUnitRows:
        for (nn::Index b = 0; b < m.rows(); ++b) {
          for (int k = 0; k < spec_.slate_size; ++k) {
            auto row = m.block(b, k * spec_.embedding_dim, 1, spec_.embedding_dim);
            row /= std::sqrt(row.squaredNorm() + kRowNormEps<Real>);
          }
        }
        break;
    }
    return m;
  }

  /// d(loss)/d(raw mean columns) given d(loss)/d(mean).
  nn::Matrix<Real> mean_backward(const nn::Matrix<Real>& raw, const nn::Matrix<Real>& d_mean) const {
    const nn::Index a = spec_.action_dim();
    switch (spec_.mean_squash) {
      case MeanSquash::kNone:
        return d_mean;
      case MeanSquash::kTanh: {
        const auto t = raw.leftCols(a).array().tanh();
        return (d_mean.array() * (Real(1) - t.square())).matrix();
      }
      case MeanSquash::kUnitRows:
        break;
    }
    // m = r / n with n = sqrt(|r|^2 + eps): dr = dm / n - r (r . dm) / n^3.
    nn::Matrix<Real> d_raw(d_mean.rows(), a);
    const nn::Index d = spec_.embedding_dim;
    for (nn::Index b = 0; b < raw.rows(); ++b) {
      for (int k = 0; k < spec_.slate_size; ++k) {
        const auto r = raw.block(b, k * d, 1, d);
        const auto dm = d_mean.block(b, k * d, 1, d);
        const Real n = std::sqrt(r.squaredNorm() + kRowNormEps<Real>);
        d_raw.block(b, k * d, 1, d) = dm / n - r * ((r.array() * dm.array()).sum() / (n * n * n));
      }
    }
    return d_raw;
  }

  Output forward(const nn::Matrix<Real>& states, const nn::Matrix<Real>& prefs) const {
    nn::Matrix<Real> raw = forward_raw(states, prefs);
    const nn::Index a = spec_.action_dim();
    Output out;
    out.mean = mean_from_raw(raw);
    const Real lo = static_cast<Real>(std::log(kMinSigma));
    const Real hi = static_cast<Real>(std::log(kMaxSigma));
    out.sigma = raw.rightCols(a).unaryExpr([&](Real v) { return std::exp(std::clamp(v, lo, hi)); });
    return out;
  }

  nn::Matrix<Real> mean(const nn::Matrix<Real>& states, const nn::Matrix<Real>& prefs) const {
    return mean_from_raw(forward_raw(states, prefs));
  }

  template <typename Other>
  Actor<Other> cast() const {
    Actor<Other> out(spec_);
    out.params = params.template cast<Other>();
    return out;
  }

  nn::ParamStore<Real> params;

 private:
  NetworkSpec spec_;
  nn::GruStack<Real> encoder_;
  nn::Mlp<Real> head_;
};

/// Preference-conditioned critic: MLP over [s ; flat(W) ; w] producing one
/// Q value per objective.
template <typename Real>
class Critic {
 public:
  Critic() = default;
  explicit Critic(const NetworkSpec& spec) : spec_(spec) {
    nn::MlpSpec mlp;
    mlp.widths.push_back(spec.state_dim() + spec.action_dim() + kNumObjectives);
    for (int w : spec.critic_hidden) mlp.widths.push_back(w);
    mlp.widths.push_back(kNumObjectives);
    net_ = nn::Mlp<Real>(params, "critic", mlp);
  }

  template <typename Rng>
  void init(Rng& rng) {
    net_.init(params, rng);
  }

  const NetworkSpec& spec() const { return spec_; }
  const nn::Mlp<Real>& net() const { return net_; }

  nn::Matrix<Real> forward(const nn::Matrix<Real>& states, const nn::Matrix<Real>& actions,
                           const nn::Matrix<Real>& prefs, nn::MlpTape<Real>* tape = nullptr) const {
    if (states.rows() != actions.rows() || states.rows() != prefs.rows()) {
      throw nn::ShapeError("critic: input rows differ");
    }
    nn::Matrix<Real> x(states.rows(), states.cols() + actions.cols() + prefs.cols());
    x << states, actions, prefs;
    return net_.forward(params, x, tape);
  }

  /// d(loss)/d[s ; a ; w] given d(loss)/dQ.
  nn::Matrix<Real> backward(const nn::MlpTape<Real>& tape, const nn::Matrix<Real>& d_q,
                            bool accumulate = true) {
    return net_.backward(params, tape, d_q, accumulate);
  }

  template <typename Other>
  Critic<Other> cast() const {
    Critic<Other> out(spec_);
    out.params = params.template cast<Other>();
    return out;
  }

  nn::ParamStore<Real> params;

 private:
  NetworkSpec spec_;
  nn::Mlp<Real> net_;
};

struct Selection {
  std::vector<ItemId> items;
  /// probs[k][i] = softmax over unmasked items of W_k . v_i (masked items 0).
  std::vector<std::vector<double>> probs;
};

/// Greedy row-by-row matching of proposal rows to items. Row k takes the
/// unmasked item with the largest probability (equivalently the largest
/// logit), lowest id on ties, and masks it for later rows. `mask[i] == true`
/// excludes item i and is updated in place.
template <typename Real>
Selection select_items(const nn::Matrix<Real>& proposal, const MatrixF& items,
                       std::vector<bool>& mask, bool want_probs = false) {
  const nn::Index n_items = items.rows();
  if (static_cast<nn::Index>(mask.size()) != n_items) throw nn::ShapeError("mask size != item count");
  if (proposal.cols() != items.cols()) throw nn::ShapeError("proposal width != embedding dim");
  const auto free_items = std::count(mask.begin(), mask.end(), false);
  if (free_items < proposal.rows()) {
    throw std::invalid_argument("mask leaves " + std::to_string(free_items) + " items for a slate of " +
                                std::to_string(proposal.rows()));
  }
  Selection sel;
  const nn::Matrix<Real> all_logits = proposal * items.template cast<Real>().transpose();
  for (nn::Index k = 0; k < proposal.rows(); ++k) {
    const auto logits = all_logits.row(k);
    ItemId best = -1;
    for (nn::Index i = 0; i < n_items; ++i) {
      if (mask[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || logits[i] > logits[best]) best = static_cast<ItemId>(i);
    }
    if (want_probs) {
      std::vector<double> p(static_cast<std::size_t>(n_items), 0.0);
      double total = 0.0;
      for (nn::Index i = 0; i < n_items; ++i) {
        if (mask[static_cast<std::size_t>(i)]) continue;
        p[static_cast<std::size_t>(i)] = std::exp(static_cast<double>(logits[i] - logits[best]));
        total += p[static_cast<std::size_t>(i)];
      }
      for (auto& x : p) x /= total;
      sel.probs.push_back(std::move(p));
    }
    mask[static_cast<std::size_t>(best)] = true;
    sel.items.push_back(best);
  }
  return sel;
}

template <typename Real>
struct ActResult {
  nn::Matrix<Real> proposal;  // K x d
  std::vector<ItemId> items;
  std::vector<std::vector<double>> probs;
};

/// Builds the proposal W (the mean, plus sigma-scaled Gaussian noise when
/// exploring) and matches it to items.
template <typename Real>
ActResult<Real> act(const Actor<Real>& actor, const nn::RowVector<Real>& state,
                    const PreferenceVector& pref, const MatrixF& items, bool explore,
                    std::vector<bool>& mask, Rng* rng = nullptr, double noise_scale = 1.0,
                    bool want_probs = false) {
  const auto& spec = actor.spec();
  if (state.cols() != spec.state_dim()) throw nn::ShapeError("act: state dimension mismatch");
  const PreferenceVector prefs[1] = {pref};
  nn::Matrix<Real> s = state;
  nn::RowVector<Real> w;
  if (explore) {
    if (!rng) throw std::invalid_argument("act: exploration needs a random source");
    auto out = actor.forward(s, preference_rows<Real>(prefs));
    std::normal_distribution<double> gauss(0.0, 1.0);
    w = out.mean.row(0);
    for (nn::Index k = 0; k < w.size(); ++k) {
      w[k] += static_cast<Real>(noise_scale * gauss(*rng)) * out.sigma(0, k);
    }
  } else {
    w = actor.mean(s, preference_rows<Real>(prefs)).row(0);
  }
  ActResult<Real> res;
  res.proposal = Eigen::Map<const nn::Matrix<Real>>(w.data(), spec.slate_size, spec.embedding_dim);
  auto sel = select_items(res.proposal, items, mask, want_probs);
  res.items = std::move(sel.items);
  res.probs = std::move(sel.probs);
  return res;
}

}  // namespace mofir
