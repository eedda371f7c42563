#pragma once

// Linear-chain CRF inference over the five span tags.
//
// Everything here is templated on the scalar type and works on dense Eigen
// tables: an N x 5 emission matrix, a 5 x 5 transition matrix (row = from,
// column = to) and start/end vectors. Constrained inference gives the
// transitions forbidden by transition_mask() a score of -inf.

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spanlab/tags.hpp"

namespace spanlab {

template <typename Scalar>
using EmissionMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, kNumTags, Eigen::RowMajor>;
template <typename Scalar>
using TransitionMatrix = Eigen::Matrix<Scalar, kNumTags, kNumTags, Eigen::RowMajor>;
template <typename Scalar>
using TagVector = Eigen::Matrix<Scalar, 1, kNumTags>;

template <typename Scalar>
struct Potentials {
  EmissionMatrix<Scalar> emissions;
  TransitionMatrix<Scalar> transitions = TransitionMatrix<Scalar>::Zero();
  TagVector<Scalar> start = TagVector<Scalar>::Zero();
  TagVector<Scalar> end = TagVector<Scalar>::Zero();

  Eigen::Index length() const { return emissions.rows(); }
};

/// Posterior summary of a forward-backward pass.
template <typename Scalar>
struct ForwardBackward {
  Scalar log_z = 0;
  EmissionMatrix<Scalar> marginals;                  // P(y_i = t)
  TransitionMatrix<Scalar> transition_marginals;     // sum over i of P(y_i = a, y_{i+1} = b)
};

namespace detail {

template <typename Scalar>
constexpr Scalar neg_inf() {
  return -std::numeric_limits<Scalar>::infinity();
}

template <typename Scalar>
Scalar log_add(Scalar a, Scalar b) {
  if (a == neg_inf<Scalar>()) return b;
  if (b == neg_inf<Scalar>()) return a;
  const Scalar hi = a > b ? a : b;
  const Scalar lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

/// Potentials with forbidden transitions, starts and ends set to -inf.
template <typename Scalar>
Potentials<Scalar> masked(const Potentials<Scalar>& p, bool constrained) {
  Potentials<Scalar> out = p;
  if (!constrained) return out;
  const TransitionMask& mask = transition_mask();
  for (int a = 0; a < kNumTags; ++a) {
    if (!mask.start[a]) out.start(a) = neg_inf<Scalar>();
    if (!mask.end[a]) out.end(a) = neg_inf<Scalar>();
    for (int b = 0; b < kNumTags; ++b) {
      if (!mask.allowed[a][b]) out.transitions(a, b) = neg_inf<Scalar>();
    }
  }
  return out;
}

template <typename Scalar>
void require_nonempty(const Potentials<Scalar>& p) {
  if (p.length() < 1) throw std::invalid_argument("CRF inference needs at least one position");
}

}  // namespace detail

/// Unnormalized log score of one tag sequence (no masking applied).
template <typename Scalar>
Scalar sequence_score(const Potentials<Scalar>& p, const TagSequence& tags) {
  if (static_cast<Eigen::Index>(tags.size()) != p.length()) {
    throw std::invalid_argument("tag sequence length does not match potentials");
  }
  Scalar score = p.start(index(tags.front())) + p.end(index(tags.back()));
  for (Eigen::Index i = 0; i < p.length(); ++i) {
    score += p.emissions(i, index(tags[static_cast<std::size_t>(i)]));
    if (i > 0) {
      score += p.transitions(index(tags[static_cast<std::size_t>(i - 1)]),
                             index(tags[static_cast<std::size_t>(i)]));
    }
  }
  return score;
}

/// Log partition function and marginals, all in log space.
template <typename Scalar>
ForwardBackward<Scalar> forward_backward(const Potentials<Scalar>& raw, bool constrained) {
  detail::require_nonempty(raw);
  const Potentials<Scalar> p = detail::masked(raw, constrained);
  const Eigen::Index n = p.length();
  constexpr Scalar kNegInf = detail::neg_inf<Scalar>();

  EmissionMatrix<Scalar> alpha(n, kNumTags);
  EmissionMatrix<Scalar> beta(n, kNumTags);
  alpha.row(0) = p.start + p.emissions.row(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (int b = 0; b < kNumTags; ++b) {
      Scalar acc = kNegInf;
      for (int a = 0; a < kNumTags; ++a) acc = detail::log_add(acc, alpha(i - 1, a) + p.transitions(a, b));
      alpha(i, b) = acc + p.emissions(i, b);
    }
  }
  beta.row(n - 1) = p.end;
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    for (int a = 0; a < kNumTags; ++a) {
      Scalar acc = kNegInf;
      for (int b = 0; b < kNumTags; ++b) {
        acc = detail::log_add(acc, p.transitions(a, b) + p.emissions(i + 1, b) + beta(i + 1, b));
      }
      beta(i, a) = acc;
    }
  }

  ForwardBackward<Scalar> out;
  out.log_z = kNegInf;
  for (int a = 0; a < kNumTags; ++a) out.log_z = detail::log_add(out.log_z, alpha(n - 1, a) + p.end(a));

  out.marginals.resize(n, kNumTags);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < kNumTags; ++a) out.marginals(i, a) = std::exp(alpha(i, a) + beta(i, a) - out.log_z);
  }
  out.transition_marginals.setZero();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    for (int a = 0; a < kNumTags; ++a) {
      for (int b = 0; b < kNumTags; ++b) {
        out.transition_marginals(a, b) += std::exp(alpha(i, a) + p.transitions(a, b) +
                                                   p.emissions(i + 1, b) + beta(i + 1, b) - out.log_z);
      }
    }
  }
  return out;
}

template <typename Scalar>
Scalar forward_log_z(const Potentials<Scalar>& p, bool constrained) {
  detail::require_nonempty(p);
  const Potentials<Scalar> m = detail::masked(p, constrained);
  TagVector<Scalar> alpha = m.start + m.emissions.row(0);
  for (Eigen::Index i = 1; i < m.length(); ++i) {
    TagVector<Scalar> next;
    for (int b = 0; b < kNumTags; ++b) {
      Scalar acc = detail::neg_inf<Scalar>();
      for (int a = 0; a < kNumTags; ++a) acc = detail::log_add(acc, alpha(a) + m.transitions(a, b));
      next(b) = acc + m.emissions(i, b);
    }
    alpha = next;
  }
  Scalar log_z = detail::neg_inf<Scalar>();
  for (int a = 0; a < kNumTags; ++a) log_z = detail::log_add(log_z, alpha(a) + m.end(a));
  return log_z;
}

/// Highest-scoring tag sequence. Among equal scores, the sequence with the
/// lower tag index (order S,B,E,I,O) at the latest differing position wins.
template <typename Scalar>
TagSequence viterbi(const Potentials<Scalar>& raw, bool constrained) {
  detail::require_nonempty(raw);
  const Potentials<Scalar> p = detail::masked(raw, constrained);
  const Eigen::Index n = p.length();

  Eigen::Matrix<int, Eigen::Dynamic, kNumTags, Eigen::RowMajor> backpointer(n, kNumTags);
  TagVector<Scalar> delta = p.start + p.emissions.row(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    TagVector<Scalar> next;
    for (int b = 0; b < kNumTags; ++b) {
      int best = 0;
      Scalar best_score = delta(0) + p.transitions(0, b);
      for (int a = 1; a < kNumTags; ++a) {
        const Scalar s = delta(a) + p.transitions(a, b);
        if (s > best_score) {
          best_score = s;
          best = a;
        }
      }
      backpointer(i, b) = best;
      next(b) = best_score + p.emissions(i, b);
    }
    delta = next;
  }

  int last = 0;
  Scalar best_score = delta(0) + p.end(0);
  for (int a = 1; a < kNumTags; ++a) {
    const Scalar s = delta(a) + p.end(a);
    if (s > best_score) {
      best_score = s;
      last = a;
    }
  }
  TagSequence tags(static_cast<std::size_t>(n));
  tags.back() = static_cast<Tag5>(last);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    last = backpointer(i, last);
    tags[static_cast<std::size_t>(i - 1)] = static_cast<Tag5>(last);
  }
  return tags;
}

}  // namespace spanlab
