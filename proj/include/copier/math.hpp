#pragma once

// Softmax and divergence kernels shared by the policy, learner and theory code.

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace copier {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Numerically stable softmax of a logit vector.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p(logits.size());
  if (logits.size() == 0) return p;
  const Scalar shift = logits.maxCoeff();
  // std::exp underflows to exactly 0; Eigen's packet exp clamps to a denormal.
  p = (logits.array() - shift).unaryExpr([](Scalar v) { return std::exp(v); }).matrix();
  p /= p.sum();
  return p;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar shift = logits.maxCoeff();
  const Scalar lse = shift + std::log((logits.array() - shift).exp().sum());
  return (logits.array() - lse).matrix();
}

enum class DivergenceKind { kl, js };

/// KL(p || q) in nats. Returns +infinity when q vanishes where p does not.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: distributions differ in size");
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    if (q[i] <= 0) return std::numeric_limits<Scalar>::infinity();
    sum += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can push the sum a hair below zero for p == q.
  return sum < 0 ? Scalar(0) : sum;
}

/// Jensen-Shannon divergence, natural log, bounded by ln 2.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar js_divergence(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if (p.size() != q.size())
    throw std::invalid_argument("js_divergence: distributions differ in size");
  // Accumulate both halves termwise so that swapping p and q is exact.
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Scalar m = (p[i] + q[i]) / 2;
    Scalar term = 0;
    if (p[i] > 0) term += p[i] * std::log(p[i] / m);
    if (q[i] > 0) term += q[i] * std::log(q[i] / m);
    sum += term;
  }
  sum /= 2;
  return sum < 0 ? Scalar(0) : sum;
}

template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar divergence(const Eigen::MatrixBase<DerivedP>& p,
                                     const Eigen::MatrixBase<DerivedQ>& q,
                                     DivergenceKind kind) {
  return kind == DivergenceKind::kl ? kl_divergence(p, q) : js_divergence(p, q);
}

/// Index of the largest entry; lowest index wins ties.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
  if (v.size() == 0) throw std::invalid_argument("argmax of empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace copier
