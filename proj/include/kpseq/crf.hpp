#ifndef KPSEQ_CRF_HPP_
#define KPSEQ_CRF_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kpseq/error.hpp"
#include "kpseq/label.hpp"
#include "kpseq/tensor.hpp"

namespace kpseq::crf {

// Transition matrix layout: 4 x 3, rows = previous label (KB, KI, KO, START),
// columns = next label. Emissions: n x 3.

inline constexpr Eigen::Index kRows = static_cast<Eigen::Index>(kNumLabels) + 1;
inline constexpr Eigen::Index kCols = static_cast<Eigen::Index>(kNumLabels);

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline Matrix zero_transitions() { return Matrix::Zero(kRows, kCols); }

/// Mask that forbids START->I and O->I when added to the transitions.
inline Matrix bio_constraint_mask() {
  Matrix m = Matrix::Zero(kRows, kCols);
  m(static_cast<Eigen::Index>(kStartRow), static_cast<Eigen::Index>(index_of(Label::KI))) = kNegInf;
  m(static_cast<Eigen::Index>(index_of(Label::KO)), static_cast<Eigen::Index>(index_of(Label::KI))) = kNegInf;
  return m;
}

namespace detail {

inline void check(const Matrix& f, const Matrix& tau, const char* what) {
  if (f.rows() < 1) throw ShapeError(std::string(what) + ": empty emission matrix");
  require_shape(f, f.rows(), kCols, std::string(what) + ": emissions");
  require_shape(tau, kRows, kCols, std::string(what) + ": transitions");
}

inline void check_labels(const Matrix& f, const LabelSequence& y, const char* what) {
  if (static_cast<Eigen::Index>(y.size()) != f.rows())
    throw ShapeError(std::string(what) + ": " + std::to_string(y.size()) + " labels for " +
                     std::to_string(f.rows()) + " emission rows");
}

inline Eigen::Index col(Label l) { return static_cast<Eigen::Index>(index_of(l)); }

template <class Vec>
double logsumexp(const Vec& v) {
  double m = v.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((v.array() - m).exp().sum());
}

/// alpha(t, j): log-sum of scores of all prefixes ending in label j at t.
inline Matrix forward_table(const Matrix& f, const Matrix& tau) {
  const Eigen::Index n = f.rows();
  Matrix alpha(n, kCols);
  alpha.row(0) = tau.row(static_cast<Eigen::Index>(kStartRow)) + f.row(0);
  for (Eigen::Index t = 1; t < n; ++t)
    for (Eigen::Index j = 0; j < kCols; ++j)
      alpha(t, j) = logsumexp((alpha.row(t - 1).transpose() + tau.col(j).head(kCols)).eval()) + f(t, j);
  return alpha;
}

/// beta(t, i): log-sum of scores of all suffixes after position t given label i at t.
inline Matrix backward_table(const Matrix& f, const Matrix& tau) {
  const Eigen::Index n = f.rows();
  Matrix beta(n, kCols);
  beta.row(n - 1).setZero();
  for (Eigen::Index t = n - 2; t >= 0; --t)
    for (Eigen::Index i = 0; i < kCols; ++i)
      beta(t, i) = logsumexp((tau.row(i).transpose() + f.row(t + 1).transpose() + beta.row(t + 1).transpose()).eval());
  return beta;
}

}  // namespace detail

/// s(f, y) = sum_t tau[y_{t-1}, y_t] + f[t, y_t], with y_0 = START.
inline double score(const Matrix& f, const LabelSequence& y, const Matrix& tau) {
  detail::check(f, tau, "crf::score");
  detail::check_labels(f, y, "crf::score");
  double s = 0.0;
  Eigen::Index prev = static_cast<Eigen::Index>(kStartRow);
  for (Eigen::Index t = 0; t < f.rows(); ++t) {
    Eigen::Index cur = detail::col(y[static_cast<std::size_t>(t)]);
    s += tau(prev, cur) + f(t, cur);
    prev = cur;
  }
  return s;
}

/// log Z via the forward algorithm in log space.
inline double log_partition(const Matrix& f, const Matrix& tau) {
  detail::check(f, tau, "crf::log_partition");
  Matrix alpha = detail::forward_table(f, tau);
  return detail::logsumexp(alpha.row(f.rows() - 1).transpose().eval());
}

struct NllResult {
  double loss = 0.0;
  Matrix d_emissions;    // n x 3
  Matrix d_transitions;  // 4 x 3
};

/// Negative log-likelihood -log p(y | f) = log Z - s(f, y) and its gradients
/// (expected counts minus observed counts) by forward-backward.
inline NllResult nll(const Matrix& f, const LabelSequence& y, const Matrix& tau) {
  detail::check(f, tau, "crf::nll");
  detail::check_labels(f, y, "crf::nll");
  const Eigen::Index n = f.rows();
  const Eigen::Index start = static_cast<Eigen::Index>(kStartRow);
  Matrix alpha = detail::forward_table(f, tau);
  Matrix beta = detail::backward_table(f, tau);
  const double logz = detail::logsumexp(alpha.row(n - 1).transpose().eval());

  NllResult r;
  r.loss = logz - score(f, y, tau);
  r.d_emissions = ((alpha + beta).array() - logz).exp().matrix();
  r.d_transitions = Matrix::Zero(kRows, kCols);
  for (Eigen::Index j = 0; j < kCols; ++j) r.d_transitions(start, j) = r.d_emissions(0, j);
  for (Eigen::Index t = 1; t < n; ++t)
    for (Eigen::Index i = 0; i < kCols; ++i)
      for (Eigen::Index j = 0; j < kCols; ++j) {
        double lp = alpha(t - 1, i) + tau(i, j) + f(t, j) + beta(t, j) - logz;
        if (lp != kNegInf) r.d_transitions(i, j) += std::exp(lp);
      }

  Eigen::Index prev = start;
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::Index cur = detail::col(y[static_cast<std::size_t>(t)]);
    r.d_emissions(t, cur) -= 1.0;
    r.d_transitions(prev, cur) -= 1.0;
    prev = cur;
  }
  return r;
}

/// Highest-scoring label sequence. Among equal-scoring predecessors the
/// smallest label index wins, and the final label is the smallest index
/// among the maxima, so ties resolve toward small labels at the latest
/// differing position.
inline LabelSequence viterbi(const Matrix& f, const Matrix& tau) {
  detail::check(f, tau, "crf::viterbi");
  const Eigen::Index n = f.rows();
  Matrix delta(n, kCols);
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> back(n, kCols);
  delta.row(0) = tau.row(static_cast<Eigen::Index>(kStartRow)) + f.row(0);
  for (Eigen::Index t = 1; t < n; ++t)
    for (Eigen::Index j = 0; j < kCols; ++j) {
      Eigen::Index best = 0;
      double best_v = delta(t - 1, 0) + tau(0, j);
      for (Eigen::Index i = 1; i < kCols; ++i) {
        double v = delta(t - 1, i) + tau(i, j);
        if (v > best_v) {
          best_v = v;
          best = i;
        }
      }
      delta(t, j) = best_v + f(t, j);
      back(t, j) = best;
    }
  LabelSequence y(static_cast<std::size_t>(n));
  Eigen::Index cur = 0;
  for (Eigen::Index j = 1; j < kCols; ++j)
    if (delta(n - 1, j) > delta(n - 1, cur)) cur = j;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    y[static_cast<std::size_t>(t)] = label_at(static_cast<std::size_t>(cur));
    if (t > 0) cur = back(t, cur);
  }
  return y;
}

struct SoftmaxResult {
  double loss = 0.0;
  Matrix d_emissions;
};

/// Plain per-token softmax head: summed cross-entropy over positions.
inline SoftmaxResult softmax_head_nll(const Matrix& f, const LabelSequence& y) {
  if (f.rows() < 1) throw ShapeError("softmax_head_nll: empty emission matrix");
  require_shape(f, f.rows(), kCols, "softmax_head_nll: emissions");
  detail::check_labels(f, y, "softmax_head_nll");
  SoftmaxResult r{0.0, Matrix(f.rows(), kCols)};
  for (Eigen::Index t = 0; t < f.rows(); ++t) {
    double lse = detail::logsumexp(f.row(t).transpose().eval());
    Eigen::Index k = detail::col(y[static_cast<std::size_t>(t)]);
    r.loss += lse - f(t, k);
    r.d_emissions.row(t) = (f.row(t).array() - lse).exp().matrix();
    r.d_emissions(t, k) -= 1.0;
  }
  return r;
}

/// Per-token argmax; ties go to the smallest label index.
inline LabelSequence softmax_decode(const Matrix& f) {
  LabelSequence y(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index t = 0; t < f.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < f.cols(); ++j)
      if (f(t, j) > f(t, best)) best = j;
    y[static_cast<std::size_t>(t)] = label_at(static_cast<std::size_t>(best));
  }
  return y;
}

}  // namespace kpseq::crf

#endif  // KPSEQ_CRF_HPP_
