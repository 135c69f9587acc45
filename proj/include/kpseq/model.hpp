#ifndef KPSEQ_MODEL_HPP_
#define KPSEQ_MODEL_HPP_

#include <random>
#include <string>

#include "kpseq/crf.hpp"
#include "kpseq/label.hpp"
#include "kpseq/neural.hpp"
#include "kpseq/tensor.hpp"

namespace kpseq {

struct ModelShape {
  Eigen::Index input_dim = 0;
  Eigen::Index hidden = 128;
  bool use_crf = true;
  bool constrain_bio = false;
  LstmOptions lstm;
};

/// All trainable tensors of the tagger. The same type doubles as the
/// gradient container and the optimizer velocity (GradientSet).
struct ModelParams {
  BiLstmParams lstm;
  AffineParams affine;
  Matrix transitions;  // 4 x 3; empty when the softmax head is used
  bool use_crf = true;
  bool constrain_bio = false;

  template <class Self, class F>
  static void visit(Self& self, F&& fn) {
    BiLstmParams::visit(self.lstm, fn);
    fn(std::string("affine.W_a"), self.affine.W_a);
    if (self.use_crf) fn(std::string("crf.transitions"), self.transitions);
  }
  template <class F>
  void for_each(F&& fn) { visit(*this, std::forward<F>(fn)); }
  template <class F>
  void for_each(F&& fn) const { visit(*this, std::forward<F>(fn)); }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for_each([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  ModelShape shape() const {
    return {lstm.forward.input_dim(), lstm.hidden(), use_crf, constrain_bio, lstm.forward.options};
  }

  /// Transitions with the BIO mask applied when constrained.
  Matrix effective_transitions() const {
    return constrain_bio ? Matrix(transitions + crf::bio_constraint_mask()) : transitions;
  }
};

using GradientSet = ModelParams;

inline ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  z.for_each([](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

template <class Rng>
ModelParams init_model(const ModelShape& s, Rng& rng) {
  ModelParams p;
  p.use_crf = s.use_crf;
  p.constrain_bio = s.constrain_bio;
  p.lstm.forward = neural::init_direction(s.input_dim, s.hidden, s.lstm, rng);
  p.lstm.backward = neural::init_direction(s.input_dim, s.hidden, s.lstm, rng);
  p.affine = neural::init_affine(s.hidden, rng);
  if (s.use_crf) p.transitions = crf::zero_transitions();
  return p;
}

struct LossResult {
  double loss = 0.0;
  GradientSet grads;
};

/// Loss of one labeled sequence and its gradient with respect to every
/// parameter. Inputs are frozen: no gradient is produced for X.
inline LossResult loss_and_gradients(const ModelParams& p, const Matrix& X, const LabelSequence& y) {
  neural::ForwardCache cache;
  Matrix f = neural::encode(X, p.lstm, p.affine, &cache);
  LossResult r;
  Matrix dF;
  Matrix dtau;
  if (p.use_crf) {
    auto c = crf::nll(f, y, p.effective_transitions());
    r.loss = c.loss;
    dF = std::move(c.d_emissions);
    dtau = std::move(c.d_transitions);
  } else {
    auto s = crf::softmax_head_nll(f, y);
    r.loss = s.loss;
    dF = std::move(s.d_emissions);
  }
  auto g = neural::backward(p.lstm, p.affine, cache, dF);
  r.grads.lstm = std::move(g.lstm);
  r.grads.affine = std::move(g.affine);
  r.grads.use_crf = p.use_crf;
  r.grads.constrain_bio = p.constrain_bio;
  if (p.use_crf) {
    if (p.constrain_bio) {
      const Matrix mask = crf::bio_constraint_mask();
      for (Eigen::Index k = 0; k < mask.size(); ++k)
        if (mask(k) == crf::kNegInf) dtau(k) = 0.0;
    }
    r.grads.transitions = std::move(dtau);
  }
  return r;
}

inline double loss_only(const ModelParams& p, const Matrix& X, const LabelSequence& y) {
  Matrix f = neural::encode(X, p.lstm, p.affine);
  if (p.use_crf) return crf::log_partition(f, p.effective_transitions()) - crf::score(f, y, p.effective_transitions());
  return crf::softmax_head_nll(f, y).loss;
}

inline LabelSequence predict_labels(const ModelParams& p, const Matrix& X) {
  Matrix f = neural::encode(X, p.lstm, p.affine);
  return p.use_crf ? crf::viterbi(f, p.effective_transitions()) : crf::softmax_decode(f);
}

}  // namespace kpseq

#endif  // KPSEQ_MODEL_HPP_
