#ifndef KPSEQ_NEURAL_HPP_
#define KPSEQ_NEURAL_HPP_

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "kpseq/error.hpp"
#include "kpseq/label.hpp"
#include "kpseq/tensor.hpp"

namespace kpseq {

struct LstmOptions {
  /// Full l x l peephole matrices instead of per-unit (diagonal) weights.
  bool full_peephole = false;
  /// Output-gate peephole reads c_{t-1} instead of the freshly updated c_t.
  bool o_peephole_prev = false;
};

/// One LSTM direction. Every tensor is a Matrix so parameters, gradients and
/// optimizer state can be walked uniformly; vectors are l x 1 columns.
struct LstmDirectionParams {
  Matrix W_xi, W_xf, W_xc, W_xo;  // l x dim
  Matrix W_hi, W_hf, W_hc, W_ho;  // l x l
  Matrix b_i, b_f, b_c, b_o;      // l x 1
  Matrix w_ci, w_cf, w_co;        // l x 1, or l x l with full_peephole
  LstmOptions options;

  Eigen::Index hidden() const { return W_hi.rows(); }
  Eigen::Index input_dim() const { return W_xi.cols(); }

  template <class Self, class F>
  static void visit(Self& self, const std::string& prefix, F&& fn) {
    fn(prefix + "W_xi", self.W_xi);
    fn(prefix + "W_xf", self.W_xf);
    fn(prefix + "W_xc", self.W_xc);
    fn(prefix + "W_xo", self.W_xo);
    fn(prefix + "W_hi", self.W_hi);
    fn(prefix + "W_hf", self.W_hf);
    fn(prefix + "W_hc", self.W_hc);
    fn(prefix + "W_ho", self.W_ho);
    fn(prefix + "b_i", self.b_i);
    fn(prefix + "b_f", self.b_f);
    fn(prefix + "b_c", self.b_c);
    fn(prefix + "b_o", self.b_o);
    fn(prefix + "w_ci", self.w_ci);
    fn(prefix + "w_cf", self.w_cf);
    fn(prefix + "w_co", self.w_co);
  }

  static LstmDirectionParams zeros(Eigen::Index dim, Eigen::Index l, LstmOptions opt = {}) {
    LstmDirectionParams p;
    p.options = opt;
    for (Matrix* m : {&p.W_xi, &p.W_xf, &p.W_xc, &p.W_xo}) *m = Matrix::Zero(l, dim);
    for (Matrix* m : {&p.W_hi, &p.W_hf, &p.W_hc, &p.W_ho}) *m = Matrix::Zero(l, l);
    for (Matrix* m : {&p.b_i, &p.b_f, &p.b_c, &p.b_o}) *m = Matrix::Zero(l, 1);
    Eigen::Index pc = opt.full_peephole ? l : 1;
    for (Matrix* m : {&p.w_ci, &p.w_cf, &p.w_co}) *m = Matrix::Zero(l, pc);
    return p;
  }

  void validate() const {
    const Eigen::Index l = hidden(), d = input_dim();
    for (const Matrix* m : {&W_xi, &W_xf, &W_xc, &W_xo}) require_shape(*m, l, d, "input weights");
    for (const Matrix* m : {&W_hi, &W_hf, &W_hc, &W_ho}) require_shape(*m, l, l, "recurrent weights");
    for (const Matrix* m : {&b_i, &b_f, &b_c, &b_o}) require_shape(*m, l, 1, "bias");
    for (const Matrix* m : {&w_ci, &w_cf, &w_co})
      require_shape(*m, l, options.full_peephole ? l : 1, "peephole");
  }
};

struct BiLstmParams {
  LstmDirectionParams forward;
  LstmDirectionParams backward;

  Eigen::Index hidden() const { return forward.hidden(); }

  template <class Self, class F>
  static void visit(Self& self, F&& fn) {
    LstmDirectionParams::visit(self.forward, "fwd.", fn);
    LstmDirectionParams::visit(self.backward, "bwd.", fn);
  }
};

/// Projection from [h_fwd; h_bwd] to label scores. No bias.
struct AffineParams {
  Matrix W_a;  // |Y| x 2l
};

namespace neural {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vector sigmoid(const Vector& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

inline Vector tanh(const Vector& x) { return x.array().tanh().matrix(); }

inline Vector peep(const Matrix& w, const Vector& c) {
  if (w.cols() == 1) return w.col(0).cwiseProduct(c);
  return w * c;
}

/// Activations of one step, kept for backpropagation.
struct StepCache {
  Vector x, h_prev, c_prev;
  Vector i, f, g, o;  // gate outputs; g = tanh of the candidate cell
  Vector c, tanh_c, h;
};

inline StepCache lstm_step_cached(const Vector& x, const Vector& h_prev, const Vector& c_prev,
                                  const LstmDirectionParams& p) {
  const Eigen::Index l = p.hidden();
  if (x.size() != p.input_dim() || h_prev.size() != l || c_prev.size() != l)
    throw ShapeError("lstm_step: input of size " + std::to_string(x.size()) + " / state of size " +
                     std::to_string(h_prev.size()) + " for dim " + std::to_string(p.input_dim()) +
                     ", hidden " + std::to_string(l));
  StepCache s;
  s.x = x;
  s.h_prev = h_prev;
  s.c_prev = c_prev;
  s.i = sigmoid(p.W_xi * x + p.W_hi * h_prev + peep(p.w_ci, c_prev) + p.b_i.col(0));
  s.f = sigmoid(p.W_xf * x + p.W_hf * h_prev + peep(p.w_cf, c_prev) + p.b_f.col(0));
  s.g = tanh(p.W_xc * x + p.W_hc * h_prev + p.b_c.col(0));
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
  const Vector& c_for_o = p.options.o_peephole_prev ? c_prev : s.c;
  s.o = sigmoid(p.W_xo * x + p.W_ho * h_prev + peep(p.w_co, c_for_o) + p.b_o.col(0));
  s.tanh_c = tanh(s.c);
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

struct StepOutput {
  Vector h;
  Vector c;
};

inline StepOutput lstm_step(const Vector& x, const Vector& h_prev, const Vector& c_prev,
                            const LstmDirectionParams& p) {
  StepCache s = lstm_step_cached(x, h_prev, c_prev, p);
  return {std::move(s.h), std::move(s.c)};
}

struct ForwardCache {
  bool ready = false;
  Matrix H;                       // n x 2l
  std::vector<StepCache> fwd;     // positions 0..n-1
  std::vector<StepCache> bwd;     // positions n-1..0 (processing order)
};

/// Runs one direction over rows of X in the given order; zero initial state.
inline std::vector<StepCache> run_direction(const Matrix& X, const LstmDirectionParams& p, bool reverse) {
  const Eigen::Index n = X.rows(), l = p.hidden();
  std::vector<StepCache> steps;
  steps.reserve(static_cast<std::size_t>(n));
  Vector h = Vector::Zero(l), c = Vector::Zero(l);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index t = reverse ? n - 1 - k : k;
    steps.push_back(lstm_step_cached(X.row(t).transpose(), h, c, p));
    h = steps.back().h;
    c = steps.back().c;
  }
  return steps;
}

/// Row t of the result is [h_fwd_t ; h_bwd_t].
inline Matrix bilstm_forward(const Matrix& X, const BiLstmParams& p, ForwardCache* cache = nullptr) {
  if (X.rows() < 1) throw ShapeError("bilstm_forward: empty sequence");
  if (X.cols() != p.forward.input_dim() || X.cols() != p.backward.input_dim())
    throw ShapeError("bilstm_forward: input dim " + std::to_string(X.cols()) + ", parameters expect " +
                     std::to_string(p.forward.input_dim()));
  if (p.backward.hidden() != p.forward.hidden()) throw ShapeError("bilstm_forward: direction hidden sizes differ");
  const Eigen::Index n = X.rows(), l = p.hidden();
  auto fwd = run_direction(X, p.forward, false);
  auto bwd = run_direction(X, p.backward, true);
  Matrix H(n, 2 * l);
  for (Eigen::Index t = 0; t < n; ++t) {
    H.row(t).head(l) = fwd[static_cast<std::size_t>(t)].h.transpose();
    H.row(t).tail(l) = bwd[static_cast<std::size_t>(n - 1 - t)].h.transpose();
  }
  if (cache) {
    cache->fwd = std::move(fwd);
    cache->bwd = std::move(bwd);
    cache->H = H;
    cache->ready = true;
  }
  return H;
}

/// Emission scores f_t = W_a h_t, returned as an n x |Y| matrix.
inline Matrix project(const Matrix& H, const AffineParams& a) {
  if (a.W_a.rows() != static_cast<Eigen::Index>(kNumLabels))
    throw ShapeError("project: W_a must have " + std::to_string(kNumLabels) + " rows");
  if (H.cols() != a.W_a.cols())
    throw ShapeError("project: H has " + std::to_string(H.cols()) + " columns, W_a expects " +
                     std::to_string(a.W_a.cols()));
  return H * a.W_a.transpose();
}

/// Zeroes each token's whole vector independently with probability p.
template <class Rng>
Matrix word_dropout(const Matrix& X, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("word_dropout: p must lie in [0, 1)");
  Matrix out = X;
  if (p == 0.0) return out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index t = 0; t < X.rows(); ++t)
    if (u(rng) < p) out.row(t).setZero();
  return out;
}

inline Matrix encode(const Matrix& X, const BiLstmParams& lstm, const AffineParams& affine,
                     ForwardCache* cache = nullptr) {
  return project(bilstm_forward(X, lstm, cache), affine);
}

struct EncoderGrads {
  BiLstmParams lstm;
  AffineParams affine;
};

inline LstmDirectionParams zeros_like(const LstmDirectionParams& p) {
  return LstmDirectionParams::zeros(p.input_dim(), p.hidden(), p.options);
}

namespace detail {

inline void accumulate_peep(Matrix& grad, const Vector& da, const Vector& c) {
  if (grad.cols() == 1)
    grad.col(0) += da.cwiseProduct(c);
  else
    grad += da * c.transpose();
}

inline Vector peep_transpose(const Matrix& w, const Vector& da) {
  if (w.cols() == 1) return w.col(0).cwiseProduct(da);
  return w.transpose() * da;
}

/// Backpropagation through time for one direction. dh_out[k] is dL/dh of
/// step k in processing order; gradients are added into g.
inline void direction_backward(const std::vector<StepCache>& steps, const std::vector<Vector>& dh_out,
                               const LstmDirectionParams& p, LstmDirectionParams& g) {
  const Eigen::Index l = p.hidden();
  const bool o_prev = p.options.o_peephole_prev;
  Vector dh_next = Vector::Zero(l), dc_next = Vector::Zero(l);
  for (std::size_t k = steps.size(); k-- > 0;) {
    const StepCache& s = steps[k];
    Vector dh = dh_out[k] + dh_next;
    Vector da_o = dh.cwiseProduct(s.tanh_c).cwiseProduct(s.o.cwiseProduct(Vector::Ones(l) - s.o));
    Vector dc = dc_next + dh.cwiseProduct(s.o).cwiseProduct(Vector::Ones(l) - s.tanh_c.cwiseAbs2());
    if (!o_prev) dc += peep_transpose(p.w_co, da_o);
    Vector da_i = dc.cwiseProduct(s.g).cwiseProduct(s.i.cwiseProduct(Vector::Ones(l) - s.i));
    Vector da_g = dc.cwiseProduct(s.i).cwiseProduct(Vector::Ones(l) - s.g.cwiseAbs2());
    Vector da_f = dc.cwiseProduct(s.c_prev).cwiseProduct(s.f.cwiseProduct(Vector::Ones(l) - s.f));

    g.W_xi += da_i * s.x.transpose();
    g.W_xf += da_f * s.x.transpose();
    g.W_xc += da_g * s.x.transpose();
    g.W_xo += da_o * s.x.transpose();
    g.W_hi += da_i * s.h_prev.transpose();
    g.W_hf += da_f * s.h_prev.transpose();
    g.W_hc += da_g * s.h_prev.transpose();
    g.W_ho += da_o * s.h_prev.transpose();
    g.b_i.col(0) += da_i;
    g.b_f.col(0) += da_f;
    g.b_c.col(0) += da_g;
    g.b_o.col(0) += da_o;
    accumulate_peep(g.w_ci, da_i, s.c_prev);
    accumulate_peep(g.w_cf, da_f, s.c_prev);
    accumulate_peep(g.w_co, da_o, o_prev ? s.c_prev : s.c);

    dc_next = dc.cwiseProduct(s.f) + peep_transpose(p.w_ci, da_i) + peep_transpose(p.w_cf, da_f);
    if (o_prev) dc_next += peep_transpose(p.w_co, da_o);
    dh_next = p.W_hi.transpose() * da_i + p.W_hf.transpose() * da_f + p.W_hc.transpose() * da_g +
              p.W_ho.transpose() * da_o;
  }
}

}  // namespace detail

/// Exact gradients of a loss L with respect to every LSTM and projection
/// tensor, given dL/df for the emissions produced by the cached forward pass.
inline EncoderGrads backward(const BiLstmParams& lstm, const AffineParams& affine, const ForwardCache& cache,
                             const Matrix& dF) {
  if (!cache.ready) throw std::logic_error("neural::backward called without a cached forward pass");
  const Eigen::Index n = cache.H.rows(), l = lstm.hidden();
  require_shape(dF, n, static_cast<Eigen::Index>(kNumLabels), "backward: dL/df");

  EncoderGrads g{{zeros_like(lstm.forward), zeros_like(lstm.backward)}, {dF.transpose() * cache.H}};
  Matrix dH = dF * affine.W_a;  // n x 2l

  std::vector<Vector> dh_fwd(static_cast<std::size_t>(n)), dh_bwd(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    dh_fwd[static_cast<std::size_t>(t)] = dH.row(t).head(l).transpose();
    dh_bwd[static_cast<std::size_t>(n - 1 - t)] = dH.row(t).tail(l).transpose();
  }
  detail::direction_backward(cache.fwd, dh_fwd, lstm.forward, g.lstm.forward);
  detail::direction_backward(cache.bwd, dh_bwd, lstm.backward, g.lstm.backward);
  return g;
}

/// Weight matrices ~ U[-sqrt(1/l), sqrt(1/l)], biases and peepholes zero,
/// forget-gate bias 1.
template <class Rng>
LstmDirectionParams init_direction(Eigen::Index dim, Eigen::Index l, LstmOptions opt, Rng& rng) {
  LstmDirectionParams p = LstmDirectionParams::zeros(dim, l, opt);
  const double r = std::sqrt(1.0 / static_cast<double>(l));
  std::uniform_real_distribution<double> u(-r, r);
  for (Matrix* m : {&p.W_xi, &p.W_xf, &p.W_xc, &p.W_xo, &p.W_hi, &p.W_hf, &p.W_hc, &p.W_ho})
    *m = m->unaryExpr([&](double) { return u(rng); });
  p.b_f.setConstant(1.0);
  return p;
}

template <class Rng>
AffineParams init_affine(Eigen::Index l, Rng& rng) {
  const double r = std::sqrt(1.0 / static_cast<double>(l));
  std::uniform_real_distribution<double> u(-r, r);
  Matrix W = Matrix::Zero(static_cast<Eigen::Index>(kNumLabels), 2 * l);
  return {W.unaryExpr([&](double) { return u(rng); })};
}

}  // namespace neural
}  // namespace kpseq

#endif  // KPSEQ_NEURAL_HPP_
