#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "kpseq/synthetic.hpp"
#include "kpseq/training.hpp"
#include "oracles.hpp"

using namespace kpseq;
using namespace kpseq::training;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("kpseq_train_" + name)).string();
}

synthetic::SyntheticSpec small_spec() {
  synthetic::SyntheticSpec s;
  s.keyword_types = 30;
  s.background_types = 60;
  s.dim = 6;
  s.min_tokens = 12;
  s.max_tokens = 20;
  s.max_phrases = 3;
  return s;
}

TrainConfig small_config() {
  TrainConfig c;
  c.hidden_size = 4;
  c.epochs = 3;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Nesterov, ZeroMomentumIsPlainSgd) {
  Matrix theta = (Matrix(2, 1) << 1.0, -2.0).finished();
  Matrix v = Matrix::Zero(2, 1);
  Matrix g = (Matrix(2, 1) << 0.5, 4.0).finished();
  nesterov_update(theta, v, g, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(theta(0), 0.95);
  EXPECT_DOUBLE_EQ(theta(1), -2.4);
}

TEST(Nesterov, ZeroGradientLeavesParametersUnchanged) {
  Matrix theta = Matrix::Constant(3, 2, 0.7), v = Matrix::Zero(3, 2);
  nesterov_update(theta, v, Matrix::Zero(3, 2), 0.05, 0.9);
  EXPECT_EQ(theta, Matrix::Constant(3, 2, 0.7));
  EXPECT_EQ(v, Matrix::Zero(3, 2));
}

TEST(Nesterov, ScalarTwoStepsMatchLookaheadRecurrence) {
  // Reference: phi_{k+1} = phi_k + v_{k+1}, v_{k+1} = mu v_k - lr grad(phi_k + mu v_k),
  // with a constant gradient of 1. The stored parameter is phi + mu v.
  const double lr = 0.1, mu = 0.9;
  double phi = 0.0, vel = 0.0;
  for (int k = 0; k < 2; ++k) {
    vel = mu * vel - lr * 1.0;
    phi += vel;
  }
  const double expected = phi + mu * vel;
  EXPECT_NEAR(expected, -0.461, 1e-15);

  Matrix theta = Matrix::Zero(1, 1), v = Matrix::Zero(1, 1), g = Matrix::Ones(1, 1);
  nesterov_update(theta, v, g, lr, mu);
  nesterov_update(theta, v, g, lr, mu);
  EXPECT_NEAR(theta(0), expected, 1e-15);
  EXPECT_NEAR(v(0), vel, 1e-15);
}

TEST(Nesterov, ShapeMismatch) {
  Matrix theta = Matrix::Zero(2, 2), v = Matrix::Zero(2, 2);
  EXPECT_THROW(nesterov_update(theta, v, Matrix::Zero(2, 1), 0.1, 0.9), ShapeError);
}

TEST(Schedule, StrictImprovementNeverAnneals) {
  PlateauSchedule s(0.05, 4, 0.5);
  for (int e = 1; e <= 30; ++e) EXPECT_FALSE(s.observe(0.01 * e).annealed);
  EXPECT_EQ(s.lr(), 0.05);
}

TEST(Schedule, ConstantMetricAnnealsEveryFourEpochsAfterTheFirst) {
  // Simulation: epoch 1 sets the best value; every later epoch is a miss, and
  // a miss count reaching the patience triggers an anneal and a reset.
  std::vector<int> expected;
  int misses = 0;
  for (int e = 2; e <= 20; ++e)
    if (++misses == 4) {
      expected.push_back(e);
      misses = 0;
    }
  ASSERT_EQ(expected, (std::vector<int>{5, 9, 13, 17}));

  PlateauSchedule s(0.05, 4, 0.5);
  std::vector<int> got;
  double prev = s.lr();
  for (int e = 1; e <= 20; ++e) {
    if (s.observe(0.3).annealed) {
      got.push_back(e);
      EXPECT_EQ(s.lr(), prev * 0.5);
    } else {
      EXPECT_EQ(s.lr(), prev);
    }
    prev = s.lr();
  }
  EXPECT_EQ(got, expected);
}

TEST(Schedule, RejectsBadFactor) {
  EXPECT_THROW(PlateauSchedule(0.05, 4, 1.0), std::invalid_argument);
  EXPECT_THROW(PlateauSchedule(0.0, 4, 0.5), std::invalid_argument);
}

TEST(Training, RepeatedDocumentLossDecreasesMonotonically) {
  auto c = synthetic::make_corpus(small_spec(), 1, 0, 0);
  FixedProvider provider(c.embeddings);
  std::mt19937_64 rng(3);
  ModelParams p = init_model(TrainConfig{}.shape(provider.dim()), rng);
  OptimizerState st = make_optimizer_state(p, 0.001, 4, 0.5);
  Matrix X = provider.embed(c.train[0]).vectors;
  double prev = loss_only(p, X, c.train[0].labels);
  for (int step = 0; step < 20; ++step) {
    auto r = loss_and_gradients(p, X, c.train[0].labels);
    sgd_nesterov_step(p, r.grads, st, 0.001, 0.9);
    double cur = loss_only(p, X, c.train[0].labels);
    EXPECT_LT(cur, prev) << "step " << step;
    prev = cur;
  }
}

TEST(Training, DeterministicForFixedSeed) {
  auto c = synthetic::make_corpus(small_spec(), 12, 4, 0);
  FixedProvider provider(c.embeddings);
  auto a = train(c.train, c.dev, provider, small_config());
  auto b = train(c.train, c.dev, provider, small_config());
  ASSERT_EQ(a.history.epochs.size(), b.history.epochs.size());
  for (std::size_t e = 0; e < a.history.epochs.size(); ++e) {
    EXPECT_EQ(a.history.epochs[e].train_loss, b.history.epochs[e].train_loss);
    EXPECT_EQ(a.history.epochs[e].dev.f1, b.history.epochs[e].dev.f1);
  }
  std::vector<const Matrix*> ta, tb;
  a.params.for_each([&](const std::string&, const Matrix& m) { ta.push_back(&m); });
  b.params.for_each([&](const std::string&, const Matrix& m) { tb.push_back(&m); });
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t k = 0; k < ta.size(); ++k) EXPECT_EQ(*ta[k], *tb[k]);
}

TEST(Training, HistoryLrSequenceIsNonIncreasingByFactor) {
  auto c = synthetic::make_corpus(small_spec(), 8, 3, 0);
  FixedProvider provider(c.embeddings);
  TrainConfig cfg = small_config();
  cfg.epochs = 14;
  cfg.patience = 1;
  auto r = train(c.train, c.dev, provider, cfg);
  ASSERT_FALSE(r.history.epochs.empty());
  EXPECT_EQ(r.history.epochs.front().lr, cfg.lr);
  for (std::size_t e = 1; e < r.history.epochs.size(); ++e) {
    double prev = r.history.epochs[e - 1].lr, cur = r.history.epochs[e].lr;
    EXPECT_TRUE(cur == prev || cur == prev * cfg.anneal_factor) << e;
  }
  EXPECT_GE(r.history.best_epoch, 1u);
}

TEST(Training, StopsOnceLearningRateFallsBelowFloor) {
  auto c = synthetic::make_corpus(small_spec(), 4, 2, 0);
  FixedProvider provider(c.embeddings);
  TrainConfig cfg = small_config();
  cfg.epochs = 100;
  cfg.patience = 1;
  cfg.min_lr = 0.02;  // 0.05 -> 0.025 -> 0.0125 stops
  auto r = train(c.train, c.dev, provider, cfg);
  EXPECT_LT(r.history.epochs.size(), 100u);
  EXPECT_GE(r.history.epochs.back().lr, 0.02);
}

TEST(Training, SoftmaxHeadPathTrains) {
  auto c = synthetic::make_corpus(small_spec(), 12, 4, 0);
  FixedProvider provider(c.embeddings);
  TrainConfig cfg = small_config();
  cfg.use_crf = false;
  auto r = train(c.train, c.dev, provider, cfg);
  EXPECT_TRUE(r.params.transitions.size() == 0);
  EXPECT_EQ(r.history.epochs.size(), 3u);
  EXPECT_TRUE(std::isfinite(r.history.epochs.back().train_loss));
}

TEST(Training, MissingContextualDocumentFailsBeforeFirstEpoch) {
  auto c = synthetic::make_corpus(small_spec(), 3, 1, 0);
  ContextualStore store(6);
  for (const auto& d : c.train) store.insert(d.doc_id, Matrix::Zero(static_cast<Eigen::Index>(d.size()), 6));
  ContextualProvider provider(std::move(store));
  bool any_epoch = false;
  EXPECT_THROW(train(c.train, c.dev, provider, small_config(), [&](const EpochRecord&) { any_epoch = true; }),
               DataError);
  EXPECT_FALSE(any_epoch);
}

TEST(Training, RejectsInvalidConfig) {
  auto c = synthetic::make_corpus(small_spec(), 2, 1, 0);
  FixedProvider provider(c.embeddings);
  TrainConfig cfg = small_config();
  cfg.anneal_factor = 1.5;
  EXPECT_THROW(train(c.train, c.dev, provider, cfg), std::invalid_argument);
  cfg = small_config();
  cfg.batch_size = 0;
  EXPECT_THROW(train(c.train, c.dev, provider, cfg), std::invalid_argument);
  EXPECT_THROW(train({}, c.dev, provider, small_config()), DataError);
}

TEST(Checkpoint, RoundTripAndPredictionEquality) {
  auto c = synthetic::make_corpus(small_spec(), 10, 3, 5);
  FixedProvider provider(c.embeddings);
  TrainConfig cfg = small_config();
  cfg.constrain_bio = true;
  cfg.full_peephole = true;
  auto r = train(c.train, c.dev, provider, cfg);
  std::string path = temp_path("ckpt.json");
  save_checkpoint(r.params, cfg, path);
  auto ck = load_checkpoint(path);
  EXPECT_EQ(nlohmann::json(ck.config), nlohmann::json(cfg));
  std::vector<const Matrix*> a, b;
  r.params.for_each([&](const std::string&, const Matrix& m) { a.push_back(&m); });
  ck.params.for_each([&](const std::string&, const Matrix& m) { b.push_back(&m); });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(*a[k], *b[k]);
  EXPECT_EQ(predict_all(r.params, c.test, provider), predict_all(ck.params, c.test, provider));
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsVersionAndTruncation) {
  auto c = synthetic::make_corpus(small_spec(), 2, 1, 0);
  std::mt19937_64 rng(1);
  TrainConfig cfg = small_config();
  ModelParams p = init_model(cfg.shape(6), rng);
  auto j = checkpoint_json(p, cfg);
  j["version"] = 99;
  std::string path = temp_path("v99.json");
  std::ofstream(path) << j.dump();
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported checkpoint version"), std::string::npos);
  }
  std::string full = checkpoint_json(p, cfg).dump();
  std::ofstream(path, std::ios::trunc) << full.substr(0, full.size() / 2);
  EXPECT_THROW(load_checkpoint(path), DataError);
  auto missing = checkpoint_json(p, cfg);
  missing["tensors"].erase("fwd.w_co");
  std::ofstream(path, std::ios::trunc) << missing.dump();
  EXPECT_THROW(load_checkpoint(path), DataError);
  std::filesystem::remove(path);
}

TEST(History, CsvLayout) {
  TrainHistory h;
  h.epochs.push_back({1, 2.5, evaluate::metrics_from_counts(1, 2, 2), 0.05});
  std::string csv = history_csv(h);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,dev_p,dev_r,dev_f1,lr");
  EXPECT_NE(csv.find("1,2.5,0.5,0.5,0.5,0.05"), std::string::npos) << csv;
}
