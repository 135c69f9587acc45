#ifndef KPSEQ_TRAINING_HPP_
#define KPSEQ_TRAINING_HPP_

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpseq/corpus.hpp"
#include "kpseq/embeddings.hpp"
#include "kpseq/evaluate.hpp"
#include "kpseq/io.hpp"
#include "kpseq/model.hpp"
#include "kpseq/optimizer.hpp"

namespace kpseq::training {

struct TrainConfig {
  double lr = 0.05;
  std::size_t batch_size = 4;
  std::size_t epochs = 100;
  std::size_t patience = 4;
  double anneal_factor = 0.5;
  double momentum = 0.9;
  std::size_t hidden_size = 128;
  double word_dropout = 0.05;
  bool use_crf = true;
  std::uint64_t seed = 1;
  double min_lr = 1e-4;
  bool constrain_bio = false;
  bool full_peephole = false;
  bool o_peephole_prev = false;

  void validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
    if (!(anneal_factor > 0.0 && anneal_factor < 1.0)) throw std::invalid_argument("anneal factor must lie in (0, 1)");
    if (!(word_dropout >= 0.0 && word_dropout < 1.0)) throw std::invalid_argument("word dropout must lie in [0, 1)");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
    if (hidden_size < 1) throw std::invalid_argument("hidden size must be at least 1");
  }

  ModelShape shape(std::size_t input_dim) const {
    return {static_cast<Eigen::Index>(input_dim), static_cast<Eigen::Index>(hidden_size), use_crf, constrain_bio,
            LstmOptions{full_peephole, o_peephole_prev}};
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, lr, batch_size, epochs, patience, anneal_factor,
                                                momentum, hidden_size, word_dropout, use_crf, seed, min_lr,
                                                constrain_bio, full_peephole, o_peephole_prev)

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  Metrics dev;
  double lr = 0.0;  // in effect during the epoch
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
};

inline std::string history_csv(const TrainHistory& h) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,dev_p,dev_r,dev_f1,lr\n";
  for (const auto& e : h.epochs)
    out << e.epoch << ',' << e.train_loss << ',' << e.dev.precision << ',' << e.dev.recall << ',' << e.dev.f1 << ','
        << e.lr << '\n';
  return out.str();
}

inline std::vector<LabelSequence> predict_all(const ModelParams& params, const std::vector<Document>& docs,
                                              const EmbeddingProvider& provider) {
  std::vector<LabelSequence> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(predict_labels(params, provider.embed(d).vectors));
  return out;
}

inline Metrics evaluate_model(const ModelParams& params, const std::vector<Document>& docs,
                              const EmbeddingProvider& provider, Averaging mode = Averaging::kMicro) {
  std::vector<std::pair<KeyphraseSet, KeyphraseSet>> pairs;
  pairs.reserve(docs.size());
  for (const auto& d : docs)
    pairs.emplace_back(evaluate::decode_spans(predict_labels(params, provider.embed(d).vectors), d.tokens),
                       d.gold_phrases);
  return evaluate::corpus_metrics(pairs, mode);
}

struct TrainResult {
  ModelParams params;  // from the best dev-F1 epoch
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training. Each epoch shuffles the training documents, takes one
/// Nesterov step per batch on the batch-mean gradient, then scores the dev
/// set (dropout off). The dev micro-F1 drives the plateau schedule and the
/// choice of returned parameters. Training stops after `epochs` or once the
/// learning rate falls below `min_lr`.
inline TrainResult train(const std::vector<Document>& train_docs, const std::vector<Document>& dev_docs,
                         const EmbeddingProvider& provider, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
  config.validate();
  if (train_docs.empty()) throw DataError("training set is empty");
  if (dev_docs.empty()) throw DataError("dev set is empty");
  provider.check_covers(train_docs);
  provider.check_covers(dev_docs);

  std::vector<Matrix> inputs;
  inputs.reserve(train_docs.size());
  for (const auto& d : train_docs) inputs.push_back(provider.embed(d).vectors);

  std::mt19937_64 rng(config.seed);
  ModelParams params = init_model(config.shape(provider.dim()), rng);
  OptimizerState state = make_optimizer_state(params, config.lr, config.patience, config.anneal_factor);

  TrainResult result{params, {}};
  std::vector<std::size_t> order(train_docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = state.schedule.lr();
    double total_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::size_t stop = std::min(order.size(), start + config.batch_size);
      GradientSet batch = zeros_like(params);
      std::vector<Matrix*> acc;
      batch.for_each([&](const std::string&, Matrix& m) { acc.push_back(&m); });
      for (std::size_t k = start; k < stop; ++k) {
        std::size_t idx = order[k];
        Matrix X = neural::word_dropout(inputs[idx], config.word_dropout, rng);
        LossResult r = loss_and_gradients(params, X, train_docs[idx].labels);
        total_loss += r.loss;
        std::size_t slot = 0;
        r.grads.for_each([&](const std::string&, const Matrix& g) { *acc[slot++] += g; });
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (Matrix* m : acc) *m *= scale;
      sgd_nesterov_step(params, batch, state, lr, config.momentum);
    }

    EpochRecord rec{epoch, total_loss / static_cast<double>(train_docs.size()),
                    evaluate_model(params, dev_docs, provider), lr};
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (state.schedule.observe(rec.dev.f1).improved) {
      result.params = params;
      result.history.best_epoch = epoch;
    }
    if (state.schedule.lr() < config.min_lr) break;
  }
  return result;
}

// Checkpoints ---------------------------------------------------------------

inline constexpr const char* kCheckpointFormat = "kpseq-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
};

inline nlohmann::json checkpoint_json(const ModelParams& params, const TrainConfig& config) {
  nlohmann::json cfg = config;
  cfg["input_dim"] = params.lstm.forward.input_dim();
  nlohmann::json tensors = nlohmann::json::object();
  params.for_each([&](const std::string& name, const Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    tensors[name] = {{"dims", {m.rows(), m.cols()}}, {"data", std::move(data)}};
  });
  return {{"format", kCheckpointFormat}, {"version", kCheckpointVersion}, {"config", cfg}, {"tensors", tensors}};
}

inline void save_checkpoint(const ModelParams& params, const TrainConfig& config, const std::string& path) {
  io::write_text_atomic(path, checkpoint_json(params, config).dump() + "\n");
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != kCheckpointFormat) throw DataError("not a kpseq checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw DataError("unsupported checkpoint version " + j.at("version").dump());
    Checkpoint ck{{}, j.at("config").get<TrainConfig>()};
    auto dim = j.at("config").at("input_dim").get<std::size_t>();
    std::mt19937_64 unused(0);
    ck.params = zeros_like(init_model(ck.config.shape(dim), unused));
    const auto& tensors = j.at("tensors");
    std::size_t seen = 0;
    ck.params.for_each([&](const std::string& name, Matrix& m) {
      if (!tensors.contains(name)) throw DataError("checkpoint is missing tensor " + name);
      const auto& t = tensors.at(name);
      auto dims = t.at("dims").get<std::vector<Eigen::Index>>();
      if (dims.size() != 2 || dims[0] != m.rows() || dims[1] != m.cols())
        throw DataError("tensor " + name + " has dims " + t.at("dims").dump() + ", expected [" +
                        std::to_string(m.rows()) + "," + std::to_string(m.cols()) + "]");
      const auto& data = t.at("data");
      if (data.size() != static_cast<std::size_t>(m.size()))
        throw DataError("tensor " + name + " has " + std::to_string(data.size()) + " values, expected " +
                        std::to_string(m.size()));
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[k++].get<double>();
      ++seen;
    });
    if (seen != tensors.size()) throw DataError("checkpoint has unexpected extra tensors");
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline Checkpoint load_checkpoint(const std::string& path) {
  auto in = io::open_input(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": truncated or malformed checkpoint: " + e.what());
  }
  try {
    return checkpoint_from_json(j);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace kpseq::training

#endif  // KPSEQ_TRAINING_HPP_
