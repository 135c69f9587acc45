#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpseq/kpseq.hpp"

using namespace kpseq;
using nlohmann::json;

namespace {

struct GlobalOptions {
  bool json = false;
  std::size_t max_tokens = kDefaultMaxTokens;
};

struct SourceOptions {
  std::string embeddings;
  std::string contextual;
  std::string oov = "zeros";
};

void add_source_options(CLI::App* sub, SourceOptions& s) {
  auto* group = sub->add_option_group("embedding source", "exactly one of --embeddings or --contextual");
  group->add_option("--embeddings", s.embeddings, "fixed word-vector text file")->check(CLI::ExistingFile);
  group->add_option("--contextual", s.contextual, "contextual store (JSON lines)")->check(CLI::ExistingFile);
  group->require_option(1);
  sub->add_option("--oov", s.oov, "OOV vector for fixed embeddings")
      ->check(CLI::IsMember({"zeros", "averaged"}))
      ->capture_default_str();
}

std::unique_ptr<EmbeddingProvider> make_provider(const SourceOptions& s) {
  if (!s.embeddings.empty()) {
    auto policy = s.oov == "averaged" ? OovPolicy::kAveraged : OovPolicy::kZeros;
    return std::make_unique<FixedProvider>(embeddings::load_fixed(s.embeddings, policy));
  }
  return std::make_unique<ContextualProvider>(embeddings::load_contextual(s.contextual));
}

json source_json(const SourceOptions& s) {
  if (!s.embeddings.empty()) return {{"embeddings", s.embeddings}, {"oov", s.oov}};
  return {{"contextual", s.contextual}};
}

json metrics_report(const Metrics& m, Averaging mode) { return evaluate::to_json(m, mode); }

void print_metrics(const GlobalOptions& g, const Metrics& m, Averaging mode, const json& extra = json::object()) {
  if (g.json) {
    json j = metrics_report(m, mode);
    for (auto& [k, v] : extra.items()) j[k] = v;
    std::cout << j.dump() << '\n';
    return;
  }
  std::printf("%-10s %8s %8s %8s %6s %6s %6s\n", "averaging", "P", "R", "F1", "tp", "pred", "gold");
  std::printf("%-10s %8.4f %8.4f %8.4f %6zu %6zu %6zu\n", mode == Averaging::kMacro ? "macro" : "micro", m.precision,
              m.recall, m.f1, m.tp, m.n_pred, m.n_gold);
}

std::vector<Prediction> decode_predictions(const std::vector<Document>& docs,
                                           const std::vector<LabelSequence>& labels) {
  std::vector<Prediction> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i)
    out.push_back({docs[i].doc_id, evaluate::decode_spans(labels[i], docs[i].tokens)});
  return out;
}

// preprocess ----------------------------------------------------------------

struct PreprocessOptions {
  std::string raw, out;
  bool warn_dropped = false;
};

int run_preprocess(const GlobalOptions& g, const PreprocessOptions& o) {
  auto report = corpus::preprocess(corpus::load_raw(o.raw));
  for (const auto& d : report.docs)
    if (d.size() > g.max_tokens)
      throw DataError("document " + d.doc_id + " has " + std::to_string(d.size()) + " tokens, above the limit of " +
                      std::to_string(g.max_tokens));
  corpus::save_processed(report.docs, o.out);
  if (o.warn_dropped && report.dropped_phrases > 0)
    std::cerr << "warning: " << report.dropped_phrases << " keyphrases do not occur in their text and were dropped\n";
  if (g.json)
    std::cout << json{{"documents", report.docs.size()}, {"dropped_phrases", report.dropped_phrases}, {"output", o.out}}
                     .dump()
              << '\n';
  else
    std::cout << "wrote " << report.docs.size() << " documents to " << o.out << '\n';
  return 0;
}

// stats ---------------------------------------------------------------------

int run_stats(const GlobalOptions& g, const std::string& path) {
  auto s = corpus::compute_stats(corpus::load_processed(path, g.max_tokens));
  if (g.json) {
    std::cout << corpus::to_json(s).dump() << '\n';
    return 0;
  }
  std::printf("num_docs=%zu\n", s.num_docs);
  std::printf("avg_keyphrases=%.2f\n", s.avg_keyphrases);
  std::printf("max_phrase_len=%zu\n", s.max_phrase_len);
  std::printf("avg_phrase_len=%.2f\n", s.avg_phrase_len);
  std::printf("avg_tokens=%.2f\n", s.avg_tokens);
  std::printf("max_tokens=%zu\n", s.max_tokens);
  std::printf("min_tokens=%zu\n", s.min_tokens);
  return 0;
}

// train ---------------------------------------------------------------------

struct TrainOptions {
  std::string train, dev, out, history;
  SourceOptions source;
  training::TrainConfig config;
  bool no_crf = false;
  bool quiet = false;
};

int run_train(const GlobalOptions& g, TrainOptions& o) {
  o.config.use_crf = !o.no_crf;
  o.config.validate();
  json effective = o.config;
  effective["train"] = o.train;
  effective["dev"] = o.dev;
  effective["output"] = o.out;
  effective["max_tokens"] = g.max_tokens;
  effective.update(source_json(o.source));
  std::cerr << "config " << effective.dump() << '\n';

  auto train_docs = corpus::load_processed(o.train, g.max_tokens);
  auto dev_docs = corpus::load_processed(o.dev, g.max_tokens);
  auto provider = make_provider(o.source);
  auto on_epoch = [&](const training::EpochRecord& r) {
    if (o.quiet) return;
    std::fprintf(stderr, "epoch %3zu  loss %10.4f  dev P %.4f R %.4f F1 %.4f  lr %.6g\n", r.epoch, r.train_loss,
                 r.dev.precision, r.dev.recall, r.dev.f1, r.lr);
  };
  auto result = training::train(train_docs, dev_docs, *provider, o.config, on_epoch);
  training::save_checkpoint(result.params, o.config, o.out);
  if (!o.history.empty()) io::write_text_atomic(o.history, training::history_csv(result.history));

  const auto& best = result.history.epochs.at(result.history.best_epoch ? result.history.best_epoch - 1 : 0);
  if (g.json) {
    std::cout << json{{"config", effective},
                      {"epochs_run", result.history.epochs.size()},
                      {"best_epoch", result.history.best_epoch},
                      {"best_dev", evaluate::to_json(best.dev, Averaging::kMicro)},
                      {"checkpoint", o.out}}
                     .dump()
              << '\n';
  } else {
    std::cout << "config " << effective.dump() << '\n';
    std::printf("trained %zu epochs; best dev F1 %.4f at epoch %zu; checkpoint %s\n", result.history.epochs.size(),
                best.dev.f1, result.history.best_epoch, o.out.c_str());
  }
  return 0;
}

// predict -------------------------------------------------------------------

struct PredictOptions {
  std::string checkpoint, input, out;
  SourceOptions source;
};

int run_predict(const GlobalOptions& g, const PredictOptions& o) {
  auto ck = training::load_checkpoint(o.checkpoint);
  auto docs = corpus::load_processed(o.input, g.max_tokens);
  auto provider = make_provider(o.source);
  auto expected = static_cast<std::size_t>(ck.params.lstm.forward.input_dim());
  if (provider->dim() != expected)
    throw DataError("embedding dim " + std::to_string(provider->dim()) + " does not match checkpoint input dim " +
                    std::to_string(expected));
  provider->check_covers(docs);
  auto preds = decode_predictions(docs, training::predict_all(ck.params, docs, *provider));
  predictions::save(preds, o.out);
  if (g.json)
    std::cout << json{{"documents", preds.size()}, {"output", o.out}}.dump() << '\n';
  else
    std::cout << "wrote predictions for " << preds.size() << " documents to " << o.out << '\n';
  return 0;
}

// eval ----------------------------------------------------------------------

struct EvalOptions {
  std::string preds, gold;
  bool macro = false;
  bool stem = false;
};

int run_eval(const GlobalOptions& g, const EvalOptions& o) {
  auto pairs = predictions::pair_with_gold(predictions::load(o.preds), corpus::load_processed(o.gold, g.max_tokens));
  if (o.stem) pairs = predictions::stem_pairs(std::move(pairs));
  auto mode = o.macro ? Averaging::kMacro : Averaging::kMicro;
  print_metrics(g, evaluate::corpus_metrics(pairs, mode), mode);
  return 0;
}

// baseline ------------------------------------------------------------------

struct BaselineOptions {
  std::string method, input, train, out;
  std::size_t k = 0;
  bool macro = false;
  bool stem = false;
};

int run_baseline(const GlobalOptions& g, const BaselineOptions& o) {
  auto method = baselines::parse_method(o.method);
  auto docs = corpus::load_processed(o.input, g.max_tokens);
  std::optional<baselines::KeaModel> kea;
  if (method == baselines::Method::kKea) {
    if (o.train.empty()) throw std::invalid_argument("kea needs --train <processed>");
    kea = baselines::kea_train(corpus::load_processed(o.train, g.max_tokens));
  }
  auto mode = o.macro ? Averaging::kMacro : Averaging::kMicro;
  auto run = baselines::baseline_evaluate(method, docs, o.k, kea ? &*kea : nullptr, mode, o.stem);
  if (!o.out.empty()) {
    std::vector<Prediction> preds;
    for (std::size_t i = 0; i < docs.size(); ++i) preds.push_back({docs[i].doc_id, run.predictions[i]});
    predictions::save(preds, o.out);
  }
  print_metrics(g, run.metrics, mode, {{"method", o.method}, {"k", o.k == 0 ? json("gold") : json(o.k)}});
  return 0;
}

// synth ---------------------------------------------------------------------

struct SynthOptions {
  std::string dir;
  std::size_t n_train = 300, n_dev = 50, n_test = 50;
  synthetic::SyntheticSpec spec;
};

int run_synth(const GlobalOptions& g, const SynthOptions& o) {
  namespace fs = std::filesystem;
  fs::create_directories(o.dir);
  auto c = synthetic::make_corpus(o.spec, o.n_train, o.n_dev, o.n_test);
  auto path = [&](const char* name) { return (fs::path(o.dir) / name).string(); };
  corpus::save_processed(c.train, path("train.jsonl"));
  corpus::save_processed(c.dev, path("dev.jsonl"));
  corpus::save_processed(c.test, path("test.jsonl"));
  embeddings::save_fixed(c.embeddings, path("embeddings.txt"));
  if (g.json)
    std::cout << json{{"directory", o.dir}, {"train", c.train.size()}, {"dev", c.dev.size()}, {"test", c.test.size()},
                      {"dim", o.spec.dim}}
                     .dump()
              << '\n';
  else
    std::cout << "wrote train/dev/test.jsonl and embeddings.txt (dim " << o.spec.dim << ") to " << o.dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BiLSTM-CRF keyphrase extraction"};
  app.fallthrough();
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_flag("--json", g.json, "machine-readable output");
  app.add_option("--max-tokens", g.max_tokens, "reject documents longer than this")->capture_default_str();

  PreprocessOptions pre;
  auto* sp = app.add_subcommand("preprocess", "tokenize raw abstracts and tag B-I-O labels");
  sp->add_option("raw", pre.raw, "raw JSON lines {doc_id, text, keyphrases}")->required()->check(CLI::ExistingFile);
  sp->add_option("-o,--output", pre.out, "processed output")->required();
  sp->add_flag("--warn-dropped", pre.warn_dropped, "report keyphrases absent from their text");

  std::string stats_path;
  auto* ss = app.add_subcommand("stats", "dataset statistics");
  ss->add_option("processed", stats_path)->required()->check(CLI::ExistingFile);

  TrainOptions tr;
  auto* st = app.add_subcommand("train", "train a tagger");
  st->add_option("train", tr.train)->required()->check(CLI::ExistingFile);
  st->add_option("dev", tr.dev)->required()->check(CLI::ExistingFile);
  st->add_option("-o,--output", tr.out, "checkpoint path")->required();
  add_source_options(st, tr.source);
  st->add_flag("--no-crf", tr.no_crf, "softmax output layer instead of the CRF");
  st->add_option("--lr", tr.config.lr)->capture_default_str();
  st->add_option("--batch", tr.config.batch_size)->capture_default_str();
  st->add_option("--epochs", tr.config.epochs)->capture_default_str();
  st->add_option("--patience", tr.config.patience)->capture_default_str();
  st->add_option("--anneal", tr.config.anneal_factor)->capture_default_str();
  st->add_option("--hidden", tr.config.hidden_size)->capture_default_str();
  st->add_option("--word-dropout", tr.config.word_dropout)->capture_default_str();
  st->add_option("--momentum", tr.config.momentum)->capture_default_str();
  st->add_option("--seed", tr.config.seed)->capture_default_str();
  st->add_option("--min-lr", tr.config.min_lr)->capture_default_str();
  st->add_flag("--constrain-bio", tr.config.constrain_bio, "forbid START->I and O->I transitions");
  st->add_flag("--full-peephole", tr.config.full_peephole, "full matrix peephole weights");
  st->add_flag("--peephole-o-prev", tr.config.o_peephole_prev, "output-gate peephole reads the previous cell");
  st->add_option("--history", tr.history, "write per-epoch history as CSV");
  st->add_flag("--quiet", tr.quiet, "no per-epoch progress");

  PredictOptions pr;
  auto* spr = app.add_subcommand("predict", "tag documents with a trained model");
  spr->add_option("checkpoint", pr.checkpoint)->required()->check(CLI::ExistingFile);
  spr->add_option("processed", pr.input)->required()->check(CLI::ExistingFile);
  spr->add_option("-o,--output", pr.out, "predictions output")->required();
  add_source_options(spr, pr.source);

  EvalOptions ev;
  auto* se = app.add_subcommand("eval", "exact-match P/R/F1 against gold");
  se->add_option("predictions", ev.preds)->required()->check(CLI::ExistingFile);
  se->add_option("gold", ev.gold, "processed gold corpus")->required()->check(CLI::ExistingFile);
  se->add_flag("--macro", ev.macro, "macro-average over documents");
  se->add_flag("--stem", ev.stem, "Porter-stem both sides before matching");

  BaselineOptions bl;
  auto* sb = app.add_subcommand("baseline", "run textrank, singlerank or kea");
  sb->add_option("method", bl.method)->required()->check(CLI::IsMember({"textrank", "singlerank", "kea"}, CLI::ignore_case));
  sb->add_option("processed", bl.input)->required()->check(CLI::ExistingFile);
  sb->add_option("-k", bl.k, "phrases per document (0: gold count)")->capture_default_str();
  sb->add_option("--train", bl.train, "training corpus for kea")->check(CLI::ExistingFile);
  sb->add_option("-o,--output", bl.out, "predictions output");
  sb->add_flag("--macro", bl.macro);
  sb->add_flag("--stem", bl.stem);

  SynthOptions sy;
  auto* sy_cmd = app.add_subcommand("synth", "generate a synthetic corpus with matching embeddings");
  sy_cmd->add_option("dir", sy.dir)->required();
  sy_cmd->add_option("--train", sy.n_train)->capture_default_str();
  sy_cmd->add_option("--dev", sy.n_dev)->capture_default_str();
  sy_cmd->add_option("--test", sy.n_test)->capture_default_str();
  sy_cmd->add_option("--dim", sy.spec.dim)->capture_default_str();
  sy_cmd->add_option("--seed", sy.spec.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*sp) return run_preprocess(g, pre);
    if (*ss) return run_stats(g, stats_path);
    if (*st) return run_train(g, tr);
    if (*spr) return run_predict(g, pr);
    if (*se) return run_eval(g, ev);
    if (*sb) return run_baseline(g, bl);
    if (*sy_cmd) return run_synth(g, sy);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
