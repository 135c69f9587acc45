#ifndef KPSEQ_EVALUATE_HPP_
#define KPSEQ_EVALUATE_HPP_

#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kpseq/error.hpp"
#include "kpseq/label.hpp"
#include "kpseq/porter_stemmer.hpp"
#include "kpseq/tokenize.hpp"

namespace kpseq {

/// Normalized phrases: lowercase, single-space-joined, no empties.
using KeyphraseSet = std::set<std::string>;

struct Metrics {
  std::size_t tp = 0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

enum class Averaging { kMicro, kMacro };

namespace evaluate {

/// Spans start at KB and run through the maximal following KI block. A KI
/// with no KB/KI before it is ignored.
inline KeyphraseSet decode_spans(const LabelSequence& labels, const std::vector<std::string>& tokens) {
  if (labels.size() != tokens.size())
    throw ShapeError("decode_spans: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(tokens.size()) + " tokens");
  KeyphraseSet out;
  std::size_t t = 0;
  while (t < labels.size()) {
    if (labels[t] != Label::KB) {
      ++t;
      continue;
    }
    std::size_t end = t + 1;
    while (end < labels.size() && labels[end] == Label::KI) ++end;
    out.insert(normalize_phrase({tokens.begin() + t, tokens.begin() + end}));
    t = end;
  }
  return out;
}

/// Normalizes free text the same way decoded spans are normalized.
inline std::string normalize_text(const std::string& phrase) {
  std::istringstream in(phrase);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(std::move(w));
  return normalize_phrase(words);
}

inline std::string stem_phrase(const std::string& normalized) {
  static const PorterStemmer stem;
  std::istringstream in(normalized);
  std::string out;
  for (std::string w; in >> w;) {
    if (!out.empty()) out.push_back(' ');
    out += stem(w);
  }
  return out;
}

inline KeyphraseSet stem_set(const KeyphraseSet& phrases) {
  KeyphraseSet out;
  for (const auto& p : phrases) out.insert(stem_phrase(p));
  return out;
}

inline Metrics metrics_from_counts(std::size_t tp, std::size_t n_pred, std::size_t n_gold) {
  Metrics m{tp, n_pred, n_gold, 0.0, 0.0, 0.0};
  m.precision = n_pred ? static_cast<double>(tp) / static_cast<double>(n_pred) : 0.0;
  m.recall = n_gold ? static_cast<double>(tp) / static_cast<double>(n_gold) : 0.0;
  double s = m.precision + m.recall;
  m.f1 = s > 0.0 ? 2.0 * m.precision * m.recall / s : 0.0;
  return m;
}

inline Metrics exact_match_prf(const KeyphraseSet& pred, const KeyphraseSet& gold) {
  std::size_t tp = 0;
  for (const auto& p : pred) tp += gold.count(p);
  return metrics_from_counts(tp, pred.size(), gold.size());
}

/// Micro: pool (tp, n_pred, n_gold) then score. Macro: average per-document
/// P, R and F1; counts still report the pooled totals.
inline Metrics corpus_metrics(const std::vector<std::pair<KeyphraseSet, KeyphraseSet>>& pairs,
                              Averaging mode = Averaging::kMicro) {
  if (pairs.empty()) throw DataError("corpus_metrics: no documents");
  std::size_t tp = 0, np = 0, ng = 0;
  double p = 0.0, r = 0.0, f = 0.0;
  for (const auto& [pred, gold] : pairs) {
    Metrics m = exact_match_prf(pred, gold);
    tp += m.tp;
    np += m.n_pred;
    ng += m.n_gold;
    p += m.precision;
    r += m.recall;
    f += m.f1;
  }
  Metrics out = metrics_from_counts(tp, np, ng);
  if (mode == Averaging::kMacro) {
    double n = static_cast<double>(pairs.size());
    out.precision = p / n;
    out.recall = r / n;
    out.f1 = f / n;
  }
  return out;
}

inline nlohmann::json to_json(const Metrics& m, Averaging mode) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"tp", m.tp},               {"n_pred", m.n_pred}, {"n_gold", m.n_gold},
          {"averaging", mode == Averaging::kMicro ? "micro" : "macro"}};
}

}  // namespace evaluate
}  // namespace kpseq

#endif  // KPSEQ_EVALUATE_HPP_
