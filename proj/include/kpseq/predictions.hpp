#ifndef KPSEQ_PREDICTIONS_HPP_
#define KPSEQ_PREDICTIONS_HPP_

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kpseq/corpus.hpp"
#include "kpseq/error.hpp"
#include "kpseq/evaluate.hpp"
#include "kpseq/io.hpp"

namespace kpseq {

/// One line of a predictions file.
struct Prediction {
  std::string doc_id;
  KeyphraseSet keyphrases;
};

namespace predictions {

inline void save(const std::vector<Prediction>& preds, const std::string& path) {
  io::write_atomic(path, [&](std::ostream& out) {
    for (const auto& p : preds)
      out << nlohmann::json{{"doc_id", p.doc_id}, {"keyphrases", p.keyphrases}}.dump() << '\n';
  });
}

/// Phrases are re-normalized on load so hand-written files compare like
/// decoded ones.
inline std::vector<Prediction> load(const std::string& path) {
  std::vector<Prediction> out;
  std::unordered_set<std::string> seen;
  io::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    Prediction p;
    p.doc_id = j.at("doc_id").get<std::string>();
    if (!seen.insert(p.doc_id).second) throw DataError(path, line, "duplicate doc_id " + p.doc_id);
    for (const auto& k : j.at("keyphrases").get<std::vector<std::string>>()) {
      std::string n = evaluate::normalize_text(k);
      if (!n.empty()) p.keyphrases.insert(std::move(n));
    }
    out.push_back(std::move(p));
  });
  return out;
}

/// (predicted, gold) pairs in gold order. Every gold document needs a
/// prediction and every prediction must name a gold document.
inline std::vector<std::pair<KeyphraseSet, KeyphraseSet>> pair_with_gold(const std::vector<Prediction>& preds,
                                                                         const std::vector<Document>& gold) {
  std::unordered_map<std::string, const KeyphraseSet*> by_id;
  for (const auto& p : preds) by_id.emplace(p.doc_id, &p.keyphrases);
  std::vector<std::pair<KeyphraseSet, KeyphraseSet>> pairs;
  for (const auto& d : gold) {
    auto it = by_id.find(d.doc_id);
    if (it == by_id.end()) throw DataError("no prediction for document " + d.doc_id);
    pairs.emplace_back(*it->second, d.gold_phrases);
    by_id.erase(it);
  }
  if (!by_id.empty()) throw DataError("prediction for unknown document " + by_id.begin()->first);
  return pairs;
}

inline std::vector<std::pair<KeyphraseSet, KeyphraseSet>> stem_pairs(
    std::vector<std::pair<KeyphraseSet, KeyphraseSet>> pairs) {
  for (auto& [p, g] : pairs) {
    p = evaluate::stem_set(p);
    g = evaluate::stem_set(g);
  }
  return pairs;
}

}  // namespace predictions
}  // namespace kpseq

#endif  // KPSEQ_PREDICTIONS_HPP_
