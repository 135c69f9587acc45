#ifndef KPSEQ_CORPUS_HPP_
#define KPSEQ_CORPUS_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "kpseq/error.hpp"
#include "kpseq/evaluate.hpp"
#include "kpseq/io.hpp"
#include "kpseq/label.hpp"
#include "kpseq/tokenize.hpp"

namespace kpseq {

inline constexpr std::size_t kDefaultMaxTokens = 600;

struct RawDocument {
  std::string doc_id;
  std::string text;
  std::vector<std::string> keyphrases;
};

/// A tokenized, B-I-O labeled abstract. Construct through make_document so
/// the label invariants are checked and gold_phrases is derived.
struct Document {
  std::string doc_id;
  std::vector<std::string> tokens;
  LabelSequence labels;
  KeyphraseSet gold_phrases;

  std::size_t size() const { return tokens.size(); }

  friend bool operator==(const Document& a, const Document& b) {
    return a.doc_id == b.doc_id && a.tokens == b.tokens && a.labels == b.labels;
  }
};

inline Document make_document(std::string doc_id, std::vector<std::string> tokens, LabelSequence labels) {
  if (doc_id.empty()) throw DataError("document with empty doc_id");
  if (tokens.empty()) throw DataError("document " + doc_id + " has no tokens");
  if (tokens.size() != labels.size())
    throw DataError("document " + doc_id + ": " + std::to_string(tokens.size()) + " tokens but " +
                    std::to_string(labels.size()) + " labels");
  if (!is_well_formed(labels)) throw DataError("document " + doc_id + ": I label not preceded by B or I");
  Document d{std::move(doc_id), std::move(tokens), std::move(labels), {}};
  d.gold_phrases = evaluate::decode_spans(d.labels, d.tokens);
  return d;
}

struct TagResult {
  LabelSequence labels;
  std::size_t dropped = 0;  // keyphrases with no occurrence in the tokens
};

namespace corpus {

/// Greedy matcher: phrase lengths are tried longest first, and within one
/// length positions are scanned left to right. Every free occurrence is
/// labeled, so spans never overlap and the input order of phrases is
/// irrelevant. Matching is case-insensitive.
inline TagResult tag_bio_detailed(const std::vector<std::string>& tokens,
                                  const std::vector<std::string>& keyphrases) {
  TagResult r{LabelSequence(tokens.size(), Label::KO), 0};
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(to_lower(t));

  std::map<std::size_t, std::set<std::vector<std::string>>, std::greater<>> by_length;
  for (const auto& kp : keyphrases) {
    std::vector<std::string> toks = tokenize(kp);
    if (toks.empty()) continue;
    for (auto& t : toks) t = to_lower(t);
    by_length[toks.size()].insert(std::move(toks));
  }

  std::vector<bool> taken(tokens.size(), false);
  std::set<std::vector<std::string>> matched;
  for (const auto& [len, phrases] : by_length) {
    if (len > tokens.size()) {
      r.dropped += phrases.size();
      continue;
    }
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
      if (std::any_of(taken.begin() + i, taken.begin() + i + len, [](bool b) { return b; })) continue;
      std::vector<std::string> window(lowered.begin() + i, lowered.begin() + i + len);
      if (!phrases.count(window)) continue;
      matched.insert(window);
      r.labels[i] = Label::KB;
      for (std::size_t k = i; k < i + len; ++k) {
        taken[k] = true;
        if (k > i) r.labels[k] = Label::KI;
      }
      i += len - 1;
    }
    for (const auto& p : phrases)
      if (!matched.count(p)) ++r.dropped;
  }
  return r;
}

inline LabelSequence tag_bio(const std::vector<std::string>& tokens, const std::vector<std::string>& keyphrases) {
  return tag_bio_detailed(tokens, keyphrases).labels;
}

struct PreprocessReport {
  std::vector<Document> docs;
  std::size_t dropped_phrases = 0;
};

inline PreprocessReport preprocess(const std::vector<RawDocument>& raw) {
  PreprocessReport rep;
  rep.docs.reserve(raw.size());
  for (const auto& rd : raw) {
    auto tokens = tokenize(rd.text);
    if (tokens.empty()) throw DataError("document " + rd.doc_id + " has empty text");
    TagResult tr = tag_bio_detailed(tokens, rd.keyphrases);
    rep.dropped_phrases += tr.dropped;
    rep.docs.push_back(make_document(rd.doc_id, std::move(tokens), std::move(tr.labels)));
  }
  return rep;
}

struct DatasetStats {
  std::size_t num_docs = 0;
  double avg_keyphrases = 0.0;
  std::size_t max_phrase_len = 0;
  double avg_phrase_len = 0.0;
  double avg_tokens = 0.0;
  std::size_t max_tokens = 0;
  std::size_t min_tokens = 0;
};

/// Keyphrase counts are per-document gold sets; phrase lengths are averaged
/// over all gold phrases of all documents.
inline DatasetStats compute_stats(const std::vector<Document>& docs) {
  if (docs.empty()) throw DataError("empty corpus");
  DatasetStats s;
  s.num_docs = docs.size();
  s.min_tokens = docs.front().size();
  std::size_t n_phrases = 0, phrase_tokens = 0, tokens = 0;
  for (const auto& d : docs) {
    tokens += d.size();
    s.max_tokens = std::max(s.max_tokens, d.size());
    s.min_tokens = std::min(s.min_tokens, d.size());
    n_phrases += d.gold_phrases.size();
    for (const auto& p : d.gold_phrases) {
      std::size_t len = static_cast<std::size_t>(std::count(p.begin(), p.end(), ' ')) + 1;
      phrase_tokens += len;
      s.max_phrase_len = std::max(s.max_phrase_len, len);
    }
  }
  double n = static_cast<double>(docs.size());
  s.avg_keyphrases = static_cast<double>(n_phrases) / n;
  s.avg_phrase_len = n_phrases ? static_cast<double>(phrase_tokens) / static_cast<double>(n_phrases) : 0.0;
  s.avg_tokens = static_cast<double>(tokens) / n;
  return s;
}

inline nlohmann::json to_json(const DatasetStats& s) {
  return {{"num_docs", s.num_docs},     {"avg_keyphrases", s.avg_keyphrases},
          {"max_phrase_len", s.max_phrase_len}, {"avg_phrase_len", s.avg_phrase_len},
          {"avg_tokens", s.avg_tokens}, {"max_tokens", s.max_tokens},
          {"min_tokens", s.min_tokens}};
}

inline std::vector<RawDocument> load_raw(const std::string& path) {
  std::vector<RawDocument> out;
  std::unordered_set<std::string> seen;
  io::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    RawDocument rd{j.at("doc_id").get<std::string>(), j.at("text").get<std::string>(),
                   j.at("keyphrases").get<std::vector<std::string>>()};
    if (rd.doc_id.empty()) throw DataError(path, line, "empty doc_id");
    if (!seen.insert(rd.doc_id).second) throw DataError(path, line, "duplicate doc_id " + rd.doc_id);
    out.push_back(std::move(rd));
  });
  return out;
}

inline std::vector<Document> load_processed(const std::string& path, std::size_t max_tokens = kDefaultMaxTokens) {
  std::vector<Document> out;
  std::unordered_set<std::string> seen;
  io::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    auto id = j.at("doc_id").get<std::string>();
    auto tokens = j.at("tokens").get<std::vector<std::string>>();
    auto names = j.at("labels").get<std::vector<std::string>>();
    LabelSequence labels;
    labels.reserve(names.size());
    try {
      for (const auto& n : names) labels.push_back(parse_label(n));
      if (tokens.size() > max_tokens)
        throw DataError("document " + id + " has " + std::to_string(tokens.size()) +
                        " tokens, above the limit of " + std::to_string(max_tokens));
      if (!seen.insert(id).second) throw DataError("duplicate doc_id " + id);
      out.push_back(make_document(id, std::move(tokens), std::move(labels)));
    } catch (const DataError& e) {
      throw DataError(path, line, e.what());
    }
  });
  return out;
}

inline void write_processed(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) {
    std::vector<std::string> names;
    names.reserve(d.labels.size());
    for (Label l : d.labels) names.emplace_back(to_string(l));
    out << nlohmann::json{{"doc_id", d.doc_id}, {"tokens", d.tokens}, {"labels", names}}.dump() << '\n';
  }
}

inline void save_processed(const std::vector<Document>& docs, const std::string& path) {
  io::write_atomic(path, [&](std::ostream& out) { write_processed(out, docs); });
}

inline void save_raw(const std::vector<RawDocument>& docs, const std::string& path) {
  io::write_atomic(path, [&](std::ostream& out) {
    for (const auto& d : docs)
      out << nlohmann::json{{"doc_id", d.doc_id}, {"text", d.text}, {"keyphrases", d.keyphrases}}.dump()
          << '\n';
  });
}

}  // namespace corpus
}  // namespace kpseq

#endif  // KPSEQ_CORPUS_HPP_
