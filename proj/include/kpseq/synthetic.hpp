#ifndef KPSEQ_SYNTHETIC_HPP_
#define KPSEQ_SYNTHETIC_HPP_

#include <random>
#include <set>
#include <string>
#include <vector>

#include "kpseq/corpus.hpp"
#include "kpseq/embeddings.hpp"

namespace kpseq::synthetic {

/// Generator for a toy keyphrase corpus: "keyword" types only occur inside
/// keyphrases, "background" types fill the rest, and the two groups get
/// well-separated random embeddings.
struct SyntheticSpec {
  std::size_t keyword_types = 200;
  std::size_t background_types = 800;
  std::size_t dim = 16;
  std::size_t min_tokens = 40;
  std::size_t max_tokens = 80;
  std::size_t min_phrase_len = 1;
  std::size_t max_phrase_len = 3;
  std::size_t min_phrases = 2;
  std::size_t max_phrases = 6;
  double separation = 1.0;   // class centers at +separation / -separation
  double noise = 0.5;        // per-coordinate gaussian spread
  std::uint64_t seed = 7;
};

inline std::string keyword_token(std::size_t k) { return "kw" + std::to_string(k); }
inline std::string background_token(std::size_t k) { return "bg" + std::to_string(k); }

inline EmbeddingTable make_embeddings(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, spec.noise);
  EmbeddingTable table(spec.dim);
  auto add = [&](const std::string& tok, double center) {
    Vector v(static_cast<Eigen::Index>(spec.dim));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = center + noise(rng);
    table.insert(tok, std::move(v));
  };
  for (std::size_t k = 0; k < spec.keyword_types; ++k) add(keyword_token(k), spec.separation);
  for (std::size_t k = 0; k < spec.background_types; ++k) add(background_token(k), -spec.separation);
  return table;
}

/// Raw documents whose keyphrases are runs of keyword tokens, each run
/// surrounded by background tokens.
inline std::vector<RawDocument> make_raw(const SyntheticSpec& spec, std::size_t num_docs, const std::string& prefix,
                                         std::uint64_t stream) {
  std::mt19937_64 rng(spec.seed * 1000003ULL + stream);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::vector<RawDocument> docs;
  for (std::size_t d = 0; d < num_docs; ++d) {
    const std::size_t n = uniform(spec.min_tokens, spec.max_tokens);
    const std::size_t n_phrases = uniform(spec.min_phrases, spec.max_phrases);
    std::vector<std::string> tokens;
    std::set<std::string> phrases;
    // Split the document into n_phrases + 1 background gaps of at least one token.
    std::size_t phrase_tokens = 0;
    std::vector<std::vector<std::string>> runs;
    for (std::size_t p = 0; p < n_phrases; ++p) {
      std::vector<std::string> run;
      std::size_t len = uniform(spec.min_phrase_len, spec.max_phrase_len);
      for (std::size_t k = 0; k < len; ++k) run.push_back(keyword_token(uniform(0, spec.keyword_types - 1)));
      phrase_tokens += len;
      runs.push_back(std::move(run));
    }
    std::size_t background = n > phrase_tokens + n_phrases + 1 ? n - phrase_tokens : n_phrases + 1;
    std::vector<std::size_t> gaps(n_phrases + 1, 1);
    for (std::size_t k = n_phrases + 1; k < background; ++k) ++gaps[uniform(0, n_phrases)];
    for (std::size_t p = 0; p <= n_phrases; ++p) {
      for (std::size_t k = 0; k < gaps[p]; ++k) tokens.push_back(background_token(uniform(0, spec.background_types - 1)));
      if (p < n_phrases) {
        std::string joined;
        for (const auto& t : runs[p]) {
          tokens.push_back(t);
          joined += (joined.empty() ? "" : " ") + t;
        }
        phrases.insert(joined);
      }
    }
    std::string text;
    for (const auto& t : tokens) text += (text.empty() ? "" : " ") + t;
    docs.push_back({prefix + std::to_string(d), std::move(text), {phrases.begin(), phrases.end()}});
  }
  return docs;
}

struct SyntheticCorpus {
  std::vector<Document> train, dev, test;
  EmbeddingTable embeddings;
};

inline SyntheticCorpus make_corpus(const SyntheticSpec& spec, std::size_t n_train, std::size_t n_dev,
                                   std::size_t n_test) {
  return {corpus::preprocess(make_raw(spec, n_train, "train-", 1)).docs,
          corpus::preprocess(make_raw(spec, n_dev, "dev-", 2)).docs,
          corpus::preprocess(make_raw(spec, n_test, "test-", 3)).docs, make_embeddings(spec)};
}

}  // namespace kpseq::synthetic

#endif  // KPSEQ_SYNTHETIC_HPP_
