#ifndef KPSEQ_BASELINES_HPP_
#define KPSEQ_BASELINES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kpseq/corpus.hpp"
#include "kpseq/error.hpp"
#include "kpseq/evaluate.hpp"
#include "kpseq/tensor.hpp"
#include "kpseq/tokenize.hpp"

namespace kpseq::baselines {

// clang-format off
inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> kWords = {
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
    "can", "could", "did", "do", "does", "doing", "down", "during", "each", "either", "etc", "few",
    "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "however", "i", "if", "in", "into", "is", "it", "its", "itself",
    "just", "may", "might", "me", "more", "most", "much", "must", "my", "myself", "no", "nor", "not",
    "now", "of", "off", "on", "once", "one", "only", "or", "other", "our", "ours", "ourselves", "out",
    "over", "own", "paper", "same", "she", "should", "so", "some", "such", "than", "that", "the",
    "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
    "through", "thus", "to", "too", "two", "under", "until", "up", "upon", "use", "used", "using",
    "very", "via", "was", "we", "well", "were", "what", "when", "where", "whether", "which", "while",
    "who", "whom", "why", "will", "with", "within", "without", "would", "you", "your", "yours",
    "yourself", "yourselves", "-lrb-", "-rrb-", "-lsb-", "-rsb-", "-lcb-", "-rcb-"};
  return kWords;
}
// clang-format on

/// Coarse stand-in for a POS filter: not a stopword and contains a letter.
inline bool is_content_word(std::string_view lowered) {
  if (stopwords().count(std::string(lowered))) return false;
  return std::any_of(lowered.begin(), lowered.end(),
                     [](unsigned char c) { return std::isalpha(c) != 0; });
}

struct ScoredPhrase {
  std::string phrase;
  double score = 0.0;
};

/// Sorted by descending score; equal scores in lexicographic phrase order.
using RankedPhrases = std::vector<ScoredPhrase>;

inline void sort_ranked(RankedPhrases& r) {
  std::sort(r.begin(), r.end(), [](const ScoredPhrase& a, const ScoredPhrase& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.phrase < b.phrase;
  });
}

/// Undirected weighted graph over candidate words.
struct WordGraph {
  std::vector<std::string> nodes;
  std::unordered_map<std::string, std::size_t> index;
  Matrix weights;  // symmetric, zero diagonal

  std::size_t size() const { return nodes.size(); }

  std::size_t add_node(const std::string& w) {
    auto [it, fresh] = index.try_emplace(w, nodes.size());
    if (fresh) nodes.push_back(w);
    return it->second;
  }

  void add_edge(std::size_t a, std::size_t b, double w) {
    if (a == b) return;
    if (!(w > 0.0)) throw std::invalid_argument("edge weights must be positive");
    weights(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += w;
    weights(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) += w;
  }
};

/// Co-occurrence graph over the lowercased content words of `tokens`. Two
/// words are linked when they appear at most window-1 positions apart.
/// Weighted graphs accumulate one unit per co-occurrence; unweighted graphs
/// keep weight 1 per linked pair.
inline WordGraph cooccurrence_graph(const std::vector<std::string>& tokens, std::size_t window, bool weighted) {
  WordGraph g;
  std::vector<std::string> lowered;
  std::vector<bool> keep;
  for (const auto& t : tokens) {
    lowered.push_back(to_lower(t));
    keep.push_back(is_content_word(lowered.back()));
    if (keep.back()) g.add_node(lowered.back());
  }
  g.weights = Matrix::Zero(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!keep[i]) continue;
    for (std::size_t j = i + 1; j < std::min(tokens.size(), i + window); ++j) {
      if (!keep[j]) continue;
      std::size_t a = g.index.at(lowered[i]), b = g.index.at(lowered[j]);
      if (a == b) continue;
      if (weighted)
        g.add_edge(a, b, 1.0);
      else if (g.weights(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) == 0.0)
        g.add_edge(a, b, 1.0);
    }
  }
  return g;
}

struct PageRankResult {
  Vector scores;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Weighted PageRank by power iteration:
///   s(v) = (1 - d)/N + d * (sum_u w(u,v)/W(u) s(u) + dangling/N)
/// where W(u) is u's total edge weight and `dangling` is the mass held by
/// nodes without edges. Stops when the largest per-node change is below tol.
inline PageRankResult pagerank(const WordGraph& graph, double damping = 0.85, double tol = 1e-6,
                               std::size_t max_iter = 100) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  if (n == 0) throw std::invalid_argument("pagerank: empty graph");
  if (!(damping > 0.0 && damping < 1.0)) throw std::invalid_argument("pagerank: damping must lie in (0, 1)");
  Vector out_weight = graph.weights.rowwise().sum();
  Matrix transition = Matrix::Zero(n, n);  // transition(v, u) = w(u, v) / W(u)
  for (Eigen::Index u = 0; u < n; ++u)
    if (out_weight(u) > 0.0) transition.col(u) = graph.weights.row(u).transpose() / out_weight(u);

  PageRankResult r;
  r.scores = Vector::Constant(n, 1.0 / static_cast<double>(n));
  const double base = (1.0 - damping) / static_cast<double>(n);
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    double dangling = 0.0;
    for (Eigen::Index u = 0; u < n; ++u)
      if (out_weight(u) == 0.0) dangling += r.scores(u);
    Vector next = (damping * (transition * r.scores)).array() + base + damping * dangling / static_cast<double>(n);
    double delta = (next - r.scores).cwiseAbs().maxCoeff();
    r.scores = next / next.sum();
    if (delta < tol) {
      r.converged = true;
      return r;
    }
  }
  r.iterations = max_iter;
  return r;
}

namespace detail {

/// Maximal runs of tokens accepted by `keep`, scored by the sum of their word
/// scores; repeated phrases are kept once.
template <class Keep>
RankedPhrases merge_runs(const std::vector<std::string>& tokens, const WordGraph& g, const Vector& scores,
                         Keep&& keep) {
  std::map<std::string, double> phrases;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::string w = to_lower(tokens[i]);
    if (!keep(w)) {
      ++i;
      continue;
    }
    std::vector<std::string> run;
    double s = 0.0;
    while (i < tokens.size()) {
      std::string x = to_lower(tokens[i]);
      if (!keep(x)) break;
      s += scores(static_cast<Eigen::Index>(g.index.at(x)));
      run.push_back(std::move(x));
      ++i;
    }
    phrases.try_emplace(normalize_phrase(run), s);
  }
  RankedPhrases r;
  for (auto& [p, s] : phrases) r.push_back({p, s});
  sort_ranked(r);
  return r;
}

}  // namespace detail

/// Window-2 unweighted graph; the top ceil(top_frac * |nodes|) words are
/// kept and adjacent kept words merge into phrases.
inline RankedPhrases textrank(const Document& doc, double top_frac = 1.0 / 3.0) {
  WordGraph g = cooccurrence_graph(doc.tokens, 2, false);
  if (g.size() == 0) return {};
  PageRankResult pr = pagerank(g, 0.85, 1e-6);
  std::vector<std::size_t> idx(g.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    double sa = pr.scores(static_cast<Eigen::Index>(a)), sb = pr.scores(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    return g.nodes[a] < g.nodes[b];
  });
  auto top = static_cast<std::size_t>(std::ceil(top_frac * static_cast<double>(g.size())));
  top = std::clamp<std::size_t>(top, 1, g.size());
  std::unordered_set<std::string> kept;
  for (std::size_t k = 0; k < top; ++k) kept.insert(g.nodes[idx[k]]);
  return detail::merge_runs(doc.tokens, g, pr.scores, [&](const std::string& w) { return kept.count(w) > 0; });
}

/// Window-10 graph weighted by co-occurrence counts; every maximal run of
/// content words is a candidate. Returns the top k (all when k == 0).
inline RankedPhrases singlerank(const Document& doc, std::size_t k = 0) {
  WordGraph g = cooccurrence_graph(doc.tokens, 10, true);
  if (g.size() == 0) return {};
  PageRankResult pr = pagerank(g, 0.85, 1e-6);
  RankedPhrases r = detail::merge_runs(doc.tokens, g, pr.scores, [&](const std::string& w) { return g.index.count(w) > 0; });
  if (k > 0 && r.size() > k) r.resize(k);
  return r;
}

// KEA-style naive Bayes ------------------------------------------------------

inline constexpr std::size_t kKeaBins = 5;

struct KeaCandidate {
  std::string phrase;
  double tfidf = 0.0;
  double first_pos = 0.0;  // index of first occurrence / document length
};

struct KeaModel {
  std::size_t num_docs = 0;
  std::unordered_map<std::string, std::size_t> doc_freq;
  std::array<double, kKeaBins - 1> tfidf_cuts{};
  std::array<double, kKeaBins - 1> pos_cuts{};
  // [class][bin] smoothed conditional probabilities; class 1 = keyphrase.
  std::array<std::array<double, kKeaBins>, 2> p_tfidf{};
  std::array<std::array<double, kKeaBins>, 2> p_pos{};
  std::array<double, 2> prior{};
};

namespace detail {

inline bool kea_boundary_ok(const std::string& lowered) { return is_content_word(lowered); }

inline bool kea_inner_ok(const std::string& lowered) {
  return std::any_of(lowered.begin(), lowered.end(), [](unsigned char c) { return std::isalnum(c) != 0; });
}

struct RawCandidate {
  std::size_t count = 0;
  std::size_t first = 0;
};

/// 1-3-grams that neither start nor end with a stopword and contain no pure
/// punctuation token, with occurrence counts and first position.
inline std::map<std::string, RawCandidate> kea_ngrams(const std::vector<std::string>& tokens) {
  std::vector<std::string> lw;
  for (const auto& t : tokens) lw.push_back(to_lower(t));
  std::map<std::string, RawCandidate> out;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    if (!kea_boundary_ok(lw[i])) continue;
    for (std::size_t len = 1; len <= 3 && i + len <= lw.size(); ++len) {
      const std::string& last = lw[i + len - 1];
      if (!kea_inner_ok(last)) break;
      if (!kea_boundary_ok(last)) continue;
      std::vector<std::string> words(lw.begin() + static_cast<std::ptrdiff_t>(i),
                                     lw.begin() + static_cast<std::ptrdiff_t>(i + len));
      auto [it, fresh] = out.try_emplace(normalize_phrase(words), RawCandidate{0, i});
      ++it->second.count;
    }
  }
  return out;
}

inline std::size_t bin_of(double v, const std::array<double, kKeaBins - 1>& cuts) {
  std::size_t b = 0;
  while (b < cuts.size() && v > cuts[b]) ++b;
  return b;
}

/// Cut points at the k/kKeaBins quantiles of the sample.
inline std::array<double, kKeaBins - 1> equal_frequency_cuts(std::vector<double> values) {
  std::array<double, kKeaBins - 1> cuts{};
  if (values.empty()) return cuts;
  std::sort(values.begin(), values.end());
  for (std::size_t k = 1; k < kKeaBins; ++k) {
    std::size_t pos = k * values.size() / kKeaBins;
    cuts[k - 1] = values[std::min(pos, values.size() - 1)];
  }
  return cuts;
}

}  // namespace detail

inline double kea_idf(const KeaModel& m, const std::string& phrase) {
  auto it = m.doc_freq.find(phrase);
  std::size_t df = it == m.doc_freq.end() ? 0 : it->second;
  return std::log(static_cast<double>(m.num_docs) / static_cast<double>(std::max<std::size_t>(df, 1)));
}

/// Candidates of `doc` with tf-idf (tf = count / length, idf = log(N / df)
/// from the training corpus) and relative first-occurrence position.
inline std::vector<KeaCandidate> kea_candidates(const KeaModel& m, const Document& doc) {
  std::vector<KeaCandidate> out;
  const double n = static_cast<double>(doc.size());
  for (const auto& [phrase, rc] : detail::kea_ngrams(doc.tokens))
    out.push_back({phrase, static_cast<double>(rc.count) / n * kea_idf(m, phrase), static_cast<double>(rc.first) / n});
  return out;
}

inline KeaModel kea_train(const std::vector<Document>& docs) {
  if (docs.empty()) throw DataError("kea_train: empty training corpus");
  KeaModel m;
  m.num_docs = docs.size();
  std::vector<std::map<std::string, detail::RawCandidate>> grams;
  grams.reserve(docs.size());
  for (const auto& d : docs) {
    grams.push_back(detail::kea_ngrams(d.tokens));
    for (const auto& kv : grams.back()) ++m.doc_freq[kv.first];
  }

  std::vector<KeaCandidate> all;
  std::vector<int> cls;
  for (const auto& d : docs) {
    for (auto& c : kea_candidates(m, d)) {
      cls.push_back(d.gold_phrases.count(c.phrase) ? 1 : 0);
      all.push_back(std::move(c));
    }
  }
  std::vector<double> tf, pos;
  for (const auto& c : all) {
    tf.push_back(c.tfidf);
    pos.push_back(c.first_pos);
  }
  m.tfidf_cuts = detail::equal_frequency_cuts(tf);
  m.pos_cuts = detail::equal_frequency_cuts(pos);

  std::array<std::array<double, kKeaBins>, 2> ct{}, cp{};
  std::array<double, 2> n_class{};
  for (std::size_t k = 0; k < all.size(); ++k) {
    int y = cls[k];
    n_class[y] += 1.0;
    ct[y][detail::bin_of(all[k].tfidf, m.tfidf_cuts)] += 1.0;
    cp[y][detail::bin_of(all[k].first_pos, m.pos_cuts)] += 1.0;
  }
  const double total = n_class[0] + n_class[1];
  for (int y = 0; y < 2; ++y) {
    m.prior[y] = (n_class[y] + 1.0) / (total + 2.0);
    for (std::size_t b = 0; b < kKeaBins; ++b) {
      m.p_tfidf[y][b] = (ct[y][b] + 1.0) / (n_class[y] + static_cast<double>(kKeaBins));
      m.p_pos[y][b] = (cp[y][b] + 1.0) / (n_class[y] + static_cast<double>(kKeaBins));
    }
  }
  return m;
}

inline double kea_posterior(const KeaModel& m, const KeaCandidate& c) {
  std::size_t bt = detail::bin_of(c.tfidf, m.tfidf_cuts), bp = detail::bin_of(c.first_pos, m.pos_cuts);
  double yes = m.prior[1] * m.p_tfidf[1][bt] * m.p_pos[1][bp];
  double no = m.prior[0] * m.p_tfidf[0][bt] * m.p_pos[0][bp];
  return yes / (yes + no);
}

/// Candidates by posterior; ties by tf-idf, then lexicographically.
inline RankedPhrases kea_rank(const KeaModel& m, const Document& doc, std::size_t k = 0) {
  std::vector<std::pair<KeaCandidate, double>> scored;
  for (auto& c : kea_candidates(m, doc)) {
    double p = kea_posterior(m, c);
    scored.emplace_back(std::move(c), p);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    if (a.first.tfidf != b.first.tfidf) return a.first.tfidf > b.first.tfidf;
    return a.first.phrase < b.first.phrase;
  });
  RankedPhrases r;
  for (const auto& [c, p] : scored) r.push_back({c.phrase, p});
  if (k > 0 && r.size() > k) r.resize(k);
  return r;
}

// Evaluation -----------------------------------------------------------------

enum class Method { kTextRank, kSingleRank, kKea };

inline Method parse_method(const std::string& name) {
  std::string n = to_lower(name);
  if (n == "textrank") return Method::kTextRank;
  if (n == "singlerank") return Method::kSingleRank;
  if (n == "kea") return Method::kKea;
  throw std::invalid_argument("unknown baseline method \"" + name + "\" (expected textrank, singlerank or kea)");
}

inline RankedPhrases rank(Method method, const Document& doc, const KeaModel* kea = nullptr) {
  switch (method) {
    case Method::kTextRank: return textrank(doc);
    case Method::kSingleRank: return singlerank(doc);
    case Method::kKea:
      if (!kea) throw std::invalid_argument("kea ranking needs a trained model");
      return kea_rank(*kea, doc);
  }
  return {};
}

/// Top-k phrases per document (k = 0 means the document's gold count).
inline KeyphraseSet top_k(const RankedPhrases& ranked, std::size_t k) {
  KeyphraseSet out;
  for (std::size_t i = 0; i < ranked.size() && out.size() < k; ++i) out.insert(ranked[i].phrase);
  return out;
}

struct BaselineRun {
  std::vector<KeyphraseSet> predictions;
  Metrics metrics;
};

inline BaselineRun baseline_evaluate(Method method, const std::vector<Document>& docs, std::size_t k = 0,
                                     const KeaModel* kea = nullptr, Averaging mode = Averaging::kMicro,
                                     bool stem = false) {
  BaselineRun run;
  std::vector<std::pair<KeyphraseSet, KeyphraseSet>> pairs;
  for (const auto& d : docs) {
    KeyphraseSet pred = top_k(rank(method, d, kea), k ? k : d.gold_phrases.size());
    run.predictions.push_back(pred);
    if (stem)
      pairs.emplace_back(evaluate::stem_set(pred), evaluate::stem_set(d.gold_phrases));
    else
      pairs.emplace_back(std::move(pred), d.gold_phrases);
  }
  run.metrics = evaluate::corpus_metrics(pairs, mode);
  return run;
}

}  // namespace kpseq::baselines

#endif  // KPSEQ_BASELINES_HPP_
