#ifndef KPSEQ_EMBEDDINGS_HPP_
#define KPSEQ_EMBEDDINGS_HPP_

#include <charconv>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "kpseq/corpus.hpp"
#include "kpseq/error.hpp"
#include "kpseq/io.hpp"
#include "kpseq/tensor.hpp"

namespace kpseq {

enum class OovPolicy { kZeros, kAveraged };

/// Fixed token -> vector table. Immutable after load.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, OovPolicy policy = OovPolicy::kZeros) : dim_(dim), policy_(policy) {
    if (dim == 0) throw DataError("embedding dim must be positive");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  OovPolicy oov_policy() const { return policy_; }
  void set_oov_policy(OovPolicy p) { policy_ = p; }

  /// Returns false (and keeps the existing vector) when the token is already present.
  bool insert(const std::string& token, Vector v) {
    if (static_cast<std::size_t>(v.size()) != dim_)
      throw ShapeError("vector for \"" + token + "\" has length " + std::to_string(v.size()) +
                       ", expected " + std::to_string(dim_));
    auto [it, fresh] = entries_.try_emplace(token, std::move(v));
    if (fresh) order_.push_back(token);
    return fresh;
  }

  const Vector* find(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
  }

  /// Exact-case hit, then lowercase hit, then the OOV vector.
  Vector lookup(const std::string& token) const {
    if (const Vector* v = find(token)) return *v;
    if (const Vector* v = find(to_lower(token))) return *v;
    return oov_vector();
  }

  Vector oov_vector() const {
    if (policy_ == OovPolicy::kZeros || entries_.empty()) return Vector::Zero(static_cast<Eigen::Index>(dim_));
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(dim_));
    for (const auto& tok : order_) mean += entries_.at(tok);
    return mean / static_cast<double>(order_.size());
  }

  /// Tokens in file order.
  const std::vector<std::string>& tokens() const { return order_; }

 private:
  std::size_t dim_;
  OovPolicy policy_;
  std::unordered_map<std::string, Vector> entries_;
  std::vector<std::string> order_;
};

struct EmbeddingSequence {
  std::string doc_id;
  Matrix vectors;  // n x dim
};

namespace embeddings {

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_uint(std::string_view s, std::size_t& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_real(std::string_view s, double& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace detail

/// Reads "<token> <v1> ... <vd>" lines, with an optional "<count> <dim>"
/// header. Duplicate tokens keep their first vector.
inline EmbeddingTable load_fixed(const std::string& path, OovPolicy policy = OovPolicy::kZeros) {
  auto in = io::open_input(path);
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  bool first = true;
  std::unique_ptr<EmbeddingTable> table;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      std::size_t count = 0, hdim = 0;
      if (fields.size() == 2 && detail::parse_uint(fields[0], count) && detail::parse_uint(fields[1], hdim)) {
        if (hdim == 0) throw DataError(path, lineno, "header declares dim 0");
        dim = hdim;
        continue;
      }
    }
    if (fields.size() < 2) throw DataError(path, lineno, "expected a token followed by values");
    std::size_t d = fields.size() - 1;
    if (dim == 0) dim = d;
    if (d != dim)
      throw DataError(path, lineno, "vector has " + std::to_string(d) + " values, expected " + std::to_string(dim));
    if (!table) table = std::make_unique<EmbeddingTable>(dim, policy);
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      double x = 0.0;
      if (!detail::parse_real(fields[k + 1], x))
        throw DataError(path, lineno, "non-numeric value \"" + std::string(fields[k + 1]) + "\"");
      v[static_cast<Eigen::Index>(k)] = x;
    }
    table->insert(std::string(fields[0]), std::move(v));
  }
  if (!table) {
    if (dim == 0) throw DataError("no embeddings in " + path);
    table = std::make_unique<EmbeddingTable>(dim, policy);
  }
  return std::move(*table);
}

inline void save_fixed(const EmbeddingTable& table, const std::string& path) {
  io::write_atomic(path, [&](std::ostream& out) {
    out << table.size() << ' ' << table.dim() << '\n';
    for (const auto& tok : table.tokens()) {
      out << tok;
      for (double x : *table.find(tok)) out << ' ' << nlohmann::json(x).dump();
      out << '\n';
    }
  });
}

inline EmbeddingSequence embed_fixed(const EmbeddingTable& table, const Document& doc) {
  EmbeddingSequence seq{doc.doc_id, Matrix(static_cast<Eigen::Index>(doc.size()),
                                           static_cast<Eigen::Index>(table.dim()))};
  for (std::size_t t = 0; t < doc.size(); ++t)
    seq.vectors.row(static_cast<Eigen::Index>(t)) = table.lookup(doc.tokens[t]).transpose();
  return seq;
}

}  // namespace embeddings

/// Precomputed per-document contextual vectors keyed by doc_id.
class ContextualStore {
 public:
  explicit ContextualStore(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw DataError("embedding dim must be positive");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return docs_.size(); }

  void insert(const std::string& doc_id, Matrix m) {
    if (static_cast<std::size_t>(m.cols()) != dim_)
      throw ShapeError("matrix for " + doc_id + " has " + std::to_string(m.cols()) + " columns, expected " +
                       std::to_string(dim_));
    if (!docs_.try_emplace(doc_id, std::move(m)).second) throw DataError("duplicate doc_id " + doc_id);
    order_.push_back(doc_id);
  }

  const Matrix* find(const std::string& doc_id) const {
    auto it = docs_.find(doc_id);
    return it == docs_.end() ? nullptr : &it->second;
  }

  const std::vector<std::string>& doc_ids() const { return order_; }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, Matrix> docs_;
  std::vector<std::string> order_;
};

namespace embeddings {

inline constexpr int kStoreVersion = 1;

inline ContextualStore load_contextual(const std::string& path) {
  std::unique_ptr<ContextualStore> store;
  io::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    if (!store) {
      if (!j.contains("format") || j.at("format") != "kpemb")
        throw DataError(path, line, "missing kpemb header line");
      if (j.at("version").get<int>() != kStoreVersion)
        throw DataError(path, line, "unsupported store version " + j.at("version").dump());
      auto dim = j.at("dim").get<long long>();
      if (dim <= 0) throw DataError(path, line, "header dim must be positive");
      store = std::make_unique<ContextualStore>(static_cast<std::size_t>(dim));
      return;
    }
    auto id = j.at("doc_id").get<std::string>();
    auto dim = j.at("dim").get<std::size_t>();
    if (dim != store->dim())
      throw DataError(path, line, "record dim " + std::to_string(dim) + " differs from header dim " +
                                      std::to_string(store->dim()));
    const auto& rows = j.at("vectors");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() != dim)
        throw DataError(path, line, "row " + std::to_string(r) + " of " + id + " has " +
                                        std::to_string(row.size()) + " values, expected " + std::to_string(dim));
      for (std::size_t c = 0; c < dim; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
    try {
      store->insert(id, std::move(m));
    } catch (const DataError& e) {
      throw DataError(path, line, e.what());
    }
  });
  if (!store) throw DataError("no kpemb header in " + path);
  return std::move(*store);
}

inline void write_contextual(std::ostream& out, const ContextualStore& store) {
  out << nlohmann::json{{"format", "kpemb"}, {"version", kStoreVersion}, {"dim", store.dim()}}.dump() << '\n';
  for (const auto& id : store.doc_ids()) {
    const Matrix& m = *store.find(id);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    out << nlohmann::json{{"doc_id", id}, {"dim", store.dim()}, {"vectors", std::move(rows)}}.dump() << '\n';
  }
}

inline void save_contextual(const ContextualStore& store, const std::string& path) {
  io::write_atomic(path, [&](std::ostream& out) { write_contextual(out, store); });
}

inline EmbeddingSequence embed_contextual(const ContextualStore& store, const Document& doc) {
  const Matrix* m = store.find(doc.doc_id);
  if (!m) throw DataError("no embeddings for document " + doc.doc_id);
  if (static_cast<std::size_t>(m->rows()) != doc.size())
    throw DataError("document " + doc.doc_id + ": expected " + std::to_string(doc.size()) +
                    " embedding rows, found " + std::to_string(m->rows()));
  return {doc.doc_id, *m};
}

}  // namespace embeddings

/// Source of per-token input vectors for the tagger.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual EmbeddingSequence embed(const Document& doc) const = 0;
  /// Throws DataError if some document cannot be embedded.
  virtual void check_covers(const std::vector<Document>& docs) const {
    for (const auto& d : docs) embed(d);
  }
};

class FixedProvider : public EmbeddingProvider {
 public:
  explicit FixedProvider(EmbeddingTable table) : table_(std::move(table)) {}
  std::size_t dim() const override { return table_.dim(); }
  EmbeddingSequence embed(const Document& doc) const override { return embeddings::embed_fixed(table_, doc); }
  void check_covers(const std::vector<Document>&) const override {}
  const EmbeddingTable& table() const { return table_; }

 private:
  EmbeddingTable table_;
};

class ContextualProvider : public EmbeddingProvider {
 public:
  explicit ContextualProvider(ContextualStore store) : store_(std::move(store)) {}
  std::size_t dim() const override { return store_.dim(); }
  EmbeddingSequence embed(const Document& doc) const override {
    return embeddings::embed_contextual(store_, doc);
  }

 private:
  ContextualStore store_;
};

}  // namespace kpseq

#endif  // KPSEQ_EMBEDDINGS_HPP_
