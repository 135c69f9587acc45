#ifndef KPSEQ_TOKENIZE_HPP_
#define KPSEQ_TOKENIZE_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace kpseq {

namespace detail {

inline bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline bool is_bracket_token(std::string_view s) {
  static constexpr std::array<std::string_view, 6> kBrackets = {"-LRB-", "-RRB-", "-LSB-",
                                                                "-RSB-", "-LCB-", "-RCB-"};
  return std::find(kBrackets.begin(), kBrackets.end(), s) != kBrackets.end();
}

inline std::string punct_token(char c) {
  if (c == '(') return "-LRB-";
  if (c == ')') return "-RRB-";
  return std::string(1, c);
}

}  // namespace detail

/// Whitespace tokenizer that peels leading and trailing punctuation off each
/// chunk, one character per token. Inner punctuation (hyphens, apostrophes,
/// decimal points) stays attached. Round brackets become -LRB- / -RRB-, and
/// chunks already in that bracket notation pass through unchanged.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !detail::is_space(text[j])) ++j;
    if (j == i) break;
    std::string_view chunk = text.substr(i, j - i);
    i = j;

    if (detail::is_bracket_token(chunk)) {
      out.emplace_back(chunk);
      continue;
    }
    std::size_t lo = 0;
    std::size_t hi = chunk.size();
    while (lo < hi && detail::is_punct(chunk[lo])) out.push_back(detail::punct_token(chunk[lo++]));
    std::vector<std::string> tail;
    while (hi > lo && detail::is_punct(chunk[hi - 1])) tail.push_back(detail::punct_token(chunk[--hi]));
    if (hi > lo) out.emplace_back(chunk.substr(lo, hi - lo));
    out.insert(out.end(), tail.rbegin(), tail.rend());
  }
  return out;
}

inline std::string to_lower(std::string_view s) {
  std::string r(s);
  std::transform(r.begin(), r.end(), r.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return r;
}

/// Lowercases and joins tokens with single spaces.
inline std::string normalize_phrase(const std::vector<std::string>& tokens) {
  std::string r;
  for (const auto& t : tokens) {
    if (!r.empty()) r.push_back(' ');
    r += to_lower(t);
  }
  return r;
}

}  // namespace kpseq

#endif  // KPSEQ_TOKENIZE_HPP_
