#ifndef KPSEQ_LABEL_HPP_
#define KPSEQ_LABEL_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "kpseq/error.hpp"

namespace kpseq {

/// B-I-O label. The integer values are the column indices used by the
/// emission matrix and the transition matrix.
enum class Label : int { KB = 0, KI = 1, KO = 2 };

inline constexpr std::size_t kNumLabels = 3;
/// Row index of the virtual START state in the transition matrix.
inline constexpr std::size_t kStartRow = 3;

using LabelSequence = std::vector<Label>;

inline constexpr std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }

inline constexpr Label label_at(std::size_t idx) { return static_cast<Label>(static_cast<int>(idx)); }

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::KB: return "B";
    case Label::KI: return "I";
    case Label::KO: return "O";
  }
  return "?";
}

inline Label parse_label(std::string_view s) {
  if (s == "B") return Label::KB;
  if (s == "I") return Label::KI;
  if (s == "O") return Label::KO;
  throw DataError("invalid label \"" + std::string(s) + "\"");
}

/// True when no KI appears at position 0 or directly after KO.
inline bool is_well_formed(const LabelSequence& labels) {
  Label prev = Label::KO;
  for (Label l : labels) {
    if (l == Label::KI && prev == Label::KO) return false;
    prev = l;
  }
  return true;
}

}  // namespace kpseq

#endif  // KPSEQ_LABEL_HPP_
