#ifndef KPSEQ_PORTER_STEMMER_HPP_
#define KPSEQ_PORTER_STEMMER_HPP_

#include <string>
#include <string_view>

namespace kpseq {

/// Classic Porter (1980) suffix stripper for lowercase ASCII words.
/// Words of length <= 2 and words containing non-alphabetic characters are
/// returned unchanged.
class PorterStemmer {
 public:
  std::string operator()(std::string_view word) const {
    if (word.size() <= 2) return std::string(word);
    for (char c : word)
      if (c < 'a' || c > 'z') return std::string(word);
    State s{std::string(word), 0};
    step1ab(s);
    step1c(s);
    step2(s);
    step3(s);
    step4(s);
    step5(s);
    return s.b;
  }

 private:
  struct State {
    std::string b;
    std::size_t j;  // end of the stem under test (exclusive)
  };

  static bool cons(const std::string& b, std::size_t i) {
    switch (b[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u': return false;
      case 'y': return i == 0 ? true : !cons(b, i - 1);
      default: return true;
    }
  }

  // Number of VC sequences in b[0, j).
  static int measure(const std::string& b, std::size_t j) {
    int n = 0;
    std::size_t i = 0;
    while (true) {
      if (i >= j) return n;
      if (!cons(b, i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i >= j) return n;
        if (cons(b, i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i >= j) return n;
        if (!cons(b, i)) break;
        ++i;
      }
      ++i;
    }
  }

  static bool vowel_in_stem(const std::string& b, std::size_t j) {
    for (std::size_t i = 0; i < j; ++i)
      if (!cons(b, i)) return true;
    return false;
  }

  static bool double_cons(const std::string& b, std::size_t k) {
    return k >= 1 && b[k] == b[k - 1] && cons(b, k);
  }

  // cvc at positions k-2, k-1, k where the final c is not w, x or y.
  static bool cvc(const std::string& b, std::size_t k) {
    if (k < 2 || !cons(b, k) || cons(b, k - 1) || !cons(b, k - 2)) return false;
    char c = b[k];
    return c != 'w' && c != 'x' && c != 'y';
  }

  static bool ends(State& s, std::string_view suffix) {
    if (suffix.size() > s.b.size()) return false;
    if (s.b.compare(s.b.size() - suffix.size(), suffix.size(), suffix) != 0) return false;
    s.j = s.b.size() - suffix.size();
    return true;
  }

  static void set_to(State& s, std::string_view repl) {
    s.b.resize(s.j);
    s.b += repl;
  }

  static void replace_if_measured(State& s, std::string_view repl) {
    if (measure(s.b, s.j) > 0) set_to(s, repl);
  }

  static void step1ab(State& s) {
    if (s.b.back() == 's') {
      if (ends(s, "sses")) {
        s.b.resize(s.b.size() - 2);
      } else if (ends(s, "ies")) {
        set_to(s, "i");
      } else if (s.b.size() >= 2 && s.b[s.b.size() - 2] != 's') {
        s.b.pop_back();
      }
    }
    if (ends(s, "eed")) {
      if (measure(s.b, s.j) > 0) s.b.pop_back();
      return;
    }
    bool stripped = false;
    if (ends(s, "ed") && vowel_in_stem(s.b, s.j)) {
      s.b.resize(s.j);
      stripped = true;
    } else if (ends(s, "ing") && vowel_in_stem(s.b, s.j)) {
      s.b.resize(s.j);
      stripped = true;
    }
    if (!stripped) return;
    s.j = s.b.size();
    if (ends(s, "at")) {
      set_to(s, "ate");
    } else if (ends(s, "bl")) {
      set_to(s, "ble");
    } else if (ends(s, "iz")) {
      set_to(s, "ize");
    } else if (double_cons(s.b, s.b.size() - 1)) {
      char c = s.b.back();
      if (c != 'l' && c != 's' && c != 'z') s.b.pop_back();
    } else if (measure(s.b, s.b.size()) == 1 && cvc(s.b, s.b.size() - 1)) {
      s.b += 'e';
    }
  }

  static void step1c(State& s) {
    if (ends(s, "y") && vowel_in_stem(s.b, s.j)) s.b.back() = 'i';
  }

  static void step2(State& s) {
    static constexpr std::pair<std::string_view, std::string_view> kRules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
        {"izer", "ize"},    {"bli", "ble"},     {"alli", "al"},     {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
        {"logi", "log"}};
    for (const auto& [suffix, repl] : kRules) {
      if (ends(s, suffix)) {
        replace_if_measured(s, repl);
        return;
      }
    }
  }

  static void step3(State& s) {
    static constexpr std::pair<std::string_view, std::string_view> kRules[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""}};
    for (const auto& [suffix, repl] : kRules) {
      if (ends(s, suffix)) {
        replace_if_measured(s, repl);
        return;
      }
    }
  }

  static void step4(State& s) {
    static constexpr std::string_view kSuffixes[] = {
        "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
    for (std::string_view suffix : kSuffixes) {
      if (!ends(s, suffix)) continue;
      // "ement" and "ment" shadow "ent": only the longest matching suffix applies.
      if (suffix == "ion" && (s.j == 0 || (s.b[s.j - 1] != 's' && s.b[s.j - 1] != 't'))) return;
      if (measure(s.b, s.j) > 1) s.b.resize(s.j);
      return;
    }
  }

  static void step5(State& s) {
    s.j = s.b.size();
    if (s.b.back() == 'e') {
      int m = measure(s.b, s.b.size() - 1);
      if (m > 1 || (m == 1 && !cvc(s.b, s.b.size() - 2))) s.b.pop_back();
    }
    if (s.b.back() == 'l' && double_cons(s.b, s.b.size() - 1) && measure(s.b, s.b.size()) > 1)
      s.b.pop_back();
  }
};

}  // namespace kpseq

#endif  // KPSEQ_PORTER_STEMMER_HPP_
