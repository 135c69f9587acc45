#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "kpseq/corpus.hpp"
#include "kpseq/synthetic.hpp"
#include "oracles.hpp"

using namespace kpseq;
using L = Label;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("kpseq_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream(path, std::ios::binary) << content;
}

}  // namespace

TEST(Tokenize, SplitsTrailingPunctuationKeepsHyphens) {
  EXPECT_EQ(tokenize("A single-server queue."), (std::vector<std::string>{"A", "single-server", "queue", "."}));
}

TEST(Tokenize, MapsRoundBrackets) {
  EXPECT_EQ(tokenize("(SIMLIB)"), (std::vector<std::string>{"-LRB-", "SIMLIB", "-RRB-"}));
}

TEST(Tokenize, EmptyInput) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \n\t").empty());
}

TEST(Tokenize, PreTokenizedBracketsPassThrough) {
  EXPECT_EQ(tokenize("SIMLIB -LRB- a package -RRB- ."),
            (std::vector<std::string>{"SIMLIB", "-LRB-", "a", "package", "-RRB-", "."}));
}

TEST(Tokenize, LeadingAndMultiplePunctuation) {
  EXPECT_EQ(tokenize("\"quoted\", (x)."),
            (std::vector<std::string>{"\"", "quoted", "\"", ",", "-LRB-", "x", "-RRB-", "."}));
}

TEST(TagBio, SimlibExample) {
  std::vector<std::string> toks = {"an", "object-oriented", "version", "of", "SIMLIB"};
  auto y = corpus::tag_bio(toks, {"object-oriented version", "SIMLIB"});
  EXPECT_EQ(y, (LabelSequence{L::KO, L::KB, L::KI, L::KO, L::KB}));
}

TEST(TagBio, NoKeyphrases) {
  EXPECT_EQ(corpus::tag_bio({"a", "b", "c"}, {}), (LabelSequence{L::KO, L::KO, L::KO}));
}

TEST(TagBio, LongestFirstConsumesShorterOccurrence) {
  EXPECT_EQ(corpus::tag_bio({"x", "y"}, {"x y", "y"}), (LabelSequence{L::KB, L::KI}));
  EXPECT_EQ(corpus::tag_bio({"x", "y"}, {"y", "x y"}), (LabelSequence{L::KB, L::KI}));
}

TEST(TagBio, CaseInsensitiveAndAllOccurrences) {
  auto y = corpus::tag_bio({"Neural", "nets", "and", "neural", "NETS"}, {"neural nets"});
  EXPECT_EQ(y, (LabelSequence{L::KB, L::KI, L::KO, L::KB, L::KI}));
}

TEST(TagBio, AbstractivePhrasesAreDroppedAndCounted) {
  auto r = corpus::tag_bio_detailed({"a", "b"}, {"c", "a", "a b c"});
  EXPECT_EQ(r.labels, (LabelSequence{L::KB, L::KO}));
  EXPECT_EQ(r.dropped, 2u);
}

TEST(TagBio, OverlappingSameLengthLeftmostWins) {
  EXPECT_EQ(corpus::tag_bio({"a", "a", "a"}, {"a a"}), (LabelSequence{L::KB, L::KI, L::KO}));
}

TEST(TagBio, MatchesBruteForceSubspanOracleOnRandomInputs) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> vocab = {"a", "b", "c", "d"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1), len(1, 12), plen(1, 4), nph(0, 5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> toks(len(rng));
    for (auto& t : toks) t = vocab[pick(rng)];
    std::vector<std::string> phrases;
    std::vector<std::vector<std::string>> split;
    for (std::size_t k = nph(rng); k-- > 0;) {
      std::vector<std::string> p(plen(rng));
      std::string joined;
      for (auto& w : p) {
        w = vocab[pick(rng)];
        joined += (joined.empty() ? "" : " ") + w;
      }
      phrases.push_back(joined);
      split.push_back(p);
    }
    LabelSequence got = corpus::tag_bio(toks, phrases);
    ASSERT_EQ(got, oracle::brute_force_tag(toks, split)) << "trial " << trial;
    ASSERT_TRUE(is_well_formed(got));

    std::vector<std::string> shuffled = phrases;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    ASSERT_EQ(corpus::tag_bio(toks, shuffled), got) << "order dependence in trial " << trial;
  }
}

TEST(Document, RejectsLengthMismatchAndOrphanI) {
  EXPECT_THROW(make_document("d", {"a", "b"}, {L::KO}), DataError);
  EXPECT_THROW(make_document("d", {"a"}, {L::KI}), DataError);
  EXPECT_THROW(make_document("d", {"a", "b"}, {L::KO, L::KI}), DataError);
  EXPECT_THROW(make_document("", {"a"}, {L::KO}), DataError);
  auto d = make_document("d", {"Deep", "Nets", "x"}, {L::KB, L::KI, L::KO});
  EXPECT_EQ(d.gold_phrases, (KeyphraseSet{"deep nets"}));
}

TEST(Stats, SingleDocument) {
  auto d = make_document("d", {"a", "b", "c", "d", "e"}, {L::KO, L::KB, L::KI, L::KO, L::KO});
  auto s = corpus::compute_stats({d});
  EXPECT_EQ(s.num_docs, 1u);
  EXPECT_DOUBLE_EQ(s.avg_keyphrases, 1.0);
  EXPECT_DOUBLE_EQ(s.avg_phrase_len, 2.0);
  EXPECT_DOUBLE_EQ(s.avg_tokens, 5.0);
  EXPECT_EQ(s.max_phrase_len, 2u);
  EXPECT_EQ(s.min_tokens, 5u);
  EXPECT_EQ(s.max_tokens, 5u);
}

TEST(Stats, EmptyCorpusIsAnError) {
  try {
    corpus::compute_stats({});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("empty corpus"), std::string::npos);
  }
}

TEST(Stats, OrderingInvariantOnGeneratedCorpus) {
  auto c = synthetic::make_corpus({}, 50, 0, 0);
  auto s = corpus::compute_stats(c.train);
  EXPECT_LE(static_cast<double>(s.min_tokens), s.avg_tokens);
  EXPECT_LE(s.avg_tokens, static_cast<double>(s.max_tokens));
  EXPECT_LE(s.avg_phrase_len, static_cast<double>(s.max_phrase_len));
}

TEST(CorpusIo, ProcessedRoundTrip) {
  auto c = synthetic::make_corpus({}, 20, 0, 0);
  c.train.push_back(make_document("unicode", {"Ünïcode", "\"q\"", "x"}, {L::KB, L::KI, L::KO}));
  std::string path = temp_path("processed.jsonl");
  corpus::save_processed(c.train, path);
  EXPECT_EQ(corpus::load_processed(path), c.train);
  std::filesystem::remove(path);
}

TEST(CorpusIo, RawRoundTripThroughPreprocess) {
  std::string path = temp_path("raw.jsonl");
  write_file(path,
             "{\"doc_id\":\"d1\",\"text\":\"An object-oriented version of SIMLIB (a simple package).\","
             "\"keyphrases\":[\"object-oriented version\",\"SIMLIB\",\"not present\"]}\n");
  auto raw = corpus::load_raw(path);
  ASSERT_EQ(raw.size(), 1u);
  auto rep = corpus::preprocess(raw);
  EXPECT_EQ(rep.dropped_phrases, 1u);
  EXPECT_EQ(rep.docs[0].gold_phrases, (KeyphraseSet{"object-oriented version", "simlib"}));
  EXPECT_EQ(rep.docs[0].tokens[5], "-LRB-");
  std::filesystem::remove(path);
}

TEST(CorpusIo, LengthMismatchNamesDocument) {
  std::string path = temp_path("bad_len.jsonl");
  write_file(path, "{\"doc_id\":\"ok\",\"tokens\":[\"a\"],\"labels\":[\"O\"]}\n"
                   "{\"doc_id\":\"doc-42\",\"tokens\":[\"a\",\"b\"],\"labels\":[\"O\"]}\n");
  try {
    corpus::load_processed(path);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("doc-42"), std::string::npos) << msg;
    EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
  }
  std::filesystem::remove(path);
}

TEST(CorpusIo, InvalidLabel) {
  std::string path = temp_path("bad_label.jsonl");
  write_file(path, "{\"doc_id\":\"d\",\"tokens\":[\"a\"],\"labels\":[\"X\"]}\n");
  try {
    corpus::load_processed(path);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("invalid label"), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(CorpusIo, MalformedLineCarriesLineNumber) {
  std::string path = temp_path("malformed.jsonl");
  write_file(path, "{\"doc_id\":\"d\",\"tokens\":[\"a\"],\"labels\":[\"O\"]}\n{not json\n");
  try {
    corpus::load_processed(path);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(CorpusIo, RejectsOverlongAndDuplicateDocuments) {
  std::string path = temp_path("long.jsonl");
  write_file(path, "{\"doc_id\":\"d\",\"tokens\":[\"a\",\"b\",\"c\"],\"labels\":[\"O\",\"O\",\"O\"]}\n");
  EXPECT_THROW(corpus::load_processed(path, 2), DataError);
  EXPECT_NO_THROW(corpus::load_processed(path, 3));
  write_file(path, "{\"doc_id\":\"d\",\"tokens\":[\"a\"],\"labels\":[\"O\"]}\n"
                   "{\"doc_id\":\"d\",\"tokens\":[\"a\"],\"labels\":[\"O\"]}\n");
  EXPECT_THROW(corpus::load_processed(path), DataError);
  std::filesystem::remove(path);
}
