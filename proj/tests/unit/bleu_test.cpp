#include "apiseq/eval/bleu.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "apiseq/error.hpp"

namespace apiseq::eval {
namespace {

Tokens toks(std::initializer_list<const char*> words) { return Tokens(words.begin(), words.end()); }

// 100 * (1/6 * 1/5 * 1/4 * 1/3)^(1/4), evaluated directly from the smoothed
// precision definition for two disjoint length-5 sequences.
const double kDisjointFive = 100.0 * std::pow(1.0 / 360.0, 0.25);

TEST(ModifiedPrecision, IdenticalUnigrams) {
  const auto s = toks({"a", "b", "c", "d", "e"});
  EXPECT_DOUBLE_EQ(modified_precision(s, s, 1), 1.0);
}

TEST(ModifiedPrecision, DisjointBigrams) {
  EXPECT_DOUBLE_EQ(modified_precision(toks({"a", "b", "c", "d", "e"}),
                                      toks({"f", "g", "h", "i", "j"}), 2),
                   0.2);
}

TEST(ModifiedPrecision, ClipsRepeatedCandidateTokens) {
  EXPECT_NEAR(modified_precision(toks({"a", "a", "a"}), toks({"a", "b"}), 1), 0.5, 1e-12);
}

TEST(ModifiedPrecision, ShortCandidateHasNoNgrams) {
  EXPECT_DOUBLE_EQ(modified_precision(toks({"a"}), toks({"a", "b", "c"}), 3), 1.0);
}

TEST(BrevityPenalty, Branches) {
  EXPECT_DOUBLE_EQ(brevity_penalty(6, 5), 1.0);
  EXPECT_DOUBLE_EQ(brevity_penalty(5, 5), 1.0);
  EXPECT_NEAR(brevity_penalty(2, 4), 0.36787944117144233, 1e-6);
  EXPECT_DOUBLE_EQ(brevity_penalty(0, 4), 0.0);
}

TEST(Bleu, ExactMatchIsHundred) {
  const auto s = toks({"File.new", "File.exists", "File.canRead", "File.delete", "File.close"});
  EXPECT_NEAR(bleu(s, s).bleu_percent, 100.0, 1e-9);
}

TEST(Bleu, DisjointFiveTokens) {
  const auto b = bleu(toks({"a", "b", "c", "d", "e"}), toks({"f", "g", "h", "i", "j"}));
  ASSERT_EQ(b.precisions.size(), 4u);
  EXPECT_DOUBLE_EQ(b.precisions[0], 1.0 / 6);
  EXPECT_DOUBLE_EQ(b.precisions[1], 1.0 / 5);
  EXPECT_DOUBLE_EQ(b.precisions[2], 1.0 / 4);
  EXPECT_DOUBLE_EQ(b.precisions[3], 1.0 / 3);
  EXPECT_DOUBLE_EQ(b.brevity_penalty, 1.0);
  EXPECT_NEAR(b.bleu_percent, kDisjointFive, 1e-9);
  EXPECT_NEAR(b.bleu_percent, 22.9575, 1e-4);
}

TEST(Bleu, EmptyCandidateScoresZero) {
  const auto b = bleu({}, toks({"a", "b"}));
  for (double p : b.precisions) EXPECT_DOUBLE_EQ(p, 1.0);
  EXPECT_DOUBLE_EQ(b.bleu_percent, 0.0);
}

TEST(Bleu, EmptyReferenceThrows) {
  EXPECT_THROW(bleu(toks({"a"}), {}), EmptyReference);
}

TEST(Bleu, BreakdownRecombines) {
  const auto b = bleu(toks({"a", "b", "c", "x"}), toks({"a", "b", "c", "d", "e", "f"}));
  double s = 0.0;
  for (std::size_t i = 0; i < b.precisions.size(); ++i) s += b.weights[i] * std::log(b.precisions[i]);
  EXPECT_NEAR(b.bleu_percent, 100.0 * b.brevity_penalty * std::exp(s), 1e-9);
  EXPECT_LT(b.brevity_penalty, 1.0);
}

TEST(CorpusScore, Examples) {
  const auto exact = toks({"a", "b", "c", "d", "e"});
  const auto other = toks({"f", "g", "h", "i", "j"});
  EXPECT_NEAR(corpus_score({{exact, exact}, {exact, exact}}).bleu_percent, 100.0, 1e-9);
  const auto mixed = corpus_score({{exact, exact}, {exact, other}});
  EXPECT_NEAR(mixed.bleu_percent, (100.0 + kDisjointFive) / 2.0, 1e-9);
  EXPECT_EQ(mixed.count, 2u);
  EXPECT_DOUBLE_EQ(corpus_score({{exact, other}}).bleu_percent, bleu(exact, other).bleu_percent);
  EXPECT_THROW(corpus_score({}), EmptyList);
}

TEST(CorpusScore, PooledDiffersFromMean) {
  const auto a = toks({"a", "b", "c", "d"});
  const auto b = toks({"x", "y"});
  const std::vector<std::pair<Tokens, Tokens>> pairs = {{a, a}, {b, toks({"x", "z", "w"})}};
  const auto mean = corpus_score(pairs);
  const auto pooled = corpus_score(pairs, "", Aggregation::kPooled);
  EXPECT_NE(mean.bleu_percent, pooled.bleu_percent);
  EXPECT_GT(pooled.bleu_percent, 0.0);
  EXPECT_LE(pooled.bleu_percent, 100.0);
}

// Random sequences over a small alphabet so that n-gram overlaps happen.
Tokens random_tokens(std::mt19937& rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len), sym(0, 5);
  Tokens t(static_cast<std::size_t>(len(rng)));
  for (auto& w : t) w = "t" + std::to_string(sym(rng));
  return t;
}

TEST(BleuProperties, BoundedAndRelabelingInvariant) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    auto cand = random_tokens(rng, 8);
    auto ref = random_tokens(rng, 8);
    if (ref.empty()) ref.push_back("t0");
    const double score = bleu(cand, ref).bleu_percent;
    ASSERT_GE(score, 0.0);
    ASSERT_LE(score, 100.0 + 1e-9);

    std::vector<int> perm = {0, 1, 2, 3, 4, 5};
    std::shuffle(perm.begin(), perm.end(), rng);
    auto relabel = [&](Tokens t) {
      for (auto& w : t) w = "u" + std::to_string(perm[static_cast<std::size_t>(w[1] - '0')]);
      return t;
    };
    ASSERT_NEAR(bleu(relabel(cand), relabel(ref)).bleu_percent, score, 1e-12);
  }
}

TEST(BleuProperties, DisjointStrictlyBetweenZeroAndHundred) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto cand = random_tokens(rng, 8);
    auto ref = random_tokens(rng, 8);
    if (cand.empty() || ref.empty()) continue;
    for (auto& w : ref) w = "r" + w;  // disjoint vocabularies
    const double score = bleu(cand, ref).bleu_percent;
    ASSERT_GT(score, 0.0);
    ASSERT_LT(score, 100.0);
  }
}

TEST(BleuProperties, HundredOnlyForExactMatch) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    auto cand = random_tokens(rng, 8);
    auto ref = random_tokens(rng, 8);
    if (cand.size() < 4 || ref.size() < 4) continue;
    const bool exact = cand == ref;
    ASSERT_EQ(std::abs(bleu(cand, ref).bleu_percent - 100.0) < 1e-9, exact);
    ASSERT_NEAR(bleu(ref, ref).bleu_percent, 100.0, 1e-9);
  }
}

TEST(ReportFiles, RoundTripThroughDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "apiseq_bleu_test";
  std::filesystem::create_directories(dir);
  const auto exact = toks({"a", "b"});
  auto rep = corpus_score({{exact, exact}, {toks({"a"}), exact}}, "sys");
  write_breakdown_jsonl((dir / "sys.jsonl").string(), rep);
  write_report_tsv((dir / "report.tsv").string(), {rep});
  const auto back = read_breakdown_jsonl((dir / "sys.jsonl").string());
  EXPECT_EQ(back.system, "sys");
  EXPECT_EQ(back.count, 2u);
  EXPECT_NEAR(back.bleu_percent, rep.bleu_percent, 1e-9);
  const auto rows = read_report_tsv((dir / "report.tsv").string());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].bleu_percent, rep.bleu_percent, 5e-7);
}

}  // namespace
}  // namespace apiseq::eval
