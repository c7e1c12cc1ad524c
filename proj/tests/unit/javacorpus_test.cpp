#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "apiseq/error.hpp"
#include "apiseq/javacorpus/corpus.hpp"
#include "apiseq/javacorpus/extract.hpp"
#include "apiseq/javacorpus/parser.hpp"
#include "apiseq/javacorpus/synthetic.hpp"

namespace apiseq::javacorpus {
namespace {

const std::filesystem::path kFixtures = APISEQ_FIXTURE_DIR;

std::vector<std::string> seq_of(std::string_view snippet) {
  return render_tokens(extract_api_sequence(parse_method(snippet)));
}

using Strings = std::vector<std::string>;

// ---- parse_method -----------------------------------------------------------

TEST(ParseMethod, DocCommentAndEmptyBody) {
  const auto m = parse_method("/** Reads. */ void f(){ }");
  EXPECT_EQ(m.name, "f");
  ASSERT_TRUE(m.doc_comment.has_value());
  EXPECT_EQ(*m.doc_comment, " Reads. ");
  EXPECT_TRUE(m.body.body.empty());
  EXPECT_TRUE(m.type_env.empty());
}

TEST(ParseMethod, TypeEnvFromParamsAndLocals) {
  const auto m = parse_method(
      "void f(File x){ BufferedReader b = new BufferedReader(new FileReader(x)); b.readLine(); }");
  EXPECT_EQ(m.type_env.at("b"), "BufferedReader");
  EXPECT_EQ(m.type_env.at("x"), "File");
  ASSERT_EQ(m.body.body.size(), 2u);
  EXPECT_EQ(m.body.body[0]->kind, StmtKind::kLocalVar);
  EXPECT_EQ(m.body.body[1]->kind, StmtKind::kExpr);
  // The constructor argument is itself a constructor call subtree.
  const auto& init = *m.body.body[0]->declarators[0].init;
  EXPECT_EQ(init.kind, ExprKind::kNew);
  ASSERT_EQ(init.args.size(), 1u);
  EXPECT_EQ(init.args[0]->kind, ExprKind::kNew);
  EXPECT_EQ(init.args[0]->type, "FileReader");
}

TEST(ParseMethod, IfElseWithFieldContext) {
  const auto m = parse_method("A a; B b; void f(){ if (p) a.m(); else b.n(); }");
  ASSERT_EQ(m.body.body.size(), 1u);
  const auto& s = *m.body.body[0];
  ASSERT_EQ(s.kind, StmtKind::kIf);
  ASSERT_TRUE(s.then_branch && s.else_branch);
  EXPECT_EQ(s.then_branch->expr->kind, ExprKind::kCall);
  EXPECT_EQ(s.then_branch->expr->text, "m");
  EXPECT_EQ(s.else_branch->expr->text, "n");
  EXPECT_EQ(m.type_env.at("a"), "A");
  EXPECT_EQ(m.type_env.at("b"), "B");
}

TEST(ParseMethod, GenericsAreErased) {
  const auto m = parse_method(
      "void f(){ Map<String, List<Integer>> m = new HashMap<>(); java.util.List<String> l; }");
  EXPECT_EQ(m.type_env.at("m"), "Map");
  EXPECT_EQ(m.type_env.at("l"), "List");
  EXPECT_EQ(erase_type("java.util.Map<K, List<V>>[]"), "Map[]");
}

TEST(ParseMethod, ShiftOperatorsSurviveGenericLexing) {
  EXPECT_NO_THROW(parse_method("void f(int a){ int b = a >> 2; b >>>= 1; boolean c = a >= b; }"));
}

TEST(ParseMethod, UnsupportedConstructsReportPosition) {
  try {
    parse_method("void f(List<String> l){\n  l.forEach(x -> x.trim());\n}");
    FAIL() << "lambda accepted";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(e.expected().find("lambda"), std::string::npos);
  }
  EXPECT_THROW(parse_method("void f(){ switch (x) { default: } }"), SyntaxError);
  EXPECT_THROW(parse_method("void f(){ new Runnable() { }; }"), SyntaxError);
  EXPECT_THROW(parse_method("void f(){ a.b(; }"), SyntaxError);
  EXPECT_THROW(parse_method("void f(){ String s = \"open; }"), SyntaxError);
  EXPECT_THROW(parse_method("int x;"), SyntaxError);
}

TEST(ParseMethod, NeverCrashesOnArbitraryBytes) {
  std::mt19937 rng(1234);
  const std::string alphabet = "ab(){};.=<>\"'/*@\n x1+-!?:[]\x01\xff";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 60);
  for (int i = 0; i < 2000; ++i) {
    std::string src;
    const auto n = len(rng);
    for (std::size_t k = 0; k < n; ++k) src += alphabet[pick(rng)];
    try {
      auto m = parse_method(src);
      (void)extract_api_sequence(m);
    } catch (const SyntaxError&) {
    }
  }
  // Mutations of a valid method.
  const std::string base =
      "/** Doc. */ void f(File x){ BufferedReader b = new BufferedReader(new FileReader(x)); "
      "while (b.ready()) { b.readLine(); } }";
  for (std::size_t cut = 0; cut < base.size(); ++cut) {
    try {
      (void)parse_method(base.substr(0, cut));
    } catch (const SyntaxError&) {
    }
  }
}

// ---- extract_api_sequence ---------------------------------------------------

TEST(Extract, ConstructorCall) {
  EXPECT_EQ(seq_of("void f(File x){ new FileReader(x); }"), Strings{"FileReader.new"});
}

TEST(Extract, ArgumentsBeforeCaller) {
  EXPECT_EQ(seq_of("void f(File x){ BufferedReader b = new BufferedReader(new FileReader(x)); "
                   "b.readLine(); }"),
            (Strings{"FileReader.new", "BufferedReader.new", "BufferedReader.readLine"}));
  EXPECT_EQ(seq_of("A a; B b; void f(){ a.m(b.n()); }"), (Strings{"B.n", "A.m"}));
}

TEST(Extract, BranchesInOrder) {
  EXPECT_EQ(seq_of("R r; A a; B b; void f(){ if(r.ok()) a.m(); else b.n(); }"),
            (Strings{"R.ok", "A.m", "B.n"}));
}

TEST(Extract, LoopsConditionThenBodyOnce) {
  EXPECT_EQ(seq_of("Iterator it; List l; void f(){ while (it.hasNext()) { l.add(it.next()); } }"),
            (Strings{"Iterator.hasNext", "Iterator.next", "List.add"}));
  EXPECT_EQ(seq_of("List l; void f(){ for (int i = l.size(); i > 0; i--) { l.remove(i); } }"),
            (Strings{"List.size", "List.remove"}));
  EXPECT_EQ(seq_of("List l; void f(){ for (String s : l.subList(0, 1)) { s.trim(); } }"),
            (Strings{"List.subList", "String.trim"}));
}

TEST(Extract, StaticCallsUseClassName) {
  EXPECT_EQ(seq_of("void f(){ int x = Math.max(1, Integer.parseInt(\"2\")); }"),
            (Strings{"Integer.parseInt", "Math.max"}));
}

TEST(Extract, UnresolvedReceiverIsSkippedWithWarning) {
  const auto m = parse_method("void f(){ mystery.call(); Helper.run(); }");
  std::vector<UnresolvedReceiver> warnings;
  const auto seq = extract_api_sequence(m, &warnings);
  EXPECT_EQ(render_tokens(seq), Strings{"Helper.run"});
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0].name, "mystery");
  EXPECT_EQ(m.unresolved_receivers, Strings{"mystery"});
}

TEST(Extract, ChainTailNeedsDeclaredReturnType) {
  // m's return type unknown: only the head of the chain is emitted.
  std::vector<UnresolvedReceiver> warnings;
  const auto m = parse_method("A a; void f(){ a.m().n(); }");
  EXPECT_EQ(render_tokens(extract_api_sequence(m, &warnings)), Strings{"A.m"});
  EXPECT_EQ(warnings.size(), 1u);
  // Declared in the same source: the tail resolves.
  const auto unit = parse_compilation_unit(
      "class A { R m() { return null; } }\n"
      "class User { A a; void f() { a.m().n(); new A().m(); } }");
  const auto& f = unit.classes[1].methods[0];
  EXPECT_EQ(render_tokens(extract_api_sequence(f)), (Strings{"A.m", "R.n", "A.new", "A.m"}));
}

TEST(Extract, SameClassCallsAreNotApis) {
  EXPECT_EQ(seq_of("List l; void f(){ helper(l.size()); this.g(); }"), Strings{"List.size"});
}

TEST(Extract, EmptyWhenNoInvocations) {
  EXPECT_TRUE(seq_of("void f(int a){ int b = a + 1; if (b > 2) { b--; } return; }").empty());
}

TEST(Extract, DuplicatesAreKept) {
  EXPECT_EQ(seq_of("Reader r; void f(){ r.read(); r.read(); }"),
            (Strings{"Reader.read", "Reader.read"}));
}

TEST(Extract, BlockIsConcatenationOfStatements) {
  const auto m = parse_method(
      "Reader r; List l; void f(File x){ BufferedReader b = new BufferedReader(r); "
      "if (b.ready()) l.add(b.readLine()); else r.close(); "
      "for (String s : l) { s.trim(); } "
      "try { x.delete(); } catch (IOException e) { e.printStackTrace(); } finally { r.close(); } }");
  ExtractionContext ctx{&m.type_env, m.member_types.get(), m.class_name};
  ApiSequence joined;
  for (const auto& s : m.body.body) {
    auto part = extract_statement(*s, ctx);
    joined.insert(joined.end(), part.begin(), part.end());
  }
  EXPECT_EQ(joined, extract_api_sequence(m));
  EXPECT_EQ(joined.size(), 9u);
}

// ---- ApiCall ----------------------------------------------------------------

TEST(ApiCallTest, RenderParseRoundTrip) {
  for (const auto& pair : read_corpus(kFixtures / "java_corpus_oracle.jsonl")) {
    for (const auto& call : pair.sequence) {
      auto back = ApiCall::parse(call.render());
      ASSERT_TRUE(back.has_value());
      EXPECT_EQ(*back, call);
    }
  }
  EXPECT_FALSE(ApiCall::parse("noDot").has_value());
  EXPECT_FALSE(ApiCall::parse("a.b.c").has_value());
  EXPECT_FALSE(ApiCall::parse(".m").has_value());
  EXPECT_FALSE(ApiCall::parse("A.").has_value());
  EXPECT_FALSE(ApiCall::parse("A .m").has_value());
}

// ---- extract_annotation -----------------------------------------------------

TEST(Annotation, FirstSentence) {
  auto a = extract_annotation("Reads a file. Returns lines.");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->text, "Reads a file.");
  EXPECT_EQ(a->tokens, (Strings{"reads", "a", "file"}));
}

TEST(Annotation, TagOnlyCommentHasNone) {
  EXPECT_FALSE(extract_annotation("@param x the input").has_value());
  EXPECT_FALSE(extract_annotation("\n * @return nothing\n ").has_value());
  EXPECT_FALSE(extract_annotation("  *  \n * <br/> ").has_value());
}

TEST(Annotation, HtmlStripped) {
  auto a = extract_annotation("Copies <b>all</b> bytes");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->text, "Copies all bytes");
  EXPECT_EQ(a->tokens, (Strings{"copies", "all", "bytes"}));
}

TEST(Annotation, GuttersAndInlineTags) {
  auto a = extract_annotation(
      "\n   * Opens the {@link java.io.File file} named by {@code path}.\n   * More text.\n"
      "   * @param path where\n");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->text, "Opens the file named by path.");
  // A dot inside a word does not end the sentence.
  EXPECT_EQ(extract_annotation("Uses java.io streams. Then more.")->text, "Uses java.io streams.");
}

// ---- build_corpus / split ---------------------------------------------------

TEST(BuildCorpus, MatchesHandDerivedOracle) {
  CorpusStats stats;
  const auto corpus = build_corpus(kFixtures / "java_corpus", &stats);
  const auto oracle = read_corpus(kFixtures / "java_corpus_oracle.jsonl");
  ASSERT_EQ(corpus.size(), 20u);
  ASSERT_EQ(oracle.size(), 20u);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(to_jsonl_line(corpus[i]), to_jsonl_line(oracle[i])) << "pair " << i;
  }
  EXPECT_EQ(stats.files, 5u);
  EXPECT_EQ(stats.pairs, 20u);
  EXPECT_EQ(stats.skipped_files, 0u);
  EXPECT_EQ(stats.empty_sequences, 2u);  // isComma, Entry.isExpired
}

TEST(BuildCorpus, UndocumentedMethodsAreNotPaired) {
  CorpusStats stats;
  const auto corpus = build_corpus(kFixtures / "java_small", &stats);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(stats.methods, 3u);
  EXPECT_EQ(render(corpus[1].sequence), "File.new FileReader.new");
}

TEST(BuildCorpus, EmptyDirectory) {
  EXPECT_THROW(build_corpus(kFixtures / "java_empty"), EmptyCorpus);
}

TEST(BuildCorpus, UnsupportedFileIsSkipped) {
  CorpusStats stats;
  const auto corpus = build_corpus(kFixtures / "java_mixed", &stats);
  EXPECT_EQ(corpus.size(), 1u);
  EXPECT_EQ(stats.skipped_files, 1u);
  ASSERT_EQ(stats.log.size(), 1u);
  EXPECT_NE(stats.log[0].find("b_Lambda.java"), std::string::npos);
}

TEST(BuildCorpus, SourceIdsUnique) {
  const auto corpus = extract_pairs(
      "class A { /** One. */ void f(File x){ x.delete(); } /** Two. */ void f(File x, int y)"
      "{ x.exists(); } }",
      "A.java");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].source_id, "A.java#A.f");
  EXPECT_EQ(corpus[1].source_id, "A.java#A.f#2");
}

Corpus synthetic_pairs(std::size_t n) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    AnnotatedPair p;
    p.source_id = "p" + std::to_string(i);
    p.annotation = {"does thing " + std::to_string(i), {"does", "thing", std::to_string(i)}};
    p.sequence = {{"C" + std::to_string(i % 7), "m"}};
    c.push_back(std::move(p));
  }
  return c;
}

std::set<std::string> ids(const Corpus& c) {
  std::set<std::string> out;
  for (const auto& p : c) out.insert(p.source_id);
  return out;
}

TEST(SplitCorpus, SizesAndPartition) {
  const auto pairs = synthetic_pairs(100);
  const auto split = split_corpus(pairs, 42, 10, 0.1);
  EXPECT_EQ(split.train.size(), 81u);
  EXPECT_EQ(split.valid.size(), 9u);
  EXPECT_EQ(split.test.size(), 10u);
  auto all = ids(split.train);
  for (const auto& id : ids(split.valid)) EXPECT_TRUE(all.insert(id).second);
  for (const auto& id : ids(split.test)) EXPECT_TRUE(all.insert(id).second);
  EXPECT_EQ(all, ids(pairs));
}

TEST(SplitCorpus, DeterministicPerSeed) {
  const auto pairs = synthetic_pairs(100);
  const auto a = split_corpus(pairs, 42, 10, 0.1);
  const auto b = split_corpus(pairs, 42, 10, 0.1);
  EXPECT_EQ(ids(a.train), ids(b.train));
  EXPECT_EQ(ids(a.test), ids(b.test));
  const auto c = split_corpus(pairs, 43, 10, 0.1);
  EXPECT_NE(ids(a.test), ids(c.test));
}

TEST(SplitCorpus, PropertyOverRandomSizes) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    const std::size_t test = rng() % n;
    const double frac = (rng() % 100) / 100.0;
    const auto split = split_corpus(synthetic_pairs(n), rng(), test, frac);
    const std::size_t rest = n - test;
    ASSERT_EQ(split.test.size(), test);
    ASSERT_LE(std::abs(static_cast<double>(split.valid.size()) - frac * rest), 1.0);
    ASSERT_EQ(split.train.size() + split.valid.size() + split.test.size(), n);
  }
}

TEST(SplitCorpus, Errors) {
  const auto pairs = synthetic_pairs(10);
  EXPECT_THROW(split_corpus(pairs, 1, 10, 0.1), TooFewPairs);
  EXPECT_THROW(split_corpus(pairs, 1, 2, 1.0), TooFewPairs);
  EXPECT_THROW(split_corpus(pairs, 1, 2, -0.1), TooFewPairs);
}

TEST(CorpusFile, WriteReadRoundTrip) {
  const auto corpus = build_corpus(kFixtures / "java_corpus");
  const auto path = std::filesystem::temp_directory_path() / "apiseq_corpus_rt.jsonl";
  write_corpus(path, corpus);
  const auto back = read_corpus(path);
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].sequence, corpus[i].sequence);
    EXPECT_EQ(back[i].annotation.tokens, corpus[i].annotation.tokens);
  }
}

// ---- synthetic corpus -------------------------------------------------------

TEST(Synthetic, ApiVocabularySize) {
  const auto apis = synthetic_apis({});
  EXPECT_EQ(apis.size(), 150u);
  std::set<std::string> names;
  for (const auto& a : apis) names.insert(a.render());
  EXPECT_EQ(names.size(), apis.size());
}

TEST(Synthetic, DeterministicInSeed) {
  SyntheticSpec spec;
  spec.pairs = 100;
  const auto a = synthetic_corpus(spec);
  const auto b = synthetic_corpus(spec);
  ASSERT_EQ(a.size(), 100u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(to_jsonl_line(a[i]), to_jsonl_line(b[i]));
  }
  spec.seed = 2;
  const auto c = synthetic_corpus(spec);
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += to_jsonl_line(a[i]) == to_jsonl_line(c[i]);
  EXPECT_LT(same, 10u);
}

TEST(Synthetic, PairsUseOneClassFromTheVocabulary) {
  SyntheticSpec spec;
  spec.pairs = 300;
  const auto apis = synthetic_apis(spec);
  const std::set<ApiCall> known(apis.begin(), apis.end());
  const auto corpus = synthetic_corpus(spec);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = corpus[i];
    EXPECT_EQ(p.source_id, "synthetic#" + std::to_string(i));
    ASSERT_GE(p.sequence.size(), 2u);
    ASSERT_LE(p.sequence.size(), 1 + spec.max_actions);
    EXPECT_EQ(p.sequence.front().member, "new");
    std::set<std::string> members;
    for (const auto& call : p.sequence) {
      EXPECT_TRUE(known.count(call)) << call.render();
      EXPECT_EQ(call.class_name, p.sequence.front().class_name);
      members.insert(call.member);
    }
    EXPECT_EQ(members.size(), p.sequence.size());
    EXPECT_FALSE(p.annotation.tokens.empty());
    EXPECT_EQ(p.annotation.tokens, annotation_tokens(p.annotation.text));
  }
}

TEST(Synthetic, BadSpecThrows) {
  SyntheticSpec spec;
  spec.methods_per_class = 1;
  EXPECT_THROW(synthetic_apis(spec), TooFewPairs);
  spec = {};
  spec.max_actions = 0;
  EXPECT_THROW(synthetic_corpus(spec), TooFewPairs);
  spec = {};
  spec.api_names = 100000;
  EXPECT_THROW(synthetic_apis(spec), TooFewPairs);
}

}  // namespace
}  // namespace apiseq::javacorpus
