#include "apiseq/eval/bleu.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "apiseq/error.hpp"
#include "json.hpp"

namespace apiseq::eval {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, int n) {
  NgramCounts counts;
  const auto len = static_cast<std::size_t>(n);
  if (tokens.size() < len) return counts;
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + i, tokens.begin() + i + len)];
  }
  return counts;
}

struct NgramStats {
  std::size_t hits = 0;
  std::size_t total = 0;
};

NgramStats ngram_stats(const Tokens& candidate, const Tokens& reference, int n) {
  NgramStats stats;
  const auto cand = count_ngrams(candidate, n);
  const auto ref = count_ngrams(reference, n);
  for (const auto& [gram, count] : cand) {
    stats.total += count;
    if (auto it = ref.find(gram); it != ref.end()) stats.hits += std::min(count, it->second);
  }
  return stats;
}

double combine(const std::vector<double>& precisions, double bp) {
  if (bp == 0.0) return 0.0;
  double log_sum = 0.0;
  const double w = 1.0 / static_cast<double>(precisions.size());
  for (double p : precisions) log_sum += w * std::log(p);
  return 100.0 * bp * std::exp(log_sum);
}

}  // namespace

double modified_precision(const Tokens& candidate, const Tokens& reference, int n) {
  const auto stats = ngram_stats(candidate, reference, n);
  return static_cast<double>(stats.hits + 1) / static_cast<double>(stats.total + 1);
}

double brevity_penalty(std::size_t c, std::size_t r) {
  if (c == 0) return 0.0;
  if (c > r) return 1.0;
  return std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
}

BleuBreakdown bleu(const Tokens& candidate, const Tokens& reference, int max_order) {
  if (reference.empty()) throw EmptyReference("reference sequence is empty");
  BleuBreakdown out;
  out.candidate_length = candidate.size();
  out.reference_length = reference.size();
  for (int n = 1; n <= max_order; ++n) {
    out.precisions.push_back(modified_precision(candidate, reference, n));
    out.weights.push_back(1.0 / max_order);
  }
  out.brevity_penalty = brevity_penalty(candidate.size(), reference.size());
  out.bleu_percent = combine(out.precisions, out.brevity_penalty);
  return out;
}

ScoreReport corpus_score(const std::vector<std::pair<Tokens, Tokens>>& pairs, std::string system,
                         Aggregation aggregation, int max_order) {
  if (pairs.empty()) throw EmptyList("no (candidate, reference) pairs to score");
  ScoreReport report;
  report.system = std::move(system);
  report.count = pairs.size();
  report.aggregation = aggregation;
  report.examples.reserve(pairs.size());
  double sum = 0.0;
  for (const auto& [cand, ref] : pairs) {
    auto breakdown = bleu(cand, ref, max_order);
    sum += breakdown.bleu_percent;
    report.examples.push_back({cand, ref, std::move(breakdown)});
  }
  if (aggregation == Aggregation::kSentenceMean) {
    report.bleu_percent = sum / static_cast<double>(pairs.size());
    return report;
  }
  std::vector<double> precisions;
  std::size_t c = 0, r = 0;
  for (const auto& [cand, ref] : pairs) {
    c += cand.size();
    r += ref.size();
  }
  for (int n = 1; n <= max_order; ++n) {
    NgramStats pooled;
    for (const auto& [cand, ref] : pairs) {
      const auto s = ngram_stats(cand, ref, n);
      pooled.hits += s.hits;
      pooled.total += s.total;
    }
    precisions.push_back(static_cast<double>(pooled.hits + 1) /
                         static_cast<double>(pooled.total + 1));
  }
  report.bleu_percent = combine(precisions, brevity_penalty(c, r));
  return report;
}

void write_report_tsv(const std::string& path, const std::vector<ScoreReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& rep : reports) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", rep.bleu_percent);
    out << rep.system << '\t' << buf << '\t' << rep.count << '\n';
  }
}

std::vector<ScoreReport> read_report_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::vector<ScoreReport> reports;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    ScoreReport rep;
    std::string bleu_text, count_text;
    if (!std::getline(fields, rep.system, '\t') || !std::getline(fields, bleu_text, '\t') ||
        !std::getline(fields, count_text)) {
      throw FormatError("malformed report line: " + line);
    }
    rep.bleu_percent = std::stod(bleu_text);
    rep.count = std::stoul(count_text);
    reports.push_back(std::move(rep));
  }
  return reports;
}

void write_breakdown_jsonl(const std::string& path, const ScoreReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& ex : report.examples) {
    nlohmann::json j;
    j["system"] = report.system;
    j["candidate"] = ex.candidate;
    j["reference"] = ex.reference;
    j["p_n"] = ex.breakdown.precisions;
    j["bp"] = ex.breakdown.brevity_penalty;
    j["bleu"] = ex.breakdown.bleu_percent;
    out << j.dump() << '\n';
  }
}

ScoreReport read_breakdown_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  ScoreReport report;
  std::string line;
  double sum = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("malformed breakdown line in " + path);
    report.system = j.value("system", "");
    ScoredExample ex;
    ex.candidate = j.at("candidate").get<Tokens>();
    ex.reference = j.at("reference").get<Tokens>();
    ex.breakdown.precisions = j.at("p_n").get<std::vector<double>>();
    ex.breakdown.weights.assign(ex.breakdown.precisions.size(),
                                1.0 / static_cast<double>(ex.breakdown.precisions.size()));
    ex.breakdown.brevity_penalty = j.at("bp").get<double>();
    ex.breakdown.bleu_percent = j.at("bleu").get<double>();
    ex.breakdown.candidate_length = ex.candidate.size();
    ex.breakdown.reference_length = ex.reference.size();
    sum += ex.breakdown.bleu_percent;
    report.examples.push_back(std::move(ex));
  }
  report.count = report.examples.size();
  if (report.count > 0) report.bleu_percent = sum / static_cast<double>(report.count);
  return report;
}

}  // namespace apiseq::eval
