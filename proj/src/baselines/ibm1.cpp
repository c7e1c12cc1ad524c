#include "apiseq/baselines/ibm1.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "apiseq/error.hpp"

namespace apiseq::baselines {

double TranslationTable::prob(const std::string& word, const std::string& api) const {
  auto row = t.find(word);
  if (row == t.end()) return 0.0;
  auto it = row->second.find(api);
  return it == row->second.end() ? 0.0 : it->second;
}

double ibm1_log_likelihood(const TranslationTable& table, const javacorpus::Corpus& pairs) {
  double ll = 0.0;
  for (const auto& p : pairs) {
    const auto& words = p.annotation.tokens;
    if (words.empty() || p.sequence.empty()) continue;
    for (const auto& call : p.sequence) {
      const std::string api = call.render();
      double s = 0.0;
      for (const auto& w : words) s += table.prob(w, api);
      ll += std::log(s / static_cast<double>(words.size()));
    }
  }
  return ll;
}

TranslationTable train_ibm1(const javacorpus::Corpus& pairs, std::size_t iterations,
                            std::vector<double>* log_likelihood) {
  TranslationTable table;
  std::vector<std::vector<std::string>> api_tokens;
  for (const auto& p : pairs) {
    api_tokens.push_back(javacorpus::render_tokens(p.sequence));
    if (p.annotation.tokens.empty() || p.sequence.empty()) continue;
    for (const auto& w : p.annotation.tokens) table.vocab_words.insert(w);
    for (const auto& a : api_tokens.back()) table.vocab_apis.insert(a);
  }
  if (table.vocab_words.empty()) throw EmptyCorpus("no pair has both annotation words and APIs");

  // Uniform start over all APIs; only co-occurring cells are ever read.
  const double uniform = 1.0 / static_cast<double>(table.vocab_apis.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].annotation.tokens.empty()) continue;
    for (const auto& w : pairs[i].annotation.tokens) {
      auto& row = table.t[w];
      for (const auto& a : api_tokens[i]) row.emplace(a, uniform);
    }
  }

  for (std::size_t iter = 0; iter < iterations; ++iter) {
    std::map<std::string, std::map<std::string, double>, std::less<>> counts;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& words = pairs[i].annotation.tokens;
      if (words.empty()) continue;
      for (const auto& a : api_tokens[i]) {
        double z = 0.0;
        for (const auto& w : words) z += table.t[w][a];
        for (const auto& w : words) counts[w][a] += table.t[w][a] / z;
      }
    }
    for (auto& [w, row] : counts) {
      double total = 0.0;
      for (const auto& [a, c] : row) total += c;
      auto& out = table.t[w];
      for (auto& [a, p] : out) p = 0.0;
      for (const auto& [a, c] : row) out[a] = c / total;
    }
    if (log_likelihood) log_likelihood->push_back(ibm1_log_likelihood(table, pairs));
  }
  return table;
}

void TranslationTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& [w, row] : t) {
    std::vector<std::pair<std::string, double>> cells(row.begin(), row.end());
    std::stable_sort(cells.begin(), cells.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [a, p] : cells) out << w << '\t' << a << '\t' << p << '\n';
  }
}

TranslationTable TranslationTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  TranslationTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected word, api, prob");
    }
    const std::string w = line.substr(0, t1), a = line.substr(t1 + 1, t2 - t1 - 1);
    double p = 0.0;
    std::istringstream num(line.substr(t2 + 1));
    if (!(num >> p)) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad probability");
    table.t[w][a] = p;
    table.vocab_words.insert(w);
    table.vocab_apis.insert(a);
  }
  return table;
}

std::vector<std::pair<std::string, double>> swim_expand(const TranslationTable& table,
                                                        const Terms& query, std::size_t m) {
  bool known = false;
  for (const auto& w : query) known = known || table.vocab_words.count(w) > 0;
  if (!known || m == 0) return {};
  std::vector<std::pair<std::string, double>> scored;
  for (const auto& a : table.vocab_apis) {
    double s = 0.0;
    bool aligned = false;
    for (const auto& w : query) {
      const double p = table.prob(w, a);
      aligned = aligned || p > kSwimFloor;
      s += std::log(std::max(p, kSwimFloor));
    }
    if (aligned) scored.emplace_back(a, s);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  if (scored.size() > m) scored.resize(m);
  return scored;
}

std::vector<javacorpus::ApiSequence> swim_rank(const TranslationTable& table,
                                               const InvertedIndex& index, const Terms& query,
                                               std::size_t k, std::size_t m) {
  Terms expanded;
  for (auto& [api, score] : swim_expand(table, query, m)) expanded.push_back(api);
  std::vector<javacorpus::ApiSequence> out;
  for (const auto& hit : bm25_search(index, expanded, k)) out.push_back(index.payloads().at(hit.doc_id));
  return out;
}

}  // namespace apiseq::baselines
