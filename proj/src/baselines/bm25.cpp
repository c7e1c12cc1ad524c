#include "apiseq/baselines/bm25.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "apiseq/error.hpp"
#include "json.hpp"

namespace apiseq::baselines {

Terms preprocess_code_doc(std::string_view source_text) {
  Terms terms;
  auto flush_word = [&terms](const std::string& w) {
    // camelCase and acronym boundaries: aB, AAb (split before the last A), letter/digit stays.
    std::size_t start = 0;
    auto upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
    auto lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
    for (std::size_t i = 1; i <= w.size(); ++i) {
      const bool cut = i == w.size() || (upper(w[i]) && !upper(w[i - 1])) ||
                       (upper(w[i - 1]) && upper(w[i]) && i + 1 < w.size() && lower(w[i + 1]));
      if (!cut) continue;
      std::string part = w.substr(start, i - start);
      for (auto& c : part) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (!part.empty()) terms.push_back(std::move(part));
      start = i;
    }
  };
  std::string cur;
  for (char ch : source_text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur += ch;
    } else if (!cur.empty()) {
      flush_word(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) flush_word(cur);
  return terms;
}

InvertedIndex build_index(const std::vector<IndexedDoc>& docs) {
  InvertedIndex index;
  std::size_t total = 0;
  for (const auto& d : docs) {
    if (!index.doc_len_.emplace(d.doc_id, d.terms.size()).second) {
      throw DuplicateDocId("doc id " + std::to_string(d.doc_id) + " appears twice");
    }
    index.payload_.emplace(d.doc_id, d.payload);
    total += d.terms.size();
    std::map<std::string_view, std::uint32_t> tf;
    for (const auto& t : d.terms) ++tf[t];
    for (const auto& [term, count] : tf) {
      auto it = index.postings_.find(term);
      if (it == index.postings_.end()) it = index.postings_.emplace(std::string(term), std::vector<Posting>{}).first;
      it->second.push_back({d.doc_id, count});
    }
  }
  for (auto& [term, list] : index.postings_) {
    std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) { return a.doc_id < b.doc_id; });
  }
  index.avg_len_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
  return index;
}

double bm25_idf(std::size_t n_docs, std::size_t df) {
  const double n = static_cast<double>(n_docs), d = static_cast<double>(df);
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

std::vector<SearchHit> bm25_search(const InvertedIndex& index, const Terms& query, std::size_t k,
                                   const Bm25Params& params) {
  if (k == 0 || index.size() == 0) return {};
  const std::set<std::string_view> distinct(query.begin(), query.end());
  std::map<DocId, double> scores;
  const double avg = index.avg_len() > 0 ? index.avg_len() : 1.0;
  for (auto term : distinct) {
    auto it = index.postings().find(term);
    if (it == index.postings().end()) continue;
    const double idf = bm25_idf(index.size(), it->second.size());
    for (const auto& p : it->second) {
      const double tf = p.tf;
      const double len = static_cast<double>(index.doc_len().at(p.doc_id));
      scores[p.doc_id] += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * len / avg));
    }
  }
  std::vector<SearchHit> hits;
  for (const auto& [id, s] : scores) {
    if (s > 0.0) hits.push_back({id, s});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  nlohmann::ordered_json header;
  header["type"] = "header";
  header["version"] = 1;
  header["n_docs"] = doc_len_.size();
  header["avg_len"] = avg_len_;
  out << header.dump() << '\n';
  for (const auto& [id, len] : doc_len_) {
    nlohmann::ordered_json d;
    d["type"] = "doc";
    d["doc_id"] = id;
    d["len"] = len;
    d["payload"] = javacorpus::render_tokens(payload_.at(id));
    out << d.dump() << '\n';
  }
  for (const auto& [term, list] : postings_) {
    nlohmann::ordered_json t;
    t["type"] = "term";
    t["term"] = term;
    auto& arr = t["postings"] = nlohmann::ordered_json::array();
    for (const auto& p : list) arr.push_back({p.doc_id, p.tf});
    out << t.dump() << '\n';
  }
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  InvertedIndex index;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        if (j.at("version").get<int>() != 1) throw FormatError("unsupported index version");
        index.avg_len_ = j.at("avg_len").get<double>();
        header = true;
      } else if (type == "doc") {
        const auto id = j.at("doc_id").get<DocId>();
        index.doc_len_[id] = j.at("len").get<std::size_t>();
        javacorpus::ApiSequence seq;
        for (const auto& tok : j.at("payload")) {
          auto call = javacorpus::ApiCall::parse(tok.get<std::string>());
          if (!call) throw FormatError("bad payload token");
          seq.push_back(*call);
        }
        index.payload_[id] = std::move(seq);
      } else if (type == "term") {
        auto& list = index.postings_[j.at("term").get<std::string>()];
        for (const auto& p : j.at("postings")) list.push_back({p.at(0).get<DocId>(), p.at(1).get<std::uint32_t>()});
      } else {
        throw FormatError("unknown record type " + type);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  }
  if (!header) throw FormatError(path.string() + ": missing header");
  return index;
}

}  // namespace apiseq::baselines
