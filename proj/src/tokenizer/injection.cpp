#include "apiseq/tokenizer/injection.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "apiseq/error.hpp"
#include "apiseq/random.hpp"
#include "json.hpp"

namespace apiseq::tokenizer {

std::string_view to_string(InjectionStrategy s) {
  switch (s) {
    case InjectionStrategy::kDefault: return "default";
    case InjectionStrategy::kTa1: return "ta1";
    case InjectionStrategy::kTa2: return "ta2";
  }
  return "default";
}

std::optional<InjectionStrategy> parse_strategy(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "default") return InjectionStrategy::kDefault;
  if (lower == "ta1") return InjectionStrategy::kTa1;
  if (lower == "ta2") return InjectionStrategy::kTa2;
  return std::nullopt;
}

InjectionPlan::InjectionPlan(InjectionStrategy strategy, std::size_t base_size,
                             std::vector<PlanEntry> entries)
    : strategy_(strategy), base_size_(base_size), entries_(std::move(entries)) {
  if (strategy_ == InjectionStrategy::kDefault && !entries_.empty()) {
    throw FormatError("a DEFAULT plan has no entries");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    if (e.token_id != static_cast<int>(base_size_ + i)) {
      throw FormatError("plan entry '" + e.api + "' has id " + std::to_string(e.token_id) +
                        ", expected " + std::to_string(base_size_ + i));
    }
    const bool mean = e.init == PlanEntry::Init::kMeanOfSlices;
    if (mean != (strategy_ == InjectionStrategy::kTa1)) {
      throw FormatError("plan entry '" + e.api + "' has the wrong init kind for " +
                        std::string(to_string(strategy_)));
    }
    if (mean) {
      if (e.slices.empty()) throw FormatError("plan entry '" + e.api + "' has no slices");
      for (int s : e.slices) {
        if (s < 0 || static_cast<std::size_t>(s) >= base_size_) {
          throw UnknownId("slice id " + std::to_string(s) + " of '" + e.api + "' is not a base id");
        }
      }
    }
    if (!by_name_.emplace(e.api, static_cast<int>(i)).second) {
      throw DuplicateName("API name injected twice: " + e.api);
    }
  }
}

int InjectionPlan::lookup(std::string_view word) const {
  auto it = by_name_.find(word);
  return it == by_name_.end() ? -1 : entries_[static_cast<std::size_t>(it->second)].token_id;
}

const PlanEntry* InjectionPlan::entry_for_id(int id) const {
  if (id < static_cast<int>(base_size_)) return nullptr;
  const auto i = static_cast<std::size_t>(id) - base_size_;
  return i < entries_.size() ? &entries_[i] : nullptr;
}

namespace {

nlohmann::ordered_json entry_json(const PlanEntry& e) {
  nlohmann::ordered_json j;
  j["api"] = e.api;
  j["token_id"] = e.token_id;
  const bool mean = e.init == PlanEntry::Init::kMeanOfSlices;
  j["init"] = mean ? "mean" : "fresh";
  j["slices"] = e.slices;
  j["seed"] = e.seed;
  return j;
}

}  // namespace

std::uint64_t InjectionPlan::fingerprint() const {
  std::uint64_t h = fnv1a64(to_string(strategy_));
  h = fnv1a64(std::to_string(base_size_), h);
  for (const auto& e : entries_) h = fnv1a64(entry_json(e).dump() + "\n", h);
  return h;
}

void InjectionPlan::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& e : entries_) out << entry_json(e).dump() << '\n';
}

InjectionPlan InjectionPlan::load(const std::filesystem::path& path, InjectionStrategy strategy,
                                  std::size_t base_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<PlanEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw FormatError(path.string() + ": bad plan line");
    try {
      PlanEntry e;
      e.api = j.at("api").get<std::string>();
      e.token_id = j.at("token_id").get<int>();
      const auto init = j.at("init").get<std::string>();
      if (init != "mean" && init != "fresh") throw FormatError(path.string() + ": bad init " + init);
      e.init = init == "mean" ? PlanEntry::Init::kMeanOfSlices : PlanEntry::Init::kFreshRandom;
      e.slices = j.value("slices", std::vector<int>{});
      e.seed = j.value("seed", std::uint64_t{0});
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(path.string() + ": " + ex.what());
    }
  }
  return InjectionPlan(strategy, base_size, std::move(entries));
}

InjectionPlan build_injection(const std::vector<std::string>& api_names, const SubwordVocab& vocab,
                              InjectionStrategy strategy, std::uint64_t global_seed) {
  std::set<std::string_view> seen;
  for (const auto& name : api_names) {
    if (!seen.insert(name).second) throw DuplicateName("API name listed twice: " + name);
  }
  if (strategy == InjectionStrategy::kDefault) return InjectionPlan(strategy, vocab.size(), {});

  std::vector<PlanEntry> entries;
  entries.reserve(api_names.size());
  for (const auto& name : api_names) {
    PlanEntry e;
    e.api = name;
    e.token_id = static_cast<int>(vocab.size() + entries.size());
    if (strategy == InjectionStrategy::kTa1) {
      e.init = PlanEntry::Init::kMeanOfSlices;
      e.slices = vocab.encode_word(name);
    } else {
      e.init = PlanEntry::Init::kFreshRandom;
      e.seed = derive_seed(global_seed, name);
    }
    entries.push_back(std::move(e));
  }
  return InjectionPlan(strategy, vocab.size(), std::move(entries));
}

Matrix initial_embedding(const InjectionPlan& plan, const Matrix& base_embeddings) {
  if (static_cast<std::size_t>(base_embeddings.rows()) != plan.base_size()) {
    throw DimensionMismatch("base embedding has " + std::to_string(base_embeddings.rows()) +
                            " rows, vocabulary has " + std::to_string(plan.base_size()));
  }
  const auto dim = base_embeddings.cols();
  Matrix out(static_cast<Eigen::Index>(plan.extended_size()), dim);
  out.topRows(base_embeddings.rows()) = base_embeddings;
  for (const auto& e : plan.entries()) {
    auto row = out.row(e.token_id);
    if (e.init == PlanEntry::Init::kMeanOfSlices) {
      row.setZero();
      for (int s : e.slices) row += base_embeddings.row(s);
      row /= static_cast<double>(e.slices.size());
    } else {
      Rng rng(e.seed);
      for (Eigen::Index c = 0; c < dim; ++c) row(c) = rng.normal(0.0, kFreshInitStddev);
    }
  }
  return out;
}

std::vector<int> tokenize(std::string_view text, const SubwordVocab& vocab,
                          const InjectionPlan& plan, bool add_bos_eos) {
  std::vector<int> ids;
  if (add_bos_eos) ids.push_back(kBos);
  for (const auto& word : split_words(text)) {
    if (const int injected = plan.lookup(word); injected >= 0) {
      ids.push_back(injected);
      continue;
    }
    for (int id : vocab.encode_word(word)) ids.push_back(id);
  }
  if (add_bos_eos) ids.push_back(kEos);
  return ids;
}

std::string detokenize(const std::vector<int>& ids, const SubwordVocab& vocab,
                       const InjectionPlan& plan) {
  std::string raw;
  for (int id : ids) {
    if (const PlanEntry* e = plan.entry_for_id(id)) {
      raw += ' ';
      raw += e->api;
      continue;
    }
    if (id == kPad || id == kBos || id == kEos) continue;
    raw += vocab.token(id);  // throws UnknownId past the base table
  }
  std::string out;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw.compare(i, kWordMarker.size(), kWordMarker) == 0) {
      out += ' ';
      i += kWordMarker.size();
    } else {
      out += raw[i++];
    }
  }
  std::string normalized;
  for (const auto& w : split_words(out)) {
    if (!normalized.empty()) normalized += ' ';
    normalized += w;
  }
  return normalized;
}

}  // namespace apiseq::tokenizer
