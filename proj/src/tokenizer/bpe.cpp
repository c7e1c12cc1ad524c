#include "apiseq/tokenizer/bpe.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "apiseq/error.hpp"
#include "apiseq/random.hpp"

namespace apiseq::tokenizer {

namespace {

constexpr std::string_view kSpecialNames[kNumSpecials] = {"<pad>", "<s>", "</s>", "<unk>", "<mask>"};

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view special_token(int id) {
  if (id < 0 || id >= kNumSpecials) throw UnknownId("not a special id: " + std::to_string(id));
  return kSpecialNames[id];
}

std::vector<std::string> code_points(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t n = utf8_length(static_cast<unsigned char>(text[i]));
    if (i + n > text.size()) n = 1;
    for (std::size_t k = 1; k < n; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        n = 1;
        break;
      }
    }
    out.emplace_back(text.substr(i, n));
    i += n;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

SubwordVocab::SubwordVocab(std::vector<std::string> alphabet, std::vector<Merge> merges)
    : merges_(std::move(merges)) {
  for (int i = 0; i < kNumSpecials; ++i) id_to_token_.emplace_back(kSpecialNames[i]);
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  auto add = [this](const std::string& tok) {
    if (token_to_id_.count(tok)) return;
    token_to_id_.emplace(tok, static_cast<int>(id_to_token_.size()));
    id_to_token_.push_back(tok);
  };
  for (const auto& a : alphabet) add(a);
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    merge_rank_.emplace(merges_[r], static_cast<int>(r));
    add(merges_[r].first + merges_[r].second);
  }
}

int SubwordVocab::id(std::string_view token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? -1 : it->second;
}

const std::string& SubwordVocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw UnknownId("id " + std::to_string(id) + " outside vocabulary of " +
                    std::to_string(id_to_token_.size()));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<std::string> SubwordVocab::split_word(std::string_view word) const {
  std::vector<std::string> sym = code_points(std::string(kWordMarker) + std::string(word));
  while (sym.size() > 1) {
    int best = std::numeric_limits<int>::max();
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
      auto it = merge_rank_.find(Merge{sym[i], sym[i + 1]});
      if (it != merge_rank_.end() && it->second < best) {
        best = it->second;
        at = i;
      }
    }
    if (best == std::numeric_limits<int>::max()) break;
    const Merge& m = merges_[static_cast<std::size_t>(best)];
    std::vector<std::string> next;
    next.reserve(sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) {
      if (i >= at && i + 1 < sym.size() && sym[i] == m.first && sym[i + 1] == m.second) {
        next.push_back(sym[i] + sym[i + 1]);
        ++i;
      } else {
        next.push_back(std::move(sym[i]));
      }
    }
    sym = std::move(next);
  }
  return sym;
}

std::vector<int> SubwordVocab::encode_word(std::string_view word) const {
  std::vector<int> ids;
  for (const auto& piece : split_word(word)) {
    const int i = id(piece);
    ids.push_back(i < 0 ? kUnk : i);
  }
  return ids;
}

std::string SubwordVocab::serialize() const {
  const std::size_t alphabet = id_to_token_.size() - kNumSpecials -
                               static_cast<std::size_t>(std::count_if(
                                   id_to_token_.begin() + kNumSpecials, id_to_token_.end(),
                                   [&](const std::string& t) { return code_points(t).size() > 1; }));
  std::ostringstream out;
  out << "apiseq-vocab 1 " << id_to_token_.size() << ' ' << alphabet << ' ' << merges_.size()
      << '\n';
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) out << id_to_token_[i] << '\t' << i << '\n';
  for (const auto& [a, b] : merges_) out << a << '\t' << b << '\n';
  return out.str();
}

std::uint64_t SubwordVocab::fingerprint() const { return fnv1a64(serialize()); }

void SubwordVocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize();
}

SubwordVocab SubwordVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  std::string magic;
  int version = 0;
  std::size_t n_tokens = 0, n_alphabet = 0, n_merges = 0;
  if (!(header >> magic >> version >> n_tokens >> n_alphabet >> n_merges) ||
      magic != "apiseq-vocab" || version != 1 || n_tokens < kNumSpecials + n_alphabet) {
    throw FormatError(path.string() + ": bad vocabulary header");
  }
  auto split_tab = [&](const std::string& l) {
    const auto tab = l.find('\t');
    if (tab == std::string::npos) throw FormatError(path.string() + ": missing tab in '" + l + "'");
    return std::pair{l.substr(0, tab), l.substr(tab + 1)};
  };
  std::vector<std::string> table;
  for (std::size_t i = 0; i < n_tokens; ++i) {
    if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated token table");
    auto [tok, id] = split_tab(line);
    if (id != std::to_string(i)) throw FormatError(path.string() + ": ids must be dense");
    table.push_back(std::move(tok));
  }
  std::vector<Merge> merges;
  for (std::size_t i = 0; i < n_merges; ++i) {
    if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated merge list");
    merges.push_back(split_tab(line));
  }
  std::vector<std::string> alphabet(table.begin() + kNumSpecials,
                                    table.begin() + static_cast<std::ptrdiff_t>(kNumSpecials + n_alphabet));
  SubwordVocab vocab(std::move(alphabet), std::move(merges));
  if (vocab.id_to_token_ != table) throw FormatError(path.string() + ": token table disagrees with merges");
  return vocab;
}

SubwordVocab train_bpe(const std::vector<std::string>& corpus_texts, std::size_t vocab_size,
                       std::size_t min_pair_count) {
  // Symbols are interned so that pair counting works on integers.
  std::vector<std::string> names;
  std::unordered_map<std::string, int> interned;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = interned.emplace(s, static_cast<int>(names.size()));
    if (inserted) names.push_back(s);
    return it->second;
  };

  std::map<std::string, std::size_t> word_freq;
  for (const auto& text : corpus_texts) {
    for (const auto& w : split_words(text)) ++word_freq[std::string(kWordMarker) + w];
  }
  if (word_freq.empty()) throw VocabTooSmall("empty training corpus: no merges can be learned");

  std::vector<std::vector<int>> words;
  std::vector<std::size_t> freq;
  std::set<std::string> alphabet;
  for (const auto& [w, f] : word_freq) {
    std::vector<int> syms;
    for (auto& cp : code_points(w)) {
      alphabet.insert(cp);
      syms.push_back(intern(cp));
    }
    words.push_back(std::move(syms));
    freq.push_back(f);
  }
  if (vocab_size <= alphabet.size() + kNumSpecials) {
    throw VocabTooSmall("vocab_size " + std::to_string(vocab_size) + " must exceed alphabet (" +
                        std::to_string(alphabet.size()) + ") plus specials (" +
                        std::to_string(kNumSpecials) + ")");
  }

  std::set<std::string> known(alphabet.begin(), alphabet.end());
  std::size_t size = kNumSpecials + alphabet.size();
  std::vector<SubwordVocab::Merge> merges;
  auto key = [](int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };

  while (size < vocab_size) {
    std::unordered_map<std::uint64_t, std::size_t> counts;
    for (std::size_t w = 0; w < words.size(); ++w) {
      const auto& s = words[w];
      for (std::size_t i = 0; i + 1 < s.size(); ++i) counts[key(s[i], s[i + 1])] += freq[w];
    }
    std::size_t best_count = 0;
    int best_a = -1, best_b = -1;
    for (const auto& [k, c] : counts) {
      const int a = static_cast<int>(k >> 32), b = static_cast<int>(k & 0xffffffffu);
      if (c > best_count ||
          (c == best_count && std::tie(names[a], names[b]) < std::tie(names[best_a], names[best_b]))) {
        best_count = c;
        best_a = a;
        best_b = b;
      }
    }
    if (best_count == 0 || best_count < min_pair_count) break;

    const std::string merged = names[best_a] + names[best_b];
    const int merged_id = intern(merged);
    merges.emplace_back(names[best_a], names[best_b]);
    if (known.insert(merged).second) ++size;
    for (auto& s : words) {
      std::size_t out = 0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i] == best_a && s[i + 1] == best_b) {
          s[out++] = merged_id;
          ++i;
        } else {
          s[out++] = s[i];
        }
      }
      s.resize(out);
    }
  }
  return SubwordVocab(std::vector<std::string>(alphabet.begin(), alphabet.end()), std::move(merges));
}

}  // namespace apiseq::tokenizer
