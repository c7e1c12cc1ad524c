#include "apiseq/javacorpus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "apiseq/error.hpp"
#include "apiseq/javacorpus/extract.hpp"
#include "apiseq/javacorpus/parser.hpp"
#include "apiseq/random.hpp"
#include "json.hpp"

namespace apiseq::javacorpus {

std::optional<ApiCall> ApiCall::parse(std::string_view text) {
  const auto dot = text.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == text.size()) return std::nullopt;
  if (text.find('.', dot + 1) != std::string_view::npos) return std::nullopt;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) return std::nullopt;
  }
  return ApiCall{std::string(text.substr(0, dot)), std::string(text.substr(dot + 1))};
}

std::string render(const ApiSequence& seq) {
  std::string out;
  for (const auto& call : seq) {
    if (!out.empty()) out += ' ';
    out += call.render();
  }
  return out;
}

std::vector<std::string> render_tokens(const ApiSequence& seq) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (const auto& call : seq) out.push_back(call.render());
  return out;
}

std::string Annotation::normalized() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::vector<std::string> annotation_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

namespace {

std::string strip_gutters(std::string_view doc) {
  std::string joined;
  std::istringstream lines{std::string(doc)};
  std::string line;
  while (std::getline(lines, line)) {
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    while (i < line.size() && line[i] == '*') ++i;
    std::string rest = line.substr(i);
    auto first = rest.find_first_not_of(" \t\r");
    if (first != std::string::npos && rest[first] == '@') break;  // block tags run to the end
    joined += rest;
    joined += ' ';
  }
  return joined;
}

std::string replace_inline_tags(const std::string& text) {
  static const std::regex inline_tag(R"(\{@(\w+)\s*([^}]*)\})");
  std::string out;
  auto begin = std::sregex_iterator(text.begin(), text.end(), inline_tag);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out += text.substr(last, static_cast<std::size_t>(m.position()) - last);
    std::string body = m[2].str();
    if (m[1] == "link" || m[1] == "linkplain") {
      // {@link Target label} renders the label when present.
      auto space = body.find_first_of(" \t");
      if (space != std::string::npos) body = body.substr(space + 1);
    } else if (m[1] == "inheritDoc") {
      body.clear();
    }
    out += body;
    last = static_cast<std::size_t>(m.position() + m.length());
  }
  out += text.substr(last);
  return out;
}

std::string strip_html(const std::string& text) {
  static const std::regex tag(R"(<[^>]*>)");
  std::string out = std::regex_replace(text, tag, "");
  static const std::pair<const char*, const char*> kEntities[] = {
      {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&nbsp;", " "}, {"&amp;", "&"}};
  for (const auto& [from, to] : kEntities) {
    std::size_t pos = 0;
    const std::string f = from;
    while ((pos = out.find(f, pos)) != std::string::npos) {
      out.replace(pos, f.size(), to);
      pos += std::char_traits<char>::length(to);
    }
  }
  return out;
}

std::string collapse_space(const std::string& text) {
  std::string out;
  bool space = false;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = !out.empty();
    } else {
      if (space) out += ' ';
      space = false;
      out += ch;
    }
  }
  return out;
}

std::string first_sentence(const std::string& text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      return text.substr(0, i + 1);
    }
  }
  return text;
}

}  // namespace

std::optional<Annotation> extract_annotation(std::string_view doc_comment) {
  std::string text = strip_gutters(doc_comment);
  text = replace_inline_tags(text);
  text = strip_html(text);
  text = first_sentence(collapse_space(text));
  auto tokens = annotation_tokens(text);
  if (tokens.empty()) return std::nullopt;
  return Annotation{std::move(text), std::move(tokens)};
}

Corpus extract_pairs(std::string_view source, const std::string& file_id, CorpusStats* stats) {
  const auto unit = parse_compilation_unit(source);
  Corpus pairs;
  std::map<std::string, int> seen;
  for (const auto& cls : unit.classes) {
    for (const auto& method : cls.methods) {
      if (!method.has_body) continue;
      if (stats) ++stats->methods;
      if (!method.doc_comment) continue;
      auto annotation = extract_annotation(*method.doc_comment);
      if (!annotation) continue;
      if (stats) ++stats->documented;
      std::vector<UnresolvedReceiver> warnings;
      auto seq = extract_api_sequence(method, &warnings);
      if (stats) stats->unresolved_calls += warnings.size();
      if (seq.empty()) {
        if (stats) ++stats->empty_sequences;
        continue;
      }
      std::string id = file_id + "#" + (cls.name.empty() ? "" : cls.name + ".") + method.name;
      if (const int n = ++seen[id]; n > 1) id += "#" + std::to_string(n);
      pairs.push_back({std::move(*annotation), std::move(seq), std::move(id)});
    }
  }
  return pairs;
}

Corpus build_corpus(const std::filesystem::path& root, CorpusStats* stats) {
  namespace fs = std::filesystem;
  CorpusStats local;
  CorpusStats& st = stats ? *stats : local;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("not a readable directory: " + root.string());

  std::vector<std::string> files;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::end(it);
       it.increment(ec)) {
    if (it->is_regular_file(ec) && it->path().extension() == ".java") {
      files.push_back(fs::relative(it->path(), root).generic_string());
    }
  }
  std::sort(files.begin(), files.end());

  Corpus corpus;
  for (const auto& rel : files) {
    ++st.files;
    std::ifstream in(root / rel, std::ios::binary);
    std::stringstream buf;
    if (!in || !(buf << in.rdbuf())) {
      ++st.skipped_files;
      st.log.push_back(rel + ": unreadable");
      continue;
    }
    try {
      auto pairs = extract_pairs(buf.str(), rel, &st);
      for (auto& p : pairs) corpus.push_back(std::move(p));
    } catch (const SyntaxError& e) {
      ++st.skipped_files;
      st.log.push_back(rel + ": " + e.what());
    }
  }
  st.pairs = corpus.size();
  if (corpus.empty()) throw EmptyCorpus("no <API sequence, annotation> pairs under " + root.string());
  return corpus;
}

CorpusSplit split_corpus(const Corpus& pairs, std::uint64_t seed, std::size_t test_count,
                         double valid_fraction) {
  if (test_count >= pairs.size()) {
    throw TooFewPairs("test_count " + std::to_string(test_count) + " needs more than " +
                      std::to_string(pairs.size()) + " pairs");
  }
  if (!(valid_fraction >= 0.0 && valid_fraction < 1.0)) {
    throw TooFewPairs("valid_fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const std::size_t rest = pairs.size() - test_count;
  const auto valid_count = static_cast<std::size_t>(std::llround(valid_fraction * static_cast<double>(rest)));
  CorpusSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& p = pairs[order[i]];
    if (i < test_count) {
      split.test.push_back(p);
    } else if (i < test_count + valid_count) {
      split.valid.push_back(p);
    } else {
      split.train.push_back(p);
    }
  }
  return split;
}

std::string to_jsonl_line(const AnnotatedPair& pair) {
  nlohmann::ordered_json j;
  j["source_id"] = pair.source_id;
  j["annotation"] = pair.annotation.text;
  j["api_seq"] = render_tokens(pair.sequence);
  return j.dump();
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& p : corpus) out << to_jsonl_line(p) << '\n';
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": not a JSON object");
    }
    AnnotatedPair p;
    p.source_id = j.at("source_id").get<std::string>();
    p.annotation.text = j.at("annotation").get<std::string>();
    p.annotation.tokens = annotation_tokens(p.annotation.text);
    for (const auto& tok : j.at("api_seq")) {
      auto call = ApiCall::parse(tok.get<std::string>());
      if (!call) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad API call");
      p.sequence.push_back(std::move(*call));
    }
    corpus.push_back(std::move(p));
  }
  return corpus;
}

}  // namespace apiseq::javacorpus
