#include "apiseq/javacorpus/synthetic.hpp"

#include <algorithm>
#include <set>

#include "apiseq/error.hpp"
#include "apiseq/random.hpp"

namespace apiseq::javacorpus {

namespace {

struct Word {
  const char* code;                    // camel-case part used in the API name
  std::vector<const char*> phrasings;  // natural-language renderings
};

const std::vector<Word> kAdjectives = {
    {"Buffered", {"buffered"}},          {"Compressed", {"compressed", "zipped"}},
    {"Secure", {"secure", "encrypted"}}, {"Remote", {"remote"}},
    {"Local", {"local"}},                {"Cached", {"cached"}},
    {"Sorted", {"sorted", "ordered"}},   {"Linked", {"linked"}},
    {"Concurrent", {"concurrent", "thread safe"}},
    {"Async", {"async", "asynchronous"}},
    {"Temp", {"temporary", "temp"}},     {"Shared", {"shared"}},
    {"Binary", {"binary"}},              {"Scheduled", {"scheduled", "timed"}},
    {"Virtual", {"virtual"}},            {"Pooled", {"pooled"}},
};

const std::vector<Word> kNouns = {
    {"Reader", {"reader"}},       {"Writer", {"writer"}},
    {"Stream", {"stream"}},       {"Socket", {"socket"}},
    {"Channel", {"channel"}},     {"Connection", {"connection"}},
    {"Parser", {"parser"}},       {"Formatter", {"formatter"}},
    {"Buffer", {"buffer"}},       {"Queue", {"queue"}},
    {"Cache", {"cache"}},         {"Client", {"client"}},
    {"Session", {"session"}},     {"Logger", {"logger", "log"}},
    {"Encoder", {"encoder"}},     {"Archive", {"archive"}},
    {"Registry", {"registry"}},   {"Table", {"table"}},
};

const std::vector<Word> kVerbs = {
    {"read", {"read", "load"}},       {"write", {"write", "store"}},
    {"open", {"open"}},               {"close", {"close", "release"}},
    {"flush", {"flush"}},             {"parse", {"parse"}},
    {"format", {"format"}},           {"append", {"append", "add"}},
    {"remove", {"remove", "delete"}}, {"clear", {"clear", "empty"}},
    {"send", {"send", "transmit"}},   {"receive", {"receive"}},
    {"encode", {"encode"}},           {"decode", {"decode"}},
    {"fetch", {"fetch", "retrieve"}}, {"update", {"update", "modify"}},
    {"validate", {"validate", "check"}},
    {"register", {"register"}},
};

const std::vector<Word> kObjects = {
    {"Line", {"line", "text line"}}, {"Bytes", {"bytes", "raw bytes"}},
    {"Header", {"header"}},          {"Entry", {"entry"}},
    {"Value", {"value"}},            {"Key", {"key"}},
    {"Token", {"token"}},            {"Record", {"record", "row"}},
    {"Message", {"message"}},        {"Chunk", {"chunk", "block"}},
    {"Field", {"field"}},            {"Request", {"request"}},
};

const std::vector<const char*> kCreate = {"create", "make", "construct", "build", "instantiate"};
const std::vector<const char*> kJoin = {"and", "then", "and then"};
const std::vector<const char*> kLead = {"", "", "", "how to", "code to", "helper to"};
const std::vector<const char*> kArticle = {"a", "the", "a new"};
const std::vector<const char*> kObjArticle = {"the", "a", "each"};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.below(v.size())];
}

struct SynthClass {
  std::size_t adjective;
  std::size_t noun;
  std::vector<std::pair<std::size_t, std::size_t>> methods;  // (verb, object)
};

std::vector<SynthClass> synth_classes(const SyntheticSpec& spec) {
  if (spec.methods_per_class < 2) throw TooFewPairs("synthetic classes need a constructor and a method");
  const std::size_t per_class = spec.methods_per_class;
  const std::size_t n_classes = (spec.api_names + per_class - 1) / per_class;
  if (n_classes == 0 || n_classes > kAdjectives.size() * kNouns.size()) {
    throw TooFewPairs("synthetic api_names out of range");
  }
  if (per_class - 1 > kVerbs.size() * kObjects.size()) throw TooFewPairs("too many methods per class");
  Rng rng(derive_seed(spec.seed, "synthetic-apis"));
  std::vector<std::pair<std::size_t, std::size_t>> names;
  for (std::size_t a = 0; a < kAdjectives.size(); ++a) {
    for (std::size_t n = 0; n < kNouns.size(); ++n) names.emplace_back(a, n);
  }
  rng.shuffle(names.begin(), names.end());
  names.resize(n_classes);
  std::sort(names.begin(), names.end());

  std::vector<SynthClass> classes;
  for (const auto& [a, n] : names) {
    SynthClass c{a, n, {}};
    std::set<std::pair<std::size_t, std::size_t>> seen;
    while (c.methods.size() < per_class - 1) {
      const std::pair<std::size_t, std::size_t> m{rng.below(kVerbs.size()), rng.below(kObjects.size())};
      if (seen.insert(m).second) c.methods.push_back(m);
    }
    classes.push_back(std::move(c));
  }
  return classes;
}

std::string class_name(const SynthClass& c) {
  return std::string(kAdjectives[c.adjective].code) + kNouns[c.noun].code;
}

std::string method_name(std::pair<std::size_t, std::size_t> m) {
  return std::string(kVerbs[m.first].code) + kObjects[m.second].code;
}

}  // namespace

std::vector<ApiCall> synthetic_apis(const SyntheticSpec& spec) {
  std::vector<ApiCall> out;
  for (const auto& c : synth_classes(spec)) {
    out.push_back({class_name(c), "new"});
    for (const auto& m : c.methods) out.push_back({class_name(c), method_name(m)});
  }
  return out;
}

Corpus synthetic_corpus(const SyntheticSpec& spec) {
  const auto classes = synth_classes(spec);
  if (spec.max_actions == 0) throw TooFewPairs("max_actions must be at least 1");
  Rng rng(derive_seed(spec.seed, "synthetic-pairs"));
  Corpus out;
  out.reserve(spec.pairs);
  for (std::size_t i = 0; i < spec.pairs; ++i) {
    const SynthClass& c = classes[rng.below(classes.size())];
    const std::string name = class_name(c);
    const std::size_t actions = 1 + rng.below(std::min(spec.max_actions, c.methods.size()));
    std::vector<std::size_t> order(c.methods.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    rng.shuffle(order.begin(), order.end());

    AnnotatedPair p;
    p.sequence.push_back({name, "new"});
    std::string text = pick(rng, kLead);
    auto say = [&text](const std::string& w) {
      if (!text.empty()) text += ' ';
      text += w;
    };
    say(pick(rng, kCreate));
    say(pick(rng, kArticle));
    say(pick(rng, kAdjectives[c.adjective].phrasings));
    say(pick(rng, kNouns[c.noun].phrasings));
    for (std::size_t k = 0; k < actions; ++k) {
      const auto m = c.methods[order[k]];
      p.sequence.push_back({name, method_name(m)});
      say(pick(rng, kJoin));
      say(pick(rng, kVerbs[m.first].phrasings));
      say(pick(rng, kObjArticle));
      say(pick(rng, kObjects[m.second].phrasings));
    }
    p.annotation.text = text;
    p.annotation.tokens = annotation_tokens(text);
    p.source_id = "synthetic#" + std::to_string(i);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace apiseq::javacorpus
