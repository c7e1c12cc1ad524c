#include "apiseq/baselines/systems.hpp"

namespace apiseq::baselines {

std::vector<IndexedDoc> search_documents(const javacorpus::Corpus& train) {
  std::vector<IndexedDoc> docs;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& p = train[i];
    docs.push_back({static_cast<DocId>(i),
                    preprocess_code_doc(p.annotation.text + " " + javacorpus::render(p.sequence)),
                    p.sequence});
  }
  return docs;
}

std::vector<IndexedDoc> api_documents(const javacorpus::Corpus& train) {
  std::vector<IndexedDoc> docs;
  for (std::size_t i = 0; i < train.size(); ++i) {
    docs.push_back({static_cast<DocId>(i), javacorpus::render_tokens(train[i].sequence), train[i].sequence});
  }
  return docs;
}

SearchMinerRecommender::SearchMinerRecommender(const javacorpus::Corpus& train, MinerParams params)
    : index_(build_index(search_documents(train))), params_(params) {}

SearchMinerRecommender::SearchMinerRecommender(InvertedIndex index, MinerParams params)
    : index_(std::move(index)), params_(params) {}

javacorpus::ApiSequence SearchMinerRecommender::recommend(std::string_view query) const {
  const auto hits = bm25_search(index_, preprocess_code_doc(query), params_.top_docs);
  if (hits.empty()) return {};
  std::vector<javacorpus::ApiSequence> retrieved;
  for (const auto& h : hits) retrieved.push_back(index_.payloads().at(h.doc_id));
  const auto patterns = mine_patterns(retrieved, params_.min_support, params_.max_len);
  const auto reps = cluster_patterns(patterns, params_.similarity_threshold);
  if (reps.empty()) return retrieved.front();
  return reps.front().subsequence;
}

SwimRecommender::SwimRecommender(const javacorpus::Corpus& train, std::size_t em_iterations)
    : table_(train_ibm1(train, em_iterations)), index_(build_index(api_documents(train))) {}

SwimRecommender::SwimRecommender(TranslationTable table, InvertedIndex api_index)
    : table_(std::move(table)), index_(std::move(api_index)) {}

javacorpus::ApiSequence SwimRecommender::recommend(std::string_view query) const {
  auto ranked = swim_rank(table_, index_, javacorpus::annotation_tokens(query), 1);
  return ranked.empty() ? javacorpus::ApiSequence{} : ranked.front();
}

}  // namespace apiseq::baselines
