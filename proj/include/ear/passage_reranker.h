#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ear/corpus.h"
#include "ear/features.h"
#include "ear/ranked_list.h"
#include "ear/sparse_index.h"

namespace ear {

// (question, passage) features, none of which look at the answers.
//
//   0  bias                 constant 1
//   1  question_bm25        BM25 score of the passage for the bare question
//   2  question_coverage    share of distinct analyzed question terms in the passage
//   3  idf_coverage         idf-weighted version of question_coverage
//   4  log_length           ln(1 + analyzed passage length)
//
// The score a passage carries in the list being reranked is deliberately not
// a feature: lists produced from expanded queries score on a different scale
// from the bare-question lists the scorer is trained on.
inline constexpr std::string_view kPassageSchema = "ear-pr-v1";
inline constexpr size_t kPassageDim = 5;

FeatureVector passage_features(const Index& index, const PassageStore& store, std::string_view question,
                               std::string_view pid);

// Logistic model: P(answer | q, p) = sigmoid(w . ((f - shift) * scale)).
// Training standardizes every non-bias feature.
struct PassageScorer {
  std::vector<double> shift = std::vector<double>(kPassageDim, 0.0);
  std::vector<double> scale = std::vector<double>(kPassageDim, 1.0);
  std::vector<double> weights = std::vector<double>(kPassageDim, 0.0);
  bool trained = false;

  double logit(const FeatureVector& f) const;
  double probability(const FeatureVector& f) const;
  void validate() const;

  std::string to_json() const;
  static PassageScorer from_json(const std::string& text);
  void save(const std::string& path) const;
  static PassageScorer load(const std::string& path);

  friend bool operator==(const PassageScorer&, const PassageScorer&) = default;
};

struct PRTrainConfig {
  size_t train_depth = 10;
  size_t epochs = 3;
  size_t batch_size = 32;
  double learning_rate = 0.2;
  uint64_t seed = 0;

  void validate() const;
};

struct PRTrainStats {
  size_t instances = 0;
  size_t positives = 0;
  double train_accuracy = 0.0;
  std::vector<std::string> warnings;
};

// Instances are the top-`train_depth` BM25 passages of every training
// question, positive iff the passage contains an answer. Binary
// cross-entropy, mini-batch Adam, deterministic per seed.
PassageScorer train_passage_reranker(const Index& index, const PassageStore& store,
                                     std::span<const QAExample> qa_train, const PRTrainConfig& cfg,
                                     PRTrainStats* stats = nullptr);

// Lower-level entry point over prebuilt instances.
PassageScorer fit_passage_scorer(std::span<const FeatureVector> features, std::span<const int> labels,
                                 const PRTrainConfig& cfg, double* train_accuracy = nullptr);

// Reorders the first `depth` entries (clamped to the list length) by
// descending probability, ties by original rank; the tail keeps its order.
// The reordered block is rescored above the tail so scores stay
// non-increasing.
RankedList rerank_passages(const PassageScorer& ps, const Index& index, const PassageStore& store,
                           std::string_view question, const RankedList& rl, size_t depth);

}  // namespace ear
