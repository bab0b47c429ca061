#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ear/corpus.h"
#include "ear/expansion.h"
#include "ear/pipeline.h"
#include "ear/ranked_list.h"

namespace ear {

// 1-based rank of the first answer-containing entry.
std::optional<size_t> min_answer_rank(const RankedList& rl, std::span<const std::string> answers,
                                      const PassageStore& store);

inline const std::vector<size_t> kDefaultKs = {1, 5, 20, 100};

struct AccuracyReport {
  std::string tag;
  size_t questions = 0;
  std::vector<size_t> ks;
  std::map<size_t, double> accuracy;

  double at(size_t k) const { return accuracy.at(k); }
  // Throws std::logic_error if accuracy decreases in k or leaves [0, 1].
  void check() const;

  std::string to_text() const;
  std::string to_json() const;
};

// Fraction of questions in `qa` whose run has an answer within the top k.
// Questions without a run count as misses. A run qid missing from `qa` is
// an error.
AccuracyReport topk_accuracy(const Run& run, std::span<const QAExample> qa, const PassageStore& store,
                             std::vector<size_t> ks = kDefaultKs, std::string tag = {});

struct AblationRow {
  size_t n = 0;
  AccuracyReport report;
};

// One evaluation per cap N. Ns must be ascending; the candidate prefix for a
// smaller N is always a prefix of the one for a larger N.
std::vector<AblationRow> ablate_candidate_size(const StrategySpec& spec, const PipelineContext& ctx,
                                               std::span<const QAExample> qa, const ExpansionTable& expansions,
                                               std::span<const size_t> ns, std::vector<size_t> ks = kDefaultKs);

std::string ablation_csv(std::span<const AblationRow> rows);
std::string accuracy_csv(std::span<const AccuracyReport> reports);

}  // namespace ear
