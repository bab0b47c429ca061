#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ear/corpus.h"
#include "ear/expansion.h"
#include "ear/passage_reranker.h"
#include "ear/query_reranker.h"
#include "ear/ranked_list.h"
#include "ear/sparse_index.h"

namespace ear {

enum class StrategyKind { kBm25, kGreedy, kConcat, kOracle, kEarRI, kEarRD };

std::string_view to_string(StrategyKind k);
StrategyKind parse_strategy(std::string_view name);

struct PassageRerankStep {
  const PassageScorer* scorer = nullptr;
  size_t depth = 100;
};

struct StrategySpec {
  StrategyKind kind = StrategyKind::kBm25;
  size_t n_samples = 50;
  std::optional<size_t> cap_n;
  size_t k_retrieve = 100;
  // Sentinel used when the oracle labels candidates.
  int max_rank = 101;
  std::optional<PassageRerankStep> pr;
  // Generator tags retrieved separately and fused in this order. Empty means
  // the whole candidate set is treated as one generator.
  std::vector<GeneratorTag> fuse_order;

  void validate() const;
  // Run tag written to TREC files, e.g. "ear_rd+pr".
  std::string run_tag() const;
};

struct PipelineContext {
  const Index& index;
  const PassageStore& store;
  const RerankerBundle* models = nullptr;
  unsigned workers = 1;
};

// Wall-clock seconds accumulated per pipeline stage.
struct StageTimes {
  double expand = 0.0;
  double rerank = 0.0;
  double retrieval = 0.0;
};

// First n_samples raw candidates, deduplicated, then capped at cap_n.
CandidateSet prepare_candidates(const StrategySpec& spec, const CandidateSet& raw);

// Index of the candidate with the smallest rank label, earliest on ties.
size_t oracle_choice(const Index& index, const PassageStore& store, const QAExample& q, const CandidateSet& cs,
                     size_t k_retrieve, int max_rank);

// Runs one strategy for one question. `q.answers` may be empty unless the
// strategy is the oracle. `candidates` may be null for bm25. `extra_lists`
// are imported runs appended to the fusion after the generator lists.
RankedList run_strategy(const StrategySpec& spec, const PipelineContext& ctx, const QAExample& q,
                        const CandidateSet* candidates, std::span<const RankedList> extra_lists = {},
                        StageTimes* times = nullptr);

// Round-robin interleave in list order, skipping passages already emitted,
// until k entries or every list is exhausted. Scores are 1 / position.
RankedList fuse(std::span<const RankedList> lists, size_t k);

struct DatasetResult {
  Run run;
  std::vector<std::string> errors;  // "qid: message", in question order
};

// Every question in `qa` is run independently; per-question failures are
// collected and the run continues. `extra_runs` are fused after the
// generator lists for every question they contain.
DatasetResult run_dataset(const StrategySpec& spec, const PipelineContext& ctx, std::span<const QAExample> qa,
                          const ExpansionTable* expansions, std::span<const Run> extra_runs = {});

}  // namespace ear
