#pragma once

#include <span>
#include <string>

#include "ear/corpus.h"
#include "ear/expansion.h"
#include "ear/pipeline.h"

namespace ear {

// Mean wall-clock seconds per stage. Stages a strategy does not have are
// reported as exactly 0.
struct LatencyReport {
  std::string strategy;
  double index_build = 0.0;   // whole index, per build
  double query_expand = 0.0;  // per query
  double query_rerank = 0.0;  // per query
  double retrieval = 0.0;     // per query
  uint64_t index_bytes = 0;
  size_t queries = 0;
  size_t repetitions = 0;

  std::string to_text() const;
  std::string to_json() const;
};

// Builds and persists the index `repetitions` times, then runs every query
// one at a time (batch size 1, single worker) `repetitions` times. Model and
// index loading are outside the timed region.
LatencyReport bench_latency(const StrategySpec& spec, const PassageStore& store, const Bm25Params& params,
                            const RerankerBundle* models, std::span<const QAExample> queries,
                            const ExpansionTable* expansions, size_t repetitions, const std::string& index_path);

}  // namespace ear
