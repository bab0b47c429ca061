#include "ear/bench.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>

#include <json.hpp>

namespace ear {

LatencyReport bench_latency(const StrategySpec& spec, const PassageStore& store, const Bm25Params& params,
                            const RerankerBundle* models, std::span<const QAExample> queries,
                            const ExpansionTable* expansions, size_t repetitions, const std::string& index_path) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  LatencyReport report;
  report.strategy = spec.run_tag();
  report.queries = queries.size();
  report.repetitions = repetitions;

  std::optional<Index> index;
  for (size_t rep = 0; rep < repetitions; ++rep) {
    auto start = std::chrono::steady_clock::now();
    index = Index::build(store, params);
    index->save(index_path);
    report.index_build += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  report.index_build /= static_cast<double>(repetitions);
  report.index_bytes = std::filesystem::file_size(index_path);

  PipelineContext ctx{*index, store, models, 1};
  StageTimes times;
  for (size_t rep = 0; rep < repetitions; ++rep) {
    for (const auto& q : queries) {
      const CandidateSet* cs = nullptr;
      if (expansions) {
        auto it = expansions->find(q.qid);
        if (it != expansions->end()) cs = &it->second;
      }
      run_strategy(spec, ctx, q, cs, {}, &times);
    }
  }
  const double runs = static_cast<double>(repetitions * std::max<size_t>(queries.size(), 1));
  report.query_expand = times.expand / runs;
  report.query_rerank = times.rerank / runs;
  report.retrieval = times.retrieval / runs;
  return report;
}

std::string LatencyReport::to_text() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "strategy        %s\n"
                "queries         %zu x %zu\n"
                "build index     %.4f s\n"
                "query expand    %.6f s/query\n"
                "query rerank    %.6f s/query\n"
                "retrieval       %.6f s/query\n"
                "index size      %llu bytes\n",
                strategy.c_str(), queries, repetitions, index_build, query_expand, query_rerank, retrieval,
                static_cast<unsigned long long>(index_bytes));
  return buf;
}

std::string LatencyReport::to_json() const {
  return nlohmann::json{{"strategy", strategy},
                        {"queries", queries},
                        {"repetitions", repetitions},
                        {"index_build_seconds", index_build},
                        {"query_expand_seconds", query_expand},
                        {"query_rerank_seconds", query_rerank},
                        {"retrieval_seconds", retrieval},
                        {"index_bytes", index_bytes}}
      .dump(2);
}

}  // namespace ear
