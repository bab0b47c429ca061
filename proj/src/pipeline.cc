#include "ear/pipeline.h"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace ear {

namespace {

using Clock = std::chrono::steady_clock;

class ScopedStage {
 public:
  explicit ScopedStage(double* sink) : sink_(sink), start_(Clock::now()) {}
  ~ScopedStage() {
    if (sink_) *sink_ += std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  double* sink_;
  Clock::time_point start_;
};

double* stage(StageTimes* t, double StageTimes::*field) { return t ? &(t->*field) : nullptr; }

bool uses_candidates(StrategyKind k) { return k != StrategyKind::kBm25; }

}  // namespace

std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::kBm25: return "bm25";
    case StrategyKind::kGreedy: return "greedy";
    case StrategyKind::kConcat: return "concat";
    case StrategyKind::kOracle: return "oracle";
    case StrategyKind::kEarRI: return "ear_ri";
    case StrategyKind::kEarRD: return "ear_rd";
  }
  return "bm25";
}

StrategyKind parse_strategy(std::string_view name) {
  for (auto k : {StrategyKind::kBm25, StrategyKind::kGreedy, StrategyKind::kConcat, StrategyKind::kOracle,
                 StrategyKind::kEarRI, StrategyKind::kEarRD})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

void StrategySpec::validate() const {
  if (k_retrieve < 1) throw std::invalid_argument("k_retrieve must be at least 1");
  if (n_samples < 1) throw std::invalid_argument("n_samples must be at least 1");
  if (cap_n && (*cap_n < 1 || *cap_n > n_samples))
    throw std::invalid_argument("cap N must lie in [1, n_samples]");
  if (kind == StrategyKind::kOracle && max_rank <= static_cast<int>(k_retrieve))
    throw std::invalid_argument("MAX_RANK must exceed k_retrieve");
  if (pr && !pr->scorer) throw std::invalid_argument("passage rerank step without a scorer");
}

std::string StrategySpec::run_tag() const {
  std::string tag(to_string(kind));
  if (pr) tag += "+pr";
  return tag;
}

CandidateSet prepare_candidates(const StrategySpec& spec, const CandidateSet& raw) {
  CandidateSet cs = raw;
  if (cs.candidates.size() > spec.n_samples) cs.candidates.resize(spec.n_samples);
  cs.requested_n = spec.n_samples;
  cs = dedup(cs);
  if (spec.cap_n) cs = truncate(cs, *spec.cap_n);
  return cs;
}

size_t oracle_choice(const Index& index, const PassageStore& store, const QAExample& q, const CandidateSet& cs,
                     size_t k_retrieve, int max_rank) {
  ConstructionConfig cfg;
  cfg.k_retrieve = k_retrieve;
  cfg.max_rank = max_rank;
  auto labeled = label_candidates(index, store, q, cs, cfg);
  size_t best = 0;
  for (size_t i = 1; i < labeled.labels.size(); ++i)
    if (labeled.labels[i].rank < labeled.labels[best].rank) best = i;
  return best;
}

RankedList fuse(std::span<const RankedList> lists, size_t k) {
  if (k == 0) throw std::invalid_argument("fusion depth k must be at least 1");
  RankedList out;
  if (!lists.empty()) out.qid = lists.front().qid;
  out.tag = "fused";
  std::unordered_set<std::string> emitted;
  std::vector<size_t> cursor(lists.size(), 0);
  bool progressed = true;
  while (out.entries.size() < k && progressed) {
    progressed = false;
    for (size_t l = 0; l < lists.size() && out.entries.size() < k; ++l) {
      const auto& entries = lists[l].entries;
      // The donor advances past passages that were already emitted.
      while (cursor[l] < entries.size() && emitted.count(entries[cursor[l]].pid)) ++cursor[l];
      if (cursor[l] >= entries.size()) continue;
      const auto& pid = entries[cursor[l]++].pid;
      emitted.insert(pid);
      out.entries.push_back({pid, 1.0 / static_cast<double>(out.entries.size() + 1)});
      progressed = true;
    }
  }
  return out;
}

RankedList run_strategy(const StrategySpec& spec, const PipelineContext& ctx, const QAExample& q,
                        const CandidateSet* candidates, std::span<const RankedList> extra_lists,
                        StageTimes* times) {
  spec.validate();
  if (spec.kind == StrategyKind::kOracle && q.answers.empty())
    throw std::invalid_argument("oracle strategy needs answers for question " + q.qid);
  if ((spec.kind == StrategyKind::kEarRI || spec.kind == StrategyKind::kEarRD) && !ctx.models)
    throw std::invalid_argument("reranker strategy needs trained models");

  std::vector<RankedList> lists;
  std::vector<CandidateSet> groups;
  if (uses_candidates(spec.kind)) {
    ScopedStage s(stage(times, &StageTimes::expand));
    CandidateSet prepared = prepare_candidates(spec, candidates ? *candidates : CandidateSet{q.qid, {}, 0, {}});
    if (spec.fuse_order.empty()) {
      groups.push_back(std::move(prepared));
    } else {
      auto by_tag = split_by_tag(prepared);
      for (GeneratorTag tag : spec.fuse_order) {
        auto it = std::find_if(by_tag.begin(), by_tag.end(),
                               [&](const CandidateSet& g) { return g.candidates.front().tag == tag; });
        if (it != by_tag.end()) groups.push_back(*it);
      }
    }
  }

  auto retrieve = [&](const std::string& query) {
    ScopedStage s(stage(times, &StageTimes::retrieval));
    lists.push_back(ctx.index.search(query, spec.k_retrieve, q.qid));
  };

  if (groups.empty()) retrieve(q.question);
  for (const auto& group : groups) {
    if (group.empty()) {
      retrieve(q.question);
      continue;
    }
    switch (spec.kind) {
      case StrategyKind::kBm25:
        retrieve(q.question);
        break;
      case StrategyKind::kGreedy:
        retrieve(expanded_query(q.question, group[0].text));
        break;
      case StrategyKind::kConcat: {
        std::string joined;
        for (const auto& c : group.candidates) {
          if (!joined.empty()) joined.push_back(' ');
          joined += c.text;
        }
        retrieve(expanded_query(q.question, joined));
        break;
      }
      case StrategyKind::kOracle: {
        size_t best;
        {
          ScopedStage s(stage(times, &StageTimes::rerank));
          best = oracle_choice(ctx.index, ctx.store, q, group, spec.k_retrieve, spec.max_rank);
        }
        retrieve(expanded_query(q.question, group[best].text));
        break;
      }
      case StrategyKind::kEarRI:
      case StrategyKind::kEarRD: {
        const ScorerModel* model = ctx.models->find(group[0].tag);
        if (!model)
          throw std::invalid_argument("no reranker model for generator tag " + std::string(to_string(group[0].tag)));
        const Variant want = spec.kind == StrategyKind::kEarRI ? Variant::kRI : Variant::kRD;
        if (model->variant != want)
          throw std::invalid_argument("strategy " + std::string(to_string(spec.kind)) + " given a " +
                                      std::string(to_string(model->variant)) + " model");
        size_t best;
        {
          ScopedStage s(stage(times, &StageTimes::rerank));
          best = select_best_index(*model, RerankContext{ctx.index, ctx.store, ctx.workers}, q.question, group);
        }
        retrieve(expanded_query(q.question, group[best].text));
        break;
      }
    }
  }

  ScopedStage s(stage(times, &StageTimes::retrieval));
  for (const auto& extra : extra_lists) lists.push_back(extra);
  RankedList result = lists.size() == 1 ? std::move(lists.front()) : fuse(lists, spec.k_retrieve);
  if (spec.pr) result = rerank_passages(*spec.pr->scorer, ctx.index, ctx.store, q.question, result, spec.pr->depth);
  result.qid = q.qid;
  result.tag = spec.run_tag();
  return result;
}

DatasetResult run_dataset(const StrategySpec& spec, const PipelineContext& ctx, std::span<const QAExample> qa,
                          const ExpansionTable* expansions, std::span<const Run> extra_runs) {
  spec.validate();
  std::vector<std::optional<RankedList>> lists(qa.size());
  std::vector<std::string> errors(qa.size());
  PipelineContext inner = ctx;
  const unsigned workers = std::max(1u, std::min<unsigned>(ctx.workers, static_cast<unsigned>(qa.size())));
  if (workers > 1) inner.workers = 1;

  auto run_one = [&](size_t i) {
    const auto& q = qa[i];
    try {
      const CandidateSet* cs = nullptr;
      if (expansions) {
        auto it = expansions->find(q.qid);
        if (it != expansions->end()) cs = &it->second;
      }
      std::vector<RankedList> extra;
      for (const auto& run : extra_runs) {
        auto it = run.find(q.qid);
        if (it != run.end()) extra.push_back(it->second);
      }
      lists[i] = run_strategy(spec, inner, q, cs, extra);
    } catch (const std::exception& e) {
      errors[i] = q.qid + ": " + e.what();
    }
  };

  if (workers <= 1) {
    for (size_t i = 0; i < qa.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (size_t i = w; i < qa.size(); i += workers) run_one(i);
      });
    for (auto& t : pool) t.join();
  }

  DatasetResult out;
  for (size_t i = 0; i < qa.size(); ++i) {
    if (lists[i]) out.run.insert_or_assign(qa[i].qid, std::move(*lists[i]));
    if (!errors[i].empty()) out.errors.push_back(std::move(errors[i]));
  }
  return out;
}

}  // namespace ear
