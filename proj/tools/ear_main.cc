// ear: command-line driver for indexing, training-set construction,
// reranker training, retrieval, evaluation, benchmarking and ablation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ear/bench.h"
#include "ear/corpus.h"
#include "ear/eval.h"
#include "ear/expansion.h"
#include "ear/passage_reranker.h"
#include "ear/pipeline.h"
#include "ear/planted.h"
#include "ear/query_reranker.h"
#include "ear/sparse_index.h"

namespace {

// Bad flags, missing files, impossible flag combinations: exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("file not found: " + path);
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Bm25Flags {
  double k1 = 0.9;
  double b = 0.4;
  bool no_stem = false;
  bool no_stopwords = false;
  bool index_titles = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--k1", k1, "BM25 term-frequency saturation");
    cmd->add_option("--b", b, "BM25 length normalization");
    cmd->add_flag("--no-stem", no_stem, "disable Porter stemming");
    cmd->add_flag("--no-stopwords", no_stopwords, "keep stopwords");
    cmd->add_flag("--index-titles", index_titles, "index titles together with the body");
  }

  ear::Bm25Params params() const {
    ear::Bm25Params p;
    p.k1 = k1;
    p.b = b;
    p.analyzer.stemming = !no_stem;
    p.analyzer.stopwords = !no_stopwords;
    p.index_titles = index_titles;
    p.validate();
    return p;
  }
};

// Flags shared by retrieve, ablate and bench.
struct StrategyFlags {
  std::string strategy = "bm25";
  std::string expansions;
  std::string models;
  std::string pr_model;
  size_t pr_depth = 100;
  size_t n_samples = 50;
  size_t cap_n = 0;
  size_t k = 100;
  int max_rank = 101;
  std::vector<std::string> fuse_order;

  void add(CLI::App* cmd) {
    cmd->add_option("--strategy", strategy, "bm25, greedy, concat, oracle, ear_ri or ear_rd");
    cmd->add_option("--expansions", expansions, "expansion JSONL; the first row per question is the greedy one");
    cmd->add_option("--models", models, "query reranker model file (ear_ri / ear_rd)");
    cmd->add_option("--pr-model", pr_model, "passage reranker applied to the final list");
    cmd->add_option("--pr-depth", pr_depth, "passages reordered by the passage reranker");
    cmd->add_option("--n-samples", n_samples, "candidates read per question");
    cmd->add_option("--cap-n", cap_n, "keep the first N deduplicated candidates (0 keeps all)");
    cmd->add_option("--k", k, "retrieval depth");
    cmd->add_option("--max-rank", max_rank, "rank label for answers missing from the top k");
    cmd->add_option("--fuse-order", fuse_order, "retrieve per generator tag and fuse in this order")
        ->delimiter(',');
  }

  struct Loaded {
    ear::StrategySpec spec;
    std::optional<ear::ExpansionTable> expansions;
    std::optional<ear::RerankerBundle> models;
    std::optional<ear::PassageScorer> pr;
  };

  void check_files() const {
    if (!expansions.empty()) require_file(expansions);
    if (!models.empty()) require_file(models);
    if (!pr_model.empty()) require_file(pr_model);
  }

  // Validates the combination before anything heavy is loaded.
  ear::StrategySpec spec() const {
    ear::StrategySpec s;
    try {
      s.kind = ear::parse_strategy(strategy);
      for (const auto& t : fuse_order) s.fuse_order.push_back(ear::parse_generator_tag(t));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    s.n_samples = n_samples;
    if (cap_n > 0) s.cap_n = cap_n;
    s.k_retrieve = k;
    s.max_rank = max_rank;
    if (max_rank <= static_cast<int>(k))
      throw UsageError("--max-rank (" + std::to_string(max_rank) + ") must exceed --k (" + std::to_string(k) + ")");
    if (s.kind != ear::StrategyKind::kBm25 && expansions.empty())
      throw UsageError("strategy " + strategy + " needs --expansions");
    if ((s.kind == ear::StrategyKind::kEarRI || s.kind == ear::StrategyKind::kEarRD) && models.empty())
      throw UsageError("strategy " + strategy + " needs --models");
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    check_files();
    return s;
  }

  Loaded load(const std::vector<ear::QAExample>& qa) const {
    Loaded out;
    out.spec = spec();
    if (!expansions.empty()) {
      std::vector<std::string> warnings;
      out.expansions = ear::load_expansions(expansions, &qa, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    }
    if (!models.empty()) out.models = ear::RerankerBundle::load(models);
    if (!pr_model.empty()) {
      out.pr = ear::PassageScorer::load(pr_model);
      out.spec.pr = ear::PassageRerankStep{&*out.pr, pr_depth};
    }
    return out;
  }
};

void check_answers(const ear::StrategySpec& spec, const std::vector<ear::QAExample>& qa) {
  if (spec.kind != ear::StrategyKind::kOracle) return;
  for (const auto& q : qa)
    if (q.answers.empty())
      throw UsageError("strategy oracle needs questions with answers (question " + q.qid + " has none)");
}

void print_config(CLI::App* cmd) {
  std::cerr << "# " << cmd->get_name() << " configuration\n" << cmd->config_to_str(true, false) << std::flush;
}

// --- subcommands -----------------------------------------------------------

struct GenFixtureCmd {
  std::string out;
  ear::PlantedConfig cfg;

  void add(CLI::App* cmd) {
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("--train-questions", cfg.train_questions, "training questions");
    cmd->add_option("--test-questions", cfg.test_questions, "held-out questions");
    cmd->add_option("--candidates", cfg.candidates, "expansions per question");
    cmd->add_option("--junk-passages", cfg.junk_passages, "passages unrelated to any question");
    cmd->add_option("--seed", cfg.seed, "generator seed");
  }

  void run() {
    if (cfg.train_questions < 1 || cfg.test_questions < 1) throw UsageError("need at least one question per split");
    if (cfg.candidates < 12) throw UsageError("--candidates must be at least 12");
    auto fx = ear::make_planted_fixture(cfg);
    ear::write_planted_fixture(out, fx);
    std::cout << "passages " << fx.passages.size() << "\ntrain questions " << fx.train.size()
              << "\ntest questions " << fx.test.size() << "\nwritten to " << out << '\n';
  }
};

struct IndexCmd {
  std::string corpus, out;
  Bm25Flags bm25;

  void add(CLI::App* cmd) {
    cmd->add_option("--corpus", corpus, "passage JSONL")->required();
    cmd->add_option("--out", out, "index file to write")->required();
    bm25.add(cmd);
  }

  void run() {
    require_file(corpus);
    const auto params = bm25.params();
    auto store = ear::load_corpus(corpus);
    const auto t0 = std::chrono::steady_clock::now();
    auto index = ear::Index::build(store, params);
    index.save(out);
    const double secs = seconds_since(t0);
    std::printf("documents   %zu\nterms       %zu\nbuild       %.3f s\nindex size  %llu bytes\n",
                index.doc_count(), index.term_count(), secs,
                static_cast<unsigned long long>(std::filesystem::file_size(out)));
  }
};

struct MakeTrainCmd {
  std::string index, corpus, questions, expansions, out;
  ear::ConstructionConfig cfg;

  void add(CLI::App* cmd) {
    cmd->add_option("--index", index, "index file")->required();
    cmd->add_option("--corpus", corpus, "passage JSONL the index was built from")->required();
    cmd->add_option("--questions", questions, "training questions with answers")->required();
    cmd->add_option("--expansions", expansions, "expansion JSONL (default: built-in stub sampler)");
    cmd->add_option("--out", out, "training JSONL to write")->required();
    cmd->add_option("--n-samples", cfg.n_samples, "candidates per question");
    cmd->add_option("--k", cfg.k_retrieve, "retrieval depth for rank labels");
    cmd->add_option("--max-rank", cfg.max_rank, "rank label for answers missing from the top k");
    cmd->add_option("--folds", cfg.folds, "cross-validation folds");
    cmd->add_option("--seed", cfg.seed, "sampling and fold seed");
    cmd->add_option("--workers", cfg.workers, "retrieval threads");
  }

  void run() {
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    for (const auto* p : {&index, &corpus, &questions}) require_file(*p);
    if (!expansions.empty()) require_file(expansions);
    auto qa = ear::load_questions(questions);
    if (qa.size() < cfg.folds)
      throw UsageError("--folds " + std::to_string(cfg.folds) + " exceeds the " + std::to_string(qa.size()) +
                       " questions");
    auto idx = ear::Index::load(index);
    auto store = ear::load_corpus(corpus);

    std::vector<ear::TrainingExample> examples;
    if (expansions.empty()) {
      ear::StubSource source{ear::StubSampler(idx, store)};
      examples = ear::build_training_set(idx, store, qa, cfg, source, true);
    } else {
      std::vector<std::string> warnings;
      auto table = ear::load_expansions(expansions, &qa, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      examples = ear::build_training_set(idx, store, qa, cfg, ear::TableSource(table), true);
    }
    ear::write_training_set(out, examples);

    // Rank-label histogram.
    const std::vector<std::pair<int, std::string>> buckets = {
        {1, "r = 1"}, {5, "r 2-5"}, {20, "r 6-20"}, {static_cast<int>(cfg.k_retrieve), "r 21-k"}};
    std::vector<size_t> counts(buckets.size() + 1, 0);
    size_t total = 0;
    for (const auto& ex : examples)
      for (const auto& l : ex.labels) {
        ++total;
        size_t b = 0;
        while (b < buckets.size() && l.rank > buckets[b].first) ++b;
        ++counts[b];
      }
    std::printf("questions   %zu\ncandidates  %zu\n", examples.size(), total);
    for (size_t b = 0; b <= buckets.size(); ++b)
      std::printf("  %-8s %8zu\n", b < buckets.size() ? buckets[b].second.c_str() : "miss", counts[b]);
  }
};

struct TrainCmd {
  std::string train, index, corpus, out, variant = "rd";
  ear::TrainConfig cfg;
  size_t epochs = 0;
  bool shared = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--train", train, "training JSONL from make-train")->required();
    cmd->add_option("--index", index, "index file")->required();
    cmd->add_option("--corpus", corpus, "passage JSONL the index was built from")->required();
    cmd->add_option("--out", out, "model file to write")->required();
    cmd->add_option("--variant", variant, "ri (question and expansion only) or rd (also the top-1 passage)");
    cmd->add_option("--alpha", cfg.alpha, "margin per rank of difference");
    cmd->add_option("--epochs", epochs, "passes over the data (0: 2 for ri, 3 for rd)");
    cmd->add_option("--group-batch", cfg.group_batch, "questions per update");
    cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    cmd->add_option("--hidden", cfg.hidden_width, "hidden ReLU units (0: linear scorer)");
    cmd->add_option("--seed", cfg.seed, "shuffle and initialization seed");
    cmd->add_flag("--shared", shared, "one model for all generator tags");
  }

  // Candidates of one generator tag, labels re-indexed.
  static ear::TrainingExample restrict(const ear::TrainingExample& ex, ear::GeneratorTag tag) {
    ear::TrainingExample out = ex;
    out.candidates.candidates.clear();
    out.labels.clear();
    if (out.top1) out.top1->clear();
    for (size_t i = 0; i < ex.candidates.size(); ++i) {
      if (ex.candidates[i].tag != tag) continue;
      out.labels.push_back({out.candidates.size(), ex.labels[i].rank, ex.labels[i].hit});
      out.candidates.candidates.push_back(ex.candidates[i]);
      if (ex.top1) out.top1->push_back((*ex.top1)[i]);
    }
    return out;
  }

  void run() {
    ear::Variant v;
    try {
      v = ear::parse_variant(variant);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (epochs == 0) epochs = ear::TrainConfig::defaults_for(v).epochs;
    cfg.epochs = epochs;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    for (const auto* p : {&train, &index, &corpus}) require_file(*p);
    auto examples = ear::load_training_set(train);
    auto idx = ear::Index::load(index);
    auto store = ear::load_corpus(corpus);

    std::set<ear::GeneratorTag> tags;
    for (const auto& ex : examples)
      for (const auto& c : ex.candidates.candidates) tags.insert(c.tag);

    std::vector<std::pair<std::string, std::vector<ear::TrainingExample>>> jobs;
    if (shared || tags.size() <= 1) {
      jobs.emplace_back("*", examples);
    } else {
      for (auto tag : tags) {
        std::vector<ear::TrainingExample> subset;
        for (const auto& ex : examples) subset.push_back(restrict(ex, tag));
        jobs.emplace_back(std::string(ear::to_string(tag)), std::move(subset));
      }
    }

    ear::RerankerBundle bundle;
    for (auto& [tag, subset] : jobs) {
      std::erase_if(subset, [](const ear::TrainingExample& ex) { return ex.candidates.size() < 2; });
      if (subset.empty()) {
        std::cerr << "warning: no question has two or more '" << tag << "' candidates; skipped\n";
        continue;
      }
      auto groups = ear::featurize_examples(idx, store, subset, v);
      auto result = ear::train(groups, cfg, v, tag);
      std::printf("model %s (%s): %zu questions, loss per epoch:", tag.c_str(), std::string(ear::to_string(v)).c_str(),
                  groups.size());
      for (double l : result.epoch_losses) std::printf(" %.6f", l);
      std::printf("\n");
      bundle.add(std::move(result.model));
    }
    if (bundle.empty()) throw std::runtime_error("nothing to train");
    bundle.save(out);
  }
};

struct TrainPrCmd {
  std::string index, corpus, questions, out;
  ear::PRTrainConfig cfg;

  void add(CLI::App* cmd) {
    cmd->add_option("--index", index, "index file")->required();
    cmd->add_option("--corpus", corpus, "passage JSONL the index was built from")->required();
    cmd->add_option("--questions", questions, "training questions with answers")->required();
    cmd->add_option("--out", out, "passage scorer file to write")->required();
    cmd->add_option("--depth", cfg.train_depth, "top BM25 passages per question used as instances");
    cmd->add_option("--epochs", cfg.epochs, "passes over the instances");
    cmd->add_option("--batch-size", cfg.batch_size, "instances per update");
    cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    cmd->add_option("--seed", cfg.seed, "shuffle seed");
  }

  void run() {
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    for (const auto* p : {&index, &corpus, &questions}) require_file(*p);
    auto qa = ear::load_questions(questions);
    auto idx = ear::Index::load(index);
    auto store = ear::load_corpus(corpus);
    ear::PRTrainStats stats;
    auto ps = ear::train_passage_reranker(idx, store, qa, cfg, &stats);
    for (const auto& w : stats.warnings) std::cerr << "warning: " << w << '\n';
    ps.save(out);
    std::printf("instances   %zu\npositives   %zu\naccuracy    %.4f\n", stats.instances, stats.positives,
                stats.train_accuracy);
  }
};

struct RetrieveCmd {
  std::string index, corpus, questions, out;
  std::vector<std::string> import_runs;
  StrategyFlags flags;
  unsigned workers = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--index", index, "index file")->required();
    cmd->add_option("--corpus", corpus, "passage JSONL the index was built from")->required();
    cmd->add_option("--questions", questions, "question JSONL; answers are needed only for oracle")->required();
    cmd->add_option("--out", out, "TREC run file to write")->required();
    cmd->add_option("--import-run", import_runs, "TREC run fused after the generator lists (repeatable)");
    cmd->add_option("--workers", workers, "questions processed in parallel");
    flags.add(cmd);
  }

  void run() {
    flags.spec();
    for (const auto* p : {&index, &corpus, &questions}) require_file(*p);
    for (const auto& p : import_runs) require_file(p);
    auto qa = ear::load_questions(questions, false);
    auto loaded = flags.load(qa);
    check_answers(loaded.spec, qa);
    std::vector<ear::Run> extra;
    for (const auto& p : import_runs) extra.push_back(ear::read_run(p));
    auto idx = ear::Index::load(index);
    auto store = ear::load_corpus(corpus);

    ear::PipelineContext ctx{idx, store, loaded.models ? &*loaded.models : nullptr, std::max(1u, workers)};
    auto result = ear::run_dataset(loaded.spec, ctx, qa, loaded.expansions ? &*loaded.expansions : nullptr, extra);
    ear::write_run(out, result.run);
    std::printf("questions   %zu\nretrieved   %zu\nrun tag     %s\n", qa.size(), result.run.size(),
                loaded.spec.run_tag().c_str());
    for (const auto& e : result.errors) std::cerr << "error: " << e << '\n';
    if (!result.errors.empty()) throw std::runtime_error(std::to_string(result.errors.size()) + " questions failed");
  }
};

struct EvalCmd {
  std::vector<std::string> runs;
  std::string questions, corpus, format = "text", out;
  std::vector<size_t> ks = ear::kDefaultKs;

  void add(CLI::App* cmd) {
    cmd->add_option("--run", runs, "TREC run file (repeatable)")->required();
    cmd->add_option("--questions", questions, "questions with answers")->required();
    cmd->add_option("--corpus", corpus, "passage JSONL")->required();
    cmd->add_option("--ks", ks, "accuracy cut-offs")->delimiter(',');
    cmd->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    cmd->add_option("--out", out, "write the report here instead of stdout");
  }

  void run() {
    for (const auto& r : runs) require_file(r);
    require_file(questions);
    require_file(corpus);
    if (ks.empty() || std::find(ks.begin(), ks.end(), size_t{0}) != ks.end())
      throw UsageError("--ks must be positive integers");
    auto qa = ear::load_questions(questions);
    auto store = ear::load_corpus(corpus);
    std::vector<ear::AccuracyReport> reports;
    for (const auto& path : runs) {
      auto run = ear::read_run(path);
      try {
        reports.push_back(ear::topk_accuracy(run, qa, store, ks));
      } catch (const std::invalid_argument& e) {
        throw ear::InputError(path + ": " + e.what());
      }
    }
    std::string body;
    if (format == "csv") {
      body = ear::accuracy_csv(reports);
    } else if (format == "json") {
      body = "[";
      for (size_t i = 0; i < reports.size(); ++i) body += (i ? ",\n" : "\n") + reports[i].to_json();
      body += "\n]\n";
    } else {
      for (const auto& r : reports) body += r.to_text();
    }
    if (out.empty())
      std::cout << body;
    else
      write_file(out, body);
  }
};

struct BenchCmd {
  std::string corpus, questions, index_out, format = "text";
  size_t repetitions = 3;
  size_t limit = 0;
  StrategyFlags flags;
  Bm25Flags bm25;

  void add(CLI::App* cmd) {
    cmd->add_option("--corpus", corpus, "passage JSONL")->required();
    cmd->add_option("--questions", questions, "question JSONL")->required();
    cmd->add_option("--index-out", index_out, "where the timed index is written (default: temp dir)");
    cmd->add_option("--repetitions", repetitions, "timed repetitions");
    cmd->add_option("--limit", limit, "use only the first N questions (0: all)");
    cmd->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    flags.add(cmd);
    bm25.add(cmd);
  }

  void run() {
    flags.spec();
    if (repetitions < 1) throw UsageError("--repetitions must be at least 1");
    require_file(corpus);
    require_file(questions);
    const auto params = bm25.params();
    auto qa = ear::load_questions(questions, false);
    if (limit > 0 && qa.size() > limit) qa.resize(limit);
    auto loaded = flags.load(qa);
    check_answers(loaded.spec, qa);
    auto store = ear::load_corpus(corpus);
    std::string path = index_out;
    if (path.empty()) path = (std::filesystem::temp_directory_path() / "ear-bench-index.bin").string();
    auto report = ear::bench_latency(loaded.spec, store, params, loaded.models ? &*loaded.models : nullptr, qa,
                                     loaded.expansions ? &*loaded.expansions : nullptr, repetitions, path);
    if (index_out.empty()) std::filesystem::remove(path);
    std::cout << (format == "json" ? report.to_json() + "\n" : report.to_text());
  }
};

struct AblateCmd {
  std::string index, corpus, questions, out;
  std::vector<size_t> ns = {1, 5, 10, 20, 30, 50};
  std::vector<size_t> ks = ear::kDefaultKs;
  StrategyFlags flags;
  unsigned workers = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--index", index, "index file")->required();
    cmd->add_option("--corpus", corpus, "passage JSONL the index was built from")->required();
    cmd->add_option("--questions", questions, "questions with answers")->required();
    cmd->add_option("--ns", ns, "candidate caps, ascending")->delimiter(',');
    cmd->add_option("--ks", ks, "accuracy cut-offs")->delimiter(',');
    cmd->add_option("--out", out, "CSV to write instead of stdout");
    cmd->add_option("--workers", workers, "questions processed in parallel");
    flags.add(cmd);
  }

  void run() {
    auto spec = flags.spec();
    if (flags.expansions.empty()) throw UsageError("ablation needs --expansions");
    if (ns.empty() || !std::is_sorted(ns.begin(), ns.end()) || ns.front() == 0)
      throw UsageError("--ns must be ascending positive integers");
    if (ns.back() > spec.n_samples) throw UsageError("--ns exceeds --n-samples");
    for (const auto* p : {&index, &corpus, &questions}) require_file(*p);
    auto qa = ear::load_questions(questions);
    auto loaded = flags.load(qa);
    auto idx = ear::Index::load(index);
    auto store = ear::load_corpus(corpus);
    ear::PipelineContext ctx{idx, store, loaded.models ? &*loaded.models : nullptr, std::max(1u, workers)};
    auto rows = ear::ablate_candidate_size(loaded.spec, ctx, qa, *loaded.expansions, ns, ks);
    const auto csv = ear::ablation_csv(rows);
    if (out.empty())
      std::cout << csv;
    else
      write_file(out, csv);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expand-and-rerank sparse retrieval toolkit"};
  app.name("ear");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  GenFixtureCmd gen;
  IndexCmd index;
  MakeTrainCmd make_train;
  TrainCmd train;
  TrainPrCmd train_pr;
  RetrieveCmd retrieve;
  EvalCmd eval;
  BenchCmd bench;
  AblateCmd ablate;

  std::vector<std::pair<CLI::App*, std::function<void()>>> commands;
  auto add = [&](auto& cmd, const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.add(sub);
    commands.emplace_back(sub, [&cmd] { cmd.run(); });
  };
  add(gen, "gen-fixture", "write the synthetic planted collection");
  add(index, "index", "build and save a BM25 index");
  add(make_train, "make-train", "sample expansions and label them with answer ranks");
  add(train, "train", "train the query reranker");
  add(train_pr, "train-pr", "train the passage reranker");
  add(retrieve, "retrieve", "run a retrieval strategy and write a TREC run");
  add(eval, "eval", "top-k retrieval accuracy of TREC runs");
  add(bench, "bench", "per-stage latency");
  add(ablate, "ablate", "accuracy as a function of the candidate cap N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (auto& [sub, run] : commands) {
    if (!sub->parsed()) continue;
    print_config(sub);
    try {
      run();
      return 0;
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const ear::InputError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}
