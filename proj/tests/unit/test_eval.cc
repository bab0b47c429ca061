#include <doctest.h>

#include <json.hpp>

#include "ear/eval.h"
#include "support.h"

namespace {

ear::PassageStore store() {
  return ear::PassageStore({{"a", "", "nothing here"},
                            {"b", "", "Paris is the capital"},
                            {"c", "", "more filler"},
                            {"d", "", "Berlin too"}});
}

ear::RankedList rl(std::string qid, std::vector<std::string> ids) {
  ear::RankedList out{std::move(qid), "x", {}};
  double s = 10;
  for (auto& id : ids) out.entries.push_back({std::move(id), s--});
  return out;
}

}  // namespace

TEST_CASE("min answer rank") {
  auto st = store();
  CHECK(ear::min_answer_rank(rl("q", {"a", "c", "b"}), std::vector<std::string>{"paris"}, st) == 3u);
  CHECK(ear::min_answer_rank(rl("q", {"d", "b"}), std::vector<std::string>{"paris", "berlin"}, st) == 1u);
  CHECK(!ear::min_answer_rank(rl("q", {"a", "c"}), std::vector<std::string>{"paris"}, st));
}

TEST_CASE("top-k accuracy by hand") {
  auto st = store();
  std::vector<ear::QAExample> qa = {{"q1", "?", {"Paris"}}, {"q2", "?", {"Berlin"}}, {"q3", "?", {"Rome"}},
                                    {"q4", "?", {"Paris"}}};
  ear::Run run;
  run["q1"] = rl("q1", {"b"});
  run["q2"] = rl("q2", {"a", "c", "b", "d"});
  run["q3"] = rl("q3", {"a", "b"});
  // q4 has no list: a miss
  auto rep = ear::topk_accuracy(run, qa, st, {4, 1, 2}, "mine");
  CHECK(rep.ks == std::vector<size_t>{1, 2, 4});
  CHECK(rep.at(1) == 0.25);
  CHECK(rep.at(2) == 0.25);
  CHECK(rep.at(4) == 0.5);
  CHECK(rep.tag == "mine");
  CHECK(rep.questions == 4);
  CHECK(ear::topk_accuracy(run, qa, st).tag == "x");

  run["q9"] = rl("q9", {"b"});
  CHECK_THROWS_AS(ear::topk_accuracy(run, qa, st), std::invalid_argument);
  run.erase("q9");
  CHECK_THROWS_AS(ear::topk_accuracy(run, qa, st, {0, 5}), std::invalid_argument);
  CHECK(ear::topk_accuracy({}, {}, st).at(5) == 0.0);
}

TEST_CASE("accuracy is monotone in k on random runs") {
  ear::Rng rng(61);
  std::vector<ear::Passage> ps;
  for (int i = 0; i < 60; ++i) ps.push_back({"p" + std::to_string(i), "", "token" + std::to_string(i % 7)});
  ear::PassageStore st(ps);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ear::QAExample> qa;
    ear::Run run;
    for (int q = 0; q < 20; ++q) {
      std::string qid = "q" + std::to_string(q);
      qa.push_back({qid, "?", {"token" + std::to_string(rng.below(9))}});
      std::vector<std::string> ids;
      for (int i = 0; i < 60; ++i)
        if (rng.bernoulli(0.3)) ids.push_back("p" + std::to_string(i));
      run[qid] = rl(qid, ids);
    }
    auto rep = ear::topk_accuracy(run, qa, st, {1, 2, 3, 5, 10, 20, 100});
    CHECK_NOTHROW(rep.check());
  }
}

TEST_CASE("report check rejects impossible reports") {
  ear::AccuracyReport r;
  r.ks = {1, 5};
  r.accuracy = {{1, 0.5}, {5, 0.4}};
  CHECK_THROWS_AS(r.check(), std::logic_error);
  r.accuracy = {{1, 0.5}, {5, 1.5}};
  CHECK_THROWS_AS(r.check(), std::logic_error);
}

TEST_CASE("report formats") {
  ear::AccuracyReport r;
  r.tag = "bm25";
  r.questions = 2;
  r.ks = {1, 5};
  r.accuracy = {{1, 0.5}, {5, 1.0}};
  CHECK(r.to_text() == "run bm25  questions 2\n  top-1      50.00\n  top-5     100.00\n");
  auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["accuracy"]["5"] == 1.0);
  std::vector<ear::AccuracyReport> rs{r};
  CHECK(ear::accuracy_csv(rs) == "run,k,accuracy\nbm25,1,0.5\nbm25,5,1\n");
  std::vector<ear::AblationRow> rows{{1, r}, {5, r}};
  CHECK(ear::ablation_csv(rows) == "N,top1,top5\n1,0.5,1\n5,0.5,1\n");
}

TEST_CASE("candidate-size ablation keeps the oracle non-decreasing") {
  ear::Rng rng(62);
  ear::PassageStore st(testing::random_passages(rng, 300));
  auto idx = ear::Index::build(st, {});
  ear::StubSampler sampler(idx, st);
  std::vector<ear::QAExample> qa;
  ear::ExpansionTable table;
  for (int i = 0; i < 40; ++i) {
    const auto& p = st.at(rng.below(st.size()));
    ear::QAExample q{"q" + std::to_string(i), testing::random_text(rng, 2, 4), {st.tokens(p.id).front()}};
    table[q.qid] = sampler.sample(q.qid, q.question, 50, i);
    qa.push_back(q);
  }
  ear::PipelineContext ctx{idx, st, nullptr, 2};
  ear::StrategySpec s;
  s.kind = ear::StrategyKind::kOracle;
  const std::vector<size_t> ns = {1, 5, 10, 20, 30, 50};
  auto rows = ear::ablate_candidate_size(s, ctx, qa, table, ns);
  REQUIRE(rows.size() == ns.size());
  for (size_t i = 1; i < rows.size(); ++i)
    for (size_t k : ear::kDefaultKs) CHECK(rows[i].report.at(k) >= rows[i - 1].report.at(k));
  const std::vector<size_t> unsorted = {5, 1};
  CHECK_THROWS_AS(ear::ablate_candidate_size(s, ctx, qa, table, unsorted), std::invalid_argument);
}
