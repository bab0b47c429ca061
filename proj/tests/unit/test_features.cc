#include <doctest.h>

#include <cmath>
#include <set>

#include "ear/expansion.h"
#include "ear/features.h"
#include "support.h"

namespace {

ear::PassageStore fixture_store() {
  return ear::PassageStore({{"p1", "", "Zorb Malten kept the lighthouse"},
                            {"p2", "", "the lighthouse keeper"},
                            {"p3", "", "islands far away"}});
}

std::set<std::string> grams(const std::string& s) {
  std::set<std::string> out;
  for (size_t i = 0; i + 3 <= s.size(); ++i) out.insert(s.substr(i, 3));
  return out;
}

double jaccard(const std::string& a, const std::string& b) {
  auto ga = grams(a), gb = grams(b);
  size_t inter = 0;
  for (const auto& g : ga) inter += gb.count(g);
  return static_cast<double>(inter) / static_cast<double>(ga.size() + gb.size() - inter);
}

}  // namespace

TEST_CASE("schemas") {
  CHECK(ear::schema_dim(ear::kRiSchema) == 9);
  CHECK(ear::schema_dim(ear::kRdSchema) == 14);
  CHECK(ear::feature_names(ear::kRiSchema).size() == 9);
  CHECK(ear::feature_names(ear::kRdSchema)[13] == "top1_margin_positive");
  CHECK_THROWS_AS(ear::schema_dim("nope"), std::invalid_argument);
}

TEST_CASE("hand-computed retrieval-dependent vector") {
  auto store = fixture_store();
  auto idx = ear::Index::build(store, {});
  const std::string q = "Who kept the lighthouse?";
  const std::string e = "Zorb Malten 1900 lighthouse";

  // zorb and malten occur in one of three passages; 1900 nowhere
  const double idf_rare = std::log(1.0 + (3 - 1 + 0.5) / (1 + 0.5));
  std::vector<ear::Passage> ps(store.passages().begin(), store.passages().end());
  testing::BruteForceBm25 oracle(ps, 0.9, 0.4);
  const double top1_bm25 = oracle.score(ear::analyze(q + " " + e, {}), 0);

  const std::vector<double> want = {
      1.0,                                                  // bias
      4.0,                                                  // zorb malten 1900 lighthouse
      0.25,                                                 // lighthouse is in q
      0.75,                                                 //
      idf_rare,                                             // max over zorb, malten, 1900
      2.0 * idf_rare / 3.0,                                 // 1900 contributes 0
      1.0,                                                  // 1900
      2.0,                                                  // Zorb, Malten
      jaccard("who kept the lighthouse", "zorb malten 1900 lighthouse"),
      top1_bm25,                                            // p1 for q + e
      2.0 / 3.0,                                            // zorb, malten found; 1900 not
      2.0 / 3.0,                                            // who, kept, lighthouse: 2 found
      5.0,                                                  // zorb malten kept the lighthouse
      1.0};

  auto batch = ear::featurize_rd_batch(idx, store, q, std::vector<std::string>{e});
  REQUIRE(batch.size() == 1);
  const auto& got = batch[0];
  CHECK(got.schema_id == ear::kRdSchema);
  REQUIRE(got.values.size() == want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    CAPTURE(i);
    CHECK(got.values[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
  CHECK(ear::featurize_rd(idx, q, e, &store.get("p1"), true) == got);

  auto ri = ear::featurize_ri(idx, q, e);
  CHECK(ri.schema_id == ear::kRiSchema);
  CHECK(std::equal(ri.values.begin(), ri.values.end(), got.values.begin()));
}

TEST_CASE("expansion equal to the question") {
  auto store = fixture_store();
  auto idx = ear::Index::build(store, {});
  auto f = ear::featurize_ri(idx, "who kept the lighthouse", "Who kept the lighthouse");
  CHECK(f.values[2] == 1.0);
  CHECK(f.values[3] == 0.0);
  CHECK(f.values[4] == 0.0);
  CHECK(f.values[5] == 0.0);
  CHECK(f.values[8] == 1.0);
}

TEST_CASE("featurization is deterministic") {
  auto store = fixture_store();
  auto idx = ear::Index::build(store, {});
  std::vector<std::string> es = {"keeper lighthouse", "Zorb", "far islands 12"};
  CHECK(ear::featurize_rd_batch(idx, store, "who kept it", es, 1) ==
        ear::featurize_rd_batch(idx, store, "who kept it", es, 3));
  CHECK(ear::featurize_ri(idx, "a b", "c d") == ear::featurize_ri(idx, "a b", "c d"));
}

TEST_CASE("novel tokens absent from the top passage") {
  auto store = fixture_store();
  auto idx = ear::Index::build(store, {});
  auto f = ear::featurize_rd(idx, "lighthouse", "qqq rrr", &store.get("p2"), true);
  CHECK(f.values[10] == 0.0);
}

TEST_CASE("same top passage for two expansions") {
  auto store = fixture_store();
  auto idx = ear::Index::build(store, {});
  const auto& d = store.get("p2");
  auto a = ear::featurize_rd(idx, "lighthouse", "keeper", &d, true);
  auto b = ear::featurize_rd(idx, "lighthouse", "Keeper 1900 far", &d, false);
  CHECK(!std::equal(a.values.begin(), a.values.begin() + 9, b.values.begin()));
  CHECK(a.values[12] == b.values[12]);
  CHECK(a.values[13] == 1.0);
  CHECK(b.values[13] == 0.0);
}

TEST_CASE("nothing retrieved leaves the passage block at zero") {
  auto store = fixture_store();
  auto idx = ear::Index::build(store, {});
  auto fs = ear::featurize_rd_batch(idx, store, "the of", std::vector<std::string>{"qqq"});
  for (size_t i = 9; i < 14; ++i) CHECK(fs[0].values[i] == 0.0);
}

TEST_CASE("margin indicator follows the rank-2 score") {
  ear::PassageStore store({{"a", "", "twin words"}, {"b", "", "twin words"}, {"c", "", "solo"}});
  auto idx = ear::Index::build(store, {});
  CHECK(ear::featurize_rd_batch(idx, store, "twin", std::vector<std::string>{"words"})[0].values[13] == 0.0);
  CHECK(ear::featurize_rd_batch(idx, store, "solo", std::vector<std::string>{"x"})[0].values[13] == 1.0);
}

TEST_CASE("random features are finite and fractions stay in range") {
  ear::Rng rng(21);
  ear::PassageStore store(testing::random_passages(rng, 80));
  auto idx = ear::Index::build(store, {});
  for (int trial = 0; trial < 200; ++trial) {
    auto q = testing::random_text(rng, 1, 8);
    std::vector<std::string> es = {testing::random_text(rng, 1, 6)};
    auto f = ear::featurize_rd_batch(idx, store, q, es)[0];
    for (double v : f.values) CHECK(std::isfinite(v));
    for (size_t i : {2u, 3u, 8u, 10u, 11u}) {
      CHECK(f.values[i] >= 0.0);
      CHECK(f.values[i] <= 1.0);
    }
    CHECK(f.values[2] + f.values[3] == doctest::Approx(1.0));
  }
}

TEST_CASE("char3 jaccard") {
  CHECK(ear::char3_jaccard("", "") == 0.0);
  CHECK(ear::char3_jaccard("abc", "abc") == 1.0);
  CHECK(ear::char3_jaccard("abcd", "bcde") == doctest::Approx(1.0 / 3.0));
  CHECK(ear::char3_jaccard("ab", "abc") == 0.0);
}
