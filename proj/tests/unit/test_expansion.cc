#include <doctest.h>

#include <set>

#include "ear/expansion.h"
#include "support.h"

namespace {

ear::CandidateSet make_set(std::vector<std::string> texts, ear::GeneratorTag tag = ear::GeneratorTag::kAnswer) {
  ear::CandidateSet cs;
  cs.qid = "q";
  for (size_t i = 0; i < texts.size(); ++i) cs.candidates.push_back({texts[i], tag, i});
  cs.requested_n = texts.size();
  return cs;
}

std::vector<std::string> texts_of(const ear::CandidateSet& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs.candidates) out.push_back(c.text);
  return out;
}

// Answer passage "pa" sits below two keyword-stuffed passages for the bare
// question; "zorb" appears only in "pa".
ear::PassageStore label_store() {
  return ear::PassageStore({{"pa", "", "the lighthouse keeper was Zorb Malten of the isle"},
                            {"pb", "", "lighthouse lighthouse keeper keeper"},
                            {"pc", "", "lighthouse keeper lighthouse"},
                            {"pd", "", "malten is a town"},
                            {"pe", "", "unrelated words only"}});
}

}  // namespace

TEST_CASE("generator tags parse from the closed set") {
  for (auto t : {ear::GeneratorTag::kAnswer, ear::GeneratorTag::kSentence, ear::GeneratorTag::kTitle,
                 ear::GeneratorTag::kStub, ear::GeneratorTag::kExternal})
    CHECK(ear::parse_generator_tag(ear::to_string(t)) == t);
  CHECK_THROWS_AS(ear::parse_generator_tag("summary"), std::invalid_argument);
}

TEST_CASE("construction config validation") {
  ear::ConstructionConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.max_rank = 100;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.folds = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.n_samples = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("expanded query is question, space, expansion") {
  CHECK(ear::expanded_query("who?", "Ann Lee") == "who? Ann Lee");
}

TEST_CASE("dedup keeps the first of each normalized text") {
  auto cs = make_set({"Ann Lee", "ann  lee!", "Bob", "ANN LEE", "bob x"});
  CHECK(texts_of(ear::dedup(cs)) == std::vector<std::string>{"Ann Lee", "Bob", "bob x"});
  CHECK(ear::dedup(cs).candidates[1].sample_seed == 2);
}

TEST_CASE("dedup is idempotent and never grows the set") {
  ear::Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> texts;
    const size_t n = 1 + rng.below(30);
    for (size_t i = 0; i < n; ++i) texts.push_back(testing::random_text(rng, 1, 3));
    auto cs = make_set(texts);
    auto once = ear::dedup(cs);
    CHECK(once.size() <= cs.size());
    CHECK(ear::dedup(once) == once);
    std::set<std::string> distinct;
    for (const auto& t : texts) distinct.insert(ear::normalize(t).joined());
    CHECK(once.size() == distinct.size());
  }
}

TEST_CASE("truncation takes nested prefixes") {
  auto cs = make_set({"a", "b", "c", "d", "e"});
  CHECK(texts_of(ear::truncate(cs, 2)) == std::vector<std::string>{"a", "b"});
  CHECK(ear::truncate(cs, 2).cap == 2u);
  CHECK(ear::truncate(cs, 9).size() == 5);
  CHECK_THROWS_AS(ear::truncate(cs, 0), std::invalid_argument);
  for (size_t n = 1; n <= 6; ++n)
    for (size_t m = n; m <= 6; ++m) {
      auto small = texts_of(ear::truncate(cs, n));
      auto big = texts_of(ear::truncate(cs, m));
      REQUIRE(small.size() <= big.size());
      CHECK(std::equal(small.begin(), small.end(), big.begin()));
    }
}

TEST_CASE("split_by_tag groups in first-appearance order") {
  ear::CandidateSet cs;
  cs.qid = "q";
  cs.candidates = {{"s1", ear::GeneratorTag::kSentence, 0},
                   {"a1", ear::GeneratorTag::kAnswer, 1},
                   {"s2", ear::GeneratorTag::kSentence, 2},
                   {"t1", ear::GeneratorTag::kTitle, 3}};
  auto parts = ear::split_by_tag(cs);
  REQUIRE(parts.size() == 3);
  CHECK(texts_of(parts[0]) == std::vector<std::string>{"s1", "s2"});
  CHECK(texts_of(parts[1]) == std::vector<std::string>{"a1"});
  CHECK(parts[2].candidates[0].tag == ear::GeneratorTag::kTitle);
}

TEST_CASE("expansion files load in file order with warnings") {
  testing::TempDir dir("exp");
  testing::write_text(dir.file("e.jsonl"),
                      "{\"qid\":\"q1\",\"generator_tag\":\"answer\",\"text\":\"Ann\"}\n"
                      "{\"qid\":\"q1\",\"generator_tag\":\"title\",\"text\":\"   \"}\n"
                      "{\"qid\":\"q9\",\"generator_tag\":\"sentence\",\"text\":\"stray\"}\n"
                      "{\"qid\":\"q1\",\"generator_tag\":\"sentence\",\"text\":\"Ann was born\"}\n");
  std::vector<ear::QAExample> qa = {{"q1", "who?", {"Ann"}}};
  std::vector<std::string> warnings;
  auto table = ear::load_expansions(dir.file("e.jsonl"), &qa, &warnings);
  REQUIRE(table.count("q1"));
  CHECK(texts_of(table["q1"]) == std::vector<std::string>{"Ann", "Ann was born"});
  CHECK(table["q1"].candidates[1].tag == ear::GeneratorTag::kSentence);
  CHECK(table.count("q9"));
  CHECK(warnings.size() == 2);

  testing::write_text(dir.file("bad.jsonl"),
                      "{\"qid\":\"q1\",\"generator_tag\":\"answer\",\"text\":\"Ann\"}\n"
                      "{\"qid\":\"q1\",\"generator_tag\":\"summary\",\"text\":\"x\"}\n");
  try {
    ear::load_expansions(dir.file("bad.jsonl"));
    FAIL("expected an error");
  } catch (const ear::InputError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("summary") != std::string::npos);
  }
}

TEST_CASE("expansion tables round-trip") {
  testing::TempDir dir("exp-rt");
  ear::ExpansionTable table;
  table["b"] = make_set({"x y", "Caf\xC3\xA9 \"q\""}, ear::GeneratorTag::kTitle);
  table["b"].qid = "b";
  table["a"] = make_set({"z"});
  table["a"].qid = "a";
  ear::write_expansions(dir.file("t.jsonl"), table);
  CHECK(ear::load_expansions(dir.file("t.jsonl")) == table);
}

TEST_CASE("stub sampler is deterministic and distinct") {
  ear::Rng rng(8);
  ear::PassageStore store(testing::random_passages(rng, 150));
  auto idx = ear::Index::build(store, {});
  ear::StubSampler sampler(idx, store);
  for (size_t n : {1u, 5u, 50u, 120u}) {
    auto a = sampler.sample("q", "river bank city", n, 3);
    auto b = sampler.sample("q", "river bank city", n, 3);
    CHECK(a == b);
    CHECK(a.size() == n);
    CHECK(a.requested_n == n);
    CHECK(ear::dedup(a).size() == n);
    for (const auto& c : a.candidates) {
      CHECK(!ear::normalize(c.text).empty());
      CHECK(c.tag == ear::GeneratorTag::kStub);
    }
  }
  CHECK(sampler.sample("q", "river bank city", 20, 3) != sampler.sample("q", "river bank city", 20, 4));
  CHECK_THROWS_AS(sampler.sample("q", "x", 0, 1), std::invalid_argument);
}

TEST_CASE("rank labels are first answer positions in the expanded retrieval") {
  auto store = label_store();
  auto idx = ear::Index::build(store, {});
  ear::QAExample q{"q", "lighthouse keeper", {"Zorb Malten"}};
  auto cs = make_set({"zorb", "keeper", "pelican"});
  ear::ConstructionConfig cfg;
  auto labels = ear::label_candidates(idx, store, q, cs, cfg);
  REQUIRE(labels.labels.size() == 3);
  CHECK(labels.labels[0].rank == 1);
  CHECK(labels.labels[0].hit);
  CHECK(labels.top1[0] == "pa");
  // bare-ish retrieval leaves the answer passage third
  CHECK(labels.labels[1].rank == 3);
  CHECK(labels.labels[2].rank == 3);

  // a depth that cuts the answer off gives the sentinel
  cfg.k_retrieve = 2;
  cfg.max_rank = 150;
  auto shallow = ear::label_candidates(idx, store, q, cs, cfg);
  CHECK(shallow.labels[1].rank == 150);
  CHECK(!shallow.labels[1].hit);

  for (size_t i = 0; i < cs.size(); ++i) {
    auto rl = idx.search(ear::expanded_query(q.question, cs[i].text), 100);
    size_t want = 0;
    for (size_t r = 0; r < rl.size() && !want; ++r)
      if (ear::contains_answer(store.get(rl.entries[r].pid), q.answers)) want = r + 1;
    CHECK(labels.labels[i].rank == static_cast<int>(want));
  }
}

TEST_CASE("fold assignment is balanced and ignores input order") {
  std::vector<ear::QAExample> qa;
  for (int i = 0; i < 23; ++i) qa.push_back({"q" + std::to_string(i), "x", {"y"}});
  auto folds = ear::assign_folds(qa, 5, 1);
  std::vector<size_t> counts(5);
  for (auto f : folds) ++counts.at(f);
  CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <= 1);

  auto reversed = qa;
  std::reverse(reversed.begin(), reversed.end());
  auto folds_rev = ear::assign_folds(reversed, 5, 1);
  for (size_t i = 0; i < qa.size(); ++i) CHECK(folds[i] == folds_rev[qa.size() - 1 - i]);

  CHECK(ear::assign_folds(qa, 5, 1) == folds);
  CHECK(ear::assign_folds(qa, 5, 2) != folds);
  CHECK_THROWS_AS(ear::assign_folds(std::span(qa).first(3), 5, 1), std::invalid_argument);
}

TEST_CASE("training sets are deterministic and round-trip") {
  ear::Rng rng(12);
  ear::PassageStore store(testing::random_passages(rng, 120));
  auto idx = ear::Index::build(store, {});
  std::vector<ear::QAExample> qa;
  for (int i = 0; i < 12; ++i)
    qa.push_back({"q" + std::to_string(i), testing::random_text(rng, 2, 5), {testing::random_text(rng, 1, 2)}});
  ear::ConstructionConfig cfg;
  cfg.n_samples = 10;
  cfg.folds = 3;
  ear::StubSource source{ear::StubSampler(idx, store)};
  auto a = ear::build_training_set(idx, store, qa, cfg, source, true);
  auto b = ear::build_training_set(idx, store, qa, cfg, source, true);
  CHECK(a == b);
  REQUIRE(a.size() == qa.size());
  for (const auto& ex : a) {
    CHECK(ex.candidates.size() == 10);
    CHECK(ex.labels.size() == ex.candidates.size());
    CHECK(ex.top1->size() == ex.candidates.size());
    for (const auto& l : ex.labels) CHECK(((l.rank >= 1 && l.rank <= 100 && l.hit) || (l.rank == 101 && !l.hit)));
  }
  testing::TempDir dir("train");
  ear::write_training_set(dir.file("t.jsonl"), a);
  CHECK(ear::load_training_set(dir.file("t.jsonl")) == a);
  // questions differing only in fold-relevant seed see different samples
  cfg.seed = 99;
  CHECK(ear::build_training_set(idx, store, qa, cfg, source, true) != a);
}

TEST_CASE("training set construction truncates then deduplicates table candidates") {
  auto store = label_store();
  auto idx = ear::Index::build(store, {});
  std::vector<ear::QAExample> qa = {{"q0", "lighthouse keeper", {"Zorb Malten"}},
                                    {"q1", "keeper", {"isle"}}};
  ear::ExpansionTable table;
  table["q0"] = make_set({"zorb", "ZORB", "keeper", "pelican"});
  ear::ConstructionConfig cfg;
  cfg.n_samples = 3;
  cfg.folds = 2;
  auto out = ear::build_training_set(idx, store, qa, cfg, ear::TableSource(table), false);
  CHECK(texts_of(out[0].candidates) == std::vector<std::string>{"zorb", "keeper"});
  CHECK(out[0].candidates.requested_n == 3);
  CHECK(out[1].candidates.empty());
  CHECK(!out[0].top1);
}

TEST_CASE("stable hash is FNV-1a over a salted basis") {
  CHECK(ear::stable_hash("abc", 1) == ear::stable_hash("abc", 1));
  CHECK(ear::stable_hash("abc", 1) != ear::stable_hash("abc", 2));
  const uint64_t basis = ear::stable_hash("", 0);
  uint64_t h = basis;
  for (char c : std::string("abc")) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  CHECK(ear::stable_hash("abc", 0) == h);
}
