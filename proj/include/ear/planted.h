#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ear/corpus.h"
#include "ear/expansion.h"

namespace ear {

// Synthetic open-domain QA collection with a known best expansion.
//
// Each question names four topic terms. Exactly one passage holds the answer
// and mentions all four terms once; a variable number of shorter distractor
// passages repeat three of the four terms, so the bare question usually
// ranks the answer passage below several distractors. Among each question's
// sampled expansions, "useful" ones contain the answer phrase (unique to the
// answer passage) and lift it to rank 1, "context" ones pull distractors up,
// and "noise" ones barely move anything. In a fraction of questions "decoy"
// expansions name a wrong answer whose only passage lacks the topic terms:
// they look like useful expansions to a model that sees only (q, e) but are
// exposed by the passage they retrieve.
struct PlantedConfig {
  size_t train_questions = 200;
  size_t test_questions = 200;
  size_t candidates = 50;
  size_t min_distractors = 3;
  size_t max_distractors = 40;
  size_t junk_passages = 1000;
  double greedy_useful_rate = 0.3;
  double decoy_rate = 0.25;
  double hard_rate = 0.03;
  uint64_t seed = 13;
};

struct PlantedFixture {
  std::vector<Passage> passages;
  std::vector<QAExample> train;
  std::vector<QAExample> test;
  ExpansionTable train_expansions;
  ExpansionTable test_expansions;
};

PlantedFixture make_planted_fixture(const PlantedConfig& cfg = {});

// Writes corpus.jsonl, train.jsonl, test.jsonl, train_expansions.jsonl and
// test_expansions.jsonl into `dir`, creating it if needed.
void write_planted_fixture(const std::string& dir, const PlantedFixture& fx);

}  // namespace ear
