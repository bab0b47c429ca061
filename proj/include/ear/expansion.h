#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ear/corpus.h"
#include "ear/sparse_index.h"

namespace ear {

enum class GeneratorTag { kAnswer, kSentence, kTitle, kStub, kExternal };

std::string_view to_string(GeneratorTag tag);
// Throws std::invalid_argument for names outside the closed tag set.
GeneratorTag parse_generator_tag(std::string_view name);

struct ExpansionCandidate {
  std::string text;
  GeneratorTag tag = GeneratorTag::kExternal;
  uint64_t sample_seed = 0;

  friend bool operator==(const ExpansionCandidate&, const ExpansionCandidate&) = default;
};

struct CandidateSet {
  std::string qid;
  std::vector<ExpansionCandidate> candidates;
  size_t requested_n = 0;
  std::optional<size_t> cap;

  size_t size() const { return candidates.size(); }
  bool empty() const { return candidates.empty(); }
  const ExpansionCandidate& operator[](size_t i) const { return candidates[i]; }

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

struct RankLabel {
  size_t index = 0;
  int rank = 0;
  bool hit = false;

  friend bool operator==(const RankLabel&, const RankLabel&) = default;
};

struct ConstructionConfig {
  size_t n_samples = 50;
  size_t k_retrieve = 100;
  int max_rank = 101;
  size_t folds = 5;
  uint64_t seed = 0;
  unsigned workers = 1;

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct TrainingExample {
  std::string qid;
  std::string question;
  size_t fold = 0;
  CandidateSet candidates;
  std::vector<RankLabel> labels;
  // Top-1 passage id retrieved by each expanded query ("" when nothing
  // scored). Present for retrieval-dependent training.
  std::optional<std::vector<std::string>> top1;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

// The single place the expanded query string is formed.
std::string expanded_query(std::string_view question, std::string_view expansion);

// Term-compositional stand-in for a sampling generator: each candidate mixes
// corpus terms that co-occur with the question and random distractor terms.
class StubSampler {
 public:
  StubSampler(const Index& index, const PassageStore& store) : index_(index), store_(store) {}

  // Deterministic per (question, n, seed); candidate texts pairwise distinct.
  CandidateSet sample(std::string_view qid, std::string_view question, size_t n, uint64_t seed) const;

 private:
  const Index& index_;
  const PassageStore& store_;
};

// Candidates grouped by qid, file order preserved within each group.
using ExpansionTable = std::map<std::string, CandidateSet>;

// Rows are {qid, generator_tag, text}. Unknown tags are an error. Rows whose
// text is blank are skipped with a warning, as are (but kept) rows whose qid
// is not in `known_qids` when that list is given.
ExpansionTable load_expansions(const std::string& path,
                               const std::vector<QAExample>* known_qids = nullptr,
                               std::vector<std::string>* warnings = nullptr);
void write_expansions(const std::string& path, const ExpansionTable& table);

// Keeps the first candidate of every normalized text, preserving order.
CandidateSet dedup(const CandidateSet& cs);
// Keeps the first min(n, size) candidates. n must be >= 1.
CandidateSet truncate(const CandidateSet& cs, size_t n);
// Per-tag subsets in first-appearance order of the tags.
std::vector<CandidateSet> split_by_tag(const CandidateSet& cs);

struct LabelResult {
  std::vector<RankLabel> labels;
  std::vector<std::string> top1;
};

// Issues every expanded query at depth k_retrieve. The label is the 1-based
// rank of the first answer passage, or max_rank when none is retrieved.
LabelResult label_candidates(const Index& index, const PassageStore& store, const QAExample& q,
                             const CandidateSet& cs, const ConstructionConfig& cfg);

// Produces candidates for one training question. `fold` is the question's
// held-out fold; a trained generator would be the one not fit on that fold.
class ExpansionSource {
 public:
  virtual ~ExpansionSource() = default;
  virtual CandidateSet generate(const QAExample& q, size_t fold, const ConstructionConfig& cfg) const = 0;
};

class StubSource final : public ExpansionSource {
 public:
  explicit StubSource(StubSampler sampler) : sampler_(std::move(sampler)) {}
  CandidateSet generate(const QAExample& q, size_t fold, const ConstructionConfig& cfg) const override;

 private:
  StubSampler sampler_;
};

class TableSource final : public ExpansionSource {
 public:
  explicit TableSource(const ExpansionTable& table) : table_(table) {}
  CandidateSet generate(const QAExample& q, size_t fold, const ConstructionConfig& cfg) const override;

 private:
  const ExpansionTable& table_;
};

// Balanced deterministic split: questions are ordered by a seeded hash of
// their qid and dealt round-robin, so assignment ignores input order.
std::vector<size_t> assign_folds(std::span<const QAExample> qa, size_t folds, uint64_t seed);

// Every question gets candidates from `source`, truncated to n_samples,
// deduplicated, then labeled. Output follows input order.
std::vector<TrainingExample> build_training_set(const Index& index, const PassageStore& store,
                                                std::span<const QAExample> qa_train,
                                                const ConstructionConfig& cfg,
                                                const ExpansionSource& source, bool record_top1);

void write_training_set(const std::string& path, std::span<const TrainingExample> examples);
std::vector<TrainingExample> load_training_set(const std::string& path);

// 64-bit FNV-1a over the bytes of s, starting from a salted basis.
uint64_t stable_hash(std::string_view s, uint64_t salt = 0);

}  // namespace ear
