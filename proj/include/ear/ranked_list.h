#pragma once

#include <map>
#include <string>
#include <vector>

namespace ear {

struct ScoredPassage {
  std::string pid;
  double score = 0.0;

  friend bool operator==(const ScoredPassage&, const ScoredPassage&) = default;
};

// Ordered retrieval result for one query. Scores are non-increasing and
// passage ids are distinct.
struct RankedList {
  std::string qid;
  std::string tag;
  std::vector<ScoredPassage> entries;

  size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  // Checks both invariants; throws std::logic_error naming the violation.
  void validate() const;

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

// qid -> list. Ordered so that serialization is deterministic.
using Run = std::map<std::string, RankedList>;

// TREC run format, one line per entry: `qid Q0 pid rank score tag`.
// Scores are written in shortest round-trip form.
void write_run(const std::string& path, const Run& run);
std::string format_run(const Run& run);

// Ranks must start at 1 and increase by exactly 1 within each qid;
// violations raise InputError naming the line.
Run read_run(const std::string& path);

}  // namespace ear
