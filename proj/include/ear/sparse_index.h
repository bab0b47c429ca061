#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ear/corpus.h"
#include "ear/ranked_list.h"
#include "ear/text.h"

namespace ear {

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;
  AnalyzerOptions analyzer;
  // Prepend the title to the body before analysis.
  bool index_titles = false;

  void validate() const;
  friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Posting {
  uint32_t doc;
  uint32_t tf;

  friend bool operator==(const Posting&, const Posting&) = default;
};

// Okapi BM25 with the non-negative idf ln(1 + (N - df + 0.5) / (df + 0.5)).
inline double bm25_idf(double doc_count, double df) {
  return std::log(1.0 + (doc_count - df + 0.5) / (df + 0.5));
}

inline double bm25_term_weight(double idf, double tf, double dl, double avgdl, double k1, double b) {
  const double ratio = avgdl > 0.0 ? dl / avgdl : 0.0;
  return idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * ratio));
}

// Document scores are rounded to 40 significant bits. Summing the same
// per-term weights in a different order can differ in the last bit, and
// without rounding two passages with mathematically equal scores could
// escape the passage-id tie rule.
inline double round_score(double s) {
  if (s == 0.0 || !std::isfinite(s)) return s;
  int exp = 0;
  const double m = std::frexp(s, &exp);
  return std::ldexp(std::round(std::ldexp(m, 40)), exp - 40);
}

// Immutable inverted index. Documents are numbered in ascending passage-id
// order, so posting order and the score tie rule agree.
class Index {
 public:
  static Index build(const PassageStore& store, const Bm25Params& params);
  static Index load(const std::string& path);
  void save(const std::string& path) const;

  const Bm25Params& params() const { return params_; }
  size_t doc_count() const { return pids_.size(); }
  size_t term_count() const { return terms_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }

  const std::string& pid(uint32_t doc) const { return pids_.at(doc); }
  std::optional<uint32_t> doc_of(std::string_view pid) const;
  uint32_t doc_length(uint32_t doc) const { return doc_lengths_.at(doc); }

  // Terms in lexicographic order.
  std::span<const std::string> terms() const { return terms_; }
  // Postings for an analyzed term, sorted by document number.
  std::span<const Posting> postings(std::string_view term) const;
  size_t df(std::string_view term) const { return postings(term).size(); }
  // Zero for terms outside the vocabulary.
  double idf(std::string_view term) const;

  std::vector<std::string> analyze_query(std::string_view text) const;

  // Sum over query terms (with multiplicity) of the BM25 term weight.
  // Throws std::out_of_range for an unknown pid.
  double bm25_score(const NormalizedText& query, std::string_view pid) const;

  // Exact top-k by score, ties by ascending passage id, positive scores only.
  RankedList search(std::string_view query_text, size_t k, std::string qid = {}) const;
  RankedList search_terms(std::span<const std::string> analyzed_terms, size_t k, std::string qid = {}) const;

  // Elementwise identical to sequential search(); output order follows input.
  std::vector<RankedList> batch_search(std::span<const std::string> queries, size_t k,
                                       unsigned workers = 1) const;

  friend bool operator==(const Index&, const Index&) = default;

 private:
  Bm25Params params_;
  std::vector<std::string> pids_;
  std::vector<uint32_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
  std::vector<std::string> terms_;
  std::vector<uint64_t> offsets_;  // terms_.size() + 1 entries into postings_
  std::vector<Posting> postings_;
  std::unordered_map<std::string, uint32_t> term_ids_;
  std::unordered_map<std::string, uint32_t> doc_ids_;
  std::vector<double> length_norm_;  // k1 * (1 - b + b * dl / avgdl)

  void finalize();
};

}  // namespace ear
