#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ear/corpus.h"
#include "ear/sparse_index.h"

namespace ear {

struct FeatureVector {
  std::vector<double> values;
  std::string schema_id;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Retrieval-independent features of (question, expansion). Tokens are the
// output of normalize(); "novel" tokens are expansion tokens absent from the
// question. Counts and fractions are over token occurrences.
//
//   0  bias                    constant 1
//   1  expansion_tokens        token count of the expansion
//   2  overlap_fraction        share of expansion tokens that occur in the question
//   3  novel_fraction          1 - overlap_fraction (0 for an empty expansion)
//   4  novel_idf_max           max corpus idf over novel tokens
//   5  novel_idf_mean          mean corpus idf over novel tokens
//   6  numeric_tokens          tokens made only of digits
//   7  capitalized_tokens      raw tokens whose first character is uppercase
//   8  char3_jaccard           Jaccard of character-trigram sets of the
//                              space-joined normalized texts
//
// Corpus idf is the index's BM25 idf of the analyzed token; stopwords and
// out-of-vocabulary tokens contribute 0.
inline constexpr std::string_view kRiSchema = "ear-ri-v1";
inline constexpr size_t kRiDim = 9;

// Retrieval-dependent schema: the nine features above followed by features
// of the top-1 passage d retrieved for the expanded query.
//
//   9  top1_bm25               BM25 score of d for the expanded query
//  10  top1_novel_overlap      share of novel expansion tokens found in d
//  11  top1_question_overlap   share of distinct non-stopword question tokens
//                              found in d (all distinct tokens if every one
//                              is a stopword)
//  12  top1_length             normalized token count of d
//  13  top1_margin_positive    1 if d's score exceeds the rank-2 score (or
//                              nothing else scored), else 0
//
// All five are 0 when the expanded query retrieves nothing.
inline constexpr std::string_view kRdSchema = "ear-rd-v1";
inline constexpr size_t kRdDim = 14;

size_t schema_dim(std::string_view schema_id);
std::span<const std::string_view> feature_names(std::string_view schema_id);

FeatureVector featurize_ri(const Index& index, std::string_view question, std::string_view expansion);

// `top1` is the passage retrieved first by expanded_query(question, expansion),
// or null when that query retrieves nothing.
FeatureVector featurize_rd(const Index& index, std::string_view question, std::string_view expansion,
                           const Passage* top1, bool margin_positive);

// Runs the expanded queries (depth 2) and featurizes each candidate with
// its live top-1 passage.
std::vector<FeatureVector> featurize_rd_batch(const Index& index, const PassageStore& store,
                                              std::string_view question,
                                              std::span<const std::string> expansions, unsigned workers = 1);

double char3_jaccard(std::string_view a, std::string_view b);

}  // namespace ear
