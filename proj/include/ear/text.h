#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ear {

// Ordered lowercase terms. Every token is nonempty and whitespace-free.
struct NormalizedText {
  std::vector<std::string> tokens;

  bool empty() const { return tokens.empty(); }
  size_t size() const { return tokens.size(); }
  std::string joined() const;

  friend bool operator==(const NormalizedText&, const NormalizedText&) = default;
};

// NFKC compatibility normalization with case folding, then split on every
// non-alphanumeric code point. Pure ASCII input takes a fast path that
// produces the same result.
NormalizedText normalize(std::string_view raw);

// Same segmentation as normalize() but without case folding, so callers can
// inspect the original casing of each token.
std::vector<std::string> tokenize_raw(std::string_view raw);

bool is_numeric_token(std::string_view token);
bool starts_uppercase(std::string_view raw_token);

// Porter (1980) suffix stripping. Input must already be lowercase.
std::string porter_stem(std::string_view word);

// The 33-word English stopword set used by Lucene's EnglishAnalyzer.
bool is_stopword(std::string_view token);

struct AnalyzerOptions {
  bool stemming = true;
  bool stopwords = true;

  friend bool operator==(const AnalyzerOptions&, const AnalyzerOptions&) = default;
};

// Index-side term pipeline: normalize, drop stopwords, stem.
std::vector<std::string> analyze(std::string_view raw, const AnalyzerOptions& opts);
std::vector<std::string> analyze_tokens(const std::vector<std::string>& normalized,
                                        const AnalyzerOptions& opts);

}  // namespace ear
