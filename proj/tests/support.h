#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ear/corpus.h"
#include "ear/random.h"
#include "ear/ranked_list.h"
#include "ear/text.h"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ear-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small vocabulary so that random corpora have shared terms, repeated
// terms and exact score ties. Includes stopwords and inflected forms.
inline const std::vector<std::string>& random_vocab() {
  static const std::vector<std::string> v = {
      "river", "rivers", "bank", "banking", "the",   "of",     "stone", "stones", "bridge", "king",
      "queen", "city",   "cities", "old",   "north", "south",  "war",   "wars",   "gold",   "ship",
      "ships", "and",    "a",      "red",   "green", "forest", "lake",  "tower",  "1066",   "2001"};
  return v;
}

inline std::string random_text(ear::Rng& rng, size_t min_len, size_t max_len) {
  const auto& v = random_vocab();
  const size_t n = min_len + rng.below(max_len - min_len + 1);
  std::string out;
  for (size_t i = 0; i < n; ++i) {
    if (!out.empty()) out.push_back(' ');
    std::string w = v[rng.below(v.size())];
    if (rng.bernoulli(0.1)) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    out += w;
  }
  return out;
}

inline std::vector<ear::Passage> random_passages(ear::Rng& rng, size_t n) {
  std::vector<ear::Passage> out;
  for (size_t i = 0; i < n; ++i)
    out.push_back({"d" + std::to_string(rng.next() % 1000000) + "_" + std::to_string(i), "",
                   random_text(rng, 1, 30)});
  return out;
}

// Brute-force BM25: analyzes every passage from scratch, scores every
// passage against every query term, sorts everything.
struct BruteForceBm25 {
  double k1 = 0.9;
  double b = 0.4;
  ear::AnalyzerOptions opts;
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> docs;

  BruteForceBm25(const std::vector<ear::Passage>& passages, double k1_, double b_, ear::AnalyzerOptions o = {})
      : k1(k1_), b(b_), opts(o) {
    for (const auto& p : passages) {
      ids.push_back(p.id);
      docs.push_back(ear::analyze(p.text, opts));
    }
  }

  double avgdl() const {
    double total = 0;
    for (const auto& d : docs) total += static_cast<double>(d.size());
    return docs.empty() ? 0.0 : total / static_cast<double>(docs.size());
  }

  double score(const std::vector<std::string>& query_terms, size_t doc) const {
    const double n = static_cast<double>(docs.size());
    const double avg = avgdl();
    double s = 0.0;
    for (const auto& t : query_terms) {
      double df = 0;
      for (const auto& d : docs) df += std::find(d.begin(), d.end(), t) != d.end() ? 1.0 : 0.0;
      const double tf = static_cast<double>(std::count(docs[doc].begin(), docs[doc].end(), t));
      if (tf == 0) continue;
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double dl = static_cast<double>(docs[doc].size());
      s += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avg));
    }
    return s;
  }

  // Same rounding as the index promises, done with integer arithmetic on
  // the bit pattern: round half away from zero at mantissa bit 40.
  static double to_40_bits(double s) {
    uint64_t bits;
    std::memcpy(&bits, &s, sizeof bits);
    const int exponent = static_cast<int>((bits >> 52) & 0x7ff);
    if (exponent == 0 || exponent == 0x7ff) return s;
    // 53-bit significand including the hidden bit; keep the top 40.
    uint64_t sig = (bits & ((uint64_t{1} << 52) - 1)) | (uint64_t{1} << 52);
    sig = (sig + (uint64_t{1} << 12)) >> 13;
    int e = exponent;
    if (sig >> 40) {
      sig >>= 1;
      ++e;
    }
    const uint64_t out = (bits & (uint64_t{1} << 63)) | (static_cast<uint64_t>(e) << 52) |
                         ((sig << 13) & ((uint64_t{1} << 52) - 1));
    double r;
    std::memcpy(&r, &out, sizeof r);
    return r;
  }

  std::vector<ear::ScoredPassage> search(const std::string& query, size_t k) const {
    const auto terms = ear::analyze(query, opts);
    const double n = static_cast<double>(docs.size());
    const double avg = avgdl();
    std::vector<double> idf;
    for (const auto& t : terms) {
      double df = 0;
      for (const auto& d : docs) df += std::find(d.begin(), d.end(), t) != d.end() ? 1.0 : 0.0;
      idf.push_back(std::log(1.0 + (n - df + 0.5) / (df + 0.5)));
    }
    std::vector<ear::ScoredPassage> all;
    for (size_t i = 0; i < docs.size(); ++i) {
      double s = 0.0;
      for (size_t j = 0; j < terms.size(); ++j) {
        const double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), terms[j]));
        if (tf == 0) continue;
        const double dl = static_cast<double>(docs[i].size());
        s += idf[j] * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avg));
      }
      if (s > 0.0) all.push_back({ids[i], to_40_bits(s)});
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      return x.score != y.score ? x.score > y.score : x.pid < y.pid;
    });
    if (all.size() > k) all.resize(k);
    return all;
  }
};

}  // namespace testing
