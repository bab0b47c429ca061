#include "ear/features.h"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <unordered_set>

#include "ear/expansion.h"

namespace ear {

namespace {

constexpr std::array<std::string_view, kRdDim> kNames = {
    "bias",           "expansion_tokens",   "overlap_fraction",      "novel_fraction",
    "novel_idf_max",  "novel_idf_mean",     "numeric_tokens",        "capitalized_tokens",
    "char3_jaccard",  "top1_bm25",          "top1_novel_overlap",    "top1_question_overlap",
    "top1_length",    "top1_margin_positive"};

double token_idf(const Index& index, const std::string& tok) {
  const auto& opts = index.params().analyzer;
  if (opts.stopwords && is_stopword(tok)) return 0.0;
  return index.idf(opts.stemming ? porter_stem(tok) : tok);
}

std::unordered_set<std::string> trigrams(const std::string& s) {
  std::unordered_set<std::string> out;
  for (size_t i = 0; i + 3 <= s.size(); ++i) out.insert(s.substr(i, 3));
  return out;
}

struct RiParts {
  FeatureVector fv;
  std::vector<std::string> novel;
};

RiParts ri_parts(const Index& index, std::string_view question, std::string_view expansion) {
  const auto q = normalize(question);
  const auto e = normalize(expansion);
  const std::unordered_set<std::string> q_set(q.tokens.begin(), q.tokens.end());

  RiParts parts;
  auto& v = parts.fv.values;
  v.assign(kRiDim, 0.0);
  parts.fv.schema_id = std::string(kRiSchema);
  v[0] = 1.0;
  v[1] = static_cast<double>(e.size());

  size_t overlap = 0;
  double idf_sum = 0.0, idf_max = 0.0;
  for (const auto& tok : e.tokens) {
    if (q_set.count(tok)) {
      ++overlap;
    } else {
      parts.novel.push_back(tok);
      double idf = token_idf(index, tok);
      idf_sum += idf;
      idf_max = std::max(idf_max, idf);
    }
    if (is_numeric_token(tok)) v[6] += 1.0;
  }
  if (!e.empty()) {
    v[2] = static_cast<double>(overlap) / static_cast<double>(e.size());
    v[3] = 1.0 - v[2];
  }
  if (!parts.novel.empty()) {
    v[4] = idf_max;
    v[5] = idf_sum / static_cast<double>(parts.novel.size());
  }
  for (const auto& raw : tokenize_raw(expansion))
    if (starts_uppercase(raw)) v[7] += 1.0;
  v[8] = char3_jaccard(q.joined(), e.joined());
  return parts;
}

}  // namespace

size_t schema_dim(std::string_view schema_id) {
  if (schema_id == kRiSchema) return kRiDim;
  if (schema_id == kRdSchema) return kRdDim;
  throw std::invalid_argument("unknown feature schema '" + std::string(schema_id) + "'");
}

std::span<const std::string_view> feature_names(std::string_view schema_id) {
  return std::span<const std::string_view>(kNames).first(schema_dim(schema_id));
}

double char3_jaccard(std::string_view a, std::string_view b) {
  auto ta = trigrams(std::string(a));
  auto tb = trigrams(std::string(b));
  if (ta.empty() && tb.empty()) return 0.0;
  size_t inter = 0;
  for (const auto& g : ta) inter += tb.count(g);
  return static_cast<double>(inter) / static_cast<double>(ta.size() + tb.size() - inter);
}

FeatureVector featurize_ri(const Index& index, std::string_view question, std::string_view expansion) {
  return ri_parts(index, question, expansion).fv;
}

FeatureVector featurize_rd(const Index& index, std::string_view question, std::string_view expansion,
                           const Passage* top1, bool margin_positive) {
  auto parts = ri_parts(index, question, expansion);
  FeatureVector fv = std::move(parts.fv);
  fv.schema_id = std::string(kRdSchema);
  fv.values.resize(kRdDim, 0.0);
  if (!top1) return fv;

  const auto d = normalize(top1->text);
  const std::unordered_set<std::string> d_set(d.tokens.begin(), d.tokens.end());
  auto& v = fv.values;
  v[9] = index.bm25_score(normalize(expanded_query(question, expansion)), top1->id);

  if (!parts.novel.empty()) {
    size_t found = 0;
    for (const auto& tok : parts.novel) found += d_set.count(tok);
    v[10] = static_cast<double>(found) / static_cast<double>(parts.novel.size());
  }

  std::vector<std::string> q_distinct;
  std::unordered_set<std::string> seen;
  const auto q = normalize(question);
  for (const auto& tok : q.tokens)
    if (!is_stopword(tok) && seen.insert(tok).second) q_distinct.push_back(tok);
  if (q_distinct.empty())
    for (const auto& tok : q.tokens)
      if (seen.insert(tok).second) q_distinct.push_back(tok);
  if (!q_distinct.empty()) {
    size_t found = 0;
    for (const auto& tok : q_distinct) found += d_set.count(tok);
    v[11] = static_cast<double>(found) / static_cast<double>(q_distinct.size());
  }

  v[12] = static_cast<double>(d.size());
  v[13] = margin_positive ? 1.0 : 0.0;
  return fv;
}

std::vector<FeatureVector> featurize_rd_batch(const Index& index, const PassageStore& store,
                                              std::string_view question,
                                              std::span<const std::string> expansions, unsigned workers) {
  std::vector<std::string> queries;
  queries.reserve(expansions.size());
  for (const auto& e : expansions) queries.push_back(expanded_query(question, e));
  auto lists = index.batch_search(queries, 2, workers);
  std::vector<FeatureVector> out;
  out.reserve(expansions.size());
  for (size_t i = 0; i < expansions.size(); ++i) {
    const auto& entries = lists[i].entries;
    if (entries.empty()) {
      out.push_back(featurize_rd(index, question, expansions[i], nullptr, false));
      continue;
    }
    bool margin = entries.size() < 2 || entries[0].score > entries[1].score;
    out.push_back(featurize_rd(index, question, expansions[i], &store.get(entries[0].pid), margin));
  }
  return out;
}

}  // namespace ear
