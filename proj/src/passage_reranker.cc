#include "ear/passage_reranker.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "ear/random.h"

namespace ear {

FeatureVector passage_features(const Index& index, const PassageStore& store, std::string_view question,
                               std::string_view pid) {
  FeatureVector fv;
  fv.schema_id = std::string(kPassageSchema);
  fv.values.assign(kPassageDim, 0.0);
  auto& v = fv.values;
  v[0] = 1.0;
  const auto q_norm = normalize(question);
  v[1] = index.bm25_score(q_norm, pid);

  const auto& opts = index.params().analyzer;
  auto q_terms = analyze_tokens(q_norm.tokens, opts);
  std::sort(q_terms.begin(), q_terms.end());
  q_terms.erase(std::unique(q_terms.begin(), q_terms.end()), q_terms.end());
  auto p_terms = analyze_tokens(store.tokens(pid), opts);
  const std::unordered_set<std::string> p_set(p_terms.begin(), p_terms.end());

  if (!q_terms.empty()) {
    double hit = 0.0, hit_idf = 0.0, total_idf = 0.0;
    for (const auto& t : q_terms) {
      const double idf = index.idf(t);
      total_idf += idf;
      if (p_set.count(t)) {
        hit += 1.0;
        hit_idf += idf;
      }
    }
    v[2] = hit / static_cast<double>(q_terms.size());
    v[3] = total_idf > 0.0 ? hit_idf / total_idf : 0.0;
  }
  v[4] = std::log1p(static_cast<double>(p_terms.size()));
  return fv;
}

double PassageScorer::logit(const FeatureVector& f) const {
  if (f.schema_id != kPassageSchema || f.values.size() != kPassageDim)
    throw std::invalid_argument("feature schema '" + f.schema_id + "' is not " + std::string(kPassageSchema));
  double z = 0.0;
  for (size_t k = 0; k < kPassageDim; ++k) z += weights[k] * ((f.values[k] - shift[k]) * scale[k]);
  return z;
}

double PassageScorer::probability(const FeatureVector& f) const { return 1.0 / (1.0 + std::exp(-logit(f))); }

void PassageScorer::validate() const {
  if (shift.size() != kPassageDim || scale.size() != kPassageDim || weights.size() != kPassageDim)
    throw std::invalid_argument("passage scorer has the wrong dimension");
  for (size_t k = 0; k < kPassageDim; ++k)
    if (!std::isfinite(shift[k]) || !std::isfinite(scale[k]) || !std::isfinite(weights[k]))
      throw std::invalid_argument("passage scorer has non-finite weights");
}

void PRTrainConfig::validate() const {
  if (train_depth < 1) throw std::invalid_argument("train depth must be at least 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

PassageScorer fit_passage_scorer(std::span<const FeatureVector> features, std::span<const int> labels,
                                 const PRTrainConfig& cfg, double* train_accuracy) {
  cfg.validate();
  if (features.size() != labels.size()) throw std::invalid_argument("features and labels differ in length");
  PassageScorer ps;
  if (!features.empty()) {
    const double n = static_cast<double>(features.size());
    for (size_t k = 1; k < kPassageDim; ++k) {
      double mean = 0.0, var = 0.0;
      for (const auto& f : features) mean += f.values.at(k);
      mean /= n;
      for (const auto& f : features) var += (f.values[k] - mean) * (f.values[k] - mean);
      const double sd = std::sqrt(var / n);
      ps.shift[k] = mean;
      ps.scale[k] = sd > 0.0 ? 1.0 / sd : 1.0;
    }
  }

  std::vector<double> mom(kPassageDim, 0.0), vel(kPassageDim, 0.0), grad(kPassageDim);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  size_t step = 0;
  std::vector<size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(cfg.seed, 0x9a55));
  for (size_t epoch = 0; epoch < cfg.epochs && !features.empty(); ++epoch) {
    rng.shuffle(std::span<size_t>(order));
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (size_t i = start; i < end; ++i) {
        const auto& f = features[order[i]];
        const double err = ps.probability(f) - labels[order[i]];
        for (size_t k = 0; k < kPassageDim; ++k) grad[k] += err * (f.values[k] - ps.shift[k]) * ps.scale[k];
      }
      const double n = static_cast<double>(end - start);
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (size_t k = 0; k < kPassageDim; ++k) {
        const double g = grad[k] / n;
        mom[k] = kBeta1 * mom[k] + (1.0 - kBeta1) * g;
        vel[k] = kBeta2 * vel[k] + (1.0 - kBeta2) * g * g;
        ps.weights[k] -= cfg.learning_rate * (mom[k] / c1) / (std::sqrt(vel[k] / c2) + kEps);
      }
    }
  }
  ps.trained = true;
  ps.validate();
  if (train_accuracy) {
    size_t correct = 0;
    for (size_t i = 0; i < features.size(); ++i)
      correct += (ps.probability(features[i]) >= 0.5) == (labels[i] == 1);
    *train_accuracy = features.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(features.size());
  }
  return ps;
}

PassageScorer train_passage_reranker(const Index& index, const PassageStore& store,
                                     std::span<const QAExample> qa_train, const PRTrainConfig& cfg,
                                     PRTrainStats* stats) {
  cfg.validate();
  if (qa_train.empty()) throw std::invalid_argument("no training questions");
  std::vector<FeatureVector> features;
  std::vector<int> labels;
  PRTrainStats local;
  for (const auto& q : qa_train) {
    auto rl = index.search(q.question, cfg.train_depth, q.qid);
    if (rl.empty()) {
      local.warnings.push_back("question " + q.qid + " retrieved no passages; skipped");
      continue;
    }
    AnswerMatcher matcher(q.answers);
    for (const auto& e : rl.entries) {
      features.push_back(passage_features(index, store, q.question, e.pid));
      labels.push_back(matcher.matches(store, e.pid) ? 1 : 0);
    }
  }
  local.instances = features.size();
  local.positives = static_cast<size_t>(std::count(labels.begin(), labels.end(), 1));
  auto ps = fit_passage_scorer(features, labels, cfg, &local.train_accuracy);
  if (stats) *stats = std::move(local);
  return ps;
}

RankedList rerank_passages(const PassageScorer& ps, const Index& index, const PassageStore& store,
                           std::string_view question, const RankedList& rl, size_t depth) {
  depth = std::min(depth, rl.entries.size());
  RankedList out = rl;
  if (depth <= 1) return out;

  struct Item {
    size_t rank;
    double logit;
    double prob;
  };
  std::vector<Item> items;
  items.reserve(depth);
  for (size_t i = 0; i < depth; ++i) {
    auto f = passage_features(index, store, question, rl.entries[i].pid);
    const double z = ps.logit(f);
    items.push_back({i, z, 1.0 / (1.0 + std::exp(-z))});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.logit > b.logit; });

  double base = 0.0;
  if (depth < rl.entries.size()) base = std::max(0.0, rl.entries[depth].score);
  for (size_t i = 0; i < depth; ++i) {
    out.entries[i].pid = rl.entries[items[i].rank].pid;
    out.entries[i].score = base + 1.0 + items[i].prob;
  }
  return out;
}

std::string PassageScorer::to_json() const {
  return nlohmann::json{{"format", "ear-passage-scorer"},
                        {"version", 1},
                        {"schema", kPassageSchema},
                        {"trained", trained},
                        {"shift", shift},
                        {"scale", scale},
                        {"weights", weights}}
      .dump(2);
}

PassageScorer PassageScorer::from_json(const std::string& text) {
  PassageScorer ps;
  try {
    auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "ear-passage-scorer" || j.value("version", 0) != 1 ||
        j.value("schema", "") != kPassageSchema)
      throw std::invalid_argument("not a passage scorer document");
    ps.trained = j.value("trained", false);
    if (j.contains("shift")) ps.shift = j["shift"].get<std::vector<double>>();
    ps.scale = j.at("scale").get<std::vector<double>>();
    ps.weights = j.at("weights").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed passage scorer: ") + e.what());
  }
  ps.validate();
  return ps;
}

void PassageScorer::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json() << '\n';
}

PassageScorer PassageScorer::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace ear
