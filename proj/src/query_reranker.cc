#include "ear/query_reranker.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ear/random.h"

namespace ear {

std::string_view to_string(Variant v) { return v == Variant::kRI ? "ri" : "rd"; }

Variant parse_variant(std::string_view name) {
  if (name == "ri" || name == "RI") return Variant::kRI;
  if (name == "rd" || name == "RD") return Variant::kRD;
  throw std::invalid_argument("unknown reranker variant '" + std::string(name) + "'");
}

std::string_view schema_for(Variant v) { return v == Variant::kRI ? kRiSchema : kRdSchema; }

// --- model ----------------------------------------------------------------

ScorerModel ScorerModel::zeros(Variant variant) {
  ScorerModel m;
  m.variant = variant;
  m.schema_id = std::string(schema_for(variant));
  m.scale.assign(schema_dim(m.schema_id), 1.0);
  m.weights.assign(m.dim(), 0.0);
  return m;
}

size_t ScorerModel::parameter_count() const {
  size_t n = weights.size();
  if (hidden) n += hidden->weights.size() + hidden->bias.size() + hidden->output.size();
  return n;
}

std::vector<double> ScorerModel::parameters() const {
  std::vector<double> p(weights);
  if (hidden) {
    p.insert(p.end(), hidden->weights.begin(), hidden->weights.end());
    p.insert(p.end(), hidden->bias.begin(), hidden->bias.end());
    p.insert(p.end(), hidden->output.begin(), hidden->output.end());
  }
  return p;
}

void ScorerModel::set_parameters(std::span<const double> p) {
  if (p.size() != parameter_count()) throw std::invalid_argument("parameter vector has the wrong length");
  auto it = p.begin();
  auto take = [&](std::vector<double>& dst) {
    std::copy(it, it + static_cast<ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<ptrdiff_t>(dst.size());
  };
  take(weights);
  if (hidden) {
    take(hidden->weights);
    take(hidden->bias);
    take(hidden->output);
  }
}

void ScorerModel::validate() const {
  if (schema_dim(schema_id) != dim()) throw std::invalid_argument("scale length does not match schema");
  if (schema_id != schema_for(variant)) throw std::invalid_argument("schema does not match variant");
  if (weights.size() != dim()) throw std::invalid_argument("weight length does not match schema");
  if (hidden) {
    if (hidden->weights.size() != hidden->width * dim() || hidden->bias.size() != hidden->width ||
        hidden->output.size() != hidden->width)
      throw std::invalid_argument("hidden layer dimensions are inconsistent");
  }
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(scale) || !finite(weights) ||
      (hidden && (!finite(hidden->weights) || !finite(hidden->bias) || !finite(hidden->output))))
    throw std::invalid_argument("model has non-finite parameters");
}

namespace {

void check_schema(const ScorerModel& m, const FeatureVector& f) {
  if (f.schema_id != m.schema_id || f.values.size() != m.dim())
    throw std::invalid_argument("feature schema '" + f.schema_id + "' does not match model schema '" +
                                m.schema_id + "'");
}

}  // namespace

double score(const ScorerModel& m, const FeatureVector& f) {
  check_schema(m, f);
  const size_t d = m.dim();
  double s = 0.0;
  for (size_t k = 0; k < d; ++k) s += m.weights[k] * (f.values[k] * m.scale[k]);
  if (m.hidden) {
    const auto& h = *m.hidden;
    for (size_t u = 0; u < h.width; ++u) {
      double a = h.bias[u];
      for (size_t k = 0; k < d; ++k) a += h.weights[u * d + k] * (f.values[k] * m.scale[k]);
      if (a > 0.0) s += h.output[u] * a;
    }
  }
  return s;
}

std::vector<double> score_gradient(const ScorerModel& m, const FeatureVector& f) {
  check_schema(m, f);
  const size_t d = m.dim();
  std::vector<double> g(m.parameter_count(), 0.0);
  for (size_t k = 0; k < d; ++k) g[k] = f.values[k] * m.scale[k];
  if (m.hidden) {
    const auto& h = *m.hidden;
    const size_t w_off = d, b_off = d + h.width * d, o_off = b_off + h.width;
    for (size_t u = 0; u < h.width; ++u) {
      double a = h.bias[u];
      for (size_t k = 0; k < d; ++k) a += h.weights[u * d + k] * (f.values[k] * m.scale[k]);
      if (a <= 0.0) continue;
      g[o_off + u] = a;
      g[b_off + u] = h.output[u];
      for (size_t k = 0; k < d; ++k) g[w_off + u * d + k] = h.output[u] * f.values[k] * m.scale[k];
    }
  }
  return g;
}

// --- loss -----------------------------------------------------------------

RankLoss rank_loss(std::span<const double> scores, std::span<const RankLabel> labels, double alpha) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  RankLoss out;
  out.grad.assign(scores.size(), 0.0);
  for (size_t i = 0; i < scores.size(); ++i) {
    for (size_t j = 0; j < scores.size(); ++j) {
      if (!(labels[i].rank < labels[j].rank)) continue;
      const double arg = scores[i] - scores[j] + (labels[j].rank - labels[i].rank) * alpha;
      if (arg > 0.0) {
        out.loss += arg;
        out.grad[i] += 1.0;
        out.grad[j] -= 1.0;
      }
    }
  }
  return out;
}

// --- training -------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (group_batch < 1) throw std::invalid_argument("group batch must be at least 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

TrainConfig TrainConfig::defaults_for(Variant v) {
  TrainConfig cfg;
  cfg.epochs = v == Variant::kRI ? 2 : 3;
  return cfg;
}

std::vector<FeatureGroup> featurize_examples(const Index& index, const PassageStore& store,
                                             std::span<const TrainingExample> examples, Variant variant) {
  std::vector<FeatureGroup> groups;
  groups.reserve(examples.size());
  for (const auto& ex : examples) {
    FeatureGroup g;
    g.qid = ex.qid;
    g.labels = ex.labels;
    if (variant == Variant::kRI) {
      for (const auto& c : ex.candidates.candidates) g.features.push_back(featurize_ri(index, ex.question, c.text));
    } else {
      if (!ex.top1)
        throw std::invalid_argument("retrieval-dependent training needs top-1 passages (question " + ex.qid + ")");
      std::vector<std::string> texts;
      for (const auto& c : ex.candidates.candidates) texts.push_back(c.text);
      g.features = featurize_rd_batch(index, store, ex.question, texts);
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

ObjectiveValue objective(const ScorerModel& m, std::span<const FeatureGroup> groups, double alpha) {
  ObjectiveValue out;
  out.grad.assign(m.parameter_count(), 0.0);
  if (groups.empty()) return out;
  std::vector<double> scores;
  for (const auto& g : groups) {
    scores.clear();
    for (const auto& f : g.features) scores.push_back(score(m, f));
    auto rl = rank_loss(scores, g.labels, alpha);
    out.loss += rl.loss;
    for (size_t i = 0; i < g.features.size(); ++i) {
      if (rl.grad[i] == 0.0) continue;
      auto sg = score_gradient(m, g.features[i]);
      for (size_t p = 0; p < sg.size(); ++p) out.grad[p] += rl.grad[i] * sg[p];
    }
  }
  const double n = static_cast<double>(groups.size());
  out.loss /= n;
  for (auto& g : out.grad) g /= n;
  return out;
}

TrainResult train(std::span<const FeatureGroup> groups, const TrainConfig& cfg, Variant variant,
                  std::string generator_tag) {
  cfg.validate();
  if (groups.empty()) throw std::invalid_argument("no training groups");
  ScorerModel m = ScorerModel::zeros(variant);
  m.generator_tag = std::move(generator_tag);
  const size_t d = m.dim();
  for (const auto& g : groups) {
    if (g.features.size() < 2)
      throw std::invalid_argument("question " + g.qid + " has fewer than two candidates");
    if (g.labels.size() != g.features.size())
      throw std::invalid_argument("question " + g.qid + " has misaligned labels");
    for (const auto& f : g.features) check_schema(m, f);
  }

  // Scale every feature by the reciprocal of its largest magnitude.
  std::vector<double> max_abs(d, 0.0);
  for (const auto& g : groups)
    for (const auto& f : g.features)
      for (size_t k = 0; k < d; ++k) max_abs[k] = std::max(max_abs[k], std::abs(f.values[k]));
  for (size_t k = 0; k < d; ++k) m.scale[k] = max_abs[k] > 0.0 ? 1.0 / max_abs[k] : 1.0;

  Rng rng(mix_seed(cfg.seed, 0x7a11));
  if (cfg.hidden_width > 0) {
    HiddenLayer h;
    h.width = cfg.hidden_width;
    const double r = 1.0 / std::sqrt(static_cast<double>(d));
    for (size_t i = 0; i < h.width * d; ++i) h.weights.push_back(rng.uniform(-r, r));
    h.bias.assign(h.width, 0.1);
    for (size_t u = 0; u < h.width; ++u) h.output.push_back(rng.uniform(-r, r));
    m.hidden = std::move(h);
  }

  std::vector<double> params = m.parameters();
  std::vector<double> mom(params.size(), 0.0), vel(params.size(), 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  size_t step = 0;

  std::vector<size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<FeatureGroup> batch;
  TrainResult result;
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<size_t>(order));
    for (size_t start = 0; start < order.size(); start += cfg.group_batch) {
      batch.clear();
      for (size_t i = start; i < std::min(order.size(), start + cfg.group_batch); ++i)
        batch.push_back(groups[order[i]]);
      auto obj = objective(m, batch, cfg.alpha);
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (size_t p = 0; p < params.size(); ++p) {
        mom[p] = kBeta1 * mom[p] + (1.0 - kBeta1) * obj.grad[p];
        vel[p] = kBeta2 * vel[p] + (1.0 - kBeta2) * obj.grad[p] * obj.grad[p];
        params[p] -= cfg.learning_rate * (mom[p] / c1) / (std::sqrt(vel[p] / c2) + kEps);
      }
      m.set_parameters(params);
    }
    result.epoch_losses.push_back(objective(m, groups, cfg.alpha).loss);
  }
  m.validate();
  result.model = std::move(m);
  return result;
}

// --- selection ------------------------------------------------------------

std::vector<FeatureVector> featurize_candidates(const RerankContext& ctx, Variant variant,
                                                std::string_view question, const CandidateSet& cs) {
  std::vector<FeatureVector> out;
  if (variant == Variant::kRI) {
    out.reserve(cs.size());
    for (const auto& c : cs.candidates) out.push_back(featurize_ri(ctx.index, question, c.text));
    return out;
  }
  std::vector<std::string> texts;
  texts.reserve(cs.size());
  for (const auto& c : cs.candidates) texts.push_back(c.text);
  return featurize_rd_batch(ctx.index, ctx.store, question, texts, ctx.workers);
}

size_t argmin_first(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmin of an empty score list");
  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i)
    if (scores[i] < scores[best]) best = i;
  return best;
}

size_t select_best_index(const ScorerModel& m, const RerankContext& ctx, std::string_view question,
                         const CandidateSet& cs) {
  if (cs.empty()) throw std::invalid_argument("cannot select from an empty candidate set");
  if (cs.size() == 1) return 0;
  auto features = featurize_candidates(ctx, m.variant, question, cs);
  std::vector<double> scores;
  scores.reserve(features.size());
  for (const auto& f : features) scores.push_back(score(m, f));
  return argmin_first(scores);
}

const ExpansionCandidate& select_best(const ScorerModel& m, const RerankContext& ctx,
                                      std::string_view question, const CandidateSet& cs) {
  return cs.candidates[select_best_index(m, ctx, question, cs)];
}

// --- bundle ---------------------------------------------------------------

namespace {

constexpr int kModelVersion = 1;

nlohmann::json model_to_json(const ScorerModel& m) {
  nlohmann::json j{{"format", "ear-scorer"},
                   {"version", kModelVersion},
                   {"schema", m.schema_id},
                   {"variant", to_string(m.variant)},
                   {"generator_tag", m.generator_tag},
                   {"scale", m.scale},
                   {"weights", m.weights}};
  if (m.hidden)
    j["hidden"] = {{"width", m.hidden->width},
                   {"weights", m.hidden->weights},
                   {"bias", m.hidden->bias},
                   {"output", m.hidden->output}};
  return j;
}

ScorerModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "ear-scorer") throw std::invalid_argument("not a scorer model document");
  if (j.value("version", 0) != kModelVersion)
    throw std::invalid_argument("unsupported scorer model version");
  ScorerModel m;
  m.variant = parse_variant(j.at("variant").get<std::string>());
  m.schema_id = j.at("schema").get<std::string>();
  m.generator_tag = j.value("generator_tag", "*");
  m.scale = j.at("scale").get<std::vector<double>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  if (j.contains("hidden")) {
    const auto& h = j["hidden"];
    m.hidden = HiddenLayer{h.at("width").get<size_t>(), h.at("weights").get<std::vector<double>>(),
                           h.at("bias").get<std::vector<double>>(), h.at("output").get<std::vector<double>>()};
  }
  m.validate();
  return m;
}

}  // namespace

void RerankerBundle::add(ScorerModel m) {
  m.validate();
  std::string tag = m.generator_tag;
  models_.insert_or_assign(std::move(tag), std::move(m));
}

const ScorerModel* RerankerBundle::find(GeneratorTag tag) const {
  auto it = models_.find(std::string(to_string(tag)));
  if (it != models_.end()) return &it->second;
  it = models_.find("*");
  return it == models_.end() ? nullptr : &it->second;
}

std::string RerankerBundle::to_json() const {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& [tag, m] : models_) models.push_back(model_to_json(m));
  return nlohmann::json{{"format", "ear-scorer-bundle"}, {"version", kModelVersion}, {"models", models}}.dump(2);
}

RerankerBundle RerankerBundle::from_json(const std::string& text) {
  RerankerBundle bundle;
  try {
    auto j = nlohmann::json::parse(text);
    if (j.value("format", "") == "ear-scorer") {
      bundle.add(model_from_json(j));
      return bundle;
    }
    if (j.value("format", "") != "ear-scorer-bundle" || j.value("version", 0) != kModelVersion)
      throw std::invalid_argument("not a scorer bundle document");
    for (const auto& m : j.at("models")) bundle.add(model_from_json(m));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed model document: ") + e.what());
  }
  return bundle;
}

void RerankerBundle::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json() << '\n';
}

RerankerBundle RerankerBundle::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace ear
