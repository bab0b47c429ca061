#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ear/expansion.h"
#include "ear/features.h"

namespace ear {

enum class Variant { kRI, kRD };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);
std::string_view schema_for(Variant v);

struct HiddenLayer {
  size_t width = 0;
  std::vector<double> weights;  // width x dim, row-major
  std::vector<double> bias;     // width
  std::vector<double> output;   // width

  friend bool operator==(const HiddenLayer&, const HiddenLayer&) = default;
};

// Scores an expansion; LOWER means a better (lower estimated rank) expansion.
// Inputs are multiplied elementwise by `scale` before the affine map (or the
// single ReLU hidden layer when present).
struct ScorerModel {
  Variant variant = Variant::kRI;
  std::string schema_id{kRiSchema};
  std::string generator_tag = "*";
  std::vector<double> scale;
  std::vector<double> weights;
  std::optional<HiddenLayer> hidden;

  size_t dim() const { return scale.size(); }
  size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  void validate() const;

  static ScorerModel zeros(Variant variant);

  friend bool operator==(const ScorerModel&, const ScorerModel&) = default;
};

// Throws std::invalid_argument when the feature schema differs from the model's.
double score(const ScorerModel& m, const FeatureVector& f);

// d score / d parameters, in the order of ScorerModel::parameters().
std::vector<double> score_gradient(const ScorerModel& m, const FeatureVector& f);

struct RankLoss {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d score
};

// Sum over pairs with r_i < r_j of max(0, s_i - s_j + (r_j - r_i) * alpha).
// An active pair (argument > 0) adds +1 to grad_i and -1 to grad_j; the
// subgradient at the kink is 0.
RankLoss rank_loss(std::span<const double> scores, std::span<const RankLabel> labels, double alpha);

struct TrainConfig {
  double alpha = 0.01;
  size_t epochs = 2;
  size_t group_batch = 8;
  double learning_rate = 0.05;
  uint64_t seed = 0;
  size_t hidden_width = 0;

  void validate() const;
  static TrainConfig defaults_for(Variant v);
};

// Featurized candidates of one question with their rank labels.
struct FeatureGroup {
  std::string qid;
  std::vector<FeatureVector> features;
  std::vector<RankLabel> labels;
};

// Builds training groups; RD needs the recorded top-1 ids and throws
// std::invalid_argument when they are absent.
std::vector<FeatureGroup> featurize_examples(const Index& index, const PassageStore& store,
                                             std::span<const TrainingExample> examples, Variant variant);

// Mean over groups of rank_loss, and its gradient in parameter order.
struct ObjectiveValue {
  double loss = 0.0;
  std::vector<double> grad;
};
ObjectiveValue objective(const ScorerModel& m, std::span<const FeatureGroup> groups, double alpha);

struct TrainResult {
  ScorerModel model;
  std::vector<double> epoch_losses;  // objective over all groups after each epoch
};

// Mini-batch Adam over whole question groups. Every group needs at least two
// candidates. Deterministic for a fixed seed.
TrainResult train(std::span<const FeatureGroup> groups, const TrainConfig& cfg, Variant variant,
                  std::string generator_tag = "*");

struct RerankContext {
  const Index& index;
  const PassageStore& store;
  unsigned workers = 1;
};

std::vector<FeatureVector> featurize_candidates(const RerankContext& ctx, Variant variant,
                                                std::string_view question, const CandidateSet& cs);

// Index of the lowest-scoring candidate, earliest on ties. cs must be nonempty.
size_t select_best_index(const ScorerModel& m, const RerankContext& ctx, std::string_view question,
                         const CandidateSet& cs);
const ExpansionCandidate& select_best(const ScorerModel& m, const RerankContext& ctx,
                                      std::string_view question, const CandidateSet& cs);

size_t argmin_first(std::span<const double> scores);

// Models keyed by generator tag; "*" is the shared fallback.
class RerankerBundle {
 public:
  void add(ScorerModel m);
  bool empty() const { return models_.empty(); }
  const std::map<std::string, ScorerModel>& models() const { return models_; }
  // Model for `tag`, else the shared model, else null.
  const ScorerModel* find(GeneratorTag tag) const;

  void save(const std::string& path) const;
  static RerankerBundle load(const std::string& path);
  std::string to_json() const;
  static RerankerBundle from_json(const std::string& text);

 private:
  std::map<std::string, ScorerModel> models_;
};

}  // namespace ear
