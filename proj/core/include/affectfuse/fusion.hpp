#pragma once

#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "affectfuse/featurize.hpp"
#include "affectfuse/neuralnet.hpp"

namespace affectfuse::fusion {

enum class TextSource { OriginalText, LLMResponse };
enum class Featurizer { Embedding, BoW };

/// A text source processed by one featurizer: one branch of the pipeline.
struct Modality {
  TextSource source = TextSource::OriginalText;
  Featurizer featurizer = Featurizer::Embedding;

  auto operator<=>(const Modality&) const = default;
};

/// "text+emb", "text+bow", "chat+emb" or "chat+bow".
std::string to_string(Modality modality);

enum class FusionMode { Single, Early, Late };

class FusionPlan {
 public:
  /// Throws ConfigError when the modality count does not fit the mode
  /// (Single needs one, Early/Late at least two) or a modality repeats.
  FusionPlan(std::vector<Modality> modalities, FusionMode mode);

  static FusionPlan single(Modality modality) { return FusionPlan({modality}, FusionMode::Single); }

  const std::vector<Modality>& modalities() const { return modalities_; }
  FusionMode mode() const { return mode_; }

  /// Canonical plan string, e.g. "late:text+emb&chat+emb".
  std::string to_string() const;

  bool operator==(const FusionPlan&) const = default;

 private:
  std::vector<Modality> modalities_;
  FusionMode mode_;
};

/// The fourteen trained plans of the results grid, in table order: four
/// singles, five early combinations, five late combinations.
std::vector<FusionPlan> standard_plans();

/// Row-wise concatenation in input order. Throws EmptyList on no input,
/// IdMismatch unless every matrix has the same ids in the same order.
features::FeatureMatrix early_fuse(std::span<const features::FeatureMatrix> parts);

/// Element-wise mean. Throws EmptyList or LengthMismatch.
std::vector<double> late_fuse(std::span<const std::vector<double>> probabilities);

struct SplitFeatures {
  features::FeatureMatrix train;
  features::FeatureMatrix dev;
  features::FeatureMatrix test;
};

struct SplitTargets {
  std::vector<double> train;
  std::vector<double> dev;
  std::vector<double> test;
};

using ModalityFeatures = std::map<Modality, SplitFeatures>;

/// Tuned configuration per Single or Early plan, keyed by the plan string.
using TunedConfigs = std::map<std::string, nn::MLPConfig>;

/// The Single/Early plans whose models a plan needs: the plan itself, or
/// one Single plan per member of a Late plan.
std::vector<FusionPlan> trained_components(const FusionPlan& plan);

/// Concatenated train/dev/test features for a Single or Early plan.
SplitFeatures plan_features(const FusionPlan& plan, const ModalityFeatures& features);

struct PlanResult {
  std::vector<double> test_probabilities;
  std::vector<nn::MLPModel> models;  // one per trained component
};

/// Trains every component with its tuned configuration and predicts the
/// test split; Late plans average their members' probabilities. Missing
/// features or configurations are reported before any training starts.
PlanResult run_plan(const FusionPlan& plan, const ModalityFeatures& features,
                    const SplitTargets& targets, const TunedConfigs& configs);

}  // namespace affectfuse::fusion
