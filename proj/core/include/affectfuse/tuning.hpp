#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "affectfuse/common.hpp"
#include "affectfuse/neuralnet.hpp"

namespace affectfuse::tuning {

/// Random-search space. Bounds may be narrowed but never widened beyond
/// N in [0, 3], U in [64, 512], alpha in [1e-6, 10].
struct SearchSpace {
  int n_hidden_min = 0;
  int n_hidden_max = 3;
  int units_min = 64;
  int units_max = 512;
  double learning_rate_min = 1e-6;
  double learning_rate_max = 10.0;
  int n_samples = 20;

  /// Throws RangeError on inverted or out-of-range bounds or n_samples < 1.
  void validate() const;
};

/// Trial `index` of the search: N uniform, U and alpha log-uniform.
/// Everything except (n_hidden, first_units, learning_rate, seed) is copied
/// from `base`. Deterministic in (seed, index).
nn::MLPConfig sample(const SearchSpace& space, std::uint64_t seed, int index,
                     const nn::MLPConfig& base = {});

enum class Objective { MaximizeAccuracy, MinimizeMAE };

/// Accuracy for classification losses, MAE for regression.
Objective objective_for(nn::LossKind loss);

struct TrialResult {
  nn::MLPConfig config;
  std::optional<double> dev_metric;  // empty when the trial diverged
  double train_seconds = 0.0;
  int trial_index = 0;

  bool diverged() const { return !dev_metric.has_value(); }
};

struct TuningOutcome {
  nn::MLPConfig best;
  double best_metric = 0.0;
  int best_index = 0;
  std::vector<TrialResult> trials;  // sorted by trial_index
};

/// Best finite trial; ties go to the lower trial index. Throws
/// AllTrialsDiverged when no trial has a metric.
const TrialResult& select_best(std::span<const TrialResult> trials, Objective objective);

/// Scores one configuration on the dev split. Throwing NonFiniteLoss marks
/// the trial as diverged.
using TrialFunction = std::function<double(const nn::MLPConfig&)>;

struct TuneOptions {
  std::size_t workers = 1;
  /// JSONL trial log; trials already present are reused, new ones appended.
  std::optional<std::filesystem::path> trial_log;
};

TuningOutcome random_search(const SearchSpace& space, std::uint64_t seed, const nn::MLPConfig& base,
                            const TrialFunction& evaluate, Objective objective,
                            const TuneOptions& options = {});

/// Dev accuracy (threshold 0.5, ties positive) or dev MAE of a trained model.
double dev_metric(const nn::MLPModel& model, MatrixView x_dev, std::span<const double> y_dev,
                  Objective objective);

/// Random search where each trial trains an MLP on the train split and is
/// scored on the dev split with the objective implied by `base.loss`.
TuningOutcome tune(const SearchSpace& space, std::uint64_t seed, const nn::MLPConfig& base,
                   MatrixView x_train, std::span<const double> y_train, MatrixView x_dev,
                   std::span<const double> y_dev, const TuneOptions& options = {});

/// Reads every complete trial from a log (missing file: empty).
std::vector<TrialResult> read_trial_log(const std::filesystem::path& path);

}  // namespace affectfuse::tuning
