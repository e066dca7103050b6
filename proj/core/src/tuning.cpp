#include "affectfuse/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "affectfuse/error.hpp"
#include "json_codec.hpp"

namespace affectfuse::tuning {
namespace {

using json = nlohmann::json;

json trial_to_json(const TrialResult& t) {
  return json{{"trial_index", t.trial_index},
              {"config", detail::config_to_json(t.config)},
              {"dev_metric", t.dev_metric ? json(*t.dev_metric) : json(nullptr)},
              {"diverged", t.diverged()},
              {"train_seconds", t.train_seconds}};
}

TrialResult trial_from_json(const json& j) {
  TrialResult t;
  t.trial_index = j.at("trial_index").get<int>();
  t.config = detail::config_from_json(j.at("config"));
  if (!j.at("dev_metric").is_null()) t.dev_metric = j.at("dev_metric").get<double>();
  t.train_seconds = j.at("train_seconds").get<double>();
  return t;
}

bool better(double candidate, double incumbent, Objective objective) {
  return objective == Objective::MaximizeAccuracy ? candidate > incumbent : candidate < incumbent;
}

}  // namespace

void SearchSpace::validate() const {
  if (n_hidden_min < 0 || n_hidden_max > 3 || n_hidden_min > n_hidden_max) {
    throw RangeError("n_hidden bounds must satisfy 0 <= min <= max <= 3");
  }
  if (units_min < 64 || units_max > 512 || units_min > units_max) {
    throw RangeError("first_units bounds must satisfy 64 <= min <= max <= 512");
  }
  if (!(learning_rate_min >= 1e-6 && learning_rate_max <= 10.0 && learning_rate_min <= learning_rate_max)) {
    throw RangeError("learning_rate bounds must satisfy 1e-6 <= min <= max <= 10");
  }
  if (n_samples < 1) throw RangeError("n_samples must be at least 1");
}

nn::MLPConfig sample(const SearchSpace& space, std::uint64_t seed, int index, const nn::MLPConfig& base) {
  space.validate();
  if (index < 0 || index >= space.n_samples) {
    throw RangeError("trial index " + std::to_string(index) + " outside [0, n_samples)");
  }
  const std::string tag = std::to_string(index);
  Rng rng(derive_seed(seed, {"sample", tag}));

  nn::MLPConfig config = base;
  const auto n_choices = static_cast<std::uint64_t>(space.n_hidden_max - space.n_hidden_min + 1);
  config.n_hidden = space.n_hidden_min + static_cast<int>(rng.below(n_choices));

  const double log_units = rng.uniform(std::log(space.units_min), std::log(space.units_max));
  config.first_units = std::clamp(static_cast<int>(std::lround(std::exp(log_units))), space.units_min,
                                  space.units_max);

  const double log_lr = rng.uniform(std::log(space.learning_rate_min), std::log(space.learning_rate_max));
  config.learning_rate = std::clamp(std::exp(log_lr), space.learning_rate_min, space.learning_rate_max);

  config.seed = derive_seed(seed, {"trial", tag});
  return config;
}

Objective objective_for(nn::LossKind loss) {
  return loss == nn::LossKind::MAE ? Objective::MinimizeMAE : Objective::MaximizeAccuracy;
}

const TrialResult& select_best(std::span<const TrialResult> trials, Objective objective) {
  const TrialResult* best = nullptr;
  for (const auto& t : trials) {
    if (t.diverged()) continue;
    if (best == nullptr || better(*t.dev_metric, *best->dev_metric, objective) ||
        (*t.dev_metric == *best->dev_metric && t.trial_index < best->trial_index)) {
      best = &t;
    }
  }
  if (best == nullptr) throw AllTrialsDiverged("every tuning trial diverged");
  return *best;
}

std::vector<TrialResult> read_trial_log(const std::filesystem::path& path) {
  std::vector<TrialResult> trials;
  std::ifstream in(path);
  if (!in) return trials;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      trials.push_back(trial_from_json(json::parse(line)));
    } catch (const std::exception&) {
      // A partially written final line from an interrupted run.
      break;
    }
  }
  return trials;
}

TuningOutcome random_search(const SearchSpace& space, std::uint64_t seed, const nn::MLPConfig& base,
                            const TrialFunction& evaluate, Objective objective,
                            const TuneOptions& options) {
  space.validate();
  std::vector<nn::MLPConfig> configs;
  for (int i = 0; i < space.n_samples; ++i) configs.push_back(sample(space, seed, i, base));

  std::map<int, TrialResult> done;
  if (options.trial_log) {
    for (auto& t : read_trial_log(*options.trial_log)) {
      const bool current = t.trial_index >= 0 && t.trial_index < space.n_samples &&
                           t.config == configs[static_cast<std::size_t>(t.trial_index)];
      if (current) done.insert_or_assign(t.trial_index, std::move(t));
    }
    // Rewrite with only the reusable trials so a torn last line or stale
    // entries never sit in front of new appends.
    if (std::filesystem::exists(*options.trial_log)) {
      std::ofstream out(*options.trial_log, std::ios::trunc);
      for (const auto& [index, t] : done) out << trial_to_json(t).dump() << '\n';
    }
  }

  std::vector<int> pending;
  for (int i = 0; i < space.n_samples; ++i) {
    if (!done.contains(i)) pending.push_back(i);
  }

  std::mutex mutex;
  std::exception_ptr error;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const int index = pending[k];
      TrialResult result;
      result.trial_index = index;
      result.config = configs[static_cast<std::size_t>(index)];
      const auto start = std::chrono::steady_clock::now();
      try {
        result.dev_metric = evaluate(result.config);
        if (!std::isfinite(*result.dev_metric)) result.dev_metric.reset();
      } catch (const NonFiniteLoss&) {
        result.dev_metric.reset();
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next = pending.size();
        return;
      }
      result.train_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::lock_guard lock(mutex);
      if (options.trial_log) {
        if (options.trial_log->has_parent_path()) {
          std::filesystem::create_directories(options.trial_log->parent_path());
        }
        std::ofstream out(*options.trial_log, std::ios::app);
        out << trial_to_json(result).dump() << '\n';
      }
      done.insert_or_assign(index, std::move(result));
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, pending.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);

  TuningOutcome outcome;
  for (auto& [index, result] : done) outcome.trials.push_back(std::move(result));
  const auto& best = select_best(outcome.trials, objective);
  outcome.best = best.config;
  outcome.best_metric = *best.dev_metric;
  outcome.best_index = best.trial_index;
  return outcome;
}

double dev_metric(const nn::MLPModel& model, MatrixView x_dev, std::span<const double> y_dev,
                  Objective objective) {
  const auto p = nn::predict_proba(model, x_dev);
  if (p.empty()) throw DimMismatch("dev split is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (objective == Objective::MaximizeAccuracy) {
      total += ((p[i] >= 0.5) == (y_dev[i] >= 0.5)) ? 1.0 : 0.0;
    } else {
      total += std::abs(p[i] - y_dev[i]);
    }
  }
  return total / static_cast<double>(p.size());
}

TuningOutcome tune(const SearchSpace& space, std::uint64_t seed, const nn::MLPConfig& base,
                   MatrixView x_train, std::span<const double> y_train, MatrixView x_dev,
                   std::span<const double> y_dev, const TuneOptions& options) {
  const Objective objective = objective_for(base.loss);
  auto evaluate = [&](const nn::MLPConfig& config) {
    const auto model = nn::train(config, x_train, y_train, x_dev, y_dev);
    return dev_metric(model, x_dev, y_dev, objective);
  };
  return random_search(space, seed, base, evaluate, objective, options);
}

}  // namespace affectfuse::tuning
