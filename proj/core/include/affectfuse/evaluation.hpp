#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affectfuse/corpus.hpp"

namespace affectfuse::eval {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// (tp + tn) / total. Throws EmptyEvaluation on zero total.
double accuracy(const ConfusionCounts& c);

/// Mean of positive and negative recall. Throws DegenerateClass when a
/// class is absent from the ground truth.
double uar(const ConfusionCounts& c);

enum class BaselineOutcome { Positive, Negative, Excluded };

/// Whole-token, case-insensitive keyword match: exactly one of the task's
/// two keywords decides the class, both or neither exclude the example.
BaselineOutcome baseline_classify(std::string_view response, const corpus::TaskSpec& task);

inline constexpr double kThreshold = 0.5;

struct EvalReport {
  double accuracy = 0.0;
  double uar = 0.0;
  std::size_t n_evaluated = 0;
  std::size_t n_excluded = 0;
  std::array<double, 2> per_class_recall{};  // negative, positive
  ConfusionCounts counts;

  bool operator==(const EvalReport&) const = default;
};

/// Probabilities at or above the threshold count as positive. Labels are
/// binarized the same way. Throws LengthMismatch or EmptyEvaluation.
EvalReport evaluate(std::span<const double> probabilities, std::span<const double> labels,
                    double threshold = kThreshold);

/// Excluded outcomes are dropped from the counts and tallied.
EvalReport evaluate(std::span<const BaselineOutcome> outcomes, std::span<const double> labels,
                    double threshold = kThreshold);

enum class Metric { Accuracy, UAR };
enum class TableFormat { Markdown, CSV };

std::string_view to_string(Metric metric);

/// Keyed by (plan string, problem name). Problem names follow
/// corpus::TaskSpec::name(); the baseline row uses the plan string "baseline".
using ResultGrid = std::map<std::pair<std::string, std::string>, EvalReport>;

inline constexpr std::string_view kBaselinePlan = "baseline";

/// One table for one metric: baseline first, then the standard plans in
/// table order, then any other plans alphabetically. Only plans present in
/// `results` get a row. The personality average is filled only when all
/// five traits are present. Percentages carry two decimals; in Markdown the
/// best value of every column is bolded.
std::string report_table(const ResultGrid& results, Metric metric, TableFormat format);

}  // namespace affectfuse::eval
