#include "affectfuse/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <set>

#include "affectfuse/error.hpp"
#include "affectfuse/featurize.hpp"
#include "affectfuse/fusion.hpp"

namespace affectfuse::eval {
namespace {

EvalReport report_from(const ConfusionCounts& c, std::size_t n_excluded) {
  if (c.total() == 0) throw EmptyEvaluation("nothing left to evaluate");
  EvalReport r;
  r.counts = c;
  r.accuracy = accuracy(c);
  r.uar = uar(c);
  r.per_class_recall = {static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp),
                        static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)};
  r.n_evaluated = c.total();
  r.n_excluded = n_excluded;
  return r;
}

void tally(ConfusionCounts& c, bool predicted, bool actual) {
  if (predicted && actual) ++c.tp;
  if (predicted && !actual) ++c.fp;
  if (!predicted && !actual) ++c.tn;
  if (!predicted && actual) ++c.fn;
}

std::string percent(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v * 100.0, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

struct Column {
  std::string title;
  std::vector<std::string> problems;  // averaged when more than one
};

std::vector<Column> columns() {
  std::vector<Column> cols = {{"Sentiment", {"sentiment"}}, {"Suicide", {"suicide"}}};
  Column avg{"Personality Average", {}};
  for (auto t : corpus::kTraits) avg.problems.push_back(corpus::TaskSpec::personality(t).name());
  cols.push_back(avg);
  for (auto t : corpus::kTraits) {
    cols.push_back({std::string(corpus::trait_letter(t)), {corpus::TaskSpec::personality(t).name()}});
  }
  return cols;
}

std::vector<std::string> row_order(const ResultGrid& results) {
  std::set<std::string> present;
  for (const auto& [key, report] : results) present.insert(key.first);
  std::vector<std::string> order;
  auto take = [&](const std::string& plan) {
    if (present.erase(plan) > 0) order.push_back(plan);
  };
  take(std::string(kBaselinePlan));
  for (const auto& plan : fusion::standard_plans()) take(plan.to_string());
  order.insert(order.end(), present.begin(), present.end());
  return order;
}

}  // namespace

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw EmptyEvaluation("accuracy of an empty evaluation");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double uar(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0) {
    throw DegenerateClass("UAR needs both classes in the ground truth");
  }
  // tp/P + tn/N over a common denominator, so there is a single rounding and
  // balanced sets give exactly the accuracy.
  const auto p = c.tp + c.fn;
  const auto n = c.tn + c.fp;
  return static_cast<double>(c.tp * n + c.tn * p) / static_cast<double>(2 * p * n);
}

BaselineOutcome baseline_classify(std::string_view response, const corpus::TaskSpec& task) {
  bool positive = false;
  bool negative = false;
  for (const auto& token : features::tokenize(response)) {
    positive = positive || token == task.positive_keyword();
    negative = negative || token == task.negative_keyword();
  }
  if (positive == negative) return BaselineOutcome::Excluded;
  return positive ? BaselineOutcome::Positive : BaselineOutcome::Negative;
}

EvalReport evaluate(std::span<const double> probabilities, std::span<const double> labels,
                    double threshold) {
  if (probabilities.size() != labels.size()) {
    throw LengthMismatch("predictions and labels differ in length");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    tally(c, probabilities[i] >= threshold, labels[i] >= threshold);
  }
  return report_from(c, 0);
}

EvalReport evaluate(std::span<const BaselineOutcome> outcomes, std::span<const double> labels,
                    double threshold) {
  if (outcomes.size() != labels.size()) {
    throw LengthMismatch("predictions and labels differ in length");
  }
  ConfusionCounts c;
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (outcomes[i] == BaselineOutcome::Excluded) {
      ++excluded;
      continue;
    }
    tally(c, outcomes[i] == BaselineOutcome::Positive, labels[i] >= threshold);
  }
  return report_from(c, excluded);
}

std::string_view to_string(Metric metric) {
  return metric == Metric::Accuracy ? "accuracy" : "uar";
}

std::string report_table(const ResultGrid& results, Metric metric, TableFormat format) {
  const auto cols = columns();
  const auto plans = row_order(results);

  // cells[row][col], empty when the result is missing
  std::vector<std::vector<std::optional<double>>> cells;
  for (const auto& plan : plans) {
    auto& row = cells.emplace_back();
    for (const auto& col : cols) {
      double sum = 0.0;
      bool complete = true;
      for (const auto& problem : col.problems) {
        auto it = results.find({plan, problem});
        if (it == results.end()) {
          complete = false;
          break;
        }
        sum += metric == Metric::Accuracy ? it->second.accuracy : it->second.uar;
      }
      row.push_back(complete ? std::optional(sum / static_cast<double>(col.problems.size()))
                             : std::nullopt);
    }
  }

  std::string out;
  const bool md = format == TableFormat::Markdown;
  if (md) {
    out += "| Plan |";
    for (const auto& col : cols) out += " " + col.title + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out += "---:|";
    out += '\n';
  } else {
    out += "plan";
    for (const auto& col : cols) out += "," + col.title;
    out += '\n';
  }

  std::vector<std::string> best(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::optional<double> top;
    for (const auto& row : cells) {
      if (row[c] && (!top || *row[c] > *top)) top = row[c];
    }
    if (top) best[c] = percent(*top);
  }

  for (std::size_t r = 0; r < plans.size(); ++r) {
    out += md ? "| " + plans[r] + " |" : plans[r];
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::string cell;
      if (cells[r][c]) {
        cell = percent(*cells[r][c]);
        if (md && cell == best[c]) cell = "**" + cell + "**";
      } else if (md) {
        cell = "--";
      }
      out += md ? " " + cell + " |" : "," + cell;
    }
    out += '\n';
  }
  return out;
}

}  // namespace affectfuse::eval
