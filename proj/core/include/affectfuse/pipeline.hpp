#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affectfuse/corpus.hpp"
#include "affectfuse/evaluation.hpp"
#include "affectfuse/fusion.hpp"
#include "affectfuse/llm.hpp"
#include "affectfuse/run_config.hpp"

namespace affectfuse::cli {

enum class Stage { Collect, Featurize, Tune, Train, Evaluate, Report };

std::string_view to_string(Stage stage);

struct PipelineOptions {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  bool mock_llm = false;              // forces the synthetic responder
  bool mock_embeddings = false;       // forces seeded mock embeddings
  std::size_t jobs = 1;               // parallel tuning trials
  /// Replaces the transport chosen from the config (tests).
  std::shared_ptr<llm::ChatTransport> transport;
};

/// Artifact-driven experiment runner. Every stage writes its outputs under
/// the output directory and is skipped when those outputs are newer than
/// all of their inputs; the effective configuration is itself an input, so
/// editing it invalidates everything downstream.
///
///   responses/<problem>.jsonl        collected chat records, split order
///   responses/cache.jsonl            response cache shared by all problems
///   features/<problem>__<modality>__<split>.fmat1
///   trials/<problem>__<plan>.jsonl   tuning trial logs
///   models/<problem>__<plan>.mlp1    final models
///   reports/results.json             every (plan, problem) EvalReport
///   reports/report_{accuracy,uar}.{md,csv}
class Pipeline {
 public:
  /// Validates inputs (data files, embedding files for plans that need
  /// them). Throws ConfigError.
  Pipeline(RunConfig config, PipelineOptions options = {});
  ~Pipeline();

  /// Runs every stage up to and including `last`. Stage failures other than
  /// ConfigError are rethrown as StageError naming the stage.
  void run(Stage last = Stage::Report);

  /// Rewrites the response cache with one line per prompt; returns the
  /// number of lines dropped.
  std::size_t compact_cache();

  const RunConfig& config() const { return config_; }
  std::uint64_t seed() const { return config_.seed; }

  /// Chat requests sent by this instance.
  std::size_t llm_requests() const { return llm_requests_; }
  /// Stage runs that found everything fresh, and stage units actually executed.
  std::size_t cached_units() const { return cached_units_; }
  std::size_t executed_units() const { return executed_units_; }

  std::filesystem::path results_path() const;
  std::filesystem::path report_path(eval::Metric metric, eval::TableFormat format) const;

 private:
  struct ProblemData;

  void collect();
  void featurize();
  void tune();
  void train();
  void evaluate();
  void report();

  ProblemData& data(const corpus::TaskSpec& problem);
  std::vector<fusion::Modality> needed_modalities() const;
  std::vector<fusion::FusionPlan> trained_plans() const;
  bool needs_responses() const;

  std::filesystem::path stamp_path() const;
  std::filesystem::path responses_path(const corpus::TaskSpec& problem) const;
  std::filesystem::path feature_path(const corpus::TaskSpec& problem, fusion::Modality m,
                                     std::string_view split) const;
  std::filesystem::path trial_path(const corpus::TaskSpec& problem, const fusion::FusionPlan& plan) const;
  std::filesystem::path model_path(const corpus::TaskSpec& problem, const fusion::FusionPlan& plan) const;
  std::vector<std::filesystem::path> data_inputs() const;
  std::filesystem::path embedding_file(std::string_view pattern, const corpus::TaskSpec& problem) const;

  std::vector<llm::ChatRecord> load_responses(const corpus::TaskSpec& problem) const;
  fusion::ModalityFeatures load_features(const corpus::TaskSpec& problem,
                                         const std::vector<fusion::Modality>& modalities) const;
  fusion::SplitTargets targets(const corpus::TaskSpec& problem);
  nn::MLPConfig base_config(const corpus::TaskSpec& problem) const;

  void write_stamp();
  void skip(Stage stage, const std::string& unit);
  void did(Stage stage, const std::string& unit);

  RunConfig config_;
  PipelineOptions options_;
  std::map<std::string, std::unique_ptr<ProblemData>> data_;
  std::size_t llm_requests_ = 0;
  std::size_t cached_units_ = 0;
  std::size_t executed_units_ = 0;
};

}  // namespace affectfuse::cli
