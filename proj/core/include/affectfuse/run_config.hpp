#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affectfuse/corpus.hpp"
#include "affectfuse/featurize.hpp"
#include "affectfuse/llm.hpp"
#include "affectfuse/tuning.hpp"

namespace affectfuse::cli {

/// Either one file cut into train/dev/test, or three separate files.
/// Split entries are counts, or fractions when all three are at most 1 and
/// sum to 1 (the test part then takes the rounding remainder).
struct DataConfig {
  std::optional<std::filesystem::path> file;
  std::array<double, 3> split{};
  std::optional<std::uint64_t> split_seed;
  std::optional<std::filesystem::path> train;
  std::optional<std::filesystem::path> dev;
  std::optional<std::filesystem::path> test;
};

struct LlmConfig {
  bool mock = false;
  llm::ChatParams params;
  std::size_t concurrency = 4;
  double requests_per_second = 0.0;
};

/// Paths may contain "{problem}", replaced by the problem slug
/// ("sentiment", "suicide", "personality-E").
struct EmbeddingConfig {
  bool mock = false;
  std::size_t dim = 768;
  std::optional<std::string> text;
  std::optional<std::string> chat;
};

struct TrainingConfig {
  int max_epochs = 50;
  int batch_size = 32;
  int patience = 5;
};

struct RunConfig {
  corpus::TaskKind task = corpus::TaskKind::Sentiment;
  DataConfig data;
  std::optional<std::size_t> max_chars;  // suicide defaults to 512
  LlmConfig llm;
  EmbeddingConfig embeddings;
  features::BowOptions text_bow = features::text_bow_defaults();
  features::BowOptions chat_bow = features::response_bow_defaults();
  tuning::SearchSpace search;
  TrainingConfig training;
  std::vector<std::string> plans;  // parsed plan strings plus optionally "baseline"
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  /// Problems of the task: one, or five for personality.
  std::vector<corpus::TaskSpec> problems() const;
  /// Character cap applied before splitting, if any.
  std::optional<std::size_t> effective_max_chars() const;
  /// Canonical JSON of every field that influences results.
  std::string canonical_json() const;
};

/// Plans run when the config names none: every standard plan and the baseline.
std::vector<std::string> default_plans();

/// Strict parse: unknown keys, wrong types, bad plans or out-of-range
/// values raise ConfigError. Relative paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// Reads and parses a config file; relative paths resolve against its directory.
RunConfig load_run_config(const std::filesystem::path& path);

/// "personality:E" -> "personality-E".
std::string problem_slug(const corpus::TaskSpec& task);

/// "early:text+emb&chat+emb" -> "early-text-emb_chat-emb".
std::string plan_slug(std::string_view plan);

}  // namespace affectfuse::cli
