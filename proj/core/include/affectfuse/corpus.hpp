#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace affectfuse::corpus {

enum class BinaryLabel : std::uint8_t { Negative = 0, Positive = 1 };

/// Either a class label or a real value in [0, 1] (personality traits).
using Label = std::variant<BinaryLabel, double>;

/// 0/1 for binary labels, the value itself for real labels.
double label_value(const Label& label);

struct Example {
  std::string id;
  std::string text;
  Label label;

  bool operator==(const Example&) const = default;
};

enum class TaskKind { Sentiment, Suicide, Personality };
enum class Trait { O, C, E, A, N };
enum class LabelKind { Binary, Real };

inline constexpr std::array<Trait, 5> kTraits = {Trait::O, Trait::C, Trait::E, Trait::A, Trait::N};

std::string_view trait_letter(Trait trait);
std::string_view trait_name(Trait trait);
std::optional<Trait> trait_from_letter(std::string_view letter);

/// Which problem a dataset belongs to. Personality tasks are per trait.
class TaskSpec {
 public:
  static TaskSpec sentiment();
  static TaskSpec suicide();
  static TaskSpec personality(Trait trait);

  /// Inverse of name(): "sentiment", "suicide", "personality:E".
  static TaskSpec parse(std::string_view name);

  TaskKind kind() const { return kind_; }
  std::optional<Trait> trait() const { return trait_; }
  LabelKind label_kind() const;
  std::string_view positive_keyword() const;
  std::string_view negative_keyword() const;
  std::string name() const;

  bool operator==(const TaskSpec&) const = default;

 private:
  TaskSpec(TaskKind kind, std::optional<Trait> trait) : kind_(kind), trait_(trait) {}

  TaskKind kind_;
  std::optional<Trait> trait_;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
};

struct DatasetSplit {
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;

  /// Throws EmptyDataset if a part is empty, SizeError if ids overlap.
  void validate() const;
};

enum class FileFormat { Csv, Jsonl };

/// Picks the format from the extension (.csv, .jsonl/.json). Throws ConfigError otherwise.
FileFormat format_from_path(const std::filesystem::path& path);

/// Loads one labeled dataset. For personality tasks, the label is read from
/// `labels.<trait letter>` (JSONL) or the trait-letter column (CSV), falling
/// back to a plain `label` field.
std::vector<Example> load_dataset(std::istream& in, FileFormat format, const TaskSpec& task);
std::vector<Example> load_dataset(const std::filesystem::path& path, FileFormat format,
                                  const TaskSpec& task);

/// Loads a personality file once and materializes the five single-trait datasets.
std::map<Trait, std::vector<Example>> load_personality(std::istream& in, FileFormat format);
std::map<Trait, std::vector<Example>> load_personality(const std::filesystem::path& path,
                                                       FileFormat format);

/// Writes one JSON object per line with fields id, text, label.
void save_jsonl(std::ostream& out, const std::vector<Example>& examples);

/// Keeps examples of at most `max_chars` code points, order preserved.
std::vector<Example> filter_max_chars(std::vector<Example> examples, std::size_t max_chars = 512);

/// Seeded shuffle, then consecutive train/dev/test slices of the requested sizes.
DatasetSplit split_dataset(std::vector<Example> examples, SplitSizes sizes, std::uint64_t seed);

}  // namespace affectfuse::corpus
