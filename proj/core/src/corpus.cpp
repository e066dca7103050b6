#include "affectfuse/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "affectfuse/common.hpp"
#include "affectfuse/error.hpp"
#include "csv.hpp"

namespace affectfuse::corpus {
namespace {

using json = nlohmann::json;

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string synthesized_id(std::size_t row) {
  std::string digits = std::to_string(row);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return digits;
}

std::optional<double> parse_decimal(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

BinaryLabel binary_from_number(double v, std::size_t row) {
  if (v == 0.0) return BinaryLabel::Negative;
  if (v == 1.0) return BinaryLabel::Positive;
  throw LabelError("row " + std::to_string(row) + ": binary label must be 0 or 1, got " +
                   json(v).dump());
}

BinaryLabel binary_from_string(std::string_view raw, const TaskSpec& task, std::size_t row) {
  const std::string s = lowercase_ascii(trim(raw));
  if (s == "1" || s == task.positive_keyword()) return BinaryLabel::Positive;
  if (s == "0" || s == task.negative_keyword()) return BinaryLabel::Negative;
  throw LabelError("row " + std::to_string(row) + ": unrecognized binary label '" +
                   std::string(raw) + "'");
}

double real_from_number(double v, std::size_t row) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw LabelError("row " + std::to_string(row) + ": real label outside [0,1]: " +
                     json(v).dump());
  }
  return v;
}

double real_from_string(std::string_view raw, std::size_t row) {
  const auto v = parse_decimal(raw);
  if (!v) {
    throw LabelError("row " + std::to_string(row) + ": real label is not a decimal: '" +
                     std::string(raw) + "'");
  }
  return real_from_number(*v, row);
}

Label label_from_json(const json& value, const TaskSpec& task, std::size_t row) {
  const bool binary = task.label_kind() == LabelKind::Binary;
  if (value.is_number()) {
    const double v = value.get<double>();
    return binary ? Label{binary_from_number(v, row)} : Label{real_from_number(v, row)};
  }
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    return binary ? Label{binary_from_string(s, task, row)} : Label{real_from_string(s, row)};
  }
  throw LabelError("row " + std::to_string(row) + ": label must be a number or string");
}

Label label_from_cell(std::string_view cell, const TaskSpec& task, std::size_t row) {
  if (task.label_kind() == LabelKind::Real) return real_from_string(cell, row);
  if (const auto v = parse_decimal(cell)) return binary_from_number(*v, row);
  return binary_from_string(cell, task, row);
}

class IdRegistry {
 public:
  std::string claim(std::string id, std::size_t row) {
    if (id.empty()) id = synthesized_id(row);
    if (!seen_.insert(id).second) throw ParseError(row, "duplicate id '" + id + "'");
    return id;
  }

 private:
  std::unordered_set<std::string> seen_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<detail::CsvRecord> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (lowercase_ascii(trim(header[i])) == lowercase_ascii(name)) return i;
    }
    return std::nullopt;
  }
};

CsvTable read_table(std::istream& in) {
  auto records = detail::read_csv(in);
  if (records.empty()) throw EmptyDataset("CSV input has no header row");
  CsvTable table;
  table.header = std::move(records.front());
  table.rows.assign(std::make_move_iterator(records.begin() + 1),
                    std::make_move_iterator(records.end()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != table.header.size()) {
      throw ParseError(r, "expected " + std::to_string(table.header.size()) + " fields, got " +
                              std::to_string(table.rows[r].size()));
    }
  }
  return table;
}

std::vector<json> read_jsonl(std::istream& in) {
  std::vector<json> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json parsed;
    try {
      parsed = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(rows.size(), std::string("malformed JSON: ") + e.what());
    }
    if (!parsed.is_object()) throw ParseError(rows.size(), "expected a JSON object");
    rows.push_back(std::move(parsed));
  }
  return rows;
}

std::string json_id(const json& row, std::size_t index) {
  if (!row.contains("id") || row["id"].is_null()) return {};
  if (!row["id"].is_string()) throw ParseError(index, "field 'id' must be a string");
  return row["id"].get<std::string>();
}

std::string json_text(const json& row, std::size_t index) {
  if (!row.contains("text")) throw ParseError(index, "missing field 'text'");
  if (!row["text"].is_string()) throw ParseError(index, "field 'text' must be a string");
  return row["text"].get<std::string>();
}

const json& json_label(const json& row, const TaskSpec& task, std::size_t index) {
  if (task.trait() && row.contains("labels")) {
    const auto& labels = row["labels"];
    if (!labels.is_object()) throw ParseError(index, "field 'labels' must be an object");
    const std::string key(trait_letter(*task.trait()));
    if (!labels.contains(key)) throw ParseError(index, "missing trait '" + key + "' in 'labels'");
    return labels[key];
  }
  if (!row.contains("label")) throw ParseError(index, "missing field 'label'");
  return row["label"];
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open dataset file '" + path.string() + "'");
  return in;
}

}  // namespace

double label_value(const Label& label) {
  if (const auto* b = std::get_if<BinaryLabel>(&label)) {
    return *b == BinaryLabel::Positive ? 1.0 : 0.0;
  }
  return std::get<double>(label);
}

std::string_view trait_letter(Trait trait) {
  switch (trait) {
    case Trait::O: return "O";
    case Trait::C: return "C";
    case Trait::E: return "E";
    case Trait::A: return "A";
    case Trait::N: return "N";
  }
  return "?";
}

std::string_view trait_name(Trait trait) {
  switch (trait) {
    case Trait::O: return "Openness";
    case Trait::C: return "Conscientiousness";
    case Trait::E: return "Extraversion";
    case Trait::A: return "Agreeableness";
    case Trait::N: return "Neuroticism";
  }
  return "?";
}

std::optional<Trait> trait_from_letter(std::string_view letter) {
  for (auto t : kTraits) {
    if (trait_letter(t) == letter) return t;
  }
  return std::nullopt;
}

TaskSpec TaskSpec::sentiment() { return {TaskKind::Sentiment, std::nullopt}; }
TaskSpec TaskSpec::suicide() { return {TaskKind::Suicide, std::nullopt}; }
TaskSpec TaskSpec::personality(Trait trait) { return {TaskKind::Personality, trait}; }

TaskSpec TaskSpec::parse(std::string_view name) {
  if (name == "sentiment") return sentiment();
  if (name == "suicide") return suicide();
  constexpr std::string_view kPrefix = "personality:";
  if (name.starts_with(kPrefix)) {
    if (auto trait = trait_from_letter(name.substr(kPrefix.size()))) return personality(*trait);
  }
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

LabelKind TaskSpec::label_kind() const {
  return kind_ == TaskKind::Personality ? LabelKind::Real : LabelKind::Binary;
}

std::string_view TaskSpec::positive_keyword() const {
  switch (kind_) {
    case TaskKind::Sentiment: return "positive";
    case TaskKind::Suicide: return "yes";
    case TaskKind::Personality: return "high";
  }
  return {};
}

std::string_view TaskSpec::negative_keyword() const {
  switch (kind_) {
    case TaskKind::Sentiment: return "negative";
    case TaskKind::Suicide: return "no";
    case TaskKind::Personality: return "low";
  }
  return {};
}

std::string TaskSpec::name() const {
  switch (kind_) {
    case TaskKind::Sentiment: return "sentiment";
    case TaskKind::Suicide: return "suicide";
    case TaskKind::Personality: return "personality:" + std::string(trait_letter(*trait_));
  }
  return {};
}

void DatasetSplit::validate() const {
  if (train.empty() || dev.empty() || test.empty()) {
    throw EmptyDataset("train, dev and test splits must all be non-empty");
  }
  std::unordered_set<std::string_view> ids;
  for (const auto* part : {&train, &dev, &test}) {
    for (const auto& ex : *part) {
      if (!ids.insert(ex.id).second) throw SizeError("id '" + ex.id + "' appears in two splits");
    }
  }
}

FileFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = lowercase_ascii(path.extension().string());
  if (ext == ".csv") return FileFormat::Csv;
  if (ext == ".jsonl" || ext == ".json") return FileFormat::Jsonl;
  throw ConfigError("cannot infer dataset format from '" + path.string() + "'");
}

std::vector<Example> load_dataset(std::istream& in, FileFormat format, const TaskSpec& task) {
  std::vector<Example> examples;
  IdRegistry ids;
  if (format == FileFormat::Jsonl) {
    const auto rows = read_jsonl(in);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      Example ex;
      ex.text = json_text(rows[r], r);
      ex.label = label_from_json(json_label(rows[r], task, r), task, r);
      ex.id = ids.claim(json_id(rows[r], r), r);
      examples.push_back(std::move(ex));
    }
  } else {
    const auto table = read_table(in);
    const auto text_col = table.column("text");
    if (!text_col) throw ParseError(0, "CSV header lacks a 'text' column");
    std::optional<std::size_t> label_col;
    if (task.trait()) label_col = table.column(trait_letter(*task.trait()));
    if (!label_col) label_col = table.column("label");
    if (!label_col) throw ParseError(0, "CSV header lacks a label column");
    const auto id_col = table.column("id");
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      Example ex;
      ex.text = row[*text_col];
      ex.label = label_from_cell(row[*label_col], task, r);
      ex.id = ids.claim(id_col ? row[*id_col] : std::string{}, r);
      examples.push_back(std::move(ex));
    }
  }
  if (examples.empty()) throw EmptyDataset("dataset has no rows");
  return examples;
}

std::vector<Example> load_dataset(const std::filesystem::path& path, FileFormat format,
                                  const TaskSpec& task) {
  auto in = open_input(path);
  return load_dataset(in, format, task);
}

std::map<Trait, std::vector<Example>> load_personality(std::istream& in, FileFormat format) {
  // Buffer the input so every trait can read it.
  std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::map<Trait, std::vector<Example>> out;
  for (auto trait : kTraits) {
    std::istringstream copy(data);
    out.emplace(trait, load_dataset(copy, format, TaskSpec::personality(trait)));
  }
  return out;
}

std::map<Trait, std::vector<Example>> load_personality(const std::filesystem::path& path,
                                                       FileFormat format) {
  auto in = open_input(path);
  return load_personality(in, format);
}

void save_jsonl(std::ostream& out, const std::vector<Example>& examples) {
  for (const auto& ex : examples) {
    json row;
    row["id"] = ex.id;
    row["text"] = ex.text;
    if (const auto* b = std::get_if<BinaryLabel>(&ex.label)) {
      row["label"] = static_cast<int>(*b);
    } else {
      row["label"] = std::get<double>(ex.label);
    }
    out << row.dump() << '\n';
  }
}

std::vector<Example> filter_max_chars(std::vector<Example> examples, std::size_t max_chars) {
  std::erase_if(examples, [&](const Example& ex) { return utf8_length(ex.text) > max_chars; });
  return examples;
}

DatasetSplit split_dataset(std::vector<Example> examples, SplitSizes sizes, std::uint64_t seed) {
  const std::size_t requested = sizes.train + sizes.dev + sizes.test;
  if (requested > examples.size()) {
    throw SizeError("requested " + std::to_string(requested) + " examples but only " +
                    std::to_string(examples.size()) + " are available");
  }
  Rng rng(seed);
  rng.shuffle(std::span<Example>(examples));

  DatasetSplit split;
  auto it = std::make_move_iterator(examples.begin());
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes.train));
  it += static_cast<std::ptrdiff_t>(sizes.train);
  split.dev.assign(it, it + static_cast<std::ptrdiff_t>(sizes.dev));
  it += static_cast<std::ptrdiff_t>(sizes.dev);
  split.test.assign(it, it + static_cast<std::ptrdiff_t>(sizes.test));
  return split;
}

}  // namespace affectfuse::corpus
