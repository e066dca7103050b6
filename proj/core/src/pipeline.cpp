#include "affectfuse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "affectfuse/error.hpp"
#include "affectfuse/featurize.hpp"
#include "affectfuse/neuralnet.hpp"
#include "affectfuse/plan_syntax.hpp"
#include "affectfuse/synthetic_llm.hpp"
#include "affectfuse/tuning.hpp"

namespace affectfuse::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using fusion::FusionMode;
using fusion::FusionPlan;
using fusion::Modality;

constexpr std::array<std::string_view, 3> kSplits = {"train", "dev", "test"};

// An output set is fresh when every output exists and none is older than
// any input.
bool fresh(const std::vector<fs::path>& outputs, const std::vector<fs::path>& inputs) {
  std::error_code ec;
  fs::file_time_type oldest = fs::file_time_type::max();
  for (const auto& out : outputs) {
    const auto t = fs::last_write_time(out, ec);
    if (ec) return false;
    oldest = std::min(oldest, t);
  }
  for (const auto& in : inputs) {
    const auto t = fs::last_write_time(in, ec);
    if (ec || t > oldest) return false;
  }
  return true;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Write to a sibling temp file, then rename over the target.
void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string modality_slug(Modality m) { return plan_slug(fusion::to_string(m)); }

std::vector<corpus::Example> all_examples(const corpus::DatasetSplit& split) {
  std::vector<corpus::Example> all = split.train;
  all.insert(all.end(), split.dev.begin(), split.dev.end());
  all.insert(all.end(), split.test.begin(), split.test.end());
  return all;
}

const std::vector<corpus::Example>& part(const corpus::DatasetSplit& split, std::size_t i) {
  return i == 0 ? split.train : i == 1 ? split.dev : split.test;
}

std::vector<std::string> ids_of(const std::vector<corpus::Example>& examples) {
  std::vector<std::string> ids;
  for (const auto& ex : examples) ids.push_back(ex.id);
  return ids;
}

std::vector<std::string> texts_of(const std::vector<corpus::Example>& examples) {
  std::vector<std::string> texts;
  for (const auto& ex : examples) texts.push_back(ex.text);
  return texts;
}

std::vector<double> values_of(const std::vector<corpus::Example>& examples) {
  std::vector<double> values;
  for (const auto& ex : examples) values.push_back(corpus::label_value(ex.label));
  return values;
}

corpus::SplitSizes split_sizes(const std::array<double, 3>& split, std::size_t n) {
  const double sum = split[0] + split[1] + split[2];
  const bool fractions = std::all_of(split.begin(), split.end(), [](double v) { return v <= 1.0; }) &&
                         std::abs(sum - 1.0) < 1e-9;
  if (fractions) {
    const auto train = static_cast<std::size_t>(std::floor(split[0] * static_cast<double>(n)));
    const auto dev = static_cast<std::size_t>(std::floor(split[1] * static_cast<double>(n)));
    return {train, dev, n - train - dev};
  }
  for (double v : split) {
    if (v != std::floor(v)) throw ConfigError("data.split: counts must be whole numbers");
  }
  return {static_cast<std::size_t>(split[0]), static_cast<std::size_t>(split[1]),
          static_cast<std::size_t>(split[2])};
}

json report_to_json(const std::string& plan, const std::string& problem, const eval::EvalReport& r) {
  return json{{"plan", plan},
              {"problem", problem},
              {"accuracy", r.accuracy},
              {"uar", r.uar},
              {"n_evaluated", r.n_evaluated},
              {"n_excluded", r.n_excluded},
              {"per_class_recall", r.per_class_recall},
              {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}}};
}

eval::EvalReport report_from_json(const json& j) {
  eval::EvalReport r;
  r.accuracy = j.at("accuracy").get<double>();
  r.uar = j.at("uar").get<double>();
  r.n_evaluated = j.at("n_evaluated").get<std::size_t>();
  r.n_excluded = j.at("n_excluded").get<std::size_t>();
  r.per_class_recall = j.at("per_class_recall").get<std::array<double, 2>>();
  const auto& c = j.at("counts");
  r.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
              c.at("fn").get<std::size_t>()};
  return r;
}

}  // namespace

struct Pipeline::ProblemData {
  corpus::DatasetSplit split;
};

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Collect: return "collect";
    case Stage::Featurize: return "featurize";
    case Stage::Tune: return "tune";
    case Stage::Train: return "train";
    case Stage::Evaluate: return "evaluate";
    case Stage::Report: return "report";
  }
  return {};
}

Pipeline::Pipeline(RunConfig config, PipelineOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  if (options_.seed) config_.seed = *options_.seed;
  config_.llm.mock = config_.llm.mock || options_.mock_llm;
  config_.embeddings.mock = config_.embeddings.mock || options_.mock_embeddings;
  options_.jobs = std::max<std::size_t>(1, options_.jobs);

  for (const auto& path : data_inputs()) {
    if (!fs::exists(path)) throw ConfigError("data file not found: " + path.string());
  }
  if (!config_.embeddings.mock) {
    for (auto m : needed_modalities()) {
      if (m.featurizer != fusion::Featurizer::Embedding) continue;
      const bool text = m.source == fusion::TextSource::OriginalText;
      const auto& pattern = text ? config_.embeddings.text : config_.embeddings.chat;
      if (!pattern) {
        throw ConfigError(std::string("plans use ") + fusion::to_string(m) + " but embeddings." +
                          (text ? "text" : "chat") + " is not set");
      }
      for (const auto& problem : config_.problems()) {
        const auto path = embedding_file(*pattern, problem);
        if (!fs::exists(path)) throw ConfigError("embedding file not found: " + path.string());
      }
    }
  }
}

Pipeline::~Pipeline() = default;

// ---------------------------------------------------------------------------
// Paths and plan bookkeeping

std::filesystem::path Pipeline::stamp_path() const { return config_.output_dir / "config.stamp.json"; }

std::filesystem::path Pipeline::responses_path(const corpus::TaskSpec& problem) const {
  return config_.output_dir / "responses" / (problem_slug(problem) + ".jsonl");
}

std::filesystem::path Pipeline::feature_path(const corpus::TaskSpec& problem, Modality m,
                                             std::string_view split) const {
  return config_.output_dir / "features" /
         (problem_slug(problem) + "__" + modality_slug(m) + "__" + std::string(split) + ".fmat1");
}

std::filesystem::path Pipeline::trial_path(const corpus::TaskSpec& problem, const FusionPlan& plan) const {
  return config_.output_dir / "trials" / (problem_slug(problem) + "__" + plan_slug(plan.to_string()) + ".jsonl");
}

std::filesystem::path Pipeline::model_path(const corpus::TaskSpec& problem, const FusionPlan& plan) const {
  return config_.output_dir / "models" / (problem_slug(problem) + "__" + plan_slug(plan.to_string()) + ".mlp1");
}

std::filesystem::path Pipeline::results_path() const { return config_.output_dir / "reports" / "results.json"; }

std::filesystem::path Pipeline::report_path(eval::Metric metric, eval::TableFormat format) const {
  return config_.output_dir / "reports" /
         ("report_" + std::string(eval::to_string(metric)) + (format == eval::TableFormat::Markdown ? ".md" : ".csv"));
}

std::vector<std::filesystem::path> Pipeline::data_inputs() const {
  const auto& d = config_.data;
  if (d.file) return {*d.file};
  return {*d.train, *d.dev, *d.test};
}

std::filesystem::path Pipeline::embedding_file(std::string_view pattern, const corpus::TaskSpec& problem) const {
  std::string s(pattern);
  const std::string slug = problem_slug(problem);
  for (auto at = s.find("{problem}"); at != std::string::npos; at = s.find("{problem}", at + slug.size())) {
    s.replace(at, 9, slug);
  }
  return s;
}

std::vector<FusionPlan> Pipeline::trained_plans() const {
  std::vector<FusionPlan> out;
  std::set<std::string> seen;
  for (const auto& name : config_.plans) {
    if (name == eval::kBaselinePlan) continue;
    for (auto& component : fusion::trained_components(fusion::parse_plan(name))) {
      if (seen.insert(component.to_string()).second) out.push_back(std::move(component));
    }
  }
  return out;
}

std::vector<Modality> Pipeline::needed_modalities() const {
  std::set<Modality> mods;
  for (const auto& plan : trained_plans()) mods.insert(plan.modalities().begin(), plan.modalities().end());
  return {mods.begin(), mods.end()};
}

bool Pipeline::needs_responses() const {
  if (std::find(config_.plans.begin(), config_.plans.end(), eval::kBaselinePlan) != config_.plans.end()) {
    return true;
  }
  for (auto m : needed_modalities()) {
    if (m.source == fusion::TextSource::LLMResponse) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Data

Pipeline::ProblemData& Pipeline::data(const corpus::TaskSpec& problem) {
  if (data_.empty()) {
    const auto& d = config_.data;
    const auto cap = config_.effective_max_chars();
    const std::uint64_t split_seed = d.split_seed.value_or(derive_seed(config_.seed, {"split"}));
    auto prepare = [&](std::vector<corpus::Example> examples) {
      return cap ? corpus::filter_max_chars(std::move(examples), *cap) : examples;
    };
    auto from_file = [&](std::vector<corpus::Example> examples) {
      examples = prepare(std::move(examples));
      const auto sizes = split_sizes(d.split, examples.size());
      auto split = corpus::split_dataset(std::move(examples), sizes, split_seed);
      split.validate();
      return split;
    };

    if (config_.task == corpus::TaskKind::Personality) {
      auto load = [](const fs::path& p) { return corpus::load_personality(p, corpus::format_from_path(p)); };
      if (d.file) {
        auto traits = load(*d.file);
        for (auto t : corpus::kTraits) {
          auto pd = std::make_unique<ProblemData>();
          pd->split = from_file(std::move(traits.at(t)));
          data_[corpus::TaskSpec::personality(t).name()] = std::move(pd);
        }
      } else {
        auto train = load(*d.train), dev = load(*d.dev), test = load(*d.test);
        for (auto t : corpus::kTraits) {
          auto pd = std::make_unique<ProblemData>();
          pd->split = {prepare(std::move(train.at(t))), prepare(std::move(dev.at(t))), prepare(std::move(test.at(t)))};
          pd->split.validate();
          data_[corpus::TaskSpec::personality(t).name()] = std::move(pd);
        }
      }
    } else {
      const auto task = config_.problems().front();
      auto load = [&](const fs::path& p) { return corpus::load_dataset(p, corpus::format_from_path(p), task); };
      auto pd = std::make_unique<ProblemData>();
      if (d.file) {
        pd->split = from_file(load(*d.file));
      } else {
        pd->split = {prepare(load(*d.train)), prepare(load(*d.dev)), prepare(load(*d.test))};
        pd->split.validate();
      }
      data_[task.name()] = std::move(pd);
    }
  }
  return *data_.at(problem.name());
}

fusion::SplitTargets Pipeline::targets(const corpus::TaskSpec& problem) {
  const auto& split = data(problem).split;
  return {values_of(split.train), values_of(split.dev), values_of(split.test)};
}

std::vector<llm::ChatRecord> Pipeline::load_responses(const corpus::TaskSpec& problem) const {
  std::vector<llm::ChatRecord> records;
  std::ifstream in(responses_path(problem));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(llm::record_from_json_line(line));
  }
  return records;
}

fusion::ModalityFeatures Pipeline::load_features(const corpus::TaskSpec& problem,
                                                 const std::vector<Modality>& modalities) const {
  fusion::ModalityFeatures out;
  for (auto m : modalities) {
    out[m] = {features::load_matrix(feature_path(problem, m, "train")),
              features::load_matrix(feature_path(problem, m, "dev")),
              features::load_matrix(feature_path(problem, m, "test"))};
  }
  return out;
}

nn::MLPConfig Pipeline::base_config(const corpus::TaskSpec& problem) const {
  nn::MLPConfig base;
  base.loss = problem.label_kind() == corpus::LabelKind::Real ? nn::LossKind::MAE : nn::LossKind::BinaryNLL;
  base.max_epochs = config_.training.max_epochs;
  base.batch_size = config_.training.batch_size;
  base.patience = config_.training.patience;
  return base;
}

// ---------------------------------------------------------------------------
// Stages

void Pipeline::write_stamp() {
  const auto content = config_.canonical_json() + "\n";
  std::error_code ec;
  if (fs::exists(stamp_path(), ec) && read_file(stamp_path()) == content) return;
  write_file(stamp_path(), content);
}

void Pipeline::skip(Stage stage, const std::string& unit) {
  ++cached_units_;
  spdlog::info("[{}] {}: cached", to_string(stage), unit);
}

void Pipeline::did(Stage stage, const std::string& unit) {
  ++executed_units_;
  spdlog::info("[{}] {}: done", to_string(stage), unit);
}

void Pipeline::collect() {
  if (!needs_responses()) return;
  std::unique_ptr<llm::CacheStore> cache;
  std::shared_ptr<llm::ChatTransport> transport;
  std::unique_ptr<llm::ChatClient> client;

  auto inputs = data_inputs();
  inputs.push_back(stamp_path());
  for (const auto& problem : config_.problems()) {
    const auto out = responses_path(problem);
    if (fresh({out}, inputs)) {
      skip(Stage::Collect, problem.name());
      continue;
    }
    if (!client) {
      llm::ClientOptions client_options;
      client_options.jitter_seed = derive_seed(config_.seed, {"jitter"});
      transport = options_.transport;
      if (!transport && config_.llm.mock) transport = llm::synthetic_transport();
      if (!transport) {
        client_options.api_key = llm::api_key_from_env();
        if (!client_options.api_key) {
          throw ConfigError("AFFECTFUSE_API_KEY is not set; pass --mock-llm for offline runs");
        }
        transport = std::make_shared<llm::HttpTransport>();
      }
      client = std::make_unique<llm::ChatClient>(*transport, config_.llm.params, client_options);
      cache = std::make_unique<llm::CacheStore>(config_.output_dir / "responses" / "cache.jsonl");
    }
    llm::CollectOptions collect_options;
    collect_options.concurrency = config_.llm.concurrency;
    collect_options.requests_per_second = config_.llm.requests_per_second;
    llm::CollectStats stats;
    const auto records =
        llm::collect(all_examples(data(problem).split), problem, *client, *cache, collect_options, &stats);
    llm_requests_ += stats.requests;

    std::string content;
    for (const auto& r : records) content += llm::to_json_line(r) + "\n";
    write_file(out, content);
    spdlog::info("[collect] {}: {} cached responses, {} requests", problem.name(), stats.hits, stats.requests);
    did(Stage::Collect, problem.name());
  }
}

void Pipeline::featurize() {
  const auto modalities = needed_modalities();
  for (const auto& problem : config_.problems()) {
    std::optional<std::vector<llm::ChatRecord>> responses;
    for (auto m : modalities) {
      const bool chat = m.source == fusion::TextSource::LLMResponse;
      const bool emb = m.featurizer == fusion::Featurizer::Embedding;
      std::vector<fs::path> outputs;
      for (auto s : kSplits) outputs.push_back(feature_path(problem, m, s));
      auto inputs = data_inputs();
      inputs.push_back(stamp_path());
      if (chat) inputs.push_back(responses_path(problem));
      std::optional<fs::path> emb_file;
      if (emb && !config_.embeddings.mock) {
        emb_file = embedding_file(chat ? *config_.embeddings.chat : *config_.embeddings.text, problem);
        inputs.push_back(*emb_file);
      }
      const std::string unit = problem.name() + " " + fusion::to_string(m);
      if (fresh(outputs, inputs)) {
        skip(Stage::Featurize, unit);
        continue;
      }

      const auto& split = data(problem).split;
      std::array<std::vector<std::string>, 3> ids, texts;
      for (std::size_t i = 0; i < 3; ++i) {
        ids[i] = ids_of(part(split, i));
        texts[i] = texts_of(part(split, i));
      }
      if (chat) {
        if (!responses) responses = load_responses(problem);
        const std::size_t n = split.train.size() + split.dev.size() + split.test.size();
        if (responses->size() != n) {
          throw Error("responses for " + problem.name() + " do not match the dataset; rerun collect");
        }
        std::size_t k = 0;
        for (auto& t : texts) {
          for (auto& text : t) text = (*responses)[k++].response;
        }
      }

      std::array<features::FeatureMatrix, 3> mats;
      if (emb && config_.embeddings.mock) {
        const auto seed = derive_seed(config_.seed, {"embed", chat ? "chat" : "text"});
        for (std::size_t i = 0; i < 3; ++i) {
          mats[i] = features::mock_embed(ids[i], texts[i], config_.embeddings.dim, seed);
        }
      } else if (emb) {
        const auto table = features::load_embeddings(*emb_file);
        for (std::size_t i = 0; i < 3; ++i) mats[i] = features::lookup(table, ids[i]);
      } else {
        const auto& bow = chat ? config_.chat_bow : config_.text_bow;
        const auto model = features::TfidfModel::fit(texts[0], bow.n_range, bow.size_cap);
        for (std::size_t i = 0; i < 3; ++i) mats[i] = model.transform(ids[i], texts[i]);
        const auto scaler = features::fit_scaler(mats[0]);
        for (auto& mat : mats) mat = features::scale(mat, scaler);
      }
      for (std::size_t i = 0; i < 3; ++i) {
        fs::create_directories(outputs[i].parent_path());
        features::save_matrix(outputs[i], mats[i]);
      }
      did(Stage::Featurize, unit);
    }
  }
}

void Pipeline::tune() {
  for (const auto& problem : config_.problems()) {
    for (const auto& plan : trained_plans()) {
      const auto log = trial_path(problem, plan);
      std::vector<fs::path> inputs = {stamp_path()};
      for (auto m : plan.modalities()) {
        for (auto s : kSplits) inputs.push_back(feature_path(problem, m, s));
      }
      const std::string unit = problem.name() + " " + plan.to_string();
      std::error_code ec;
      if (fresh({log}, inputs)) {
        std::set<int> done;
        for (const auto& t : tuning::read_trial_log(log)) done.insert(t.trial_index);
        if (static_cast<int>(done.size()) >= config_.search.n_samples) {
          skip(Stage::Tune, unit);
          continue;
        }
      } else {
        fs::remove(log, ec);
      }

      const auto feats = fusion::plan_features(plan, load_features(problem, plan.modalities()));
      const auto y = targets(problem);
      tuning::TuneOptions opts;
      opts.workers = options_.jobs;
      opts.trial_log = log;
      const auto seed = derive_seed(config_.seed, {"tune", problem.name(), plan.to_string()});
      const auto outcome = tuning::tune(config_.search, seed, base_config(problem), feats.train.view(), y.train,
                                        feats.dev.view(), y.dev, opts);
      spdlog::info("[tune] {}: best trial {} (dev {:.4f})", unit, outcome.best_index, outcome.best_metric);
      did(Stage::Tune, unit);
    }
  }
}

void Pipeline::train() {
  for (const auto& problem : config_.problems()) {
    for (const auto& plan : trained_plans()) {
      const auto out = model_path(problem, plan);
      std::vector<fs::path> inputs = {stamp_path(), trial_path(problem, plan)};
      for (auto m : plan.modalities()) {
        for (auto s : kSplits) inputs.push_back(feature_path(problem, m, s));
      }
      const std::string unit = problem.name() + " " + plan.to_string();
      if (fresh({out}, inputs)) {
        skip(Stage::Train, unit);
        continue;
      }
      const auto trials = tuning::read_trial_log(trial_path(problem, plan));
      const auto& best = tuning::select_best(trials, tuning::objective_for(base_config(problem).loss));
      const auto feats = fusion::plan_features(plan, load_features(problem, plan.modalities()));
      const auto y = targets(problem);
      const auto model = nn::train(best.config, feats.train.view(), y.train, feats.dev.view(), y.dev);
      fs::create_directories(out.parent_path());
      nn::save_model(out, model);
      did(Stage::Train, unit);
    }
  }
}

void Pipeline::evaluate() {
  const auto out = results_path();
  std::vector<fs::path> inputs = {stamp_path()};
  const bool baseline =
      std::find(config_.plans.begin(), config_.plans.end(), eval::kBaselinePlan) != config_.plans.end();
  for (const auto& problem : config_.problems()) {
    if (baseline) inputs.push_back(responses_path(problem));
    for (const auto& plan : trained_plans()) {
      inputs.push_back(model_path(problem, plan));
      for (auto m : plan.modalities()) inputs.push_back(feature_path(problem, m, "test"));
    }
  }
  if (fresh({out}, inputs)) {
    skip(Stage::Evaluate, "results");
    return;
  }

  eval::ResultGrid grid;
  for (const auto& problem : config_.problems()) {
    const auto y = targets(problem);
    std::map<Modality, features::FeatureMatrix> test;
    for (auto m : needed_modalities()) test[m] = features::load_matrix(feature_path(problem, m, "test"));

    for (const auto& name : config_.plans) {
      if (name == eval::kBaselinePlan) {
        const auto records = load_responses(problem);
        const auto& split = data(problem).split;
        const std::size_t offset = split.train.size() + split.dev.size();
        if (records.size() != offset + split.test.size()) {
          throw Error("responses for " + problem.name() + " do not match the dataset; rerun collect");
        }
        std::vector<eval::BaselineOutcome> outcomes;
        for (std::size_t i = offset; i < records.size(); ++i) {
          outcomes.push_back(eval::baseline_classify(records[i].response, problem));
        }
        grid[{name, problem.name()}] = eval::evaluate(outcomes, y.test);
        continue;
      }
      std::vector<std::vector<double>> member_probs;
      for (const auto& component : fusion::trained_components(fusion::parse_plan(name))) {
        std::vector<features::FeatureMatrix> parts;
        for (auto m : component.modalities()) parts.push_back(test.at(m));
        const auto x = fusion::early_fuse(parts);
        const auto model = nn::load_model(model_path(problem, component));
        member_probs.push_back(nn::predict_proba(model, x.view()));
      }
      const auto probs = fusion::late_fuse(member_probs);
      grid[{name, problem.name()}] = eval::evaluate(probs, y.test);
    }
  }

  json results = json::array();
  for (const auto& [key, report] : grid) results.push_back(report_to_json(key.first, key.second, report));
  write_file(out, json{{"results", results}}.dump(2) + "\n");
  did(Stage::Evaluate, "results");
}

void Pipeline::report() {
  std::vector<fs::path> outputs;
  for (auto metric : {eval::Metric::Accuracy, eval::Metric::UAR}) {
    for (auto format : {eval::TableFormat::Markdown, eval::TableFormat::CSV}) {
      outputs.push_back(report_path(metric, format));
    }
  }
  if (fresh(outputs, {results_path(), stamp_path()})) {
    skip(Stage::Report, "reports");
    return;
  }
  eval::ResultGrid grid;
  const auto doc = json::parse(read_file(results_path()));
  for (const auto& r : doc.at("results")) {
    grid[{r.at("plan").get<std::string>(), r.at("problem").get<std::string>()}] = report_from_json(r);
  }
  for (auto metric : {eval::Metric::Accuracy, eval::Metric::UAR}) {
    for (auto format : {eval::TableFormat::Markdown, eval::TableFormat::CSV}) {
      write_file(report_path(metric, format), eval::report_table(grid, metric, format));
    }
  }
  did(Stage::Report, "reports");
}

void Pipeline::run(Stage last) {
  write_stamp();
  for (auto stage : {Stage::Collect, Stage::Featurize, Stage::Tune, Stage::Train, Stage::Evaluate, Stage::Report}) {
    try {
      switch (stage) {
        case Stage::Collect: collect(); break;
        case Stage::Featurize: featurize(); break;
        case Stage::Tune: tune(); break;
        case Stage::Train: train(); break;
        case Stage::Evaluate: evaluate(); break;
        case Stage::Report: report(); break;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(std::string(to_string(stage)), e.what());
    }
    if (stage == last) break;
  }
}

std::size_t Pipeline::compact_cache() {
  llm::CacheStore cache(config_.output_dir / "responses" / "cache.jsonl");
  return cache.compact();
}

}  // namespace affectfuse::cli
