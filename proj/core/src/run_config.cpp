#include "affectfuse/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "affectfuse/error.hpp"
#include "affectfuse/plan_syntax.hpp"

namespace affectfuse::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Wraps one JSON object and rejects any key that was never asked for.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail("field '" + key + "' has the wrong type");
    }
  }

  Section sub(const std::string& key) { return Section(at(key), where_ + "." + key); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) fail("unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(where_ + ": " + what); }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string resolve_pattern(const fs::path& base, const std::string& p) {
  return resolve(base, p).string();
}

features::BowOptions parse_bow(Section s, features::BowOptions bow) {
  if (s.has("n_range")) {
    std::vector<std::size_t> n;
    try {
      n = s.at("n_range").get<std::vector<std::size_t>>();
    } catch (const json::exception&) {
      s.fail("n_range must be a list of positive integers");
    }
    if (n.empty()) s.fail("n_range must not be empty");
    bow.n_range = std::set<std::size_t>(n.begin(), n.end());
    if (bow.n_range.contains(0)) s.fail("n-gram orders start at 1");
  }
  bow.size_cap = s.get<std::size_t>("cap", bow.size_cap);
  if (bow.size_cap == 0) s.fail("cap must be positive");
  s.finish();
  return bow;
}

json bow_json(const features::BowOptions& bow) {
  return json{{"n_range", std::vector<std::size_t>(bow.n_range.begin(), bow.n_range.end())},
              {"cap", bow.size_cap}};
}

std::string task_name(corpus::TaskKind kind) {
  switch (kind) {
    case corpus::TaskKind::Sentiment: return "sentiment";
    case corpus::TaskKind::Suicide: return "suicide";
    case corpus::TaskKind::Personality: return "personality";
  }
  return {};
}

json path_string(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

}  // namespace

std::vector<corpus::TaskSpec> RunConfig::problems() const {
  switch (task) {
    case corpus::TaskKind::Sentiment: return {corpus::TaskSpec::sentiment()};
    case corpus::TaskKind::Suicide: return {corpus::TaskSpec::suicide()};
    case corpus::TaskKind::Personality: {
      std::vector<corpus::TaskSpec> out;
      for (auto t : corpus::kTraits) out.push_back(corpus::TaskSpec::personality(t));
      return out;
    }
  }
  return {};
}

std::optional<std::size_t> RunConfig::effective_max_chars() const {
  if (max_chars) return max_chars;
  if (task == corpus::TaskKind::Suicide) return 512;
  return std::nullopt;
}

std::string RunConfig::canonical_json() const {
  json j;
  j["task"] = task_name(task);
  j["data"] = json{{"file", path_string(data.file)},
                   {"split", data.split},
                   {"split_seed", data.split_seed ? json(*data.split_seed) : json(nullptr)},
                   {"train", path_string(data.train)},
                   {"dev", path_string(data.dev)},
                   {"test", path_string(data.test)}};
  const auto cap = effective_max_chars();
  j["max_chars"] = cap ? json(*cap) : json(nullptr);
  j["llm"] = json{{"mock", llm.mock},
                  {"model", llm.params.model},
                  {"temperature", llm.params.temperature},
                  {"n", llm.params.n_choices}};
  j["embeddings"] = json{{"mock", embeddings.mock},
                         {"dim", embeddings.dim},
                         {"text", embeddings.text ? json(*embeddings.text) : json(nullptr)},
                         {"chat", embeddings.chat ? json(*embeddings.chat) : json(nullptr)}};
  j["bow"] = json{{"text", bow_json(text_bow)}, {"chat", bow_json(chat_bow)}};
  j["search"] = json{{"n_samples", search.n_samples},
                     {"n_hidden", {search.n_hidden_min, search.n_hidden_max}},
                     {"first_units", {search.units_min, search.units_max}},
                     {"learning_rate", {search.learning_rate_min, search.learning_rate_max}}};
  j["training"] = json{{"max_epochs", training.max_epochs},
                       {"batch_size", training.batch_size},
                       {"patience", training.patience}};
  j["plans"] = plans;
  j["seed"] = seed;
  return j.dump();
}

std::vector<std::string> default_plans() {
  std::vector<std::string> plans = {"baseline"};
  for (const auto& p : fusion::standard_plans()) plans.push_back(p.to_string());
  return plans;
}

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section root(doc, "config");
  RunConfig cfg;

  if (!root.has("task")) root.fail("missing 'task'");
  const auto task = root.get<std::string>("task", "");
  if (task == "sentiment") {
    cfg.task = corpus::TaskKind::Sentiment;
  } else if (task == "suicide") {
    cfg.task = corpus::TaskKind::Suicide;
  } else if (task == "personality") {
    cfg.task = corpus::TaskKind::Personality;
  } else {
    root.fail("task must be sentiment, suicide or personality");
  }

  if (!root.has("data")) root.fail("missing 'data'");
  {
    auto d = root.sub("data");
    if (d.has("file")) {
      cfg.data.file = resolve(base_dir, d.get<std::string>("file", ""));
      if (!d.has("split")) d.fail("a single data file needs 'split'");
      try {
        cfg.data.split = d.at("split").get<std::array<double, 3>>();
      } catch (const json::exception&) {
        d.fail("split must be three numbers [train, dev, test]");
      }
      for (double v : cfg.data.split) {
        if (!(v > 0.0) || !std::isfinite(v)) d.fail("split entries must be positive");
      }
      if (d.has("seed")) cfg.data.split_seed = d.get<std::uint64_t>("seed", 0);
      if (d.has("train") || d.has("dev") || d.has("test")) {
        d.fail("give either 'file' or 'train'/'dev'/'test', not both");
      }
    } else {
      for (auto [key, slot] : {std::pair{"train", &cfg.data.train}, std::pair{"dev", &cfg.data.dev},
                               std::pair{"test", &cfg.data.test}}) {
        if (!d.has(key)) d.fail(std::string("missing '") + key + "'");
        *slot = resolve(base_dir, d.get<std::string>(key, ""));
      }
      if (d.has("split") || d.has("seed")) d.fail("'split' and 'seed' only apply to 'file'");
    }
    d.finish();
  }

  if (root.has("max_chars")) cfg.max_chars = root.get<std::size_t>("max_chars", 0);

  if (root.has("llm")) {
    auto l = root.sub("llm");
    cfg.llm.mock = l.get<bool>("mock", false);
    auto& p = cfg.llm.params;
    p.model = l.get<std::string>("model", p.model);
    p.temperature = l.get<double>("temperature", p.temperature);
    p.n_choices = l.get<int>("n", p.n_choices);
    p.endpoint_url = l.get<std::string>("endpoint_url", p.endpoint_url);
    p.timeout = std::chrono::seconds(l.get<int>("timeout_seconds", static_cast<int>(p.timeout.count())));
    p.max_retries = l.get<int>("max_retries", p.max_retries);
    cfg.llm.concurrency = l.get<std::size_t>("concurrency", cfg.llm.concurrency);
    cfg.llm.requests_per_second = l.get<double>("requests_per_second", 0.0);
    l.finish();
    p.validate();
    if (cfg.llm.concurrency == 0) throw ConfigError("llm.concurrency must be positive");
  }

  if (root.has("embeddings")) {
    auto e = root.sub("embeddings");
    cfg.embeddings.mock = e.get<bool>("mock", false);
    cfg.embeddings.dim = e.get<std::size_t>("dim", cfg.embeddings.dim);
    if (e.has("text")) cfg.embeddings.text = resolve_pattern(base_dir, e.get<std::string>("text", ""));
    if (e.has("chat")) cfg.embeddings.chat = resolve_pattern(base_dir, e.get<std::string>("chat", ""));
    e.finish();
    if (cfg.embeddings.dim == 0) throw ConfigError("embeddings.dim must be positive");
  }

  if (root.has("bow")) {
    auto b = root.sub("bow");
    if (b.has("text")) cfg.text_bow = parse_bow(b.sub("text"), cfg.text_bow);
    if (b.has("chat")) cfg.chat_bow = parse_bow(b.sub("chat"), cfg.chat_bow);
    b.finish();
  }

  if (root.has("search")) {
    auto s = root.sub("search");
    auto& sp = cfg.search;
    sp.n_samples = s.get<int>("n_samples", sp.n_samples);
    auto bounds = [&](const char* key, auto& lo, auto& hi) {
      if (!s.has(key)) return;
      try {
        const auto v = s.at(key).get<std::array<std::decay_t<decltype(lo)>, 2>>();
        lo = v[0];
        hi = v[1];
      } catch (const json::exception&) {
        s.fail(std::string(key) + " must be [min, max]");
      }
    };
    bounds("n_hidden", sp.n_hidden_min, sp.n_hidden_max);
    bounds("first_units", sp.units_min, sp.units_max);
    bounds("learning_rate", sp.learning_rate_min, sp.learning_rate_max);
    s.finish();
    try {
      sp.validate();
    } catch (const RangeError& e) {
      throw ConfigError(std::string("search: ") + e.what());
    }
  }

  if (root.has("training")) {
    auto t = root.sub("training");
    cfg.training.max_epochs = t.get<int>("max_epochs", cfg.training.max_epochs);
    cfg.training.batch_size = t.get<int>("batch_size", cfg.training.batch_size);
    cfg.training.patience = t.get<int>("patience", cfg.training.patience);
    t.finish();
    if (cfg.training.max_epochs < 1 || cfg.training.batch_size < 1 || cfg.training.patience < 1) {
      throw ConfigError("training: max_epochs, batch_size and patience must be positive");
    }
  }

  if (root.has("plans")) {
    try {
      cfg.plans = root.at("plans").get<std::vector<std::string>>();
    } catch (const json::exception&) {
      root.fail("plans must be a list of strings");
    }
    if (cfg.plans.empty()) root.fail("plans must not be empty");
  } else {
    cfg.plans = default_plans();
  }
  std::set<std::string> seen;
  for (auto& plan : cfg.plans) {
    if (plan != "baseline") {
      try {
        plan = fusion::parse_plan(plan).to_string();
      } catch (const PlanSyntaxError& e) {
        throw ConfigError(std::string("plans: ") + e.what());
      }
    }
    if (!seen.insert(plan).second) root.fail("plan '" + plan + "' is listed twice");
  }

  cfg.output_dir = resolve(base_dir, root.get<std::string>("output_dir", "out"));
  cfg.seed = root.get<std::uint64_t>("seed", 0);
  root.finish();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), fs::absolute(path).parent_path());
}

std::string problem_slug(const corpus::TaskSpec& task) {
  auto s = task.name();
  for (auto& ch : s) {
    if (ch == ':') ch = '-';
  }
  return s;
}

std::string plan_slug(std::string_view plan) {
  std::string s;
  for (char ch : plan) {
    switch (ch) {
      case ':':
      case '+': s += '-'; break;
      case '&': s += '_'; break;
      default: s += ch;
    }
  }
  return s;
}

}  // namespace affectfuse::cli
