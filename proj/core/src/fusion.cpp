#include "affectfuse/fusion.hpp"

#include <algorithm>
#include <set>

#include "affectfuse/error.hpp"

namespace affectfuse::fusion {

std::string to_string(Modality modality) {
  std::string s = modality.source == TextSource::OriginalText ? "text" : "chat";
  s += modality.featurizer == Featurizer::Embedding ? "+emb" : "+bow";
  return s;
}

FusionPlan::FusionPlan(std::vector<Modality> modalities, FusionMode mode)
    : modalities_(std::move(modalities)), mode_(mode) {
  if (modalities_.empty()) throw ConfigError("a plan needs at least one modality");
  if (mode_ == FusionMode::Single && modalities_.size() != 1) {
    throw ConfigError("a single-modality plan takes exactly one modality");
  }
  if (mode_ != FusionMode::Single && modalities_.size() < 2) {
    throw ConfigError("early and late fusion need at least two modalities");
  }
  std::set<Modality> seen(modalities_.begin(), modalities_.end());
  if (seen.size() != modalities_.size()) throw ConfigError("a plan lists the same modality twice");
}

std::string FusionPlan::to_string() const {
  std::string s;
  if (mode_ == FusionMode::Early) s = "early:";
  if (mode_ == FusionMode::Late) s = "late:";
  for (std::size_t i = 0; i < modalities_.size(); ++i) {
    if (i > 0) s += '&';
    s += fusion::to_string(modalities_[i]);
  }
  return s;
}

std::vector<FusionPlan> standard_plans() {
  const Modality text_emb{TextSource::OriginalText, Featurizer::Embedding};
  const Modality text_bow{TextSource::OriginalText, Featurizer::BoW};
  const Modality chat_emb{TextSource::LLMResponse, Featurizer::Embedding};
  const Modality chat_bow{TextSource::LLMResponse, Featurizer::BoW};
  const std::vector<std::vector<Modality>> combinations = {
      {text_emb, chat_emb},
      {text_bow, chat_bow},
      {text_emb, text_bow},
      {chat_emb, chat_bow},
      {text_emb, text_bow, chat_emb, chat_bow},
  };
  std::vector<FusionPlan> plans;
  for (auto m : {text_emb, text_bow, chat_emb, chat_bow}) plans.push_back(FusionPlan::single(m));
  for (const auto& c : combinations) plans.emplace_back(c, FusionMode::Early);
  for (const auto& c : combinations) plans.emplace_back(c, FusionMode::Late);
  return plans;
}

features::FeatureMatrix early_fuse(std::span<const features::FeatureMatrix> parts) {
  if (parts.empty()) throw EmptyList("early fusion needs at least one feature matrix");
  const auto& ids = parts.front().ids();
  std::size_t cols = 0;
  for (const auto& part : parts) {
    if (part.ids() != ids) throw IdMismatch("feature matrices disagree on example ids or their order");
    cols += part.cols();
  }
  std::vector<double> data;
  data.reserve(ids.size() * cols);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    for (const auto& part : parts) {
      const auto row = part.row(r);
      data.insert(data.end(), row.begin(), row.end());
    }
  }
  return features::FeatureMatrix(ids, cols, std::move(data));
}

std::vector<double> late_fuse(std::span<const std::vector<double>> probabilities) {
  if (probabilities.empty()) throw EmptyList("late fusion needs at least one prediction vector");
  const std::size_t n = probabilities.front().size();
  std::vector<double> mean(n, 0.0);
  for (const auto& p : probabilities) {
    if (p.size() != n) throw LengthMismatch("prediction vectors differ in length");
    for (std::size_t i = 0; i < n; ++i) mean[i] += p[i];
  }
  const double k = static_cast<double>(probabilities.size());
  for (auto& v : mean) v /= k;
  return mean;
}

std::vector<FusionPlan> trained_components(const FusionPlan& plan) {
  if (plan.mode() != FusionMode::Late) return {plan};
  std::vector<FusionPlan> members;
  for (auto m : plan.modalities()) members.push_back(FusionPlan::single(m));
  return members;
}

SplitFeatures plan_features(const FusionPlan& plan, const ModalityFeatures& features) {
  if (plan.mode() == FusionMode::Late) throw ConfigError("late plans have no joint feature matrix");
  std::vector<features::FeatureMatrix> train, dev, test;
  for (auto m : plan.modalities()) {
    const auto it = features.find(m);
    if (it == features.end()) throw ConfigError("no features for modality " + to_string(m));
    train.push_back(it->second.train);
    dev.push_back(it->second.dev);
    test.push_back(it->second.test);
  }
  if (train.size() == 1) return SplitFeatures{std::move(train[0]), std::move(dev[0]), std::move(test[0])};
  return SplitFeatures{early_fuse(train), early_fuse(dev), early_fuse(test)};
}

PlanResult run_plan(const FusionPlan& plan, const ModalityFeatures& features,
                    const SplitTargets& targets, const TunedConfigs& configs) {
  const auto components = trained_components(plan);
  // Validate everything up front so a bad plan fails before any training.
  for (const auto& component : components) {
    for (auto m : component.modalities()) {
      if (!features.contains(m)) throw ConfigError("no features for modality " + to_string(m));
    }
    if (!configs.contains(component.to_string())) {
      throw ConfigError("no tuned configuration for plan " + component.to_string());
    }
  }

  PlanResult result;
  std::vector<std::vector<double>> member_probabilities;
  for (const auto& component : components) {
    const auto split = plan_features(component, features);
    auto model = nn::train(configs.at(component.to_string()), split.train.view(), targets.train,
                           split.dev.view(), targets.dev);
    member_probabilities.push_back(nn::predict_proba(model, split.test.view()));
    result.models.push_back(std::move(model));
  }
  result.test_probabilities = member_probabilities.size() == 1 ? std::move(member_probabilities.front())
                                                               : late_fuse(member_probabilities);
  return result;
}

}  // namespace affectfuse::fusion
