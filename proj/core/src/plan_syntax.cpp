#include "affectfuse/plan_syntax.hpp"

#include <set>
#include <string>

#include "affectfuse/error.hpp"

namespace affectfuse::fusion {
namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  FusionPlan plan() {
    FusionMode mode = FusionMode::Single;
    if (accept("early:")) {
      mode = FusionMode::Early;
    } else if (accept("late:")) {
      mode = FusionMode::Late;
    }
    std::vector<Modality> mods;
    std::set<Modality> seen;
    for (;;) {
      const std::size_t start = pos_;
      const Modality m = modality();
      if (!seen.insert(m).second) fail(start, "modality '" + to_string(m) + "' repeats");
      mods.push_back(m);
      if (pos_ == text_.size()) break;
      if (!accept("&")) fail(pos_, "expected '&' or end of plan");
    }
    if (mode == FusionMode::Single && mods.size() > 1) {
      fail(0, "combining modalities needs an 'early:' or 'late:' prefix");
    }
    if (mode != FusionMode::Single && mods.size() < 2) {
      fail(pos_, "fusion needs at least two modalities");
    }
    return FusionPlan(std::move(mods), mode);
  }

 private:
  Modality modality() {
    Modality m;
    if (accept("text")) {
      m.source = TextSource::OriginalText;
    } else if (accept("chat")) {
      m.source = TextSource::LLMResponse;
    } else {
      fail(pos_, "expected 'text' or 'chat'");
    }
    if (!accept("+")) fail(pos_, "expected '+'");
    if (accept("emb")) {
      m.featurizer = Featurizer::Embedding;
    } else if (accept("bow")) {
      m.featurizer = Featurizer::BoW;
    } else {
      fail(pos_, "expected 'emb' or 'bow'");
    }
    return m;
  }

  bool accept(std::string_view token) {
    if (text_.substr(pos_).starts_with(token)) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw PlanSyntaxError(at, what + " in \"" + std::string(text_) + "\"");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

FusionPlan parse_plan(std::string_view text) { return Parser(text).plan(); }

}  // namespace affectfuse::fusion
