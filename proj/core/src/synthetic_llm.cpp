#include "affectfuse/synthetic_llm.hpp"

#include <array>
#include <set>

#include "affectfuse/common.hpp"
#include "affectfuse/featurize.hpp"

namespace affectfuse::llm {
namespace {

struct Lexicon {
  std::string_view topic;  // how the answer names the task
  std::string_view positive;
  std::string_view negative;
  std::set<std::string_view> positive_cues;
  std::set<std::string_view> negative_cues;
};

const Lexicon& lexicon_for(std::string_view prompt) {
  static const Lexicon sentiment{
      "The sentiment is", "positive", "negative",
      {"good", "great", "happy", "love", "wonderful", "excellent", "fun", "enjoy", "awesome", "nice"},
      {"bad", "sad", "hate", "awful", "terrible", "angry", "boring", "worst", "annoying", "upset"}};
  static const Lexicon suicide{
      "Answer:", "yes", "no",
      {"hopeless", "alone", "worthless", "die", "end", "pain", "tired", "empty"},
      {"excited", "plans", "family", "grateful", "weekend", "hopeful", "proud", "fine"}};
  static const std::array<Lexicon, 5> personality{{
      {"Openness is", "high", "low",
       {"curious", "art", "imagine", "ideas", "novel", "travel"},
       {"routine", "practical", "familiar", "conventional", "usual", "same"}},
      {"Conscientiousness is", "high", "low",
       {"organized", "plan", "schedule", "careful", "tidy", "deadline"},
       {"messy", "late", "forgot", "chaotic", "procrastinate", "whatever"}},
      {"Extraversion is", "high", "low",
       {"party", "friends", "talk", "outgoing", "crowd", "dancing"},
       {"quiet", "alone", "reading", "reserved", "home", "solitude"}},
      {"Agreeableness is", "high", "low",
       {"kind", "help", "trust", "warm", "share", "forgive"},
       {"rude", "argue", "selfish", "cold", "blame", "annoyed"}},
      {"Neuroticism is", "high", "low",
       {"anxious", "worry", "stress", "nervous", "moody", "panic"},
       {"calm", "relaxed", "stable", "steady", "content", "peaceful"}},
  }};

  if (prompt.starts_with("What is your guess for the sentiment")) return sentiment;
  if (prompt.starts_with("What is your guess, is a person")) return suicide;
  constexpr std::array<std::string_view, 5> names = {"Openness", "Conscientiousness", "Extraversion",
                                                     "Agreeableness", "Neuroticism"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (prompt.find("trait \"" + std::string(names[i]) + "\"") != std::string_view::npos) {
      return personality[i];
    }
  }
  return sentiment;
}

// The user text sits between the last opening marker and the last quote of
// the first line.
std::string_view quoted_text(std::string_view prompt) {
  const auto line = prompt.substr(0, prompt.find('\n'));
  std::size_t start = std::string_view::npos;
  for (std::string_view marker : {"who said \"", "the text \""}) {
    const auto at = line.find(marker);
    if (at != std::string_view::npos) {
      start = at + marker.size();
      break;
    }
  }
  const auto end = line.rfind('"');
  if (start == std::string_view::npos || end == std::string_view::npos || end < start) return line;
  return line.substr(start, end - start);
}

std::string quote_list(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < 3; ++i) {
    if (i > 0) out += i + 1 == words.size() || i == 2 ? " and " : ", ";
    out += '"' + words[i] + '"';
  }
  return out;
}

}  // namespace

std::string synthetic_response(std::string_view prompt) {
  const Lexicon& lex = lexicon_for(prompt);
  std::vector<std::string> pos;
  std::vector<std::string> neg;
  for (const auto& token : features::tokenize(quoted_text(prompt))) {
    if (lex.positive_cues.contains(token)) pos.push_back(token);
    if (lex.negative_cues.contains(token)) neg.push_back(token);
  }

  Rng rng(derive_seed(0, {"synthetic-llm", prompt}));
  const double roll = rng.uniform();
  if (roll < 0.025) {
    return std::string("It could be ") + std::string(lex.positive) + " or " + std::string(lex.negative) +
           "; the cues in this text point both ways.";
  }
  if (roll < 0.05) return "Hard to say from such a short text, there are too few cues to judge.";

  bool positive = pos.size() > neg.size();
  if (pos.size() == neg.size()) positive = rng.below(2) == 1;
  const auto& cues = positive ? pos : neg;

  std::string answer = std::string(lex.topic) + " " + std::string(positive ? lex.positive : lex.negative) + ".";
  if (cues.empty()) {
    answer += " The text gives few clear cues, so this is a tentative guess.";
  } else {
    answer += " Words such as " + quote_list(cues) + " suggest this reading.";
  }
  return answer;
}

std::unique_ptr<MockTransport> synthetic_transport() {
  return std::make_unique<MockTransport>([](const HttpRequest& request) {
    const std::string prompt = prompt_of_request(request.body);
    return HttpResponse{200, completion_payload(synthetic_response(prompt), std::nullopt, std::nullopt)};
  });
}

}  // namespace affectfuse::llm
