#include <string>

#include "affectfuse/common.hpp"
#include "affectfuse/llm.hpp"

namespace affectfuse::llm {

using corpus::TaskKind;
using corpus::TaskSpec;

std::string build_prompt(const TaskSpec& task, std::string_view text) {
  std::string prompt;
  switch (task.kind()) {
    case TaskKind::Sentiment:
      prompt += "What is your guess for the sentiment of the text \"";
      prompt += text;
      prompt +=
          "\"?\n"
          "Answer positive or negative, but not neutral.\n"
          "Try to narrow down the answer to be one of those two.\n"
          "It does not have to be fully correct.\n"
          "Explain your answer briefly.\n"
          "Do not show any warning after.";
      break;
    case TaskKind::Suicide:
      prompt += "What is your guess, is a person saying the text \"";
      prompt += text;
      prompt +=
          "\" has suicide tendencies?\n"
          "Answer yes or no.\n"
          "It does not have to be fully correct.\n"
          "Explain your answer briefly.\n"
          "Do not show any warning after.";
      break;
    case TaskKind::Personality:
      prompt += "What is your guess for the personality trait \"";
      prompt += corpus::trait_name(*task.trait());
      prompt += "\", from the big-five personality traits, of someone who said \"";
      prompt += text;
      prompt +=
          "\"?\n"
          "Answer low or high, but not neutral.\n"
          "Try to narrow down the answer to low or high.\n"
          "It does not have to be fully correct.\n"
          "Explain your answer briefly.\n"
          "Do not show any warning after.";
      break;
  }
  return prompt;
}

std::size_t prompt_base_tokens(const TaskSpec& task) {
  switch (task.kind()) {
    case TaskKind::Sentiment: return 63;
    case TaskKind::Suicide: return 50;
    case TaskKind::Personality: return 75;
  }
  return 0;
}

std::size_t estimate_text_tokens(std::string_view text) {
  // ceil(chars / 4.3) in exact integer arithmetic: 4.3 = 43/10.
  const auto chars = utf8_length(text);
  return (10 * chars + 42) / 43;
}

TokenEstimate estimate_tokens(const TaskSpec& task, std::string_view text,
                              std::optional<std::string_view> response) {
  TokenEstimate est;
  est.prompt_base_tokens = prompt_base_tokens(task);
  est.text_tokens = estimate_text_tokens(text);
  if (response) est.text_tokens += estimate_text_tokens(*response);
  est.overhead_tokens = kCallOverheadTokens;
  est.total = est.prompt_base_tokens + est.text_tokens + est.overhead_tokens;
  return est;
}

double estimate_latency_seconds(std::size_t total_tokens) {
  return 0.038 * static_cast<double>(total_tokens) + 1.32;
}

}  // namespace affectfuse::llm
