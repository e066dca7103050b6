#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "affectfuse/llm.hpp"

namespace affectfuse::llm {

/// Offline stand-in for the chat model. Reads the quoted text out of a task
/// prompt, scores it against a small per-task lexicon and answers with the
/// task keyword plus a short explanation that names the cue words. About one
/// answer in twenty mentions both keywords or neither. Deterministic in the
/// prompt.
std::string synthetic_response(std::string_view prompt);

/// MockTransport answering every request with synthetic_response().
std::unique_ptr<MockTransport> synthetic_transport();

}  // namespace affectfuse::llm
