#pragma once

#include <string_view>

#include "affectfuse/fusion.hpp"

namespace affectfuse::fusion {

/// PLAN := [("early:" | "late:")] MOD ("&" MOD)*
/// MOD  := ("text" | "chat") "+" ("emb" | "bow")
/// Without a prefix exactly one MOD is allowed. Throws PlanSyntaxError
/// carrying the offending character position.
FusionPlan parse_plan(std::string_view text);

}  // namespace affectfuse::fusion
