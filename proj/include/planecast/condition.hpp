#pragma once

#include <string_view>

namespace planecast {

/// Instruction given for a trial. The engine treats both identically; the
/// label is only recorded.
enum class Condition { Speed, Accuracy };

std::string_view to_string(Condition c);
/// Accepts "speed" / "accuracy".
Condition condition_from_string(std::string_view s);

}  // namespace planecast
