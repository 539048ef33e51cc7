#pragma once

#include <functional>
#include <string>

namespace drive {

using WarnSink = std::function<void(const std::string&)>;

// Replaces the warning sink; an empty sink restores the stderr default.
void set_warn_sink(WarnSink sink);
void warn(const std::string& message);

}  // namespace drive
