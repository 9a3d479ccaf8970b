#pragma once

#include <functional>
#include <string>

namespace gridmap {

using WarningSink = std::function<void(const std::string&)>;

// Warnings go to stderr unless a sink is installed. Thread-safe.
void warn(const std::string& message);
void set_warning_sink(WarningSink sink);

}  // namespace gridmap
