#pragma once

#include <functional>
#include <string>

namespace coda::log {

using Sink = std::function<void(const std::string&)>;

/// Replaces the warning sink (stderr by default). Pass an empty function to silence.
void set_warning_sink(Sink sink);
void warn(const std::string& message);

}  // namespace coda::log
