#include "ofter/error.hpp"

#include <iostream>
#include <mutex>

namespace ofter {

Error::Error(std::string_view module, const std::string& what)
    : std::runtime_error(std::string(module) + ": " + what), module_(module) {}

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink_slot() {
  static WarningSink sink = [](std::string_view module, std::string_view message) {
    std::cerr << "warning [" << module << "] " << message << '\n';
  };
  return sink;
}

}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex());
  sink_slot() = std::move(sink);
}

void warn(std::string_view module, const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (sink_slot()) sink_slot()(module, message);
}

Counters& counters() noexcept {
  static Counters c;
  return c;
}

}  // namespace ofter
