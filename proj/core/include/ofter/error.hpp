#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ofter {

// Raised for every contract violation or numerical failure inside the library.
// The message is prefixed with the originating module, e.g. "frame: ragged row 4".
class Error : public std::runtime_error {
 public:
  Error(std::string_view module, const std::string& what);

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Non-fatal diagnostics (ridge fallbacks, degenerate weights, ...). The default
// sink writes to stderr; tools and tests may redirect or silence it.
using WarningSink = std::function<void(std::string_view module, std::string_view message)>;

void set_warning_sink(WarningSink sink);
void warn(std::string_view module, const std::string& message);

// Call counters used to verify which numerical paths a configuration exercises.
struct Counters {
  std::atomic<std::uint64_t> full_eig{0};
  std::atomic<std::uint64_t> secular_solves{0};
  std::atomic<std::uint64_t> osmc_fits{0};

  void reset() noexcept {
    full_eig = 0;
    secular_solves = 0;
    osmc_fits = 0;
  }
};

Counters& counters() noexcept;

}  // namespace ofter
