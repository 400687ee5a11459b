#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace isk::num {

// All precondition violations in the library surface as Error with a
// human-readable message naming the offending values.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace isk::num

#define ISK_CHECK(cond, msg)                        \
  do {                                              \
    if (!(cond)) {                                  \
      std::ostringstream oss_;                      \
      oss_ << msg;                                  \
      throw ::isk::num::Error(oss_.str());          \
    }                                               \
  } while (0)
