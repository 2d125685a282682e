#pragma once

#include <stdexcept>
#include <string>

namespace rfgap {

// Error taxonomy, mapped onto process exit codes by the CLI:
//   UsageError   -> 2  (bad flags, unknown subcommand, malformed requests)
//   DataError    -> 3  (malformed input files, schema violations)
//   InternalError-> 4  (broken invariants; indicates a bug)
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InternalError : std::logic_error {
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

#define RFGAP_REQUIRE(cond, msg)                         \
  do {                                                   \
    if (!(cond)) throw ::rfgap::InternalError(msg);      \
  } while (0)

}  // namespace rfgap
