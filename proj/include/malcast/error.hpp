#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace malcast {

/// Every failure raised by the library carries a short machine-readable
/// category ("shape", "data", ...) next to the human message. The CLI prints
/// both on a single line.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

#define MALCAST_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(tag, message) {}   \
  };

MALCAST_DEFINE_ERROR(ShapeError, "shape")
MALCAST_DEFINE_ERROR(ArgumentError, "argument")
MALCAST_DEFINE_ERROR(DataError, "data")
MALCAST_DEFINE_ERROR(MapError, "map")
MALCAST_DEFINE_ERROR(PreconditionError, "precondition")
MALCAST_DEFINE_ERROR(CoverageError, "coverage")
MALCAST_DEFINE_ERROR(CompletenessError, "completeness")
MALCAST_DEFINE_ERROR(DivergenceError, "divergence")
MALCAST_DEFINE_ERROR(ContractError, "contract")
MALCAST_DEFINE_ERROR(IoError, "io")
MALCAST_DEFINE_ERROR(ConfigError, "config")

#undef MALCAST_DEFINE_ERROR

}  // namespace malcast
