#pragma once

#include <stdexcept>
#include <string>

namespace vrpe {

// Every failure raised by the library derives from Error and carries a stable
// machine-readable kind string (used by the CLI's error JSON).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define VRPE_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

VRPE_DEFINE_ERROR(InvalidInstance);
VRPE_DEFINE_ERROR(NonErgodicChain);
VRPE_DEFINE_ERROR(DimensionMismatch);
VRPE_DEFINE_ERROR(RankDeficientFeatures);
VRPE_DEFINE_ERROR(SingularSystem);
VRPE_DEFINE_ERROR(InvalidDistribution);
VRPE_DEFINE_ERROR(ScheduleInfeasible);
VRPE_DEFINE_ERROR(InfeasibleInputs);
VRPE_DEFINE_ERROR(InvalidGamma);
VRPE_DEFINE_ERROR(InvalidSpec);
VRPE_DEFINE_ERROR(ConfigError);
VRPE_DEFINE_ERROR(SerializationError);

#undef VRPE_DEFINE_ERROR

}  // namespace vrpe
