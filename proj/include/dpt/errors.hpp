#pragma once

#include <stdexcept>
#include <string>

namespace dpt {

enum class Errc {
    NonConvexPower,
    ProbabilityNotNormalized,
    RateCapBelowArrivalMax,
    BufferTooSmall,
    ZeroArrivalRate,
    StateOutOfRange,
    InfeasibleThresholds,
    MalformedSpec,
    InfeasiblePolicy,
    NotUnichain,
    SingularSystem,
    NotAClosedClass,
    NotReducible,
    PoliciesDifferInMultipleRows,
    ZeroPowerDifference,
    NonStrictlyConvexPower,
    IterationLimitExceeded,
    InfeasibleConstraint,
    NumericalBreakdown,
    ConfigError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

}  // namespace dpt
