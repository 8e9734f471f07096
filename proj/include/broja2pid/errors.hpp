#pragma once

#include <stdexcept>
#include <string>

namespace broja2pid {

// Package-level exception. Every error raised by the library derives from it,
// so callers that only care about "the estimator failed" can catch this one.
class Exception : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BROJA2PID_DEFINE_ERROR(Name)                      \
  class Name : public Exception {                         \
   public:                                                \
    explicit Name(const std::string& what)                \
        : Exception(std::string(#Name ": ") + what) {}    \
  }

// distributions
BROJA2PID_DEFINE_ERROR(NegativeProbability);
BROJA2PID_DEFINE_ERROR(NotNormalized);
BROJA2PID_DEFINE_ERROR(EmptyDistribution);
BROJA2PID_DEFINE_ERROR(UnknownGrouping);
// cone
BROJA2PID_DEFINE_ERROR(BoundaryPoint);
// model
BROJA2PID_DEFINE_ERROR(EmptyModel);
BROJA2PID_DEFINE_ERROR(InfeasiblePoint);
// solver
BROJA2PID_DEFINE_ERROR(SolverException);
BROJA2PID_DEFINE_ERROR(IllConditionedKKT);
BROJA2PID_DEFINE_ERROR(InvalidParams);
// pid
BROJA2PID_DEFINE_ERROR(MassLoss);
// gates
BROJA2PID_DEFINE_ERROR(UnknownGate);
BROJA2PID_DEFINE_ERROR(InvalidSize);
// oracle
BROJA2PID_DEFINE_ERROR(DimensionTooLarge);
// cli input
BROJA2PID_DEFINE_ERROR(ParseError);

#undef BROJA2PID_DEFINE_ERROR

}  // namespace broja2pid
