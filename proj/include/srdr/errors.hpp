#pragma once

#include <stdexcept>
#include <string>

namespace srdr {

// Failure category, doubling as the process exit code of the command-line
// driver: 2 invalid configuration, 3 numerical failure, 4 I/O failure.
enum class ErrorCategory : int { config = 2, numeric = 3, io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

#define SRDR_DEFINE_ERROR(Name, Category)                  \
  struct Name : Error {                                    \
    explicit Name(const std::string& what)                 \
        : Error(ErrorCategory::Category, what) {}          \
  }

SRDR_DEFINE_ERROR(DimensionMismatch, numeric);
SRDR_DEFINE_ERROR(NonSymmetric, numeric);
SRDR_DEFINE_ERROR(NoConvergence, numeric);
SRDR_DEFINE_ERROR(NotScalar, numeric);
SRDR_DEFINE_ERROR(NotProjector, numeric);
SRDR_DEFINE_ERROR(NotOrthonormal, numeric);
SRDR_DEFINE_ERROR(NotPositiveDefinite, numeric);
SRDR_DEFINE_ERROR(EmptyBatch, numeric);
SRDR_DEFINE_ERROR(NonFiniteGradient, numeric);
SRDR_DEFINE_ERROR(NonFiniteLoss, numeric);
SRDR_DEFINE_ERROR(SolveFailure, numeric);
SRDR_DEFINE_ERROR(RankExhausted, numeric);
SRDR_DEFINE_ERROR(InvalidConfig, config);
SRDR_DEFINE_ERROR(MissingOracle, config);
SRDR_DEFINE_ERROR(IoError, io);
SRDR_DEFINE_ERROR(MalformedCheckpoint, io);
SRDR_DEFINE_ERROR(MalformedCsv, io);

#undef SRDR_DEFINE_ERROR

}  // namespace srdr
