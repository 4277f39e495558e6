#pragma once

#include <stdexcept>
#include <string>

namespace qbme {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
  virtual const char* name() const noexcept { return "Error"; }
};

#define QBME_DEFINE_ERROR(NAME)                                        \
  struct NAME : Error {                                                \
    explicit NAME(const std::string& msg)                              \
        : Error(std::string(#NAME) + ": " + msg) {}                    \
    const char* name() const noexcept override { return #NAME; }      \
  };

QBME_DEFINE_ERROR(InvalidArgument)
QBME_DEFINE_ERROR(NotHermitian)
QBME_DEFINE_ERROR(NotPSD)
QBME_DEFINE_ERROR(TraceNotOne)
QBME_DEFINE_ERROR(DimensionMismatch)
QBME_DEFINE_ERROR(DegenerateQR)
QBME_DEFINE_ERROR(RankOutOfRange)
QBME_DEFINE_ERROR(NotNormalized)
QBME_DEFINE_ERROR(ZeroProbabilityOutcome)
QBME_DEFINE_ERROR(NotUnitary)
QBME_DEFINE_ERROR(CertificationFailed)
QBME_DEFINE_ERROR(OutcomeOutOfRange)
QBME_DEFINE_ERROR(IdentityViolated)
QBME_DEFINE_ERROR(DegenerateEnsemble)

#undef QBME_DEFINE_ERROR

}  // namespace qbme
