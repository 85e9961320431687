#pragma once

#include <stdexcept>
#include <string>

namespace cstar {

// Base class for all toolkit failures.  Subclasses exist so callers can
// branch on the condition (pipeline gates, bad input, numerical breakdown)
// without parsing messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CSTAR_DEFINE_ERROR(NAME)   \
  class NAME : public Error {      \
   public:                         \
    using Error::Error;            \
  }

// Shape / input problems.
CSTAR_DEFINE_ERROR(DimensionMismatch);
CSTAR_DEFINE_ERROR(NotHermitian);
CSTAR_DEFINE_ERROR(NotInvertible);
CSTAR_DEFINE_ERROR(EpsOutOfRange);
CSTAR_DEFINE_ERROR(NotNested);
CSTAR_DEFINE_ERROR(NotIntermediate);
CSTAR_DEFINE_ERROR(NotInAlgebra);
CSTAR_DEFINE_ERROR(PreconditionFailed);

// Quantitative gates: the inputs are too far apart for the construction.
CSTAR_DEFINE_ERROR(TooFar);

// Numerical breakdown of a construction.
CSTAR_DEFINE_ERROR(SingularFrame);
CSTAR_DEFINE_ERROR(DegenerateForm);
CSTAR_DEFINE_ERROR(CompatibilityResidualExceeded);
CSTAR_DEFINE_ERROR(CompatibilityRequired);
CSTAR_DEFINE_ERROR(IllDefined);
CSTAR_DEFINE_ERROR(ReadbackFailed);
CSTAR_DEFINE_ERROR(ConjugationFailed);

#undef CSTAR_DEFINE_ERROR

}  // namespace cstar
