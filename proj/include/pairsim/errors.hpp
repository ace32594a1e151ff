#pragma once

#include <stdexcept>
#include <string>

namespace pairsim {

/// Bad inputs or violated preconditions. The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Failures arising during computation (tolerances, brackets, bounds).
/// The CLI maps these to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define PAIRSIM_DEFINE_ERROR(NAME, BASE) \
  struct NAME : BASE {                   \
    using BASE::BASE;                    \
  }

PAIRSIM_DEFINE_ERROR(DimensionMismatch, ValidationError);
PAIRSIM_DEFINE_ERROR(InvalidProbability, ValidationError);
PAIRSIM_DEFINE_ERROR(DegenerateRate, ValidationError);
PAIRSIM_DEFINE_ERROR(InvalidPopulation, ValidationError);
PAIRSIM_DEFINE_ERROR(SymmetryViolation, ValidationError);
PAIRSIM_DEFINE_ERROR(NotTwoByTwo, ValidationError);
PAIRSIM_DEFINE_ERROR(InvalidState, ValidationError);
PAIRSIM_DEFINE_ERROR(InvalidConfig, ValidationError);
PAIRSIM_DEFINE_ERROR(StateSpaceTooLarge, ValidationError);
PAIRSIM_DEFINE_ERROR(RoundingInfeasible, ValidationError);
PAIRSIM_DEFINE_ERROR(Absorbed, ValidationError);
PAIRSIM_DEFINE_ERROR(SingularZ, ValidationError);
PAIRSIM_DEFINE_ERROR(InvalidSimplexPoint, ValidationError);
PAIRSIM_DEFINE_ERROR(NotFineBalance, ValidationError);
PAIRSIM_DEFINE_ERROR(FineBalanceExcluded, ValidationError);
PAIRSIM_DEFINE_ERROR(DomainError, ValidationError);
PAIRSIM_DEFINE_ERROR(MissingFluidSolution, ValidationError);

PAIRSIM_DEFINE_ERROR(ToleranceNotMet, NumericalError);
PAIRSIM_DEFINE_ERROR(BoundViolation, NumericalError);
PAIRSIM_DEFINE_ERROR(BracketFailure, NumericalError);
PAIRSIM_DEFINE_ERROR(QuadratureFailure, NumericalError);

#undef PAIRSIM_DEFINE_ERROR

}  // namespace pairsim
