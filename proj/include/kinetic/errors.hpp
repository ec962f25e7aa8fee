#pragma once

#include <stdexcept>
#include <string>

namespace kinetic {

/// Base class for every error raised by the library. Callers that only care
/// about "something went wrong in the simulation" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition on a numeric argument violated (r <= 0, T <= 0, ...).
class DomainError : public Error { using Error::Error; };
// Two particles at the same position.
class SingularityError : public Error { using Error::Error; };
// Root bracketing or quadrature failed.
class NumericalError : public Error { using Error::Error; };
// A grid is too small for the state it has to hold.
class CapacityError : public Error { using Error::Error; };
// Explicit time step too large for the scheme's stability guard.
class StepSizeError : public Error { using Error::Error; };
// A particle left the box in soft-wall mode.
class IntegrationBlowup : public Error { using Error::Error; };
// Sampler could not place the requested particles.
class FeasibilityError : public Error { using Error::Error; };
// Not enough samples for the requested binning.
class ResolutionError : public Error { using Error::Error; };
// Malformed input data (mismatched sizes, empty sets, ...).
class InputError : public Error { using Error::Error; };

} // namespace kinetic
