#pragma once

#include <stdexcept>
#include <string>

namespace liouville {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Projective layer.
struct DegenerateQuadruple : Error { using Error::Error; };
struct DegenerateTriple : Error { using Error::Error; };

// Metric layer.
struct OutOfDomain : Error { using Error::Error; };
struct RadiusExceeded : Error { using Error::Error; };

// Families and coefficients.
struct ParameterOutOfRange : Error { using Error::Error; };
struct UnsupportedFamily : Error { using Error::Error; };
struct NormOverflow : Error { using Error::Error; };
struct NormTooLarge : Error { using Error::Error; };
struct DerivativeVanishes : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };

// Boxes and partitions.
struct DegenerateBox : Error { using Error::Error; };
struct NonPositiveMass : Error { using Error::Error; };
struct LevelTooDeep : Error { using Error::Error; };
struct BranchViolation : Error { using Error::Error; };

// Evaluation engine.
struct OutsideNeighborhood : Error { using Error::Error; };
struct InsufficientLevels : Error { using Error::Error; };
struct QuadratureBudgetExceeded : Error { using Error::Error; };

// Tooling.
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace liouville
