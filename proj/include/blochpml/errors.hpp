#pragma once

#include <stdexcept>
#include <string>

namespace blochpml {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Wavenumber too close to the n/2 grid; the cutoff structure degenerates.
struct HalfIntegerWavenumber : Error { using Error::Error; };

/// h(alpha+j) == 1: the layer DtN factor has a pole at this sigma.
struct DegenerateExponent : Error { using Error::Error; };

/// Detour radius incompatible with the cutoff positions.
struct InvalidDelta : Error { using Error::Error; };

struct GeometryError : Error { using Error::Error; };

/// Requested trace mode count would alias on the top-vertex grid.
struct InsufficientResolution : Error { using Error::Error; };

/// Source term sampled nonzero too close to the truncation boundary.
struct SupportViolation : Error { using Error::Error; };

struct SingularSystem : Error { using Error::Error; };
struct ResidualTooLarge : Error { using Error::Error; };
struct PointOutsideCell : Error { using Error::Error; };

/// Modal oracle requested at a vanishing transverse wavenumber.
struct CutoffMode : Error { using Error::Error; };

struct MismatchedPoints : Error { using Error::Error; };
struct TooFewPoints : Error { using Error::Error; };

/// The sampled lower bound on |h| came out non-positive; indicates a
/// branch or contour bug, not a property of the method.
struct BoundViolated : Error { using Error::Error; };

struct ConfigError : Error { using Error::Error; };

}  // namespace blochpml
