#pragma once

#include <stdexcept>
#include <string>

namespace gde {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Geometry
struct NonPositiveDepth : Error {
    explicit NonPositiveDepth(double z)
        : Error("depth must be positive, got " + std::to_string(z)) {}
};

struct DisplacementSingularity : Error {
    DisplacementSingularity()
        : Error("pixel displacement pushes the ground contact to the horizon") {}
};

// Pose
struct ForwardDirectionBehindCamera : Error {
    ForwardDirectionBehindCamera()
        : Error("rotated forward direction has non-positive z; cannot project a vanishing point") {}
};

struct EmptyObservations : Error {
    EmptyObservations() : Error("pose fit requires at least one observation") {}
};

// Maps / feature tensors
struct ZeroDimension : Error {
    ZeroDimension() : Error("map dimensions must be at least 1x1") {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what) : Error("dimension mismatch: " + what) {}
};

struct MaskAllZeroRow : Error {
    explicit MaskAllZeroRow(int row)
        : Error("attention row " + std::to_string(row) + " has no visible entries after masking") {}
};

// Synthetic scenes
struct PlacementFailure : Error {
    PlacementFailure()
        : Error("could not place objects with non-overlapping image footprints") {}
};

// Parsers
struct ParseError : Error {
    ParseError(std::string kind_, int line_, int column_, const std::string& detail)
        : Error(kind_ + " at line " + std::to_string(line_) +
                (column_ > 0 ? ", column " + std::to_string(column_) : "") +
                (detail.empty() ? "" : ": " + detail)),
          kind(std::move(kind_)), line(line_), column(column_) {}

    std::string kind;  // "MissingP2Line", "WrongFieldCount", "MalformedFloat"
    int line = 0;      // 1-based; 0 when not line-specific
    int column = 0;    // 1-based; 0 when not column-specific
};

}  // namespace gde
