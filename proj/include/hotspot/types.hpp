#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hotspot {

using Real = double;
using Point2 = Eigen::Vector2d;
using Index = std::int32_t;

/// Invalid argument to an operation (bad epsilon, index out of range, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Geometric construction failed or a point is outside the domain.
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Triangulation could not meet its quality/size contract.
struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Assembly, evaluation, or eigensolver failure.
struct FemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A verification step hit a degenerate input (ambiguous sign, zero field, ...).
struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool is_finite(const Point2& p) {
    return std::isfinite(p.x()) && std::isfinite(p.y());
}

}  // namespace hotspot
