#pragma once

#include <array>
#include <functional>

namespace gdm {

// Spatial point in [0,1]^d. One-dimensional problems use x[0] and keep
// x[1] == 0, so scalar fields can be shared between dimensions.
using Point = std::array<double, 2>;
using Vec2 = std::array<double, 2>;

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Vec2(const Point&)>;

}  // namespace gdm
