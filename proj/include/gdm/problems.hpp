#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gdm/field.hpp"

namespace gdm {

// Closed-form solution data attached to a benchmark problem.
struct ExactBundle {
  ScalarField value;
  VectorField gradient;
  ScalarField laplacian;
  ScalarField bilaplacian;
};

// One instance of the clamped fourth-order obstacle problem on [0,1]^dim:
// find the displacement below the obstacle `psi` under the load `f`.
struct ObstacleProblem {
  std::string id;
  int dim = 0;  // 0: any dimension; 1/2: fixed
  ScalarField load;
  ScalarField obstacle;
  std::optional<ExactBundle> exact;
};

// Benchmark catalog; throws std::invalid_argument for unknown ids.
//   zero           f=0,   psi=0.1   (exact solution 0, any dimension)
//   no-contact-1d  snug load for x^2(1-x)^2, psi=1 (never touched)
//   no-contact-2d  same construction for x^2(1-x)^2 * y^2(1-y)^2
//   contact-1d     f=200, psi=0.005 (active contact region)
//   contact-2d     f=500, psi=0.002
ObstacleProblem catalog(const std::string& id);
std::vector<std::string> catalog_ids();

// Contact force lambda = f - Delta^2(exact); nonnegative and supported on
// the contact region for the catalog problems. Requires an exact bundle.
ScalarField multiplier_field(const ObstacleProblem& p);

}  // namespace gdm
