#pragma once

#include <vector>

#include "medlfrm/rng.hpp"
#include "medlfrm/types.hpp"

namespace medlfrm {

// Weighted soft-margin classification instances of the form
//   min_w  (lambda/2) ||w||^2 + sum_e c_e xi_e
//   s.t.   y_e (w . x_e) >= margin_e - xi_e,  xi_e >= 0.
// The optional offset is a fixed vector added to the returned weights after
// solving; the constraints act on the unshifted variable.
struct MarginExample {
  Vec feature;
  double label = 1.0;   // +1 or -1
  double cost = 1.0;    // c_e > 0
  double margin = 1.0;  // per-example target margin
};

struct MarginProblem {
  std::vector<MarginExample> examples;
  Index dim = 0;
  Index matrix_dim = 0;  // leading matrix_dim^2 entries form a row-major matrix block
  double reg_precision = 1.0;
  Vec offset;  // empty = zero shift

  void validate() const;
};

struct MarginSolution {
  Vec weights;  // lambda^{-1} sum_e omega_e y_e x_e + offset
  Vec duals;    // omega_e in [0, c_e]
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  int passes = 0;
  bool converged = true;
};

// Dual coordinate descent over the box-constrained dual, with a random
// permutation per pass and liblinear-style shrinking. Stops at relative
// duality gap <= tol or after max_passes.
MarginSolution solve(const MarginProblem& problem, double tol = 1e-4, int max_passes = 1000,
                     const Vec* warm_duals = nullptr, std::uint64_t shuffle_seed = 1);

// Same problem with the matrix block constrained to a symmetric solution.
// Implemented by an isometric map onto the upper-triangular basis, so the
// constrained problem is an ordinary solve().
MarginSolution solve_symmetric(const MarginProblem& problem, double tol = 1e-4,
                               int max_passes = 1000, const Vec* warm_duals = nullptr,
                               std::uint64_t shuffle_seed = 1);

// Zeroes matrix-block feature entries farther than `band` from the diagonal
// (band = 0 keeps the diagonal only). The attribute tail is untouched.
MarginProblem apply_band_mask(const MarginProblem& problem, Index band);

// Indicator vector over problem coordinates: 1 on in-band matrix entries and
// on the attribute tail. band < 0 means no band restriction.
Vec weight_mask(Index matrix_dim, Index attr_dim, Index band);

}  // namespace medlfrm
