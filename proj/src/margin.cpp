#include "medlfrm/margin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace medlfrm {

void MarginProblem::validate() const {
  if (!(reg_precision > 0.0)) throw std::invalid_argument("margin: reg_precision must be positive");
  if (matrix_dim < 0 || matrix_dim * matrix_dim > dim) {
    throw std::invalid_argument("margin: matrix block exceeds feature dimension");
  }
  if (offset.size() != 0 && offset.size() != dim) {
    throw std::invalid_argument("margin: offset dimension mismatch");
  }
  for (const auto& e : examples) {
    if (e.feature.size() != dim) throw std::invalid_argument("margin: feature dimension mismatch");
    if (e.label != 1.0 && e.label != -1.0) throw std::invalid_argument("margin: labels must be +1/-1");
    if (!(e.cost > 0.0)) throw std::invalid_argument("margin: costs must be positive");
    if (!e.feature.allFinite() || !std::isfinite(e.margin)) {
      throw NumericalError("margin: non-finite example");
    }
  }
}

namespace {

double primal_objective(const MarginProblem& p, const Vec& v) {
  double obj = 0.5 * p.reg_precision * v.squaredNorm();
  for (const auto& e : p.examples) {
    obj += e.cost * std::max(0.0, e.margin - e.label * v.dot(e.feature));
  }
  return obj;
}

double dual_objective(const MarginProblem& p, const Vec& v, const Vec& omega) {
  double obj = 0.0;
  for (std::size_t e = 0; e < p.examples.size(); ++e) obj += p.examples[e].margin * omega[e];
  return obj - 0.5 * p.reg_precision * v.squaredNorm();
}

}  // namespace

MarginSolution solve(const MarginProblem& problem, double tol, int max_passes,
                     const Vec* warm_duals, std::uint64_t shuffle_seed) {
  problem.validate();
  const auto n = static_cast<Index>(problem.examples.size());
  const double lambda = problem.reg_precision;

  MarginSolution sol;
  sol.duals = Vec::Zero(n);
  if (warm_duals != nullptr && warm_duals->size() == n) {
    for (Index e = 0; e < n; ++e) {
      sol.duals[e] = std::clamp((*warm_duals)[e], 0.0, problem.examples[e].cost);
    }
  }

  Vec v = Vec::Zero(problem.dim);
  for (Index e = 0; e < n; ++e) {
    if (sol.duals[e] != 0.0) {
      v += (sol.duals[e] * problem.examples[e].label / lambda) * problem.examples[e].feature;
    }
  }

  if (n == 0) {
    sol.weights = problem.offset.size() ? problem.offset : Vec::Zero(problem.dim);
    sol.primal_objective = sol.dual_objective = 0.0;
    return sol;
  }

  Vec qdiag(n);
  for (Index e = 0; e < n; ++e) qdiag[e] = problem.examples[e].feature.squaredNorm() / lambda;

  Rng rng(shuffle_seed);
  std::vector<Index> active(n);
  for (Index e = 0; e < n; ++e) active[e] = e;
  std::size_t active_size = active.size();
  double pg_max_old = std::numeric_limits<double>::infinity();
  double pg_min_old = -std::numeric_limits<double>::infinity();

  sol.converged = false;
  int pass = 0;
  for (pass = 1; pass <= max_passes; ++pass) {
    // Random permutation of the live prefix; shrunk coordinates stay parked
    // in the tail until the unshrink step brings them back.
    for (std::size_t i = active_size; i > 1; --i) {
      std::swap(active[i - 1], active[rng.index(i)]);
    }
    double pg_max_new = -std::numeric_limits<double>::infinity();
    double pg_min_new = std::numeric_limits<double>::infinity();

    for (std::size_t s = 0; s < active_size; ++s) {
      const Index e = active[s];
      const auto& ex = problem.examples[e];
      if (qdiag[e] == 0.0) {
        // Zero feature: the dual is linear in omega_e, optimum at a box corner.
        double target = ex.margin > 0.0 ? ex.cost : 0.0;
        sol.duals[e] = target;
        continue;
      }
      const double grad = ex.label * v.dot(ex.feature) - ex.margin;
      double pg = grad;
      if (sol.duals[e] <= 0.0) {
        if (grad > pg_max_old) {
          std::swap(active[s], active[--active_size]);
          --s;
          continue;
        }
        pg = std::min(grad, 0.0);
      } else if (sol.duals[e] >= ex.cost) {
        if (grad < pg_min_old) {
          std::swap(active[s], active[--active_size]);
          --s;
          continue;
        }
        pg = std::max(grad, 0.0);
      }
      pg_max_new = std::max(pg_max_new, pg);
      pg_min_new = std::min(pg_min_new, pg);
      if (std::fabs(pg) > 1e-14) {
        const double old = sol.duals[e];
        sol.duals[e] = std::clamp(old - grad / qdiag[e], 0.0, ex.cost);
        if (sol.duals[e] != old) {
          v += ((sol.duals[e] - old) * ex.label / lambda) * ex.feature;
        }
      }
    }

    const double primal = primal_objective(problem, v);
    const double dual = dual_objective(problem, v, sol.duals);
    if (primal - dual <= tol * (1.0 + std::fabs(primal))) {
      sol.converged = true;
      break;
    }
    if (pg_max_new - pg_min_new < tol && active_size < active.size()) {
      // Shrunk set looks optimal; bring everything back before deciding.
      active_size = active.size();
      pg_max_old = std::numeric_limits<double>::infinity();
      pg_min_old = -std::numeric_limits<double>::infinity();
      continue;
    }
    pg_max_old = pg_max_new <= 0.0 ? std::numeric_limits<double>::infinity() : pg_max_new;
    pg_min_old = pg_min_new >= 0.0 ? -std::numeric_limits<double>::infinity() : pg_min_new;
  }
  sol.passes = std::min(pass, max_passes);

  // Rebuild v from the duals so the stationarity identity holds to rounding.
  v.setZero();
  for (Index e = 0; e < n; ++e) {
    if (sol.duals[e] != 0.0) {
      v += (sol.duals[e] * problem.examples[e].label / lambda) * problem.examples[e].feature;
    }
  }
  sol.primal_objective = primal_objective(problem, v);
  sol.dual_objective = dual_objective(problem, v, sol.duals);
  sol.weights = problem.offset.size() ? Vec(v + problem.offset) : v;
  return sol;
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

Index sym_dim(Index k) { return k * (k + 1) / 2; }

// Isometric map of the matrix block onto the upper-triangular basis:
// diagonal entries pass through, the (k,k') pair maps to
// (F_kk' + F_k'k)/sqrt(2). Frobenius norms and inner products with symmetric
// matrices are preserved, so the transformed solve *is* the constrained one.
Vec to_symmetric_basis(const Vec& x, Index k, Index attr_dim) {
  Vec out(sym_dim(k) + attr_dim);
  Index at = 0;
  for (Index a = 0; a < k; ++a) {
    out[at++] = x[a * k + a];
    for (Index b = a + 1; b < k; ++b) {
      out[at++] = (x[a * k + b] + x[b * k + a]) / kSqrt2;
    }
  }
  out.tail(attr_dim) = x.tail(attr_dim);
  return out;
}

Vec from_symmetric_basis(const Vec& u, Index k, Index attr_dim) {
  Vec out(k * k + attr_dim);
  Index at = 0;
  for (Index a = 0; a < k; ++a) {
    out[a * k + a] = u[at++];
    for (Index b = a + 1; b < k; ++b) {
      const double w = u[at++] / kSqrt2;
      out[a * k + b] = w;
      out[b * k + a] = w;
    }
  }
  out.tail(attr_dim) = u.tail(attr_dim);
  return out;
}

}  // namespace

MarginSolution solve_symmetric(const MarginProblem& problem, double tol, int max_passes,
                               const Vec* warm_duals, std::uint64_t shuffle_seed) {
  problem.validate();
  const Index k = problem.matrix_dim;
  if (k == 0) return solve(problem, tol, max_passes, warm_duals, shuffle_seed);
  const Index attr_dim = problem.dim - k * k;

  MarginProblem reduced;
  reduced.dim = sym_dim(k) + attr_dim;
  reduced.matrix_dim = 0;
  reduced.reg_precision = problem.reg_precision;
  reduced.examples.reserve(problem.examples.size());
  for (const auto& ex : problem.examples) {
    reduced.examples.push_back({to_symmetric_basis(ex.feature, k, attr_dim), ex.label, ex.cost, ex.margin});
  }

  MarginSolution sol = solve(reduced, tol, max_passes, warm_duals, shuffle_seed);
  Vec weights = from_symmetric_basis(sol.weights, k, attr_dim);
  if (problem.offset.size()) weights += problem.offset;
  sol.weights = std::move(weights);
  return sol;
}

MarginProblem apply_band_mask(const MarginProblem& problem, Index band) {
  if (band < 0) throw std::invalid_argument("apply_band_mask: band must be nonnegative");
  const Index k = problem.matrix_dim;
  MarginProblem masked = problem;
  if (k == 0) return masked;
  for (auto& ex : masked.examples) {
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) {
        if (std::abs(a - b) > band) ex.feature[a * k + b] = 0.0;
      }
    }
  }
  return masked;
}

Vec weight_mask(Index matrix_dim, Index attr_dim, Index band) {
  Vec mask = Vec::Ones(matrix_dim * matrix_dim + attr_dim);
  if (band >= 0) {
    for (Index a = 0; a < matrix_dim; ++a) {
      for (Index b = 0; b < matrix_dim; ++b) {
        if (std::abs(a - b) > band) mask[a * matrix_dim + b] = 0.0;
      }
    }
  }
  return mask;
}

}  // namespace medlfrm
