#include "doctest.h"
#include "medlfrm/margin.hpp"

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace medlfrm;

namespace {

MarginProblem single_example_problem(double cost) {
  MarginProblem p;
  p.dim = 1;
  MarginExample ex;
  ex.feature = Vec::Ones(1);
  ex.label = 1.0;
  ex.cost = cost;
  ex.margin = 1.0;
  p.examples.push_back(ex);
  p.reg_precision = 1.0;
  return p;
}

MarginProblem random_problem(std::mt19937_64& gen, Index n_max = 8, Index dim_max = 6) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  MarginProblem p;
  const auto n = static_cast<Index>(1 + gen() % n_max);
  p.dim = static_cast<Index>(1 + gen() % dim_max);
  p.reg_precision = 0.25 + 2.0 * unit(gen);
  for (Index e = 0; e < n; ++e) {
    MarginExample ex;
    ex.feature = Vec(p.dim);
    for (Index d = 0; d < p.dim; ++d) ex.feature[d] = 2.0 * sym(gen);
    ex.label = gen() % 2 ? 1.0 : -1.0;
    ex.cost = 0.1 + 3.0 * unit(gen);
    ex.margin = -0.5 + 2.5 * unit(gen);
    p.examples.push_back(ex);
  }
  return p;
}

}  // namespace

TEST_CASE("one-example duals in closed form") {
  // Unconstrained optimum of margin*w - w^2/2 is w = 1; the box clips at c.
  auto p = single_example_problem(10.0);
  auto sol = solve(p, 1e-10);
  CHECK(sol.duals[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.weights[0] == doctest::Approx(1.0).epsilon(1e-8));

  auto clipped = single_example_problem(0.5);
  auto csol = solve(clipped, 1e-10);
  CHECK(csol.duals[0] == doctest::Approx(0.5));
  CHECK(csol.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("empty problem returns the offset") {
  MarginProblem p;
  p.dim = 3;
  p.offset = Vec::LinSpaced(3, 1.0, 3.0);
  auto sol = solve(p);
  CHECK(sol.weights.isApprox(p.offset));
  CHECK(sol.duals.size() == 0);
}

TEST_CASE("non-finite features are rejected") {
  auto p = single_example_problem(1.0);
  p.examples[0].feature[0] = std::nan("");
  CHECK_THROWS_AS(static_cast<void>(solve(p)), NumericalError);
}

TEST_CASE("dual coordinate descent matches the projected-gradient oracle") {
  std::mt19937_64 gen(4242);
  for (int trial = 0; trial < 60; ++trial) {
    auto p = random_problem(gen);
    auto sol = solve(p, 1e-7, 20000);
    auto ref = oracle::qp_box_oracle(p, 1e-8);
    CHECK(sol.primal_objective == doctest::Approx(ref.primal).epsilon(1e-6));
    CHECK(sol.dual_objective <= sol.primal_objective + 1e-9);

    // KKT at the returned duals
    const Vec v = sol.weights;  // offset-free problems here
    for (std::size_t e = 0; e < p.examples.size(); ++e) {
      const auto& ex = p.examples[e];
      const double margin_gap = ex.label * v.dot(ex.feature) - ex.margin;
      if (sol.duals[e] < 1e-7) {
        CHECK(margin_gap >= -1e-4);
      } else if (sol.duals[e] > ex.cost - 1e-7) {
        CHECK(margin_gap <= 1e-4);
      } else {
        CHECK(std::fabs(margin_gap) <= 1e-4);
      }
    }
  }
}

TEST_CASE("stationarity reconstruction holds to 1e-10") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_problem(gen);
    p.offset = Vec::Constant(p.dim, 0.25);
    auto sol = solve(p, 1e-5);
    Vec recon = Vec::Zero(p.dim);
    for (std::size_t e = 0; e < p.examples.size(); ++e) {
      recon += (sol.duals[e] * p.examples[e].label / p.reg_precision) * p.examples[e].feature;
    }
    CHECK((sol.weights - p.offset - recon).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("cost/precision rescaling leaves the minimizer unchanged") {
  std::mt19937_64 gen(31);
  auto p = random_problem(gen);
  auto base = solve(p, 1e-8, 50000);
  MarginProblem scaled = p;
  scaled.reg_precision *= 3.7;
  for (auto& ex : scaled.examples) ex.cost *= 3.7;
  auto s = solve(scaled, 1e-8, 50000);
  CHECK((base.weights - s.weights).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("warm starts reproduce the same solution") {
  std::mt19937_64 gen(993);
  auto p = random_problem(gen);
  auto cold = solve(p, 1e-8, 50000);
  auto warm = solve(p, 1e-8, 50000, &cold.duals);
  CHECK(warm.primal_objective == doctest::Approx(cold.primal_objective).epsilon(1e-8));
  CHECK(warm.passes <= cold.passes);
}

namespace {

MarginProblem matrix_problem(std::mt19937_64& gen, Index k, Index n, bool symmetric_features) {
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  MarginProblem p;
  p.dim = k * k;
  p.matrix_dim = k;
  p.reg_precision = 1.0;
  for (Index e = 0; e < n; ++e) {
    Mat f(k, k);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) f(a, b) = sym(gen);
    }
    if (symmetric_features) f = ((f + f.transpose()) / 2.0).eval();
    MarginExample ex;
    ex.feature = Vec(k * k);
    for (Index a = 0; a < k; ++a) ex.feature.segment(a * k, k) = f.row(a).transpose();
    ex.label = gen() % 2 ? 1.0 : -1.0;
    ex.cost = 1.0;
    ex.margin = 1.0;
    p.examples.push_back(ex);
  }
  return p;
}

Mat weights_as_matrix(const Vec& w, Index k) {
  Mat m(k, k);
  for (Index a = 0; a < k; ++a) m.row(a) = w.segment(a * k, k).transpose();
  return m;
}

}  // namespace

TEST_CASE("solve_symmetric") {
  std::mt19937_64 gen(555);

  SUBCASE("agrees with solve when features are already symmetric") {
    auto p = matrix_problem(gen, 3, 6, true);
    auto plain = solve(p, 1e-9, 50000);
    auto sym = solve_symmetric(p, 1e-9, 50000);
    CHECK(std::fabs(plain.primal_objective - sym.primal_objective) < 1e-6);
    CHECK((plain.weights - sym.weights).lpNorm<Eigen::Infinity>() < 1e-4);
  }

  SUBCASE("asymmetric feature still yields an exactly symmetric matrix") {
    MarginProblem p;
    p.dim = 4;
    p.matrix_dim = 2;
    MarginExample ex;
    ex.feature = Vec::Zero(4);
    ex.feature[1] = 1.0;  // F = e1 e2^T
    ex.label = 1.0;
    ex.cost = 10.0;
    ex.margin = 1.0;
    p.examples.push_back(ex);
    auto sol = solve_symmetric(p, 1e-10);
    Mat m = weights_as_matrix(sol.weights, 2);
    CHECK(m(0, 1) == m(1, 0));
    CHECK(m(0, 1) != 0.0);
  }

  SUBCASE("constraint can only worsen the primal") {
    for (int trial = 0; trial < 10; ++trial) {
      auto p = matrix_problem(gen, 3, 7, false);
      auto plain = solve(p, 1e-9, 50000);
      auto sym = solve_symmetric(p, 1e-9, 50000);
      CHECK(sym.primal_objective >= plain.primal_objective - 1e-7);
    }
  }
}

TEST_CASE("band mask") {
  MarginProblem p;
  const Index k = 4;
  p.dim = k * k;
  p.matrix_dim = k;
  MarginExample ex;
  ex.feature = Vec::Ones(k * k);
  ex.label = 1.0;
  p.examples.push_back(ex);

  SUBCASE("band = K-1 is a no-op") {
    auto masked = apply_band_mask(p, k - 1);
    CHECK(masked.examples[0].feature.isApprox(p.examples[0].feature));
  }

  SUBCASE("band = 0 keeps the diagonal only") {
    auto masked = apply_band_mask(p, 0);
    CHECK(masked.examples[0].feature.sum() == doctest::Approx(4.0));
    for (Index a = 0; a < k; ++a) CHECK(masked.examples[0].feature[a * k + a] == 1.0);
  }

  SUBCASE("band = 1 on K = 4 keeps 10 positions") {
    auto masked = apply_band_mask(p, 1);
    int nonzero = 0;
    for (Index c = 0; c < k * k; ++c) nonzero += masked.examples[0].feature[c] != 0.0;
    CHECK(nonzero == 10);
  }
}
