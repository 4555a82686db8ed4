#include "medlfrm/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace medlfrm {

void PlantedModel::validate() const {
  if (Z_true.cols() != K_true || W_true.rows() != K_true || W_true.cols() != K_true) {
    throw std::invalid_argument("planted model: dimension mismatch");
  }
  if (!(noise_rate >= 0.0 && noise_rate < 0.5)) {
    throw std::invalid_argument("planted model: noise_rate must lie in [0, 0.5)");
  }
  for (Index i = 0; i < Z_true.rows(); ++i) {
    if (Z_true.row(i).sum() == 0.0) {
      throw std::invalid_argument("planted model: every entity needs at least one feature");
    }
  }
}

PlantedModel make_planted_model(Index n, Index k_true, double alpha, const Mat& W,
                                double margin_scale, double noise_rate, Rng& rng) {
  PlantedModel model;
  model.K_true = k_true;
  model.W_true = margin_scale * W;
  model.margin_scale = margin_scale;
  model.noise_rate = noise_rate;
  model.Z_true = Mat::Zero(n, k_true);
  // pi_k ~ Beta(alpha / K, 1) via inverse CDF: u^{K / alpha}.
  Vec pi(k_true);
  for (Index k = 0; k < k_true; ++k) {
    pi[k] = std::pow(rng.uniform(), static_cast<double>(k_true) / alpha);
  }
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < k_true; ++k) {
      model.Z_true(i, k) = rng.bernoulli(pi[k]) ? 1.0 : 0.0;
    }
    if (model.Z_true.row(i).sum() == 0.0) {
      model.Z_true(i, rng.index(static_cast<std::size_t>(k_true))) = 1.0;
    }
  }
  model.validate();
  return model;
}

RelationalGraph generate(const PlantedModel& model, std::uint64_t seed) {
  model.validate();
  const bool symmetric = model.W_true.isApprox(model.W_true.transpose());
  Rng rng(seed);

  RelationalGraph graph;
  graph.n_entities = static_cast<int>(model.n_entities());
  graph.relations.emplace_back();
  graph.relations[0].directed = !symmetric;

  const Index n = model.n_entities();
  Mat f = model.Z_true * model.W_true * model.Z_true.transpose();
  for (Index i = 0; i < n; ++i) {
    const Index j0 = symmetric ? i + 1 : 0;
    for (Index j = j0; j < n; ++j) {
      if (i == j) continue;
      double label = f(i, j) >= 0.0 ? 1.0 : -1.0;
      if (rng.bernoulli(model.noise_rate)) label = -label;
      graph.relations[0].add(static_cast<int>(i), static_cast<int>(j), label);
    }
  }
  return graph;
}

void save_planted_sidecar(const PlantedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write sidecar: " + path);
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  out << "N " << model.n_entities() << "\nK_true " << model.K_true << "\nZ_true\n";
  for (Index i = 0; i < model.Z_true.rows(); ++i) {
    for (Index k = 0; k < model.K_true; ++k) {
      if (k) out << ' ';
      out << static_cast<int>(model.Z_true(i, k));
    }
    out << '\n';
  }
  out << "W_true\n";
  for (Index a = 0; a < model.K_true; ++a) {
    for (Index b = 0; b < model.K_true; ++b) {
      if (b) out << ' ';
      put(model.W_true(a, b));
    }
    out << '\n';
  }
}

}  // namespace medlfrm
