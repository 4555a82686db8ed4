#pragma once

#include <string>

#include "medlfrm/graph.hpp"
#include "medlfrm/types.hpp"

namespace medlfrm {

// Planted latent-feature ground truth: labels come from sign(Z_i W Z_j^T),
// flipped with probability noise_rate.
struct PlantedModel {
  Index K_true = 4;
  Mat Z_true;  // N x K_true, binary, no all-zero rows
  Mat W_true;  // K_true x K_true
  double margin_scale = 1.0;  // multiplies W_true at construction
  double noise_rate = 0.0;

  Index n_entities() const { return Z_true.rows(); }
  void validate() const;
};

// Draws Z from a finite Beta-Bernoulli sketch of the IBP (pi_k ~
// Beta(alpha/K, 1)), forcing at least one feature per row, and scales W by
// margin_scale.
PlantedModel make_planted_model(Index n, Index k_true, double alpha, const Mat& W, double margin_scale,
                                double noise_rate, Rng& rng);

// Fully labeled graph over all entity pairs (undirected when W is symmetric;
// self links excluded). Deterministic per seed.
RelationalGraph generate(const PlantedModel& model, std::uint64_t seed);

// Ground-truth sidecar (Z_true then W_true in decimal text).
void save_planted_sidecar(const PlantedModel& model, const std::string& path);

}  // namespace medlfrm
