#pragma once

#include <optional>

#include "medlfrm/model.hpp"
#include "medlfrm/types.hpp"

namespace medlfrm {

inline NormalGammaPrior ng_prior_from_config(const ModelConfig& config) {
  return {config.ng_mu0, config.ng_n0, config.ng_nu0, config.ng_S0};
}

// Adaptive per-link margin ell_ij = ell - E[mu] Y (Tr(E Zbar_ij) + 1^T x_ij),
// with E restricted to the model's free-weight mask.
double adaptive_margin(const Mat& psi, const LinkInstance& link, double ell, double mean_mu,
                       const Vec& mask);

std::vector<double> adaptive_margins(const Mat& psi, const TrainingSet& tr,
                                     const ModelConfig& config, double mean_mu);

// Solves the recentred problem at lambda = E[tau] and shifts the solution
// back by E[mu] on the free entries.
WeightPosterior solve_weight_posterior_ng(const Mat& psi, const TrainingSet& tr, int relation,
                                          const ModelConfig& config, const NormalGammaState& state,
                                          double cost_scale, const std::vector<char>* subset = nullptr,
                                          DualCache* warm = nullptr);

// Aggregate view of the free Gaussian coordinates feeding the NG update.
struct WeightBlockStats {
  double w_count = 0.0;   // free Lambda entries across relations
  double w_sum = 0.0;
  double w_sq_dev = 0.0;  // sum (Lambda_e - mean)^2
  double d_count = 0.0;   // kappa entries across relations
  double d_sum = 0.0;
  double d_sq_dev = 0.0;
  double lambda = 1.0;    // shared posterior precision
};

WeightBlockStats weight_block_stats(const std::vector<WeightPosterior>& weights,
                                    const ModelConfig& config);

NormalGammaState update_ng(const NormalGammaPrior& prior, const WeightBlockStats& stats);

// Convenience form matching the K x K / D description: full weight matrix,
// no mask.
NormalGammaState update_ng(const NormalGammaPrior& prior, const WeightPosterior& weights,
                           Index k, Index d);

// Exact KL(p(mu, tau, Theta) || p0(mu, tau, Theta)) under the mean-field
// posterior NG(mu~, n~, nu~, S~) x prod N(Lambda_e, lambda^-1).
double evaluate_ng_kl(const NormalGammaState& state, const NormalGammaPrior& prior,
                      const WeightBlockStats& stats);

double evaluate_ng_kl(const NormalGammaState& state, const NormalGammaPrior& prior,
                      const std::vector<WeightPosterior>& weights, const ModelConfig& config);

FitResult fit_bayes(const RelationalGraph& graph, const std::vector<LinkRecord>& train,
                    const ModelConfig& config);

}  // namespace medlfrm
