#include "medlfrm/bayes.hpp"

#include <cmath>

#include "medlfrm/special.hpp"

namespace medlfrm {

NgMoments ng_moments(const NormalGammaState& state) {
  if (!(state.n > 0.0) || !(state.nu > 0.0) || !(state.S > 0.0)) {
    throw std::invalid_argument("ng_moments: invalid state");
  }
  NgMoments m;
  m.mean_mu = state.mu;
  m.mean_tau = state.nu / state.S;
  m.e_log_tau = digamma(state.nu / 2.0) + std::log(2.0 / state.S);
  if (state.nu > 2.0) m.var_mu = state.S / (state.n * (state.nu - 2.0));
  return m;
}

double adaptive_margin(const Mat& psi, const LinkInstance& link, double ell, double mean_mu,
                       const Vec& mask) {
  const Index k = psi.cols();
  Mat m = expected_feature(psi, link.i, link.j);
  double total = 0.0;
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) {
      total += mask[a * k + b] * m(a, b);
    }
  }
  for (Index d = 0; d < link.attr.size(); ++d) total += mask[k * k + d] * link.attr[d];
  return ell - mean_mu * link.label * total;
}

std::vector<double> adaptive_margins(const Mat& psi, const TrainingSet& tr,
                                     const ModelConfig& config, double mean_mu) {
  Vec mask = weight_mask(psi.cols(), tr.attr_dim, config.band);
  std::vector<double> out;
  out.reserve(tr.instances.size());
  for (const auto& inst : tr.instances) {
    out.push_back(adaptive_margin(psi, inst, config.ell, mean_mu, mask));
  }
  return out;
}

WeightPosterior solve_weight_posterior_ng(const Mat& psi, const TrainingSet& tr, int relation,
                                          const ModelConfig& config, const NormalGammaState& state,
                                          double cost_scale, const std::vector<char>* subset,
                                          DualCache* warm) {
  const NgMoments m = ng_moments(state);
  BuiltProblem built = build_weight_problem(psi, tr, relation, config, m.mean_tau, cost_scale,
                                            m.mean_mu, subset);
  Vec warm_duals;
  const Vec* warm_ptr = nullptr;
  if (warm != nullptr) {
    auto& cache = (*warm)[relation];
    warm_duals = Vec::Zero(built.instance_ids.size());
    for (std::size_t e = 0; e < built.instance_ids.size(); ++e) {
      auto it = cache.find(built.instance_ids[e]);
      if (it != cache.end()) warm_duals[e] = it->second;
    }
    warm_ptr = &warm_duals;
  }
  MarginSolution sol = config.symmetric
                           ? solve_symmetric(built.problem, config.svm_tol, config.svm_max_passes, warm_ptr)
                           : solve(built.problem, config.svm_tol, config.svm_max_passes, warm_ptr);
  if (warm != nullptr) {
    auto& cache = (*warm)[relation];
    for (std::size_t e = 0; e < built.instance_ids.size(); ++e) {
      cache[built.instance_ids[e]] = sol.duals[e];
    }
  }
  return extract_weight_posterior(sol.weights, psi.cols(), tr.attr_dim, m.mean_tau);
}

WeightBlockStats weight_block_stats(const std::vector<WeightPosterior>& weights,
                                    const ModelConfig& config) {
  WeightBlockStats stats;
  stats.lambda = weights.empty() ? 1.0 : weights[0].precision;

  std::vector<double> wvals, dvals;
  for (const auto& w : weights) {
    const Index k = w.Lambda.rows();
    for (Index a = 0; a < k; ++a) {
      const Index b0 = config.symmetric ? a : 0;
      for (Index b = b0; b < k; ++b) {
        if (config.band >= 0 && std::abs(a - b) > config.band) continue;
        wvals.push_back(w.Lambda(a, b));
      }
    }
    for (Index d = 0; d < w.kappa.size(); ++d) dvals.push_back(w.kappa[d]);
  }
  auto fill = [](const std::vector<double>& vals, double& count, double& sum, double& sq_dev) {
    count = static_cast<double>(vals.size());
    sum = 0.0;
    for (double v : vals) sum += v;
    const double mean = vals.empty() ? 0.0 : sum / count;
    sq_dev = 0.0;
    for (double v : vals) sq_dev += (v - mean) * (v - mean);
  };
  fill(wvals, stats.w_count, stats.w_sum, stats.w_sq_dev);
  fill(dvals, stats.d_count, stats.d_sum, stats.d_sq_dev);
  return stats;
}

NormalGammaState update_ng(const NormalGammaPrior& prior, const WeightBlockStats& stats) {
  prior.validate();
  const double cw = stats.w_count;
  const double d = stats.d_count;
  const double c = cw + d;
  const double lbar = cw > 0.0 ? stats.w_sum / cw : 0.0;
  const double kbar = d > 0.0 ? stats.d_sum / d : 0.0;

  NormalGammaState out;
  out.mu = (stats.w_sum + stats.d_sum + prior.n0 * prior.mu0) / (c + prior.n0);
  out.n = prior.n0 + c;
  out.nu = prior.nu0 + c;
  const double e_sw = cw > 0.0 ? stats.w_sq_dev + (cw - 1.0) / stats.lambda : 0.0;
  const double e_se = d > 0.0 ? stats.d_sq_dev + (d - 1.0) / stats.lambda : 0.0;
  out.S = e_sw + e_se + prior.S0 +
          prior.n0 * (cw * (lbar - prior.mu0) * (lbar - prior.mu0) +
                      d * (kbar - prior.mu0) * (kbar - prior.mu0)) /
              (c + prior.n0);
  return out;
}

NormalGammaState update_ng(const NormalGammaPrior& prior, const WeightPosterior& weights,
                           Index k, Index d) {
  WeightBlockStats stats;
  stats.lambda = weights.precision;
  std::vector<double> wvals, dvals;
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) wvals.push_back(weights.Lambda(a, b));
  }
  for (Index dd = 0; dd < d; ++dd) dvals.push_back(weights.kappa[dd]);
  auto fill = [](const std::vector<double>& vals, double& count, double& sum, double& sq_dev) {
    count = static_cast<double>(vals.size());
    sum = 0.0;
    for (double v : vals) sum += v;
    const double mean = vals.empty() ? 0.0 : sum / count;
    sq_dev = 0.0;
    for (double v : vals) sq_dev += (v - mean) * (v - mean);
  };
  fill(wvals, stats.w_count, stats.w_sum, stats.w_sq_dev);
  fill(dvals, stats.d_count, stats.d_sum, stats.d_sq_dev);
  return update_ng(prior, stats);
}

double evaluate_ng_kl(const NormalGammaState& state, const NormalGammaPrior& prior,
                      const WeightBlockStats& stats) {
  prior.validate();
  const NgMoments m = ng_moments(state);
  double kl = 0.5 * std::log(state.n / prior.n0);
  kl -= 0.5 * (1.0 - prior.n0 / state.n -
               prior.n0 * m.mean_tau * (state.mu - prior.mu0) * (state.mu - prior.mu0));
  kl += 0.5 * state.nu * std::log(state.S / 2.0) - 0.5 * prior.nu0 * std::log(prior.S0 / 2.0);
  kl += -std::lgamma(state.nu / 2.0) + std::lgamma(prior.nu0 / 2.0);
  kl += 0.5 * (state.nu - prior.nu0) * m.e_log_tau;
  kl -= 0.5 * (state.S - prior.S0) * m.mean_tau;

  const double lambda = stats.lambda;
  auto block = [&](double count, double sum, double sq_dev) {
    if (count <= 0.0) return 0.0;
    const double mean = sum / count;
    const double ss = sq_dev + count * (mean - state.mu) * (mean - state.mu);
    return 0.5 * count * (std::log(lambda) - m.e_log_tau) + 0.5 * m.mean_tau * count / lambda +
           0.5 * count / state.n + 0.5 * m.mean_tau * ss - 0.5 * count;
  };
  kl += block(stats.w_count, stats.w_sum, stats.w_sq_dev);
  kl += block(stats.d_count, stats.d_sum, stats.d_sq_dev);
  return kl;
}

double evaluate_ng_kl(const NormalGammaState& state, const NormalGammaPrior& prior,
                      const std::vector<WeightPosterior>& weights, const ModelConfig& config) {
  return evaluate_ng_kl(state, prior, weight_block_stats(weights, config));
}

}  // namespace medlfrm
