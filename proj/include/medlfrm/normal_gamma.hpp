#pragma once

#include <optional>
#include <stdexcept>

namespace medlfrm {

// NG(mu0, n0, nu0/2, 2/S0) hyper-prior over the shared weight mean mu and
// precision tau.
struct NormalGammaPrior {
  double mu0 = 0.0;
  double n0 = 1.0;
  double nu0 = 2.0;
  double S0 = 1.0;

  void validate() const {
    if (!(n0 > 0.0) || !(nu0 > 0.0) || !(S0 > 0.0)) {
      throw std::invalid_argument("normal-gamma prior: n0, nu0, S0 must be positive");
    }
  }
};

struct NormalGammaState {
  double mu = 0.0;
  double n = 1.0;
  double nu = 2.0;
  double S = 1.0;

  static NormalGammaState from_prior(const NormalGammaPrior& prior) {
    return {prior.mu0, prior.n0, prior.nu0, prior.S0};
  }
};

struct NgMoments {
  double mean_mu = 0.0;
  double mean_tau = 1.0;         // nu / S
  double e_log_tau = 0.0;        // digamma(nu/2) + log(2/S)
  std::optional<double> var_mu;  // S / (n (nu - 2)); empty when nu <= 2
};

NgMoments ng_moments(const NormalGammaState& state);

}  // namespace medlfrm
