#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "medlfrm/types.hpp"

namespace medlfrm {

// Truncated stick-breaking variational posterior over (nu, Z):
//   nu_k ~ Beta(gamma_k1, gamma_k2), Z_ik ~ Bernoulli(psi_ik),
// plus the per-level simplex weights q_k used by the multivariate lower
// bound on E[log(1 - prod_{j<=k} nu_j)].
struct IbpPosterior {
  double alpha = 1.0;
  Mat gamma;           // K x 2, both columns positive
  Mat psi;             // N x K, entries in [0, 1]
  std::vector<Vec> q;  // q[k] lives on the (k+1)-simplex

  Index truncation() const { return gamma.rows(); }
  Index n_entities() const { return psi.rows(); }

  static IbpPosterior prior_matching(Index n, Index k, double alpha);
  void refresh_q();
  void validate() const;
};

// (E[log nu], E[log(1 - nu)]) for Beta(gamma1, gamma2).
std::pair<double, double> expected_log_stick(double gamma1, double gamma2);

// Tightest simplex weights for level k (1-based length-k vector).
Vec optimal_q(const Mat& gamma, Index k);

// Multivariate lower bound L_k on E[log(1 - prod_{j<=k} nu_j)] at the given
// simplex point.
double lower_bound_log_one_minus_prod(const Mat& gamma, Index k, const Vec& q_k);

// Upper-bound surrogate on KL(p(nu, Z) || p0(nu, Z)) at the stored q.
double kl_to_prior(const IbpPosterior& posterior);

// Pieces of the surrogate, exposed for mini-batch scaling: the Beta block
// over gamma, and one entity row's expected KL(p(Z_i) || p0(Z_i | nu)).
double stick_kl(const IbpPosterior& posterior);
double entity_row_kl(const IbpPosterior& posterior, Index i);

// Closed-form coordinate update of gamma with q and psi held fixed. The
// entity sums run over `entities` and are multiplied by `scale`
// (N / |batch| in stochastic mode, 1 in batch mode). Returns the new K x 2
// parameter matrix without mutating the posterior.
Mat gamma_coordinate_update(const IbpPosterior& posterior, const std::vector<Index>& entities,
                            double scale);

// E[pi_k] = prod_{j<=k} gamma_j1 / (gamma_j1 + gamma_j2), k = 1..K.
Vec expected_pi(const Mat& gamma);

// Prefix sums S_k = sum_{j<=k} E[log nu_j] and bound values L_k at the stored
// q, both length K; the psi update reads these.
void stick_prefix_terms(const IbpPosterior& posterior, Vec& log_stick_prefix, Vec& lower_bounds);

// Checkpoint block: header (K, N, alpha) then gamma rows then psi rows, in
// decimal with 17 significant digits.
void write_posterior(std::ostream& out, const IbpPosterior& posterior);
IbpPosterior read_posterior(std::istream& in);

}  // namespace medlfrm
