#include "medlfrm/ibp.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "medlfrm/special.hpp"

namespace medlfrm {

namespace {
// psi is clamped this far from {0,1} before entropy evaluation; shifts the
// objective by well under 1e-6.
constexpr double kPsiEps = 1e-8;
}  // namespace

IbpPosterior IbpPosterior::prior_matching(Index n, Index k, double alpha) {
  IbpPosterior p;
  p.alpha = alpha;
  p.gamma.resize(k, 2);
  p.gamma.col(0).setConstant(alpha);
  p.gamma.col(1).setOnes();
  Vec pi = expected_pi(p.gamma);
  p.psi.resize(n, k);
  for (Index i = 0; i < n; ++i) p.psi.row(i) = pi.transpose();
  p.refresh_q();
  return p;
}

void IbpPosterior::refresh_q() {
  const Index k = truncation();
  q.resize(k);
  for (Index m = 1; m <= k; ++m) q[m - 1] = optimal_q(gamma, m);
}

void IbpPosterior::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("ibp: alpha must be positive");
  if ((gamma.array() <= 0.0).any()) throw std::invalid_argument("ibp: gamma must be positive");
  if ((psi.array() < 0.0).any() || (psi.array() > 1.0).any()) {
    throw std::invalid_argument("ibp: psi must lie in [0,1]");
  }
  if (static_cast<Index>(q.size()) != truncation()) {
    throw std::invalid_argument("ibp: q not refreshed");
  }
  for (Index k = 0; k < truncation(); ++k) {
    if (q[k].size() != k + 1 || (q[k].array() < 0.0).any() ||
        std::fabs(q[k].sum() - 1.0) > 1e-10) {
      throw std::invalid_argument("ibp: q rows must be simplex vectors");
    }
  }
}

std::pair<double, double> expected_log_stick(double gamma1, double gamma2) {
  if (!(gamma1 > 0.0 && gamma2 > 0.0)) {
    throw std::invalid_argument("expected_log_stick: parameters must be positive");
  }
  const double dg_sum = digamma(gamma1 + gamma2);
  return {digamma(gamma1) - dg_sum, digamma(gamma2) - dg_sum};
}

Vec optimal_q(const Mat& gamma, Index k) {
  if (k < 1 || k > gamma.rows()) throw std::invalid_argument("optimal_q: level out of range");
  // log q_km = psi(g_m2) + sum_{n<m} psi(g_n1) - sum_{n<=m} psi(g_n1+g_n2) + const
  Vec logq(k);
  double head = 0.0;  // running sum_{n<m} psi(g_n1) - sum_{n<=m} psi(g_n1+g_n2)
  for (Index m = 0; m < k; ++m) {
    head -= digamma(gamma(m, 0) + gamma(m, 1));
    logq[m] = digamma(gamma(m, 1)) + head;
    head += digamma(gamma(m, 0));
  }
  logq.array() -= logq.maxCoeff();
  Vec q = logq.array().exp();
  q /= q.sum();
  return q;
}

double lower_bound_log_one_minus_prod(const Mat& gamma, Index k, const Vec& q_k) {
  if (q_k.size() != k) throw std::invalid_argument("lower_bound: simplex size mismatch");
  double entropy = 0.0;
  for (Index m = 0; m < k; ++m) {
    if (q_k[m] > 0.0) entropy -= q_k[m] * std::log(q_k[m]);
  }
  double bound = entropy;
  double tail = 1.0;  // zeta_2 at m: sum_{n>=m} q_kn
  for (Index m = 0; m < k; ++m) {
    const double zeta2 = tail;
    const double zeta1 = tail - q_k[m];  // sum_{n>m} q_kn
    bound += q_k[m] * digamma(gamma(m, 1));
    if (m < k - 1) bound += zeta1 * digamma(gamma(m, 0));
    bound -= zeta2 * digamma(gamma(m, 0) + gamma(m, 1));
    tail = zeta1;
  }
  return bound;
}

double stick_kl(const IbpPosterior& posterior) {
  const Index k = posterior.truncation();
  double kl = -static_cast<double>(k) * std::log(posterior.alpha);
  for (Index m = 0; m < k; ++m) {
    const double g1 = posterior.gamma(m, 0);
    const double g2 = posterior.gamma(m, 1);
    auto [elog, elog1m] = expected_log_stick(g1, g2);
    kl += (g1 - posterior.alpha) * elog + (g2 - 1.0) * elog1m - log_beta(g1, g2);
  }
  return kl;
}

double entity_row_kl(const IbpPosterior& posterior, Index i) {
  const Index k = posterior.truncation();
  Vec prefix(k), bounds(k);
  stick_prefix_terms(posterior, prefix, bounds);
  double kl = 0.0;
  for (Index m = 0; m < k; ++m) {
    const double psi = std::clamp(posterior.psi(i, m), kPsiEps, 1.0 - kPsiEps);
    kl += -psi * prefix[m] - (1.0 - psi) * bounds[m] - bernoulli_entropy(psi);
  }
  return kl;
}

double kl_to_prior(const IbpPosterior& posterior) {
  const Index n = posterior.n_entities();
  const Index k = posterior.truncation();
  Vec prefix(k), bounds(k);
  stick_prefix_terms(posterior, prefix, bounds);
  double kl = stick_kl(posterior);
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < k; ++m) {
      const double psi = std::clamp(posterior.psi(i, m), kPsiEps, 1.0 - kPsiEps);
      kl += -psi * prefix[m] - (1.0 - psi) * bounds[m] - bernoulli_entropy(psi);
    }
  }
  return kl;
}

void stick_prefix_terms(const IbpPosterior& posterior, Vec& log_stick_prefix, Vec& lower_bounds) {
  const Index k = posterior.truncation();
  log_stick_prefix.resize(k);
  lower_bounds.resize(k);
  double acc = 0.0;
  for (Index m = 0; m < k; ++m) {
    acc += expected_log_stick(posterior.gamma(m, 0), posterior.gamma(m, 1)).first;
    log_stick_prefix[m] = acc;
    lower_bounds[m] = lower_bound_log_one_minus_prod(posterior.gamma, m + 1, posterior.q[m]);
  }
}

Mat gamma_coordinate_update(const IbpPosterior& posterior, const std::vector<Index>& entities,
                            double scale) {
  const Index k = posterior.truncation();
  const double n = static_cast<double>(posterior.n_entities());

  // s_m: scaled expected feature counts; r_m = N - s_m the complements.
  Vec s = Vec::Zero(k);
  for (Index i : entities) s += posterior.psi.row(i).transpose();
  s *= scale;

  // Cumulative simplex sums: qcum[m][j] = sum_{n<=j} q_{m+1,n}.
  std::vector<Vec> qcum(k);
  for (Index m = 0; m < k; ++m) {
    qcum[m].resize(m + 1);
    double run = 0.0;
    for (Index j = 0; j <= m; ++j) {
      run += posterior.q[m][j];
      qcum[m][j] = run;
    }
  }

  Mat gamma(k, 2);
  for (Index j = 0; j < k; ++j) {
    double g1 = posterior.alpha;
    double g2 = 1.0;
    for (Index m = j; m < k; ++m) {
      const double rest = n - s[m];
      g1 += s[m];
      if (m > j) g1 += rest * (1.0 - qcum[m][j]);  // sum_{n>j..m} q_mn
      g2 += rest * posterior.q[m][j];
    }
    gamma(j, 0) = g1;
    gamma(j, 1) = g2;
  }
  return gamma;
}

Vec expected_pi(const Mat& gamma) {
  Vec pi(gamma.rows());
  double run = 1.0;
  for (Index j = 0; j < gamma.rows(); ++j) {
    run *= gamma(j, 0) / (gamma(j, 0) + gamma(j, 1));
    pi[j] = run;
  }
  return pi;
}

void write_posterior(std::ostream& out, const IbpPosterior& posterior) {
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  out << "K " << posterior.truncation() << "\n";
  out << "N " << posterior.n_entities() << "\n";
  out << "alpha ";
  put(posterior.alpha);
  out << "\ngamma\n";
  for (Index m = 0; m < posterior.truncation(); ++m) {
    put(posterior.gamma(m, 0));
    out << ' ';
    put(posterior.gamma(m, 1));
    out << '\n';
  }
  out << "psi\n";
  for (Index i = 0; i < posterior.n_entities(); ++i) {
    for (Index m = 0; m < posterior.truncation(); ++m) {
      if (m) out << ' ';
      put(posterior.psi(i, m));
    }
    out << '\n';
  }
}

IbpPosterior read_posterior(std::istream& in) {
  IbpPosterior p;
  std::string tag;
  Index k = 0, n = 0;
  if (!(in >> tag >> k) || tag != "K") throw DataError("posterior checkpoint: expected K");
  if (!(in >> tag >> n) || tag != "N") throw DataError("posterior checkpoint: expected N");
  if (!(in >> tag >> p.alpha) || tag != "alpha") throw DataError("posterior checkpoint: expected alpha");
  if (!(in >> tag) || tag != "gamma") throw DataError("posterior checkpoint: expected gamma block");
  p.gamma.resize(k, 2);
  for (Index m = 0; m < k; ++m) {
    if (!(in >> p.gamma(m, 0) >> p.gamma(m, 1))) throw DataError("posterior checkpoint: bad gamma row");
  }
  if (!(in >> tag) || tag != "psi") throw DataError("posterior checkpoint: expected psi block");
  p.psi.resize(n, k);
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < k; ++m) {
      if (!(in >> p.psi(i, m))) throw DataError("posterior checkpoint: bad psi row");
    }
  }
  p.refresh_q();
  return p;
}

}  // namespace medlfrm
