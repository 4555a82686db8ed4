#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "medlfrm/graph.hpp"
#include "medlfrm/ibp.hpp"
#include "medlfrm/margin.hpp"
#include "medlfrm/normal_gamma.hpp"
#include "medlfrm/types.hpp"

namespace medlfrm {

// Gaussian posterior means over the feature weights W (Lambda, K x K) and
// the attribute weights eta (kappa, length D), with shared precision.
struct WeightPosterior {
  Mat Lambda;
  Vec kappa;
  double precision = 1.0;  // 1 under the standard normal prior; E[tau] in Bayesian mode
};

struct ModelConfig {
  Index K = 50;
  double alpha = 1.0;
  double C = 1.0;
  double pos_cost_multiplier = 10.0;  // C+ = multiplier * C-
  double ell = 9.0;
  bool symmetric = false;
  Index band = -1;  // -1 = full matrix, 0 = diagonal only, 1 = tridiagonal, ...
  bool bayes = false;
  // Normal-Gamma hyper-prior (Bayesian mode only).
  double ng_mu0 = 0.0;
  double ng_n0 = 1.0;
  double ng_nu0 = 2.0;
  double ng_S0 = 1.0;
  int max_outer_iters = 50;
  double tol = 1e-4;  // relative objective change
  double svm_tol = 1e-4;
  int svm_max_passes = 1000;
  std::uint64_t seed = 0;

  void validate() const;
  Vec mask() const { return weight_mask(K, 0, band); }  // matrix-block mask only
};

// Directed training instance; undirected pairs expand to both directions here.
struct LinkInstance {
  int relation = 0;
  int i = 0;
  int j = 0;
  double label = 1.0;
  Vec attr;  // empty when D = 0
};

// Assembled training view: expanded instances plus adjacency by role.
struct TrainingSet {
  int n_entities = 0;
  int n_relations = 1;
  int attr_dim = 0;
  std::vector<LinkInstance> instances;
  // out_of[rel][i] / into[rel][i]: instance indices with i as source/target, j != i.
  std::vector<std::vector<std::vector<int>>> out_of;
  std::vector<std::vector<std::vector<int>>> into;
  std::vector<std::vector<int>> self_of;  // [rel][i] -> instance index or -1
  std::vector<std::vector<int>> incident;  // [i] -> all instance indices touching i

  Index size() const { return static_cast<Index>(instances.size()); }
};

TrainingSet build_training_set(const RelationalGraph& graph, const std::vector<LinkRecord>& records);

struct ModelState {
  IbpPosterior ibp;
  std::vector<WeightPosterior> weights;  // one per relation
  std::optional<NormalGammaState> ng;
};

// --- expected features and the effective discriminant ---

// M with M_kk' = E[Z_ik Z_jk']; for i = j the diagonal is psi_ik (Z^2 = Z).
Mat expected_feature(const Mat& psi, Index i, Index j);

// Tr(Lambda Zbar_ij) without materializing the feature matrix.
double trace_lambda_zbar(const Mat& Lambda, const Mat& psi, Index i, Index j);

double effective_discriminant(const Mat& psi, const WeightPosterior& weights, Index i, Index j,
                              const Vec& attr);

// sign of the effective discriminant; sign(0) = +1.
double predict(const Mat& psi, const WeightPosterior& weights, Index i, Index j, const Vec& attr);

// --- hinge loss and its psi subgradient ---

// sum over instances of weight_e * max(0, ell - Y f); weight_e is pos_weight
// or neg_weight by label. `subset`, when given, masks the instance universe.
double hinge_loss(const Mat& psi, const std::vector<WeightPosterior>& weights,
                  const TrainingSet& tr, double ell, const std::vector<char>* subset = nullptr,
                  double pos_weight = 1.0, double neg_weight = 1.0);

// d(hinge)/d(psi_ik) for all k at once, with active sets taken at the current
// state. Literally independent of psi_ik: the self-link term is evaluated in
// its cancelled form.
Vec hinge_subgradient_row(const Mat& psi, const std::vector<WeightPosterior>& weights,
                          const TrainingSet& tr, double ell, Index i,
                          const std::vector<char>* subset = nullptr, double pos_weight = 1.0,
                          double neg_weight = 1.0);

double hinge_subgradient_psi(const Mat& psi, const std::vector<WeightPosterior>& weights,
                             const TrainingSet& tr, double ell, Index i, Index k,
                             const std::vector<char>* subset = nullptr);

// psi_ik = sigmoid(sum_{j<=k} E[log nu_j] - L_k - scale_C * d(R_ell)/d(psi_ik)).
double update_psi(const ModelState& state, const TrainingSet& tr, const ModelConfig& config,
                  Index i, Index k, double scale_C);

// --- the SVM substep ---

struct BuiltProblem {
  MarginProblem problem;
  std::vector<int> instance_ids;  // aligned with problem.examples
};

// Assembles the weighted soft-margin instance for one relation. cost_scale
// multiplies every cost (C in batch mode, (|I|/|E_t|) C stochastic;
// |I|/|E_t| alone in Bayesian mode). mu_mean != 0 encodes the recentred
// Bayesian problem: offset = mu * mask and margins ell - Y (offset . x).
BuiltProblem build_weight_problem(const Mat& psi, const TrainingSet& tr, int relation,
                                  const ModelConfig& config, double lambda, double cost_scale,
                                  double mu_mean, const std::vector<char>* subset = nullptr);

// Equivalent unit-precision form: costs divided by lambda.
MarginProblem rescale_to_unit_precision(const MarginProblem& problem);

// Reshapes a flat solver weight vector (row-major matrix block + attribute
// tail) into a WeightPosterior.
WeightPosterior extract_weight_posterior(const Vec& w, Index k, Index attr_dim, double precision);

using DualCache = std::vector<std::unordered_map<int, double>>;  // per relation

WeightPosterior solve_weight_posterior(const Mat& psi, const TrainingSet& tr, int relation,
                                       const ModelConfig& config, double cost_scale,
                                       const std::vector<char>* subset = nullptr,
                                       DualCache* warm = nullptr);

// --- objective and batch fit ---

// KL(p(Theta) || p0(Theta)) = (||Lambda||^2 + ||kappa||^2) / 2 summed over
// relations (standard normal prior, unit posterior variance).
double theta_kl(const std::vector<WeightPosterior>& weights);

// Objective the batch algorithm minimizes: the KL surrogate plus the
// cost-weighted hinge.
double model_objective(const ModelState& state, const TrainingSet& tr, const ModelConfig& config);

struct TraceRow {
  int t = 0;
  double rho_gamma = 1.0;
  double rho_psi = 1.0;
  double objective = 0.0;
  std::optional<double> auc;
};

struct FitResult {
  ModelState state;
  std::vector<TraceRow> trace;
};

ModelState init_state(const TrainingSet& tr, const ModelConfig& config, Rng& rng);

FitResult fit_batch(const RelationalGraph& graph, const std::vector<LinkRecord>& train,
                    const ModelConfig& config);

// Scores records under the current state (labels ignored).
std::vector<double> score_records(const ModelState& state, const RelationalGraph& graph,
                                  const std::vector<LinkRecord>& records);

}  // namespace medlfrm
