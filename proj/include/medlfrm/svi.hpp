#pragma once

#include <optional>

#include "medlfrm/bayes.hpp"
#include "medlfrm/model.hpp"

namespace medlfrm {

struct SviConfig {
  Index batch_entities = 0;          // N'; 0 means all
  Index batch_edges_per_entity = 0;  // M'; 0 means all links of the entity
  double kappa_gamma = 0.0;
  double kappa_psi = 0.5;
  double mu_gamma = 1.0;
  double mu_psi = 1.0;
  int max_iters = 100;
  std::uint64_t seed = 0;
  bool refresh_q_per_batch = true;  // false: refresh once per epoch
  int eval_every = 0;               // trace AUC on the eval records every this many steps

  void validate() const;
};

inline double learning_rate(double mu, double kappa, int t) {
  return std::pow(mu + static_cast<double>(t), -kappa);
}

struct Minibatch {
  std::vector<Index> entities;   // N_t, in sampled order
  std::vector<int> edges;        // E_t as instance indices (union over entities)
  std::vector<char> edge_mask;   // size |instances|
};

// Uniform entities, then uniform links-without-replacement per entity; an
// entity with fewer than M' links contributes all of them.
Minibatch sample_minibatch(const TrainingSet& tr, Index n_prime, Index m_prime, Rng& rng);

Minibatch full_batch(const TrainingSet& tr);

// L^ = KL(p(nu)||p0) + KL(p(Theta)||p0) + (N/|N_t|) sum_i KL(p(Z_i)||p0(Z_i|nu))
//      + (|I|/|E_t|) sum_{E_t} cost_e h_ell(Y f).
double unbiased_objective(const ModelState& state, const TrainingSet& tr,
                          const ModelConfig& config, const Minibatch& batch);

// psi^_ik from the stochastic subgradient restricted to the sampled edges.
double stochastic_psi_target(const ModelState& state, const TrainingSet& tr,
                             const ModelConfig& config, Index i, Index k, const Minibatch& batch);

// One outer iteration shared by the batch and stochastic paths: gamma sweep,
// psi sweep over the batch entities, then the Theta substep on the batch
// edges. rho = 1 with a full batch reproduces the batch algorithm exactly.
double run_outer_step(ModelState& state, const TrainingSet& tr, const ModelConfig& config,
                      const Minibatch& batch, double rho_gamma, double rho_psi, bool refresh_q,
                      DualCache& warm);

FitResult fit_svi(const RelationalGraph& graph, const std::vector<LinkRecord>& train,
                  const ModelConfig& config, const SviConfig& svi,
                  const std::vector<LinkRecord>* eval_records = nullptr);

}  // namespace medlfrm
