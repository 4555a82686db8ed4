#include "medlfrm/svi.hpp"

#include <algorithm>
#include <cmath>

#include "medlfrm/eval.hpp"
#include "medlfrm/special.hpp"

namespace medlfrm {

void SviConfig::validate() const {
  if (kappa_gamma < 0.0 || kappa_gamma > 1.0 || kappa_psi < 0.0 || kappa_psi > 1.0) {
    throw std::invalid_argument("svi: decay exponents must lie in [0, 1]");
  }
  if (!(mu_gamma > 0.0) || !(mu_psi > 0.0)) {
    throw std::invalid_argument("svi: delay offsets must be positive");
  }
  if (max_iters < 0) throw std::invalid_argument("svi: max_iters must be nonnegative");
}

Minibatch sample_minibatch(const TrainingSet& tr, Index n_prime, Index m_prime, Rng& rng) {
  if (tr.instances.empty()) throw DataError("sample_minibatch: no training links");
  Minibatch batch;
  const auto n = static_cast<std::size_t>(tr.n_entities);
  const std::size_t want = (n_prime <= 0 || static_cast<std::size_t>(n_prime) >= n)
                               ? n
                               : static_cast<std::size_t>(n_prime);
  for (auto idx : rng.sample_without_replacement(n, want)) {
    batch.entities.push_back(static_cast<Index>(idx));
  }

  batch.edge_mask.assign(tr.instances.size(), 0);
  auto add_edge = [&](int e) {
    if (!batch.edge_mask[e]) {
      batch.edge_mask[e] = 1;
      batch.edges.push_back(e);
    }
  };
  for (Index i : batch.entities) {
    const auto& links = tr.incident[i];
    if (m_prime <= 0 || static_cast<std::size_t>(m_prime) >= links.size()) {
      for (int e : links) add_edge(e);
    } else {
      for (auto pick : rng.sample_without_replacement(links.size(), static_cast<std::size_t>(m_prime))) {
        add_edge(links[pick]);
      }
    }
  }
  return batch;
}

Minibatch full_batch(const TrainingSet& tr) {
  Minibatch batch;
  batch.entities.resize(tr.n_entities);
  for (Index i = 0; i < tr.n_entities; ++i) batch.entities[i] = i;
  batch.edges.resize(tr.instances.size());
  for (std::size_t e = 0; e < tr.instances.size(); ++e) batch.edges[e] = static_cast<int>(e);
  batch.edge_mask.assign(tr.instances.size(), 1);
  return batch;
}

namespace {

double positive_cost(const ModelConfig& config) {
  return (config.bayes ? 1.0 : config.C) * config.pos_cost_multiplier;
}

double negative_cost(const ModelConfig& config) { return config.bayes ? 1.0 : config.C; }

double hinge_scale_of(const TrainingSet& tr, const Minibatch& batch) {
  if (batch.edges.empty()) return 1.0;
  return static_cast<double>(tr.size()) / static_cast<double>(batch.edges.size());
}

double entity_scale_of(const TrainingSet& tr, const Minibatch& batch) {
  if (batch.entities.empty()) return 1.0;
  return static_cast<double>(tr.n_entities) / static_cast<double>(batch.entities.size());
}

}  // namespace

double unbiased_objective(const ModelState& state, const TrainingSet& tr,
                          const ModelConfig& config, const Minibatch& batch) {
  double obj = stick_kl(state.ibp);
  const double escale = entity_scale_of(tr, batch);
  for (Index i : batch.entities) obj += escale * entity_row_kl(state.ibp, i);
  if (config.bayes) {
    obj += evaluate_ng_kl(*state.ng, ng_prior_from_config(config),
                          weight_block_stats(state.weights, config));
  } else {
    obj += theta_kl(state.weights);
  }
  obj += hinge_scale_of(tr, batch) * hinge_loss(state.ibp.psi, state.weights, tr, config.ell,
                                                &batch.edge_mask, positive_cost(config),
                                                negative_cost(config));
  return obj;
}

double stochastic_psi_target(const ModelState& state, const TrainingSet& tr,
                             const ModelConfig& config, Index i, Index k, const Minibatch& batch) {
  Vec prefix, bounds;
  stick_prefix_terms(state.ibp, prefix, bounds);
  Vec grad = hinge_subgradient_row(state.ibp.psi, state.weights, tr, config.ell, i,
                                   &batch.edge_mask, positive_cost(config), negative_cost(config));
  return sigmoid(prefix[k] - bounds[k] - hinge_scale_of(tr, batch) * grad[k]);
}

namespace {

void theta_substep(ModelState& state, const TrainingSet& tr, const ModelConfig& config,
                   const Minibatch& batch, double hinge_scale, DualCache& warm) {
  if (!config.bayes) {
    for (int rel = 0; rel < tr.n_relations; ++rel) {
      state.weights[rel] = solve_weight_posterior(state.ibp.psi, tr, rel, config,
                                                  hinge_scale * config.C, &batch.edge_mask, &warm);
    }
    return;
  }

  // Inner alternation between p(Theta) and p(mu, tau); problem (14) is
  // convex, so a handful of rounds suffices.
  const NormalGammaPrior prior = ng_prior_from_config(config);
  for (int round = 0; round < 20; ++round) {
    for (int rel = 0; rel < tr.n_relations; ++rel) {
      state.weights[rel] = solve_weight_posterior_ng(state.ibp.psi, tr, rel, config, *state.ng,
                                                     hinge_scale, &batch.edge_mask, &warm);
    }
    NormalGammaState next = update_ng(prior, weight_block_stats(state.weights, config));
    const auto before = ng_moments(*state.ng);
    const auto after = ng_moments(next);
    const double change = std::fabs(after.mean_mu - before.mean_mu) / (1.0 + std::fabs(before.mean_mu)) +
                          std::fabs(after.mean_tau - before.mean_tau) / (1.0 + before.mean_tau);
    *state.ng = next;
    if (change < 1e-6) break;
  }
}

}  // namespace

double run_outer_step(ModelState& state, const TrainingSet& tr, const ModelConfig& config,
                      const Minibatch& batch, double rho_gamma, double rho_psi, bool refresh_q,
                      DualCache& warm) {
  const double gamma_scale = entity_scale_of(tr, batch);
  const double hinge_scale = hinge_scale_of(tr, batch);

  if (refresh_q) state.ibp.refresh_q();
  Mat gamma_hat = gamma_coordinate_update(state.ibp, batch.entities, gamma_scale);
  state.ibp.gamma = (1.0 - rho_gamma) * state.ibp.gamma + rho_gamma * gamma_hat;
  if (refresh_q) state.ibp.refresh_q();

  Vec prefix, bounds;
  stick_prefix_terms(state.ibp, prefix, bounds);

  const double pw = positive_cost(config);
  const double nw = negative_cost(config);
  for (Index i : batch.entities) {
    // Active sets recomputed from the current f before each row update.
    Vec grad = hinge_subgradient_row(state.ibp.psi, state.weights, tr, config.ell, i,
                                     &batch.edge_mask, pw, nw);
    for (Index k = 0; k < state.ibp.truncation(); ++k) {
      const double target = sigmoid(prefix[k] - bounds[k] - hinge_scale * grad[k]);
      state.ibp.psi(i, k) = (1.0 - rho_psi) * state.ibp.psi(i, k) + rho_psi * target;
    }
  }

  theta_substep(state, tr, config, batch, hinge_scale, warm);
  return unbiased_objective(state, tr, config, batch);
}

namespace {

FitResult fit_loop(const RelationalGraph& graph, const std::vector<LinkRecord>& train,
                   const ModelConfig& config, const SviConfig& svi, bool stop_on_convergence,
                   const std::vector<LinkRecord>* eval_records) {
  config.validate();
  svi.validate();
  TrainingSet tr = build_training_set(graph, train);
  if (tr.instances.empty()) throw DataError("fit: no training links");

  Rng init_rng(config.seed);
  FitResult result;
  result.state = init_state(tr, config, init_rng);
  if (config.bayes) {
    result.state.ng = NormalGammaState::from_prior(ng_prior_from_config(config));
    const double tau = ng_moments(*result.state.ng).mean_tau;
    for (auto& w : result.state.weights) w.precision = tau;
  }

  Rng sampler(svi.seed);
  DualCache warm(tr.n_relations);
  const Index n = tr.n_entities;
  const Index batch_n = (svi.batch_entities <= 0 || svi.batch_entities > n) ? n : svi.batch_entities;
  const int epoch = std::max<int>(1, static_cast<int>((n + batch_n - 1) / batch_n));

  double prev_obj = 0.0;
  for (int t = 1; t <= svi.max_iters; ++t) {
    Minibatch batch = sample_minibatch(tr, svi.batch_entities, svi.batch_edges_per_entity, sampler);
    const double rho_g = learning_rate(svi.mu_gamma, svi.kappa_gamma, t);
    const double rho_p = learning_rate(svi.mu_psi, svi.kappa_psi, t);
    const bool refresh = svi.refresh_q_per_batch || ((t - 1) % epoch == 0);
    const double obj = run_outer_step(result.state, tr, config, batch, rho_g, rho_p, refresh, warm);
    if (!std::isfinite(obj)) throw NumericalError("fit: objective diverged");

    TraceRow row{t, rho_g, rho_p, obj, std::nullopt};
    if (eval_records != nullptr && svi.eval_every > 0 && t % svi.eval_every == 0) {
      row.auc = mean_relation_auc(result.state, graph, *eval_records);
    }
    result.trace.push_back(row);

    if (stop_on_convergence && t >= 2 &&
        std::fabs(obj - prev_obj) <= config.tol * (1.0 + std::fabs(prev_obj))) {
      break;
    }
    prev_obj = obj;
  }
  return result;
}

}  // namespace

FitResult fit_batch(const RelationalGraph& graph, const std::vector<LinkRecord>& train,
                    const ModelConfig& config) {
  SviConfig batch_cfg;
  batch_cfg.batch_entities = 0;
  batch_cfg.batch_edges_per_entity = 0;
  batch_cfg.kappa_gamma = 0.0;
  batch_cfg.kappa_psi = 0.0;
  batch_cfg.max_iters = config.max_outer_iters;
  batch_cfg.seed = config.seed;
  return fit_loop(graph, train, config, batch_cfg, true, nullptr);
}

FitResult fit_bayes(const RelationalGraph& graph, const std::vector<LinkRecord>& train,
                    const ModelConfig& config) {
  ModelConfig cfg = config;
  cfg.bayes = true;
  return fit_batch(graph, train, cfg);
}

FitResult fit_svi(const RelationalGraph& graph, const std::vector<LinkRecord>& train,
                  const ModelConfig& config, const SviConfig& svi,
                  const std::vector<LinkRecord>* eval_records) {
  return fit_loop(graph, train, config, svi, false, eval_records);
}

}  // namespace medlfrm
