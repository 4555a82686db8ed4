#include "medlfrm/model.hpp"

#include <algorithm>
#include <cmath>

#include "medlfrm/special.hpp"
#include "medlfrm/svi.hpp"

namespace medlfrm {

void ModelConfig::validate() const {
  if (K < 1) throw std::invalid_argument("config: K must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("config: alpha must be positive");
  if (!(C > 0.0)) throw std::invalid_argument("config: C must be positive");
  if (!(ell > 0.0)) throw std::invalid_argument("config: ell must be positive");
  if (!(pos_cost_multiplier > 0.0)) throw std::invalid_argument("config: cost multiplier must be positive");
}

TrainingSet build_training_set(const RelationalGraph& graph, const std::vector<LinkRecord>& records) {
  TrainingSet tr;
  tr.n_entities = graph.n_entities;
  tr.n_relations = std::max(graph.n_relations(), 1);
  tr.attr_dim = graph.attr_dim;

  auto push = [&](int rel, int i, int j, double label) {
    LinkInstance inst{rel, i, j, label, Vec()};
    if (graph.attr_dim > 0) inst.attr = pairwise_attribute(graph, i, j);
    tr.instances.push_back(std::move(inst));
  };
  for (const auto& rec : records) {
    if (rec.relation < 0 || rec.relation >= tr.n_relations) {
      throw DataError("training record references unknown relation");
    }
    const bool undirected = !graph.relations.empty() && !graph.relations[rec.relation].directed;
    push(rec.relation, rec.i, rec.j, rec.label);
    if (undirected && rec.i != rec.j) push(rec.relation, rec.j, rec.i, rec.label);
  }

  tr.out_of.assign(tr.n_relations, std::vector<std::vector<int>>(tr.n_entities));
  tr.into.assign(tr.n_relations, std::vector<std::vector<int>>(tr.n_entities));
  tr.self_of.assign(tr.n_relations, std::vector<int>(tr.n_entities, -1));
  tr.incident.assign(tr.n_entities, {});
  for (int e = 0; e < static_cast<int>(tr.instances.size()); ++e) {
    const auto& inst = tr.instances[e];
    if (inst.i == inst.j) {
      tr.self_of[inst.relation][inst.i] = e;
      tr.incident[inst.i].push_back(e);
      continue;
    }
    tr.out_of[inst.relation][inst.i].push_back(e);
    tr.into[inst.relation][inst.j].push_back(e);
    tr.incident[inst.i].push_back(e);
    tr.incident[inst.j].push_back(e);
  }
  return tr;
}

Mat expected_feature(const Mat& psi, Index i, Index j) {
  Mat m = psi.row(i).transpose() * psi.row(j);
  if (i == j) m.diagonal() = psi.row(i);
  return m;
}

double trace_lambda_zbar(const Mat& Lambda, const Mat& psi, Index i, Index j) {
  const double bilinear = psi.row(i) * Lambda * psi.row(j).transpose();
  if (i != j) return bilinear;
  double corr = 0.0;
  for (Index k = 0; k < Lambda.rows(); ++k) {
    corr += Lambda(k, k) * psi(i, k) * (1.0 - psi(i, k));
  }
  return bilinear + corr;
}

double effective_discriminant(const Mat& psi, const WeightPosterior& weights, Index i, Index j,
                              const Vec& attr) {
  double f = trace_lambda_zbar(weights.Lambda, psi, i, j);
  if (attr.size() > 0) f += weights.kappa.dot(attr);
  return f;
}

double predict(const Mat& psi, const WeightPosterior& weights, Index i, Index j, const Vec& attr) {
  return effective_discriminant(psi, weights, i, j, attr) >= 0.0 ? 1.0 : -1.0;
}

namespace {

inline double instance_discriminant(const Mat& psi, const std::vector<WeightPosterior>& weights,
                                    const LinkInstance& inst) {
  return effective_discriminant(psi, weights[inst.relation], inst.i, inst.j, inst.attr);
}

inline double cost_weight(double label, double pos_weight, double neg_weight) {
  return label > 0.0 ? pos_weight : neg_weight;
}

}  // namespace

double hinge_loss(const Mat& psi, const std::vector<WeightPosterior>& weights,
                  const TrainingSet& tr, double ell, const std::vector<char>* subset,
                  double pos_weight, double neg_weight) {
  double total = 0.0;
  for (std::size_t e = 0; e < tr.instances.size(); ++e) {
    if (subset != nullptr && !(*subset)[e]) continue;
    const auto& inst = tr.instances[e];
    const double slack = ell - inst.label * instance_discriminant(psi, weights, inst);
    if (slack > 0.0) total += cost_weight(inst.label, pos_weight, neg_weight) * slack;
  }
  return total;
}

Vec hinge_subgradient_row(const Mat& psi, const std::vector<WeightPosterior>& weights,
                          const TrainingSet& tr, double ell, Index i,
                          const std::vector<char>* subset, double pos_weight, double neg_weight) {
  const Index k = psi.cols();
  Vec grad = Vec::Zero(k);
  for (int rel = 0; rel < tr.n_relations; ++rel) {
    const Mat& Lambda = weights[rel].Lambda;
    Vec out_acc = Vec::Zero(k);
    Vec in_acc = Vec::Zero(k);
    for (int e : tr.out_of[rel][i]) {
      if (subset != nullptr && !(*subset)[e]) continue;
      const auto& inst = tr.instances[e];
      if (inst.label * instance_discriminant(psi, weights, inst) > ell) continue;
      const double w = cost_weight(inst.label, pos_weight, neg_weight);
      out_acc += (w * inst.label) * psi.row(inst.j).transpose();
    }
    for (int e : tr.into[rel][i]) {
      if (subset != nullptr && !(*subset)[e]) continue;
      const auto& inst = tr.instances[e];
      if (inst.label * instance_discriminant(psi, weights, inst) > ell) continue;
      const double w = cost_weight(inst.label, pos_weight, neg_weight);
      in_acc += (w * inst.label) * psi.row(inst.i).transpose();
    }
    grad -= Lambda * out_acc + Lambda.transpose() * in_acc;

    const int self = tr.self_of[rel][i];
    if (self >= 0 && (subset == nullptr || (*subset)[self])) {
      const auto& inst = tr.instances[self];
      if (inst.label * instance_discriminant(psi, weights, inst) <= ell) {
        const double w = cost_weight(inst.label, pos_weight, neg_weight) * inst.label;
        // d f(X_ii)/d psi_ik = sum_{k' != k} (L_kk' + L_k'k) psi_ik' + L_kk;
        // the psi_ik terms cancel, so this is written without them.
        Vec self_grad = (Lambda + Lambda.transpose()) * psi.row(i).transpose();
        self_grad -= psi.row(i).transpose().cwiseProduct(2.0 * Lambda.diagonal());
        self_grad += Lambda.diagonal();
        grad -= w * self_grad;
      }
    }
  }
  return grad;
}

double hinge_subgradient_psi(const Mat& psi, const std::vector<WeightPosterior>& weights,
                             const TrainingSet& tr, double ell, Index i, Index k,
                             const std::vector<char>* subset) {
  return hinge_subgradient_row(psi, weights, tr, ell, i, subset)[k];
}

double update_psi(const ModelState& state, const TrainingSet& tr, const ModelConfig& config,
                  Index i, Index k, double scale_C) {
  Vec prefix, bounds;
  stick_prefix_terms(state.ibp, prefix, bounds);
  const double grad = hinge_subgradient_psi(state.ibp.psi, state.weights, tr, config.ell, i, k);
  return sigmoid(prefix[k] - bounds[k] - scale_C * grad);
}

BuiltProblem build_weight_problem(const Mat& psi, const TrainingSet& tr, int relation,
                                  const ModelConfig& config, double lambda, double cost_scale,
                                  double mu_mean, const std::vector<char>* subset) {
  const Index k = psi.cols();
  const Index dim = k * k + tr.attr_dim;
  Vec mask = weight_mask(k, tr.attr_dim, config.band);

  BuiltProblem built;
  built.problem.dim = dim;
  built.problem.matrix_dim = k;
  built.problem.reg_precision = lambda;
  if (mu_mean != 0.0) built.problem.offset = mu_mean * mask;

  for (std::size_t e = 0; e < tr.instances.size(); ++e) {
    if (subset != nullptr && !(*subset)[e]) continue;
    const auto& inst = tr.instances[e];
    if (inst.relation != relation) continue;
    Vec feature(dim);
    Mat m = expected_feature(psi, inst.i, inst.j);
    for (Index a = 0; a < k; ++a) feature.segment(a * k, k) = m.row(a).transpose();
    if (tr.attr_dim > 0) feature.tail(tr.attr_dim) = inst.attr;
    if (config.band >= 0) feature.array() *= mask.array();
    MarginExample ex;
    ex.label = inst.label;
    ex.cost = cost_scale * (inst.label > 0.0 ? config.pos_cost_multiplier : 1.0);
    ex.margin = config.ell;
    if (mu_mean != 0.0) ex.margin -= inst.label * mu_mean * mask.dot(feature);
    ex.feature = std::move(feature);
    built.problem.examples.push_back(std::move(ex));
    built.instance_ids.push_back(static_cast<int>(e));
  }
  return built;
}

MarginProblem rescale_to_unit_precision(const MarginProblem& problem) {
  MarginProblem out = problem;
  for (auto& ex : out.examples) ex.cost /= problem.reg_precision;
  out.reg_precision = 1.0;
  return out;
}

WeightPosterior extract_weight_posterior(const Vec& w, Index k, Index attr_dim, double precision) {
  WeightPosterior out;
  out.Lambda = Eigen::Map<const Mat>(w.data(), k, k).transpose();  // row-major flat -> matrix
  out.kappa = w.tail(attr_dim);
  out.precision = precision;
  return out;
}

WeightPosterior solve_weight_posterior(const Mat& psi, const TrainingSet& tr, int relation,
                                       const ModelConfig& config, double cost_scale,
                                       const std::vector<char>* subset, DualCache* warm) {
  BuiltProblem built = build_weight_problem(psi, tr, relation, config, 1.0, cost_scale, 0.0, subset);
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
  return extract_weight_posterior(sol.weights, psi.cols(), tr.attr_dim, 1.0);
}

double theta_kl(const std::vector<WeightPosterior>& weights) {
  double kl = 0.0;
  for (const auto& w : weights) {
    kl += 0.5 * (w.Lambda.squaredNorm() + w.kappa.squaredNorm());
  }
  return kl;
}

double model_objective(const ModelState& state, const TrainingSet& tr, const ModelConfig& config) {
  return unbiased_objective(state, tr, config, full_batch(tr));
}

ModelState init_state(const TrainingSet& tr, const ModelConfig& config, Rng& rng) {
  ModelState state;
  state.ibp.alpha = config.alpha;
  state.ibp.gamma.resize(config.K, 2);
  state.ibp.gamma.col(0).setConstant(config.alpha);
  state.ibp.gamma.col(1).setOnes();
  state.ibp.psi.resize(tr.n_entities, config.K);
  for (Index i = 0; i < state.ibp.psi.rows(); ++i) {
    for (Index k = 0; k < config.K; ++k) {
      state.ibp.psi(i, k) = 0.5 + rng.uniform(0.0, 0.001);
    }
  }
  state.ibp.refresh_q();

  Vec mask = weight_mask(config.K, 0, config.band);
  for (int rel = 0; rel < tr.n_relations; ++rel) {
    WeightPosterior w;
    w.Lambda.resize(config.K, config.K);
    for (Index a = 0; a < config.K; ++a) {
      for (Index b = 0; b < config.K; ++b) {
        w.Lambda(a, b) = rng.uniform(0.0, 0.1);
      }
    }
    if (config.symmetric) {
      w.Lambda = ((w.Lambda + w.Lambda.transpose()) / 2.0).eval();
    }
    if (config.band >= 0) {
      w.Lambda.array() *= Eigen::Map<const Mat>(mask.data(), config.K, config.K).array();
    }
    w.kappa = Vec::Zero(tr.attr_dim);
    w.precision = 1.0;
    state.weights.push_back(std::move(w));
  }
  return state;
}

std::vector<double> score_records(const ModelState& state, const RelationalGraph& graph,
                                  const std::vector<LinkRecord>& records) {
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const auto& rec : records) {
    Vec attr = graph.attr_dim > 0 ? pairwise_attribute(graph, rec.i, rec.j) : Vec();
    scores.push_back(effective_discriminant(state.ibp.psi, state.weights[rec.relation], rec.i,
                                            rec.j, attr));
  }
  return scores;
}

}  // namespace medlfrm
