#include "medlfrm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace medlfrm {

double auc(const RankedPredictions& preds) {
  const std::size_t n = preds.scores.size();
  if (preds.labels.size() != n) throw std::invalid_argument("auc: size mismatch");
  std::size_t n_pos = 0;
  for (double y : preds.labels) {
    if (y != 1.0 && y != -1.0) throw std::invalid_argument("auc: labels must be +1/-1");
    if (y > 0.0) ++n_pos;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("auc: both classes required");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return preds.scores[a] < preds.scores[b]; });

  // Midranks over tie groups, then the Mann-Whitney rank sum for positives.
  double rank_sum_pos = 0.0;
  std::size_t at = 0;
  while (at < n) {
    std::size_t end = at;
    while (end < n && preds.scores[order[end]] == preds.scores[order[at]]) ++end;
    const double midrank = 0.5 * static_cast<double>(at + 1 + end);  // ranks are 1-based
    for (std::size_t s = at; s < end; ++s) {
      if (preds.labels[order[s]] > 0.0) rank_sum_pos += midrank;
    }
    at = end;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double average_relation_auc(const std::vector<double>& per_relation) {
  if (per_relation.empty()) throw std::invalid_argument("average_relation_auc: empty input");
  double sum = 0.0;
  for (double v : per_relation) sum += v;
  return sum / static_cast<double>(per_relation.size());
}

double pooled_auc(const std::vector<double>& scores, const std::vector<LinkRecord>& records) {
  RankedPredictions preds;
  preds.scores = scores;
  preds.labels.reserve(records.size());
  for (const auto& rec : records) preds.labels.push_back(rec.label);
  return auc(preds);
}

double mean_relation_auc(const ModelState& state, const RelationalGraph& graph,
                         const std::vector<LinkRecord>& records) {
  std::vector<double> scores = score_records(state, graph, records);
  std::map<int, RankedPredictions> by_relation;
  for (std::size_t r = 0; r < records.size(); ++r) {
    auto& preds = by_relation[records[r].relation];
    preds.scores.push_back(scores[r]);
    preds.labels.push_back(records[r].label);
  }
  std::vector<double> per_relation;
  for (const auto& [rel, preds] : by_relation) {
    bool has_pos = false, has_neg = false;
    for (double y : preds.labels) (y > 0.0 ? has_pos : has_neg) = true;
    if (has_pos && has_neg) per_relation.push_back(auc(preds));
  }
  if (per_relation.empty()) return pooled_auc(scores, records);
  return average_relation_auc(per_relation);
}

SparsityReport sparsity_report(const Mat& psi, double threshold) {
  SparsityReport report;
  for (Index k = 0; k < psi.cols(); ++k) {
    long in_column = 0;
    for (Index i = 0; i < psi.rows(); ++i) {
      if (psi(i, k) > threshold) ++in_column;
    }
    report.active_entries += in_column;
    if (in_column > 0) ++report.active_features;
  }
  const double total = static_cast<double>(psi.rows() * psi.cols());
  report.ratio = total > 0.0 ? static_cast<double>(report.active_entries) / total : 0.0;
  return report;
}

double cross_validate_C(const RelationalGraph& graph, const std::vector<LinkRecord>& train,
                        const ModelConfig& config, const std::vector<double>& grid, int folds,
                        std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("cross_validate_C: empty grid");
  if (folds < 2) throw std::invalid_argument("cross_validate_C: need at least 2 folds");

  // Stratified fold assignment: shuffle within each (relation, label) cell
  // and deal records round-robin so every fold sees both classes.
  Rng rng(seed);
  std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
  for (std::size_t r = 0; r < train.size(); ++r) {
    cells[{train[r].relation, train[r].label > 0.0 ? 1 : 0}].push_back(r);
  }
  std::vector<int> fold_of(train.size(), 0);
  for (auto& [cell, members] : cells) {
    rng.shuffle(members);
    for (std::size_t s = 0; s < members.size(); ++s) {
      fold_of[members[s]] = static_cast<int>(s % folds);
    }
  }

  std::vector<double> grid_sorted = grid;
  std::sort(grid_sorted.begin(), grid_sorted.end());
  double best_c = grid_sorted.front();
  double best_auc = -1.0;
  for (double c : grid_sorted) {
    ModelConfig cfg = config;
    cfg.C = c;
    double total = 0.0;
    int counted = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<LinkRecord> fit_part, val_part;
      for (std::size_t r = 0; r < train.size(); ++r) {
        (fold_of[r] == f ? val_part : fit_part).push_back(train[r]);
      }
      if (fit_part.empty() || val_part.empty()) continue;
      FitResult fit = fit_batch(graph, fit_part, cfg);
      total += mean_relation_auc(fit.state, graph, val_part);
      ++counted;
    }
    if (counted == 0) continue;
    const double mean = total / counted;
    if (mean > best_auc) {  // strict: ties keep the smaller C
      best_auc = mean;
      best_c = c;
    }
  }
  return best_c;
}

}  // namespace medlfrm
