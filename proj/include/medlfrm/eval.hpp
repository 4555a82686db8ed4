#pragma once

#include <vector>

#include "medlfrm/model.hpp"

namespace medlfrm {

struct RankedPredictions {
  std::vector<double> scores;
  std::vector<double> labels;  // +1 / -1
};

// Rank-sum AUC with midrank tie handling (the Mann-Whitney statistic).
// Requires at least one example of each class.
double auc(const RankedPredictions& preds);

double average_relation_auc(const std::vector<double>& per_relation);

// Scores the records and averages AUC per relation; relations where the
// records carry only one class are skipped. Falls back to the pooled AUC
// when nothing is left.
double mean_relation_auc(const ModelState& state, const RelationalGraph& graph,
                         const std::vector<LinkRecord>& records);

double pooled_auc(const std::vector<double>& scores, const std::vector<LinkRecord>& records);

struct SparsityReport {
  long active_entries = 0;
  double ratio = 0.0;
  long active_features = 0;
};

// Counts psi entries above the threshold (features "more likely present
// than absent") and the columns containing any such entry.
SparsityReport sparsity_report(const Mat& psi, double threshold = 0.5);

// Stratified k-fold selection of C over the training records; ties resolve
// to the smallest C. Never touches anything outside `train`.
double cross_validate_C(const RelationalGraph& graph, const std::vector<LinkRecord>& train,
                        const ModelConfig& config, const std::vector<double>& grid,
                        int folds = 5, std::uint64_t seed = 0);

}  // namespace medlfrm
