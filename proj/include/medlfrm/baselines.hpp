#pragma once

#include <vector>

#include "medlfrm/graph.hpp"

namespace medlfrm {

enum class NeighborVariant {
  kChildren,   // out n out
  kParents,    // in n in
  kForward,    // out(i) n in(j): intermediates on i -> j paths
  kBackward,   // in(i) n out(j): intermediates on j -> i paths
  kUnion,      // union of the four intersection sets
};

// Out-/in-neighbor sets built from training positives only (test edges never
// enter). Undirected records count as both directions.
class NeighborSets {
 public:
  NeighborSets(int n_entities, const std::vector<LinkRecord>& train_records,
               const std::vector<char>* undirected_relations = nullptr);

  const std::vector<int>& out(int i) const { return out_[i]; }
  const std::vector<int>& in(int i) const { return in_[i]; }
  int n_entities() const { return static_cast<int>(out_.size()); }

 private:
  std::vector<std::vector<int>> out_;  // sorted, deduplicated
  std::vector<std::vector<int>> in_;
};

long common_neighbors(const NeighborSets& sets, int i, int j, NeighborVariant variant);

double jaccard(const NeighborSets& sets, int i, int j, NeighborVariant variant);

// Truncated Katz score: sum_{l=1..max_len} beta^l (#paths of length l from i
// to j), accumulated by sparse matrix powers.
double katz(const NeighborSets& sets, int i, int j, double beta, int max_len = 6);

// Scores a whole query batch, grouping by source so every length-l path
// count is computed once per source.
std::vector<double> katz_scores(const NeighborSets& sets,
                                const std::vector<std::pair<int, int>>& pairs, double beta,
                                int max_len = 6);

}  // namespace medlfrm
