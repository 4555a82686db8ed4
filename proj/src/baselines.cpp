#include "medlfrm/baselines.hpp"

#include <algorithm>
#include <map>

namespace medlfrm {

NeighborSets::NeighborSets(int n_entities, const std::vector<LinkRecord>& train_records,
                           const std::vector<char>* undirected_relations) {
  out_.resize(n_entities);
  in_.resize(n_entities);
  for (const auto& rec : train_records) {
    if (rec.label <= 0.0) continue;
    out_[rec.i].push_back(rec.j);
    in_[rec.j].push_back(rec.i);
    const bool undirected = undirected_relations != nullptr &&
                            rec.relation < static_cast<int>(undirected_relations->size()) &&
                            (*undirected_relations)[rec.relation];
    if (undirected && rec.i != rec.j) {
      out_[rec.j].push_back(rec.i);
      in_[rec.i].push_back(rec.j);
    }
  }
  for (auto& v : out_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& v : in_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

namespace {

std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> unite(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

std::vector<int> variant_intersection(const NeighborSets& s, int i, int j,
                                      NeighborVariant variant) {
  switch (variant) {
    case NeighborVariant::kChildren:
      return intersect(s.out(i), s.out(j));
    case NeighborVariant::kParents:
      return intersect(s.in(i), s.in(j));
    case NeighborVariant::kForward:
      return intersect(s.out(i), s.in(j));
    case NeighborVariant::kBackward:
      return intersect(s.in(i), s.out(j));
    case NeighborVariant::kUnion: {
      auto u = unite(intersect(s.out(i), s.out(j)), intersect(s.in(i), s.in(j)));
      u = unite(std::move(u), intersect(s.out(i), s.in(j)));
      return unite(std::move(u), intersect(s.in(i), s.out(j)));
    }
  }
  return {};
}

}  // namespace

long common_neighbors(const NeighborSets& sets, int i, int j, NeighborVariant variant) {
  return static_cast<long>(variant_intersection(sets, i, j, variant).size());
}

double jaccard(const NeighborSets& sets, int i, int j, NeighborVariant variant) {
  std::vector<int> a, b;
  switch (variant) {
    case NeighborVariant::kChildren:
      a = sets.out(i);
      b = sets.out(j);
      break;
    case NeighborVariant::kParents:
      a = sets.in(i);
      b = sets.in(j);
      break;
    case NeighborVariant::kForward:
      a = sets.out(i);
      b = sets.in(j);
      break;
    case NeighborVariant::kBackward:
      a = sets.in(i);
      b = sets.out(j);
      break;
    case NeighborVariant::kUnion:
      a = unite(sets.out(i), sets.in(i));
      b = unite(sets.out(j), sets.in(j));
      break;
  }
  const double inter = static_cast<double>(intersect(a, b).size());
  const double uni = static_cast<double>(unite(std::move(a), b).size());
  return uni == 0.0 ? 0.0 : inter / uni;  // empty-union pairs score 0
}

std::vector<double> katz_scores(const NeighborSets& sets,
                                const std::vector<std::pair<int, int>>& pairs, double beta,
                                int max_len) {
  const int n = sets.n_entities();
  std::map<int, std::vector<std::size_t>> by_source;
  for (std::size_t q = 0; q < pairs.size(); ++q) by_source[pairs[q].first].push_back(q);

  std::vector<double> scores(pairs.size(), 0.0);
  std::vector<double> counts(n), next(n);
  for (const auto& [src, queries] : by_source) {
    std::fill(counts.begin(), counts.end(), 0.0);
    counts[src] = 1.0;
    double damp = 1.0;
    for (int len = 1; len <= max_len; ++len) {
      std::fill(next.begin(), next.end(), 0.0);
      for (int u = 0; u < n; ++u) {
        if (counts[u] == 0.0) continue;
        for (int v : sets.out(u)) next[v] += counts[u];
      }
      counts.swap(next);
      damp *= beta;
      for (std::size_t q : queries) scores[q] += damp * counts[pairs[q].second];
    }
  }
  return scores;
}

double katz(const NeighborSets& sets, int i, int j, double beta, int max_len) {
  return katz_scores(sets, {{i, j}}, beta, max_len)[0];
}

}  // namespace medlfrm
