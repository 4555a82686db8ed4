#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "medlfrm/rng.hpp"
#include "medlfrm/types.hpp"

namespace medlfrm {

// One observed, signed link set. Undirected sets store each pair once under
// the canonical (min, max) key; directionality is reintroduced only when the
// training instances are assembled.
struct LinkSet {
  bool directed = true;
  bool allow_self_links = false;
  std::map<std::pair<int, int>, double> entries;  // label in {+1, -1}

  std::pair<int, int> key(int i, int j) const {
    if (!directed && j < i) return {j, i};
    return {i, j};
  }

  std::optional<double> label(int i, int j) const {
    auto it = entries.find(key(i, j));
    if (it == entries.end()) return std::nullopt;
    return it->second;
  }

  // Inserts or checks against an existing entry; contradictory relabeling is an error.
  void add(int i, int j, double label);

  std::size_t size() const { return entries.size(); }
};

struct RelationalGraph {
  int n_entities = 0;
  std::vector<LinkSet> relations;
  int attr_dim = 0;
  std::map<std::pair<int, int>, Vec> attributes;

  int n_relations() const { return static_cast<int>(relations.size()); }
};

// Attribute lookup; pairs without a stored vector get zeros. Keys are exact:
// (i, j) and (j, i) are distinct slots.
Vec pairwise_attribute(const RelationalGraph& graph, int i, int j);

struct SplitSpec {
  double train_fraction = 0.8;
  double negative_ratio = 0.0;  // sampled negatives per positive; 0 = use stored labels only
  std::uint64_t seed = 0;
};

// One link occurrence, as stored (canonical pair for undirected relations).
struct LinkRecord {
  int relation = 0;
  int i = 0;
  int j = 0;
  double label = 1.0;
};

struct Split {
  std::vector<LinkRecord> train;
  std::vector<LinkRecord> test;
};

Split split(const RelationalGraph& graph, const SplitSpec& spec);

void save_split_manifest(const Split& split, const std::string& path,
                         const std::string& header = "");
Split load_split_manifest(const std::string& path);

// Sidecar dictionary mapping external string ids to dense 0-based ints.
class IdDictionary {
 public:
  int intern(const std::string& name);
  std::optional<int> lookup(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }
  void save(const std::string& path) const;
  static IdDictionary load(const std::string& path);

 private:
  std::map<std::string, int> ids_;
  std::vector<std::string> names_;
};

// Edge-list format: whitespace-separated `src dst [label] [relation]`, one
// record per line, '#' comments. Missing labels default to +1.
RelationalGraph load_edge_list(const std::string& path, bool directed,
                               std::optional<int> n_entities = std::nullopt,
                               bool allow_self_links = false,
                               IdDictionary* dict = nullptr);

void save_edge_list(const RelationalGraph& graph, const std::string& path,
                    const std::string& header = "");

// Attribute file: `src dst v1 ... vD` with a fixed D per file.
void load_attributes(RelationalGraph& graph, const std::string& path,
                     IdDictionary* dict = nullptr);

}  // namespace medlfrm
