#include "medlfrm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace medlfrm {

void LinkSet::add(int i, int j, double label) {
  if (label != 1.0 && label != -1.0) {
    throw DataError("link label must be +1 or -1");
  }
  if (i == j && !allow_self_links) {
    throw DataError("self-link (" + std::to_string(i) + "," + std::to_string(j) +
                    ") not allowed in this link set");
  }
  auto k = key(i, j);
  auto [it, inserted] = entries.emplace(k, label);
  if (!inserted && it->second != label) {
    throw DataError("contradictory labels for link (" + std::to_string(i) + "," +
                    std::to_string(j) + ")");
  }
}

Vec pairwise_attribute(const RelationalGraph& graph, int i, int j) {
  if (i < 0 || j < 0 || i >= graph.n_entities || j >= graph.n_entities) {
    throw std::invalid_argument("pairwise_attribute: entity index out of range");
  }
  auto it = graph.attributes.find({i, j});
  if (it == graph.attributes.end()) return Vec::Zero(graph.attr_dim);
  return it->second;
}

namespace {

bool parse_int(const std::string& tok, int& out) {
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size() || v < 0) return false;
    out = static_cast<int>(v);
    return true;
  } catch (...) {
    return false;
  }
}

bool parse_label(const std::string& tok, double& out) {
  if (tok == "+1" || tok == "1") {
    out = 1.0;
    return true;
  }
  if (tok == "-1") {
    out = -1.0;
    return true;
  }
  return false;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

int entity_from_token(const std::string& tok, IdDictionary* dict, const std::string& path,
                      int line_no) {
  int v = 0;
  if (parse_int(tok, v)) return v;
  if (dict != nullptr) return dict->intern(tok);
  throw DataError(path + ":" + std::to_string(line_no) + ": malformed entity id '" + tok + "'");
}

}  // namespace

RelationalGraph load_edge_list(const std::string& path, bool directed,
                               std::optional<int> n_entities, bool allow_self_links,
                               IdDictionary* dict) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path);

  RelationalGraph graph;
  graph.relations.emplace_back();
  graph.relations[0].directed = directed;
  graph.relations[0].allow_self_links = allow_self_links;

  int max_entity = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() < 2 || toks.size() > 4) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected `src dst [label] [relation]`");
    }
    int src = entity_from_token(toks[0], dict, path, line_no);
    int dst = entity_from_token(toks[1], dict, path, line_no);
    double label = 1.0;
    int rel = 0;
    if (toks.size() >= 3 && !parse_label(toks[2], label)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed label '" + toks[2] + "'");
    }
    if (toks.size() == 4 && !parse_int(toks[3], rel)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed relation '" + toks[3] + "'");
    }
    if (n_entities && (src >= *n_entities || dst >= *n_entities)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": endpoint out of range");
    }
    while (graph.n_relations() <= rel) {
      graph.relations.emplace_back();
      graph.relations.back().directed = directed;
      graph.relations.back().allow_self_links = allow_self_links;
    }
    try {
      graph.relations[rel].add(src, dst, label);
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    max_entity = std::max(max_entity, std::max(src, dst));
  }
  graph.n_entities = n_entities ? *n_entities : max_entity + 1;
  return graph;
}

void save_edge_list(const RelationalGraph& graph, const std::string& path,
                    const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write edge list: " + path);
  if (!header.empty()) out << header;
  const bool multi = graph.n_relations() > 1;
  for (int r = 0; r < graph.n_relations(); ++r) {
    for (const auto& [pair, label] : graph.relations[r].entries) {
      out << pair.first << '\t' << pair.second << '\t' << (label > 0 ? "+1" : "-1");
      if (multi) out << '\t' << r;
      out << '\n';
    }
  }
}

void load_attributes(RelationalGraph& graph, const std::string& path, IdDictionary* dict) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open attribute file: " + path);
  std::string line;
  int line_no = 0;
  int dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() < 3) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected `src dst v1 ... vD`");
    }
    int src = entity_from_token(toks[0], dict, path, line_no);
    int dst = entity_from_token(toks[1], dict, path, line_no);
    if (src >= graph.n_entities || dst >= graph.n_entities) {
      throw DataError(path + ":" + std::to_string(line_no) + ": endpoint out of range");
    }
    int d = static_cast<int>(toks.size()) - 2;
    if (dim < 0) dim = d;
    if (d != dim) {
      throw DataError(path + ":" + std::to_string(line_no) + ": inconsistent attribute dimension");
    }
    Vec v(d);
    for (int c = 0; c < d; ++c) {
      try {
        v[c] = std::stod(toks[c + 2]);
      } catch (...) {
        throw DataError(path + ":" + std::to_string(line_no) + ": malformed value '" + toks[c + 2] + "'");
      }
    }
    graph.attributes[{src, dst}] = std::move(v);
  }
  graph.attr_dim = std::max(dim, 0);
}

namespace {

// Ordered non-edge sampler for one relation. Candidate space excludes every
// stored pair and (unless allowed) the diagonal. Uses rejection sampling
// while the space is sparse and exhaustive enumeration otherwise.
class NegativeSampler {
 public:
  NegativeSampler(const RelationalGraph& graph, const LinkSet& set)
      : n_(graph.n_entities), set_(set) {
    for (const auto& [pair, label] : set.entries) taken_.insert(pair);
  }

  std::size_t capacity() const {
    std::size_t total = set_.directed
                            ? static_cast<std::size_t>(n_) * (n_ - 1)
                            : static_cast<std::size_t>(n_) * (n_ - 1) / 2;
    if (set_.allow_self_links) total += static_cast<std::size_t>(n_);
    return total - taken_.size();
  }

  std::vector<std::pair<int, int>> draw(std::size_t count, Rng& rng) {
    if (count > capacity()) {
      throw DataError("not enough non-edges to satisfy negative_ratio");
    }
    std::vector<std::pair<int, int>> out;
    out.reserve(count);
    if (count * 2 > capacity()) {
      // Dense request: enumerate all remaining non-edges and subsample.
      std::vector<std::pair<int, int>> pool;
      for (int i = 0; i < n_; ++i) {
        int j0 = set_.directed ? 0 : i;
        for (int j = j0; j < n_; ++j) {
          if (i == j && !set_.allow_self_links) continue;
          if (taken_.count({i, j})) continue;
          pool.emplace_back(i, j);
        }
      }
      auto idx = rng.sample_without_replacement(pool.size(), count);
      for (auto k : idx) {
        out.push_back(pool[k]);
        taken_.insert(pool[k]);
      }
    } else {
      while (out.size() < count) {
        int i = static_cast<int>(rng.index(n_));
        int j = static_cast<int>(rng.index(n_));
        if (i == j && !set_.allow_self_links) continue;
        if (!set_.directed && j < i) std::swap(i, j);
        if (taken_.count({i, j})) continue;
        taken_.insert({i, j});
        out.emplace_back(i, j);
      }
    }
    return out;
  }

 private:
  int n_;
  const LinkSet& set_;
  std::set<std::pair<int, int>> taken_;
};

}  // namespace

Split split(const RelationalGraph& graph, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie in (0, 1]");
  }
  if (spec.negative_ratio < 0.0) {
    throw std::invalid_argument("split: negative_ratio must be nonnegative");
  }
  bool empty = true;
  for (const auto& rel : graph.relations) empty = empty && rel.entries.empty();
  if (empty) throw DataError("split: graph has no links");

  Rng rng(spec.seed);
  Split out;
  for (int r = 0; r < graph.n_relations(); ++r) {
    const LinkSet& set = graph.relations[r];
    std::vector<std::pair<int, int>> positives, negatives;
    for (const auto& [pair, label] : set.entries) {
      (label > 0 ? positives : negatives).push_back(pair);
    }
    rng.shuffle(positives);
    rng.shuffle(negatives);

    auto take = [&](const std::vector<std::pair<int, int>>& pool, double label,
                    std::size_t n_train) {
      for (std::size_t k = 0; k < pool.size(); ++k) {
        LinkRecord rec{r, pool[k].first, pool[k].second, label};
        (k < n_train ? out.train : out.test).push_back(rec);
      }
    };
    auto n_train_pos = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(positives.size())));
    take(positives, 1.0, n_train_pos);
    auto n_train_neg = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(negatives.size())));
    take(negatives, -1.0, n_train_neg);

    if (spec.negative_ratio > 0.0) {
      NegativeSampler sampler(graph, set);
      auto want_train = static_cast<std::size_t>(
          std::llround(spec.negative_ratio * static_cast<double>(n_train_pos)));
      for (auto [i, j] : sampler.draw(want_train, rng)) {
        out.train.push_back({r, i, j, -1.0});
      }
      // Test negatives match the test positive count and are drawn outside
      // the training set (the sampler already excludes everything drawn).
      std::size_t want_test = positives.size() - n_train_pos;
      for (auto [i, j] : sampler.draw(want_test, rng)) {
        out.test.push_back({r, i, j, -1.0});
      }
    }
  }
  return out;
}

void save_split_manifest(const Split& split, const std::string& path,
                         const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write split manifest: " + path);
  if (!header.empty()) out << header;
  auto dump = [&](const std::vector<LinkRecord>& recs, const char* tag) {
    for (const auto& rec : recs) {
      out << rec.relation << '\t' << rec.i << '\t' << rec.j << '\t'
          << (rec.label > 0 ? "+1" : "-1") << '\t' << tag << '\n';
    }
  };
  dump(split.train, "train");
  dump(split.test, "test");
}

Split load_split_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split manifest: " + path);
  Split split;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() != 5) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected `relation src dst label train|test`");
    }
    LinkRecord rec;
    double label = 1.0;
    if (!parse_int(toks[0], rec.relation) || !parse_int(toks[1], rec.i) ||
        !parse_int(toks[2], rec.j) || !parse_label(toks[3], label)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed record");
    }
    rec.label = label;
    if (toks[4] == "train") {
      split.train.push_back(rec);
    } else if (toks[4] == "test") {
      split.test.push_back(rec);
    } else {
      throw DataError(path + ":" + std::to_string(line_no) + ": unknown partition '" + toks[4] + "'");
    }
  }
  return split;
}

int IdDictionary::intern(const std::string& name) {
  auto [it, inserted] = ids_.emplace(name, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

std::optional<int> IdDictionary::lookup(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void IdDictionary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write id dictionary: " + path);
  for (std::size_t i = 0; i < names_.size(); ++i) out << i << '\t' << names_[i] << '\n';
}

IdDictionary IdDictionary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open id dictionary: " + path);
  IdDictionary dict;
  std::string line;
  while (std::getline(in, line)) {
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw DataError("malformed id dictionary line: " + line);
    int expect = 0;
    if (!parse_int(toks[0], expect) || expect != static_cast<int>(dict.names_.size())) {
      throw DataError("id dictionary indices must be dense and ordered");
    }
    dict.intern(toks[1]);
  }
  return dict;
}

}  // namespace medlfrm
