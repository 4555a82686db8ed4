#include "medlfrm/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace medlfrm {

void save_checkpoint(const ModelState& state, const std::string& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  if (!header.empty()) out << header;
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };

  out << "model " << (state.ng ? "bayes" : "medlfrm") << "\n";
  out << "relations " << state.weights.size() << "\n";
  write_posterior(out, state.ibp);
  for (std::size_t r = 0; r < state.weights.size(); ++r) {
    const auto& w = state.weights[r];
    out << "lambda " << r << ' ';
    put(w.precision);
    out << "\nLambda " << r << ' ' << w.Lambda.rows() << "\n";
    for (Index a = 0; a < w.Lambda.rows(); ++a) {
      for (Index b = 0; b < w.Lambda.cols(); ++b) {
        if (b) out << ' ';
        put(w.Lambda(a, b));
      }
      out << '\n';
    }
    out << "kappa " << r << ' ' << w.kappa.size() << "\n";
    for (Index d = 0; d < w.kappa.size(); ++d) {
      if (d) out << ' ';
      put(w.kappa[d]);
    }
    if (w.kappa.size()) out << '\n';
  }
  if (state.ng) {
    out << "ng ";
    put(state.ng->mu);
    out << ' ';
    put(state.ng->n);
    out << ' ';
    put(state.ng->nu);
    out << ' ';
    put(state.ng->S);
    out << '\n';
  }
}

ModelState load_checkpoint(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw DataError("cannot open checkpoint: " + path);
  // Strip comment lines so the header echo never interferes with parsing.
  std::stringstream in;
  std::string line;
  while (std::getline(file, line)) {
    if (!line.empty() && line[0] == '#') continue;
    in << line << '\n';
  }

  ModelState state;
  std::string tag, kind;
  if (!(in >> tag >> kind) || tag != "model") throw DataError("checkpoint: expected model line");
  std::size_t relations = 0;
  if (!(in >> tag >> relations) || tag != "relations") {
    throw DataError("checkpoint: expected relations line");
  }
  state.ibp = read_posterior(in);
  for (std::size_t r = 0; r < relations; ++r) {
    WeightPosterior w;
    std::size_t idx = 0;
    Index k = 0, d = 0;
    if (!(in >> tag >> idx >> w.precision) || tag != "lambda" || idx != r) {
      throw DataError("checkpoint: expected lambda line");
    }
    if (!(in >> tag >> idx >> k) || tag != "Lambda" || idx != r) {
      throw DataError("checkpoint: expected Lambda block");
    }
    w.Lambda.resize(k, k);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) {
        if (!(in >> w.Lambda(a, b))) throw DataError("checkpoint: bad Lambda row");
      }
    }
    if (!(in >> tag >> idx >> d) || tag != "kappa" || idx != r) {
      throw DataError("checkpoint: expected kappa block");
    }
    w.kappa.resize(d);
    for (Index c = 0; c < d; ++c) {
      if (!(in >> w.kappa[c])) throw DataError("checkpoint: bad kappa row");
    }
    state.weights.push_back(std::move(w));
  }
  if (kind == "bayes") {
    NormalGammaState ng;
    if (!(in >> tag >> ng.mu >> ng.n >> ng.nu >> ng.S) || tag != "ng") {
      throw DataError("checkpoint: expected ng line");
    }
    state.ng = ng;
  }
  return state;
}

}  // namespace medlfrm
