#pragma once

#include <string>

#include "medlfrm/bayes.hpp"
#include "medlfrm/model.hpp"

namespace medlfrm {

// Decimal-text model checkpoint: an optional '#' header (config echo), the
// IBP posterior block, per-relation Lambda/kappa, and the NG scalars in
// Bayesian mode. Values round-trip exactly (17 significant digits).
void save_checkpoint(const ModelState& state, const std::string& path,
                     const std::string& header = "");

ModelState load_checkpoint(const std::string& path);

}  // namespace medlfrm
