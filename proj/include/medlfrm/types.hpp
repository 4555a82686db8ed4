#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace medlfrm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Data-level failures (bad files, inconsistent labels, impossible requests).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failures of the numeric machinery (non-finite inputs, solver breakdown).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace medlfrm
