#pragma once

#include "onebit/synth.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>

namespace onebit {

/// 17 significant digits, round-trips every double.
std::string format_double(double x);

/// Header `y,x1,...,xp`, one row per observation.
void write_dataset_csv(std::ostream& os, const Dataset& data);

/// p rows of p comma-separated values.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

}  // namespace onebit
