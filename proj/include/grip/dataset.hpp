#pragma once

#include <Eigen/Dense>
#include <vector>

namespace grip {

// A regression problem split for simultaneous testing: response y, the d
// tested columns z, and the remaining control columns x.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd z;
  Eigen::MatrixXd x;

  int n() const { return static_cast<int>(y.size()); }
  int d() const { return static_cast<int>(z.cols()); }
  int n_controls() const { return static_cast<int>(x.cols()); }
};

// Splits the full design w by 1-based column indices: listed columns become
// z (in list order), all remaining columns become x (in original order).
// Indices must be distinct and inside [1, cols]; at least one column must be
// left over for x.
Dataset split_dataset(const Eigen::MatrixXd& w, const Eigen::VectorXd& y,
                      const std::vector<int>& test_indices);

}  // namespace grip
