#pragma once

#include <Eigen/Dense>

namespace ddcm {

/// Orthonormal eigenbasis of an accumulated vote tensor. Columns are ordered
/// by descending eigenvalue: the first N-k columns are normals, the last k
/// columns span the tangent space.
struct TangentFrame {
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;
  int k = 1;
  bool degenerate = false;  // eigenvalues (numerically) all equal

  Eigen::Index size() const { return basis.rows(); }
  auto normals() const { return basis.leftCols(basis.cols() - k); }
  auto tangents() const { return basis.rightCols(k); }

  bool operator==(const TangentFrame& o) const {
    return k == o.k && degenerate == o.degenerate && basis == o.basis &&
           eigenvalues == o.eigenvalues;
  }
};

}  // namespace ddcm
