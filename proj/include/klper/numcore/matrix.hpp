#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

#include "klper/error.hpp"

namespace klper {

// Dense row-major f64 matrix. Batches are stored one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

inline std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <class A, class B>
void require_same_shape(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b,
                        const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": " + shape_str(a.rows(), a.cols()) + " vs " +
                     shape_str(b.rows(), b.cols()));
  }
}

/// [left | right], row counts must agree. Critics take states and actions this way.
inline Matrix hcat(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows()) {
    throw ShapeError("hcat: row counts " + std::to_string(left.rows()) + " and " +
                     std::to_string(right.rows()) + " differ");
  }
  Matrix out(left.rows(), left.cols() + right.cols());
  out.leftCols(left.cols()) = left;
  out.rightCols(right.cols()) = right;
  return out;
}

} // namespace klper
