#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>

#include "gst/errors.hpp"

namespace gst {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Cached sparse LU factorization (general square systems).
class LuSolver {
 public:
  explicit LuSolver(const SpMat& A);
  Vector solve(const Vector& b) const;
  int rows() const { return rows_; }

 private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  int rows_;
};

/// Cached sparse Cholesky factorization; construction fails with
/// InvalidInnerProduct unless the matrix is symmetric positive definite.
class SpdSolver {
 public:
  explicit SpdSolver(const SpMat& A);
  Vector solve(const Vector& b) const;
  int rows() const { return rows_; }

 private:
  Eigen::SimplicialLLT<SpMat> llt_;
  int rows_;
};

SpMat identity_matrix(int n);

}  // namespace gst
