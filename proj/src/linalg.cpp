#include "gst/linalg.hpp"

namespace gst {

LuSolver::LuSolver(const SpMat& A) : rows_(static_cast<int>(A.rows())) {
  if (A.rows() != A.cols()) throw SingularSystem("LuSolver: matrix is not square");
  SpMat Ac = A;
  Ac.makeCompressed();
  lu_.compute(Ac);
  if (lu_.info() != Eigen::Success)
    throw SingularSystem("LuSolver: factorization failed (singular or structurally deficient)");
}

Vector LuSolver::solve(const Vector& b) const {
  if (b.size() != rows_) throw Error("LuSolver: right-hand side has wrong length");
  Vector x = lu_.solve(b);
  if (lu_.info() != Eigen::Success) throw SingularSystem("LuSolver: solve failed");
  return x;
}

SpdSolver::SpdSolver(const SpMat& A) : rows_(static_cast<int>(A.rows())) {
  if (A.rows() != A.cols()) throw InvalidInnerProduct("SpdSolver: matrix is not square");
  SpMat Ac = A;
  Ac.makeCompressed();
  llt_.compute(Ac);
  if (llt_.info() != Eigen::Success)
    throw InvalidInnerProduct("SpdSolver: matrix is not symmetric positive definite");
}

Vector SpdSolver::solve(const Vector& b) const {
  if (b.size() != rows_) throw Error("SpdSolver: right-hand side has wrong length");
  Vector x = llt_.solve(b);
  if (llt_.info() != Eigen::Success) throw InvalidInnerProduct("SpdSolver: solve failed");
  return x;
}

SpMat identity_matrix(int n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

}  // namespace gst
