#pragma once

#include "gst/assembly.hpp"

namespace gst {

/// Direct sparse solve with one step of iterative refinement when the
/// residual check ||Ax - b|| <= 1e-10 ||b|| fails on the first pass.
Vector solve_linear(const SpMat& A, const Vector& b);

struct NewtonParams {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_iter = 30;
};

struct NewtonResult {
  Vector u;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Newton's method on the weak residual F(u; deps) = 0 with the Jacobian
/// derived symbolically. The initial iterate gets the full bc values;
/// updates are solved with homogenised rows, so later iterates keep them.
/// `state` must bind every dependency and an initial guess for `unknown`;
/// the converged state is returned and also written back into `state`.
NewtonResult newton_solve(const FormExpr& residual, const Coefficient& unknown,
                          CoefficientBindings& state, std::span<const DirichletBC> bcs,
                          const NewtonParams& params = {});

}  // namespace gst
