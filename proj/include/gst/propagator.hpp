#pragma once

#include <functional>
#include <optional>

#include "gst/linearizer.hpp"

namespace gst {

/// Matrix-free linear map with an optional exact adjoint (plain transpose
/// in the dof dot product).
struct LinearOperator {
  int in_dim = 0;
  int out_dim = 0;
  std::function<Vector(const Vector&)> apply;
  std::function<Vector(const Vector&)> apply_adjoint;
  SpacePtr in_space;   // optional; set when the operator comes from a tape
  SpacePtr out_space;
};

/// The derivative of the recorded forward map, output dofs with respect to
/// input dofs, realised by cached tangent-linear and adjoint sweeps. It is
/// linear even when the recorded model is not.
LinearOperator propagator_from_tape(const Tape& tape);

/// Same map on an already-built linearisation (shared, so one set of
/// factorizations can serve the propagator and trajectory diagnostics).
LinearOperator propagator_from_linearizer(std::shared_ptr<const TapeLinearizer> lin);

/// Dense realisation by applying the operator to every basis vector.
/// Guarded to small systems; intended for oracles and dumps.
Matrix dense_operator(const LinearOperator& L, int max_dim = 200);

/// Weighted composition G = X_I^{-1} L^* X_F L, self-adjoint in the X_I
/// inner product. Defaults for the weights are the mass matrices of the
/// operator's input and output spaces.
class GstOperator {
 public:
  GstOperator(LinearOperator L, SpMat X_I, SpMat X_F);

  int dim() const { return L_.in_dim; }
  Vector apply(const Vector& x) const;

  const LinearOperator& propagator() const { return L_; }
  const SpMat& x_initial() const { return X_I_; }
  const SpMat& x_final() const { return X_F_; }

  Vector weigh_initial(const Vector& x) const { return X_I_ * x; }
  Vector weigh_final(const Vector& x) const { return X_F_ * x; }
  double inner_initial(const Vector& x, const Vector& y) const { return x.dot(X_I_ * y); }
  double norm_initial(const Vector& x) const;
  double norm_final(const Vector& x) const;

 private:
  LinearOperator L_;
  SpMat X_I_, X_F_;
  std::shared_ptr<SpdSolver> xi_solver_;
};

GstOperator gst_operator(LinearOperator L, std::optional<SpMat> X_I = std::nullopt,
                         std::optional<SpMat> X_F = std::nullopt);

}  // namespace gst
