#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gst/propagator.hpp"

namespace gst {

struct LanczosParams {
  int nev = 1;
  int ncv = 0;  // 0 selects max(2*nev + 2, 12), clamped to the dimension
  double tol = 1e-8;
  int max_restarts = 200;
  std::uint64_t seed = 20240801;
};

struct RitzPair {
  double mu = 0.0;
  Vector v;
  double residual = 0.0;
};

/// B-self-adjoint operator given by its action and the action of the SPD
/// weight B defining the inner product (identity when absent).
struct SelfAdjointOperator {
  int dim = 0;
  std::function<Vector(const Vector&)> apply;
  std::function<Vector(const Vector&)> weight;
};

/// Thick-restart Lanczos for the leading eigenpairs of a B-self-adjoint
/// operator, with full reorthogonalisation in the B inner product.
/// Convergence: ||G v - mu v||_B <= tol * max(|mu|, 1). Breakdown
/// (invariant subspace) restarts with a fresh random direction at most
/// three times before raising BreakdownError; exceeding max_restarts
/// raises EigensolverError.
std::vector<RitzPair> lanczos_thick_restart(const SelfAdjointOperator& op,
                                            const LanczosParams& params);

std::vector<RitzPair> lanczos_thick_restart(const GstOperator& G, const LanczosParams& params);

}  // namespace gst
