#include "gst/solvers.hpp"

namespace gst {

Vector solve_linear(const SpMat& A, const Vector& b) {
  LuSolver lu(A);
  Vector x = lu.solve(b);
  const double bnorm = b.norm();
  double rnorm = (A * x - b).norm();
  int refinements = 0;
  while (rnorm > 1e-10 * bnorm && refinements < 2) {
    x += lu.solve(b - A * x);
    rnorm = (A * x - b).norm();
    ++refinements;
  }
  if (rnorm > 1e-10 * bnorm)
    throw SingularSystem("solve_linear: residual check failed after refinement");
  return x;
}

NewtonResult newton_solve(const FormExpr& residual, const Coefficient& unknown,
                          CoefficientBindings& state, std::span<const DirichletBC> bcs,
                          const NewtonParams& params) {
  if (arity(residual) != 1)
    throw ArityError("newton_solve: residual must be a linear form in the test function");
  if (!unknown.space) throw Error("newton_solve: unbound unknown");
  const SpacePtr space = unknown.space;

  Vector u = state.get(unknown.id);
  if (u.size() != space->dof_count())
    throw Error("newton_solve: initial guess has wrong length");

  // Full bc values on the iterate entering the first residual.
  for (const auto& bc : bcs)
    for (int d : bc_dofs(*space, bc))
      u[d] = bc.value(space->node_coord(d / space->components()));
  state.set(unknown.id, u);

  const auto bc_all = collect_bc_dofs(*space, bcs);
  const FormExpr jac = gateaux_derivative(residual, unknown, trial(space));

  auto bc_residual_norm = [&]() {
    Vector F = assemble_vector(residual, space, state);
    zero_bc_entries(F, bc_all);
    return std::make_pair(F, F.norm());
  };

  auto [F, fnorm] = bc_residual_norm();
  const double f0 = fnorm;
  if (fnorm <= params.abs_tol) return {u, 0, fnorm};

  for (int it = 1; it <= params.max_iter; ++it) {
    SpMat J = assemble_matrix(jac, space, space, state);
    Vector rhs = -F;
    apply_bc_rows(J, bc_all);
    zero_bc_entries(rhs, bc_all);
    u += solve_linear(J, rhs);
    state.set(unknown.id, u);
    std::tie(F, fnorm) = bc_residual_norm();
    if (fnorm <= params.abs_tol || fnorm <= params.rel_tol * f0) return {u, it, fnorm};
  }
  throw NonConvergence("newton_solve: no convergence within max_iter", params.max_iter, fnorm);
}

}  // namespace gst
