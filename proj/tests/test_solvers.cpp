#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "gst/errors.hpp"
#include "gst/rng.hpp"
#include "gst/solvers.hpp"

using namespace gst;

namespace {

Vector nodal(const SpacePtr& s, const std::function<double(double)>& f) {
  std::vector<double> vals;
  interpolate(*s, f, 0, vals);
  return Eigen::Map<Vector>(vals.data(), static_cast<int>(vals.size()));
}

}  // namespace

TEST_CASE("solve_linear meets the residual contract") {
  SUBCASE("identity") {
    SpMat I(4, 4);
    I.setIdentity();
    Vector b(4);
    b << 1, -2, 3, 0.5;
    CHECK((solve_linear(I, b) - b).norm() == 0.0);
  }
  SUBCASE("random tridiagonal SPD") {
    std::mt19937_64 rng(7);
    const int n = 60;
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) {
      trip.emplace_back(i, i, 3.0 + uniform01(rng));
      if (i + 1 < n) {
        const double off = -1.0 + 0.1 * uniform01(rng);
        trip.emplace_back(i, i + 1, off);
        trip.emplace_back(i + 1, i, off);
      }
    }
    SpMat A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Vector b = random_vector(n, rng, -1.0, 1.0);
    Vector x = solve_linear(A, b);
    CHECK((A * x - b).norm() <= 1e-10 * b.norm());
  }
  SUBCASE("singular matrix is reported") {
    SpMat A(3, 3);  // rank deficient: empty row
    A.insert(0, 0) = 1.0;
    A.insert(1, 1) = 1.0;
    A.makeCompressed();
    Vector b(3);
    b << 1, 1, 1;
    CHECK_THROWS_AS((void)solve_linear(A, b), SingularSystem);
  }
}

TEST_CASE("newton converges in one iteration on a linear problem") {
  auto s = make_space(make_mesh(0.0, 1.0, 20), Element::P1);
  auto u = make_coefficient(s, "u");
  auto up = make_coefficient(s, "up");
  const double dt = 0.01;
  auto F = (coefficient(u) - coefficient(up)) / dt * test_function(s) +
           deriv(coefficient(u)) * deriv(test_function(s));
  CoefficientBindings state;
  state.set(up.id, nodal(s, [](double x) { return std::sin(M_PI * x); }));
  state.set(u.id, state.get(up.id));
  DirichletBC bc{Boundary::Both, 0, [](double) { return 0.0; }};
  std::vector<DirichletBC> bcs = {bc};
  auto res = newton_solve(F, u, state, bcs);
  CHECK(res.iterations == 1);
  CHECK(res.residual_norm <= 1e-10);
}

TEST_CASE("newton solves a pointwise cubic exactly") {
  // <u^3 - 8, phi> = 0 has the interpolant of u = 2 as a discrete root.
  auto s = make_space(make_mesh(0.0, 1.0, 1), Element::P1);
  auto u = make_coefficient(s, "u");
  auto F = (pow(coefficient(u), 3) - constant(8.0)) * test_function(s);
  CoefficientBindings state;
  state.set(u.id, Vector::Constant(s->dof_count(), 1.0));
  auto res = newton_solve(F, u, state, {});
  CHECK((res.u - Vector::Constant(s->dof_count(), 2.0)).norm() <= 1e-10);
  CHECK(res.iterations <= 30);
}

TEST_CASE("newton iterates converge quadratically") {
  // manual Newton loop on the cubic to expose the per-iterate errors
  auto s = make_space(make_mesh(0.0, 1.0, 1), Element::P1);
  auto u = make_coefficient(s, "u");
  auto F = (pow(coefficient(u), 3) - constant(8.0)) * test_function(s);
  auto J = gateaux_derivative(F, u, trial(s));

  CoefficientBindings bind;
  Vector x = Vector::Constant(s->dof_count(), 3.0);
  std::vector<double> errs;
  for (int it = 0; it < 6; ++it) {
    errs.push_back((x - Vector::Constant(s->dof_count(), 2.0)).norm());
    bind.set(u.id, x);
    Vector r = assemble_vector(F, s, bind);
    SpMat A = assemble_matrix(J, s, s, bind);
    x -= solve_linear(A, r);
  }
  // e_{k+1} <= C e_k^2 with a stable constant while above roundoff
  for (size_t k = 0; k + 1 < errs.size() && errs[k + 1] > 1e-14; ++k) {
    CHECK(errs[k + 1] < errs[k]);
    CHECK(errs[k + 1] <= 1.0 * errs[k] * errs[k]);  // C ~ f''/2f' = 1/2 at the root
  }
}

TEST_CASE("newton handles one implicit Burgers step from the previous state") {
  auto s = make_space(make_mesh(0.0, 1.0, 32), Element::P2);
  auto u = make_coefficient(s, "u");
  auto up = make_coefficient(s, "up");
  const double dt = 0.01, nu = 1e-4;
  auto F = (coefficient(u) - coefficient(up)) / dt * test_function(s) +
           coefficient(u) * deriv(coefficient(u)) * test_function(s) +
           nu * deriv(coefficient(u)) * deriv(test_function(s));
  CoefficientBindings state;
  state.set(up.id, nodal(s, [](double x) { return std::sin(2 * M_PI * x); }));
  state.set(u.id, state.get(up.id));
  DirichletBC bc{Boundary::Both, 0, [](double) { return 0.0; }};
  std::vector<DirichletBC> bcs = {bc};
  auto res = newton_solve(F, u, state, bcs);
  CHECK(res.iterations <= 5);
  CHECK(res.u[0] == 0.0);
  CHECK(res.u[s->dof_count() - 1] == 0.0);
  // state is written back
  CHECK((state.get(u.id) - res.u).norm() == 0.0);
}

TEST_CASE("newton reports non-convergence on a rootless residual") {
  auto s = make_space(make_mesh(0.0, 1.0, 2), Element::P1);
  auto u = make_coefficient(s, "u");
  auto F = (pow(coefficient(u), 2) + constant(1.0)) * test_function(s);
  CoefficientBindings state;
  state.set(u.id, Vector::Constant(s->dof_count(), 0.7));
  CHECK_THROWS_AS((void)newton_solve(F, u, state, {}), NonConvergence);
  try {
    state.set(u.id, Vector::Constant(s->dof_count(), 0.7));
    (void)newton_solve(F, u, state, {});
  } catch (const NonConvergence& e) {
    CHECK(e.iterations == 30);
    CHECK(e.residual > 0.0);
  }
}

TEST_CASE("manufactured Poisson solution converges at second order") {
  // -u'' = pi^2 sin(pi x), u(0)=u(1)=0, exact u = sin(pi x)
  auto solve_at = [](int n) {
    auto s = make_space(make_mesh(0.0, 1.0, n), Element::P1);
    auto f = make_coefficient(s, "f");
    CoefficientBindings bind;
    bind.set(f.id, nodal(s, [](double x) { return M_PI * M_PI * std::sin(M_PI * x); }));
    SpMat A = assemble_matrix(deriv(trial(s)) * deriv(test_function(s)), s, s, bind);
    Vector b = assemble_vector(coefficient(f) * test_function(s), s, bind);
    DirichletBC bc{Boundary::Both, 0, [](double) { return 0.0; }};
    std::vector<DirichletBC> bcs = {bc};
    apply_bc(A, b, *s, bcs, BcMode::Full);
    Vector u = solve_linear(A, b);
    Vector err = u - nodal(s, [](double x) { return std::sin(M_PI * x); });
    SpMat M = mass_matrix(*s);
    return std::sqrt(err.dot(M * err));
  };
  const double e16 = solve_at(16);
  const double e32 = solve_at(32);
  const double rate = std::log2(e16 / e32);
  CHECK(rate == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("newton rejects a residual that is not a linear form") {
  auto s = make_space(make_mesh(0.0, 1.0, 2), Element::P1);
  auto u = make_coefficient(s, "u");
  CoefficientBindings state;
  state.set(u.id, Vector::Zero(s->dof_count()));
  CHECK_THROWS_AS(
      (void)newton_solve(trial(s) * test_function(s), u, state, {}),
      ArityError);
}
