#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "gst/errors.hpp"
#include "gst/linearizer.hpp"
#include "gst/models.hpp"
#include "gst/propagator.hpp"
#include "gst/rng.hpp"
#include "gst/solvers.hpp"
#include "gst/tape.hpp"

using namespace gst;

namespace {

Vector nodal(const SpacePtr& s, const std::function<double(double)>& f) {
  std::vector<double> vals;
  interpolate(*s, f, 0, vals);
  return Eigen::Map<Vector>(vals.data(), static_cast<int>(vals.size()));
}

// One linear solve u = (M+K)^{-1} M m recorded on a tape, small enough to
// compare against its dense realisation entry by entry.
struct SingleSolveFixture {
  SpacePtr s;
  std::shared_ptr<Tape> tape;
  Matrix dense;  // oracle: A^{-1} B

  explicit SingleSolveFixture(int n_cells = 12) {
    s = make_space(make_mesh(0.0, 1.0, n_cells), Element::P1);
    auto m = make_coefficient(s, "m");
    auto u = make_coefficient(s, "u");
    Vector m0 = nodal(s, [](double x) { return std::sin(2 * M_PI * x) + 0.3; });

    auto F = trialless(u) + deriv_term(u) - source(m);
    // assembled oracle first
    SpMat M = mass_matrix(*s);
    SpMat K = assemble_matrix(deriv(trial(s)) * deriv(test_function(s)), s, s,
                              CoefficientBindings{});
    SpMat A = M + K;
    Matrix Ad(A);
    dense = Ad.partialPivLu().solve(Matrix(M));

    CoefficientBindings state;
    state.set(m.id, m0);
    state.set(u.id, Vector::Zero(s->dof_count()));
    auto res = newton_solve(F, u, state, {});

    tape = std::make_shared<Tape>();
    tape->record_assignment(m, m0, "input");
    tape->record_solve(u, F, {m.id}, {}, res.u, "step");
    tape->set_input(m.id);
    tape->set_output(u.id);
    tape->seal();
  }

 private:
  FormExpr trialless(const Coefficient& u) { return coefficient(u) * test_function(s); }
  FormExpr deriv_term(const Coefficient& u) {
    return deriv(coefficient(u)) * deriv(test_function(s));
  }
  FormExpr source(const Coefficient& m) { return coefficient(m) * test_function(s); }
};

}  // namespace

TEST_CASE("an n-step model records one assignment plus n solves") {
  BurgersOptions opt;
  opt.n_cells = 16;
  opt.element = Element::P1;
  opt.n_steps = 7;
  auto model = burgers_model(opt);
  auto tape = model.run(model.m0);
  CHECK(static_cast<int>(tape->records().size()) == opt.n_steps + 1);
  CHECK(tape->records()[0].is_assignment());
  CHECK(tape->records()[0].tag == "input");
  for (int k = 1; k <= opt.n_steps; ++k) {
    CHECK(!tape->records()[k].is_assignment());
    CHECK(tape->records()[k].tag == "step");
  }
  CHECK(tape->sealed());
  CHECK(tape->input() == tape->records()[0].unknown.id);
  CHECK(tape->output() == tape->records().back().unknown.id);
}

TEST_CASE("replaying the recorded solves reproduces the states") {
  BurgersOptions opt;
  opt.n_cells = 24;
  opt.element = Element::P1;
  opt.n_steps = 5;
  auto model = burgers_model(opt);
  auto tape = model.run(model.m0);
  CHECK(replay_max_deviation(*tape) <= 1e-8);
}

TEST_CASE("a tape of one assignment is the identity map") {
  auto s = make_space(make_mesh(0.0, 1.0, 10), Element::P1);
  auto m = make_coefficient(s, "m");
  Tape tape;
  tape.record_assignment(m, nodal(s, [](double x) { return x; }), "input");
  tape.set_input(m.id);
  tape.set_output(m.id);
  tape.seal();

  std::mt19937_64 rng(3);
  Vector dm = random_vector(s->dof_count(), rng, -1.0, 1.0);
  CHECK((tlm_sweep(tape, dm) - dm).norm() == 0.0);
  CHECK((adjoint_sweep(tape, dm) - dm).norm() == 0.0);
}

TEST_CASE("sealing freezes the tape") {
  auto s = make_space(make_mesh(0.0, 1.0, 4), Element::P1);
  auto m = make_coefficient(s, "m");
  Tape tape;
  tape.record_assignment(m, Vector::Zero(s->dof_count()));
  tape.set_input(m.id);
  tape.set_output(m.id);

  CHECK_THROWS_AS((void)tlm_sweep(tape, Vector::Zero(s->dof_count())), TapeNotSealed);
  tape.seal();
  auto extra = make_coefficient(s, "extra");
  CHECK_THROWS_AS((void)tape.record_assignment(extra, Vector::Zero(s->dof_count())),
                  TapeSealed);
}

TEST_CASE("record validation") {
  auto s = make_space(make_mesh(0.0, 1.0, 4), Element::P1);
  auto m = make_coefficient(s, "m");
  auto u = make_coefficient(s, "u");
  Tape tape;
  tape.record_assignment(m, Vector::Zero(s->dof_count()));

  SUBCASE("wrong state length") {
    CHECK_THROWS_AS((void)tape.record_assignment(u, Vector::Zero(2)), DimensionMismatch);
  }
  SUBCASE("duplicate symbol") {
    CHECK_THROWS_AS((void)tape.record_assignment(m, Vector::Zero(s->dof_count())), Error);
  }
  SUBCASE("undeclared dependency") {
    auto ghost = make_coefficient(s, "ghost");
    auto F = (coefficient(u) - coefficient(ghost)) * test_function(s);
    CHECK_THROWS_AS((void)tape.record_solve(u, F, {ghost.id}, {}, Vector::Zero(s->dof_count())),
                    UnboundSymbol);
  }
  SUBCASE("residual referencing an unlisted symbol") {
    auto ghost = make_coefficient(s, "ghost");
    auto F = (coefficient(u) - coefficient(ghost)) * test_function(s);
    CHECK_THROWS_AS((void)tape.record_solve(u, F, {m.id}, {}, Vector::Zero(s->dof_count())),
                    UnboundSymbol);
  }
  SUBCASE("nonlinear-in-test residual") {
    auto F = coefficient(u) * test_function(s) * test_function(s);
    CHECK_THROWS_AS((void)tape.record_solve(u, F, {}, {}, Vector::Zero(s->dof_count())),
                    ArityError);
  }
}

TEST_CASE("sweeps do not mutate the recorded states") {
  SingleSolveFixture fx;
  const auto before = fx.tape->state_checksum();
  std::mt19937_64 rng(11);
  Vector dm = random_vector(fx.s->dof_count(), rng, -1.0, 1.0);
  (void)tlm_sweep(*fx.tape, dm);
  (void)adjoint_sweep(*fx.tape, dm);
  TapeLinearizer lin(*fx.tape);
  (void)lin.apply_tlm(dm);
  (void)lin.apply_adjoint(dm);
  CHECK(fx.tape->state_checksum() == before);
}

TEST_CASE("tangent of a single solve equals the dense solve of the coupling") {
  SingleSolveFixture fx;
  std::mt19937_64 rng(5);
  for (int k = 0; k < 3; ++k) {
    Vector dm = random_vector(fx.s->dof_count(), rng, -1.0, 1.0);
    Vector dot = tlm_sweep(*fx.tape, dm);
    Vector ref = fx.dense * dm;
    CHECK((dot - ref).norm() <= 1e-10 * ref.norm());
  }
}

TEST_CASE("adjoint of a single solve equals the dense transpose") {
  SingleSolveFixture fx;
  std::mt19937_64 rng(6);
  Matrix denseT = fx.dense.transpose();
  for (int k = 0; k < 3; ++k) {
    Vector w = random_vector(fx.s->dof_count(), rng, -1.0, 1.0);
    Vector bar = adjoint_sweep(*fx.tape, w);
    Vector ref = denseT * w;
    CHECK((bar - ref).norm() <= 1e-10 * ref.norm());
  }
}

TEST_CASE("tangent and adjoint sweeps satisfy the dot-product identity") {
  BurgersOptions opt;
  opt.n_cells = 20;
  opt.element = Element::P1;
  opt.n_steps = 4;
  auto model = burgers_model(opt);
  auto tape = model.run(model.m0);
  std::mt19937_64 rng(42);
  for (int k = 0; k < 5; ++k) {
    Vector x = random_vector(tape->input_space()->dof_count(), rng, -1.0, 1.0);
    Vector y = random_vector(tape->output_space()->dof_count(), rng, -1.0, 1.0);
    const double a = tlm_sweep(*tape, x).dot(y);
    const double b = x.dot(adjoint_sweep(*tape, y));
    CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), 1.0));
  }
}

TEST_CASE("functional gradients agree across modes and match the dense chain") {
  SingleSolveFixture fx;
  auto Jb = [](const Coefficient& out) {
    return coefficient(out) * coefficient(out);
  };
  auto out = fx.tape->record_of(fx.tape->output()).unknown;
  FormExpr J = Jb(out);

  Vector g_tlm = functional_gradient(*fx.tape, J, GradientMode::Tlm);
  Vector g_adj = functional_gradient(*fx.tape, J, GradientMode::Adjoint);
  CHECK((g_tlm - g_adj).norm() <= 1e-8 * std::max(g_adj.norm(), 1e-30));

  // dense oracle: dJ/dm = (A^{-1}B)^T (2 M u)
  const Vector& u = fx.tape->record_of(fx.tape->output()).state;
  SpMat M = mass_matrix(*fx.s);
  Vector w = 2.0 * (M * u);
  Vector ref = fx.dense.transpose() * w;
  CHECK((g_adj - ref).norm() <= 1e-9 * ref.norm());

  // directional consistency with a finite difference of J through a rerun
  CHECK(functional_value(*fx.tape, J) == doctest::Approx(u.dot(M * u)).epsilon(1e-12));
}

TEST_CASE("gradients of every bundled model agree across modes") {
  std::vector<ModelSpec> models;
  {
    BurgersOptions o;
    o.n_cells = 12;
    o.element = Element::P1;
    o.n_steps = 3;
    models.push_back(burgers_model(o));
  }
  {
    HeatOptions o;
    o.n_cells = 12;
    o.n_steps = 3;
    models.push_back(heat_model(o));
  }
  {
    GrossPitaevskiiOptions o;
    o.n_cells = 24;
    o.n_steps = 3;
    models.push_back(gross_pitaevskii_model(o));
  }
  {
    CahnHilliardOptions o;
    o.n_cells = 12;
    o.n_steps = 3;
    models.push_back(cahn_hilliard_model(o));
  }
  for (const auto& model : models) {
    CAPTURE(model.name);
    auto tape = model.run(model.m0);
    auto out = tape->record_of(tape->output()).unknown;
    FormExpr J = coefficient(out) * coefficient(out);
    Vector g_tlm = functional_gradient(*tape, J, GradientMode::Tlm);
    Vector g_adj = functional_gradient(*tape, J, GradientMode::Adjoint);
    CHECK((g_tlm - g_adj).norm() <= 1e-8 * std::max(g_adj.norm(), 1e-30));
  }
}

TEST_CASE("functionals must reference the output variable only") {
  SingleSolveFixture fx;
  auto other = make_coefficient(fx.s, "other");
  CHECK_THROWS_AS(
      (void)functional_gradient(*fx.tape, coefficient(other) * coefficient(other),
                                GradientMode::Adjoint),
      UnsupportedFunctional);
  auto out = fx.tape->record_of(fx.tape->output()).unknown;
  CHECK_THROWS_AS(
      (void)functional_gradient(*fx.tape, coefficient(out) * test_function(fx.s),
                                GradientMode::Adjoint),
      UnsupportedFunctional);
}

TEST_CASE("scalar decay ODE has the exact discrete propagator") {
  // du/dt = a u, implicit Euler: u_n = (1 - a dt)^{-n} u_0, reproduced by
  // the tape's tangent because the model is linear.
  auto s = make_space(make_mesh(0.0, 1.0, 1), Element::P1);
  const double a = -2.0, dt = 0.1;
  const int n_steps = 6;

  Tape tape;
  auto m = make_coefficient(s, "m");
  Vector state = Vector::Constant(s->dof_count(), 1.0);
  tape.record_assignment(m, state, "input");
  Coefficient prev = m;
  for (int k = 0; k < n_steps; ++k) {
    auto u = make_coefficient(s, "u" + std::to_string(k));
    auto F = (coefficient(u) - coefficient(prev)) / dt * test_function(s) -
             a * coefficient(u) * test_function(s);
    CoefficientBindings bind;
    bind.set(prev.id, state);
    bind.set(u.id, state);
    auto res = newton_solve(F, u, bind, {});
    tape.record_solve(u, F, {prev.id}, {}, res.u, "step");
    state = res.u;
    prev = u;
  }
  tape.set_input(m.id);
  tape.set_output(prev.id);
  tape.seal();

  const double factor = std::pow(1.0 - a * dt, -n_steps);
  CHECK(state[0] == doctest::Approx(factor).epsilon(1e-12));
  Vector dm = Vector::Constant(s->dof_count(), 1.0);
  Vector dot = tlm_sweep(tape, dm);
  CHECK(dot[0] == doctest::Approx(factor).epsilon(1e-12));
  CHECK(dot[1] == doctest::Approx(factor).epsilon(1e-12));
}

TEST_CASE("tangent respects homogenised boundary conditions") {
  BurgersOptions opt;
  opt.n_cells = 16;
  opt.n_steps = 3;
  auto model = burgers_model(opt);
  auto tape = model.run(model.m0);
  std::mt19937_64 rng(9);
  Vector dm = random_vector(tape->input_space()->dof_count(), rng, -1.0, 1.0);
  Vector dot = tlm_sweep(*tape, dm);
  CHECK(dot[0] == 0.0);
  CHECK(dot[dot.size() - 1] == 0.0);
}
