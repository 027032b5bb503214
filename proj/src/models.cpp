#include "gst/models.hpp"

#include <cmath>

namespace gst {

namespace {

Vector interpolate_all(const FunctionSpace& space,
                       const std::vector<std::function<double(double)>>& per_component) {
  std::vector<double> dofs;
  for (int c = 0; c < space.components(); ++c) interpolate(space, per_component[c], c, dofs);
  return Eigen::Map<const Vector>(dofs.data(), static_cast<int>(dofs.size()));
}

/// March `n_steps` solves of step_residual(u_next, u_prev) with the previous
/// state as initial guess; records each solve on the tape tagged "step".
Coefficient march(Tape& tape, CoefficientBindings& state, Coefficient u_prev,
                  const SpacePtr& space, int n_steps,
                  const std::function<FormExpr(const Coefficient&, const Coefficient&)>& step_residual,
                  const std::vector<DirichletBC>& bcs) {
  for (int k = 0; k < n_steps; ++k) {
    Coefficient u_next = make_coefficient(space, "u" + std::to_string(k + 1));
    FormExpr residual = step_residual(u_next, u_prev);
    state.set(u_next.id, state.get(u_prev.id));
    NewtonResult sol = newton_solve(residual, u_next, state, bcs);
    tape.record_solve(u_next, residual, {u_prev.id}, bcs, sol.u, "step");
    u_prev = u_next;
  }
  return u_prev;
}

}  // namespace

ModelSpec burgers_model(const BurgersOptions& opts) {
  ModelSpec spec;
  spec.name = "burgers";
  spec.mesh = make_mesh(0.0, 1.0, opts.n_cells);
  spec.state_space = make_space(spec.mesh, opts.element);
  spec.input_space = spec.state_space;
  spec.output_space = spec.state_space;
  spec.dt = opts.dt;
  spec.n_steps = opts.n_steps;
  spec.params = {{"viscosity", opts.viscosity},
                 {"scheme", opts.scheme == TimeScheme::ImplicitEuler ? 0.0 : 1.0}};
  spec.m0 = interpolate_all(*spec.state_space,
                            {[](double x) { return std::sin(2.0 * M_PI * x); }});

  const SpacePtr space = spec.state_space;
  const double dt = opts.dt;
  const double nu = opts.viscosity;
  const TimeScheme scheme = opts.scheme;
  const int n_steps = opts.n_steps;

  spec.run = [=](const Vector& m) {
    auto tape = std::make_shared<Tape>();
    Coefficient u0 = make_coefficient(space, "u0");
    tape->record_assignment(u0, m, "input");
    tape->set_input(u0.id);

    CoefficientBindings state;
    state.set(u0.id, m);
    std::vector<DirichletBC> bcs{{Boundary::Both, 0, [](double) { return 0.0; }}};

    auto step_residual = [=](const Coefficient& next, const Coefficient& prev) {
      FormExpr u1 = coefficient(next), u0c = coefficient(prev);
      FormExpr phi = test_function(space);
      auto advect_diffuse = [&](const FormExpr& u) {
        return u * deriv(u) * phi + nu * deriv(u) * deriv(phi);
      };
      FormExpr rate = (u1 - u0c) / dt * phi;
      if (scheme == TimeScheme::ImplicitEuler) return rate + advect_diffuse(u1);
      return rate + 0.5 * (advect_diffuse(u1) + advect_diffuse(u0c));
    };

    Coefficient last = march(*tape, state, u0, space, n_steps, step_residual, bcs);
    tape->set_output(last.id);
    tape->seal();
    return tape;
  };
  return spec;
}

ModelSpec heat_model(const HeatOptions& opts) {
  ModelSpec spec;
  spec.name = "heat";
  spec.mesh = make_mesh(0.0, 1.0, opts.n_cells);
  spec.state_space = make_space(spec.mesh, opts.element);
  spec.input_space = spec.state_space;
  spec.output_space = spec.state_space;
  spec.dt = opts.dt;
  spec.n_steps = opts.n_steps;
  spec.params = {{"diffusivity", opts.diffusivity}};
  spec.m0 =
      interpolate_all(*spec.state_space, {[](double x) { return std::sin(M_PI * x); }});

  const SpacePtr space = spec.state_space;
  const double dt = opts.dt;
  const double kappa = opts.diffusivity;
  const int n_steps = opts.n_steps;

  spec.run = [=](const Vector& m) {
    auto tape = std::make_shared<Tape>();
    Coefficient u0 = make_coefficient(space, "u0");
    tape->record_assignment(u0, m, "input");
    tape->set_input(u0.id);

    CoefficientBindings state;
    state.set(u0.id, m);
    std::vector<DirichletBC> bcs{{Boundary::Both, 0, [](double) { return 0.0; }}};

    auto step_residual = [=](const Coefficient& next, const Coefficient& prev) {
      FormExpr u1 = coefficient(next), u0c = coefficient(prev);
      FormExpr phi = test_function(space);
      return (u1 - u0c) / dt * phi + kappa * deriv(u1) * deriv(phi);
    };

    Coefficient last = march(*tape, state, u0, space, n_steps, step_residual, bcs);
    tape->set_output(last.id);
    tape->seal();
    return tape;
  };
  return spec;
}

ModelSpec gross_pitaevskii_model(const GrossPitaevskiiOptions& opts) {
  ModelSpec spec;
  spec.name = "gross_pitaevskii";
  spec.mesh = make_mesh(-10.0, 10.0, opts.n_cells, /*periodic=*/true);
  spec.state_space = make_space(spec.mesh, Element::P1, 2);
  spec.input_space = spec.state_space;
  spec.output_space = spec.state_space;
  spec.dt = opts.dt;
  spec.n_steps = opts.n_steps;
  spec.params = {{"s", opts.s}};
  // Bright soliton psi = sqrt(2) sech(x) exp(i x / 2) split into (p, q).
  spec.m0 = interpolate_all(
      *spec.state_space,
      {[](double x) { return std::sqrt(2.0) * std::cos(0.5 * x) / std::cosh(x); },
       [](double x) { return std::sqrt(2.0) * std::sin(0.5 * x) / std::cosh(x); }});

  const SpacePtr space = spec.state_space;
  const double dt = opts.dt;
  const double s = opts.s;
  const int n_steps = opts.n_steps;

  spec.run = [=](const Vector& m) {
    auto tape = std::make_shared<Tape>();
    Coefficient u0 = make_coefficient(space, "psi0");
    tape->record_assignment(u0, m, "input");
    tape->set_input(u0.id);

    CoefficientBindings state;
    state.set(u0.id, m);
    std::vector<DirichletBC> bcs;  // periodic mesh, no strong conditions

    auto step_residual = [=](const Coefficient& next, const Coefficient& prev) {
      FormExpr p1 = coefficient(next, 0), q1 = coefficient(next, 1);
      FormExpr p0 = coefficient(prev, 0), q0 = coefficient(prev, 1);
      FormExpr pm = 0.5 * (p0 + p1), qm = 0.5 * (q0 + q1);
      FormExpr fp = test_function(space, 0), fq = test_function(space, 1);
      FormExpr density = pm * pm + qm * qm;
      FormExpr rp =
          -((q1 - q0) / dt) * fp - deriv(pm) * deriv(fp) + s * density * pm * fp;
      FormExpr rq =
          ((p1 - p0) / dt) * fq - deriv(qm) * deriv(fq) + s * density * qm * fq;
      return rp + rq;
    };

    Coefficient last = march(*tape, state, u0, space, n_steps, step_residual, bcs);
    tape->set_output(last.id);
    tape->seal();
    return tape;
  };
  return spec;
}

ModelSpec cahn_hilliard_model(const CahnHilliardOptions& opts) {
  ModelSpec spec;
  spec.name = "cahn_hilliard";
  spec.mesh = make_mesh(0.0, 2.0, opts.n_cells);
  spec.state_space = make_space(spec.mesh, Element::P1, 2);  // (c, mu)
  SpacePtr scalar = make_space(spec.mesh, Element::P1, 1);
  spec.input_space = scalar;
  spec.output_space = scalar;
  spec.dt = opts.dt;
  spec.n_steps = opts.n_steps;
  spec.growth_component = 0;  // concentration
  spec.params = {{"lambda", opts.lambda},
                 {"mobility", opts.mobility},
                 {"theta", opts.theta}};
  spec.m0 = interpolate_all(*scalar,
                            {[](double x) { return std::exp(-30.0 * (x - 1.0) * (x - 1.0)); }});

  const SpacePtr space = spec.state_space;
  const double dt = opts.dt;
  const double lam = opts.lambda;
  const double mob = opts.mobility;
  const double theta = opts.theta;
  const int n_steps = opts.n_steps;

  spec.run = [=](const Vector& m) {
    auto tape = std::make_shared<Tape>();
    Coefficient mc = make_coefficient(scalar, "m");
    tape->record_assignment(mc, m, "input");
    tape->set_input(mc.id);

    CoefficientBindings state;
    state.set(mc.id, m);
    std::vector<DirichletBC> bcs;  // natural boundary conditions

    // Lift the scalar control into the mixed state by L2 projection; the
    // chemical potential starts at zero.
    Coefficient u0 = make_coefficient(space, "w0");
    {
      FormExpr c0 = coefficient(u0, 0), mu0 = coefficient(u0, 1);
      FormExpr pc = test_function(space, 0), pm = test_function(space, 1);
      FormExpr lift = (c0 - coefficient(mc)) * pc + mu0 * pm;
      state.set(u0.id, Vector::Zero(space->dof_count()));
      NewtonResult sol = newton_solve(lift, u0, state, bcs);
      tape->record_solve(u0, lift, {mc.id}, bcs, sol.u, "lift");
    }

    auto step_residual = [=](const Coefficient& next, const Coefficient& prev) {
      FormExpr c1 = coefficient(next, 0), mu1 = coefficient(next, 1);
      FormExpr c0 = coefficient(prev, 0), mu0 = coefficient(prev, 1);
      FormExpr mu_mid = theta * mu1 + (1.0 - theta) * mu0;
      FormExpr fc = test_function(space, 0), fm = test_function(space, 1);
      // Quartic double well f = 100 c^2 (1-c)^2, so f' = 200 c (1-c)(1-2c).
      FormExpr fprime = 200.0 * c1 * (1.0 - c1) * (1.0 - 2.0 * c1);
      return (c1 - c0) / dt * fc + mob * deriv(mu_mid) * deriv(fc) + mu1 * fm -
             fprime * fm - lam * deriv(c1) * deriv(fm);
    };

    Coefficient last = march(*tape, state, u0, space, n_steps, step_residual, bcs);

    // Extract the final concentration back onto the scalar space.
    Coefficient y = make_coefficient(scalar, "c_final");
    {
      FormExpr out = (coefficient(y) - coefficient(last, 0)) * test_function(scalar);
      state.set(y.id, Vector::Zero(scalar->dof_count()));
      NewtonResult sol = newton_solve(out, y, state, bcs);
      tape->record_solve(y, out, {last.id}, bcs, sol.u, "output");
    }
    tape->set_output(y.id);
    tape->seal();
    return tape;
  };
  return spec;
}

}  // namespace gst
