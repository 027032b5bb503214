#pragma once

#include <functional>
#include <map>
#include <string>

#include "gst/tape.hpp"

namespace gst {

/// A bundled time-dependent model: enough metadata to run the forward map
/// from a control vector and to weigh perturbations of its input and output.
/// `run` executes the discrete model from control dofs `m` and returns the
/// sealed tape of the run. Records are tagged "input", "lift", "step" and
/// "output" so diagnostics can locate the per-step states.
struct ModelSpec {
  std::string name;
  MeshPtr mesh;
  SpacePtr state_space;
  SpacePtr input_space;
  SpacePtr output_space;
  double dt = 0.0;
  int n_steps = 0;
  Vector m0;                  // baseline control (initial condition dofs)
  int growth_component = -1;  // restrict growth norms to one state component
  std::map<std::string, double> params;
  std::function<std::shared_ptr<Tape>(const Vector&)> run;
};

enum class TimeScheme { ImplicitEuler, Trapezoidal };

/// Viscous Burgers on [0,1], homogeneous Dirichlet ends, initial condition
/// sin(2 pi x). State, control and observable share one scalar space.
struct BurgersOptions {
  int n_cells = 64;
  Element element = Element::P2;
  double viscosity = 1e-4;
  double dt = 0.01;
  int n_steps = 10;
  TimeScheme scheme = TimeScheme::ImplicitEuler;
};
ModelSpec burgers_model(const BurgersOptions& opts = {});

/// Linear diffusion on [0,1] with implicit Euler steps and homogeneous
/// Dirichlet ends; its propagator is small and self-adjoint, which makes it
/// a convenient cross-check target.
struct HeatOptions {
  int n_cells = 50;
  Element element = Element::P1;
  double diffusivity = 1.0;
  double dt = 0.01;
  int n_steps = 10;
};
ModelSpec heat_model(const HeatOptions& opts = {});

/// Cubic Schrodinger equation on a periodic interval [-10,10], split into
/// real and imaginary parts (p,q) with implicit midpoint steps. The initial
/// condition is a travelling bright soliton.
struct GrossPitaevskiiOptions {
  int n_cells = 480;
  double dt = 0.03125;
  int n_steps = 32;
  double s = 1.0;  // +1 focusing, -1 defocusing
};
ModelSpec gross_pitaevskii_model(const GrossPitaevskiiOptions& opts = {});

/// Cahn-Hilliard on [0,2] in mixed (c, mu) form with natural boundary
/// conditions. Control and observable are the scalar concentration field;
/// projection records lift the control into the mixed state and extract the
/// final concentration back out.
struct CahnHilliardOptions {
  int n_cells = 100;
  double dt = 5e-6;
  int n_steps = 60;
  double lambda = 1e-2;
  double mobility = 1.0;
  double theta = 0.5;
};
ModelSpec cahn_hilliard_model(const CahnHilliardOptions& opts = {});

}  // namespace gst
