#pragma once

#include <cstdint>

#include "gst/compute_gst.hpp"
#include "gst/linearizer.hpp"
#include "gst/models.hpp"

namespace gst {

/// Builds a functional of the model output; called with the output variable
/// of each freshly recorded tape (symbols differ between runs).
using FunctionalBuilder = std::function<FormExpr(const Coefficient& output)>;

/// Integral of the squared output over all components.
FunctionalBuilder l2_squared_functional();

/// Convergence-order probe of a functional gradient. At each step size the
/// first remainder |J(m + h dm) - J(m)| must shrink at order 1 and the
/// gradient-corrected remainder at order 2. Remainders below the floating
/// point floor are flagged and excluded from the order fit.
struct TaylorSample {
  double h = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  bool floored1 = false;
  bool floored2 = false;
};

struct TaylorReport {
  std::vector<TaylorSample> samples;
  double order1 = 0.0;  // log-log least squares slope over usable samples
  double order2 = 0.0;
  bool pass1 = false;
  bool pass2 = false;
  double value0 = 0.0;      // functional at the baseline control
  double directional = 0.0; // <gradient, dm>
};

inline constexpr double kTaylorOrder1Lo = 0.95;
inline constexpr double kTaylorOrder1Hi = 1.05;
inline constexpr double kTaylorOrder2Lo = 1.95;
inline constexpr double kTaylorOrder2Hi = 2.05;

TaylorReport taylor_test(const ModelSpec& model, const FunctionalBuilder& functional,
                         GradientMode mode, std::uint64_t seed = 20240801,
                         double h0 = 1e-3, int levels = 5);

/// Dense cross-check of the matrix-free propagator: materialise L column by
/// column, take its dense SVD, and verify both the reconstruction U S V^T
/// against fresh applications of L on random probes and the predicted image
/// sigma_i u_i of each right singular vector against L v_i. Throws
/// OracleMismatch if either exceeds eps.
struct OracleStats {
  int probes = 0;
  double max_apply_error = 0.0;   // ||U S V^T t - L t|| over probes
  double max_vector_error = 0.0;  // ||L v_i - sigma_i u_i||, sigma_i > 1e-10
  std::vector<double> sigmas;     // dense singular values, descending
};

OracleStats dense_oracle_check(const LinearOperator& L, int n_probes = 100,
                               double eps = 1e-7, std::uint64_t seed = 20240801);

/// Finite-amplitude validation of a predicted gain: perturb the baseline
/// control along v with a relative amplitude, rerun the nonlinear model and
/// compare the realised output growth against sigma.
struct GrowthCheck {
  double amplitude = 0.0;
  double observed = 0.0;
  double expected = 0.0;
  double rel_error = 0.0;
};

GrowthCheck nonlinear_growth_check(const ModelSpec& model, const Vector& v, double sigma,
                                   double rel_amplitude = 1e-7);

/// Per-step linear gain of an input perturbation along the recorded
/// trajectory, normalised by the input norm. Entry 0 is the lifted state
/// (or the input itself); entry k is after step k. Norms use the state
/// space mass, restricted to model.growth_component when set.
struct GrowthCurve {
  std::vector<double> time;
  std::vector<double> gain;
  int argmax() const;
};

GrowthCurve growth_curve(const ModelSpec& model, const Vector& v);
GrowthCurve growth_curve(const ModelSpec& model, const TapeLinearizer& lin, const Vector& v);

/// Finite-amplitude counterpart of growth_curve: rerun the nonlinear model
/// with the control perturbed along v and track the per-step state
/// difference against the baseline run, normalised by the perturbation
/// amplitude. Matches growth_curve in the small-amplitude limit.
GrowthCurve nonlinear_growth_curve(const ModelSpec& model, const Vector& v,
                                   double rel_amplitude = 1e-7);

/// max over random pairs of |<Lx, y> - <x, L* y>| / (||x|| ||y||).
double adjoint_identity_max_error(const LinearOperator& L, int n_pairs = 100,
                                  std::uint64_t seed = 20240801);

}  // namespace gst
