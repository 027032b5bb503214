#pragma once

#include <cstdint>
#include <optional>
#include <ostream>

#include "gst/solvers.hpp"

namespace gst {

/// One recorded operation of the forward model: either a direct dof
/// assignment (initial data) or an equation solve F(u; deps) = 0 with the
/// snapshot of the converged state.
struct TapeRecord {
  int index = -1;
  Coefficient unknown;
  std::optional<FormExpr> residual;  // nullopt for assignments
  std::vector<SymbolId> dependencies;
  std::vector<DirichletBC> bcs;
  Vector state;
  std::string tag;

  bool is_assignment() const { return !residual.has_value(); }
};

/// Append-only record of a forward run. Once sealed the tape is immutable;
/// tangent-linear and adjoint sweeps replay its linearisation.
class Tape {
 public:
  int record_assignment(const Coefficient& var, const Vector& values, std::string tag = {});
  int record_solve(const Coefficient& unknown, FormExpr residual,
                   std::vector<SymbolId> dependencies, std::vector<DirichletBC> bcs,
                   const Vector& solved_state, std::string tag = {});

  void set_input(SymbolId id);
  void set_output(SymbolId id);
  void seal();

  bool sealed() const { return sealed_; }
  const std::vector<TapeRecord>& records() const { return records_; }
  SymbolId input() const { return input_; }
  SymbolId output() const { return output_; }
  bool has_record(SymbolId id) const { return index_.count(id) != 0; }
  const TapeRecord& record_of(SymbolId id) const;
  const SpacePtr& input_space() const { return record_of(input_).unknown.space; }
  const SpacePtr& output_space() const { return record_of(output_).unknown.space; }

  /// All stored states bound by symbol, for evaluating forms at the
  /// recorded trajectory.
  CoefficientBindings state_bindings() const;

  /// FNV-1a over the stored states; sweeps must not change it.
  std::uint64_t state_checksum() const;

  void dump(std::ostream& os) const;

 private:
  void check_open() const;
  std::vector<TapeRecord> records_;
  std::unordered_map<SymbolId, int> index_;
  SymbolId input_ = -1;
  SymbolId output_ = -1;
  bool sealed_ = false;
};

/// Propagate an input perturbation through the linearised records in
/// forward order; returns the perturbation of the output variable.
Vector tlm_sweep(const Tape& tape, const Vector& dm);

/// Reverse sweep of the transposed linearisation seeded with `w` at the
/// output record; returns the adjoint at the input. Together the sweeps
/// satisfy dot(tlm(x), y) == dot(x, adjoint(y)) to roundoff.
Vector adjoint_sweep(const Tape& tape, const Vector& w);

enum class GradientMode { Tlm, Adjoint };

/// Derivative of a functional with respect to the output dofs (the reverse
/// seed vector). J must reference only the tape's output symbol.
Vector functional_output_gradient(const Tape& tape, const FormExpr& J);

/// Gradient of a functional of the output variable with respect to the
/// input dofs. J must reference only the tape's output symbol.
Vector functional_gradient(const Tape& tape, const FormExpr& J, GradientMode mode);

/// J evaluated at the stored trajectory.
double functional_value(const Tape& tape, const FormExpr& J);

/// Re-solve every record in order from replayed inputs; returns the
/// largest max-norm deviation from the stored states.
double replay_max_deviation(const Tape& tape);

}  // namespace gst
