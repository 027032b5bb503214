#pragma once

#include <memory>
#include <unordered_map>

#include "gst/tape.hpp"

namespace gst {

/// Cached linearisation of a sealed tape at its recorded trajectory: per
/// record, factorizations of the bc-applied Jacobian and of its symbolic
/// adjoint, plus the dependency coupling blocks and their adjoints. The
/// tangent-linear and adjoint sweeps then cost one triangular solve and a
/// few sparse products per record, which is what makes repeated propagator
/// applications affordable.
class TapeLinearizer {
 public:
  explicit TapeLinearizer(const Tape& tape);

  Vector apply_tlm(const Vector& dm) const;
  Vector apply_adjoint(const Vector& w) const;

  /// Tangent states of every recorded variable, keyed by symbol. The
  /// output-only apply_tlm is this sweep with the trajectory discarded.
  std::unordered_map<SymbolId, Vector> tlm_trajectory(const Vector& dm) const;

  int input_dim() const { return in_dim_; }
  int output_dim() const { return out_dim_; }
  const Tape& tape() const { return *tape_; }

 private:
  struct Dep {
    SymbolId symbol;
    std::unique_ptr<SpMat> D;     // dF_k/d(dep), rows on the record space
    std::unique_ptr<SpMat> Dadj;  // symbolic adjoint of the above
  };
  struct Record {
    SymbolId unknown;
    int dim = 0;
    std::vector<int> bc;
    std::unique_ptr<LuSolver> lu;      // H(dF_k/du_k)
    std::unique_ptr<LuSolver> lu_adj;  // H(adjoint_form(dF_k/du_k))
    std::vector<Dep> deps;
  };

  const Tape* tape_;
  std::vector<Record> solves_;  // equation records, forward order
  int in_dim_ = 0;
  int out_dim_ = 0;
};

}  // namespace gst
