#include "gst/linearizer.hpp"

#include <unordered_map>

namespace gst {

TapeLinearizer::TapeLinearizer(const Tape& tape) : tape_(&tape) {
  if (!tape.sealed()) throw TapeNotSealed("TapeLinearizer: tape must be sealed");
  CoefficientBindings states = tape.state_bindings();

  in_dim_ = tape.input_space()->dof_count();
  out_dim_ = tape.output_space()->dof_count();

  for (const auto& r : tape.records()) {
    if (r.is_assignment()) continue;
    Record rec;
    rec.unknown = r.unknown.id;
    rec.dim = r.unknown.space->dof_count();
    rec.bc = collect_bc_dofs(*r.unknown.space, r.bcs);

    const SpacePtr& space = r.unknown.space;
    FormExpr jac = gateaux_derivative(*r.residual, r.unknown, trial(space));
    SpMat A = assemble_matrix(jac, space, space, states);
    apply_bc_rows(A, rec.bc);
    rec.lu = std::make_unique<LuSolver>(A);

    SpMat At = assemble_matrix(adjoint_form(jac), space, space, states);
    apply_bc_rows(At, rec.bc);
    rec.lu_adj = std::make_unique<LuSolver>(At);

    for (SymbolId dep : r.dependencies) {
      const TapeRecord& drec = tape.record_of(dep);
      FormExpr dform = gateaux_derivative(*r.residual, drec.unknown, trial(drec.unknown.space));
      if (dform.is_zero()) continue;
      Dep d;
      d.symbol = dep;
      d.D = std::make_unique<SpMat>(
          assemble_matrix(dform, space, drec.unknown.space, states));
      d.Dadj = std::make_unique<SpMat>(
          assemble_matrix(adjoint_form(dform), drec.unknown.space, space, states));
      rec.deps.push_back(std::move(d));
    }
    solves_.push_back(std::move(rec));
  }
}

std::unordered_map<SymbolId, Vector> TapeLinearizer::tlm_trajectory(const Vector& dm) const {
  if (dm.size() != in_dim_)
    throw DimensionMismatch("apply_tlm: perturbation length does not match the input space");
  std::unordered_map<SymbolId, Vector> dot;
  // Assignment records carry zero perturbation except for the input.
  for (const auto& r : tape_->records())
    if (r.is_assignment())
      dot[r.unknown.id] =
          r.unknown.id == tape_->input() ? dm : Vector(Vector::Zero(r.state.size()));
  if (tape_->record_of(tape_->input()).is_assignment() == false)
    throw Error("apply_tlm: input variable must be an assignment record");

  for (const auto& rec : solves_) {
    Vector b = Vector::Zero(rec.dim);
    for (const auto& d : rec.deps) b.noalias() -= *d.D * dot.at(d.symbol);
    for (int i : rec.bc) b[i] = 0.0;
    dot[rec.unknown] = rec.lu->solve(b);
  }
  return dot;
}

Vector TapeLinearizer::apply_tlm(const Vector& dm) const {
  return tlm_trajectory(dm).at(tape_->output());
}

Vector TapeLinearizer::apply_adjoint(const Vector& w) const {
  if (w.size() != out_dim_)
    throw DimensionMismatch("apply_adjoint: seed length does not match the output space");
  std::unordered_map<SymbolId, Vector> src;
  for (const auto& r : tape_->records()) src[r.unknown.id] = Vector::Zero(r.state.size());
  src[tape_->output()] = w;

  for (auto it = solves_.rbegin(); it != solves_.rend(); ++it) {
    Vector s = std::move(src[it->unknown]);
    for (int i : it->bc) s[i] = 0.0;
    Vector lambda = it->lu_adj->solve(s);
    for (const auto& d : it->deps) src[d.symbol].noalias() -= *d.Dadj * lambda;
  }
  return src.at(tape_->input());
}

}  // namespace gst
