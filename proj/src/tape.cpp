#include "gst/tape.hpp"

#include "gst/linearizer.hpp"

namespace gst {

void Tape::check_open() const {
  if (sealed_) throw TapeSealed("Tape: sealed tapes are immutable");
}

int Tape::record_assignment(const Coefficient& var, const Vector& values, std::string tag) {
  check_open();
  if (!var.space) throw Error("Tape: unbound coefficient");
  if (values.size() != var.space->dof_count())
    throw DimensionMismatch("Tape: assignment length does not match space");
  if (index_.count(var.id)) throw Error("Tape: symbol already recorded");
  TapeRecord r;
  r.index = static_cast<int>(records_.size());
  r.unknown = var;
  r.state = values;
  r.tag = std::move(tag);
  index_[var.id] = r.index;
  records_.push_back(std::move(r));
  return records_.back().index;
}

int Tape::record_solve(const Coefficient& unknown, FormExpr residual,
                       std::vector<SymbolId> dependencies, std::vector<DirichletBC> bcs,
                       const Vector& solved_state, std::string tag) {
  check_open();
  if (!unknown.space) throw Error("Tape: unbound coefficient");
  if (solved_state.size() != unknown.space->dof_count())
    throw DimensionMismatch("Tape: state length does not match space");
  if (index_.count(unknown.id)) throw Error("Tape: symbol already recorded");
  if (arity(residual) != 1) throw ArityError("Tape: residual must be a linear form");
  for (SymbolId dep : dependencies)
    if (!index_.count(dep))
      throw UnboundSymbol("Tape: dependency " + std::to_string(dep) +
                          " was not recorded before this solve");
  for (SymbolId s : symbols(residual)) {
    if (s == unknown.id) continue;
    bool declared = false;
    for (SymbolId dep : dependencies) declared |= (dep == s);
    if (!declared)
      throw UnboundSymbol("Tape: residual references undeclared symbol " + std::to_string(s));
  }
  TapeRecord r;
  r.index = static_cast<int>(records_.size());
  r.unknown = unknown;
  r.residual = std::move(residual);
  r.dependencies = std::move(dependencies);
  r.bcs = std::move(bcs);
  r.state = solved_state;
  r.tag = std::move(tag);
  index_[unknown.id] = r.index;
  records_.push_back(std::move(r));
  return records_.back().index;
}

void Tape::set_input(SymbolId id) {
  check_open();
  input_ = id;
}

void Tape::set_output(SymbolId id) {
  check_open();
  output_ = id;
}

void Tape::seal() {
  check_open();
  if (records_.empty()) throw Error("Tape: cannot seal an empty tape");
  if (!index_.count(input_)) throw Error("Tape: input variable was never recorded");
  if (!index_.count(output_)) throw Error("Tape: output variable was never recorded");
  sealed_ = true;
}

const TapeRecord& Tape::record_of(SymbolId id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw UnboundSymbol("Tape: symbol " + std::to_string(id) + " has no record");
  return records_[it->second];
}

CoefficientBindings Tape::state_bindings() const {
  CoefficientBindings b;
  for (const auto& r : records_) b.set(r.unknown.id, r.state);
  return b;
}

std::uint64_t Tape::state_checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& r : records_)
    mix(r.state.data(), sizeof(double) * static_cast<size_t>(r.state.size()));
  return h;
}

void Tape::dump(std::ostream& os) const {
  os << "tape: " << records_.size() << " records, input=" << input_ << ", output=" << output_
     << (sealed_ ? ", sealed" : ", open") << "\n";
  for (const auto& r : records_) {
    os << "  [" << r.index << "] " << (r.is_assignment() ? "assign " : "solve ")
       << (r.unknown.name.empty() ? "c" + std::to_string(r.unknown.id) : r.unknown.name)
       << " (dofs=" << r.state.size() << ")";
    if (!r.tag.empty()) os << " tag=" << r.tag;
    if (!r.dependencies.empty()) {
      os << " deps=[";
      for (size_t i = 0; i < r.dependencies.size(); ++i) {
        const auto& d = record_of(r.dependencies[i]).unknown;
        os << (i ? "," : "") << (d.name.empty() ? "c" + std::to_string(d.id) : d.name);
      }
      os << "]";
    }
    if (!r.bcs.empty()) os << " bcs=" << r.bcs.size();
    os << "\n";
    if (r.residual) os << "      residual: " << to_string(*r.residual) << "\n";
  }
}

Vector tlm_sweep(const Tape& tape, const Vector& dm) {
  return TapeLinearizer(tape).apply_tlm(dm);
}

Vector adjoint_sweep(const Tape& tape, const Vector& w) {
  return TapeLinearizer(tape).apply_adjoint(w);
}

Vector functional_output_gradient(const Tape& tape, const FormExpr& J) {
  if (!tape.sealed()) throw TapeNotSealed("functional_gradient: tape must be sealed");
  if (arity(J) != 0)
    throw UnsupportedFunctional("functional_gradient: J must be a functional (arity 0)");
  for (SymbolId s : symbols(J))
    if (s != tape.output())
      throw UnsupportedFunctional(
          "functional_gradient: J may reference only the tape's output variable");

  const TapeRecord& out = tape.record_of(tape.output());
  const SpacePtr& space = out.unknown.space;
  CoefficientBindings states = tape.state_bindings();
  FormExpr dJ = gateaux_derivative(J, out.unknown, test_function(space));
  return assemble_vector(dJ, space, states);
}

Vector functional_gradient(const Tape& tape, const FormExpr& J, GradientMode mode) {
  Vector w = functional_output_gradient(tape, J);

  if (mode == GradientMode::Adjoint) return adjoint_sweep(tape, w);

  TapeLinearizer lin(tape);
  const int n = lin.input_dim();
  Vector g(n);
  Vector e = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    e[i] = 1.0;
    g[i] = w.dot(lin.apply_tlm(e));
    e[i] = 0.0;
  }
  return g;
}

double functional_value(const Tape& tape, const FormExpr& J) {
  if (arity(J) != 0) throw UnsupportedFunctional("functional_value: J must be a functional");
  CoefficientBindings states = tape.state_bindings();
  return assemble_scalar(J, states, tape.output_space()->mesh());
}

double replay_max_deviation(const Tape& tape) {
  if (!tape.sealed()) throw TapeNotSealed("replay_max_deviation: tape must be sealed");
  CoefficientBindings replayed;
  double worst = 0.0;
  for (const auto& r : tape.records()) {
    if (r.is_assignment()) {
      replayed.set(r.unknown.id, r.state);
      continue;
    }
    Vector guess = Vector::Zero(r.unknown.space->dof_count());
    for (SymbolId dep : r.dependencies) {
      const TapeRecord& d = tape.record_of(dep);
      if (*d.unknown.space == *r.unknown.space) {
        guess = replayed.get(dep);
        break;
      }
    }
    replayed.set(r.unknown.id, guess);
    NewtonResult res = newton_solve(*r.residual, r.unknown, replayed, r.bcs);
    replayed.set(r.unknown.id, res.u);
    worst = std::max(worst, (res.u - r.state).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace gst
