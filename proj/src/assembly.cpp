#include "gst/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace gst {

const Vector& CoefficientBindings::get(SymbolId id) const {
  auto it = values_.find(id);
  if (it == values_.end())
    throw UnboundSymbol("CoefficientBindings: symbol " + std::to_string(id) + " is unbound");
  return it->second;
}

double AssembledValue::scalar() const {
  if (v_.index() != 0) throw ArityError("AssembledValue: not a scalar");
  return std::get<double>(v_);
}

const Vector& AssembledValue::vector() const {
  if (v_.index() != 1) throw ArityError("AssembledValue: not a vector");
  return std::get<Vector>(v_);
}

const SpMat& AssembledValue::matrix() const {
  if (v_.index() != 2) throw ArityError("AssembledValue: not a matrix");
  return std::get<SpMat>(v_);
}

QuadRule gauss_rule(int n_points) {
  // Abscissae/weights on [-1,1], mapped to [0,1].
  static const std::vector<std::vector<std::pair<double, double>>> rules = {
      {{0.0, 2.0}},
      {{-0.5773502691896257645, 1.0}, {0.5773502691896257645, 1.0}},
      {{-0.7745966692414833770, 0.5555555555555555556},
       {0.0, 0.8888888888888888889},
       {0.7745966692414833770, 0.5555555555555555556}},
      {{-0.8611363115940525752, 0.3478548451374538574},
       {-0.3399810435848562648, 0.6521451548625461426},
       {0.3399810435848562648, 0.6521451548625461426},
       {0.8611363115940525752, 0.3478548451374538574}},
      {{-0.9061798459386639928, 0.2369268850561890875},
       {-0.5384693101056830910, 0.4786286704993664680},
       {0.0, 0.5688888888888888889},
       {0.5384693101056830910, 0.4786286704993664680},
       {0.9061798459386639928, 0.2369268850561890875}}};
  if (n_points < 1 || n_points > static_cast<int>(rules.size()))
    throw Error("gauss_rule: unsupported point count");
  QuadRule r;
  for (const auto& [x, w] : rules[n_points - 1]) {
    r.points.push_back(0.5 * (1.0 + x));
    r.weights.push_back(0.5 * w);
  }
  return r;
}

namespace {

constexpr int kMaxDeriv = 2;

void ref_basis(Element el, int d, double xi, double* out) {
  if (el == Element::P1) {
    switch (d) {
      case 0:
        out[0] = 1.0 - xi;
        out[1] = xi;
        return;
      case 1:
        out[0] = -1.0;
        out[1] = 1.0;
        return;
      default:
        out[0] = out[1] = 0.0;
        return;
    }
  }
  switch (d) {
    case 0:
      out[0] = 1.0 - 3.0 * xi + 2.0 * xi * xi;
      out[1] = 4.0 * xi - 4.0 * xi * xi;
      out[2] = 2.0 * xi * xi - xi;
      return;
    case 1:
      out[0] = -3.0 + 4.0 * xi;
      out[1] = 4.0 - 8.0 * xi;
      out[2] = 4.0 * xi - 1.0;
      return;
    default:
      out[0] = 4.0;
      out[1] = -8.0;
      out[2] = 4.0;
      return;
  }
}

double ipow(double v, int k) {
  if (k < 0) return 1.0 / ipow(v, -k);
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= v;
  return r;
}

enum class Op { Const, LeafCoeff, LeafTrial, LeafTest, Add, Mul, Div, Neg, Pow };

struct Instr {
  Op op;
  double cval = 0.0;
  int d = 0;
  int exponent = 0;
  SymbolId symbol = -1;
  int space_slot = -1;
  int component = 0;
  bool prelude = true;
  const double* coeff_data = nullptr;  // resolved dof array for LeafCoeff
  std::vector<int> args;
};

/// The expression tree is flattened once per assemble() call into an
/// arithmetic DAG with all spatial-derivative bookkeeping resolved at
/// compile time. Instructions that do not touch trial/test terminals are
/// evaluated once per quadrature point; the rest once per local dof pair.
struct Program {
  std::vector<Instr> instrs;
  std::vector<int> prelude;
  std::vector<int> body;
  int root = -1;
};

struct Compiler {
  std::vector<Instr> instrs;
  std::map<std::pair<const ExprNode*, int>, int> memo;
  const std::vector<SpacePtr>* spaces = nullptr;

  int slot_of(const SpacePtr& s) const {
    for (size_t i = 0; i < spaces->size(); ++i)
      if (*(*spaces)[i] == *s) return static_cast<int>(i);
    throw Error("assemble: terminal space missing from slot table");
  }

  int emit(Instr in) {
    instrs.push_back(std::move(in));
    return static_cast<int>(instrs.size()) - 1;
  }

  bool is_prelude(const std::vector<int>& args) const {
    for (int a : args)
      if (!instrs[a].prelude) return false;
    return true;
  }

  int cnst(double v) {
    Instr in;
    in.op = Op::Const;
    in.cval = v;
    return emit(std::move(in));
  }

  int nary(Op op, std::vector<int> args) {
    if (args.size() == 1 && (op == Op::Add || op == Op::Mul)) return args[0];
    Instr in;
    in.op = op;
    in.prelude = is_prelude(args);
    in.args = std::move(args);
    return emit(std::move(in));
  }

  int unary(Op op, int a, int exponent = 0) {
    Instr in;
    in.op = op;
    in.exponent = exponent;
    in.prelude = instrs[a].prelude;
    in.args = {a};
    return emit(std::move(in));
  }

  int compile(const ExprNode* n, int d);
};

int Compiler::compile(const ExprNode* n, int d) {
  auto key = std::make_pair(n, d);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;

  int slot = -1;
  switch (n->kind) {
    case ExprKind::Constant:
      slot = cnst(d == 0 ? n->value : 0.0);
      break;
    case ExprKind::Coefficient:
    case ExprKind::TrialFunction:
    case ExprKind::TestFunction: {
      if (d > kMaxDeriv) {
        slot = cnst(0.0);  // exact: P1/P2 bases vanish above order 2
        break;
      }
      Instr in;
      in.op = n->kind == ExprKind::Coefficient
                  ? Op::LeafCoeff
                  : (n->kind == ExprKind::TrialFunction ? Op::LeafTrial : Op::LeafTest);
      in.d = d;
      in.symbol = n->symbol;
      in.space_slot = slot_of(n->space);
      in.component = n->component;
      in.prelude = n->kind == ExprKind::Coefficient;
      slot = emit(std::move(in));
      break;
    }
    case ExprKind::SpatialDerivative:
      slot = compile(n->children[0].ptr().get(), d + 1);
      break;
    case ExprKind::Negation:
      slot = unary(Op::Neg, compile(n->children[0].ptr().get(), d));
      break;
    case ExprKind::Sum: {
      std::vector<int> args;
      for (const auto& c : n->children) args.push_back(compile(c.ptr().get(), d));
      slot = nary(Op::Add, std::move(args));
      break;
    }
    case ExprKind::Product: {
      const auto& ch = n->children;
      const size_t m = ch.size();
      auto at = [&](size_t i, int ord) { return compile(ch[i].ptr().get(), ord); };
      if (d == 0) {
        std::vector<int> args;
        for (size_t i = 0; i < m; ++i) args.push_back(at(i, 0));
        slot = nary(Op::Mul, std::move(args));
      } else if (d == 1) {
        std::vector<int> terms;
        for (size_t i = 0; i < m; ++i) {
          std::vector<int> factors{at(i, 1)};
          for (size_t j = 0; j < m; ++j)
            if (j != i) factors.push_back(at(j, 0));
          terms.push_back(nary(Op::Mul, std::move(factors)));
        }
        slot = nary(Op::Add, std::move(terms));
      } else if (d == 2) {
        std::vector<int> terms;
        for (size_t i = 0; i < m; ++i) {
          std::vector<int> factors{at(i, 2)};
          for (size_t j = 0; j < m; ++j)
            if (j != i) factors.push_back(at(j, 0));
          terms.push_back(nary(Op::Mul, std::move(factors)));
        }
        for (size_t i = 0; i < m; ++i)
          for (size_t j = i + 1; j < m; ++j) {
            std::vector<int> factors{cnst(2.0), at(i, 1), at(j, 1)};
            for (size_t k = 0; k < m; ++k)
              if (k != i && k != j) factors.push_back(at(k, 0));
            terms.push_back(nary(Op::Mul, std::move(factors)));
          }
        slot = nary(Op::Add, std::move(terms));
      } else {
        throw Error("assemble: spatial derivative order above 2 in a product");
      }
      break;
    }
    case ExprKind::Quotient: {
      const ExprNode* a = n->children[0].ptr().get();
      const ExprNode* b = n->children[1].ptr().get();
      // q0 = a/b, q1 = (a' - q0 b')/b, q2 = (a'' - 2 q1 b' - q0 b'')/b
      int q0 = nary(Op::Div, {compile(a, 0), compile(b, 0)});
      memo[{n, 0}] = q0;
      if (d == 0) {
        slot = q0;
      } else {
        int q1 = nary(Op::Div, {nary(Op::Add, {compile(a, 1),
                                               unary(Op::Neg, nary(Op::Mul, {q0, compile(b, 1)}))}),
                                compile(b, 0)});
        memo[{n, 1}] = q1;
        if (d == 1) {
          slot = q1;
        } else if (d == 2) {
          int t1 = unary(Op::Neg, nary(Op::Mul, {cnst(2.0), q1, compile(b, 1)}));
          int t2 = unary(Op::Neg, nary(Op::Mul, {q0, compile(b, 2)}));
          slot = nary(Op::Div, {nary(Op::Add, {compile(a, 2), t1, t2}), compile(b, 0)});
        } else {
          throw Error("assemble: spatial derivative order above 2 in a quotient");
        }
      }
      break;
    }
    case ExprKind::Power: {
      const ExprNode* e = n->children[0].ptr().get();
      const int k = n->exponent;
      if (d == 0) {
        slot = unary(Op::Pow, compile(e, 0), k);
      } else if (d == 1) {
        slot = nary(Op::Mul, {cnst(static_cast<double>(k)), unary(Op::Pow, compile(e, 0), k - 1),
                              compile(e, 1)});
      } else if (d == 2) {
        int e1 = compile(e, 1);
        int t1 = nary(Op::Mul, {cnst(static_cast<double>(k) * (k - 1)),
                                unary(Op::Pow, compile(e, 0), k - 2), e1, e1});
        int t2 = nary(Op::Mul, {cnst(static_cast<double>(k)),
                                unary(Op::Pow, compile(e, 0), k - 1), compile(e, 2)});
        slot = nary(Op::Add, {t1, t2});
      } else {
        throw Error("assemble: spatial derivative order above 2 in a power");
      }
      break;
    }
  }
  memo[key] = slot;
  return slot;
}

struct SpaceSlot {
  SpacePtr space;
  int nloc = 0;
  int comps = 1;
  std::array<int, 3> nodes{};  // current cell, local -> global scalar node
  // basis[q][d][local], physical derivatives (uniform mesh)
  std::vector<std::array<std::array<double, 3>, kMaxDeriv + 1>> basis;
};

void collect_spaces(const FormExpr& e, std::vector<SpacePtr>& spaces) {
  const ExprNode& n = e.node();
  if (n.space) {
    bool found = false;
    for (const auto& s : spaces)
      if (*s == *n.space) {
        found = true;
        break;
      }
    if (!found) spaces.push_back(n.space);
  }
  for (const auto& c : n.children) collect_spaces(c, spaces);
}

struct AssemblyPlan {
  std::vector<SpacePtr> spaces;
  Program prog;
  QuadRule rule;
  std::vector<SpaceSlot> slots;
  MeshPtr mesh;
};

AssemblyPlan plan_assembly(const FormExpr& form, const CoefficientBindings& bindings,
                           const SpacePtr& test, const SpacePtr& trial, MeshPtr mesh_hint) {
  AssemblyPlan plan;
  collect_spaces(form, plan.spaces);
  auto ensure_space = [&](const SpacePtr& s) {
    if (!s) return;
    for (const auto& q : plan.spaces)
      if (*q == *s) return;
    plan.spaces.push_back(s);
  };
  ensure_space(test);
  ensure_space(trial);

  for (const auto& s : plan.spaces) {
    if (!plan.mesh) plan.mesh = s->mesh();
    if (!plan.mesh->same_as(*s->mesh()))
      throw SpaceMismatch("assemble: form mixes spaces on different meshes");
  }
  if (!plan.mesh) plan.mesh = std::move(mesh_hint);
  if (!plan.mesh) throw Error("assemble: cannot infer mesh for a constant form");

  int max_order = 1;
  for (const auto& s : plan.spaces) max_order = std::max(max_order, s->order());
  const int degree = 2 * max_order + 1;
  plan.rule = gauss_rule((degree + 2) / 2);

  Compiler comp;
  comp.spaces = &plan.spaces;
  plan.prog.root = comp.compile(form.ptr().get(), 0);
  plan.prog.instrs = std::move(comp.instrs);
  for (int i = 0; i < static_cast<int>(plan.prog.instrs.size()); ++i) {
    Instr& in = plan.prog.instrs[i];
    if (in.op == Op::LeafCoeff) {
      const Vector& u = bindings.get(in.symbol);
      const auto& sp = plan.spaces[in.space_slot];
      if (u.size() != sp->dof_count())
        throw DimensionMismatch("assemble: bound vector length does not match space dof count");
      in.coeff_data = u.data();
    }
    (in.prelude ? plan.prog.prelude : plan.prog.body).push_back(i);
  }

  const double h = plan.mesh->h();
  const int nq = static_cast<int>(plan.rule.points.size());
  for (const auto& s : plan.spaces) {
    SpaceSlot slot;
    slot.space = s;
    slot.nloc = s->nodes_per_cell();
    slot.comps = s->components();
    slot.basis.resize(nq);
    for (int q = 0; q < nq; ++q)
      for (int d = 0; d <= kMaxDeriv; ++d) {
        double ref[3] = {0, 0, 0};
        ref_basis(s->element(), d, plan.rule.points[q], ref);
        const double scale = 1.0 / ipow(h, d);
        for (int l = 0; l < slot.nloc; ++l) slot.basis[q][d][l] = ref[l] * scale;
      }
    plan.slots.push_back(std::move(slot));
  }
  return plan;
}

struct Executor {
  const AssemblyPlan* plan;
  std::vector<double> vals;
  int trial_slot = -1, test_slot = -1;
  int trial_local = 0, trial_comp = 0;
  int test_local = 0, test_comp = 0;
  int qp = 0;

  explicit Executor(const AssemblyPlan& p) : plan(&p), vals(p.prog.instrs.size(), 0.0) {}

  double step(const Instr& in) {
    switch (in.op) {
      case Op::Const:
        return in.cval;
      case Op::LeafCoeff: {
        const SpaceSlot& s = plan->slots[in.space_slot];
        const auto& N = s.basis[qp][in.d];
        double v = 0.0;
        for (int l = 0; l < s.nloc; ++l)
          v += in.coeff_data[s.nodes[l] * s.comps + in.component] * N[l];
        return v;
      }
      case Op::LeafTrial: {
        if (in.component != trial_comp) return 0.0;
        const SpaceSlot& s = plan->slots[in.space_slot];
        return s.basis[qp][in.d][trial_local];
      }
      case Op::LeafTest: {
        if (in.component != test_comp) return 0.0;
        const SpaceSlot& s = plan->slots[in.space_slot];
        return s.basis[qp][in.d][test_local];
      }
      case Op::Add: {
        double v = 0.0;
        for (int a : in.args) v += vals[a];
        return v;
      }
      case Op::Mul: {
        double v = 1.0;
        for (int a : in.args) v *= vals[a];
        return v;
      }
      case Op::Div:
        return vals[in.args[0]] / vals[in.args[1]];
      case Op::Neg:
        return -vals[in.args[0]];
      case Op::Pow:
        return ipow(vals[in.args[0]], in.exponent);
    }
    return 0.0;
  }

  void run_prelude() {
    for (int i : plan->prog.prelude) vals[i] = step(plan->prog.instrs[i]);
  }
  double run_body() {
    for (int i : plan->prog.body) vals[i] = step(plan->prog.instrs[i]);
    return vals[plan->prog.root];
  }
};

int find_slot(const AssemblyPlan& plan, const SpacePtr& s) {
  for (size_t i = 0; i < plan.spaces.size(); ++i)
    if (*plan.spaces[i] == *s) return static_cast<int>(i);
  throw Error("assemble: space not present in plan");
}

void check_form_arity(const FormExpr& form, int requested) {
  if (form.is_zero()) return;
  if (arity(form) != requested)
    throw ArityError("assemble: form arity does not match the requested result kind");
}

}  // namespace

SpMat assemble_matrix(const FormExpr& form, const SpacePtr& test, const SpacePtr& trial,
                      const CoefficientBindings& bindings) {
  if (!test || !trial) throw Error("assemble_matrix: null space");
  check_form_arity(form, 2);
  SpMat A(test->dof_count(), trial->dof_count());
  if (form.is_zero()) return A;
  if (*trial_space(form) != *trial || *test_space(form) != *test)
    throw SpaceMismatch("assemble_matrix: form terminals do not match the requested spaces");

  AssemblyPlan plan = plan_assembly(form, bindings, test, trial, nullptr);
  Executor ex(plan);
  ex.trial_slot = find_slot(plan, trial);
  ex.test_slot = find_slot(plan, test);
  SpaceSlot& ts = plan.slots[ex.test_slot];
  SpaceSlot& us = plan.slots[ex.trial_slot];

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(plan.mesh->n_cells()) * plan.rule.points.size() *
               ts.nloc * ts.comps * us.nloc * us.comps);
  const double h = plan.mesh->h();
  for (int cell = 0; cell < plan.mesh->n_cells(); ++cell) {
    for (auto& slot : plan.slots) slot.space->cell_nodes(cell, slot.nodes.data());
    for (int q = 0; q < static_cast<int>(plan.rule.points.size()); ++q) {
      ex.qp = q;
      ex.run_prelude();
      const double wq = plan.rule.weights[q] * h;
      for (int tl = 0; tl < ts.nloc; ++tl)
        for (int tc = 0; tc < ts.comps; ++tc) {
          ex.test_local = tl;
          ex.test_comp = tc;
          const int row = ts.nodes[tl] * ts.comps + tc;
          for (int ul = 0; ul < us.nloc; ++ul)
            for (int uc = 0; uc < us.comps; ++uc) {
              ex.trial_local = ul;
              ex.trial_comp = uc;
              const double v = ex.run_body();
              if (v != 0.0) trip.emplace_back(row, us.nodes[ul] * us.comps + uc, wq * v);
            }
        }
    }
  }
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Vector assemble_vector(const FormExpr& form, const SpacePtr& test,
                       const CoefficientBindings& bindings) {
  if (!test) throw Error("assemble_vector: null space");
  check_form_arity(form, 1);
  Vector b = Vector::Zero(test->dof_count());
  if (form.is_zero()) return b;
  if (*test_space(form) != *test)
    throw SpaceMismatch("assemble_vector: form test space does not match the requested space");

  AssemblyPlan plan = plan_assembly(form, bindings, test, nullptr, nullptr);
  Executor ex(plan);
  ex.test_slot = find_slot(plan, test);
  SpaceSlot& ts = plan.slots[ex.test_slot];

  const double h = plan.mesh->h();
  for (int cell = 0; cell < plan.mesh->n_cells(); ++cell) {
    for (auto& slot : plan.slots) slot.space->cell_nodes(cell, slot.nodes.data());
    for (int q = 0; q < static_cast<int>(plan.rule.points.size()); ++q) {
      ex.qp = q;
      ex.run_prelude();
      const double wq = plan.rule.weights[q] * h;
      for (int tl = 0; tl < ts.nloc; ++tl)
        for (int tc = 0; tc < ts.comps; ++tc) {
          ex.test_local = tl;
          ex.test_comp = tc;
          b[ts.nodes[tl] * ts.comps + tc] += wq * ex.run_body();
        }
    }
  }
  return b;
}

double assemble_scalar(const FormExpr& form, const CoefficientBindings& bindings, MeshPtr mesh) {
  check_form_arity(form, 0);
  if (form.is_zero()) return 0.0;

  AssemblyPlan plan = plan_assembly(form, bindings, nullptr, nullptr, std::move(mesh));
  Executor ex(plan);
  double total = 0.0;
  const double h = plan.mesh->h();
  for (int cell = 0; cell < plan.mesh->n_cells(); ++cell) {
    for (auto& slot : plan.slots) slot.space->cell_nodes(cell, slot.nodes.data());
    for (int q = 0; q < static_cast<int>(plan.rule.points.size()); ++q) {
      ex.qp = q;
      ex.run_prelude();
      total += plan.rule.weights[q] * h * ex.run_body();
    }
  }
  return total;
}

AssembledValue assemble(const FormExpr& form, const CoefficientBindings& bindings, MeshPtr mesh) {
  const int a = form.is_zero() ? 0 : arity(form);
  if (a == 2) return AssembledValue(assemble_matrix(form, test_space(form), trial_space(form), bindings));
  if (a == 1) return AssembledValue(assemble_vector(form, test_space(form), bindings));
  return AssembledValue(assemble_scalar(form, bindings, std::move(mesh)));
}

std::vector<int> collect_bc_dofs(const FunctionSpace& space, std::span<const DirichletBC> bcs) {
  std::vector<int> dofs;
  for (const auto& bc : bcs) {
    auto d = bc_dofs(space, bc);
    dofs.insert(dofs.end(), d.begin(), d.end());
  }
  std::sort(dofs.begin(), dofs.end());
  dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  return dofs;
}

void apply_bc_rows(SpMat& A, std::span<const int> dofs) {
  if (dofs.empty()) return;
  std::vector<char> marked(A.rows(), 0);
  for (int d : dofs) {
    if (d < 0 || d >= A.rows()) throw InvalidBC("apply_bc_rows: dof out of range");
    marked[d] = 1;
  }
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (marked[it.row()]) it.valueRef() = it.row() == it.col() ? 1.0 : 0.0;
  for (int d : dofs) A.coeffRef(d, d) = 1.0;
}

void zero_bc_entries(Vector& b, std::span<const int> dofs) {
  for (int d : dofs) b[d] = 0.0;
}

void apply_bc(SpMat& A, Vector& b, const FunctionSpace& space,
              std::span<const DirichletBC> bcs, BcMode mode) {
  if (A.rows() != space.dof_count() || b.size() != space.dof_count())
    throw InvalidBC("apply_bc: system dimensions do not match the space");
  for (const auto& bc : bcs) {
    auto dofs = bc_dofs(space, bc);
    apply_bc_rows(A, dofs);
    for (int d : dofs) {
      const int node = d / space.components();
      b[d] = mode == BcMode::Full ? bc.value(space.node_coord(node)) : 0.0;
    }
  }
}

SpMat mass_matrix(const FunctionSpace& space) {
  auto sp = std::make_shared<FunctionSpace>(space);
  FormExpr form = constant(0.0);
  for (int c = 0; c < space.components(); ++c)
    form = form + trial(sp, c) * test_function(sp, c);
  return assemble_matrix(form, sp, sp, CoefficientBindings{});
}

SpMat component_mass_matrix(const FunctionSpace& space, int component) {
  auto sp = std::make_shared<FunctionSpace>(space);
  FormExpr form = trial(sp, component) * test_function(sp, component);
  return assemble_matrix(form, sp, sp, CoefficientBindings{});
}

}  // namespace gst
