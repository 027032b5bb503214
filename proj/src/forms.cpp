#include "gst/forms.hpp"

#include <atomic>
#include <cstdio>
#include <utility>

#include "gst/errors.hpp"

namespace gst {

namespace {

std::atomic<SymbolId> g_next_symbol{0};

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_node(ExprNode&& n) {
  for (const auto& c : n.children) {
    n.has_trial = n.has_trial || c.has_trial();
    n.has_test = n.has_test || c.has_test();
  }
  return std::make_shared<const ExprNode>(std::move(n));
}

bool is_const(const FormExpr& e, double v) {
  return e.kind() == ExprKind::Constant && e.node().value == v;
}

}  // namespace

SymbolId fresh_symbol() { return g_next_symbol++; }

Coefficient make_coefficient(SpacePtr space, std::string name) {
  return Coefficient{fresh_symbol(), std::move(space), std::move(name)};
}

bool FormExpr::is_zero() const { return node_ && is_const(*this, 0.0); }

FormExpr constant(double value) {
  ExprNode n;
  n.kind = ExprKind::Constant;
  n.value = value;
  return FormExpr(make_node(std::move(n)));
}

FormExpr trial(SpacePtr space, int component) {
  if (!space) throw Error("trial: null space");
  if (component < 0 || component >= space->components())
    throw SpaceMismatch("trial: component out of range for space");
  ExprNode n;
  n.kind = ExprKind::TrialFunction;
  n.space = std::move(space);
  n.component = component;
  n.has_trial = true;
  return FormExpr(make_node(std::move(n)));
}

FormExpr test_function(SpacePtr space, int component) {
  if (!space) throw Error("test_function: null space");
  if (component < 0 || component >= space->components())
    throw SpaceMismatch("test_function: component out of range for space");
  ExprNode n;
  n.kind = ExprKind::TestFunction;
  n.space = std::move(space);
  n.component = component;
  n.has_test = true;
  return FormExpr(make_node(std::move(n)));
}

FormExpr coefficient(const Coefficient& c, int component) {
  if (!c.space) throw Error("coefficient: unbound handle (null space)");
  if (component < 0 || component >= c.space->components())
    throw SpaceMismatch("coefficient: component out of range for space");
  ExprNode n;
  n.kind = ExprKind::Coefficient;
  n.symbol = c.id;
  n.name = c.name;
  n.space = c.space;
  n.component = component;
  return FormExpr(make_node(std::move(n)));
}

FormExpr deriv(const FormExpr& e) {
  if (!e.valid()) throw Error("deriv: invalid expression");
  if (e.kind() == ExprKind::Constant) return constant(0.0);
  ExprNode n;
  n.kind = ExprKind::SpatialDerivative;
  n.children = {e};
  return FormExpr(make_node(std::move(n)));
}

FormExpr pow(const FormExpr& e, int exponent) {
  if (!e.valid()) throw Error("pow: invalid expression");
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return e;
  if (e.kind() == ExprKind::Constant) {
    double v = 1.0, b = e.node().value;
    int k = exponent < 0 ? -exponent : exponent;
    for (int i = 0; i < k; ++i) v *= b;
    return constant(exponent < 0 ? 1.0 / v : v);
  }
  ExprNode n;
  n.kind = ExprKind::Power;
  n.exponent = exponent;
  n.children = {e};
  return FormExpr(make_node(std::move(n)));
}

FormExpr operator+(const FormExpr& a, const FormExpr& b) {
  if (!a.valid() || !b.valid()) throw Error("operator+: invalid expression");
  std::vector<FormExpr> terms;
  for (const FormExpr* e : {&a, &b}) {
    if (e->is_zero()) continue;
    if (e->kind() == ExprKind::Sum)
      terms.insert(terms.end(), e->children().begin(), e->children().end());
    else
      terms.push_back(*e);
  }
  if (terms.empty()) return constant(0.0);
  if (terms.size() == 1) return terms[0];
  ExprNode n;
  n.kind = ExprKind::Sum;
  n.children = std::move(terms);
  return FormExpr(make_node(std::move(n)));
}

FormExpr operator-(const FormExpr& a, const FormExpr& b) { return a + (-b); }

FormExpr operator*(const FormExpr& a, const FormExpr& b) {
  if (!a.valid() || !b.valid()) throw Error("operator*: invalid expression");
  double scale = 1.0;
  std::vector<FormExpr> factors;
  for (const FormExpr* e : {&a, &b}) {
    if (e->is_zero()) return constant(0.0);
    if (e->kind() == ExprKind::Constant) {
      scale *= e->node().value;
    } else if (e->kind() == ExprKind::Product) {
      for (const auto& c : e->children()) {
        if (c.kind() == ExprKind::Constant)
          scale *= c.node().value;
        else
          factors.push_back(c);
      }
    } else {
      factors.push_back(*e);
    }
  }
  if (scale == 0.0 || factors.empty()) return constant(scale);
  std::vector<FormExpr> children;
  if (scale != 1.0) children.push_back(constant(scale));
  children.insert(children.end(), factors.begin(), factors.end());
  if (children.size() == 1) return children[0];
  ExprNode n;
  n.kind = ExprKind::Product;
  n.children = std::move(children);
  return FormExpr(make_node(std::move(n)));
}

FormExpr operator/(const FormExpr& a, const FormExpr& b) {
  if (!a.valid() || !b.valid()) throw Error("operator/: invalid expression");
  if (b.is_zero()) throw Error("operator/: division by constant zero");
  if (a.is_zero()) return constant(0.0);
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant)
    return constant(a.node().value / b.node().value);
  ExprNode n;
  n.kind = ExprKind::Quotient;
  n.children = {a, b};
  return FormExpr(make_node(std::move(n)));
}

FormExpr operator-(const FormExpr& a) {
  if (!a.valid()) throw Error("operator-: invalid expression");
  if (a.kind() == ExprKind::Constant) return constant(-a.node().value);
  if (a.kind() == ExprKind::Negation) return a.children()[0];
  ExprNode n;
  n.kind = ExprKind::Negation;
  n.children = {a};
  return FormExpr(make_node(std::move(n)));
}

namespace {

// Polynomial degree of the expression in the trial and test terminals.
// Assembly is only defined for forms of degree at most one in each, with
// every summand of one degree pair (a mixed sum like u*v + v is not a
// bilinear form and would assemble to garbage).
struct BasisDegree {
  int trial = 0;
  int test = 0;
  bool homogeneous = true;
};

BasisDegree basis_degrees(const ExprNode& n,
                          std::map<const ExprNode*, BasisDegree>& memo) {
  auto it = memo.find(&n);
  if (it != memo.end()) return it->second;
  BasisDegree d;
  switch (n.kind) {
    case ExprKind::Constant:
    case ExprKind::Coefficient:
      break;
    case ExprKind::TrialFunction:
      d.trial = 1;
      break;
    case ExprKind::TestFunction:
      d.test = 1;
      break;
    case ExprKind::SpatialDerivative:
    case ExprKind::Negation:
      d = basis_degrees(*n.children[0].ptr(), memo);
      break;
    case ExprKind::Sum: {
      bool first = true;
      for (const auto& c : n.children) {
        auto cd = basis_degrees(*c.ptr(), memo);
        if (first) {
          d = cd;
          first = false;
        } else {
          if (cd.trial != d.trial || cd.test != d.test) d.homogeneous = false;
          d.trial = std::max(d.trial, cd.trial);
          d.test = std::max(d.test, cd.test);
          d.homogeneous = d.homogeneous && cd.homogeneous;
        }
      }
      break;
    }
    case ExprKind::Product:
      for (const auto& c : n.children) {
        auto cd = basis_degrees(*c.ptr(), memo);
        d.trial += cd.trial;
        d.test += cd.test;
        d.homogeneous = d.homogeneous && cd.homogeneous;
      }
      break;
    case ExprKind::Quotient: {
      auto dn = basis_degrees(*n.children[1].ptr(), memo);
      if (dn.trial + dn.test > 0)
        throw ArityError("arity: trial or test function in a denominator");
      d = basis_degrees(*n.children[0].ptr(), memo);
      d.homogeneous = d.homogeneous && dn.homogeneous;
      break;
    }
    case ExprKind::Power: {
      auto cd = basis_degrees(*n.children[0].ptr(), memo);
      d.trial = cd.trial * n.exponent;
      d.test = cd.test * n.exponent;
      d.homogeneous = cd.homogeneous;
      break;
    }
  }
  memo[&n] = d;
  return d;
}

}  // namespace

int arity(const FormExpr& form) {
  if (!form.valid()) throw Error("arity: invalid expression");
  std::map<const ExprNode*, BasisDegree> memo;
  auto d = basis_degrees(form.node(), memo);
  if (d.trial > 1) throw ArityError("arity: form is nonlinear in the trial function");
  if (d.test > 1) throw ArityError("arity: form is nonlinear in the test function");
  if (!d.homogeneous)
    throw ArityError("arity: sum mixes terms of different trial/test degree");
  if (form.has_trial() && form.has_test()) return 2;
  if (form.has_trial()) throw ArityError("arity: form has a trial function but no test function");
  return form.has_test() ? 1 : 0;
}

namespace {

void walk(const FormExpr& e, const std::function<void(const ExprNode&)>& fn) {
  fn(e.node());
  for (const auto& c : e.children()) walk(c, fn);
}

}  // namespace

bool contains_symbol(const FormExpr& form, SymbolId id) {
  bool found = false;
  walk(form, [&](const ExprNode& n) {
    if (n.kind == ExprKind::Coefficient && n.symbol == id) found = true;
  });
  return found;
}

std::vector<SymbolId> symbols(const FormExpr& form) {
  std::vector<SymbolId> ids;
  walk(form, [&](const ExprNode& n) {
    if (n.kind != ExprKind::Coefficient) return;
    for (SymbolId s : ids)
      if (s == n.symbol) return;
    ids.push_back(n.symbol);
  });
  return ids;
}

namespace {

SpacePtr role_space(const FormExpr& form, ExprKind kind, const char* role) {
  SpacePtr space;
  walk(form, [&](const ExprNode& n) {
    if (n.kind != kind) return;
    if (!space) {
      space = n.space;
    } else if (*space != *n.space) {
      throw SpaceMismatch(std::string(role) + " terminals live on different spaces");
    }
  });
  return space;
}

}  // namespace

SpacePtr trial_space(const FormExpr& form) {
  return role_space(form, ExprKind::TrialFunction, "trial");
}

SpacePtr test_space(const FormExpr& form) {
  return role_space(form, ExprKind::TestFunction, "test");
}

namespace {

/// Rebuild `direction` selecting component `comp`.
FormExpr direction_component(const FormExpr& direction, int comp) {
  const ExprNode& d = direction.node();
  if (d.kind == ExprKind::TrialFunction) return trial(d.space, comp);
  if (d.kind == ExprKind::TestFunction) return test_function(d.space, comp);
  Coefficient c{d.symbol, d.space, d.name};
  return coefficient(c, comp);
}

FormExpr dexpr(const FormExpr& e, SymbolId wrt, const FormExpr& direction) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprKind::Constant:
    case ExprKind::TrialFunction:
    case ExprKind::TestFunction:
      return constant(0.0);
    case ExprKind::Coefficient:
      if (n.symbol == wrt) return direction_component(direction, n.component);
      return constant(0.0);
    case ExprKind::SpatialDerivative: {
      FormExpr d = dexpr(n.children[0], wrt, direction);
      return d.is_zero() ? d : deriv(d);
    }
    case ExprKind::Negation:
      return -dexpr(n.children[0], wrt, direction);
    case ExprKind::Sum: {
      FormExpr acc = constant(0.0);
      for (const auto& c : n.children) acc = acc + dexpr(c, wrt, direction);
      return acc;
    }
    case ExprKind::Product: {
      FormExpr acc = constant(0.0);
      for (size_t i = 0; i < n.children.size(); ++i) {
        FormExpr di = dexpr(n.children[i], wrt, direction);
        if (di.is_zero()) continue;
        FormExpr term = di;
        for (size_t j = 0; j < n.children.size(); ++j)
          if (j != i) term = term * n.children[j];
        acc = acc + term;
      }
      return acc;
    }
    case ExprKind::Quotient: {
      const FormExpr& a = n.children[0];
      const FormExpr& b = n.children[1];
      FormExpr da = dexpr(a, wrt, direction);
      FormExpr db = dexpr(b, wrt, direction);
      FormExpr acc = constant(0.0);
      if (!da.is_zero()) acc = acc + da / b;
      if (!db.is_zero()) acc = acc - a * db / (b * b);
      return acc;
    }
    case ExprKind::Power: {
      FormExpr de = dexpr(n.children[0], wrt, direction);
      if (de.is_zero()) return de;
      return constant(n.exponent) * pow(n.children[0], n.exponent - 1) * de;
    }
  }
  throw Error("gateaux_derivative: unknown node kind");
}

}  // namespace

FormExpr gateaux_derivative(const FormExpr& form, const Coefficient& wrt,
                            const FormExpr& direction) {
  if (!form.valid() || !direction.valid()) throw Error("gateaux_derivative: invalid expression");
  if (!wrt.space) throw Error("gateaux_derivative: unbound coefficient handle");
  const ExprKind dk = direction.kind();
  if (dk != ExprKind::TrialFunction && dk != ExprKind::TestFunction &&
      dk != ExprKind::Coefficient)
    throw Error(
        "gateaux_derivative: direction must be a trial, test or coefficient terminal");
  if (*direction.node().space != *wrt.space)
    throw SpaceMismatch("gateaux_derivative: direction space differs from differentiation space");
  return dexpr(form, wrt.id, direction);
}

namespace {

FormExpr swap_roles(const FormExpr& e) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprKind::TrialFunction:
      return test_function(n.space, n.component);
    case ExprKind::TestFunction:
      return trial(n.space, n.component);
    case ExprKind::Constant:
    case ExprKind::Coefficient:
      return e;
    default:
      break;
  }
  ExprNode out;
  out.kind = n.kind;
  out.value = n.value;
  out.exponent = n.exponent;
  out.symbol = n.symbol;
  out.name = n.name;
  out.space = n.space;
  out.component = n.component;
  out.children.reserve(n.children.size());
  for (const auto& c : n.children) out.children.push_back(swap_roles(c));
  return FormExpr(make_node(std::move(out)));
}

}  // namespace

FormExpr adjoint_form(const FormExpr& form) {
  if (arity(form) != 2) throw ArityError("adjoint_form: requires a bilinear form");
  return swap_roles(form);
}

namespace {

FormExpr replace_node(const FormExpr& e, const std::map<SymbolId, FormExpr>& mapping) {
  const ExprNode& n = e.node();
  if (n.kind == ExprKind::Coefficient) {
    auto it = mapping.find(n.symbol);
    if (it == mapping.end()) return e;
    const ExprNode& t = it->second.node();
    if (t.kind != ExprKind::Coefficient && t.kind != ExprKind::TrialFunction)
      throw Error("replace: replacement must be a coefficient or trial terminal");
    if (*t.space != *n.space)
      throw SpaceMismatch("replace: replacement space differs from original");
    if (t.kind == ExprKind::TrialFunction) return trial(t.space, n.component);
    Coefficient c{t.symbol, t.space, t.name};
    return coefficient(c, n.component);
  }
  if (n.children.empty()) return e;
  ExprNode out;
  out.kind = n.kind;
  out.value = n.value;
  out.exponent = n.exponent;
  out.symbol = n.symbol;
  out.name = n.name;
  out.space = n.space;
  out.component = n.component;
  out.children.reserve(n.children.size());
  for (const auto& c : n.children) out.children.push_back(replace_node(c, mapping));
  return FormExpr(make_node(std::move(out)));
}

}  // namespace

FormExpr replace(const FormExpr& form, const std::map<SymbolId, FormExpr>& mapping) {
  if (!form.valid()) throw Error("replace: invalid expression");
  return replace_node(form, mapping);
}

namespace {

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Sum:
      return 1;
    case ExprKind::Negation:
      return 2;
    case ExprKind::Product:
    case ExprKind::Quotient:
      return 3;
    case ExprKind::Power:
      return 4;
    default:
      return 5;
  }
}

std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string print(const FormExpr& e, int parent_prec) {
  const ExprNode& n = e.node();
  std::string s;
  switch (n.kind) {
    case ExprKind::Constant:
      s = fmt_number(n.value);
      break;
    case ExprKind::TrialFunction:
      s = "trial";
      break;
    case ExprKind::TestFunction:
      s = "test";
      break;
    case ExprKind::Coefficient:
      s = n.name.empty() ? "c" + std::to_string(n.symbol) : n.name;
      break;
    case ExprKind::SpatialDerivative:
      return "dx(" + print(n.children[0], 0) + ")";
    case ExprKind::Sum: {
      for (size_t i = 0; i < n.children.size(); ++i) {
        const auto& c = n.children[i];
        if (i == 0) {
          s = print(c, precedence(ExprKind::Sum));
        } else if (c.kind() == ExprKind::Negation) {
          s += " - " + print(c.children()[0], precedence(ExprKind::Sum) + 1);
        } else {
          s += " + " + print(c, precedence(ExprKind::Sum));
        }
      }
      break;
    }
    case ExprKind::Product: {
      for (size_t i = 0; i < n.children.size(); ++i) {
        if (i) s += "*";
        s += print(n.children[i], precedence(ExprKind::Product));
      }
      break;
    }
    case ExprKind::Quotient:
      s = print(n.children[0], precedence(ExprKind::Quotient)) + "/" +
          print(n.children[1], precedence(ExprKind::Quotient) + 1);
      break;
    case ExprKind::Power:
      s = print(n.children[0], precedence(ExprKind::Power) + 1) + "^" +
          std::to_string(n.exponent);
      break;
    case ExprKind::Negation:
      s = "-" + print(n.children[0], precedence(ExprKind::Negation));
      break;
  }
  if ((n.kind == ExprKind::TrialFunction || n.kind == ExprKind::TestFunction ||
       n.kind == ExprKind::Coefficient) &&
      n.space && n.space->components() > 1)
    s += "[" + std::to_string(n.component) + "]";
  if (precedence(n.kind) < parent_prec) return "(" + s + ")";
  return s;
}

}  // namespace

std::string to_string(const FormExpr& form) {
  if (!form.valid()) return "<null>";
  return print(form, 0);
}

}  // namespace gst
