#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gst/mesh.hpp"

namespace gst {

/// Identity of a discrete field on the tape. Values are bound separately;
/// the handle itself is just (id, space, name).
using SymbolId = int;

struct Coefficient {
  SymbolId id = -1;
  SpacePtr space;
  std::string name;
};

/// Fresh process-wide symbol id.
SymbolId fresh_symbol();

Coefficient make_coefficient(SpacePtr space, std::string name);

enum class ExprKind {
  Constant,
  TrialFunction,
  TestFunction,
  Coefficient,
  SpatialDerivative,
  Sum,
  Product,
  Quotient,
  Power,
  Negation,
};

class FormExpr;

/// Immutable expression node. Terminals on vector-valued spaces select one
/// component; every expression is scalar-valued.
struct ExprNode {
  ExprKind kind;
  double value = 0.0;     // Constant
  int exponent = 0;       // Power
  SymbolId symbol = -1;   // Coefficient
  std::string name;       // Coefficient display name
  SpacePtr space;         // terminals
  int component = 0;      // terminals
  std::vector<FormExpr> children;
  bool has_trial = false;
  bool has_test = false;
};

/// Value-semantic handle to a shared immutable expression tree.
class FormExpr {
 public:
  FormExpr() = default;
  explicit FormExpr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

  bool valid() const { return node_ != nullptr; }
  const ExprNode& node() const { return *node_; }
  const std::shared_ptr<const ExprNode>& ptr() const { return node_; }

  ExprKind kind() const { return node_->kind; }
  const std::vector<FormExpr>& children() const { return node_->children; }
  bool has_trial() const { return node_->has_trial; }
  bool has_test() const { return node_->has_test; }
  bool is_zero() const;

 private:
  std::shared_ptr<const ExprNode> node_;
};

FormExpr constant(double value);
FormExpr trial(SpacePtr space, int component = 0);
FormExpr test_function(SpacePtr space, int component = 0);
FormExpr coefficient(const Coefficient& c, int component = 0);
FormExpr deriv(const FormExpr& e);
FormExpr pow(const FormExpr& e, int exponent);

FormExpr operator+(const FormExpr& a, const FormExpr& b);
FormExpr operator-(const FormExpr& a, const FormExpr& b);
FormExpr operator*(const FormExpr& a, const FormExpr& b);
FormExpr operator/(const FormExpr& a, const FormExpr& b);
FormExpr operator-(const FormExpr& a);

inline FormExpr operator*(double a, const FormExpr& b) { return constant(a) * b; }
inline FormExpr operator*(const FormExpr& a, double b) { return a * constant(b); }
inline FormExpr operator/(const FormExpr& a, double b) { return a / constant(b); }
inline FormExpr operator+(const FormExpr& a, double b) { return a + constant(b); }
inline FormExpr operator-(double a, const FormExpr& b) { return constant(a) - b; }
inline FormExpr operator-(const FormExpr& a, double b) { return a - constant(b); }

/// 0 = functional, 1 = linear (test only), 2 = bilinear (trial and test).
int arity(const FormExpr& form);

bool contains_symbol(const FormExpr& form, SymbolId id);

/// Distinct coefficient symbols appearing in the form.
std::vector<SymbolId> symbols(const FormExpr& form);

/// Space of the trial (resp. test) terminals, null if none. Mixed spaces
/// for the same role raise SpaceMismatch.
SpacePtr trial_space(const FormExpr& form);
SpacePtr test_space(const FormExpr& form);

/// Directional derivative of `form` with respect to the coefficient `wrt`,
/// in the direction `direction` (a trial() or coefficient() terminal of the
/// same space). Every occurrence of a component of `wrt` is replaced via
/// the product/quotient/power rules; d/dx commutes with the derivative.
FormExpr gateaux_derivative(const FormExpr& form, const Coefficient& wrt,
                            const FormExpr& direction);

/// Swap trial and test terminals of a bilinear form. The assembled matrix
/// of the result is exactly the transpose of the input's.
FormExpr adjoint_form(const FormExpr& form);

/// Structural substitution of coefficient symbols by other terminals
/// (coefficients or trial functions) on matching spaces.
FormExpr replace(const FormExpr& form, const std::map<SymbolId, FormExpr>& mapping);

std::string to_string(const FormExpr& form);

}  // namespace gst
