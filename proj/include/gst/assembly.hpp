#pragma once

#include <span>
#include <unordered_map>
#include <variant>

#include "gst/forms.hpp"
#include "gst/linalg.hpp"

namespace gst {

/// Dof vectors bound to coefficient symbols for evaluation.
class CoefficientBindings {
 public:
  void set(SymbolId id, Vector values) { values_[id] = std::move(values); }
  bool has(SymbolId id) const { return values_.count(id) != 0; }
  const Vector& get(SymbolId id) const;
  void erase(SymbolId id) { values_.erase(id); }

 private:
  std::unordered_map<SymbolId, Vector> values_;
};

/// Result of assembling a functional, linear, or bilinear form.
class AssembledValue {
 public:
  explicit AssembledValue(double s) : v_(s) {}
  explicit AssembledValue(Vector b) : v_(std::move(b)) {}
  explicit AssembledValue(SpMat A) : v_(std::move(A)) {}

  int arity() const { return static_cast<int>(v_.index()); }
  double scalar() const;
  const Vector& vector() const;
  const SpMat& matrix() const;

 private:
  std::variant<double, Vector, SpMat> v_;
};

/// Integrate `form` over the mesh with the fixed Gauss rule of degree
/// 2*order+1 (order = max element order among the form's spaces). Arity and
/// spaces are inferred from the terminals; a pure-constant functional needs
/// the explicit mesh argument.
AssembledValue assemble(const FormExpr& form, const CoefficientBindings& bindings,
                        MeshPtr mesh = nullptr);

/// Typed entry points with explicit spaces. Zero forms are legal and give
/// zero-filled results of the right dimensions; rectangular operators
/// (trial and test on different spaces over one mesh) are supported.
SpMat assemble_matrix(const FormExpr& form, const SpacePtr& test, const SpacePtr& trial,
                      const CoefficientBindings& bindings);
Vector assemble_vector(const FormExpr& form, const SpacePtr& test,
                       const CoefficientBindings& bindings);
double assemble_scalar(const FormExpr& form, const CoefficientBindings& bindings,
                       MeshPtr mesh = nullptr);

enum class BcMode { Full, Homogenised };

/// Row-replacement Dirichlet application: constrained rows of A become
/// identity rows and b entries become the bc value (Full) or zero
/// (Homogenised). Symmetry is not preserved.
void apply_bc(SpMat& A, Vector& b, const FunctionSpace& space,
              std::span<const DirichletBC> bcs, BcMode mode);

/// Identity rows only (matrix given, rhs handled by the caller).
void apply_bc_rows(SpMat& A, std::span<const int> dofs);

void zero_bc_entries(Vector& b, std::span<const int> dofs);

std::vector<int> collect_bc_dofs(const FunctionSpace& space, std::span<const DirichletBC> bcs);

/// Block-diagonal mass matrix: sum over components of the component-wise
/// L2 pairing. SPD for any space.
SpMat mass_matrix(const FunctionSpace& space);

/// Mass matrix of a single component's pairing on a vector-valued space
/// (positive semi-definite; used for component-restricted norms).
SpMat component_mass_matrix(const FunctionSpace& space, int component);

/// Gauss-Legendre rule on [0,1] exact for polynomials of degree 2n-1.
struct QuadRule {
  std::vector<double> points;
  std::vector<double> weights;
};
QuadRule gauss_rule(int n_points);

}  // namespace gst
