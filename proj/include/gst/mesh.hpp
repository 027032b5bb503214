#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gst/errors.hpp"

namespace gst {

/// Uniform 1D interval mesh. Periodic meshes identify the right endpoint
/// with the left one, so they carry n_cells vertices instead of n_cells+1.
class IntervalMesh {
 public:
  IntervalMesh(double a, double b, int n_cells, bool periodic = false);

  double a() const { return a_; }
  double b() const { return b_; }
  int n_cells() const { return n_cells_; }
  bool periodic() const { return periodic_; }
  double h() const { return h_; }

  int n_vertices() const { return periodic_ ? n_cells_ : n_cells_ + 1; }
  double vertex(int i) const { return a_ + i * h_; }

  bool same_as(const IntervalMesh& other) const;

 private:
  double a_, b_;
  int n_cells_;
  bool periodic_;
  double h_;
};

using MeshPtr = std::shared_ptr<const IntervalMesh>;

MeshPtr make_mesh(double a, double b, int n_cells, bool periodic = false);

enum class Element { P1, P2 };

/// Lagrange space on an IntervalMesh. Scalar nodes are ordered by
/// coordinate; vector-valued spaces interleave components per node,
/// dof = node * components + component.
class FunctionSpace {
 public:
  FunctionSpace(MeshPtr mesh, Element element, int components = 1);

  const MeshPtr& mesh() const { return mesh_; }
  Element element() const { return element_; }
  int components() const { return components_; }

  int order() const { return element_ == Element::P1 ? 1 : 2; }
  int nodes_per_cell() const { return order() + 1; }
  int n_nodes() const;
  int dof_count() const { return n_nodes() * components_; }
  double node_coord(int node) const;

  /// Global scalar-node ids of a cell, left to right (periodic wrap).
  void cell_nodes(int cell, int* out) const;

  int dof(int node, int component) const { return node * components_ + component; }

  bool operator==(const FunctionSpace& other) const;
  bool operator!=(const FunctionSpace& other) const { return !(*this == other); }

 private:
  MeshPtr mesh_;
  Element element_;
  int components_;
};

using SpacePtr = std::shared_ptr<const FunctionSpace>;

SpacePtr make_space(MeshPtr mesh, Element element, int components = 1);

enum class Boundary { Left, Right, Both };

/// Strong Dirichlet condition on one sub-component at interval endpoints.
/// The value is a function of x so one object can serve both ends; it must
/// not depend on the model input.
struct DirichletBC {
  Boundary where = Boundary::Both;
  int component = 0;
  std::function<double(double)> value = [](double) { return 0.0; };

  DirichletBC homogenised() const {
    DirichletBC bc = *this;
    bc.value = [](double) { return 0.0; };
    return bc;
  }
};

/// Constrained dof indices for a bc on a space. Throws InvalidBC for
/// periodic meshes or out-of-range components.
std::vector<int> bc_dofs(const FunctionSpace& space, const DirichletBC& bc);

/// Interpolate f(x) into the nodal dofs of one component.
void interpolate(const FunctionSpace& space, const std::function<double(double)>& f,
                 int component, std::vector<double>& dofs);

}  // namespace gst
