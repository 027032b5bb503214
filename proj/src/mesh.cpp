#include "gst/mesh.hpp"

namespace gst {

IntervalMesh::IntervalMesh(double a, double b, int n_cells, bool periodic)
    : a_(a), b_(b), n_cells_(n_cells), periodic_(periodic) {
  if (!(b > a)) throw Error("IntervalMesh: requires b > a");
  if (n_cells < 1) throw Error("IntervalMesh: requires n_cells >= 1");
  if (periodic && n_cells < 2) throw Error("IntervalMesh: periodic mesh needs n_cells >= 2");
  h_ = (b - a) / n_cells;
}

bool IntervalMesh::same_as(const IntervalMesh& other) const {
  return a_ == other.a_ && b_ == other.b_ && n_cells_ == other.n_cells_ &&
         periodic_ == other.periodic_;
}

MeshPtr make_mesh(double a, double b, int n_cells, bool periodic) {
  return std::make_shared<IntervalMesh>(a, b, n_cells, periodic);
}

FunctionSpace::FunctionSpace(MeshPtr mesh, Element element, int components)
    : mesh_(std::move(mesh)), element_(element), components_(components) {
  if (!mesh_) throw Error("FunctionSpace: null mesh");
  if (components < 1) throw Error("FunctionSpace: components must be positive");
}

int FunctionSpace::n_nodes() const {
  const int nc = mesh_->n_cells();
  if (element_ == Element::P1) return mesh_->n_vertices();
  return mesh_->periodic() ? 2 * nc : 2 * nc + 1;
}

double FunctionSpace::node_coord(int node) const {
  if (element_ == Element::P1) return mesh_->a() + node * mesh_->h();
  return mesh_->a() + node * mesh_->h() / 2.0;
}

void FunctionSpace::cell_nodes(int cell, int* out) const {
  const int nn = n_nodes();
  if (element_ == Element::P1) {
    out[0] = cell;
    out[1] = (cell + 1) % nn;  // wraps only when periodic: nn == n_cells
    if (!mesh_->periodic()) out[1] = cell + 1;
  } else {
    out[0] = 2 * cell;
    out[1] = 2 * cell + 1;
    out[2] = mesh_->periodic() ? (2 * cell + 2) % nn : 2 * cell + 2;
  }
}

bool FunctionSpace::operator==(const FunctionSpace& other) const {
  return mesh_->same_as(*other.mesh_) && element_ == other.element_ &&
         components_ == other.components_;
}

SpacePtr make_space(MeshPtr mesh, Element element, int components) {
  return std::make_shared<FunctionSpace>(std::move(mesh), element, components);
}

std::vector<int> bc_dofs(const FunctionSpace& space, const DirichletBC& bc) {
  if (space.mesh()->periodic())
    throw InvalidBC("bc_dofs: Dirichlet conditions are invalid on periodic meshes");
  if (bc.component < 0 || bc.component >= space.components())
    throw InvalidBC("bc_dofs: component out of range");
  std::vector<int> dofs;
  if (bc.where == Boundary::Left || bc.where == Boundary::Both)
    dofs.push_back(space.dof(0, bc.component));
  if (bc.where == Boundary::Right || bc.where == Boundary::Both)
    dofs.push_back(space.dof(space.n_nodes() - 1, bc.component));
  return dofs;
}

void interpolate(const FunctionSpace& space, const std::function<double(double)>& f,
                 int component, std::vector<double>& dofs) {
  if (component < 0 || component >= space.components())
    throw Error("interpolate: component out of range");
  dofs.resize(static_cast<size_t>(space.dof_count()), 0.0);
  for (int n = 0; n < space.n_nodes(); ++n)
    dofs[space.dof(n, component)] = f(space.node_coord(n));
}

}  // namespace gst
