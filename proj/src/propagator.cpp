#include "gst/propagator.hpp"

namespace gst {

LinearOperator propagator_from_tape(const Tape& tape) {
  return propagator_from_linearizer(std::make_shared<TapeLinearizer>(tape));
}

LinearOperator propagator_from_linearizer(std::shared_ptr<const TapeLinearizer> lin) {
  LinearOperator L;
  L.in_dim = lin->input_dim();
  L.out_dim = lin->output_dim();
  L.in_space = lin->tape().input_space();
  L.out_space = lin->tape().output_space();
  L.apply = [lin](const Vector& x) { return lin->apply_tlm(x); };
  L.apply_adjoint = [lin](const Vector& w) { return lin->apply_adjoint(w); };
  return L;
}

Matrix dense_operator(const LinearOperator& L, int max_dim) {
  if (L.in_dim > max_dim || L.out_dim > max_dim)
    throw Error("dense_operator: operator exceeds the dense-dump guard");
  Matrix M(L.out_dim, L.in_dim);
  Vector e = Vector::Zero(L.in_dim);
  for (int j = 0; j < L.in_dim; ++j) {
    e[j] = 1.0;
    M.col(j) = L.apply(e);
    e[j] = 0.0;
  }
  return M;
}

namespace {

void check_spd_probe(const SpMat& X, const char* which) {
  if (X.rows() != X.cols()) throw InvalidInnerProduct(std::string(which) + ": not square");
  auto abs_sum = [](const SpMat& m) {
    return m.nonZeros() == 0
               ? 0.0
               : Eigen::Map<const Vector>(m.valuePtr(), m.nonZeros()).cwiseAbs().sum();
  };
  const SpMat diff = SpMat(X.transpose()) - X;
  const double asym = abs_sum(diff);
  const double scale = abs_sum(X);
  if (asym > 1e-12 * (scale > 0 ? scale : 1.0))
    throw InvalidInnerProduct(std::string(which) + ": not symmetric");
}

}  // namespace

GstOperator::GstOperator(LinearOperator L, SpMat X_I, SpMat X_F)
    : L_(std::move(L)), X_I_(std::move(X_I)), X_F_(std::move(X_F)) {
  if (!L_.apply || !L_.apply_adjoint)
    throw Error("GstOperator: propagator must provide apply and apply_adjoint");
  if (X_I_.rows() != L_.in_dim)
    throw DimensionMismatch("GstOperator: X_I does not match the input dimension");
  if (X_F_.rows() != L_.out_dim)
    throw DimensionMismatch("GstOperator: X_F does not match the output dimension");
  check_spd_probe(X_I_, "GstOperator: X_I");
  check_spd_probe(X_F_, "GstOperator: X_F");
  xi_solver_ = std::make_shared<SpdSolver>(X_I_);  // throws InvalidInnerProduct if not SPD
  SpdSolver probe_f(X_F_);                         // definiteness check only
}

Vector GstOperator::apply(const Vector& x) const {
  if (x.size() != L_.in_dim) throw DimensionMismatch("GstOperator::apply: wrong length");
  return xi_solver_->solve(L_.apply_adjoint(X_F_ * L_.apply(x)));
}

double GstOperator::norm_initial(const Vector& x) const {
  return std::sqrt(std::max(0.0, x.dot(X_I_ * x)));
}

double GstOperator::norm_final(const Vector& x) const {
  return std::sqrt(std::max(0.0, x.dot(X_F_ * x)));
}

GstOperator gst_operator(LinearOperator L, std::optional<SpMat> X_I, std::optional<SpMat> X_F) {
  if (!X_I) {
    if (!L.in_space) throw Error("gst_operator: no X_I given and no input space to default to");
    X_I = mass_matrix(*L.in_space);
  }
  if (!X_F) {
    if (!L.out_space) throw Error("gst_operator: no X_F given and no output space to default to");
    X_F = mass_matrix(*L.out_space);
  }
  return GstOperator(std::move(L), std::move(*X_I), std::move(*X_F));
}

}  // namespace gst
