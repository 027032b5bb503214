#include "gst/lanczos.hpp"

#include <algorithm>

#include "gst/rng.hpp"

namespace gst {

namespace {

struct Basis {
  Matrix V;   // B-orthonormal columns
  Matrix BV;  // B applied to each column
  int size = 0;

  void set(int j, const Vector& v, const Vector& bv) {
    V.col(j) = v;
    BV.col(j) = bv;
    size = std::max(size, j + 1);
  }
};

}  // namespace

std::vector<RitzPair> lanczos_thick_restart(const SelfAdjointOperator& op,
                                            const LanczosParams& params) {
  const int n = op.dim;
  if (n < 1) throw Error("lanczos_thick_restart: empty operator");
  if (!op.apply) throw Error("lanczos_thick_restart: operator has no action");
  const int nev = std::min(params.nev, n);
  if (nev < 1) throw Error("lanczos_thick_restart: nev must be positive");
  int ncv = params.ncv > 0 ? params.ncv : std::max(2 * nev + 2, 12);
  ncv = std::min(ncv, n);
  ncv = std::max(ncv, std::min(n, nev + 1));

  auto weigh = [&](const Vector& x) { return op.weight ? op.weight(x) : x; };
  auto b_norm = [&](const Vector& x, const Vector& bx) {
    return std::sqrt(std::max(0.0, x.dot(bx)));
  };

  std::mt19937_64 rng(params.seed);

  Basis basis;
  basis.V.setZero(n, ncv + 1);
  basis.BV.setZero(n, ncv + 1);
  Matrix T = Matrix::Zero(ncv, ncv);

  // Start vector.
  {
    Vector v0 = random_vector(n, rng, -1.0, 1.0);
    Vector bv0 = weigh(v0);
    const double nrm = b_norm(v0, bv0);
    if (nrm <= 0.0) throw InvalidInnerProduct("lanczos_thick_restart: start vector has zero B-norm");
    basis.set(0, v0 / nrm, bv0 / nrm);
  }

  int kept = 0;          // columns carried over by the last restart
  double beta_last = 0;  // coupling of the residual column
  double scale_est = 1.0;
  int fresh_used = 0;

  Eigen::SelfAdjointEigenSolver<Matrix> eig;

  auto ritz_sorted = [&](int m) {
    // Eigen returns ascending eigenvalues; we want leading (largest) first.
    eig.compute(T.topLeftCorner(m, m));
    if (eig.info() != Eigen::Success)
      throw Error("lanczos_thick_restart: dense eigensolve on the projected matrix failed");
  };

  auto extract = [&](int m, int count, double beta) {
    std::vector<RitzPair> out;
    const auto& vals = eig.eigenvalues();
    const auto& vecs = eig.eigenvectors();
    for (int i = 0; i < count; ++i) {
      const int col = m - 1 - i;  // descending
      RitzPair p;
      p.mu = vals[col];
      p.v = basis.V.leftCols(m) * vecs.col(col);
      p.residual = std::abs(beta * vecs(m - 1, col));
      // Guard the B-normalisation against accumulated drift.
      Vector bv = weigh(p.v);
      const double nrm = b_norm(p.v, bv);
      if (nrm > 0) p.v /= nrm;
      out.push_back(std::move(p));
    }
    return out;
  };

  for (int restart = 0; restart <= params.max_restarts; ++restart) {
    // Extend the basis to ncv columns.
    int j = basis.size - 1;
    bool broke_down = false;
    while (j < ncv) {
      Vector w = op.apply(basis.V.col(j));
      // Two passes of classical Gram-Schmidt against the whole basis.
      Vector h = basis.BV.leftCols(j + 1).transpose() * w;
      w.noalias() -= basis.V.leftCols(j + 1) * h;
      Vector h2 = basis.BV.leftCols(j + 1).transpose() * w;
      w.noalias() -= basis.V.leftCols(j + 1) * h2;
      h += h2;
      T.col(j).head(j + 1) = h;
      T.row(j).head(j + 1) = h.transpose();
      scale_est = std::max({scale_est, h.cwiseAbs().maxCoeff()});

      Vector bw = weigh(w);
      const double beta = b_norm(w, bw);
      if (beta > 1e-13 * scale_est) {
        beta_last = beta;
        if (j + 1 < ncv) {
          T(j + 1, j) = T(j, j + 1) = beta;
        }
        basis.set(j + 1, w / beta, bw / beta);
        ++j;
        continue;
      }

      // Invariant subspace: Ritz pairs of the current basis are exact.
      const int m = j + 1;
      ritz_sorted(m);
      if (m >= nev) return extract(m, nev, 0.0);
      if (m == n) return extract(m, m, 0.0);
      if (++fresh_used > 3)
        throw BreakdownError("lanczos_thick_restart: repeated breakdown, subspace exhausted");
      // Continue with a fresh random direction, B-orthogonalised; the zero
      // off-diagonal keeps the projected matrix exact.
      Vector f = random_vector(n, rng, -1.0, 1.0);
      for (int pass = 0; pass < 2; ++pass) {
        Vector hf = basis.BV.leftCols(m).transpose() * f;
        f.noalias() -= basis.V.leftCols(m) * hf;
      }
      Vector bf = weigh(f);
      const double fn = b_norm(f, bf);
      if (fn <= 1e-13 * scale_est)
        throw BreakdownError("lanczos_thick_restart: could not generate a fresh direction");
      beta_last = 0.0;
      if (j + 1 < ncv) T(j + 1, j) = T(j, j + 1) = 0.0;
      basis.set(j + 1, f / fn, bf / fn);
      ++j;
      broke_down = true;
    }

    // Rayleigh-Ritz on the full window.
    ritz_sorted(ncv);
    const auto& vals = eig.eigenvalues();
    const auto& vecs = eig.eigenvectors();

    int converged = 0;
    for (int i = 0; i < nev; ++i) {
      const int col = ncv - 1 - i;
      const double res = std::abs(beta_last * vecs(ncv - 1, col));
      if (res <= params.tol * std::max(std::abs(vals[col]), 1.0))
        ++converged;
      else
        break;
    }
    if (converged == nev || restart == params.max_restarts) {
      if (converged < nev) {
        double worst = 0.0;
        for (int i = 0; i < nev; ++i)
          worst = std::max(worst, std::abs(beta_last * vecs(ncv - 1, ncv - 1 - i)));
        throw EigensolverError("lanczos_thick_restart: max_restarts exceeded", restart, worst);
      }
      return extract(ncv, nev, beta_last);
    }
    (void)broke_down;

    // Thick restart: carry the leading Ritz vectors plus the residual
    // direction; the projected matrix becomes diagonal with an arrowhead.
    const int keep = std::min(ncv - 2, std::max(nev + 1, ncv / 2));
    Matrix Y(ncv, keep);
    Vector theta(keep), arrow(keep);
    for (int i = 0; i < keep; ++i) {
      const int col = ncv - 1 - i;
      Y.col(i) = vecs.col(col);
      theta[i] = vals[col];
      arrow[i] = beta_last * vecs(ncv - 1, col);
    }
    Matrix Vk = basis.V.leftCols(ncv) * Y;
    Matrix BVk = basis.BV.leftCols(ncv) * Y;
    Vector vres = basis.V.col(ncv);
    Vector bvres = basis.BV.col(ncv);

    basis.V.leftCols(keep) = Vk;
    basis.BV.leftCols(keep) = BVk;
    basis.V.col(keep) = vres;
    basis.BV.col(keep) = bvres;
    basis.size = keep + 1;

    T.setZero();
    for (int i = 0; i < keep; ++i) {
      T(i, i) = theta[i];
      T(i, keep) = T(keep, i) = arrow[i];
    }
  }
  throw EigensolverError("lanczos_thick_restart: unreachable", params.max_restarts, 0.0);
}

std::vector<RitzPair> lanczos_thick_restart(const GstOperator& G, const LanczosParams& params) {
  SelfAdjointOperator op;
  op.dim = G.dim();
  op.apply = [&G](const Vector& x) { return G.apply(x); };
  op.weight = [&G](const Vector& x) { return G.weigh_initial(x); };
  return lanczos_thick_restart(op, params);
}

}  // namespace gst
