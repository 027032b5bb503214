#include "gst/compute_gst.hpp"

#include <cmath>

namespace gst {

std::vector<SingularTriplet> singular_triplets(const LinearOperator& L, const GstOperator& G,
                                               int nev, const LanczosParams& params) {
  LanczosParams p = params;
  p.nev = nev;
  auto pairs = lanczos_thick_restart(G, p);

  std::vector<SingularTriplet> out;
  out.reserve(pairs.size());
  for (auto& pair : pairs) {
    SingularTriplet t;
    t.mu = pair.mu;
    t.residual = pair.residual;
    t.sigma = std::sqrt(std::max(pair.mu, 0.0));
    t.v = std::move(pair.v);
    Vector lv = L.apply(t.v);
    const double nrm = G.norm_final(lv);
    if (nrm > 1e-140 && t.sigma > 0.0)
      t.u = lv / nrm;
    else
      t.u = Vector::Zero(L.out_dim);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<SingularTriplet> singular_triplets(const LinearOperator& L, int nev,
                                               const LanczosParams& params) {
  GstOperator G = gst_operator(L);
  return singular_triplets(L, G, nev, params);
}

}  // namespace gst
