#pragma once

#include <vector>

#include "gst/lanczos.hpp"
#include "gst/propagator.hpp"

namespace gst {

// One singular triplet of the propagator between weighted spaces:
//   L v = sigma u,  ||v||_{X_I} = 1,  ||u||_{X_F} = 1 (u is zero when sigma is).
// mu = sigma^2 is the Ritz value the pair was extracted from and residual its
// eigen-residual estimate in the X_I norm.
struct SingularTriplet {
  double sigma = 0.0;
  double mu = 0.0;
  Vector v;
  Vector u;
  double residual = 0.0;
};

// Leading nev singular triplets of L, ordered by descending sigma.
std::vector<SingularTriplet> singular_triplets(const LinearOperator& L, const GstOperator& G,
                                               int nev, const LanczosParams& params = {});

// Same, with the weights defaulting to the mass matrices of the operator's
// input and output spaces.
std::vector<SingularTriplet> singular_triplets(const LinearOperator& L, int nev,
                                               const LanczosParams& params = {});

}  // namespace gst
