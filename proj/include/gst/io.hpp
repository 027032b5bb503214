#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gst/compute_gst.hpp"
#include "gst/config.hpp"
#include "gst/verification.hpp"

namespace gst {

/// First line of every output file: "# config=<16 hex digits> seed=<seed>".
/// Identical configuration and seed therefore produce bit-identical files.
std::string output_stamp(const Config& config);

std::string hash_hex(std::uint64_t hash);

/// index,sigma,mu,residual rows, one per triplet.
void write_triplets_csv(const std::string& path, const Config& config,
                        const std::vector<SingularTriplet>& triplets);

/// node,x then one column per component of the field.
void write_vector_csv(const std::string& path, const Config& config,
                      const FunctionSpace& space, const Vector& dofs);

/// step,time,gain rows.
void write_growth_csv(const std::string& path, const Config& config, const GrowthCurve& curve);

/// mode,h,r1,r2,floored1,floored2 rows plus per-mode summary comments.
void write_taylor_csv(const std::string& path, const Config& config,
                      const std::vector<std::pair<std::string, TaylorReport>>& reports);

/// Machine-readable run manifest: configuration, its hash, resolved model
/// dimensions and the list of files written. Deliberately nothing
/// time-dependent, so reruns are byte-identical.
void write_run_json(const std::string& path, const Config& config, const ModelSpec& model,
                    const std::vector<std::string>& outputs);

}  // namespace gst
