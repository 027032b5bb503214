#include "gst/io.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace gst {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::string hash_hex(std::uint64_t hash) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string output_stamp(const Config& config) {
  return "# config=" + hash_hex(config_hash(config)) + " seed=" + std::to_string(config.seed);
}

void write_triplets_csv(const std::string& path, const Config& config,
                        const std::vector<SingularTriplet>& triplets) {
  auto out = open_out(path);
  out << output_stamp(config) << "\n";
  out << "index,sigma,mu,residual\n";
  for (size_t i = 0; i < triplets.size(); ++i)
    out << i << "," << fmt(triplets[i].sigma) << "," << fmt(triplets[i].mu) << ","
        << fmt(triplets[i].residual) << "\n";
}

void write_vector_csv(const std::string& path, const Config& config,
                      const FunctionSpace& space, const Vector& dofs) {
  if (dofs.size() != space.dof_count())
    throw DimensionMismatch("write_vector_csv: dof vector does not match the space");
  auto out = open_out(path);
  out << output_stamp(config) << "\n";
  out << "node,x";
  for (int c = 0; c < space.components(); ++c) out << ",c" << c;
  out << "\n";
  for (int n = 0; n < space.n_nodes(); ++n) {
    out << n << "," << fmt(space.node_coord(n));
    for (int c = 0; c < space.components(); ++c) out << "," << fmt(dofs[space.dof(n, c)]);
    out << "\n";
  }
}

void write_growth_csv(const std::string& path, const Config& config, const GrowthCurve& curve) {
  auto out = open_out(path);
  out << output_stamp(config) << "\n";
  out << "step,time,gain\n";
  for (size_t k = 0; k < curve.gain.size(); ++k)
    out << k << "," << fmt(curve.time[k]) << "," << fmt(curve.gain[k]) << "\n";
}

void write_taylor_csv(const std::string& path, const Config& config,
                      const std::vector<std::pair<std::string, TaylorReport>>& reports) {
  auto out = open_out(path);
  out << output_stamp(config) << "\n";
  out << "mode,h,r1,r2,floored1,floored2\n";
  for (const auto& [mode, rep] : reports)
    for (const auto& s : rep.samples)
      out << mode << "," << fmt(s.h) << "," << fmt(s.r1) << "," << fmt(s.r2) << ","
          << (s.floored1 ? 1 : 0) << "," << (s.floored2 ? 1 : 0) << "\n";
  for (const auto& [mode, rep] : reports)
    out << "# mode=" << mode << " order1=" << fmt(rep.order1) << " order2="
        << fmt(rep.order2) << " pass1=" << (rep.pass1 ? 1 : 0) << " pass2="
        << (rep.pass2 ? 1 : 0) << "\n";
}

void write_run_json(const std::string& path, const Config& config, const ModelSpec& model,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["schema_version"] = config.schema_version;
  j["config"] = nlohmann::json::parse(config_json(config));
  j["config_hash"] = hash_hex(config_hash(config));
  j["seed"] = config.seed;
  j["model"] = model.name;
  j["resolved"]["dt"] = model.dt;
  j["resolved"]["n_steps"] = model.n_steps;
  j["resolved"]["n_cells"] = model.mesh->n_cells();
  j["resolved"]["state_dofs"] = model.state_space->dof_count();
  j["resolved"]["input_dofs"] = model.input_space->dof_count();
  j["resolved"]["output_dofs"] = model.output_space->dof_count();
  for (const auto& [key, value] : model.params) j["resolved"][key] = value;
  j["tolerances"]["lanczos_tol"] = config.tol;
  j["outputs"] = outputs;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace gst
