#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gst/lanczos.hpp"
#include "gst/models.hpp"

namespace gst {

/// Flat run configuration. Optional fields fall back to the chosen model's
/// defaults; fields that do not apply to the chosen model are ignored.
/// Unknown keys in the JSON are rejected with the offending key named.
struct Config {
  int schema_version = 1;
  std::string model = "burgers";

  std::optional<int> n_cells;
  std::optional<std::string> element;  // "P1" or "P2"
  std::optional<double> dt;
  std::optional<int> n_steps;
  std::optional<double> viscosity;
  std::optional<std::string> scheme;  // "implicit_euler" or "trapezoidal"
  std::optional<double> s;
  std::optional<double> lambda;
  std::optional<double> mobility;
  std::optional<double> theta;
  std::optional<double> diffusivity;

  int nev = 5;
  int ncv = 0;  // 0 = automatic
  double tol = 1e-8;
  int max_restarts = 200;
  std::uint64_t seed = 20240801;
  std::string out_dir = "out";
};

/// Parse from JSON text / load from a file. Both throw ConfigError with the
/// offending key for unknown keys, wrong types, or out-of-range values.
Config parse_config(const std::string& json_text);
Config load_config(const std::string& path);

/// Canonical JSON serialisation (sorted keys, set fields only) and the
/// FNV-1a hash of that text, used to stamp every output file.
std::string config_json(const Config& config);
std::uint64_t config_hash(const Config& config);

/// Instantiate the bundled model the config names; UnknownModel otherwise.
ModelSpec make_model(const Config& config);

LanczosParams lanczos_params(const Config& config);

}  // namespace gst
