#include "gst/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gst {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "schema_version", "model",   "n_cells",  "element",      "dt",
    "n_steps",        "viscosity", "scheme", "s",            "lambda",
    "mobility",       "theta",   "diffusivity", "nev",       "ncv",
    "tol",            "max_restarts", "seed", "out_dir"};

template <typename T>
T expect(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: wrong type for key '" + key + "'", key);
  }
}

template <typename T>
void take(const json& j, const std::string& key, T& out) {
  if (j.contains(key)) out = expect<T>(j, key);
}

template <typename T>
void take(const json& j, const std::string& key, std::optional<T>& out) {
  if (j.contains(key)) out = expect<T>(j, key);
}

void require_positive(double v, const std::string& key) {
  if (!(v > 0.0)) throw ConfigError("config: '" + key + "' must be positive", key);
}

}  // namespace

Config parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");

  for (const auto& item : j.items())
    if (!kKnownKeys.count(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "'", item.key());

  Config c;
  take(j, "schema_version", c.schema_version);
  if (c.schema_version != 1)
    throw ConfigError("config: unsupported schema_version", "schema_version");
  take(j, "model", c.model);
  take(j, "n_cells", c.n_cells);
  take(j, "element", c.element);
  take(j, "dt", c.dt);
  take(j, "n_steps", c.n_steps);
  take(j, "viscosity", c.viscosity);
  take(j, "scheme", c.scheme);
  take(j, "s", c.s);
  take(j, "lambda", c.lambda);
  take(j, "mobility", c.mobility);
  take(j, "theta", c.theta);
  take(j, "diffusivity", c.diffusivity);
  take(j, "nev", c.nev);
  take(j, "ncv", c.ncv);
  take(j, "tol", c.tol);
  take(j, "max_restarts", c.max_restarts);
  take(j, "seed", c.seed);
  take(j, "out_dir", c.out_dir);

  if (c.n_cells && *c.n_cells < 1)
    throw ConfigError("config: 'n_cells' must be at least 1", "n_cells");
  if (c.element && *c.element != "P1" && *c.element != "P2")
    throw ConfigError("config: 'element' must be \"P1\" or \"P2\"", "element");
  if (c.dt) require_positive(*c.dt, "dt");
  if (c.n_steps && *c.n_steps < 1)
    throw ConfigError("config: 'n_steps' must be at least 1", "n_steps");
  if (c.scheme && *c.scheme != "implicit_euler" && *c.scheme != "trapezoidal")
    throw ConfigError("config: 'scheme' must be \"implicit_euler\" or \"trapezoidal\"",
                      "scheme");
  if (c.nev < 1) throw ConfigError("config: 'nev' must be at least 1", "nev");
  if (c.ncv < 0) throw ConfigError("config: 'ncv' must be non-negative", "ncv");
  require_positive(c.tol, "tol");
  if (c.max_restarts < 1)
    throw ConfigError("config: 'max_restarts' must be at least 1", "max_restarts");
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_json(const Config& c) {
  json j;  // nlohmann objects keep keys sorted, so the text is canonical
  j["schema_version"] = c.schema_version;
  j["model"] = c.model;
  if (c.n_cells) j["n_cells"] = *c.n_cells;
  if (c.element) j["element"] = *c.element;
  if (c.dt) j["dt"] = *c.dt;
  if (c.n_steps) j["n_steps"] = *c.n_steps;
  if (c.viscosity) j["viscosity"] = *c.viscosity;
  if (c.scheme) j["scheme"] = *c.scheme;
  if (c.s) j["s"] = *c.s;
  if (c.lambda) j["lambda"] = *c.lambda;
  if (c.mobility) j["mobility"] = *c.mobility;
  if (c.theta) j["theta"] = *c.theta;
  if (c.diffusivity) j["diffusivity"] = *c.diffusivity;
  j["nev"] = c.nev;
  j["ncv"] = c.ncv;
  j["tol"] = c.tol;
  j["max_restarts"] = c.max_restarts;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j.dump();
}

std::uint64_t config_hash(const Config& c) {
  const std::string text = config_json(c);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char byte : text) {
    h ^= byte;
    h *= 1099511628211ull;
  }
  return h;
}

ModelSpec make_model(const Config& c) {
  if (c.model == "burgers") {
    BurgersOptions o;
    if (c.n_cells) o.n_cells = *c.n_cells;
    if (c.element) o.element = *c.element == "P1" ? Element::P1 : Element::P2;
    if (c.viscosity) o.viscosity = *c.viscosity;
    if (c.dt) o.dt = *c.dt;
    if (c.n_steps) o.n_steps = *c.n_steps;
    if (c.scheme)
      o.scheme = *c.scheme == "trapezoidal" ? TimeScheme::Trapezoidal
                                            : TimeScheme::ImplicitEuler;
    return burgers_model(o);
  }
  if (c.model == "heat") {
    HeatOptions o;
    if (c.n_cells) o.n_cells = *c.n_cells;
    if (c.element) o.element = *c.element == "P1" ? Element::P1 : Element::P2;
    if (c.diffusivity) o.diffusivity = *c.diffusivity;
    if (c.dt) o.dt = *c.dt;
    if (c.n_steps) o.n_steps = *c.n_steps;
    return heat_model(o);
  }
  if (c.model == "gross_pitaevskii") {
    GrossPitaevskiiOptions o;
    if (c.n_cells) o.n_cells = *c.n_cells;
    if (c.dt) o.dt = *c.dt;
    if (c.n_steps) o.n_steps = *c.n_steps;
    if (c.s) o.s = *c.s;
    return gross_pitaevskii_model(o);
  }
  if (c.model == "cahn_hilliard") {
    CahnHilliardOptions o;
    if (c.n_cells) o.n_cells = *c.n_cells;
    if (c.dt) o.dt = *c.dt;
    if (c.n_steps) o.n_steps = *c.n_steps;
    if (c.lambda) o.lambda = *c.lambda;
    if (c.mobility) o.mobility = *c.mobility;
    if (c.theta) o.theta = *c.theta;
    return cahn_hilliard_model(o);
  }
  throw UnknownModel("unknown model '" + c.model +
                     "'; bundled models: burgers, heat, gross_pitaevskii, cahn_hilliard");
}

LanczosParams lanczos_params(const Config& c) {
  LanczosParams p;
  p.nev = c.nev;
  p.ncv = c.ncv;
  p.tol = c.tol;
  p.max_restarts = c.max_restarts;
  p.seed = c.seed;
  return p;
}

}  // namespace gst
