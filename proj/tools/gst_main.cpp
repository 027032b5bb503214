#include <chrono>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "gst/io.hpp"
#include "gst/rng.hpp"

namespace fs = std::filesystem;

namespace {

using namespace gst;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int cmd_forward(const Config& cfg, const ModelSpec& model) {
  auto tape = model.run(model.m0);
  const Vector& y = tape->record_of(tape->output()).state;
  fs::create_directories(cfg.out_dir);
  write_vector_csv(join(cfg.out_dir, "final_state.csv"), cfg, *model.output_space, y);
  write_run_json(join(cfg.out_dir, "run.json"), cfg, model,
                 {"final_state.csv", "run.json"});
  std::cout << model.name << ": " << model.n_steps << " steps of dt=" << model.dt
            << ", final state 2-norm " << y.norm() << "\n"
            << "wrote final_state.csv, run.json to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_gst(const Config& cfg, const ModelSpec& model) {
  auto tape = model.run(model.m0);
  LinearOperator L = propagator_from_tape(*tape);
  GstOperator G = gst_operator(L);
  auto triplets = singular_triplets(L, G, cfg.nev, lanczos_params(cfg));

  fs::create_directories(cfg.out_dir);
  std::vector<std::string> outputs{"triplets.csv"};
  write_triplets_csv(join(cfg.out_dir, "triplets.csv"), cfg, triplets);
  for (size_t i = 0; i < triplets.size(); ++i) {
    std::string vin = "vector_" + std::to_string(i) + ".csv";
    std::string vout = "vector_" + std::to_string(i) + "_final.csv";
    write_vector_csv(join(cfg.out_dir, vin), cfg, *model.input_space, triplets[i].v);
    write_vector_csv(join(cfg.out_dir, vout), cfg, *model.output_space, triplets[i].u);
    outputs.push_back(vin);
    outputs.push_back(vout);
  }
  outputs.push_back("run.json");
  write_run_json(join(cfg.out_dir, "run.json"), cfg, model, outputs);

  std::cout << model.name << ": leading " << triplets.size()
            << " singular values of the propagator\n";
  for (size_t i = 0; i < triplets.size(); ++i)
    std::cout << "  sigma[" << i << "] = " << triplets[i].sigma
              << "  (residual " << triplets[i].residual << ")\n";
  std::cout << "wrote " << outputs.size() << " files to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_verify(const Config& cfg, const ModelSpec& model) {
  bool ok = true;
  auto line = [&](const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << "  " << name << ": " << detail << "\n";
    ok = ok && pass;
  };

  auto functional = l2_squared_functional();
  std::vector<std::pair<std::string, TaylorReport>> reports;
  for (auto [mode, name] : {std::pair{GradientMode::Tlm, "tlm"},
                            std::pair{GradientMode::Adjoint, "adjoint"}}) {
    TaylorReport rep = taylor_test(model, functional, mode, cfg.seed);
    std::ostringstream os;
    os << "order1=" << rep.order1 << " order2=" << rep.order2;
    line(std::string("taylor remainder orders, ") + name + " gradient",
         rep.pass1 && rep.pass2, os.str());
    reports.emplace_back(name, rep);
  }

  auto tape = model.run(model.m0);
  LinearOperator L = propagator_from_tape(*tape);
  {
    const double err = adjoint_identity_max_error(L, 100, cfg.seed);
    std::ostringstream os;
    os << "max |<Lx,y> - <x,L*y>| / (|x||y|) = " << err;
    line("tangent/adjoint duality over 100 random pairs", err <= 1e-10, os.str());
  }
  {
    const double dev = replay_max_deviation(*tape);
    std::ostringstream os;
    os << "max state deviation " << dev;
    line("tape replay reproduces the recorded states", dev <= 1e-7, os.str());
  }
  if (L.in_dim <= 160 && L.out_dim <= 160) {
    try {
      OracleStats stats = dense_oracle_check(L, 100, 1e-7, cfg.seed);
      std::ostringstream os;
      os << "apply error " << stats.max_apply_error << ", vector error "
         << stats.max_vector_error;
      line("dense SVD agrees with the matrix-free operator", true, os.str());
    } catch (const OracleMismatch& e) {
      line("dense SVD agrees with the matrix-free operator", false, e.what());
    }
  } else {
    std::cout << "SKIP  dense SVD cross-check: operator is " << L.out_dim << "x"
              << L.in_dim << ", above the dense guard\n";
  }

  fs::create_directories(cfg.out_dir);
  write_taylor_csv(join(cfg.out_dir, "taylor_report.csv"), cfg, reports);
  write_run_json(join(cfg.out_dir, "run.json"), cfg, model,
                 {"taylor_report.csv", "run.json"});
  std::cout << (ok ? "all checks passed" : "verification failed") << "\n";
  return ok ? 0 : 7;
}

int cmd_growth(const Config& cfg, const ModelSpec& model) {
  auto tape = model.run(model.m0);
  auto lin = std::make_shared<TapeLinearizer>(*tape);
  LinearOperator L = propagator_from_linearizer(lin);
  GstOperator G = gst_operator(L);
  LanczosParams params = lanczos_params(cfg);
  auto triplets = singular_triplets(L, G, 1, params);
  GrowthCurve curve = growth_curve(model, *lin, triplets[0].v);

  fs::create_directories(cfg.out_dir);
  write_growth_csv(join(cfg.out_dir, "growth_curve.csv"), cfg, curve);
  write_run_json(join(cfg.out_dir, "run.json"), cfg, model,
                 {"growth_curve.csv", "run.json"});

  const int peak = curve.argmax();
  std::cout << model.name << ": sigma = " << triplets[0].sigma << " at T = "
            << model.n_steps * model.dt << "\n"
            << "gain peaks at step " << peak << " (t = " << curve.time[peak]
            << ", gain " << curve.gain[peak] << ")\n"
            << "wrote growth_curve.csv, run.json to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_bench(const Config& cfg, const ModelSpec& model) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::duration d) {
    return std::chrono::duration<double, std::milli>(d).count();
  };

  auto t0 = clock::now();
  auto tape = model.run(model.m0);
  auto t1 = clock::now();
  auto lin = std::make_shared<TapeLinearizer>(*tape);
  auto t2 = clock::now();

  std::mt19937_64 rng(cfg.seed);
  Vector x = random_vector(lin->input_dim(), rng, -1.0, 1.0);
  Vector w = random_vector(lin->output_dim(), rng, -1.0, 1.0);
  const int reps = 5;
  double sink = 0.0;
  auto t3 = clock::now();
  for (int r = 0; r < reps; ++r) sink += lin->apply_tlm(x).norm();
  auto t4 = clock::now();
  for (int r = 0; r < reps; ++r) sink += lin->apply_adjoint(w).norm();
  auto t5 = clock::now();

  const double fwd = ms(t1 - t0);
  const double build = ms(t2 - t1);
  const double tlm = ms(t4 - t3) / reps;
  const double adj = ms(t5 - t4) / reps;
  std::cout << model.name << " timings (informational, checksum " << sink << ")\n"
            << "  nonlinear forward run : " << fwd << " ms\n"
            << "  linearisation build   : " << build << " ms\n"
            << "  tangent apply         : " << tlm << " ms\n"
            << "  adjoint apply         : " << adj << " ms\n"
            << "  (forward + tangent) / forward = " << (fwd + tlm) / fwd << "\n"
            << "  (forward + adjoint) / forward = " << (fwd + adj) / fwd << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tangent, adjoint and singular-value analysis of taped finite element models"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int nev = 0;
  double tol = 0.0;
  long long seed = -1;
  bool show_config = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--nev", nev, "number of singular triplets (overrides config)");
  app.add_option("--seed", seed, "random seed (overrides config)");
  app.add_option("--tol", tol, "eigensolver tolerance (overrides config)");
  app.add_option("--out-dir", out_dir, "output directory (overrides config)");
  app.add_flag("--show-config", show_config, "print the resolved configuration and exit");

  auto* forward = app.add_subcommand("forward", "run the nonlinear model from its baseline");
  auto* gstcmd = app.add_subcommand("gst", "leading singular triplets of the propagator");
  auto* verify = app.add_subcommand("verify", "gradient, duality, replay and oracle checks");
  auto* growth = app.add_subcommand("growth", "per-step gain along the leading direction");
  auto* bench = app.add_subcommand("bench", "timing ratios of forward, tangent and adjoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Config cfg = config_path.empty() ? Config{} : load_config(config_path);
    if (nev > 0) cfg.nev = nev;
    if (tol > 0.0) cfg.tol = tol;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    if (show_config) {
      std::cout << config_json(cfg) << "\n";
      return 0;
    }

    ModelSpec model = make_model(cfg);
    if (forward->parsed()) return cmd_forward(cfg, model);
    if (gstcmd->parsed()) return cmd_gst(cfg, model);
    if (verify->parsed()) return cmd_verify(cfg, model);
    if (growth->parsed()) return cmd_growth(cfg, model);
    if (bench->parsed()) return cmd_bench(cfg, model);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownModel& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DimensionMismatch& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return 4;
  } catch (const NonConvergence& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 5;
  } catch (const SingularSystem& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 5;
  } catch (const EigensolverError& e) {
    std::cerr << "eigensolver failure: " << e.what() << "\n";
    return 6;
  } catch (const InvalidInnerProduct& e) {
    std::cerr << "eigensolver failure: " << e.what() << "\n";
    return 6;
  } catch (const OracleMismatch& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 7;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
