// rtclosure: data generation, training, closed-loop simulation and
// benchmarking for learned moment closures of the slab RTE.
//
// Exit codes: 0 success, 2 usage, 3 numerical blowup, 4 I/O.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rtclosure/benchmark.hpp"
#include "rtclosure/io.hpp"
#include "rtclosure/pipeline.hpp"
#include "rtclosure/scenarios.hpp"
#include "rtclosure/training.hpp"

#ifndef RTCLOSURE_VERSION
#define RTCLOSURE_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rtclosure;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Options resolved as: command line, then --config file, then the
/// --desk-scale value, then the built-in default.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& flag, const std::string& key, T& var, const std::string& desc,
                   std::optional<T> desk = std::nullopt) {
    CLI::Option* opt = app_->add_option(flag, var, desc)->capture_default_str();
    resolvers_.push_back([opt, key, &var, desk](const json& cfg, bool desk_scale) {
      if (opt->count() > 0) return;
      if (cfg.contains(key)) {
        var = cfg.at(key).get<T>();
      } else if (desk_scale && desk) {
        var = *desk;
      }
    });
    dumpers_.push_back([key, &var](json& j) { j[key] = var; });
    return opt;
  }

  CLI::Option* flag(const std::string& flag, const std::string& key, bool& var, const std::string& desc) {
    CLI::Option* opt = app_->add_flag(flag, var, desc);
    resolvers_.push_back([opt, key, &var](const json& cfg, bool) {
      if (opt->count() == 0 && cfg.contains(key)) var = cfg.at(key).get<bool>();
    });
    dumpers_.push_back([key, &var](json& j) { j[key] = var; });
    return opt;
  }

  void resolve(const json& cfg, bool desk_scale) const {
    for (const auto& r : resolvers_) r(cfg, desk_scale);
  }

  json dump() const {
    json j = json::object();
    for (const auto& d : dumpers_) d(j);
    return j;
  }

 private:
  CLI::App* app_;
  std::vector<std::function<void(const json&, bool)>> resolvers_;
  std::vector<std::function<void(json&)>> dumpers_;
};

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::string out = "out";
  bool desk_scale = false;
};

std::vector<std::string> g_artifacts;

std::string artifact(const fs::path& p) {
  g_artifacts.push_back(p.string());
  return p.string();
}

void note(const std::string& msg) { std::cerr << msg << '\n'; }

Scenario load_scenario(const std::string& spec) {
  if (fs::exists(spec)) return scenario_from_json(read_json(spec));
  return find_scenario(spec);
}

std::shared_ptr<const MlpModel> load_shared_model(const std::string& path) {
  return std::make_shared<const MlpModel>(load_model(path));
}

Closure make_closure(const std::string& name, int order, double nu, const std::string& model_path) {
  const ClosureTag tag = closure_tag_from_string(name);
  switch (tag) {
    case ClosureTag::pn: return Closure::pn(order);
    case ClosureTag::fpn: return Closure::fpn(order, nu);
    case ClosureTag::exact_free_streaming: return Closure::exact_free_streaming(order);
    default:
      if (model_path.empty()) throw UsageError("closure '" + name + "' needs --model");
      return Closure::learned(tag, order, load_shared_model(model_path));
  }
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  int n_ics = 100;
  int nx = 512;
  int quad = 64;
  double t_final = 1.0;
  double record_every_dx = 8.0;
  int record_order = 10;
  int order = 5;
  std::string kinetic_weights = "js";
  int threads = 1;
};

int cmd_gen_data(const GenDataArgs& a, const Globals& g, json& seeds) {
  DataConfig cfg;
  cfg.n_ics = a.n_ics;
  cfg.nx = a.nx;
  cfg.quad_order = a.quad;
  cfg.t_final = a.t_final;
  cfg.record_every_dx = a.record_every_dx;
  cfg.record_order = std::max(a.record_order, a.order + 1);
  cfg.seed = g.seed;
  cfg.weights = weno_weights_from_string(a.kinetic_weights);
  const int threads = g.deterministic ? 1 : a.threads;
  const GeneratedData data = generate_trajectories(cfg, threads);
  for (int i = 0; i < cfg.n_ics; ++i) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));

  const fs::path tdir = fs::path(g.out) / "trajectories";
  const fs::path ddir = fs::path(g.out) / "datasets";
  fs::create_directories(tdir);
  fs::create_directories(ddir);
  for (const auto& t : data.trajectories) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%03llu", static_cast<unsigned long long>(t.seed - cfg.seed));
    const auto stem = (tdir / name).string();
    save_trajectory(t, stem);
    artifact(stem + ".bin");
    artifact(stem + ".json");
  }
  for (std::size_t i = 0; i < data.skipped.size(); ++i) {
    note("skipped initial condition " + std::to_string(data.skipped[i]) + ": " + data.messages[i]);
  }
  for (auto tag : {ClosureTag::lm, ClosureTag::lwm, ClosureTag::lg, ClosureTag::lgnm}) {
    const Dataset ds = build_dataset(data.trajectories, tag, a.order);
    const auto stem = (ddir / (std::string(to_string(tag)) + "_N" + std::to_string(a.order))).string();
    save_dataset(ds, stem);
    artifact(stem + ".bin");
    artifact(stem + ".json");
    note(std::string(to_string(tag)) + ": " + std::to_string(ds.rows()) + " rows, " +
         std::to_string(ds.dropped) + " dropped");
  }
  if (10 * data.skipped.size() > static_cast<std::size_t>(cfg.n_ics)) return kExitBlowup;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train / sweep

struct TrainArgs {
  std::string dataset;
  int epochs = 1000;
  int batch = 1024;
  double lr0 = 1e-3;
  double l2 = 1e-7;
  std::vector<int> hidden = {256, 256, 256, 256, 256};
  double validation_fraction = 0.1;
  std::string model_out;
  bool sweep = false;
  std::vector<int> depths = {2, 3, 4, 5, 6, 7};
  std::vector<int> widths = {8, 16, 32, 64, 128, 256, 512, 1024};
};

TrainConfig train_config(const TrainArgs& a, const Globals& g) {
  TrainConfig c;
  c.epochs = a.epochs;
  c.batch = a.batch;
  c.lr0 = a.lr0;
  c.l2 = a.l2;
  c.hidden = a.hidden;
  c.seed = g.seed;
  c.validation_fraction = a.validation_fraction;
  return c;
}

int cmd_sweep(const TrainArgs& a, const Globals& g) {
  const Dataset ds = load_dataset(a.dataset);
  fs::create_directories(g.out);
  CsvTable table;
  table.header = {"layers"};
  for (int w : a.widths) table.header.push_back("width_" + std::to_string(w));
  for (int d : a.depths) {
    std::vector<std::string> row{std::to_string(d)};
    for (int w : a.widths) {
      TrainConfig c = train_config(a, g);
      // "layers" counts the affine layers, so d layers have d - 1 hidden ones.
      c.hidden.assign(static_cast<std::size_t>(std::max(1, d - 1)), w);
      const auto res = train(ds, c);
      row.push_back(format_double(res.history.back().relative_l2));
      note("layers " + std::to_string(d) + " width " + std::to_string(w) + ": E2 " + row.back());
    }
    table.rows.push_back(row);
  }
  const auto path = fs::path(g.out) / ("sweep_" + std::string(to_string(ds.ansatz)) + ".csv");
  write_csv(artifact(path), table);
  return kExitOk;
}

int cmd_train(const TrainArgs& a, const Globals& g) {
  if (a.sweep) return cmd_sweep(a, g);
  const Dataset ds = load_dataset(a.dataset);
  const TrainConfig c = train_config(a, g);
  fs::create_directories(g.out);
  const std::string tag = to_string(ds.ansatz);
  const auto res = train(ds, c, [&](const EpochLog& e) {
    if (e.epoch % 50 == 0 || e.epoch + 1 == c.epochs) {
      note("epoch " + std::to_string(e.epoch) + " E2 " + format_double(e.relative_l2));
    }
  });
  const fs::path model_path = a.model_out.empty() ? fs::path(g.out) / ("model_" + tag + ".json") : fs::path(a.model_out);
  MlpModel model = res.model;
  model.metadata["dataset"] = a.dataset;
  save_model(model, artifact(model_path));
  write_csv(artifact(fs::path(g.out) / ("train_log_" + tag + ".csv")), training_log_table(res.history));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimArgs {
  std::string scenario = "two-material";
  std::string closure = "pn";
  std::string model;
  int order = 5;
  int nx = 256;
  double cfl = 0.1;
  double alpha = 5.0;
  double nu = 20.0;
  double t_final = 0.0;
  double record_dt = 0.0;
  int quad = 64;
  bool diagnostics = true;
};

CsvTable profile_table(const Eigen::MatrixXd& m) {
  CsvTable t;
  t.header = {"x"};
  for (Eigen::Index k = 0; k < m.rows(); ++k) t.header.push_back("m" + std::to_string(k));
  const auto x = cell_centers(static_cast<int>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    std::vector<std::string> row{format_double(x[static_cast<std::size_t>(j)])};
    for (Eigen::Index k = 0; k < m.rows(); ++k) row.push_back(format_double(m(k, j)));
    t.rows.push_back(row);
  }
  return t;
}

int cmd_simulate(const SimArgs& a, const Globals& g) {
  const ClosureTag tag = closure_tag_from_string(a.closure);
  if (is_learned(tag) && a.model.empty()) throw UsageError("closure '" + a.closure + "' needs --model");
  Scenario sc = load_scenario(a.scenario);
  if (a.t_final > 0.0) sc.t_final = a.t_final;
  SolverConfig cfg;
  cfg.nx = a.nx;
  cfg.cfl = a.cfl;
  cfg.alpha_lf = a.alpha;
  cfg.boundary = sc.boundary;
  cfg.closure = make_closure(a.closure, a.order, a.nu, a.model);
  cfg.record_dt = a.record_dt;
  cfg.diagnostics = a.diagnostics;
  const auto sol = run_moment(scenario_initial_moments(sc, a.nx, a.order, a.quad), sc.cross_sections(a.nx), cfg,
                              sc.t_final);
  fs::create_directories(g.out);
  const std::string base = sc.name + "_" + a.closure + "_N" + std::to_string(a.order);
  const auto stem = (fs::path(g.out) / ("solution_" + base)).string();
  save_solution(sol, stem);
  artifact(stem + ".bin");
  artifact(stem + ".json");
  write_csv(artifact(fs::path(g.out) / ("diagnostics_" + base + ".csv")), diagnostics_table(sol.report));
  write_csv(artifact(fs::path(g.out) / ("profile_" + base + ".csv")), profile_table(sol.snapshots.back()));
  if (!sol.completed()) {
    note("blowup: " + sol.blowup->message);
    return kExitBlowup;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchArgs {
  std::vector<std::string> scenarios = {"two-material"};
  std::vector<std::string> closures = {"pn", "fpn"};
  std::vector<int> orders = {5};
  std::vector<std::string> models;  // tag=path
  int nx = 256;
  double cfl = 0.1;
  double alpha = 5.0;
  double nu = 20.0;
  int quad = 64;
  int ref_factor = 2;
  int ref_quad = 64;
};

Eigen::MatrixXd cached_reference(const Scenario& sc, int nx, int order, const ReferenceConfig& rc,
                                 const fs::path& dir) {
  fs::create_directories(dir);
  const std::string stem = (dir / (sc.name + "_nx" + std::to_string(nx) + "_f" + std::to_string(rc.nx_factor) +
                                   "_q" + std::to_string(rc.quad_order)))
                               .string();
  if (fs::exists(stem + ".json")) {
    const auto sol = load_solution(stem);
    const auto& m = sol.snapshots.back();
    if (m.rows() > order && sol.config.value("scenario", json()) == to_json(sc)) return m;
  }
  const Eigen::MatrixXd ref = kinetic_reference(sc, nx, order, rc);
  MomentSolution s;
  s.times = {sc.t_final};
  s.snapshots = {ref};
  s.config = {{"scenario", to_json(sc)}, {"nx_factor", rc.nx_factor}, {"quad_order", rc.quad_order},
              {"kinetic_weights", to_string(rc.weights)}};
  save_solution(s, stem);
  artifact(stem + ".bin");
  artifact(stem + ".json");
  return ref;
}

int cmd_benchmark(const BenchArgs& a, const Globals& g) {
  std::map<std::string, std::string> model_paths;
  for (const auto& m : a.models) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) throw UsageError("--model expects tag=path, got '" + m + "'");
    model_paths[m.substr(0, eq)] = m.substr(eq + 1);
  }
  ReferenceConfig rc;
  rc.nx_factor = a.ref_factor;
  rc.quad_order = a.ref_quad;
  fs::create_directories(g.out);
  CsvTable errors;
  errors.header = {"scenario", "closure", "N", "moment", "relative_l2", "completed", "blowup_time"};
  bool any_blowup = false;
  const int max_order = *std::max_element(a.orders.begin(), a.orders.end());
  for (const auto& name : a.scenarios) {
    const Scenario sc = load_scenario(name);
    const Eigen::MatrixXd ref = cached_reference(sc, a.nx, max_order, rc, fs::path(g.out) / "references");
    CsvTable profiles;
    profiles.header = {"x", "kinetic_m0"};
    std::vector<std::vector<double>> columns;
    for (int order : a.orders) {
      for (const auto& cname : a.closures) {
        const auto it = model_paths.find(cname);
        const Closure cl = make_closure(cname, order, a.nu, it == model_paths.end() ? "" : it->second);
        SolverConfig cfg;
        cfg.nx = a.nx;
        cfg.cfl = a.cfl;
        cfg.alpha_lf = a.alpha;
        cfg.closure = cl;
        cfg.boundary = sc.boundary;
        cfg.diagnostics = false;
        const auto sol = run_moment(scenario_initial_moments(sc, a.nx, order, a.quad), sc.cross_sections(a.nx), cfg,
                                    sc.t_final);
        for (int k : sc.error_moments) {
          const int moment = k < 0 ? order : k;
          std::vector<std::string> row{sc.name, cname, std::to_string(order), std::to_string(moment)};
          if (sol.completed()) {
            row.push_back(format_double(moment_error(sol.final_moments(), ref, moment)));
            row.push_back("1");
            row.push_back("");
          } else {
            any_blowup = true;
            row.push_back("nan");
            row.push_back("0");
            row.push_back(format_double(sol.blowup->time));
          }
          errors.rows.push_back(row);
          note(sc.name + " " + cname + " N=" + std::to_string(order) + " m" + std::to_string(moment) + ": " + row[4]);
        }
        profiles.header.push_back(cname + "_N" + std::to_string(order) + "_m0");
        std::vector<double> col;
        const auto& last = sol.snapshots.back();
        for (Eigen::Index j = 0; j < last.cols(); ++j) col.push_back(last(0, j));
        columns.push_back(col);
      }
    }
    const auto x = cell_centers(a.nx);
    for (int j = 0; j < a.nx; ++j) {
      std::vector<std::string> row{format_double(x[static_cast<std::size_t>(j)]), format_double(ref(0, j))};
      for (const auto& c : columns) row.push_back(format_double(c[static_cast<std::size_t>(j)]));
      profiles.rows.push_back(row);
    }
    write_csv(artifact(fs::path(g.out) / ("profiles_" + sc.name + ".csv")), profiles);
  }
  write_csv(artifact(fs::path(g.out) / "benchmark.csv"), errors);
  return any_blowup ? kExitBlowup : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"Learned moment closures for the slab radiative transfer equation"};
  app.set_version_flag("--version", RTCLOSURE_VERSION);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config (or a previous run manifest)");
  app.add_option("--seed", g.seed, "Base seed")->capture_default_str();
  app.add_flag("--deterministic", g.deterministic, "Single worker thread");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--desk-scale", g.desk_scale, "Laptop-sized defaults");
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Run the kinetic solver and write trajectories and datasets");
  Binder gen_b(gen_cmd);
  gen_b.add("--n-ics", "n_ics", gen.n_ics, "Number of sampled initial conditions", std::optional<int>(10));
  gen_b.add("--nx", "nx", gen.nx, "Kinetic grid cells", std::optional<int>(128));
  gen_b.add("--quad", "quad", gen.quad, "Gauss-Legendre ordinates", std::optional<int>(32));
  gen_b.add("--t-final", "t_final", gen.t_final, "Final time");
  gen_b.add("--record-every-dx", "record_every_dx", gen.record_every_dx, "Snapshot spacing in units of dx");
  gen_b.add("--record-order", "record_order", gen.record_order, "Highest recorded Legendre moment");
  gen_b.add("-N,--order", "N", gen.order, "Truncation order of the datasets");
  gen_b.add("--kinetic-weights", "kinetic_weights", gen.kinetic_weights, "WENO weights: js, z, linear");
  gen_b.add("--threads", "threads", gen.threads, "Worker threads");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a closure network on a dataset");
  auto* sweep_cmd = app.add_subcommand("sweep", "Depth/width sweep of the final training error");
  Binder train_b(train_cmd);
  Binder sweep_b(sweep_cmd);
  for (Binder* b : {&train_b, &sweep_b}) {
    b->add("--dataset", "dataset", tr.dataset, "Dataset stem (without .bin/.json)")->required();
    b->add("--epochs", "epochs", tr.epochs, "Epochs", std::optional<int>(300));
    b->add("--batch", "batch", tr.batch, "Mini-batch size", std::optional<int>(64));
    b->add("--lr0", "lr0", tr.lr0, "Initial learning rate");
    b->add("--l2", "l2", tr.l2, "L2 regularization");
    b->add("--hidden", "hidden", tr.hidden, "Hidden layer widths", std::optional<std::vector<int>>({64, 64, 64, 64}))
        ->delimiter(',');
    b->add("--validation-fraction", "validation_fraction", tr.validation_fraction, "Held-out trajectories");
    b->add("--depths", "depths", tr.depths, "Sweep: numbers of layers")->delimiter(',');
    b->add("--widths", "widths", tr.widths, "Sweep: widths",
           std::optional<std::vector<int>>({8, 16, 32, 64}))
        ->delimiter(',');
  }
  train_b.add("--model-out", "model_out", tr.model_out, "Model path (default OUT/model_<ansatz>.json)");
  train_b.flag("--sweep", "sweep", tr.sweep, "Run the depth/width sweep instead");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Closed-loop moment simulation of a scenario");
  Binder sim_b(sim_cmd);
  sim_b.add("--scenario", "scenario", sim.scenario, "Catalog name or scenario JSON path");
  sim_b.add("--closure", "closure", sim.closure, "pn, fpn, exact, lm, lwm, lg, lgnm");
  sim_b.add("--model", "model", sim.model, "Model file (learned closures)");
  sim_b.add("-N,--order", "N", sim.order, "Truncation order");
  sim_b.add("--nx", "nx", sim.nx, "Grid cells");
  sim_b.add("--cfl", "cfl", sim.cfl, "dt / dx");
  sim_b.add("--alpha", "alpha_lf", sim.alpha, "Lax-Friedrichs constant");
  sim_b.add("--nu", "nu", sim.nu, "FP_N filter strength");
  sim_b.add("--t-final", "t_final", sim.t_final, "Override the scenario final time (0 keeps it)");
  sim_b.add("--record-dt", "record_dt", sim.record_dt, "Snapshot spacing (0: initial and final only)");
  sim_b.add("--quad", "quad", sim.quad, "Ordinates for projecting the initial data");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Relative L2 errors against a kinetic reference");
  Binder bench_b(bench_cmd);
  bench_b.add("--scenario", "scenarios", bench.scenarios, "Scenario names or paths")->delimiter(',');
  bench_b.add("--closures", "closures", bench.closures, "Closures to compare")->delimiter(',');
  bench_b.add("-N,--orders", "orders", bench.orders, "Truncation orders")->delimiter(',');
  bench_b.add("--model", "models", bench.models, "Learned models as tag=path")->delimiter(',');
  bench_b.add("--nx", "nx", bench.nx, "Moment grid cells");
  bench_b.add("--cfl", "cfl", bench.cfl, "dt / dx");
  bench_b.add("--alpha", "alpha_lf", bench.alpha, "Lax-Friedrichs constant");
  bench_b.add("--nu", "nu", bench.nu, "FP_N filter strength");
  bench_b.add("--quad", "quad", bench.quad, "Ordinates for projecting the initial data");
  bench_b.add("--ref-factor", "ref_factor", bench.ref_factor, "Kinetic grid refinement over the moment grid");
  bench_b.add("--ref-quad", "ref_quad", bench.ref_quad, "Kinetic ordinates");

  RunManifest manifest;
  manifest.tool_version = RTCLOSURE_VERSION;
  int code = kExitOk;
  try {
    app.parse(argc, argv);
    json cfg = json::object();
    if (!g.config_path.empty()) {
      cfg = read_json(g.config_path);
      if (cfg.contains("config") && cfg.contains("command")) cfg = cfg.at("config");
      if (cfg.contains("seed") && app.get_option("--seed")->count() == 0) g.seed = cfg.at("seed").get<std::uint64_t>();
      if (cfg.contains("desk_scale") && app.get_option("--desk-scale")->count() == 0) {
        g.desk_scale = cfg.at("desk_scale").get<bool>();
      }
    }
    CLI::App* sub = app.get_subcommands().front();
    manifest.command = sub->get_name();
    const std::map<std::string, Binder*> binders{{"gen-data", &gen_b}, {"train", &train_b}, {"sweep", &sweep_b},
                                                 {"simulate", &sim_b}, {"benchmark", &bench_b}};
    Binder* b = binders.at(manifest.command);
    b->resolve(cfg, g.desk_scale);
    manifest.config = b->dump();
    manifest.config["seed"] = g.seed;
    manifest.config["desk_scale"] = g.desk_scale;
    manifest.config["deterministic"] = g.deterministic;
    json seeds = json::array({g.seed});
    if (manifest.command == "gen-data") {
      seeds = json::array();
      code = cmd_gen_data(gen, g, seeds);
    } else if (manifest.command == "train") {
      code = cmd_train(tr, g);
    } else if (manifest.command == "sweep") {
      code = cmd_sweep(tr, g);
    } else if (manifest.command == "simulate") {
      code = cmd_simulate(sim, g);
    } else {
      code = cmd_benchmark(bench, g);
    }
    manifest.seeds = seeds.get<std::vector<std::uint64_t>>();
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    code = kExitBlowup;
  }
  manifest.artifacts = g_artifacts;
  manifest.exit_code = code;
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    fs::create_directories(g.out);
    write_json((fs::path(g.out) / ("manifest_" + manifest.command + ".json")).string(), manifest.to_json());
  } catch (const std::exception& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return code;
}
