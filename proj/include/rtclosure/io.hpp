#pragma once

// File formats: little-endian float64 payloads with JSON sidecars, and CSV
// tables written with shortest round-trip number formatting.

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rtclosure/errors.hpp"
#include "rtclosure/kinetic.hpp"
#include "rtclosure/moment_solver.hpp"
#include "rtclosure/training.hpp"

namespace rtclosure {

inline constexpr int kFileFormatVersion = 1;

// ---------------------------------------------------------------------------
// Raw payloads

inline void write_f64(const std::string& path, std::span<const double> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (double v : data) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<double> read_f64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) throw IoError("'" + path + "' is not a float64 payload");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes.data() + 8 * i, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in '" + path + "': " + e.what());
  }
}

namespace detail {

inline void check_format(const nlohmann::json& j, const char* kind, const std::string& path) {
  if (j.value("format", std::string()) != kind) {
    throw IoError("'" + path + "' is not a " + std::string(kind) + " sidecar");
  }
  if (j.value("version", 0) != kFileFormatVersion) {
    throw IoError("'" + path + "': unsupported format version");
  }
}

inline void expect_size(std::size_t got, std::size_t want, const std::string& path) {
  if (got != want) {
    throw IoError("'" + path + "': payload has " + std::to_string(got) + " values, expected " +
                  std::to_string(want));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectories: <stem>.bin holds moments then derivatives, [snapshot][k][j].

inline void save_trajectory(const MomentTrajectory& t, const std::string& stem) {
  std::vector<double> payload(t.moments);
  payload.insert(payload.end(), t.derivatives.begin(), t.derivatives.end());
  write_f64(stem + ".bin", payload);
  write_json(stem + ".json", {{"format", "trajectory"},
                              {"version", kFileFormatVersion},
                              {"nx", t.nx},
                              {"order", t.order},
                              {"quad_order", t.quad_order},
                              {"boundary", to_string(t.boundary)},
                              {"seed", t.seed},
                              {"times", t.times},
                              {"sigma_s", t.sigma_s},
                              {"sigma_a", t.sigma_a},
                              {"min_intensity", t.min_intensity},
                              {"layout", "moments then derivatives, [snapshot][k][j]"}});
}

inline MomentTrajectory load_trajectory(const std::string& stem) {
  const auto j = read_json(stem + ".json");
  detail::check_format(j, "trajectory", stem + ".json");
  MomentTrajectory t;
  t.nx = j.at("nx").get<int>();
  t.order = j.at("order").get<int>();
  t.quad_order = j.at("quad_order").get<int>();
  t.boundary = boundary_from_string(j.at("boundary").get<std::string>());
  t.seed = j.at("seed").get<std::uint64_t>();
  t.times = j.at("times").get<std::vector<double>>();
  t.sigma_s = j.at("sigma_s").get<std::vector<double>>();
  t.sigma_a = j.at("sigma_a").get<std::vector<double>>();
  t.min_intensity = j.at("min_intensity").get<double>();
  const auto payload = read_f64(stem + ".bin");
  const std::size_t half = t.times.size() * static_cast<std::size_t>(t.order + 1) * static_cast<std::size_t>(t.nx);
  detail::expect_size(payload.size(), 2 * half, stem + ".bin");
  t.moments.assign(payload.begin(), payload.begin() + static_cast<std::ptrdiff_t>(half));
  t.derivatives.assign(payload.begin() + static_cast<std::ptrdiff_t>(half), payload.end());
  return t;
}

// ---------------------------------------------------------------------------
// Datasets: inputs | multipliers | targets | times | trajectory index.

inline void save_dataset(const Dataset& ds, const std::string& stem) {
  ds.validate();
  std::vector<double> payload(ds.inputs.data(), ds.inputs.data() + ds.inputs.size());
  payload.insert(payload.end(), ds.multipliers.data(), ds.multipliers.data() + ds.multipliers.size());
  payload.insert(payload.end(), ds.targets.data(), ds.targets.data() + ds.targets.size());
  payload.insert(payload.end(), ds.times.begin(), ds.times.end());
  for (int id : ds.trajectory) payload.push_back(static_cast<double>(id));
  write_f64(stem + ".bin", payload);
  write_json(stem + ".json", {{"format", "dataset"},
                              {"version", kFileFormatVersion},
                              {"ansatz", to_string(ds.ansatz)},
                              {"N", ds.order},
                              {"rows", ds.rows()},
                              {"n_inputs", ds.inputs.rows()},
                              {"n_multipliers", ds.multipliers.rows()},
                              {"dropped_rows", ds.dropped},
                              {"provenance", ds.provenance},
                              {"layout", "inputs, multipliers (column per row), targets, times, trajectory"}});
}

inline Dataset load_dataset(const std::string& stem) {
  const auto j = read_json(stem + ".json");
  detail::check_format(j, "dataset", stem + ".json");
  Dataset ds;
  ds.ansatz = closure_tag_from_string(j.at("ansatz").get<std::string>());
  ds.order = j.at("N").get<int>();
  ds.dropped = j.value("dropped_rows", std::size_t{0});
  ds.provenance = j.value("provenance", nlohmann::json::object());
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto n_in = j.at("n_inputs").get<Eigen::Index>();
  const auto n_mul = j.at("n_multipliers").get<Eigen::Index>();
  const auto payload = read_f64(stem + ".bin");
  detail::expect_size(payload.size(), static_cast<std::size_t>((n_in + n_mul + 3) * rows), stem + ".bin");
  const double* p = payload.data();
  ds.inputs = Eigen::Map<const Eigen::MatrixXd>(p, n_in, rows);
  p += n_in * rows;
  if (n_mul > 0) ds.multipliers = Eigen::Map<const Eigen::MatrixXd>(p, n_mul, rows);
  p += n_mul * rows;
  ds.targets = Eigen::Map<const Eigen::VectorXd>(p, rows);
  p += rows;
  ds.times.assign(p, p + rows);
  p += rows;
  for (Eigen::Index r = 0; r < rows; ++r) ds.trajectory.push_back(static_cast<int>(p[r]));
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Closed-loop solutions: snapshots stored (N+1) x Nx column-major each.

inline void save_solution(const MomentSolution& sol, const std::string& stem) {
  std::vector<double> payload;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& s : sol.snapshots) {
    rows = s.rows();
    cols = s.cols();
    payload.insert(payload.end(), s.data(), s.data() + s.size());
  }
  write_f64(stem + ".bin", payload);
  nlohmann::json j = {{"format", "solution"}, {"version", kFileFormatVersion},
                      {"times", sol.times},   {"rows", rows},
                      {"nx", cols},           {"steps", sol.steps},
                      {"config", sol.config}, {"completed", sol.completed()},
                      {"layout", "[snapshot] then (N+1) x Nx column-major"}};
  if (sol.blowup) {
    j["blowup"] = {{"time", sol.blowup->time}, {"node", sol.blowup->node}, {"message", sol.blowup->message}};
  }
  write_json(stem + ".json", j);
}

inline MomentSolution load_solution(const std::string& stem) {
  const auto j = read_json(stem + ".json");
  detail::check_format(j, "solution", stem + ".json");
  MomentSolution sol;
  sol.times = j.at("times").get<std::vector<double>>();
  sol.config = j.at("config");
  sol.steps = j.value("steps", 0LL);
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("nx").get<Eigen::Index>();
  const auto payload = read_f64(stem + ".bin");
  detail::expect_size(payload.size(), sol.times.size() * static_cast<std::size_t>(rows * cols), stem + ".bin");
  for (std::size_t s = 0; s < sol.times.size(); ++s) {
    sol.snapshots.emplace_back(Eigen::Map<const Eigen::MatrixXd>(
        payload.data() + s * static_cast<std::size_t>(rows * cols), rows, cols));
  }
  if (j.contains("blowup")) {
    const auto& b = j.at("blowup");
    sol.blowup = BlowupRecord{b.at("time").get<double>(), b.at("node").get<std::size_t>(),
                              b.at("message").get<std::string>()};
  }
  return sol;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw IoError("CSV has no column '" + name + "'");
  }
  std::vector<double> numbers(const std::string& name) const;
};

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw IoError("CSV: '" + s + "' is not a number");
  }
  return v;
}

inline std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(parse_double(r.at(c)));
  return out;
}

inline void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  const auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw IoError("'" + path + "': ragged row");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline CsvTable training_log_table(const std::vector<EpochLog>& history) {
  CsvTable t;
  t.header = {"epoch", "lr", "mse", "relative_l2", "validation_relative_l2"};
  for (const auto& h : history) {
    t.rows.push_back({std::to_string(h.epoch), format_double(h.lr), format_double(h.mse),
                      format_double(h.relative_l2), format_double(h.validation_relative_l2)});
  }
  return t;
}

inline CsvTable diagnostics_table(const HyperbolicityReport& r) {
  CsvTable t;
  t.header = {"time", "imag_count", "linf_norm"};
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    t.rows.push_back({format_double(r.times[i]), std::to_string(r.imag_count[i]), format_double(r.linf_norm[i])});
  }
  return t;
}

}  // namespace rtclosure
