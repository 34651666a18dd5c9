#pragma once

// Command implementations behind the `qrg` executable. Each command turns a
// RunConfig into CSV rows plus an optional JSON summary; main() only parses
// flags and routes output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qrg/ed.hpp"
#include "qrg/flow.hpp"

namespace qrg::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kIoError = 2, kValidationFailure = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Format { csv, json };

struct GridSpec {
  double lo = 0.5;
  double hi = 1.5;
  std::size_t count = 2001;
};

inline constexpr std::size_t kMinGridPoints = 11;
inline constexpr double kOracleTolerance = 1e-8;
inline constexpr double kMinFitR2 = 0.99;

struct RunConfig {
  std::string command;
  GridSpec grid;
  std::vector<int> steps;
  double j = 1.0;
  std::string out;      ///< empty: stdout
  std::string summary;  ///< empty: next to `out`, or stderr when writing to stdout
  Format format = Format::csv;
  std::vector<std::size_t> sizes{4, 8, 12};
  std::vector<double> fields{0.0, 0.2, 1.0, 3.0};
};

/// Default step list per command.
inline std::string default_steps(const std::string& command) {
  if (command == "scaling") return "2..10";
  if (command == "collapse") return "6,8,10";
  return "0..10";
}

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + s + "'");
  }
}

inline int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_number(s, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(what + " must be an integer: '" + s + "'");
  return int(v);
}

/// "lo:hi:count".
inline GridSpec parse_grid(const std::string& s) {
  const auto a = s.find(':');
  const auto b = a == std::string::npos ? a : s.find(':', a + 1);
  if (a == std::string::npos || b == std::string::npos) throw ConfigError("grid must look like lo:hi:count, got '" + s + "'");
  GridSpec g{parse_number(s.substr(0, a), "grid lo"), parse_number(s.substr(a + 1, b - a - 1), "grid hi"),
             std::size_t(std::max(0, parse_int(s.substr(b + 1), "grid count")))};
  if (!(g.lo > 0.0) || !(g.hi > g.lo) || !std::isfinite(g.hi)) throw ConfigError("grid bounds need 0 < lo < hi");
  if (g.count < kMinGridPoints) throw ConfigError("grid count must be at least " + std::to_string(kMinGridPoints));
  return g;
}

/// "a..b" (inclusive) or a comma list "a,b,c".
inline std::vector<int> parse_steps(const std::string& s) {
  std::vector<int> out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const int a = parse_int(s.substr(0, dots), "first step");
    const int b = parse_int(s.substr(dots + 2), "last step");
    if (b < a) throw ConfigError("step range '" + s + "' is empty");
    for (int n = a; n <= b; ++n) out.push_back(n);
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(item, "step"));
  }
  if (out.empty()) throw ConfigError("no steps given");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0 || out[i] > kMaxFlowSteps) throw ConfigError("steps must lie in [0, 60]");
    if (i > 0 && out[i] <= out[i - 1]) throw ConfigError("steps must be strictly ascending");
  }
  return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& s, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse(item));
  if (out.empty()) throw ConfigError("empty list '" + s + "'");
  return out;
}

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("format must be csv or json, got '" + s + "'");
}

inline std::vector<std::size_t> parse_sizes(const std::string& s) {
  auto v = parse_list<std::size_t>(s, [](const std::string& x) {
    const int n = parse_int(x, "size");
    if (n < 2 || n > int(kMaxChainSites) || n % 2 != 0) throw ConfigError("sizes must be even and in [2, 12]");
    return std::size_t(n);
  });
  return v;
}

inline std::vector<double> parse_fields(const std::string& s) {
  return parse_list<double>(s, [](const std::string& x) {
    const double g = parse_number(x, "field");
    if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("fields must be finite and >= 0");
    return g;
  });
}

inline void validate(const RunConfig& cfg) {
  if (!(cfg.j > 0.0) || !std::isfinite(cfg.j)) throw ConfigError("--J must be positive and finite");
  if (cfg.steps.empty()) throw ConfigError("no steps given");
}

/// Keys mirror the long flag names: steps, grid, J, out, summary, format,
/// sizes, fields. Values are the same strings the flags take (J may be a number).
inline void apply_config_overrides(RunConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  auto str = [&](const char* key) -> std::optional<std::string> {
    if (!doc.contains(key)) return std::nullopt;
    const auto& v = doc.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return format_double(v.get<double>());
    throw ConfigError(std::string("config key '") + key + "' must be a string or number");
  };
  static const std::vector<std::string> known{"steps", "grid", "J", "out", "summary", "format", "sizes", "fields"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("unknown config key '" + it.key() + "'");
  if (auto v = str("steps")) cfg.steps = parse_steps(*v);
  if (auto v = str("grid")) cfg.grid = parse_grid(*v);
  if (auto v = str("J")) cfg.j = parse_number(*v, "J");
  if (auto v = str("out")) cfg.out = *v;
  if (auto v = str("summary")) cfg.summary = *v;
  if (auto v = str("format")) cfg.format = parse_format(*v);
  if (auto v = str("sizes")) cfg.sizes = parse_sizes(*v);
  if (auto v = str("fields")) cfg.fields = parse_fields(*v);
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  apply_config_overrides(cfg, doc);
}

// --- tabular output -----------------------------------------------------------

/// Column names plus pre-rendered cells; rendered either as CSV or as a JSON
/// array of row objects. Cells are already valid JSON scalars.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string s;
    for (std::size_t c = 0; c < columns.size(); ++c) s += (c ? "," : "") + columns[c];
    s += '\n';
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) s += (c ? "," : "") + r[c];
      s += '\n';
    }
    return s;
  }

  std::string json() const {
    std::string s = "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      s += i ? ",\n  {" : "\n  {";
      for (std::size_t c = 0; c < columns.size(); ++c)
        s += (c ? ", \"" : "\"") + columns[c] + "\": " + (rows[i][c] == "nan" ? "null" : rows[i][c]);
      s += "}";
    }
    s += rows.empty() ? "]" : "\n]";
    return s;
  }
};

/// Result of one command: the data table, an optional JSON summary object
/// (already rendered) and the exit status.
struct CommandOutput {
  Table table;
  std::string summary;
  int status = kOk;
  std::string message;
};

inline std::vector<double> grid_values(const GridSpec& g) { return linspace(g.lo, g.hi, g.count); }

inline CommandOutput cmd_curve(const RunConfig& cfg, bool derivative) {
  CommandOutput out;
  out.table.columns = {"g", "step", "N", "value"};
  const auto grid = grid_values(cfg.grid);
  for (int n : cfg.steps) {
    const Curve c = derivative ? derivative_curve(grid, n) : concurrence_curve(grid, n);
    for (std::size_t i = 0; i < c.grid.size(); ++i)
      out.table.rows.push_back({format_double(c.grid[i]), std::to_string(n), std::to_string(c.size),
                                format_double(c.values[i])});
  }
  return out;
}

inline CommandOutput cmd_scaling(const RunConfig& cfg) {
  CommandOutput out;
  out.table.columns = {"step", "N", "g_m", "dCdg_min"};
  MinimumOptions opt;
  opt.lo = cfg.grid.lo;
  opt.hi = cfg.grid.hi;
  opt.scan_points = cfg.grid.count;
  const auto table = scaling_table(cfg.steps, opt);
  for (std::size_t i = 0; i < table.g_m.size(); ++i)
    out.table.rows.push_back({std::to_string(table.g_m[i].step), format_double(table.g_m[i].size),
                              format_double(table.g_m[i].value), format_double(table.dcdg_min[i].value)});

  const auto fit_gm = fit_power_law(table.g_m, FitMode::offset_from_gc);
  const auto unit_gm = fit_power_law_unit_prefactor(table.g_m, FitMode::offset_from_gc);
  const auto fit_d = fit_power_law(table.dcdg_min, FitMode::raw_magnitude);
  std::ostringstream s;
  s << "{\n"
    << "  \"theta_gm\": " << json_number(-fit_gm.exponent) << ",\n"
    << "  \"prefactor_gm\": " << json_number(fit_gm.prefactor) << ",\n"
    << "  \"r2_gm\": " << json_number(fit_gm.r_squared) << ",\n"
    << "  \"theta_gm_unit_prefactor\": " << json_number(-unit_gm.exponent) << ",\n"
    << "  \"log_rms_gm_unit_prefactor\": " << json_number(unit_gm.log_rms) << ",\n"
    << "  \"theta_deriv\": " << json_number(fit_d.exponent) << ",\n"
    << "  \"prefactor_deriv\": " << json_number(fit_d.prefactor) << ",\n"
    << "  \"r2_deriv\": " << json_number(fit_d.r_squared) << ",\n"
    << "  \"n_min\": " << fit_d.n_min << ",\n"
    << "  \"n_max\": " << fit_d.n_max << "\n"
    << "}";
  out.summary = s.str();
  if (fit_gm.r_squared < kMinFitR2 || fit_d.r_squared < kMinFitR2) {
    out.status = kValidationFailure;
    out.message = "fit r^2 below " + format_double(kMinFitR2);
  }
  return out;
}

inline CommandOutput cmd_collapse(const RunConfig& cfg) {
  CommandOutput out;
  out.table.columns = {"step", "x", "y"};
  CollapseOptions opt;
  opt.nu = critical_exponents().nu;
  opt.minimum.lo = cfg.grid.lo;
  opt.minimum.hi = cfg.grid.hi;
  opt.minimum.scan_points = cfg.grid.count;
  const auto report = collapse(cfg.steps, opt);
  for (const auto& c : report.curves)
    for (std::size_t i = 0; i < c.x.size(); ++i)
      out.table.rows.push_back({std::to_string(c.step), format_double(c.x[i]), format_double(c.y[i])});

  std::ostringstream s;
  s << "{\n  \"pairwise_residuals\": [";
  for (std::size_t i = 0; i < report.pairwise.size(); ++i) {
    const auto& p = report.pairwise[i];
    s << (i ? ",\n    " : "\n    ") << "{\"step_a\": " << p.step_a << ", \"step_b\": " << p.step_b
      << ", \"residual\": " << json_number(p.sup_norm) << "}";
  }
  s << "\n  ],\n  \"rms_vs_lorentzian\": " << json_number(report.rms_vs_lorentzian) << ",\n  \"curves\": [";
  for (std::size_t i = 0; i < report.curves.size(); ++i) {
    const auto& c = report.curves[i];
    s << (i ? ",\n    " : "\n    ") << "{\"step\": " << c.step << ", \"N\": " << c.size
      << ", \"g_m\": " << json_number(c.g_m) << ", \"dCdg_min\": " << json_number(c.dcdg_min)
      << ", \"rms_vs_lorentzian\": " << json_number(c.rms_vs_lorentzian) << "}";
  }
  s << "\n  ]\n}";
  out.summary = s.str();
  return out;
}

inline CommandOutput cmd_oracle(const RunConfig& cfg) {
  CommandOutput out;
  out.table.columns = {"N", "g", "E_ed", "E_jw", "abs_diff", "nn_concurrence"};
  double worst = 0.0;
  for (std::size_t n : cfg.sizes)
    for (double g : cfg.fields) {
      const Coupling c(cfg.j, g);
      const ChainSpec spec(n, c);
      const auto gs = ground_state(spec);
      const double e_jw = jw_ground_energy(n, c);
      const double diff = std::abs(gs.energy - e_jw);
      worst = std::max(worst, diff);
      out.table.rows.push_back({std::to_string(n), format_double(g), format_double(gs.energy), format_double(e_jw),
                                format_double(diff), format_double(bond_concurrence(gs, 0))});
    }
  if (worst > kOracleTolerance) {
    out.status = kValidationFailure;
    out.message = "ED and Jordan-Wigner energies differ by " + format_double(worst);
  }
  return out;
}

inline CommandOutput run(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.command == "curve") return cmd_curve(cfg, false);
  if (cfg.command == "deriv") return cmd_curve(cfg, true);
  if (cfg.command == "scaling") return cmd_scaling(cfg);
  if (cfg.command == "collapse") return cmd_collapse(cfg);
  if (cfg.command == "oracle") return cmd_oracle(cfg);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write to '" + path + "' failed");
}

/// Writes a command's output per cfg (files or stdout/stderr).
inline void emit(const RunConfig& cfg, const CommandOutput& result, std::ostream& stdout_stream,
                 std::ostream& stderr_stream) {
  if (cfg.format == Format::json) {
    std::string doc = "{\n\"command\": \"" + cfg.command + "\",\n\"rows\": " + result.table.json();
    if (!result.summary.empty()) doc += ",\n\"summary\": " + result.summary;
    doc += "\n}\n";
    if (cfg.out.empty())
      stdout_stream << doc;
    else
      write_text(cfg.out, doc);
    return;
  }

  const std::string csv = result.table.csv();
  if (cfg.out.empty())
    stdout_stream << csv;
  else
    write_text(cfg.out, csv);
  if (result.summary.empty()) return;
  std::string summary_path = cfg.summary;
  if (summary_path.empty() && !cfg.out.empty())
  {
    summary_path = std::filesystem::path(cfg.out).replace_extension(".json").string();
    if (summary_path == cfg.out) summary_path = cfg.out + ".summary.json";
  }
  if (summary_path.empty())
    stderr_stream << result.summary << '\n';
  else
    write_text(summary_path, result.summary + "\n");
}

}  // namespace qrg::cli
