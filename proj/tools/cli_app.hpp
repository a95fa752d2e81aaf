// Copyright 2026 The Fourier Accountant Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Lives in a header so the test suite can drive
// run() in-process with string streams.
//
//   delta     delta at one epsilon
//   epsilon   epsilon at one delta target
//   sweep     one row per value of eps, delta or k
//   converge  one row per grid size n (or radius L), with err(L, n) taken
//             from consecutive doublings
//
// Exit status: 0 ok, 2 bad flags, 3 numeric domain error, 4 no convergence.

#ifndef FOURIER_ACCOUNTANT_TOOLS_CLI_APP_HPP_
#define FOURIER_ACCOUNTANT_TOOLS_CLI_APP_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "fourier_accountant.hpp"
#include "json.hpp"

namespace fourier_accountant::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitConvergence = 4;

using Json = nlohmann::ordered_json;

// Thrown for flag combinations CLI11 cannot express; maps to exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  // Single-mechanism flags.
  std::string scheme = "poisson";
  std::optional<double> sigma;
  std::optional<double> q;
  std::optional<std::uint64_t> batch_size;
  std::optional<std::uint64_t> dataset_size;
  std::optional<std::uint64_t> k;
  // Heterogeneous alternative.
  std::vector<std::string> mechs;
  std::string direction = "both";

  std::optional<double> eps;
  std::optional<double> delta;
  double L = 20.0;
  std::uint64_t n = std::uint64_t{1} << 22;
  double newton_tol = 1e-10;
  bool no_disc_estimate = false;

  std::string format = "json";
  std::string out_path;

  // sweep / converge
  std::string over;
  std::vector<std::string> values;
  std::optional<double> start;
  std::uint64_t doublings = 0;
};

// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "poisson") return Scheme::kPoissonRemoveAdd;
  if (name == "without-replacement") return Scheme::kWithoutReplacementSubstitute;
  if (name == "with-replacement") return Scheme::kWithReplacementSubstitute;
  throw UsageError("unknown scheme '" + name +
                   "' (expected poisson, without-replacement or with-replacement)");
}

inline double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw UsageError("cannot parse " + key + "='" + text + "' as a number");
  }
  return v;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw UsageError("cannot parse " + key + "='" + text + "' as a positive integer");
  }
  return v;
}

inline MechanismSpec make_spec(Scheme scheme, std::optional<double> sigma,
                               std::optional<double> q,
                               std::optional<std::uint64_t> batch_size,
                               std::optional<std::uint64_t> dataset_size) {
  if (!sigma) throw UsageError("--sigma (or sigma=) is required");
  switch (scheme) {
    case Scheme::kPoissonRemoveAdd:
      if (!q) throw UsageError("the poisson scheme needs --q");
      return MechanismSpec::poisson(*sigma, *q);
    case Scheme::kWithoutReplacementSubstitute:
      if (!q) throw UsageError("the without-replacement scheme needs --q");
      return MechanismSpec::without_replacement(*sigma, *q);
    case Scheme::kWithReplacementSubstitute:
      if (!batch_size || !dataset_size) {
        throw UsageError("the with-replacement scheme needs --batch-size and --dataset-size");
      }
      return MechanismSpec::with_replacement(*sigma, *batch_size, *dataset_size);
  }
  throw UsageError("unknown scheme");
}

// "sigma=1.5,q=0.01,k=100,scheme=poisson".
inline MechanismCount parse_mech(const std::string& text) {
  std::optional<double> sigma, q;
  std::optional<std::uint64_t> m, n_data;
  std::uint64_t count = 1;
  Scheme scheme = Scheme::kPoissonRemoveAdd;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--mech entry '" + item + "' is not key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "sigma") {
      sigma = parse_double(key, value);
    } else if (key == "q") {
      q = parse_double(key, value);
    } else if (key == "k") {
      count = parse_count(key, value);
    } else if (key == "scheme") {
      scheme = parse_scheme(value);
    } else if (key == "batch-size" || key == "m") {
      m = parse_count(key, value);
    } else if (key == "dataset-size") {
      n_data = parse_count(key, value);
    } else {
      throw UsageError("unknown --mech key '" + key + "'");
    }
  }
  return {make_spec(scheme, sigma, q, m, n_data), count};
}

inline std::vector<MechanismCount> mechanisms_from(const Options& o) {
  std::vector<MechanismCount> mechs;
  if (!o.mechs.empty()) {
    if (o.sigma || o.q || o.batch_size || o.dataset_size || o.k) {
      throw UsageError("--mech cannot be combined with --sigma/--q/--batch-size/"
                       "--dataset-size/--k");
    }
    for (const std::string& m : o.mechs) mechs.push_back(parse_mech(m));
  } else {
    if (!o.k) throw UsageError("--k is required");
    mechs.push_back({make_spec(parse_scheme(o.scheme), o.sigma, o.q, o.batch_size,
                               o.dataset_size),
                     *o.k});
  }
  if (o.direction == "xy" || o.direction == "yx") {
    const Direction d = o.direction == "xy" ? Direction::kXOverY : Direction::kYOverX;
    for (MechanismCount& m : mechs) m.spec.direction = d;
  }
  return mechs;
}

inline Grid grid_from(double L, std::uint64_t n) {
  if (n < 2 || n % 2 != 0) {
    throw UsageError("--n must be an even integer >= 2, got " + std::to_string(n));
  }
  return Grid(L, static_cast<std::size_t>(n));
}

inline CompositionQuery query_from(const Options& o, const Grid& grid, Target target) {
  CompositionQuery q;
  q.mechanisms = mechanisms_from(o);
  q.grid = grid;
  q.target = target;
  q.newton_tolerance = o.newton_tol;
  q.directions =
      o.direction == "both" ? DirectionPolicy::kWorstCase : DirectionPolicy::kAsSpecified;
  q.with_discretization_estimate = !o.no_disc_estimate;
  return q;
}

// ---------------------------------------------------------------------------
// Report rendering.

inline Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json mechanism_json(const MechanismCount& m) {
  Json j;
  j["scheme"] = std::string(to_string(m.spec.scheme));
  j["sigma"] = m.spec.sigma;
  if (m.spec.scheme == Scheme::kWithReplacementSubstitute) {
    j["batch_size"] = m.spec.batch_size;
    j["dataset_size"] = m.spec.dataset_size;
  } else {
    j["q"] = m.spec.q;
  }
  if (m.spec.scheme == Scheme::kPoissonRemoveAdd) {
    j["direction"] = std::string(to_string(m.spec.direction));
  }
  j["count"] = m.count;
  return j;
}

inline Json result_json(const DeltaResult& r, const Target& target,
                        const std::string& direction_policy) {
  Json j;
  j["kind"] = std::string(to_string(r.kind));
  j["value"] = r.value;
  if (const auto* e = std::get_if<Epsilon>(&target)) {
    j["epsilon"] = e->value;
    j["delta"] = r.value;
  } else {
    j["epsilon"] = r.value;
    j["delta"] = std::get<Delta>(target).value;
  }
  j["ell_eps"] = r.ell_eps;
  j["tail_estimate"] = optional_number(r.tail_estimate.value);
  j["tail_estimate_valid"] = r.tail_estimate.valid;
  j["tail_estimate_violations"] = r.tail_estimate.violations;
  if (r.analytic_tail_bound) {
    j["analytic_tail_bound"] = optional_number(r.analytic_tail_bound->value);
    j["analytic_tail_bound_valid"] = r.analytic_tail_bound->valid;
  } else {
    j["analytic_tail_bound"] = nullptr;
    j["analytic_tail_bound_valid"] = nullptr;
  }
  j["discretization_estimate"] = optional_number(r.discretization_estimate);
  j["L"] = r.grid.L();
  j["n"] = r.grid.n();
  j["dx"] = r.grid.dx();
  j["k"] = r.k;
  if (r.mechanisms.size() == 1) {
    const MechanismSpec& s = r.mechanisms.front().spec;
    const bool wr = s.scheme == Scheme::kWithReplacementSubstitute;
    j["scheme"] = std::string(to_string(s.scheme));
    j["sigma"] = s.sigma;
    j["q"] = wr ? Json(nullptr) : Json(s.q);
    j["batch_size"] = wr ? Json(s.batch_size) : Json(nullptr);
    j["dataset_size"] = wr ? Json(s.dataset_size) : Json(nullptr);
  } else {
    j["scheme"] = "heterogeneous";
    j["sigma"] = nullptr;
    j["q"] = nullptr;
    j["batch_size"] = nullptr;
    j["dataset_size"] = nullptr;
  }
  j["direction"] = direction_policy;
  Json dirs = Json::array();
  for (const DirectionalValue& d : r.directions) {
    Json dj;
    dj["direction"] = std::string(to_string(d.direction));
    dj["value"] = d.value;
    dj["ell_eps"] = d.ell_eps;
    if (r.kind == ResultKind::kEpsilon) {
      dj["newton_iterations"] = d.newton_iterations;
      dj["residual"] = d.residual;
    }
    dirs.push_back(dj);
  }
  j["directions"] = dirs;
  Json mechs = Json::array();
  for (const MechanismCount& m : r.mechanisms) mechs.push_back(mechanism_json(m));
  j["mechanisms"] = mechs;
  j["newton_tolerance"] = r.newton_tolerance;
  j["warnings"] = r.warnings;
  return j;
}

inline std::string csv_cell(const Json& v) {
  std::string s;
  if (v.is_null()) {
    return "";
  } else if (v.is_boolean()) {
    s = v.get<bool>() ? "true" : "false";
  } else if (v.is_number_float()) {
    s = format_number(v.get<double>());
  } else if (v.is_number_unsigned()) {
    s = std::to_string(v.get<std::uint64_t>());
  } else if (v.is_number_integer()) {
    s = std::to_string(v.get<std::int64_t>());
  } else if (v.is_string()) {
    s = v.get<std::string>();
  } else {
    s = v.dump();
  }
  // RFC 4180: quote fields holding separators, quotes or line breaks.
  if (s.find_first_of(",\"\r\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  return s;
}

inline void write_csv(const std::vector<Json>& rows, std::ostream& os) {
  if (rows.empty()) return;
  bool first = true;
  for (const auto& item : rows.front().items()) {
    os << (first ? "" : ",") << csv_cell(Json(item.key()));
    first = false;
  }
  os << "\r\n";
  for (const Json& row : rows) {
    first = true;
    for (const auto& item : row.items()) {
      os << (first ? "" : ",") << csv_cell(item.value());
      first = false;
    }
    os << "\r\n";
  }
}

inline std::string table_cell(const Json& v) {
  if (v.is_null()) return "-";
  if (v.is_array()) {
    std::string s;
    for (const Json& e : v) s += (s.empty() ? "" : "; ") + table_cell(e);
    return s.empty() ? "-" : s;
  }
  if (v.is_object()) return v.dump();
  if (v.is_string()) return v.get<std::string>();
  return csv_cell(v);
}

inline void write_table(const std::vector<Json>& rows, std::ostream& os) {
  if (rows.empty()) return;
  if (rows.size() == 1) {
    std::size_t width = 0;
    for (const auto& item : rows.front().items()) width = std::max(width, item.key().size());
    for (const auto& item : rows.front().items()) {
      os << std::left << std::setw(static_cast<int>(width) + 2) << item.key()
         << table_cell(item.value()) << '\n';
    }
    return;
  }
  const std::vector<std::string> columns = {
      "kind",   "epsilon", "delta", "L", "n", "k", "tail_estimate",
      "discretization_estimate", "warnings"};
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> widths(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) widths[c] = columns[c].size();
  for (const Json& row : rows) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      line.push_back(table_cell(row[columns[c]]));
      widths[c] = std::max(widths[c], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    os << std::left << std::setw(static_cast<int>(widths[c]) + 2) << columns[c];
  }
  os << '\n';
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      os << std::left << std::setw(static_cast<int>(widths[c]) + 2) << line[c];
    }
    os << '\n';
  }
}

inline void emit(const Options& o, const std::string& command,
                 const std::vector<Json>& rows, bool single, std::ostream& os) {
  if (o.format == "csv") {
    write_csv(rows, os);
  } else if (o.format == "table") {
    write_table(rows, os);
  } else if (single) {
    os << rows.front().dump(2) << '\n';
  } else {
    Json doc;
    doc["command"] = command;
    doc["rows"] = rows;
    os << doc.dump(2) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Subcommands.

inline Target target_from(const Options& o) {
  if (o.eps && o.delta) throw UsageError("give exactly one of --eps and --delta");
  if (o.eps) return Epsilon{*o.eps};
  if (o.delta) return Delta{*o.delta};
  throw UsageError("one of --eps or --delta is required");
}

inline std::vector<Json> run_single(const Options& o, Target target) {
  const CompositionQuery q = query_from(o, grid_from(o.L, o.n), target);
  return {result_json(evaluate(q), target, o.direction)};
}

inline std::vector<Json> run_sweep(const Options& o) {
  if (o.values.empty()) throw UsageError("sweep needs --values");
  std::vector<Json> rows;
  const Grid grid = grid_from(o.L, o.n);
  if (o.over == "k") {
    if (!o.eps && !o.delta) throw UsageError("sweep --over k needs --eps or --delta");
    if (!o.mechs.empty()) throw UsageError("sweep --over k needs a single mechanism");
    const Target target = target_from(o);
    for (const std::string& v : o.values) {
      Options row = o;
      row.k = parse_count("k", v);
      rows.push_back(result_json(evaluate(query_from(row, grid, target)), target,
                                 o.direction));
    }
    return rows;
  }
  if (o.over != "eps" && o.over != "delta") {
    throw UsageError("sweep --over must be eps, delta or k");
  }
  // One C^k (and one refined C^k) serves every target.
  CompositionQuery base = query_from(o, grid, Epsilon{0.0});
  const CurveSet curves = build_curves(base);
  std::optional<CurveSet> refined;
  if (base.with_discretization_estimate) {
    CompositionQuery fine = base;
    fine.grid = grid.refined();
    refined = build_curves(fine);
  }
  for (const std::string& v : o.values) {
    const double x = parse_double(o.over, v);
    CompositionQuery q = base;
    q.target = o.over == "eps" ? Target(Epsilon{x}) : Target(Delta{x});
    rows.push_back(result_json(evaluate(q, curves, refined ? &*refined : nullptr),
                               q.target, o.direction));
  }
  return rows;
}

inline std::vector<Json> run_converge(const Options& o) {
  const Target target = target_from(o);
  std::vector<double> schedule;
  if (!o.values.empty()) {
    for (const std::string& v : o.values) schedule.push_back(parse_double(o.over, v));
  } else {
    if (!o.start) throw UsageError("converge needs --start (or --values)");
    double x = *o.start;
    for (std::uint64_t i = 0; i <= o.doublings; ++i, x *= 2) schedule.push_back(x);
  }
  std::vector<Json> rows;
  if (o.over == "n") {
    // err at n_i comes from the run at 2 n_i: the next row when the schedule
    // doubles, otherwise an extra run.
    std::vector<std::uint64_t> ns;
    for (double x : schedule) {
      if (!(x >= 2) || x != std::floor(x)) {
        throw UsageError("converge --over n needs integer grid sizes");
      }
      ns.push_back(static_cast<std::uint64_t>(x));
    }
    std::optional<CurveSet> current;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const CompositionQuery q = query_from(o, grid_from(o.L, ns[i]), target);
      if (!current) current = build_curves(q);
      std::optional<CurveSet> next;
      if (q.with_discretization_estimate) {
        CompositionQuery fine = q;
        fine.grid = q.grid.refined();
        next = build_curves(fine);
      }
      rows.push_back(result_json(evaluate(q, *current, next ? &*next : nullptr),
                                 target, o.direction));
      const bool doubles = i + 1 < ns.size() && ns[i + 1] == 2 * ns[i];
      current.reset();
      if (doubles && next) current = std::move(next);
    }
    return rows;
  }
  if (o.over == "L") {
    for (double L : schedule) {
      rows.push_back(result_json(evaluate(query_from(o, grid_from(L, o.n), target)),
                                 target, o.direction));
    }
    return rows;
  }
  throw UsageError("converge --over must be n or L");
}

// ---------------------------------------------------------------------------

inline void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--scheme", o.scheme, "poisson | without-replacement | with-replacement")
      ->check(CLI::IsMember({"poisson", "without-replacement", "with-replacement"}));
  sub->add_option("--sigma", o.sigma, "Noise standard deviation (sensitivity 1)");
  sub->add_option("--q", o.q, "Sampling probability (poisson, without-replacement)");
  sub->add_option("--batch-size", o.batch_size, "Batch size m (with-replacement)");
  sub->add_option("--dataset-size", o.dataset_size, "Dataset size (with-replacement)");
  sub->add_option("--k", o.k, "Number of compositions");
  sub->add_option("--mech", o.mechs,
                  "Heterogeneous component, e.g. sigma=1.5,q=0.01,k=100,scheme=poisson "
                  "(repeatable)")
      ->take_all();
  sub->add_option("--direction", o.direction,
                  "xy | yx | both (both reports the max over the two directions)")
      ->check(CLI::IsMember({"xy", "yx", "both"}));
  sub->add_option("--L", o.L, "Truncation radius")->capture_default_str();
  sub->add_option("--n", o.n, "Number of grid points (even)")->capture_default_str();
  sub->add_option("--newton-tol", o.newton_tol, "Newton residual tolerance")
      ->capture_default_str();
  sub->add_flag("--no-disc-estimate", o.no_disc_estimate,
                "Skip the extra run at 2n that estimates the discretisation error");
  sub->add_option("--format", o.format, "json | csv | table")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();
  sub->add_option("--out", o.out_path, "Write the report to FILE instead of stdout");
}

inline int run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Tight (epsilon, delta) accounting for compositions of subsampled "
               "Gaussian mechanisms"};
  app.name("fourier_accountant");
  app.require_subcommand(1);
  Options o;

  CLI::App* delta_cmd = app.add_subcommand("delta", "delta(eps) of the composition");
  add_common(delta_cmd, o);
  delta_cmd->add_option("--eps", o.eps, "Target epsilon")->required();

  CLI::App* eps_cmd = app.add_subcommand("epsilon", "epsilon(delta) of the composition");
  add_common(eps_cmd, o);
  eps_cmd->add_option("--delta", o.delta, "Target delta")->required();

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "One row per eps, delta or k value");
  add_common(sweep_cmd, o);
  sweep_cmd->add_option("--over", o.over, "eps | delta | k")
      ->required()
      ->check(CLI::IsMember({"eps", "delta", "k"}));
  sweep_cmd->add_option("--values", o.values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--eps", o.eps, "Fixed epsilon (sweep over k)");
  sweep_cmd->add_option("--delta", o.delta, "Fixed delta (sweep over k)");

  CLI::App* conv_cmd =
      app.add_subcommand("converge", "One row per grid size n or radius L");
  add_common(conv_cmd, o);
  conv_cmd->add_option("--over", o.over, "n | L")
      ->required()
      ->check(CLI::IsMember({"n", "L"}));
  conv_cmd->add_option("--start", o.start, "First n (or L) of a doubling schedule");
  conv_cmd->add_option("--doublings", o.doublings, "Number of doublings after --start");
  conv_cmd->add_option("--values", o.values, "Explicit comma-separated schedule")
      ->delimiter(',');
  conv_cmd->add_option("--eps", o.eps, "Target epsilon");
  conv_cmd->add_option("--delta", o.delta, "Target delta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help()
                                          : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    std::string command;
    std::vector<Json> rows;
    bool single = false;
    if (delta_cmd->parsed()) {
      command = "delta";
      rows = run_single(o, Epsilon{*o.eps});
      single = true;
    } else if (eps_cmd->parsed()) {
      command = "epsilon";
      rows = run_single(o, Delta{*o.delta});
      single = true;
    } else if (sweep_cmd->parsed()) {
      command = "sweep";
      rows = run_sweep(o);
    } else {
      command = "converge";
      rows = run_converge(o);
    }
    if (!o.out_path.empty()) {
      std::ofstream file(o.out_path);
      if (!file) {
        err << "error: cannot open '" << o.out_path << "' for writing\n";
        return kExitUsage;
      }
      emit(o, command, rows, single, file);
    } else {
      emit(o, command, rows, single, out);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

}  // namespace fourier_accountant::cli

#endif  // FOURIER_ACCOUNTANT_TOOLS_CLI_APP_HPP_
