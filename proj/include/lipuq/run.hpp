#pragma once

// Run configuration for the command-line tool and the C API, and the
// dispatcher that turns one configuration into one JSON report.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lipuq/core.hpp"
#include "lipuq/solver.hpp"

namespace lipuq::io {

inline constexpr const char* kVersion = "0.1.0";

enum class Command {
  Validate,
  Diameter,
  Pof,
  PofCurve,
  Envelope,
  Markov,
  ActiveSet,
  Redundancy,
  FitLipschitz,
  Sweep,
};

const char* to_string(Command c);
/// Throws ParseError for an unknown name.
Command parse_command(const std::string& name);

struct RunConfig {
  Command command = Command::Validate;
  std::vector<Interval> domain;
  std::vector<double> lipschitz;
  double tolerance = 0.0;
  double mean = 0.0;
  double theta = 0.0;
  std::vector<double> thetas;
  solver::Direction direction = solver::Direction::Maximize;
  SupportShape support_shape;  // empty: full support
  std::string dataset;         // CSV path, as given
  std::optional<Dataset> data; // inline rows; used instead of `dataset` when present
  std::vector<std::string> columns;
  solver::SolverConfig solver;
  std::optional<std::size_t> k;  // diameter coordinate; empty means all
  std::vector<Point> at;         // envelope query points
  int grid = 0;                  // envelope grid points per axis
  std::string objective = "pof"; // active-set: "pof" or "diameter:<k>"
  bool single_winner = false;
  int max_iterations = 0;
  std::vector<Interval> region;
  std::vector<Interval> bounds;  // fit-lipschitz search box for L
  std::vector<double> scale_l;   // sweep factors
};

/// Strict: unknown keys and ill-typed values throw ParseError. Fields that
/// are absent keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);
/// Echo of every field, with the data inline, so the report replays alone.
nlohmann::json config_to_json(const RunConfig& c);

/// Reads the CSV named by `dataset` into `data` unless rows are inline.
/// Returns informational notes.
std::vector<std::string> load_data(RunConfig& c);

struct RunOutput {
  nlohmann::json report;
  std::vector<std::pair<std::string, solver::Trace>> traces;
  std::string table_csv;  // pof-curve and sweep only
  int outcome = 0;        // 0 success, 1 infeasible
};

/// Runs one command. Infeasible data or problems produce a report with
/// status "infeasible" and outcome 1; contract and parse errors throw.
RunOutput run(RunConfig config);

}  // namespace lipuq::io
