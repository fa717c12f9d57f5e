// lipuq command-line tool. Builds a JSON run configuration from a config
// file and flags, runs it through the C API and writes the JSON report.

#include <CLI11.hpp>
#include <toml.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lipuq/lipuq.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json toml_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
    return out;
  }
  if (const auto* a = n.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(toml_to_json(v));
    return out;
  }
  if (const auto* s = n.as_string()) return s->get();
  if (const auto* i = n.as_integer()) return i->get();
  if (const auto* f = n.as_floating_point()) return f->get();
  if (const auto* b = n.as_boolean()) return b->get();
  throw UsageError("config: dates and times are not supported");
}

// TOML or JSON by extension; a previous report contributes its "config".
json read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(path.string() + ": cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  if (path.extension() == ".toml") {
    try {
      j = toml_to_json(toml::parse(buf.str(), path.string()));
    } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << path.string() << ":" << e.source().begin.line << ": " << e.description();
      throw UsageError(os.str());
    }
  } else {
    try {
      j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw UsageError(path.string() + ": " + e.what());
    }
  }
  // A report carries its data inline; its dataset path is an echo only.
  const bool replay = j.is_object() && j.contains("config") && j.contains("result");
  if (replay) j = j.at("config");
  if (!j.is_object()) throw UsageError(path.string() + ": expected a table of settings");
  // Relative data paths are relative to the config file.
  if (!replay && j.contains("dataset") && j["dataset"].is_string()) {
    fs::path d = j["dataset"].get<std::string>();
    if (!d.empty() && d.is_relative()) j["dataset"] = (path.parent_path() / d).lexically_normal().string();
  }
  return j;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end == item.c_str() || *end != '\0') {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

// "lo:hi,lo:hi,..."
json parse_box(const std::string& text, const std::string& flag) {
  json out = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError(flag + ": expected lo:hi, got '" + item + "'");
    const auto lo = parse_list(item.substr(0, colon), flag);
    const auto hi = parse_list(item.substr(colon + 1), flag);
    out.push_back({lo.front(), hi.front()});
  }
  if (out.empty()) throw UsageError(flag + ": empty box");
  return out;
}

struct Flags {
  std::string config;
  std::string data;
  std::string domain;
  std::string lipschitz;
  std::optional<double> tolerance;
  std::optional<double> mean;
  std::optional<double> theta;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> restarts;
  std::optional<double> outer_tol;
  std::string output;
  std::string trace_dir;
  // subcommand-specific
  std::string k;
  std::string direction;
  std::string collapse;
  std::string thetas;
  std::vector<std::string> at;
  std::optional<int> grid;
  std::string objective;
  bool single_winner = false;
  std::optional<int> max_iterations;
  std::string region;
  std::string bounds;
  std::string scale_l;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("-c,--config", f.config, "TOML or JSON config, or a previous report to replay");
  sub->add_option("-d,--data", f.data, "CSV dataset: [label,] K inputs, output");
  sub->add_option("--domain", f.domain, "input box, lo:hi per coordinate, comma separated");
  sub->add_option("-L,--lipschitz", f.lipschitz, "Lipschitz constants, comma separated");
  sub->add_option("-T,--tolerance", f.tolerance, "additive Lipschitz tolerance");
  sub->add_option("-m,--mean", f.mean, "lower bound on the mean output");
  sub->add_option("--seed", f.seed, "master seed (overrides config and LIPUQ_SEED)");
  sub->add_option("--threads", f.threads, "worker threads");
  sub->add_option("--restarts", f.restarts, "outer optimiser restarts");
  sub->add_option("--outer-tol", f.outer_tol, "change-over-generations tolerance");
  sub->add_option("-o,--output", f.output, "report path ('-' for stdout)");
  sub->add_option("--trace-dir", f.trace_dir, "directory for trace CSVs (default: next to the report)");
}

json build_config(const std::string& command, const Flags& f) {
  json j = f.config.empty() ? json::object() : read_config(f.config);
  if (command != "run") {
    j["command"] = command;
  } else if (!j.contains("command")) {
    throw UsageError("run: the config names no command");
  }
  if (!f.data.empty()) {
    j["dataset"] = f.data;
    j.erase("data");
  }
  if (!f.domain.empty()) j["domain"] = parse_box(f.domain, "--domain");
  if (!f.lipschitz.empty()) j["lipschitz"] = parse_list(f.lipschitz, "--lipschitz");
  if (f.tolerance) j["tolerance"] = *f.tolerance;
  if (f.mean) j["mean"] = *f.mean;
  if (f.theta) j["theta"] = *f.theta;
  if (!f.thetas.empty()) j["thetas"] = parse_list(f.thetas, "--thetas");
  if (!f.direction.empty()) j["direction"] = f.direction;
  if (!f.collapse.empty()) {
    json shape = json::array();
    for (double v : parse_list(f.collapse, "--collapse")) shape.push_back(static_cast<int>(v));
    j["support_shape"] = shape;
  }
  if (!f.k.empty()) {
    if (f.k == "all") {
      j["k"] = "all";
    } else {
      try {
        j["k"] = std::stoul(f.k);
      } catch (const std::exception&) {
        throw UsageError("--k: expected 'all' or a coordinate index");
      }
    }
  }
  if (!f.at.empty()) {
    json pts = json::array();
    for (const auto& a : f.at) pts.push_back(parse_list(a, "--at"));
    j["at"] = pts;
  }
  if (f.grid) j["grid"] = *f.grid;
  if (!f.objective.empty()) j["objective"] = f.objective;
  if (f.single_winner) j["single_winner"] = true;
  if (f.max_iterations) j["max_iterations"] = *f.max_iterations;
  if (!f.region.empty()) j["region"] = parse_box(f.region, "--region");
  if (!f.bounds.empty()) j["bounds"] = parse_box(f.bounds, "--bounds");
  if (!f.scale_l.empty()) j["scale_L"] = parse_list(f.scale_l, "--scale-L");

  json& s = j["solver"];
  if (s.is_null()) s = json::object();
  if (f.threads) s["threads"] = *f.threads;
  if (f.restarts) s["restarts"] = *f.restarts;
  if (f.outer_tol) s["outer_tol"] = *f.outer_tol;
  // Seed precedence: --seed, then the config, then LIPUQ_SEED.
  if (f.seed) {
    s["seed"] = *f.seed;
  } else if (!s.contains("seed")) {
    if (const char* env = std::getenv("LIPUQ_SEED"); env && *env) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (*end != '\0') throw UsageError(std::string("LIPUQ_SEED: '") + env + "' is not an integer");
      s["seed"] = v;
    }
  }
  return j;
}

void write_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!(out << text) || !out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot write " + path.string() + ": " + ec.message());
  }
}

struct Handles {
  lipuq_problem* problem = nullptr;
  lipuq_result* result = nullptr;
  ~Handles() {
    lipuq_result_free(result);
    lipuq_problem_free(problem);
  }
};

int execute(const std::string& command, const Flags& f) {
  const auto start = std::chrono::steady_clock::now();
  const json config = build_config(command, f);

  Handles h;
  lipuq_status st = lipuq_problem_create(config.dump().c_str(), &h.problem);
  if (st != LIPUQ_OK) {
    std::cerr << "lipuq: " << lipuq_last_error() << '\n';
    return st == LIPUQ_INFEASIBLE ? 1 : (st == LIPUQ_INTERNAL ? kExitInternal : kExitUsage);
  }
  st = lipuq_problem_run(h.problem, &h.result);
  if (!h.result) {
    std::cerr << "lipuq: " << lipuq_last_error() << '\n';
    return st == LIPUQ_INFEASIBLE ? 1 : (st == LIPUQ_INTERNAL ? kExitInternal : kExitUsage);
  }
  json report = json::parse(lipuq_result_json(h.result));
  const std::string name = report.at("command").get<std::string>();

  const bool to_stdout = f.output == "-";
  const fs::path out_path = f.output.empty() ? fs::path(name + ".json") : fs::path(f.output);
  fs::path trace_dir;
  if (!f.trace_dir.empty()) trace_dir = f.trace_dir;
  else if (!to_stdout) trace_dir = out_path.parent_path();
  const std::string stem = to_stdout ? name : out_path.stem().string();

  json trace_files = json::array();
  if (!to_stdout || !f.trace_dir.empty()) {
    if (!trace_dir.empty()) fs::create_directories(trace_dir);
    for (std::size_t i = 0; i < lipuq_result_trace_count(h.result); ++i) {
      const std::string file = stem + "." + lipuq_result_trace_name(h.result, i) + ".trace.csv";
      write_atomic(trace_dir / file, lipuq_result_trace_csv(h.result, i));
      trace_files.push_back(file);
    }
    const std::string table = lipuq_result_table_csv(h.result);
    if (!table.empty()) {
      const std::string file = stem + ".table.csv";
      write_atomic(trace_dir / file, table);
      report["table_file"] = file;
    }
  }
  report["trace_files"] = trace_files;
  report["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string text = report.dump(2) + "\n";
  if (to_stdout) {
    std::cout << text;
  } else {
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_atomic(out_path, text);
  }

  const int outcome = lipuq_result_outcome(h.result);
  if (outcome != 0) {
    std::cerr << "lipuq: " << name << ": infeasible";
    const auto& r = report.at("result");
    if (r.contains("worst_pair") && r["worst_pair"].is_object()) {
      std::cerr << "; worst pair " << r["worst_pair"]["first"].get<std::string>() << " / "
                << r["worst_pair"]["second"].get<std::string>() << " exceeds the bound by "
                << r["worst_pair"]["excess"].get<double>();
    } else if (r.contains("error")) {
      std::cerr << "; " << r["error"].get<std::string>();
    } else if (r.contains("message") && r["message"].is_string()) {
      std::cerr << "; " << r["message"].get<std::string>();
    }
    std::cerr << '\n';
  }
  return outcome;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lipuq: optimal bounds from Lipschitz legacy data"};
  app.set_version_flag("--version", std::string(lipuq_version()));
  app.require_subcommand(1);

  Flags f;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(s, f);
    subs.emplace_back(name, s);
    return s;
  };

  sub("validate", "check the data against the Lipschitz constants");
  sub("diameter", "subdiameter bounds")->add_option("--k", f.k, "'all' or a coordinate index");
  auto* pof = sub("pof", "optimal bound on the probability of failure");
  pof->add_option("--theta", f.theta, "failure threshold");
  pof->add_option("--direction", f.direction, "sup or inf")->check(CLI::IsMember({"sup", "inf"}));
  pof->add_option("--collapse", f.collapse, "support shape, 1 or 2 per coordinate");
  auto* curve = sub("pof-curve", "bound over a list of thresholds");
  curve->add_option("--thetas", f.thetas, "ascending thresholds, comma separated");
  curve->add_option("--direction", f.direction, "sup or inf")->check(CLI::IsMember({"sup", "inf"}));
  curve->add_option("--collapse", f.collapse, "support shape, 1 or 2 per coordinate");
  auto* env = sub("envelope", "upper and lower data envelopes");
  env->add_option("--at", f.at, "query point, comma separated (repeatable)");
  env->add_option("--grid", f.grid, "grid points per axis");
  sub("markov", "largest value the data allow, and the Markov bound")
      ->add_option("--theta", f.theta, "failure threshold");
  auto* active = sub("active-set", "solve through a small enforced subset of the data");
  active->add_option("--objective", f.objective, "pof or diameter:<k>");
  active->add_option("--theta", f.theta, "failure threshold");
  active->add_option("--collapse", f.collapse, "support shape, 1 or 2 per coordinate");
  active->add_flag("--single-winner", f.single_winner, "admit one maximiser per iteration");
  active->add_option("--max-iterations", f.max_iterations, "iteration cap");
  sub("redundancy", "classify data outside a region")
      ->add_option("--region", f.region, "lo:hi per coordinate");
  sub("fit-lipschitz", "smallest feasible Lipschitz constants in a box")
      ->add_option("--bounds", f.bounds, "lo:hi per coordinate");
  auto* sweep = sub("sweep", "re-solve the bound under scaled Lipschitz constants");
  sweep->add_option("--scale-L", f.scale_l, "factors, comma separated");
  sweep->add_option("--theta", f.theta, "failure threshold");
  sweep->add_option("--collapse", f.collapse, "support shape, 1 or 2 per coordinate");
  sub("run", "run the command named in the config (replays a report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    for (const auto& [name, s] : subs) {
      if (s->parsed()) return execute(name, f);
    }
  } catch (const UsageError& e) {
    std::cerr << "lipuq: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "lipuq: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
