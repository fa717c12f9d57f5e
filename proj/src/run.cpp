#include "lipuq/run.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lipuq/diameter.hpp"
#include "lipuq/envelope.hpp"
#include "lipuq/errors.hpp"
#include "lipuq/ingest.hpp"
#include "lipuq/pof.hpp"
#include "lipuq/redundancy.hpp"
#include "lipuq/report.hpp"

namespace lipuq::io {

namespace {

constexpr int kSchemaVersion = 1;

const std::vector<std::pair<Command, const char*>>& command_names() {
  static const std::vector<std::pair<Command, const char*>> names = {
      {Command::Validate, "validate"},         {Command::Diameter, "diameter"},
      {Command::Pof, "pof"},                   {Command::PofCurve, "pof-curve"},
      {Command::Envelope, "envelope"},         {Command::Markov, "markov"},
      {Command::ActiveSet, "active-set"},      {Command::Redundancy, "redundancy"},
      {Command::FitLipschitz, "fit-lipschitz"}, {Command::Sweep, "sweep"},
  };
  return names;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ParseError("config: '" + key + "' " + what);
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(key, "must be finite");
  return v;
}

std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) bad(key, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(number(e, key));
  return out;
}

std::vector<Interval> intervals(const json& j, const std::string& key) {
  if (!j.is_array()) bad(key, "must be an array of [lo, hi] pairs");
  std::vector<Interval> out;
  for (const auto& e : j) {
    const auto v = numbers(e, key);
    if (v.size() != 2 || v[0] > v[1]) bad(key, "entries must be [lo, hi] with lo <= hi");
    out.push_back({v[0], v[1]});
  }
  return out;
}

json intervals_json(const std::vector<Interval>& iv) {
  json out = json::array();
  for (const auto& i : iv) out.push_back({i.lo, i.hi});
  return out;
}

int integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) bad(key, "must be an integer");
  return j.get<int>();
}

const char* to_string(solver::ForcedFailure f) {
  switch (f) {
    case solver::ForcedFailure::On:
      return "on";
    case solver::ForcedFailure::Off:
      return "off";
    case solver::ForcedFailure::Auto:
      break;
  }
  return "auto";
}

solver::SolverConfig solver_from_json(const json& j) {
  if (!j.is_object()) bad("solver", "must be an object");
  solver::SolverConfig c;
  for (const auto& [key, v] : j.items()) {
    const std::string k = "solver." + key;
    if (key == "outer_npop") c.outer_npop = integer(v, k);
    else if (key == "outer_ngen") c.outer_ngen = integer(v, k);
    else if (key == "outer_tol") c.outer_tol = number(v, k);
    else if (key == "outer_max_generations") c.outer_max_generations = integer(v, k);
    else if (key == "inner_npop") c.inner_npop = integer(v, k);
    else if (key == "inner_tol") c.inner_tol = number(v, k);
    else if (key == "inner_budget") c.inner_budget = integer(v, k);
    else if (key == "short_tol") c.short_tol = number(v, k);
    else if (key == "mean_tol") c.mean_tol = number(v, k);
    else if (key == "de_weight") c.de_weight = number(v, k);
    else if (key == "de_crossover") c.de_crossover = number(v, k);
    else if (key == "restarts") c.restarts = integer(v, k);
    else if (key == "threads") c.threads = integer(v, k);
    else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        bad(k, "must be a non-negative integer");
      }
      c.seed = v.get<std::uint64_t>();
    } else if (key == "inner_adjust_positions") {
      if (!v.is_boolean()) bad(k, "must be true or false");
      c.inner_adjust_positions = v.get<bool>();
    } else if (key == "forced_failure") {
      const std::string s = v.is_string() ? v.get<std::string>() : "";
      if (s == "auto") c.forced_failure = solver::ForcedFailure::Auto;
      else if (s == "on") c.forced_failure = solver::ForcedFailure::On;
      else if (s == "off") c.forced_failure = solver::ForcedFailure::Off;
      else bad(k, "must be \"auto\", \"on\" or \"off\"");
    } else {
      bad(k, "is not a known setting");
    }
  }
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

json solver_to_json(const solver::SolverConfig& c) {
  return {{"outer_npop", c.outer_npop},
          {"outer_ngen", c.outer_ngen},
          {"outer_tol", c.outer_tol},
          {"outer_max_generations", c.outer_max_generations},
          {"inner_npop", c.inner_npop},
          {"inner_tol", c.inner_tol},
          {"inner_budget", c.inner_budget},
          {"short_tol", c.short_tol},
          {"mean_tol", c.mean_tol},
          {"seed", c.seed},
          {"de_weight", c.de_weight},
          {"de_crossover", c.de_crossover},
          {"restarts", c.restarts},
          {"inner_adjust_positions", c.inner_adjust_positions},
          {"forced_failure", to_string(c.forced_failure)},
          {"threads", c.threads}};
}

Dataset data_from_json(const json& j, std::size_t dim) {
  if (!j.is_object()) bad("data", "must be an object with points and values");
  for (const auto& [key, v] : j.items()) {
    if (key != "labels" && key != "points" && key != "values") bad("data." + key, "is not a known field");
  }
  if (!j.contains("points") || !j.contains("values")) bad("data", "needs points and values");
  const auto& pts = j.at("points");
  const auto vals = numbers(j.at("values"), "data.values");
  if (!pts.is_array() || pts.size() != vals.size()) bad("data", "points and values differ in length");
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    if (!j.at("labels").is_array() || j.at("labels").size() != vals.size()) {
      bad("data.labels", "must be an array as long as values");
    }
    for (const auto& l : j.at("labels")) {
      if (!l.is_string()) bad("data.labels", "must hold strings");
      labels.push_back(l.get<std::string>());
    }
  }
  Dataset d(dim);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    auto x = numbers(pts[i], "data.points");
    if (x.size() != dim) bad("data.points", "entries must have one coordinate per domain axis");
    d.add(std::move(x), vals[i], labels.empty() ? std::string{} : labels[i]);
  }
  return d;
}

json data_to_json(const Dataset& d) {
  return {{"labels", d.labels()}, {"points", d.samples().points}, {"values", d.samples().values}};
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

ProblemSpec make_spec(const RunConfig& c, double theta) {
  return ProblemSpec(BoxDomain(c.domain), LipschitzSpec(c.lipschitz, c.tolerance), *c.data, c.mean,
                     theta);
}

struct Outcome {
  json result;
  int outcome = 0;
};

json pair_json(const Dataset& data, const PairViolation& v) {
  return {{"first", data.label(v.first)}, {"second", data.label(v.second)}, {"excess", v.excess}};
}

// ---------------------------------------------------------------------------
// Commands

Outcome run_validate(const RunConfig& c) {
  const LipschitzSpec lip(c.lipschitz, c.tolerance);
  Outcome o;
  const auto worst = worst_violation(*c.data, lip);
  o.result = {{"observations", c.data->size()},
              {"lipschitz_feasible", !worst.has_value()},
              {"worst_pair", worst ? pair_json(*c.data, *worst) : json(nullptr)}};
  o.outcome = worst ? 1 : 0;
  return o;
}

Outcome run_diameter(const RunConfig& c, RunOutput& out) {
  const auto spec = make_spec(c, c.theta);
  Outcome o;
  json coords = json::array();
  std::vector<diameter::DiameterReport> reps;
  if (c.k) {
    if (*c.k >= spec.dim()) throw ContractError("diameter: k is out of range");
    reps.push_back(diameter::dhat_k(spec, *c.k, c.solver));
  } else {
    reps = diameter::dhat_all(spec, c.solver);
  }
  std::vector<double> values;
  for (auto& r : reps) {
    coords.push_back(to_json(r));
    values.push_back(r.dhat_k);
    out.traces.emplace_back("diameter-k" + std::to_string(r.k), std::move(r.trace));
  }
  o.result = {{"coordinates", coords},
              {"gamma", real(reps.front().gamma)},
              {"error_cap", real(reps.front().error_cap)}};
  if (!c.k) {
    const double d = diameter::dhat(values);
    o.result["dhat"] = d;
    o.result["mcdiarmid_bound"] = diameter::mcdiarmid_pof_bound(c.mean, c.theta, d);
  }
  return o;
}

pof::PofOptions pof_options(const RunConfig& c) {
  pof::PofOptions po;
  po.direction = c.direction;
  po.shape = c.support_shape;
  return po;
}

Outcome run_pof(const RunConfig& c, RunOutput& out) {
  const auto spec = make_spec(c, c.theta);
  auto rep = pof::solve(spec, c.solver, pof_options(c));
  Outcome o;
  o.result = to_json(rep);
  if (c.direction == solver::Direction::Maximize) {
    o.result["markov_consistent"] = rep.phat <= rep.markov.bound + c.solver.outer_tol;
  }
  o.outcome = rep.status == pof::Status::Infeasible ? 1 : 0;
  out.traces.emplace_back("pof", std::move(rep.trace));
  return o;
}

Outcome run_pof_curve(const RunConfig& c, RunOutput& out) {
  if (c.thetas.empty()) throw ContractError("pof-curve: thetas is empty");
  const auto spec = make_spec(c, c.thetas.front());
  auto sweep = pof::theta_sweep(spec, c.thetas, c.solver, pof_options(c));
  Outcome o;
  json entries = json::array();
  std::ostringstream csv;
  csv << "theta,phat,markov_bound,gap\n";
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    auto& e = sweep[i];
    entries.push_back({{"theta", e.report.theta},
                       {"phat", e.report.phat},
                       {"markov_bound", e.markov_bound},
                       {"gap", e.gap},
                       {"status", pof::to_string(e.report.status)},
                       {"valid", e.report.verification.valid},
                       {"evaluations", e.report.evaluations},
                       {"witness", to_json(e.report.scenario)}});
    csv << format_double(e.report.theta) << ',' << format_double(e.report.phat) << ','
        << format_double(e.markov_bound) << ',' << format_double(e.gap) << '\n';
    if (e.report.status == pof::Status::Infeasible) o.outcome = 1;
    out.traces.emplace_back("pof-theta" + std::to_string(i), std::move(e.report.trace));
  }
  o.result = {{"entries", entries}};
  if (!sweep.empty()) o.result["markov"] = to_json(sweep.front().report.markov);
  out.table_csv = csv.str();
  return o;
}

Outcome run_envelope(const RunConfig& c) {
  const LipschitzSpec lip(c.lipschitz, c.tolerance);
  const BoxDomain dom(c.domain);
  const envelope::Envelope env(*c.data, lip);
  std::vector<Point> pts = c.at;
  if (c.grid > 0) {
    if (c.grid < 2) throw ContractError("envelope: grid needs at least 2 points per axis");
    double total = std::pow(static_cast<double>(c.grid), static_cast<double>(dom.dim()));
    if (total > 1e6) throw ContractError("envelope: grid exceeds one million points");
    const auto n = static_cast<std::size_t>(c.grid);
    const auto count = static_cast<std::size_t>(total);
    for (std::size_t idx = 0; idx < count; ++idx) {
      Point x(dom.dim());
      std::size_t rest = idx;
      for (std::size_t k = dom.dim(); k-- > 0;) {
        const double t = static_cast<double>(rest % n) / static_cast<double>(n - 1);
        rest /= n;
        x[k] = dom[k].lo + t * dom[k].width();
      }
      pts.push_back(std::move(x));
    }
  }
  if (pts.empty()) throw ContractError("envelope: give query points or a grid");
  json values = json::array();
  for (const auto& x : pts) {
    if (x.size() != dom.dim()) throw ContractError("envelope: query point has the wrong dimension");
    values.push_back({{"x", x}, {"lower", real(env.lower(x))}, {"upper", real(env.upper(x))}});
  }
  return {{{"points", values}}, 0};
}

Outcome run_markov(const RunConfig& c, RunOutput& out) {
  const auto spec = make_spec(c, c.theta);
  auto mm = envelope::markov_max(spec, c.solver);
  const double M = mm.search.value.value();
  const auto b = envelope::markov_bound(M, c.mean, c.theta);
  Outcome o;
  o.result = {{"M", real(M)},
              {"argmax", mm.search.argmax},
              {"binding", labels(*c.data, mm.binding)},
              {"bound", b.value},
              {"vacuous", b.vacuous},
              {"seed", mm.search.seed},
              {"evaluations", mm.search.evaluations}};
  out.traces.emplace_back("markov", std::move(mm.search.trace));
  return o;
}

Outcome run_active_set(const RunConfig& c, RunOutput& out) {
  const auto spec = make_spec(c, c.theta);
  redundancy::ActiveSetOptions ao;
  ao.shape = c.support_shape;
  ao.single_winner = c.single_winner;
  ao.max_iterations = c.max_iterations;
  if (c.objective == "pof") {
    ao.objective = redundancy::Objective::Pof;
  } else if (c.objective.rfind("diameter:", 0) == 0) {
    ao.objective = redundancy::Objective::Diameter;
    const std::string idx = c.objective.substr(9);
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) {
      throw ContractError("active-set: objective must be pof or diameter:<k>");
    }
    ao.k = std::stoul(idx);
  } else {
    throw ContractError("active-set: objective must be pof or diameter:<k>");
  }
  auto r = redundancy::active_set_solve(spec, c.solver, ao);
  Outcome o;
  o.result = to_json(r, *c.data);
  o.result["objective"] = c.objective;
  if (r.pof) {
    if (r.pof->status == pof::Status::Infeasible) o.outcome = 1;
    out.traces.emplace_back("active-set", std::move(r.pof->trace));
  }
  if (r.diameter) out.traces.emplace_back("active-set", std::move(r.diameter->trace));
  return o;
}

Outcome run_redundancy(const RunConfig& c) {
  const BoxDomain dom(c.domain);
  const redundancy::Region v(c.region);
  if (!redundancy::region_within(v, dom)) throw ContractError("redundancy: region must lie in the domain");
  const LipschitzSpec lip(c.lipschitz, c.tolerance);
  const Dataset& data = *c.data;
  std::vector<std::size_t> inside;
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (v.contains(data.point(i)) ? inside : outside).push_back(i);
  }
  const Dataset in_v = data.subset(inside);
  json rows = json::array();
  for (std::size_t i : outside) {
    const redundancy::Datum z{data.point(i), data.value(i)};
    const bool redundant = !in_v.empty() && redundancy::is_redundant_sufficient(z, v, in_v, lip);
    rows.push_back({{"label", data.label(i)},
                    {"x", data.point(i)},
                    {"value", data.value(i)},
                    {"projection", redundancy::project(data.point(i), v)},
                    {"classification", redundant ? "redundant" : "inconclusive"}});
  }
  return {{{"region", intervals_json(c.region)},
           {"inside", labels(data, inside)},
           {"outside", rows}},
          0};
}

Outcome run_fit_lipschitz(const RunConfig& c, RunOutput& out) {
  auto fit = envelope::fit_lipschitz(BoxDomain(c.domain), *c.data, c.tolerance, c.bounds, c.solver);
  Outcome o;
  o.result = {{"lipschitz", fit.lip.constants()},
              {"tolerance", fit.lip.tolerance()},
              {"gamma", to_json(fit.gap)},
              {"seed", fit.seed},
              {"evaluations", fit.evaluations}};
  out.traces.emplace_back("fit-lipschitz", std::move(fit.trace));
  return o;
}

Outcome run_sweep(const RunConfig& c, RunOutput& out) {
  if (c.scale_l.empty()) throw ContractError("sweep: scale_L is empty");
  Outcome o;
  json entries = json::array();
  std::ostringstream csv;
  csv << "factor,phat,markov_bound,status\n";
  const LipschitzSpec base(c.lipschitz, c.tolerance);
  for (std::size_t i = 0; i < c.scale_l.size(); ++i) {
    const double f = c.scale_l[i];
    const auto lip = base.scaled(f);
    json e = {{"factor", f}, {"lipschitz", lip.constants()}};
    if (auto w = worst_violation(*c.data, lip)) {
      e["status"] = "infeasible_data";
      e["worst_pair"] = pair_json(*c.data, *w);
      csv << format_double(f) << ",,,infeasible_data\n";
    } else {
      const ProblemSpec spec(BoxDomain(c.domain), lip, *c.data, c.mean, c.theta);
      auto rep = pof::solve(spec, c.solver, pof_options(c));
      e["status"] = pof::to_string(rep.status);
      e["phat"] = rep.phat;
      e["markov_bound"] = rep.markov.bound;
      e["witness"] = to_json(rep.scenario);
      csv << format_double(f) << ',' << format_double(rep.phat) << ','
          << format_double(rep.markov.bound) << ',' << pof::to_string(rep.status) << '\n';
      out.traces.emplace_back("sweep-" + std::to_string(i), std::move(rep.trace));
    }
    entries.push_back(std::move(e));
  }
  o.result = {{"entries", entries}};
  out.table_csv = csv.str();
  return o;
}

}  // namespace

const char* to_string(Command c) {
  for (const auto& [cmd, name] : command_names()) {
    if (cmd == c) return name;
  }
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (const auto& [cmd, n] : command_names()) {
    if (name == n) return cmd;
  }
  throw ParseError("unknown command '" + name + "'");
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config: expected a JSON object");
  RunConfig c;
  const json* data = nullptr;
  for (const auto& [key, v] : j.items()) {
    if (key == "command") {
      if (!v.is_string()) bad(key, "must be a string");
      c.command = parse_command(v.get<std::string>());
    } else if (key == "domain") c.domain = intervals(v, key);
    else if (key == "lipschitz") c.lipschitz = numbers(v, key);
    else if (key == "tolerance") c.tolerance = number(v, key);
    else if (key == "mean") c.mean = number(v, key);
    else if (key == "theta") c.theta = number(v, key);
    else if (key == "thetas") c.thetas = numbers(v, key);
    else if (key == "direction") {
      const std::string s = v.is_string() ? v.get<std::string>() : "";
      if (s == "sup") c.direction = solver::Direction::Maximize;
      else if (s == "inf") c.direction = solver::Direction::Minimize;
      else bad(key, "must be \"sup\" or \"inf\"");
    } else if (key == "support_shape") {
      if (!v.is_array()) bad(key, "must be an array of 1s and 2s");
      c.support_shape.clear();
      for (const auto& e : v) c.support_shape.push_back(integer(e, key));
    } else if (key == "dataset") {
      if (!v.is_string()) bad(key, "must be a path string");
      c.dataset = v.get<std::string>();
    } else if (key == "data") data = &v;
    else if (key == "columns") {
      if (!v.is_array()) bad(key, "must be an array of strings");
      c.columns = v.get<std::vector<std::string>>();
    } else if (key == "solver") c.solver = solver_from_json(v);
    else if (key == "k") {
      if (v.is_string() && v.get<std::string>() == "all") c.k.reset();
      else if (v.is_number_integer() && v.get<long long>() >= 0) c.k = v.get<std::size_t>();
      else bad(key, "must be \"all\" or a coordinate index");
    } else if (key == "at") {
      if (!v.is_array()) bad(key, "must be an array of points");
      c.at.clear();
      for (const auto& p : v) c.at.push_back(numbers(p, key));
    } else if (key == "grid") c.grid = integer(v, key);
    else if (key == "objective") {
      if (!v.is_string()) bad(key, "must be a string");
      c.objective = v.get<std::string>();
    } else if (key == "single_winner") {
      if (!v.is_boolean()) bad(key, "must be true or false");
      c.single_winner = v.get<bool>();
    } else if (key == "max_iterations") c.max_iterations = integer(v, key);
    else if (key == "region") c.region = intervals(v, key);
    else if (key == "bounds") c.bounds = intervals(v, key);
    else if (key == "scale_L") c.scale_l = numbers(v, key);
    else bad(key, "is not a known setting");
  }
  if (c.domain.empty()) bad("domain", "is required");
  if (c.lipschitz.size() != c.domain.size()) bad("lipschitz", "needs one constant per domain axis");
  if (data) c.data = data_from_json(*data, c.domain.size());
  return c;
}

json config_to_json(const RunConfig& c) {
  json j = {{"command", to_string(c.command)},
            {"domain", intervals_json(c.domain)},
            {"lipschitz", c.lipschitz},
            {"tolerance", c.tolerance},
            {"mean", c.mean},
            {"theta", c.theta},
            {"thetas", c.thetas},
            {"direction", c.direction == solver::Direction::Maximize ? "sup" : "inf"},
            {"support_shape", c.support_shape},
            {"dataset", c.dataset},
            {"columns", c.columns},
            {"solver", solver_to_json(c.solver)},
            {"at", c.at},
            {"grid", c.grid},
            {"objective", c.objective},
            {"single_winner", c.single_winner},
            {"max_iterations", c.max_iterations},
            {"region", intervals_json(c.region)},
            {"bounds", intervals_json(c.bounds)},
            {"scale_L", c.scale_l}};
  j["k"] = c.k ? json(*c.k) : json("all");
  if (c.data) j["data"] = data_to_json(*c.data);
  return j;
}

std::vector<std::string> load_data(RunConfig& c) {
  if (c.data) {
    c.data->check_inside(BoxDomain(c.domain));
    return repeated_input_notes(*c.data);
  }
  if (c.dataset.empty()) throw ParseError("config: give a dataset path or inline data");
  auto res = ingest_csv(c.dataset, BoxDomain(c.domain));
  c.data = std::move(res.data);
  c.columns = std::move(res.columns);
  return res.notes;
}

RunOutput run(RunConfig config) {
  RunOutput out;
  const auto notes = load_data(config);
  json report = {{"tool", "lipuq"},
                 {"version", kVersion},
                 {"schema_version", kSchemaVersion},
                 {"command", to_string(config.command)},
                 {"config", config_to_json(config)},
                 {"seed", config.solver.seed},
                 {"notes", notes}};
  Outcome o;
  try {
    switch (config.command) {
      case Command::Validate:
        o = run_validate(config);
        break;
      case Command::Diameter:
        o = run_diameter(config, out);
        break;
      case Command::Pof:
        o = run_pof(config, out);
        break;
      case Command::PofCurve:
        o = run_pof_curve(config, out);
        break;
      case Command::Envelope:
        o = run_envelope(config);
        break;
      case Command::Markov:
        o = run_markov(config, out);
        break;
      case Command::ActiveSet:
        o = run_active_set(config, out);
        break;
      case Command::Redundancy:
        o = run_redundancy(config);
        break;
      case Command::FitLipschitz:
        o = run_fit_lipschitz(config, out);
        break;
      case Command::Sweep:
        o = run_sweep(config, out);
        break;
    }
  } catch (const InfeasibleError& e) {
    o.result = {{"error", e.what()}};
    o.outcome = 1;
    out.traces.clear();
    out.table_csv.clear();
  }
  report["status"] = o.outcome == 0 ? "ok" : "infeasible";
  report["result"] = std::move(o.result);
  out.report = std::move(report);
  out.outcome = o.outcome;
  return out;
}

}  // namespace lipuq::io
