#include "lipuq/report.hpp"

#include <cmath>

namespace lipuq::io {

json real(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

json real(const ExtendedReal& v) {
  switch (v.kind()) {
    case ExtendedReal::Kind::PlusInfinity:
      return "+inf";
    case ExtendedReal::Kind::MinusInfinity:
      return "-inf";
    case ExtendedReal::Kind::Finite:
      break;
  }
  return real(v.value());
}

json labels(const Dataset& data, std::span<const std::size_t> indices) {
  json out = json::array();
  for (std::size_t i : indices) out.push_back(data.label(i));
  return out;
}

json to_json(const Scenario& s) {
  json vertices = json::array();
  for (std::uint32_t eps = 0; eps < s.vertex_count(); ++eps) {
    vertices.push_back({{"index", CubeIndex(s.dim(), eps).str()},
                        {"x", s.vertex(eps)},
                        {"y", real(s.y[eps])},
                        {"weight", s.weight(eps)}});
  }
  return {{"x0", s.x0}, {"x1", s.x1}, {"p", s.p},
          {"support_shape", s.shape}, {"vertices", vertices}};
}

json to_json(const solver::VerificationRecord& v) {
  return {{"valid", v.valid},
          {"weight_sum", v.weight_sum},
          {"mean", real(v.mean)},
          {"mean_slack", real(v.mean_slack)},
          {"max_scenario_violation", real(v.max_scenario_violation)},
          {"max_data_violation", real(v.max_data_violation)},
          {"objective", real(v.objective)},
          {"violations", v.violations}};
}

json to_json(const pof::MarkovCheck& m) {
  return {{"M", real(m.M)}, {"argmax", m.argmax}, {"bound", m.bound}, {"vacuous", m.vacuous}};
}

json to_json(const pof::PofReport& r) {
  return {{"direction", r.direction == solver::Direction::Maximize ? "sup" : "inf"},
          {"phat", r.phat},
          {"theta", r.theta},
          {"m", r.m},
          {"status", pof::to_string(r.status)},
          {"message", r.message},
          {"support_shape", r.shape},
          {"forced_failure", r.forced_failure},
          {"markov", to_json(r.markov)},
          {"witness", to_json(r.scenario)},
          {"verification", to_json(r.verification)},
          {"residual", real(r.residual)},
          {"seed", r.seed},
          {"restarts", r.restarts},
          {"evaluations", r.evaluations},
          {"inner_evaluations", r.inner_evaluations},
          {"generations", r.trace.rows.empty() ? 0 : r.trace.rows.back().generation}};
}

json to_json(const diameter::DiameterReport& r) {
  return {{"k", r.k},
          {"dhat_k", r.dhat_k},
          {"witness", {{"x", r.x}, {"y", real(r.y)}, {"x_prime", r.x_prime}, {"y_prime", real(r.y_prime)}}},
          {"gamma", real(r.gamma)},
          {"error_cap", real(r.error_cap)},
          {"non_unique", r.non_unique},
          {"seed", r.seed},
          {"evaluations", r.evaluations}};
}

json to_json(const envelope::SearchReport& r) {
  return {{"value", real(r.value)},
          {"argmax", r.argmax},
          {"seed", r.seed},
          {"evaluations", r.evaluations}};
}

json to_json(const redundancy::ActiveSetResult& r, const Dataset& data) {
  json history = json::array();
  for (const auto& h : r.state.history) {
    history.push_back(
        {{"iteration", h.iteration}, {"added", labels(data, h.added)}, {"value", real(h.value)}});
  }
  json out = {{"value", real(r.value)},
              {"enforced", labels(data, r.state.enforced)},
              {"excluded_count", data.size() - r.state.enforced.size()},
              {"iterations", r.state.iteration},
              {"terminated", r.terminated},
              {"history", history},
              {"solves", r.solves},
              {"evaluations", r.evaluations}};
  if (r.pof) out["witness"] = to_json(*r.pof);
  if (r.diameter) out["witness"] = to_json(*r.diameter);
  return out;
}

}  // namespace lipuq::io
