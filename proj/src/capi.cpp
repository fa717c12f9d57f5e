#include "lipuq/lipuq.h"

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "lipuq/errors.hpp"
#include "lipuq/run.hpp"

struct lipuq_problem {
  lipuq::io::RunConfig config;
  std::string config_json;
};

struct lipuq_result {
  lipuq::io::RunOutput output;
  std::string json;
  std::vector<std::string> trace_csv;
};

namespace {

thread_local std::string last_error;

lipuq_status fail(lipuq_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Maps the library's exceptions onto status codes.
template <class F>
lipuq_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const lipuq::InfeasibleError& e) {
    return fail(LIPUQ_INFEASIBLE, e.what());
  } catch (const lipuq::ParseError& e) {
    const std::string what = e.what();
    const bool io = what.rfind("cannot open", 0) == 0 || what.find(": cannot open") != std::string::npos;
    return fail(io ? LIPUQ_IO : LIPUQ_USAGE, what);
  } catch (const lipuq::ContractError& e) {
    return fail(LIPUQ_USAGE, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(LIPUQ_USAGE, std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    return fail(LIPUQ_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* lipuq_version(void) { return lipuq::io::kVersion; }

const char* lipuq_last_error(void) { return last_error.c_str(); }

lipuq_status lipuq_problem_create(const char* config_json, lipuq_problem** out) {
  if (!config_json || !out) return fail(LIPUQ_USAGE, "lipuq_problem_create: null argument");
  *out = nullptr;
  return guarded([&] {
    auto p = std::make_unique<lipuq_problem>();
    p->config = lipuq::io::config_from_json(nlohmann::json::parse(config_json));
    p->config_json = lipuq::io::config_to_json(p->config).dump();
    *out = p.release();
    return LIPUQ_OK;
  });
}

void lipuq_problem_free(lipuq_problem* problem) { delete problem; }

const char* lipuq_problem_config_json(const lipuq_problem* problem) {
  return problem ? problem->config_json.c_str() : "";
}

lipuq_status lipuq_problem_run(lipuq_problem* problem, lipuq_result** out) {
  if (!problem || !out) return fail(LIPUQ_USAGE, "lipuq_problem_run: null argument");
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<lipuq_result>();
    r->output = lipuq::io::run(problem->config);
    r->json = r->output.report.dump(2);
    for (const auto& [name, trace] : r->output.traces) {
      std::ostringstream os;
      trace.write_csv(os);
      r->trace_csv.push_back(os.str());
    }
    const int outcome = r->output.outcome;
    *out = r.release();
    if (outcome != 0) {
      last_error = "problem is infeasible";
      return LIPUQ_INFEASIBLE;
    }
    return LIPUQ_OK;
  });
}

void lipuq_result_free(lipuq_result* result) { delete result; }

const char* lipuq_result_json(const lipuq_result* result) { return result ? result->json.c_str() : ""; }

int lipuq_result_outcome(const lipuq_result* result) { return result ? result->output.outcome : 0; }

const char* lipuq_result_table_csv(const lipuq_result* result) {
  return result ? result->output.table_csv.c_str() : "";
}

size_t lipuq_result_trace_count(const lipuq_result* result) {
  return result ? result->output.traces.size() : 0;
}

const char* lipuq_result_trace_name(const lipuq_result* result, size_t index) {
  if (!result || index >= result->output.traces.size()) return nullptr;
  return result->output.traces[index].first.c_str();
}

const char* lipuq_result_trace_csv(const lipuq_result* result, size_t index) {
  if (!result || index >= result->trace_csv.size()) return nullptr;
  return result->trace_csv[index].c_str();
}

lipuq_status lipuq_result_trace_write(const lipuq_result* result, size_t index, const char* path) {
  if (!result || !path || index >= result->trace_csv.size()) {
    return fail(LIPUQ_USAGE, "lipuq_result_trace_write: bad argument");
  }
  std::ofstream f(path, std::ios::binary);
  if (!(f << result->trace_csv[index]) || !f.flush()) {
    return fail(LIPUQ_IO, std::string("cannot write ") + path);
  }
  return LIPUQ_OK;
}

}  // extern "C"
