#include <doctest.h>

#include <sstream>

#include "lipuq/errors.hpp"
#include "lipuq/ingest.hpp"
#include "lipuq/run.hpp"

using namespace lipuq;
using namespace lipuq::io;
using nlohmann::json;

namespace {

IngestResult parse(const std::string& text, const BoxDomain& dom) {
  std::istringstream in(text);
  return parse_csv(in, dom, "mem.csv");
}

std::string message_of(const std::string& text, const BoxDomain& dom) {
  try {
    parse(text, dom);
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

json pof_config() {
  return {{"command", "pof"},
          {"domain", {{0, 1}}},
          {"lipschitz", {1.0}},
          {"mean", 0.5},
          {"theta", 0.0},
          {"solver", {{"restarts", 1}}},
          {"data", {{"labels", {"z"}}, {"points", {{0.375}}}, {"values", {0.25}}}}};
}

}  // namespace

TEST_CASE("CSV with and without labels") {
  const BoxDomain dom({{0, 1}, {0, 10}});
  const auto a = parse("h,v,out\n0.5,2,1.0\n# note\n\n0.25,3,0.5\n", dom);
  CHECK(a.data.size() == 2);
  CHECK(a.columns == std::vector<std::string>{"h", "v", "out"});
  CHECK(a.data.label(0) == "row2");
  CHECK(a.data.value(1) == 0.5);
  const auto b = parse("id,h,v,out\nshot1,0.5,2,1.0\n", dom);
  CHECK(b.data.label(0) == "shot1");
  CHECK(b.data.point(0) == Point{0.5, 2});
}

TEST_CASE("CSV errors name the line and the problem") {
  const BoxDomain dom({{0, 1}});
  CHECK(message_of("a,b,c,d\n", dom).find("header has 4 columns") != std::string::npos);
  CHECK(message_of("x,y\n0.5\n", dom).find("mem.csv:2:") != std::string::npos);
  CHECK(message_of("x,y\n0.5,abc\n", dom).find("'abc'") != std::string::npos);
  CHECK(message_of("x,y\n0.5,nan\n", dom).find("not a finite number") != std::string::npos);
  const auto out = message_of("id,x,y\nfar,1.5,0\n", dom);
  CHECK(out.find("'far'") != std::string::npos);
  CHECK(out.find("[0, 1]") != std::string::npos);
  CHECK(message_of("", dom).find("no header") != std::string::npos);
  CHECK_THROWS_AS(ingest_csv("/nonexistent/file.csv", dom), ParseError);
}

TEST_CASE("repeated inputs are noted, not rejected") {
  const auto r = parse("id,x,y\na,0.5,1\nb,0.5,1.2\nc,0.1,0\n", BoxDomain({{0, 1}}));
  REQUIRE(r.notes.size() == 1);
  CHECK(r.notes[0].find("'a' and 'b'") != std::string::npos);
}

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(config_from_json(pof_config()));
  auto j = pof_config();
  j["thta"] = 1.0;
  CHECK_THROWS_AS(config_from_json(j), ParseError);
  j = pof_config();
  j["direction"] = "up";
  CHECK_THROWS_AS(config_from_json(j), ParseError);
  j = pof_config();
  j["lipschitz"] = {1.0, 2.0};
  CHECK_THROWS_AS(config_from_json(j), ParseError);
  j = pof_config();
  j["command"] = "frobnicate";
  CHECK_THROWS_AS(config_from_json(j), ParseError);
  j = pof_config();
  j["solver"]["restart"] = 2;
  CHECK_THROWS_AS(config_from_json(j), ParseError);
  CHECK_THROWS_AS(config_from_json(json::array()), ParseError);
}

TEST_CASE("config echo round-trips") {
  auto c = config_from_json(pof_config());
  c.support_shape = {2};
  c.k = 0;
  const json once = config_to_json(c);
  const json twice = config_to_json(config_from_json(once));
  CHECK(once == twice);
  CHECK(once["k"] == 0);
  CHECK(once["data"]["values"][0] == 0.25);
}

TEST_CASE("run produces a complete pof report") {
  const auto out = run(config_from_json(pof_config()));
  CHECK(out.outcome == 0);
  const auto& r = out.report;
  CHECK(r["tool"] == "lipuq");
  CHECK(r["version"] == kVersion);
  CHECK(r["status"] == "ok");
  CHECK(r["command"] == "pof");
  CHECK(r["result"]["phat"].get<double>() == doctest::Approx(3.0 / 7.0).epsilon(1e-3));
  CHECK(r["config"]["data"]["points"][0][0] == 0.375);
  REQUIRE(out.traces.size() == 1);
  CHECK(out.traces[0].first == "pof");
  CHECK_FALSE(out.traces[0].second.rows.empty());
}

TEST_CASE("run reports infeasible data without throwing") {
  json j = pof_config();
  j["command"] = "validate";
  j["data"] = {{"labels", {"a", "b"}}, {"points", {{0.0}, {1.0}}}, {"values", {0.0, 2.0}}};
  const auto out = run(config_from_json(j));
  CHECK(out.outcome == 1);
  CHECK(out.report["status"] == "infeasible");
  CHECK(out.report["result"]["worst_pair"]["first"] == "a");
  CHECK(out.report["result"]["worst_pair"]["second"] == "b");

  j["command"] = "pof";
  const auto pof = run(config_from_json(j));
  CHECK(pof.outcome == 1);
  CHECK(pof.report["result"].contains("error"));
  CHECK(pof.traces.empty());
}

TEST_CASE("a report re-run from its echoed config is identical") {
  const auto first = run(config_from_json(pof_config()));
  const auto again = run(config_from_json(first.report["config"]));
  CHECK(first.report.dump() == again.report.dump());
}

TEST_CASE("pof-curve fills its table") {
  json j = pof_config();
  j["command"] = "pof-curve";
  j["thetas"] = {0.0, 0.25, 0.5};
  const auto out = run(config_from_json(j));
  CHECK(out.outcome == 0);
  CHECK(out.table_csv.rfind("theta,phat,markov_bound,gap\n", 0) == 0);
  const auto& entries = out.report["result"]["entries"];
  REQUIRE(entries.size() == 3);
  CHECK(entries[2]["phat"] == 1.0);
}
