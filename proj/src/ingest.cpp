#include "lipuq/ingest.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "lipuq/errors.hpp"

namespace lipuq::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size();
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

}  // namespace

IngestResult parse_csv(std::istream& in, const BoxDomain& domain, const std::string& source) {
  const std::size_t K = domain.dim();
  IngestResult res;
  res.data = Dataset(K);
  std::string line;
  std::size_t lineno = 0;
  bool labelled = false;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split(t);
    if (!have_header) {
      if (cells.size() == K + 2) {
        labelled = true;
      } else if (cells.size() != K + 1) {
        throw ParseError(where(source, lineno) + "header has " + std::to_string(cells.size()) +
                         " columns; expected " + std::to_string(K + 1) +
                         " (inputs, output) or " + std::to_string(K + 2) +
                         " (label, inputs, output)");
      }
      res.columns.assign(cells.begin() + (labelled ? 1 : 0), cells.end());
      have_header = true;
      continue;
    }
    if (cells.size() != res.columns.size() + (labelled ? 1 : 0)) {
      throw ParseError(where(source, lineno) + "expected " +
                       std::to_string(res.columns.size() + (labelled ? 1 : 0)) +
                       " fields, found " + std::to_string(cells.size()));
    }
    std::size_t at = 0;
    std::string label = labelled ? cells[at++] : "row" + std::to_string(lineno);
    if (label.empty()) label = "row" + std::to_string(lineno);
    Point x(K);
    for (std::size_t k = 0; k < K; ++k, ++at) {
      if (!parse_number(cells[at], x[k]) || !std::isfinite(x[k])) {
        throw ParseError(where(source, lineno) + "column '" + res.columns[k] +
                         "' is not a finite number: '" + cells[at] + "'");
      }
    }
    double g = 0.0;
    if (!parse_number(cells[at], g) || !std::isfinite(g)) {
      throw ParseError(where(source, lineno) + "output column '" + res.columns.back() +
                       "' is not a finite number: '" + cells[at] + "'");
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (x[k] < domain[k].lo || x[k] > domain[k].hi) {
        std::ostringstream os;
        os << where(source, lineno) << "observation '" << label << "' has " << res.columns[k]
           << " = " << x[k] << " outside the bound [" << domain[k].lo << ", " << domain[k].hi
           << "]";
        throw ParseError(os.str());
      }
    }
    res.data.add(std::move(x), g, std::move(label));
  }
  if (!have_header) throw ParseError(source + ": no header row");
  res.notes = repeated_input_notes(res.data);
  return res;
}

std::vector<std::string> repeated_input_notes(const Dataset& data) {
  std::vector<std::string> notes;
  std::map<Point, std::size_t> seen;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (auto it = seen.find(data.point(i)); it != seen.end()) {
      notes.push_back("observations '" + data.label(it->second) + "' and '" + data.label(i) +
                      "' share the same inputs (multi-valued data are allowed)");
    } else {
      seen.emplace(data.point(i), i);
    }
  }
  return notes;
}

IngestResult ingest_csv(const std::string& path, const BoxDomain& domain) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return parse_csv(in, domain, path);
}

}  // namespace lipuq::io
