#pragma once

// CSV ingestion of legacy observations: an optional label column, K input
// columns and one output column, with a header row.

#include <iosfwd>
#include <string>
#include <vector>

#include "lipuq/core.hpp"

namespace lipuq::io {

struct IngestResult {
  Dataset data;
  std::vector<std::string> columns;  // input column names, then the output name
  std::vector<std::string> notes;    // informational, e.g. repeated inputs
};

/// Throws ParseError with the line number for malformed rows, and naming the
/// point and the bound for rows outside the domain.
IngestResult parse_csv(std::istream& in, const BoxDomain& domain, const std::string& source);
/// One note per observation whose inputs repeat an earlier one.
std::vector<std::string> repeated_input_notes(const Dataset& data);

IngestResult ingest_csv(const std::string& path, const BoxDomain& domain);

}  // namespace lipuq::io
