#pragma once

// JSON forms of the result types. Infinite values are written as the
// strings "+inf" and "-inf", never as bare numbers.

#include <nlohmann/json.hpp>

#include "lipuq/constraints.hpp"
#include "lipuq/core.hpp"
#include "lipuq/diameter.hpp"
#include "lipuq/envelope.hpp"
#include "lipuq/pof.hpp"
#include "lipuq/redundancy.hpp"

namespace lipuq::io {

using json = nlohmann::json;

/// A number, or "+inf"/"-inf"; NaN becomes null.
json real(double v);
json real(const ExtendedReal& v);
json labels(const Dataset& data, std::span<const std::size_t> indices);

json to_json(const Scenario& s);
json to_json(const solver::VerificationRecord& v);
json to_json(const pof::MarkovCheck& m);
json to_json(const pof::PofReport& r);
json to_json(const diameter::DiameterReport& r);
json to_json(const envelope::SearchReport& r);
json to_json(const redundancy::ActiveSetResult& r, const Dataset& data);

}  // namespace lipuq::io
