#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dynprice/market.hpp"

namespace dynprice {

// Market document:
//   {"items":["s1",...],
//    "buyers":[{"id":"t1","demand":2,"values":{"s1":"3","s2":"5/2"}}, ...]}
// Values are strings holding an integer or "p/q"; every buyer lists a value
// for every item. Errors are ModelError messages that start with the JSON
// path of the offending field.
Market parse_market(std::string_view text);
std::string serialize_market(const Market& m, int indent = -1);

struct GeneratorConfig {
  std::size_t buyers = 2;
  // One entry per buyer, or a single entry used for every buyer.
  std::vector<int> demands{1};
  std::int64_t value_min = 1;
  std::int64_t value_max = 20;
};

// |S| = b(T) items named s1.., buyers t1.., integer values drawn uniformly
// from [value_min, value_max]. Redraws until (OPT) holds. A pure function of
// its arguments. Throws ContractViolation on an empty or non-positive range
// or a bad demand profile.
Market generate_instance(std::uint64_t seed, const GeneratorConfig& config);

}  // namespace dynprice
