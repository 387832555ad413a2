#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dynprice/market.hpp"
#include "dynprice/pricing.hpp"

namespace dynprice {

using Bundle = std::set<ItemId>;

struct RunStep {
  BuyerId buyer;
  PriceVector prices;
  Bundle bundle;
  Rational paid;
  Rational value;
  std::size_t choices = 1;  // size of best_bundles at this step
};

struct RunTrace {
  std::vector<BuyerId> order;
  std::vector<RunStep> steps;
  Rational final_welfare;
  std::set<ItemId> leftover_items;
  // Set when the seller could not price a residual market and the run
  // stopped early; remaining buyers leave empty-handed.
  std::optional<std::string> halted;
};

struct Verdict {
  std::string instance_id;
  std::uint64_t runs_checked = 0;  // saturates at UINT64_MAX
  bool all_optimal = false;
  // False when the budget ran out before every branch was checked.
  bool complete = true;
  Rational optimum;
  Rational worst_welfare;
  std::optional<RunTrace> counterexample;
};

// Every bundle of at most b(t) items maximizing v_t(X) - p(X), including
// zero-utility padding and the empty bundle when the maximum is zero. Sorted.
std::vector<Bundle> best_bundles(const Market& m, const BuyerId& t, const PriceVector& p);

// Picks an index into the best bundles of a step.
using TieBreak = std::function<std::size_t(const std::vector<Bundle>& choices)>;

struct SimulationOptions {
  PricingMode mode = PricingMode::kMulti;
  PricingOptions pricing;
  // Maximum number of residual markets priced by run_exhaustive.
  std::uint64_t budget = 200000;
};

// One dynamic run. Pricing refusal on the initial market propagates; on a
// later residual market the run halts and the trace says why.
RunTrace run_once(const Market& m, const std::vector<BuyerId>& order, const TieBreak& tiebreak,
                  const SimulationOptions& opts = {});

// All arrival orders and all tie-breaks. Residual markets are shared between
// branches that reach the same (buyers, items) state, so runs_checked counts
// complete runs without replaying each one. In multi mode a step with more
// than one best bundle throws InternalError.
Verdict run_exhaustive(const Market& m, const SimulationOptions& opts = {},
                       const std::string& instance_id = "");

// `runs` random orders with random tie-breaks drawn from a seeded generator.
Verdict run_sampled(const Market& m, std::size_t runs, std::uint64_t seed,
                    const SimulationOptions& opts = {}, const std::string& instance_id = "");

struct OracleResult {
  Rational optimum;
  std::set<Allocation> optimal;  // buyers with empty bundles are omitted
};

// Exhaustive maximum welfare and every optimal allocation. Throws
// ContractViolation when the market has more than `max_items` items.
OracleResult oracle_opt(const Market& m, std::size_t max_items = 12);

}  // namespace dynprice
