#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "dynprice/market.hpp"
#include "dynprice/matching.hpp"
#include "dynprice/orderings.hpp"
#include "dynprice/structured_dual.hpp"

namespace dynprice {

struct PriceVector {
  std::map<ItemId, Rational> price;
  Rational delta;  // zero for unit-demand rounds

  const Rational& at(const ItemId& s) const;
};

enum class OrderingStrategy {
  kAuto,         // bi-demand construction when every demand <= 2, else <= 3 buyers
  kThreeBuyers,  // two-/three-buyer rules
  kBidemand,     // recursive bi-demand construction
};

// Replaces the computed ordering, e.g. with a deliberately bad one. Receives
// the tight graph and the ordering the strategy produced.
using OrderingOverride = std::function<Ordering(const BipartiteGraph& gpi, const Ordering& computed)>;

struct PricingOptions {
  OrderingStrategy strategy = OrderingStrategy::kAuto;
  OrderingOverride override_ordering;
};

// Everything one round of multi-demand pricing derives, kept for reporting.
struct RoundPricing {
  PriceVector prices;
  BipartiteGraph graph;  // weighted graph of the priced market
  StructuredCovering covering;
  Ordering ordering;
  std::vector<CaseTraceEntry> case_trace;
};

// Unit-demand prices p = pi on a trimmed market. Throws ContractViolation if
// some demand differs from one.
PriceVector round_prices_unit(const Market& m);

// p(s) = pi(s) + delta * rank(s) with delta = slack / (|S| + 1). Throws
// UnsupportedMarket when (OPT) fails or no ordering construction applies.
RoundPricing round_prices_multi(const Market& m, const PricingOptions& opts = {});

// Ordering used by round_prices_multi for the given tight graph.
Ordering adequate_ordering(const BipartiteGraph& gpi, OrderingStrategy strategy,
                           std::vector<CaseTraceEntry>* trace = nullptr);

enum class PricingMode { kUnit, kMulti };

// One full round on an arbitrary residual market: items outside a
// minimum-cardinality optimum are priced above every value (so nobody takes
// them) and the rest is priced by the selected rule on the trimmed market.
PriceVector price_round(const Market& m, PricingMode mode, const PricingOptions& opts = {});

}  // namespace dynprice
