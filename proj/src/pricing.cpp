#include "dynprice/pricing.hpp"

#include "dynprice/errors.hpp"

namespace dynprice {

const Rational& PriceVector::at(const ItemId& s) const {
  auto it = price.find(s);
  if (it == price.end()) throw ModelError("no price for item '" + s + "'");
  return it->second;
}

PriceVector round_prices_unit(const Market& m) {
  for (const auto& b : m.buyers()) {
    if (b.demand != 1) throw ContractViolation("round_prices_unit: buyer '" + b.id + "' is not unit-demand");
  }
  const auto g = BipartiteGraph::from_market(m);
  const auto sc = refine_covering(g);
  PriceVector out;
  for (std::size_t s = 0; s < m.num_items(); ++s) out.price[m.items()[s]] = sc.pi.item[s];
  return out;
}

Ordering adequate_ordering(const BipartiteGraph& gpi, OrderingStrategy strategy,
                           std::vector<CaseTraceEntry>* trace) {
  bool all_small = true;
  for (int c : gpi.capacity()) all_small = all_small && c <= 2;
  if (strategy == OrderingStrategy::kAuto) {
    if (all_small) {
      strategy = OrderingStrategy::kBidemand;
    } else if (gpi.num_buyers() <= 3) {
      strategy = OrderingStrategy::kThreeBuyers;
    } else {
      throw UnsupportedMarket("no adequate-ordering construction for demands above two with more than three buyers");
    }
  }
  if (strategy == OrderingStrategy::kThreeBuyers) {
    if (gpi.num_buyers() > 3) throw UnsupportedMarket("three-buyer ordering requested for more than three buyers");
    return adequate_three_buyers(gpi);
  }
  if (!all_small) throw UnsupportedMarket("bi-demand ordering requested for a demand above two");
  return adequate_bidemand(gpi, trace);
}

RoundPricing round_prices_multi(const Market& m, const PricingOptions& opts) {
  const auto report = check_opt_property(m);
  if (!report.opt_property_holds) {
    throw UnsupportedMarket("(OPT) fails: buyer '" + report.witness->buyer +
                            "' is under-served by some optimal allocation");
  }
  RoundPricing out;
  out.graph = BipartiteGraph::from_market(m);
  out.covering = refine_covering(out.graph);
  const auto gpi = tight_subgraph(out.covering, out.graph);
  out.ordering = adequate_ordering(gpi, opts.strategy, &out.case_trace);
  if (opts.override_ordering) out.ordering = opts.override_ordering(gpi, out.ordering);

  if (m.num_items() > 0) {
    if (!out.covering.slack) throw InternalError("round_prices_multi: infinite slack under (OPT)");
    out.prices.delta = *out.covering.slack / Rational(static_cast<std::int64_t>(m.num_items()) + 1);
  }
  for (std::size_t s = 0; s < m.num_items(); ++s) {
    const Rational rank(static_cast<std::int64_t>(out.ordering.rank(s)));
    out.prices.price[m.items()[s]] = out.covering.pi.item[s] + out.prices.delta * rank;
  }
  return out;
}

PriceVector price_round(const Market& m, PricingMode mode, const PricingOptions& opts) {
  const auto trimmed = trim_items(m);
  PriceVector out = mode == PricingMode::kUnit ? round_prices_unit(trimmed.market)
                                               : round_prices_multi(trimmed.market, opts).prices;
  const Rational blocking = m.max_value() + Rational(1);
  for (const auto& s : trimmed.removed) out.price[s] = blocking;
  return out;
}

}  // namespace dynprice
