#include <gtest/gtest.h>

#include "dynprice/errors.hpp"
#include "dynprice/pricing.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dynprice;

namespace {

Rational utility(const Market& m, std::size_t t, std::size_t s, const PriceVector& p) {
  return m.value(t, s) - p.at(m.items()[s]);
}

Market opt_market(std::mt19937_64& rng, std::size_t nt, int max_demand, std::int64_t lo, std::int64_t hi) {
  std::vector<int> demands(nt);
  for (auto& d : demands) d = static_cast<int>(gen::uniform(rng, 1, max_demand));
  const auto g = gen::factor_union(rng, demands, static_cast<int>(gen::uniform(rng, 1, 3)));
  return gen::market_on_graph(rng, g, lo, hi, gen::uniform(rng, 1, lo));
}

}  // namespace

TEST(UnitPrices, E1) {
  const Market m = gen::e1();
  const auto p = round_prices_unit(m);
  const auto g = BipartiteGraph::from_market(m);
  const auto sc = refine_covering(g);
  EXPECT_EQ(p.delta, Rational(0));
  EXPECT_EQ(p.at("s1"), sc.pi.item[0]);
  EXPECT_EQ(utility(m, 0, 0, p), sc.pi.buyer[0]);
  EXPECT_LT(utility(m, 0, 1, p), sc.pi.buyer[0]);
}

TEST(UnitPrices, SingleEdge) {
  const Market m({"s"}, {{"t", 1, {2}}});
  const auto p = round_prices_unit(m);
  const auto sc = refine_covering(BipartiteGraph::from_market(m));
  EXPECT_EQ(p.at("s"), sc.pi.item[0]);
  EXPECT_EQ(utility(m, 0, 0, p), sc.pi.buyer[0]);
  EXPECT_GE(sc.pi.buyer[0], Rational(0));
}

TEST(UnitPrices, ZeroMarketTrimsToNothing) {
  const Market m({"a", "b"}, {{"t", 1, {0, 0}}});
  EXPECT_TRUE(round_prices_unit(trim_items(m).market).price.empty());
  const auto p = price_round(m, PricingMode::kUnit);
  EXPECT_EQ(p.at("a"), Rational(1));
  EXPECT_EQ(oracle::best_bundles(m, 0, p), (std::set<Bundle>{{}}));
}

TEST(UnitPrices, RejectsMultiDemand) { EXPECT_THROW(round_prices_unit(gen::e2()), ContractViolation); }

TEST(UnitPrices, EqualityExactlyOnLegalEdges) {
  std::mt19937_64 rng(61);
  for (int k = 0; k < 150; ++k) {
    const Market m = trim_items(gen::unit_market(rng, gen::uniform(rng, 1, 4), gen::uniform(rng, 1, 6), 0, 3, 0.2)).market;
    const auto p = round_prices_unit(m);
    const auto sc = refine_covering(BipartiteGraph::from_market(m));
    const oracle::MarketOracle o(m);
    for (std::size_t t = 0; t < m.num_buyers(); ++t) {
      for (std::size_t s = 0; s < m.num_items(); ++s) {
        const Rational u = utility(m, t, s, p);
        EXPECT_LE(u, sc.pi.buyer[t]);
        EXPECT_EQ(u == sc.pi.buyer[t], o.optima().legal[t][s]) << k;
      }
    }
  }
}

TEST(UnitPrices, EveryBestChoiceIsFeasible) {
  std::mt19937_64 rng(62);
  for (int k = 0; k < 150; ++k) {
    const Market m = gen::unit_market(rng, gen::uniform(rng, 1, 4), gen::uniform(rng, 1, 7), 0, 2, 0.3);
    const auto trimmed = trim_items(m).market;
    const auto p = price_round(m, PricingMode::kUnit);
    const oracle::MarketOracle o(trimmed);
    for (std::size_t t = 0; t < m.num_buyers(); ++t) {
      for (const auto& bundle : oracle::best_bundles(m, t, p)) {
        for (const auto& s : bundle) ASSERT_TRUE(trimmed.has_item(s)) << "trimmed item chosen";
        ASSERT_TRUE(o.feasible(t, oracle::mask_of(trimmed, bundle))) << k;
      }
    }
  }
}

TEST(MultiPrices, E2) {
  const Market m = gen::e2();
  const auto r = round_prices_multi(m);
  EXPECT_GT(r.prices.delta, Rational(0));
  EXPECT_EQ(oracle::best_bundles(m, 0, r.prices), (std::set<Bundle>{{"s1", "s2"}}));
  EXPECT_EQ(oracle::best_bundles(m, 1, r.prices), (std::set<Bundle>{{"s3", "s4"}}));
}

TEST(MultiPrices, D1FirstBuyerTakesFeasibleBundle) {
  const Market m = gen::d1();
  const auto p = round_prices_multi(m).prices;
  const oracle::MarketOracle o(m);
  for (std::size_t t = 0; t < 3; ++t) {
    const auto best = oracle::best_bundles(m, t, p);
    ASSERT_EQ(best.size(), 1u);
    EXPECT_TRUE(o.feasible(t, oracle::mask_of(m, *best.begin())));
  }
}

TEST(MultiPrices, SingleBuyer) {
  const Market m({"a", "b"}, {{"t", 2, {3, 1}}});
  const auto p = round_prices_multi(m).prices;
  EXPECT_EQ(oracle::best_bundles(m, 0, p), (std::set<Bundle>{{"a", "b"}}));
}

TEST(MultiPrices, FormulaAndUtilityChain) {
  std::mt19937_64 rng(63);
  for (int k = 0; k < 150; ++k) {
    const Market m = opt_market(rng, gen::uniform(rng, 1, 4), k % 2 ? 2 : 3, 3, 6);
    if (m.num_buyers() > 3 && k % 2 == 0) continue;
    const auto r = round_prices_multi(m);
    const auto& sc = r.covering;
    ASSERT_TRUE(sc.slack.has_value());
    EXPECT_EQ(r.prices.delta, *sc.slack / Rational(static_cast<std::int64_t>(m.num_items()) + 1));
    for (std::size_t s = 0; s < m.num_items(); ++s) {
      EXPECT_EQ(r.prices.at(m.items()[s]),
                sc.pi.item[s] + r.prices.delta * Rational(static_cast<std::int64_t>(r.ordering.rank(s))));
    }
    const auto gpi = tight_subgraph(sc, r.graph);
    for (std::size_t t = 0; t < m.num_buyers(); ++t) {
      std::optional<Rational> worst_tight;
      std::optional<Rational> best_other;
      for (std::size_t s = 0; s < m.num_items(); ++s) {
        const Rational u = utility(m, t, s, r.prices);
        if (gpi.find_edge(s, t)) {
          EXPECT_GT(u, Rational(0));
          EXPECT_EQ(u, sc.pi.buyer[t] - r.prices.delta * Rational(static_cast<std::int64_t>(r.ordering.rank(s))));
          if (!worst_tight || u < *worst_tight) worst_tight = u;
        } else if (!best_other || *best_other < u) {
          best_other = u;
        }
      }
      if (worst_tight && best_other) EXPECT_LT(*best_other, *worst_tight);
      const auto best = oracle::best_bundles(m, t, r.prices);
      ASSERT_EQ(best.size(), 1u) << k;
      Bundle expected;
      for (std::size_t s : r.ordering.first_neighbors(gpi, t, m.buyers()[t].demand)) expected.insert(m.items()[s]);
      EXPECT_EQ(*best.begin(), expected);
    }
  }
}

TEST(MultiPrices, RefusesOutsideTheSupportedRegime) {
  const Market short_supply({"a", "b", "c"}, {{"t1", 2, {5, 5, 5}}, {"t2", 2, {1, 1, 1}}});
  EXPECT_THROW(round_prices_multi(short_supply), UnsupportedMarket);

  std::mt19937_64 rng(64);
  const auto g = gen::factor_union(rng, {3, 3, 3, 3}, 2);
  const Market four = gen::market_on_graph(rng, g, 5, 6, 1);
  EXPECT_THROW(round_prices_multi(four), UnsupportedMarket);
  PricingOptions forced;
  forced.strategy = OrderingStrategy::kBidemand;
  EXPECT_THROW(round_prices_multi(four, forced), UnsupportedMarket);
}

TEST(MultiPrices, StrategiesAgreeOnAdequacy) {
  // Three buyers of demand at most two: both constructions apply.
  std::mt19937_64 rng(65);
  for (int k = 0; k < 80; ++k) {
    const Market m = opt_market(rng, 3, 2, 3, 5);
    for (auto strategy : {OrderingStrategy::kThreeBuyers, OrderingStrategy::kBidemand}) {
      PricingOptions opts;
      opts.strategy = strategy;
      const auto r = round_prices_multi(m, opts);
      EXPECT_TRUE(oracle::adequate(tight_subgraph(r.covering, r.graph), r.ordering)) << k;
    }
  }
}

TEST(MultiPrices, OverrideReplacesTheOrdering) {
  PricingOptions opts;
  opts.override_ordering = [](const BipartiteGraph&, const Ordering& o) { return o.reversed(); };
  const auto plain = round_prices_multi(gen::d1());
  const auto reversed = round_prices_multi(gen::d1(), opts);
  EXPECT_EQ(reversed.ordering, plain.ordering.reversed());
}
