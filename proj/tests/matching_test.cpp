#include <gtest/gtest.h>

#include <bit>
#include <functional>

#include "dynprice/errors.hpp"
#include "dynprice/matching.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dynprice;

namespace {

// Maximum weight by enumerating each buyer's neighbor subsets. `cap` and
// `forced` adjust the graph: forced edge must be used.
Rational brute_max(const BipartiteGraph& g, std::vector<int> cap, std::optional<std::size_t> forced = {}) {
  const std::size_t n = g.num_items();
  std::function<std::optional<Rational>(std::size_t, std::uint32_t)> rec =
      [&](std::size_t t, std::uint32_t used) -> std::optional<Rational> {
    if (t == g.num_buyers()) return Rational(0);
    std::vector<std::size_t> nbr_edges = g.buyer_edges(t);
    std::optional<Rational> best;
    const std::size_t k = nbr_edges.size();
    for (std::uint32_t pick = 0; pick < (std::uint32_t{1} << k); ++pick) {
      if (std::popcount(pick) > cap[t]) continue;
      std::uint32_t items = 0;
      Rational w;
      bool ok = true;
      bool has_forced = false;
      for (std::size_t i = 0; i < k && ok; ++i) {
        if (!(pick >> i & 1)) continue;
        const auto& e = g.edges()[nbr_edges[i]];
        if ((used | items) >> e.item & 1) ok = false;
        items |= std::uint32_t{1} << e.item;
        w += e.weight;
        has_forced = has_forced || (forced && *forced == nbr_edges[i]);
      }
      if (!ok) continue;
      if (forced && g.edges()[*forced].buyer == t && !has_forced) continue;
      auto rest = rec(t + 1, used | items);
      if (rest && (!best || *best < w + *rest)) best = w + *rest;
    }
    return best;
  };
  (void)n;
  return rec(0, 0).value();
}

BipartiteGraph random_graph(std::mt19937_64& rng, std::size_t nt, std::size_t ns, double density) {
  std::vector<Edge> edges;
  std::uniform_real_distribution<double> coin(0, 1);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t t = 0; t < nt; ++t) {
      if (coin(rng) < density) edges.push_back({s, t, Rational(gen::uniform(rng, 0, 6), gen::uniform(rng, 1, 2))});
    }
  }
  std::vector<ItemId> items;
  for (std::size_t s = 0; s < ns; ++s) items.push_back("s" + std::to_string(s + 1));
  std::vector<BuyerId> buyers;
  std::vector<int> cap;
  for (std::size_t t = 0; t < nt; ++t) {
    buyers.push_back("t" + std::to_string(t + 1));
    cap.push_back(static_cast<int>(gen::uniform(rng, 1, 3)));
  }
  return BipartiteGraph(items, buyers, cap, edges);
}

std::size_t edge(const BipartiteGraph& g, std::size_t s, std::size_t t) { return g.find_edge(s, t).value(); }

}  // namespace

TEST(MaxWeight, Examples) {
  const BipartiteGraph empty({"s1"}, {"t1"}, {1}, {});
  EXPECT_EQ(max_weight_bmatching(empty).weight, Rational(0));
  EXPECT_TRUE(max_weight_bmatching(empty).matching.edges.empty());

  const auto g1 = BipartiteGraph::from_market(gen::e1());
  const auto r1 = max_weight_bmatching(g1);
  EXPECT_EQ(r1.weight, Rational(5));
  EXPECT_EQ(r1.matching.edges, (std::vector<std::size_t>{edge(g1, 0, 0), edge(g1, 1, 1)}));

  const auto g2 = BipartiteGraph::from_market(gen::e2());
  const auto r2 = max_weight_bmatching(g2);
  EXPECT_EQ(r2.weight, Rational(14));
  std::vector<std::size_t> m2{edge(g2, 0, 0), edge(g2, 1, 0), edge(g2, 2, 1), edge(g2, 3, 1)};
  std::sort(m2.begin(), m2.end());
  EXPECT_EQ(r2.matching.edges, m2);
}

TEST(Covering, Examples) {
  const BipartiteGraph one({"s"}, {"t"}, {1}, {{0, 0, Rational(2)}});
  const Covering c = optimal_covering(one);
  EXPECT_EQ(c.item[0] + c.buyer[0], Rational(2));
  EXPECT_EQ(c.total_value(one), Rational(2));
  EXPECT_EQ(optimal_covering(BipartiteGraph::from_market(gen::e1())).total_value(BipartiteGraph::from_market(gen::e1())),
            Rational(5));
  const auto g2 = BipartiteGraph::from_market(gen::e2());
  const Covering c2 = optimal_covering(g2);
  EXPECT_EQ(c2.buyer[0] * Rational(2) + c2.buyer[1] * Rational(2) + c2.item[0] + c2.item[1] + c2.item[2] + c2.item[3],
            Rational(14));
}

TEST(MaxWeight, DualityAndSlacknessOnRandomGraphs) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 400; ++k) {
    const auto g = random_graph(rng, gen::uniform(rng, 1, 4), gen::uniform(rng, 0, 8), 0.6);
    const auto sol = solve_bmatching(g);
    ASSERT_TRUE(sol.matching.is_valid(g));
    ASSERT_TRUE(sol.covering.is_feasible(g));
    ASSERT_EQ(sol.weight, sol.matching.weight(g));
    ASSERT_EQ(sol.weight, sol.covering.total_value(g)) << k;
    ASSERT_EQ(sol.weight, brute_max(g, g.capacity())) << k;
    for (std::size_t e : sol.matching.edges) EXPECT_TRUE(sol.covering.is_tight(g, e));
    const auto bdeg = sol.matching.buyer_degrees(g);
    const auto ideg = sol.matching.item_degrees(g);
    for (std::size_t t = 0; t < g.num_buyers(); ++t) {
      if (sol.covering.buyer[t].sign() > 0) EXPECT_EQ(bdeg[t], g.capacity(t));
    }
    for (std::size_t s = 0; s < g.num_items(); ++s) {
      if (sol.covering.item[s].sign() > 0) EXPECT_EQ(ideg[s], 1);
    }
  }
}

TEST(MaxWeight, BuyerCopyExpansionGivesSameOptimum) {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 200; ++k) {
    const auto g = random_graph(rng, gen::uniform(rng, 1, 4), gen::uniform(rng, 1, 8), 0.7);
    const auto x = expand_buyer_copies(g);
    EXPECT_EQ(x.num_buyers(), static_cast<std::size_t>(g.total_capacity()));
    for (std::size_t t = 0; t < x.num_buyers(); ++t) EXPECT_EQ(x.capacity(t), 1);
    ASSERT_EQ(max_weight_bmatching(x).weight, max_weight_bmatching(g).weight) << k;
  }
}

TEST(MinCardinality, FewestEdgesAmongOptima) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 200; ++k) {
    const auto g = random_graph(rng, gen::uniform(rng, 1, 3), gen::uniform(rng, 1, 7), 0.8);
    const auto m = max_weight_min_cardinality(g);
    ASSERT_TRUE(m.is_valid(g));
    ASSERT_EQ(m.weight(g), brute_max(g, g.capacity()));
    // No optimum uses fewer edges: positive-weight edges alone cannot reach it with fewer.
    for (std::size_t e : m.edges) EXPECT_GT(g.edges()[e].weight.sign(), 0) << k;
  }
}

TEST(BFactor, Examples) {
  // E2 restricted to its legal edges.
  const BipartiteGraph legal({"s1", "s2", "s3", "s4"}, {"t1", "t2"}, {2, 2},
                             {{0, 0, 1}, {1, 0, 1}, {2, 1, 1}, {3, 1, 1}});
  EXPECT_TRUE(bfactor_exists(legal).exists);

  const BipartiteGraph counting({"a", "b", "c"}, {"t1", "t2"}, {2, 2}, {{0, 0, 1}, {1, 1, 1}});
  const auto r = bfactor_exists(counting);
  EXPECT_FALSE(r.exists);
  EXPECT_TRUE(r.size_mismatch);

  const BipartiteGraph hall({"a", "b", "c", "d"}, {"t1", "t2"}, {2, 2},
                            {{0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {0, 1, 1}, {1, 1, 1}, {2, 1, 1}});
  const auto h = bfactor_exists(hall);
  EXPECT_FALSE(h.exists);
  EXPECT_FALSE(h.size_mismatch);
  EXPECT_EQ(h.deficient_buyers, (std::vector<std::size_t>{0, 1}));
}

TEST(BFactor, AgreesWithEnumeration) {
  std::mt19937_64 rng(24);
  int found = 0;
  for (int k = 0; k < 500; ++k) {
    const std::size_t nt = gen::uniform(rng, 1, 4);
    std::vector<int> demands(nt);
    for (auto& d : demands) d = static_cast<int>(gen::uniform(rng, 1, 3));
    auto g = gen::factor_union(rng, demands, static_cast<int>(gen::uniform(rng, 1, 2)));
    // Drop some edges so that some graphs lose their factor.
    std::vector<bool> keep(g.edges().size(), true);
    for (auto&& b : keep) b = gen::uniform(rng, 0, 5) != 0;
    g = g.edge_subgraph(keep);
    const auto r = bfactor_exists(g);
    ASSERT_EQ(r.exists, oracle::has_bfactor(g)) << k;
    ASSERT_EQ(has_bfactor(g), r.exists);
    found += r.exists;
    if (!r.exists && !r.size_mismatch) {
      std::uint32_t y = 0;
      for (std::size_t t : r.deficient_buyers) y |= std::uint32_t{1} << t;
      EXPECT_LT(oracle::surplus(g, y), 0) << k;
    }
  }
  EXPECT_GT(found, 50);
  EXPECT_LT(found, 500);
}

TEST(ForcedEdge, Examples) {
  const auto g1 = BipartiteGraph::from_market(gen::e1());
  EXPECT_EQ(max_weight_forced_edge(g1, edge(g1, 0, 0)), Rational(5));
  EXPECT_EQ(max_weight_forced_edge(g1, edge(g1, 1, 0)), Rational(3));
  const BipartiteGraph one({"s"}, {"t"}, {1}, {{0, 0, Rational(7, 3)}});
  EXPECT_EQ(max_weight_forced_edge(one, 0), Rational(7, 3));
}

TEST(ReducedCapacity, Examples) {
  const auto g2 = BipartiteGraph::from_market(gen::e2());
  EXPECT_EQ(max_weight_reduced_capacity(g2, {Side::kBuyer, 0}), Rational(10));
  const auto g1 = BipartiteGraph::from_market(gen::e1());
  EXPECT_EQ(max_weight_reduced_capacity(g1, {Side::kItem, 0}), Rational(2));
  const BipartiteGraph isolated({"s1", "s2"}, {"t1"}, {1}, {{0, 0, Rational(4)}});
  EXPECT_EQ(max_weight_reduced_capacity(isolated, {Side::kItem, 1}), Rational(4));
}

TEST(ForcedAndReduced, AgreeWithEnumeration) {
  std::mt19937_64 rng(25);
  for (int k = 0; k < 200; ++k) {
    const auto g = random_graph(rng, gen::uniform(rng, 1, 3), gen::uniform(rng, 1, 6), 0.7);
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      ASSERT_EQ(max_weight_forced_edge(g, e), brute_max(g, g.capacity(), e)) << k << " edge " << e;
    }
    for (std::size_t t = 0; t < g.num_buyers(); ++t) {
      auto cap = g.capacity();
      --cap[t];
      ASSERT_EQ(max_weight_reduced_capacity(g, {Side::kBuyer, t}), brute_max(g, cap)) << k;
    }
    for (std::size_t s = 0; s < g.num_items(); ++s) {
      std::vector<bool> keep(g.num_items(), true);
      keep[s] = false;
      const auto without = g.induced(keep, std::vector<bool>(g.num_buyers(), true));
      ASSERT_EQ(max_weight_reduced_capacity(g, {Side::kItem, s}), brute_max(without, without.capacity())) << k;
    }
  }
}

TEST(Graph, RejectsBadInput) {
  EXPECT_THROW(BipartiteGraph({"s"}, {"t"}, {1}, {{1, 0, 1}}), ContractViolation);
  EXPECT_THROW(BipartiteGraph({"s"}, {"t"}, {1}, {{0, 0, 1}, {0, 0, 2}}), ContractViolation);
  EXPECT_THROW(BipartiteGraph({"s"}, {"t"}, {}, {}), ContractViolation);
}
