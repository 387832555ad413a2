#include <gtest/gtest.h>

#include <bit>
#include <map>

#include "dynprice/errors.hpp"
#include "dynprice/orderings.hpp"
#include "dynprice/set_analysis.hpp"
#include "dynprice/structured_dual.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace dynprice;

namespace {

BipartiteGraph graph_of(const std::vector<std::vector<std::size_t>>& nbr, const std::vector<int>& cap,
                        std::size_t items) {
  std::vector<Edge> edges;
  for (std::size_t t = 0; t < nbr.size(); ++t) {
    for (std::size_t s : nbr[t]) edges.push_back({s, t, Rational(1)});
  }
  std::vector<ItemId> names;
  for (std::size_t s = 0; s < items; ++s) names.push_back("s" + std::to_string(s + 1));
  std::vector<BuyerId> buyers;
  for (std::size_t t = 0; t < nbr.size(); ++t) buyers.push_back("t" + std::to_string(t + 1));
  return BipartiteGraph(names, buyers, cap, edges);
}

BipartiteGraph graph_d1() { return graph_of({{0, 1, 2}, {1, 2, 3, 4, 5}, {3, 4, 5}}, {2, 2, 2}, 6); }

BipartiteGraph tight_graph(const Market& m) {
  const auto g = BipartiteGraph::from_market(m);
  return tight_subgraph(refine_covering(g), g);
}

std::vector<std::size_t> first_b(const BipartiteGraph& g, const Ordering& sigma, std::size_t t) {
  auto f = sigma.first_neighbors(g, t, g.capacity(t));
  std::sort(f.begin(), f.end());
  return f;
}

}  // namespace

TEST(Ordering, RejectsNonBijections) {
  EXPECT_THROW(Ordering({0, 0}, 2), ContractViolation);
  EXPECT_THROW(Ordering({0}, 2), ContractViolation);
  EXPECT_THROW(Ordering({0, 2}, 2), ContractViolation);
  const Ordering o({2, 0, 1}, 3);
  EXPECT_EQ(o.rank(2), 1u);
  EXPECT_EQ(o.rank(1), 3u);
  EXPECT_EQ(o.reversed().sequence(), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Combine, Examples) {
  const Ordering sigma({2, 0, 1}, 3);
  EXPECT_EQ(combine(Covering{{Rational(1), Rational(1), Rational(1)}, {}}, sigma), sigma);
  EXPECT_EQ(combine(Covering{{Rational(1), Rational(0)}, {}}, Ordering::identity(2)).sequence(),
            (std::vector<std::size_t>{1, 0}));
  EXPECT_THROW(combine(Covering{{Rational(1)}, {}}, sigma), ContractViolation);
}

TEST(Combine, AdequateOnTightGraphStaysAdequateOnWholeGraph) {
  // An adequate order of the unit-weight tight graph, combined with the
  // unit-weight covering, is adequate for the whole graph.
  std::mt19937_64 rng(51);
  int checked = 0;
  for (int k = 0; k < 300 && checked < 80; ++k) {
    const std::size_t nt = gen::uniform(rng, 2, 5);
    std::vector<int> demands(nt);
    for (auto& d : demands) d = static_cast<int>(gen::uniform(rng, 1, 2));
    auto g = gen::factor_union(rng, demands, 2);
    // Extra edges that lie in no factor.
    std::vector<Edge> edges = g.edges();
    for (std::size_t s = 0; s < g.num_items(); ++s) {
      const std::size_t t = gen::uniform(rng, 0, static_cast<std::int64_t>(nt) - 1);
      if (!g.find_edge(s, t)) edges.push_back({s, t, Rational(1)});
    }
    const BipartiteGraph h(g.items(), g.buyers(), g.capacity(), edges);
    const auto sc = refine_covering(h);
    const auto core = tight_subgraph(sc, h);
    // Brute-force an adequate order of the core.
    std::vector<std::size_t> perm(core.num_items());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::optional<Ordering> found;
    int tries = 0;
    do {
      const Ordering o(perm, core.num_items());
      if (oracle::adequate(core, o)) found = o;
    } while (!found && ++tries < 2000 && std::next_permutation(perm.begin(), perm.end()));
    if (!found) continue;
    ++checked;
    EXPECT_TRUE(oracle::adequate(h, combine(sc.pi, *found))) << k;
  }
  EXPECT_GE(checked, 40);
}

TEST(VerifyAdequate, Examples) {
  const auto single = graph_of({{0, 1}}, {2}, 2);
  EXPECT_TRUE(verify_adequate(single, Ordering::identity(2)));
  EXPECT_TRUE(verify_adequate(single, Ordering({1, 0}, 2)));

  const auto d1 = graph_d1();
  EXPECT_FALSE(verify_adequate(d1, Ordering({1, 2, 0, 3, 4, 5}, 6)));
}

TEST(VerifyAdequate, MatchesEnumeration) {
  std::mt19937_64 rng(52);
  int yes = 0;
  int no = 0;
  for (int k = 0; k < 400; ++k) {
    const std::size_t nt = gen::uniform(rng, 1, 4);
    std::vector<int> demands(nt);
    for (auto& d : demands) d = static_cast<int>(gen::uniform(rng, 1, 3));
    const auto g = gen::factor_union(rng, demands, static_cast<int>(gen::uniform(rng, 1, 3)));
    if (g.num_items() > 10) continue;
    std::vector<std::size_t> perm(g.num_items());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const Ordering sigma(perm, g.num_items());
    const bool expected = oracle::adequate(g, sigma);
    ASSERT_EQ(verify_adequate(g, sigma), expected) << k;
    (expected ? yes : no)++;
  }
  EXPECT_GT(yes, 20);
  EXPECT_GT(no, 20);
}

TEST(TwoBuyers, Examples) {
  const auto e2 = tight_graph(gen::e2());
  EXPECT_TRUE(oracle::adequate(e2, adequate_two_buyers(e2)));

  const auto shared = graph_of({{0, 1}, {0, 1}}, {1, 1}, 2);
  EXPECT_TRUE(oracle::adequate(shared, adequate_two_buyers(shared)));

  const auto uneven = graph_of({{0, 1, 2}, {2}}, {2, 1}, 3);
  const auto sigma = adequate_two_buyers(uneven);
  EXPECT_EQ(sigma.rank(2), 3u);
  EXPECT_EQ(first_b(uneven, sigma, 0), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(oracle::adequate(uneven, sigma));

  EXPECT_THROW(adequate_two_buyers(graph_d1()), ContractViolation);
}

TEST(ThreeBuyers, TwoOptimaMarket) {
  const auto g = tight_graph(gen::two_optima());
  const auto sigma = adequate_three_buyers(g);
  EXPECT_TRUE(oracle::adequate(g, sigma));
  EXPECT_NE(first_b(g, sigma, 0), (std::vector<std::size_t>{2, 3}));
}

TEST(ThreeBuyers, DisjointSingletons) {
  const auto g = graph_of({{0}, {1}, {2}}, {1, 1, 1}, 3);
  EXPECT_TRUE(verify_adequate(g, Ordering::identity(3)));
  EXPECT_TRUE(verify_adequate(g, adequate_three_buyers(g)));
}

TEST(ThreeBuyers, LabelingInvariants) {
  std::mt19937_64 rng(53);
  int labeled = 0;
  for (int k = 0; k < 3000 && labeled < 150; ++k) {
    std::vector<int> demands(3);
    for (auto& d : demands) d = static_cast<int>(gen::uniform(rng, 1, 4));
    const auto g = gen::factor_union(rng, demands, static_cast<int>(gen::uniform(rng, 2, 4)));
    const auto classes = legal_classes_3(g);
    if (!classes[1].empty() || !classes[2].empty() || !classes[4].empty()) continue;
    ++labeled;
    const auto lab = label_three_buyers(g);
    const auto& ord = lab.buyer_order;
    const auto& b = lab.reduced_demand;
    for (std::size_t s : classes[7]) EXPECT_EQ(lab.theta[s], 5);
    for (int i = 0; i < 3; ++i) {
      int low_total = 0;
      for (int j = 0; j < 3; ++j) {
        if (j == i) continue;
        const auto& x = classes[(1u << ord[i]) | (1u << ord[j])];
        int low = 0;
        for (std::size_t s : x) low += lab.theta[s] <= 4 - (i + 1);
        // Items of X_ij labeled at most 4-i are exactly the surplus over b_j.
        EXPECT_EQ(low, std::max(0, static_cast<int>(x.size()) - b[j])) << k;
        low_total += low;
      }
      EXPECT_LE(low_total, b[i]) << k;
    }
    // The first b_i items of each buyer leave room for the others.
    std::vector<std::size_t> seq(g.num_items());
    std::iota(seq.begin(), seq.end(), std::size_t{0});
    std::stable_sort(seq.begin(), seq.end(), [&](auto x, auto y) { return lab.theta[x] < lab.theta[y]; });
    const Ordering sigma(seq, g.num_items());
    for (std::size_t t = 0; t < 3; ++t) {
      const auto f = first_b(g, sigma, t);
      EXPECT_EQ(static_cast<int>(f.size()), g.capacity(t));
      for (std::size_t u = 0; u < 3; ++u) {
        if (u == t) continue;
        int left = 0;
        for (std::size_t s : g.neighbors(u)) left += !std::binary_search(f.begin(), f.end(), s);
        EXPECT_GE(left, g.capacity(u));
      }
    }
    EXPECT_TRUE(oracle::adequate(g, sigma)) << k;
  }
  EXPECT_GE(labeled, 100);
}

TEST(ThreeBuyers, RandomMarketsAreAdequate) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t nt = gen::uniform(rng, 1, 3);
    std::vector<int> demands(nt);
    for (auto& d : demands) d = static_cast<int>(gen::uniform(rng, 1, 3));
    const auto base = gen::factor_union(rng, demands, static_cast<int>(gen::uniform(rng, 1, 3)));
    const Market m = gen::market_on_graph(rng, base, 2, 4, 1);
    const auto g = tight_graph(m);
    const auto sigma = adequate_three_buyers(g);
    ASSERT_TRUE(oracle::adequate(g, sigma)) << seed;
    EXPECT_TRUE(verify_adequate(g, sigma));
  }
}

TEST(Bidemand, D1) {
  const auto g = graph_d1();
  std::vector<CaseTraceEntry> trace;
  const auto sigma = adequate_bidemand(g, &trace);
  EXPECT_TRUE(oracle::adequate(g, sigma));
  ASSERT_FALSE(trace.empty());
  EXPECT_EQ(trace[0].depth, 0);
  if (trace[0].z == std::vector<std::string>{"t2", "t3"}) {
    EXPECT_EQ(trace[0].branch, "case2.2.2");
    EXPECT_EQ(trace[0].x, (std::vector<std::string>{"t1"}));
    EXPECT_EQ(trace[0].pivot_items, (std::vector<std::string>{"s2", "s3"}));
  } else {
    EXPECT_EQ(trace[0].z, (std::vector<std::string>{"t1"}));
  }
}

TEST(Bidemand, DisconnectedComponents) {
  const auto g = graph_of({{0, 1}, {2, 3}}, {2, 2}, 4);
  std::vector<CaseTraceEntry> trace;
  const auto sigma = adequate_bidemand(g, &trace);
  EXPECT_TRUE(oracle::adequate(g, sigma));
  ASSERT_FALSE(trace.empty());
  EXPECT_EQ(trace[0].branch, "case3");
}

TEST(Bidemand, CompleteGraph) {
  std::vector<std::vector<std::size_t>> nbr(3, {0, 1, 2, 3, 4, 5});
  const auto g = graph_of(nbr, {2, 2, 2}, 6);
  std::vector<CaseTraceEntry> trace;
  const auto sigma = adequate_bidemand(g, &trace);
  EXPECT_TRUE(oracle::adequate(g, sigma));
  ASSERT_FALSE(trace.empty());
  EXPECT_EQ(trace[0].branch, "case1");
}

TEST(Bidemand, RejectsBadInput) {
  EXPECT_THROW(adequate_bidemand(graph_of({{0, 1, 2}}, {3}, 3)), ContractViolation);
  EXPECT_THROW(adequate_bidemand(graph_of({{0, 1}, {0, 1}}, {2, 2}, 4)), ContractViolation);
}

TEST(Bidemand, RandomGraphsAreAdequateAndCoverEveryBranch) {
  std::mt19937_64 rng(54);
  std::map<std::string, int> branches;
  for (int k = 0; k < 400; ++k) {
    const std::size_t nt = gen::uniform(rng, 1, 5);
    std::vector<int> demands(nt);
    const bool mixed = k % 3 == 0;
    for (auto& d : demands) d = mixed ? static_cast<int>(gen::uniform(rng, 1, 2)) : 2;
    const auto g = gen::factor_union(rng, demands, static_cast<int>(gen::uniform(rng, 1, 3)));
    std::vector<CaseTraceEntry> trace;
    const auto sigma = adequate_bidemand(g, &trace);
    ASSERT_TRUE(oracle::adequate(g, sigma)) << k;
    for (const auto& entry : trace) ++branches[entry.branch];
  }
  for (const char* b : {"single", "case1", "case2.1", "case2.2.1", "case2.2.2", "case3"}) {
    EXPECT_GT(branches[b], 0) << b;
  }
}
