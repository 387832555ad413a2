#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "dynprice/matching.hpp"
#include "dynprice/set_analysis.hpp"

namespace dynprice {

// Bijection from items to ranks 1..|S|, stored as the sequence of item
// indices from rank 1 upward.
class Ordering {
 public:
  Ordering() = default;
  // Throws ContractViolation unless `sequence` is a permutation of 0..n-1.
  Ordering(std::vector<std::size_t> sequence, std::size_t num_items);
  static Ordering identity(std::size_t num_items);

  const std::vector<std::size_t>& sequence() const { return sequence_; }
  std::size_t size() const { return sequence_.size(); }
  // 1-based rank.
  std::size_t rank(std::size_t item) const { return rank_[item]; }
  Ordering reversed() const;

  // The first `count` neighbors of the buyer by rank.
  std::vector<std::size_t> first_neighbors(const BipartiteGraph& g, std::size_t buyer, int count) const;

  friend bool operator==(const Ordering& a, const Ordering& b) { return a.sequence_ == b.sequence_; }

 private:
  std::vector<std::size_t> sequence_;
  std::vector<std::size_t> rank_;
};

// Three-buyer labels in {1,...,5}, indexed by item.
struct Labeling3 {
  std::vector<int> theta;
  // Buyer positions sorted by non-increasing demand (after the X_i reduction).
  std::array<std::size_t, 3> buyer_order{};
  std::array<int, 3> reduced_demand{};
};

// Items sorted by (pi(s), sigma rank). pi.item must cover every item of sigma.
Ordering combine(const Covering& pi, const Ordering& sigma);

// Every buyer's first b(t) neighbors extend to a b-factor.
bool verify_adequate(const BipartiteGraph& gpi, const Ordering& sigma);

// Symmetric difference of the two neighborhoods first, intersection last.
Ordering adequate_two_buyers(const BipartiteGraph& gpi);

// Label three buyers' items per the X_I class table: 5 on X_123, 4/3/2/1 on
// the pairwise classes; any order consistent with the labels is adequate.
Labeling3 label_three_buyers(const BipartiteGraph& gpi);

// At most three buyers. Items legal for a single buyer come first (that
// buyer's demand drops accordingly); buyers left without demand are dropped;
// the rest is ordered by the two-buyer rule or the three-buyer labeling.
Ordering adequate_three_buyers(const BipartiteGraph& gpi);

// One recursion level of the bi-demand construction.
struct CaseTraceEntry {
  int depth = 0;
  std::string branch;  // "single", "case1", "case2.1", "case2.2.1", "case2.2.2", "case3"
  std::vector<std::string> buyers;
  std::vector<std::string> z;  // maximal dangerous set, when one was used
  std::vector<std::string> x;  // minimal dangerous set disjoint from z
  std::vector<std::string> pivot_items;  // s0, or {s1, s2} in case 2.2.2
};

// Demands at most two, b-factor required. Re-derives a structured covering
// under unit weights, runs the case analysis on its tight subgraph and
// combines the covering with the resulting order.
Ordering adequate_bidemand(const BipartiteGraph& h, std::vector<CaseTraceEntry>* trace = nullptr);

}  // namespace dynprice
