#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "dynprice/matching.hpp"

namespace dynprice {

// Buyer sets are index lists into the graph's buyers, ascending.
using BuyerSet = std::vector<std::size_t>;

// Surplus of Y: |N(Y)| - b(Y). With every demand equal to two this is
// |N(Y)| - 2|Y|.
int surplus(const BipartiteGraph& g, const BuyerSet& y);

// Dangerous: a nonempty proper buyer set with surplus exactly one.
struct DangerousSet {
  BuyerSet buyers;
  int neighborhood_size = 0;
};

struct SurplusQuery {
  BuyerSet must_include;
  BuyerSet must_exclude;
};

struct SurplusResult {
  BuyerSet buyers;
  int surplus = 0;
};

// Whether the buyer may take exactly F: G - (F + t) keeps a b-factor.
// F must be b(t) distinct tight neighbors of t (ContractViolation otherwise).
bool feasible_bundle(const BipartiteGraph& gpi, std::size_t buyer, const std::vector<std::size_t>& bundle);

// Nonempty proper Y honouring the query that minimizes the surplus, found by
// minimum cuts in source -> buyer (b(t)) -> item (inf) -> sink (1). Among
// minimizers the one with the smallest source side of the first optimal cut
// (in probe order) is returned. nullopt when no candidate exists.
std::optional<SurplusResult> min_surplus_set(const BipartiteGraph& gpi, const SurplusQuery& q);

// Inclusion-wise maximal dangerous set, grown one buyer probe at a time.
// nullopt when the minimum surplus is two or more. Throws ContractViolation
// if some nonempty proper set has surplus zero or less.
std::optional<BuyerSet> maximal_dangerous_set(const BipartiteGraph& gpi);

// Inclusion-wise minimal dangerous set disjoint from `avoid`, shrunk by
// exclusion probes; nullopt when none exists.
std::optional<BuyerSet> minimal_dangerous_disjoint(const BipartiteGraph& gpi, const BuyerSet& avoid);

// Items grouped by the exact set of buyers adjacent to them, for three
// buyers. Index I is a bitmask over buyer positions (bit i = buyer i).
using LegalClasses = std::array<std::vector<std::size_t>, 8>;
LegalClasses legal_classes_3(const BipartiteGraph& gpi);

}  // namespace dynprice
