#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dynprice/market.hpp"
#include "dynprice/rational.hpp"

namespace dynprice {

struct Edge {
  std::size_t item;
  std::size_t buyer;
  Rational weight;
};

enum class Side { kItem, kBuyer };

struct Vertex {
  Side side;
  std::size_t index;
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

// Bipartite graph G = (S, T; E) with items on the left (capacity 1) and buyers
// on the right (capacity b(t)). Edge and vertex order is significant: every
// algorithm in this library scans them in order, which makes outputs
// reproducible.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  BipartiteGraph(std::vector<ItemId> items, std::vector<BuyerId> buyers,
                 std::vector<int> capacity, std::vector<Edge> edges);

  // Complete bipartite graph with w(st) = v_t(s).
  static BipartiteGraph from_market(const Market& m);

  const std::vector<ItemId>& items() const { return items_; }
  const std::vector<BuyerId>& buyers() const { return buyers_; }
  const std::vector<int>& capacity() const { return capacity_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_items() const { return items_.size(); }
  std::size_t num_buyers() const { return buyers_.size(); }
  int capacity(std::size_t buyer) const { return capacity_[buyer]; }
  int total_capacity() const;

  // Edge indices incident to a vertex, in edge order.
  const std::vector<std::size_t>& item_edges(std::size_t item) const { return item_adj_[item]; }
  const std::vector<std::size_t>& buyer_edges(std::size_t buyer) const { return buyer_adj_[buyer]; }

  std::optional<std::size_t> find_edge(std::size_t item, std::size_t buyer) const;
  std::optional<std::size_t> item_index(const ItemId& id) const;
  std::optional<std::size_t> buyer_index(const BuyerId& id) const;

  // Items adjacent to a buyer, ascending index.
  std::vector<std::size_t> neighbors(std::size_t buyer) const;
  // N(Y) as an item mask.
  std::vector<bool> neighborhood(const std::vector<bool>& buyer_mask) const;

  // Subgraph on the kept vertices; order and names are preserved.
  BipartiteGraph induced(const std::vector<bool>& keep_items,
                         const std::vector<bool>& keep_buyers) const;
  BipartiteGraph with_capacity(std::size_t buyer, int cap) const;
  BipartiteGraph with_weights(std::vector<Rational> weights) const;
  BipartiteGraph with_unit_weights() const;
  BipartiteGraph edge_subgraph(const std::vector<bool>& keep_edges) const;

  std::string vertex_name(Vertex v) const;

 private:
  void build_adjacency();

  std::vector<ItemId> items_;
  std::vector<BuyerId> buyers_;
  std::vector<int> capacity_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> item_adj_;
  std::vector<std::vector<std::size_t>> buyer_adj_;
};

// Non-negative dual vector over items and buyers.
struct Covering {
  std::vector<Rational> item;
  std::vector<Rational> buyer;

  const Rational& at(Vertex v) const { return v.side == Side::kItem ? item[v.index] : buyer[v.index]; }
  // pi . b (items have capacity 1).
  Rational total_value(const BipartiteGraph& g) const;
  Rational edge_slack(const BipartiteGraph& g, std::size_t edge) const;
  bool is_tight(const BipartiteGraph& g, std::size_t edge) const;
  // Non-negativity plus every covering constraint.
  bool is_feasible(const BipartiteGraph& g) const;
};

struct BMatching {
  // Edge indices, ascending.
  std::vector<std::size_t> edges;

  std::vector<int> buyer_degrees(const BipartiteGraph& g) const;
  std::vector<int> item_degrees(const BipartiteGraph& g) const;
  bool is_valid(const BipartiteGraph& g) const;
  Rational weight(const BipartiteGraph& g) const;
};

struct MatchingSolution {
  BMatching matching;
  Rational weight;
  Covering covering;
};

// Exact primal-dual solve: a maximum-weight b-matching together with an
// optimal non-negative covering of equal value. Negative weights are allowed
// (such edges are never used). Deterministic in the input order.
MatchingSolution solve_bmatching(const BipartiteGraph& g);

MatchingSolution max_weight_bmatching(const BipartiteGraph& g);
Covering optimal_covering(const BipartiteGraph& g);

// Maximum weight first, then fewest edges.
BMatching max_weight_min_cardinality(const BipartiteGraph& g);

// Maximum-cardinality b-matching (weights ignored), by augmenting paths.
BMatching max_cardinality_bmatching(const BipartiteGraph& g);

struct FactorCheck {
  bool exists = false;
  bool size_mismatch = false;
  // Buyer set Y with |N(Y)| < b(Y); empty when exists or size_mismatch.
  std::vector<std::size_t> deficient_buyers;
};

// Existence of a b-factor (every item degree 1, every buyer degree b(t)).
// A Hall-deficient buyer set is returned when the sizes agree but no factor
// exists.
FactorCheck bfactor_exists(const BipartiteGraph& g);
// Fast yes/no form of bfactor_exists.
bool has_bfactor(const BipartiteGraph& g);

// Maximum weight over b-matchings containing the edge. The edge always fits,
// since every capacity is at least one.
Rational max_weight_forced_edge(const BipartiteGraph& g, std::size_t edge);

// Maximum weight with the vertex's capacity lowered by one.
Rational max_weight_reduced_capacity(const BipartiteGraph& g, Vertex v);

// Unit-capacity graph with b(t) copies of each buyer t, named "<t>#k".
BipartiteGraph expand_buyer_copies(const BipartiteGraph& g);

}  // namespace dynprice
