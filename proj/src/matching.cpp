#include "dynprice/matching.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "dynprice/errors.hpp"

namespace dynprice {

BipartiteGraph::BipartiteGraph(std::vector<ItemId> items, std::vector<BuyerId> buyers,
                               std::vector<int> capacity, std::vector<Edge> edges)
    : items_(std::move(items)),
      buyers_(std::move(buyers)),
      capacity_(std::move(capacity)),
      edges_(std::move(edges)) {
  if (capacity_.size() != buyers_.size()) {
    throw ContractViolation("capacity vector does not match buyer count");
  }
  for (int c : capacity_) {
    if (c < 0) throw ContractViolation("negative buyer capacity");
  }
  for (const auto& e : edges_) {
    if (e.item >= items_.size() || e.buyer >= buyers_.size()) {
      throw ContractViolation("edge endpoint out of range");
    }
  }
  build_adjacency();
  for (const auto& adj : buyer_adj_) {
    std::vector<std::size_t> seen;
    for (std::size_t e : adj) seen.push_back(edges_[e].item);
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
      throw ContractViolation("parallel edges between one item and one buyer");
    }
  }
}

void BipartiteGraph::build_adjacency() {
  item_adj_.assign(items_.size(), {});
  buyer_adj_.assign(buyers_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    item_adj_[edges_[e].item].push_back(e);
    buyer_adj_[edges_[e].buyer].push_back(e);
  }
}

BipartiteGraph BipartiteGraph::from_market(const Market& m) {
  std::vector<BuyerId> buyers;
  std::vector<int> cap;
  for (const auto& b : m.buyers()) {
    buyers.push_back(b.id);
    cap.push_back(b.demand);
  }
  std::vector<Edge> edges;
  edges.reserve(m.num_items() * m.num_buyers());
  for (std::size_t s = 0; s < m.num_items(); ++s) {
    for (std::size_t t = 0; t < m.num_buyers(); ++t) {
      edges.push_back({s, t, m.value(t, s)});
    }
  }
  return BipartiteGraph(m.items(), std::move(buyers), std::move(cap), std::move(edges));
}

int BipartiteGraph::total_capacity() const {
  return std::accumulate(capacity_.begin(), capacity_.end(), 0);
}

std::optional<std::size_t> BipartiteGraph::find_edge(std::size_t item, std::size_t buyer) const {
  for (std::size_t e : item_adj_[item]) {
    if (edges_[e].buyer == buyer) return e;
  }
  return std::nullopt;
}

std::optional<std::size_t> BipartiteGraph::item_index(const ItemId& id) const {
  auto it = std::find(items_.begin(), items_.end(), id);
  if (it == items_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - items_.begin());
}

std::optional<std::size_t> BipartiteGraph::buyer_index(const BuyerId& id) const {
  auto it = std::find(buyers_.begin(), buyers_.end(), id);
  if (it == buyers_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - buyers_.begin());
}

std::vector<std::size_t> BipartiteGraph::neighbors(std::size_t buyer) const {
  std::vector<std::size_t> out;
  for (std::size_t e : buyer_adj_[buyer]) out.push_back(edges_[e].item);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<bool> BipartiteGraph::neighborhood(const std::vector<bool>& buyer_mask) const {
  std::vector<bool> out(items_.size(), false);
  for (const auto& e : edges_) {
    if (buyer_mask[e.buyer]) out[e.item] = true;
  }
  return out;
}

BipartiteGraph BipartiteGraph::induced(const std::vector<bool>& keep_items,
                                       const std::vector<bool>& keep_buyers) const {
  std::vector<std::size_t> item_map(items_.size(), SIZE_MAX);
  std::vector<std::size_t> buyer_map(buyers_.size(), SIZE_MAX);
  std::vector<ItemId> items;
  std::vector<BuyerId> buyers;
  std::vector<int> cap;
  for (std::size_t s = 0; s < items_.size(); ++s) {
    if (keep_items[s]) {
      item_map[s] = items.size();
      items.push_back(items_[s]);
    }
  }
  for (std::size_t t = 0; t < buyers_.size(); ++t) {
    if (keep_buyers[t]) {
      buyer_map[t] = buyers.size();
      buyers.push_back(buyers_[t]);
      cap.push_back(capacity_[t]);
    }
  }
  std::vector<Edge> edges;
  for (const auto& e : edges_) {
    if (keep_items[e.item] && keep_buyers[e.buyer]) {
      edges.push_back({item_map[e.item], buyer_map[e.buyer], e.weight});
    }
  }
  return BipartiteGraph(std::move(items), std::move(buyers), std::move(cap), std::move(edges));
}

BipartiteGraph BipartiteGraph::with_capacity(std::size_t buyer, int cap) const {
  auto caps = capacity_;
  caps.at(buyer) = cap;
  return BipartiteGraph(items_, buyers_, std::move(caps), edges_);
}

BipartiteGraph BipartiteGraph::with_weights(std::vector<Rational> weights) const {
  if (weights.size() != edges_.size()) throw ContractViolation("weight vector size mismatch");
  auto edges = edges_;
  for (std::size_t e = 0; e < edges.size(); ++e) edges[e].weight = std::move(weights[e]);
  return BipartiteGraph(items_, buyers_, capacity_, std::move(edges));
}

BipartiteGraph BipartiteGraph::with_unit_weights() const {
  return with_weights(std::vector<Rational>(edges_.size(), Rational(1)));
}

BipartiteGraph BipartiteGraph::edge_subgraph(const std::vector<bool>& keep_edges) const {
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (keep_edges[e]) edges.push_back(edges_[e]);
  }
  return BipartiteGraph(items_, buyers_, capacity_, std::move(edges));
}

std::string BipartiteGraph::vertex_name(Vertex v) const {
  return v.side == Side::kItem ? items_.at(v.index) : buyers_.at(v.index);
}

Rational Covering::total_value(const BipartiteGraph& g) const {
  Rational sum;
  for (const auto& p : item) sum += p;
  for (std::size_t t = 0; t < buyer.size(); ++t) sum += buyer[t] * Rational(g.capacity(t));
  return sum;
}

Rational Covering::edge_slack(const BipartiteGraph& g, std::size_t edge) const {
  const auto& e = g.edges()[edge];
  return item[e.item] + buyer[e.buyer] - e.weight;
}

bool Covering::is_tight(const BipartiteGraph& g, std::size_t edge) const {
  return edge_slack(g, edge).is_zero();
}

bool Covering::is_feasible(const BipartiteGraph& g) const {
  if (item.size() != g.num_items() || buyer.size() != g.num_buyers()) return false;
  for (const auto& p : item) {
    if (p.sign() < 0) return false;
  }
  for (const auto& p : buyer) {
    if (p.sign() < 0) return false;
  }
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    if (edge_slack(g, e).sign() < 0) return false;
  }
  return true;
}

std::vector<int> BMatching::buyer_degrees(const BipartiteGraph& g) const {
  std::vector<int> deg(g.num_buyers(), 0);
  for (std::size_t e : edges) ++deg[g.edges()[e].buyer];
  return deg;
}

std::vector<int> BMatching::item_degrees(const BipartiteGraph& g) const {
  std::vector<int> deg(g.num_items(), 0);
  for (std::size_t e : edges) ++deg[g.edges()[e].item];
  return deg;
}

bool BMatching::is_valid(const BipartiteGraph& g) const {
  for (int d : item_degrees(g)) {
    if (d > 1) return false;
  }
  const auto deg = buyer_degrees(g);
  for (std::size_t t = 0; t < deg.size(); ++t) {
    if (deg[t] > g.capacity(t)) return false;
  }
  return true;
}

Rational BMatching::weight(const BipartiteGraph& g) const {
  Rational sum;
  for (std::size_t e : edges) sum += g.edges()[e].weight;
  return sum;
}

namespace {

// Weight that is maximized lexicographically: value first, then `tiebreak`.
struct LexWeight {
  Rational value;
  std::int64_t tiebreak = 0;

  LexWeight& operator+=(const LexWeight& o) {
    value += o.value;
    tiebreak += o.tiebreak;
    return *this;
  }
  LexWeight& operator-=(const LexWeight& o) {
    value -= o.value;
    tiebreak -= o.tiebreak;
    return *this;
  }
  friend LexWeight operator+(LexWeight a, const LexWeight& b) { return a += b; }
  friend LexWeight operator-(LexWeight a, const LexWeight& b) { return a -= b; }
  friend bool operator==(const LexWeight&, const LexWeight&) = default;
  friend auto operator<=>(const LexWeight& a, const LexWeight& b) {
    if (auto c = a.value <=> b.value; c != 0) return c;
    return a.tiebreak <=> b.tiebreak;
  }
};

template <class W>
struct PrimalDual {
  std::vector<std::size_t> matched;  // edge indices
  std::vector<W> pi_item;
  std::vector<W> pi_buyer;
};

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Hungarian-style primal-dual method for max-weight b-matching with
// non-negative duals. Invariants kept throughout:
//   pi >= 0 and pi(s) + pi(t) >= w(st) on every edge;
//   matched edges are tight;
//   buyers below capacity have pi(t) = 0.
// Each phase grows alternating trees from exposed items with pi(s) > 0 along
// tight edges; it either augments, or shifts duals by the largest amount that
// keeps the covering feasible (lowering reached items, raising reached
// buyers). It ends when no exposed item carries a positive dual, at which
// point complementary slackness certifies optimality.
template <class W>
PrimalDual<W> primal_dual(const BipartiteGraph& g, const std::vector<W>& w) {
  const std::size_t ns = g.num_items();
  const std::size_t nt = g.num_buyers();
  const auto& edges = g.edges();
  const W zero{};

  PrimalDual<W> out;
  out.pi_item.assign(ns, zero);
  out.pi_buyer.assign(nt, zero);
  auto& ps = out.pi_item;
  auto& pt = out.pi_buyer;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (g.capacity(edges[e].buyer) > 0 && ps[edges[e].item] < w[e]) ps[edges[e].item] = w[e];
  }
  std::vector<std::size_t> mate(ns, kNone);  // matched edge of each item
  std::vector<int> deg(nt, 0);
  auto usable = [&](std::size_t e) { return g.capacity(edges[e].buyer) > 0; };
  auto tight = [&](std::size_t e) { return ps[edges[e].item] + pt[edges[e].buyer] == w[e]; };

  std::vector<std::size_t> parent_of_item(ns);   // buyer that reached the item
  std::vector<std::size_t> parent_of_buyer(nt);  // edge that reached the buyer
  std::vector<char> reached_item(ns);
  std::vector<char> reached_buyer(nt);

  while (true) {
    std::fill(reached_item.begin(), reached_item.end(), 0);
    std::fill(reached_buyer.begin(), reached_buyer.end(), 0);
    std::deque<std::size_t> queue;
    for (std::size_t s = 0; s < ns; ++s) {
      if (mate[s] == kNone && zero < ps[s]) {
        reached_item[s] = 1;
        parent_of_item[s] = kNone;
        queue.push_back(s);
      }
    }
    if (queue.empty()) break;

    std::size_t end_buyer = kNone;
    while (!queue.empty() && end_buyer == kNone) {
      const std::size_t s = queue.front();
      queue.pop_front();
      for (std::size_t e : g.item_edges(s)) {
        const std::size_t t = edges[e].buyer;
        if (reached_buyer[t] || mate[s] == e || !usable(e) || !tight(e)) continue;
        reached_buyer[t] = 1;
        parent_of_buyer[t] = e;
        if (deg[t] < g.capacity(t)) {
          end_buyer = t;
          break;
        }
        for (std::size_t f : g.buyer_edges(t)) {
          const std::size_t s2 = edges[f].item;
          if (mate[s2] == f && !reached_item[s2]) {
            reached_item[s2] = 1;
            parent_of_item[s2] = t;
            queue.push_back(s2);
          }
        }
      }
    }

    if (end_buyer != kNone) {
      ++deg[end_buyer];
      std::size_t t = end_buyer;
      while (true) {
        const std::size_t e = parent_of_buyer[t];
        const std::size_t s = edges[e].item;
        const std::size_t prev = mate[s];
        mate[s] = e;
        if (prev == kNone) break;
        t = edges[prev].buyer;
      }
      continue;
    }

    // No augmenting path: shift duals.
    std::optional<W> eps;
    for (std::size_t s = 0; s < ns; ++s) {
      if (!reached_item[s]) continue;
      if (!eps || ps[s] < *eps) eps = ps[s];
      for (std::size_t e : g.item_edges(s)) {
        const std::size_t t = edges[e].buyer;
        if (reached_buyer[t] || !usable(e)) continue;
        W slack = ps[s] + pt[t] - w[e];
        if (slack < *eps) eps = slack;
      }
    }
    for (std::size_t s = 0; s < ns; ++s) {
      if (reached_item[s]) ps[s] -= *eps;
    }
    for (std::size_t t = 0; t < nt; ++t) {
      if (reached_buyer[t]) pt[t] += *eps;
    }
    // A matched item whose dual dropped to zero is released by shifting the
    // alternating path from its root; the root gets matched instead.
    for (std::size_t s = 0; s < ns; ++s) {
      if (!reached_item[s] || mate[s] == kNone || !(ps[s] == zero)) continue;
      std::size_t t = edges[mate[s]].buyer;
      mate[s] = kNone;
      while (true) {
        const std::size_t e = parent_of_buyer[t];
        const std::size_t s2 = edges[e].item;
        const std::size_t prev = mate[s2];
        mate[s2] = e;
        if (prev == kNone) break;
        t = edges[prev].buyer;
      }
      break;
    }
  }

  // Buyers without capacity never take an edge and add nothing to pi . b;
  // park whatever dual covers their edges.
  for (std::size_t t = 0; t < nt; ++t) {
    if (g.capacity(t) > 0) continue;
    for (std::size_t e : g.buyer_edges(t)) {
      W need = w[e] - ps[edges[e].item];
      if (pt[t] < need) pt[t] = need;
    }
  }
  for (std::size_t s = 0; s < ns; ++s) {
    if (mate[s] != kNone) out.matched.push_back(mate[s]);
  }
  std::sort(out.matched.begin(), out.matched.end());
  return out;
}

}  // namespace

MatchingSolution solve_bmatching(const BipartiteGraph& g) {
  std::vector<Rational> w;
  w.reserve(g.edges().size());
  for (const auto& e : g.edges()) w.push_back(e.weight);
  auto pd = primal_dual<Rational>(g, w);
  MatchingSolution out;
  out.matching.edges = std::move(pd.matched);
  out.weight = out.matching.weight(g);
  out.covering.item = std::move(pd.pi_item);
  out.covering.buyer = std::move(pd.pi_buyer);
  return out;
}

MatchingSolution max_weight_bmatching(const BipartiteGraph& g) { return solve_bmatching(g); }

Covering optimal_covering(const BipartiteGraph& g) { return solve_bmatching(g).covering; }

BMatching max_weight_min_cardinality(const BipartiteGraph& g) {
  std::vector<LexWeight> w;
  w.reserve(g.edges().size());
  for (const auto& e : g.edges()) w.push_back({e.weight, -1});
  auto pd = primal_dual<LexWeight>(g, w);
  return BMatching{std::move(pd.matched)};
}

namespace {

struct CardinalityState {
  std::vector<std::size_t> mate;  // edge per item
  std::vector<int> deg;
};

// Kuhn-style augmentation for capacitated buyers; returns the final state.
CardinalityState max_cardinality_state(const BipartiteGraph& g) {
  const auto& edges = g.edges();
  CardinalityState st{std::vector<std::size_t>(g.num_items(), kNone),
                      std::vector<int>(g.num_buyers(), 0)};
  std::vector<char> seen(g.num_buyers());

  // DFS from an item looking for a buyer with spare capacity.
  auto augment = [&](auto&& self, std::size_t s) -> bool {
    for (std::size_t e : g.item_edges(s)) {
      const std::size_t t = edges[e].buyer;
      if (seen[t] || g.capacity(t) == 0) continue;
      seen[t] = 1;
      if (st.deg[t] < g.capacity(t)) {
        ++st.deg[t];
        st.mate[s] = e;
        return true;
      }
      for (std::size_t f : g.buyer_edges(t)) {
        const std::size_t s2 = edges[f].item;
        if (st.mate[s2] == f && self(self, s2)) {
          st.mate[s] = e;
          return true;
        }
      }
    }
    return false;
  };

  for (std::size_t s = 0; s < g.num_items(); ++s) {
    std::fill(seen.begin(), seen.end(), 0);
    augment(augment, s);
  }
  return st;
}

}  // namespace

BMatching max_cardinality_bmatching(const BipartiteGraph& g) {
  auto st = max_cardinality_state(g);
  BMatching m;
  for (std::size_t e : st.mate) {
    if (e != kNone) m.edges.push_back(e);
  }
  std::sort(m.edges.begin(), m.edges.end());
  return m;
}

bool has_bfactor(const BipartiteGraph& g) {
  if (static_cast<int>(g.num_items()) != g.total_capacity()) return false;
  const auto st = max_cardinality_state(g);
  return std::none_of(st.mate.begin(), st.mate.end(), [](std::size_t e) { return e == kNone; });
}

FactorCheck bfactor_exists(const BipartiteGraph& g) {
  FactorCheck out;
  if (static_cast<int>(g.num_items()) != g.total_capacity()) {
    out.size_mismatch = true;
    return out;
  }
  const auto st = max_cardinality_state(g);
  const auto& edges = g.edges();
  std::size_t root = kNone;
  for (std::size_t t = 0; t < g.num_buyers(); ++t) {
    if (st.deg[t] < g.capacity(t)) {
      root = t;
      break;
    }
  }
  if (root == kNone) {
    out.exists = true;
    return out;
  }
  // Konig: buyers reachable from an unsaturated buyer by alternating paths
  // (any edge to an item, then that item's matched edge back) form a set Y
  // with N(Y) saturated into Y, so |N(Y)| = d(Y) < b(Y).
  std::vector<char> in_y(g.num_buyers(), 0);
  std::deque<std::size_t> queue{root};
  in_y[root] = 1;
  while (!queue.empty()) {
    const std::size_t t = queue.front();
    queue.pop_front();
    for (std::size_t e : g.buyer_edges(t)) {
      const std::size_t m = st.mate[edges[e].item];
      if (m == kNone) {
        throw InternalError("bfactor_exists: augmenting path left in maximum b-matching");
      }
      const std::size_t t2 = edges[m].buyer;
      if (!in_y[t2]) {
        in_y[t2] = 1;
        queue.push_back(t2);
      }
    }
  }
  for (std::size_t t = 0; t < g.num_buyers(); ++t) {
    if (in_y[t]) out.deficient_buyers.push_back(t);
  }
  return out;
}

Rational max_weight_forced_edge(const BipartiteGraph& g, std::size_t edge) {
  if (edge >= g.edges().size()) throw ContractViolation("max_weight_forced_edge: unknown edge");
  const auto& e = g.edges()[edge];
  if (g.capacity(e.buyer) < 1) throw ContractViolation("max_weight_forced_edge: buyer has no capacity");
  std::vector<bool> keep_items(g.num_items(), true);
  keep_items[e.item] = false;
  std::vector<bool> keep_buyers(g.num_buyers(), true);
  auto reduced = g.induced(keep_items, keep_buyers).with_capacity(e.buyer, g.capacity(e.buyer) - 1);
  return solve_bmatching(reduced).weight + e.weight;
}

Rational max_weight_reduced_capacity(const BipartiteGraph& g, Vertex v) {
  if (v.side == Side::kItem) {
    if (v.index >= g.num_items()) throw ContractViolation("max_weight_reduced_capacity: unknown item");
    std::vector<bool> keep_items(g.num_items(), true);
    keep_items[v.index] = false;
    return solve_bmatching(g.induced(keep_items, std::vector<bool>(g.num_buyers(), true))).weight;
  }
  if (v.index >= g.num_buyers()) throw ContractViolation("max_weight_reduced_capacity: unknown buyer");
  const int cap = g.capacity(v.index);
  return solve_bmatching(g.with_capacity(v.index, cap > 0 ? cap - 1 : 0)).weight;
}

BipartiteGraph expand_buyer_copies(const BipartiteGraph& g) {
  std::vector<BuyerId> buyers;
  std::vector<std::vector<std::size_t>> copies(g.num_buyers());
  for (std::size_t t = 0; t < g.num_buyers(); ++t) {
    for (int k = 0; k < g.capacity(t); ++k) {
      copies[t].push_back(buyers.size());
      buyers.push_back(g.buyers()[t] + "#" + std::to_string(k + 1));
    }
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    for (std::size_t c : copies[e.buyer]) edges.push_back({e.item, c, e.weight});
  }
  std::vector<int> cap(buyers.size(), 1);
  return BipartiteGraph(g.items(), std::move(buyers), std::move(cap), std::move(edges));
}

}  // namespace dynprice
