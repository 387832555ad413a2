#include "dynprice/set_analysis.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "dynprice/errors.hpp"

namespace dynprice {

namespace {

constexpr int kInfinity = std::numeric_limits<int>::max() / 4;

// Small Edmonds-Karp max-flow on integer capacities.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t n) : adj_(n) {}

  void add_arc(std::size_t from, std::size_t to, int cap) {
    adj_[from].push_back(arcs_.size());
    arcs_.push_back({to, cap});
    adj_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0});
  }

  int max_flow(std::size_t source, std::size_t sink) {
    int total = 0;
    std::vector<std::size_t> via(adj_.size());
    while (true) {
      std::vector<char> seen(adj_.size(), 0);
      std::deque<std::size_t> queue{source};
      seen[source] = 1;
      while (!queue.empty() && !seen[sink]) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t a : adj_[u]) {
          if (arcs_[a].cap > 0 && !seen[arcs_[a].to]) {
            seen[arcs_[a].to] = 1;
            via[arcs_[a].to] = a;
            queue.push_back(arcs_[a].to);
          }
        }
      }
      if (!seen[sink]) return total;
      int push = kInfinity;
      for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to) {
        push = std::min(push, arcs_[via[v]].cap);
      }
      for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].cap -= push;
        arcs_[via[v] ^ 1].cap += push;
      }
      total += push;
      if (total >= kInfinity) return total;
    }
  }

  // Vertices reachable from the source in the residual network.
  std::vector<char> source_side(std::size_t source) const {
    std::vector<char> seen(adj_.size(), 0);
    std::deque<std::size_t> queue{source};
    seen[source] = 1;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t a : adj_[u]) {
        if (arcs_[a].cap > 0 && !seen[arcs_[a].to]) {
          seen[arcs_[a].to] = 1;
          queue.push_back(arcs_[a].to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    std::size_t to;
    int cap;
  };
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
};

// Minimizes |N(Y)| - b(Y) over all Y with include ⊆ Y ⊆ T - exclude
// (Y may be empty). Returns nullopt if include and exclude intersect.
std::optional<SurplusResult> min_surplus_unrestricted(const BipartiteGraph& g,
                                                      const std::vector<char>& include,
                                                      const std::vector<char>& exclude) {
  const std::size_t nt = g.num_buyers();
  const std::size_t ns = g.num_items();
  for (std::size_t t = 0; t < nt; ++t) {
    if (include[t] && exclude[t]) return std::nullopt;
  }
  // Layout: source, buyers, items, sink.
  const std::size_t source = 0;
  const std::size_t sink = 1 + nt + ns;
  FlowNetwork net(sink + 1);
  for (std::size_t t = 0; t < nt; ++t) {
    if (exclude[t]) continue;
    net.add_arc(source, 1 + t, include[t] ? kInfinity : g.capacity(t));
  }
  for (const auto& e : g.edges()) {
    if (!exclude[e.buyer]) net.add_arc(1 + e.buyer, 1 + nt + e.item, kInfinity);
  }
  for (std::size_t s = 0; s < ns; ++s) net.add_arc(1 + nt + s, sink, 1);

  net.max_flow(source, sink);
  const auto side = net.source_side(source);
  SurplusResult out;
  for (std::size_t t = 0; t < nt; ++t) {
    if (side[1 + t]) out.buyers.push_back(t);
  }
  out.surplus = surplus(g, out.buyers);
  return out;
}

}  // namespace

int surplus(const BipartiteGraph& g, const BuyerSet& y) {
  std::vector<bool> mask(g.num_buyers(), false);
  int demand = 0;
  for (std::size_t t : y) {
    mask[t] = true;
    demand += g.capacity(t);
  }
  const auto nbr = g.neighborhood(mask);
  return static_cast<int>(std::count(nbr.begin(), nbr.end(), true)) - demand;
}

bool feasible_bundle(const BipartiteGraph& gpi, std::size_t buyer,
                     const std::vector<std::size_t>& bundle) {
  if (buyer >= gpi.num_buyers()) throw ContractViolation("feasible_bundle: unknown buyer");
  if (static_cast<int>(bundle.size()) != gpi.capacity(buyer)) {
    throw ContractViolation("feasible_bundle: bundle size differs from demand");
  }
  std::vector<bool> keep_items(gpi.num_items(), true);
  for (std::size_t s : bundle) {
    if (s >= gpi.num_items() || !keep_items[s] || !gpi.find_edge(s, buyer)) {
      throw ContractViolation("feasible_bundle: bundle is not within the buyer's tight neighborhood");
    }
    keep_items[s] = false;
  }
  std::vector<bool> keep_buyers(gpi.num_buyers(), true);
  keep_buyers[buyer] = false;
  return has_bfactor(gpi.induced(keep_items, keep_buyers));
}

std::optional<SurplusResult> min_surplus_set(const BipartiteGraph& gpi, const SurplusQuery& q) {
  const std::size_t nt = gpi.num_buyers();
  std::vector<char> include(nt, 0);
  std::vector<char> exclude(nt, 0);
  for (std::size_t t : q.must_include) include.at(t) = 1;
  for (std::size_t t : q.must_exclude) exclude.at(t) = 1;

  // Nonempty: if nothing is forced in, probe each buyer as the forced member.
  // Proper: if nothing is forced out, probe each buyer as the forced outsider.
  std::vector<std::size_t> in_probes;
  std::vector<std::size_t> out_probes;
  const bool any_in = std::find(include.begin(), include.end(), 1) != include.end();
  const bool any_out = std::find(exclude.begin(), exclude.end(), 1) != exclude.end();
  for (std::size_t t = 0; t < nt; ++t) {
    if (!any_in && !exclude[t]) in_probes.push_back(t);
    if (!any_out && !include[t]) out_probes.push_back(t);
  }
  if (any_in) in_probes = {SIZE_MAX};
  if (any_out) out_probes = {SIZE_MAX};

  std::optional<SurplusResult> best;
  for (std::size_t i : in_probes) {
    for (std::size_t o : out_probes) {
      if (i != SIZE_MAX && i == o) continue;
      auto inc = include;
      auto exc = exclude;
      if (i != SIZE_MAX) inc[i] = 1;
      if (o != SIZE_MAX) exc[o] = 1;
      auto r = min_surplus_unrestricted(gpi, inc, exc);
      if (!r || r->buyers.empty() || r->buyers.size() == nt) continue;
      if (!best || r->surplus < best->surplus) best = std::move(r);
    }
  }
  return best;
}

std::optional<BuyerSet> maximal_dangerous_set(const BipartiteGraph& gpi) {
  auto first = min_surplus_set(gpi, {});
  if (!first) return std::nullopt;
  if (first->surplus <= 0) {
    throw ContractViolation("maximal_dangerous_set: a proper buyer set has surplus <= 0");
  }
  if (first->surplus >= 2) return std::nullopt;

  BuyerSet z = first->buyers;
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t u = 0; u < gpi.num_buyers(); ++u) {
      if (std::binary_search(z.begin(), z.end(), u)) continue;
      SurplusQuery q;
      q.must_include = z;
      q.must_include.push_back(u);
      auto r = min_surplus_set(gpi, q);
      if (r && r->surplus == 1) {
        z = r->buyers;
        grew = true;
      }
    }
  }
  return z;
}

std::optional<BuyerSet> minimal_dangerous_disjoint(const BipartiteGraph& gpi, const BuyerSet& avoid) {
  SurplusQuery q;
  q.must_exclude = avoid;
  auto first = min_surplus_set(gpi, q);
  if (!first || first->surplus != 1) return std::nullopt;

  BuyerSet x = first->buyers;
  bool shrank = true;
  while (shrank && x.size() > 1) {
    shrank = false;
    for (std::size_t drop : x) {
      SurplusQuery probe;
      for (std::size_t t = 0; t < gpi.num_buyers(); ++t) {
        if (t == drop || !std::binary_search(x.begin(), x.end(), t)) probe.must_exclude.push_back(t);
      }
      auto r = min_surplus_set(gpi, probe);
      if (r && r->surplus == 1) {
        x = r->buyers;
        shrank = true;
        break;
      }
    }
  }
  return x;
}

LegalClasses legal_classes_3(const BipartiteGraph& gpi) {
  if (gpi.num_buyers() != 3) throw ContractViolation("legal_classes_3 needs exactly three buyers");
  std::vector<unsigned> mask(gpi.num_items(), 0);
  for (const auto& e : gpi.edges()) mask[e.item] |= 1u << e.buyer;
  LegalClasses out;
  for (std::size_t s = 0; s < gpi.num_items(); ++s) out[mask[s]].push_back(s);
  return out;
}

}  // namespace dynprice
