#include "dynprice/orderings.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "dynprice/errors.hpp"
#include "dynprice/structured_dual.hpp"

namespace dynprice {

Ordering::Ordering(std::vector<std::size_t> sequence, std::size_t num_items)
    : sequence_(std::move(sequence)), rank_(num_items, 0) {
  if (sequence_.size() != num_items) throw ContractViolation("ordering does not cover every item");
  for (std::size_t r = 0; r < sequence_.size(); ++r) {
    const std::size_t s = sequence_[r];
    if (s >= num_items || rank_[s] != 0) throw ContractViolation("ordering is not a bijection");
    rank_[s] = r + 1;
  }
}

Ordering Ordering::identity(std::size_t num_items) {
  std::vector<std::size_t> seq(num_items);
  std::iota(seq.begin(), seq.end(), std::size_t{0});
  return Ordering(std::move(seq), num_items);
}

Ordering Ordering::reversed() const {
  return Ordering(std::vector<std::size_t>(sequence_.rbegin(), sequence_.rend()), sequence_.size());
}

std::vector<std::size_t> Ordering::first_neighbors(const BipartiteGraph& g, std::size_t buyer,
                                                   int count) const {
  auto nbr = g.neighbors(buyer);
  std::sort(nbr.begin(), nbr.end(), [&](std::size_t a, std::size_t b) { return rank_[a] < rank_[b]; });
  if (static_cast<int>(nbr.size()) > count) nbr.resize(static_cast<std::size_t>(count));
  return nbr;
}

Ordering combine(const Covering& pi, const Ordering& sigma) {
  if (pi.item.size() != sigma.size()) throw ContractViolation("combine: covering and ordering disagree on items");
  auto seq = sigma.sequence();
  std::stable_sort(seq.begin(), seq.end(),
                   [&](std::size_t a, std::size_t b) { return pi.item[a] < pi.item[b]; });
  return Ordering(std::move(seq), sigma.size());
}

bool verify_adequate(const BipartiteGraph& gpi, const Ordering& sigma) {
  if (sigma.size() != gpi.num_items()) return false;
  for (std::size_t t = 0; t < gpi.num_buyers(); ++t) {
    const auto first = sigma.first_neighbors(gpi, t, gpi.capacity(t));
    if (static_cast<int>(first.size()) < gpi.capacity(t)) return false;
    if (!feasible_bundle(gpi, t, first)) return false;
  }
  return true;
}

namespace {

std::vector<std::size_t> indices_of(const std::vector<bool>& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

// Appends a subgraph's ordering, translated back through the kept-item list.
void append_mapped(std::vector<std::size_t>& seq, const Ordering& sub,
                   const std::vector<std::size_t>& kept_items) {
  for (std::size_t s : sub.sequence()) seq.push_back(kept_items[s]);
}

void require_factor(const BipartiteGraph& g, const char* who) {
  if (!has_bfactor(g)) throw ContractViolation(std::string(who) + ": graph has no b-factor");
}

}  // namespace

Ordering adequate_two_buyers(const BipartiteGraph& gpi) {
  if (gpi.num_buyers() != 2) throw ContractViolation("adequate_two_buyers needs exactly two buyers");
  require_factor(gpi, "adequate_two_buyers");
  std::vector<unsigned> mask(gpi.num_items(), 0);
  for (const auto& e : gpi.edges()) mask[e.item] |= 1u << e.buyer;
  std::vector<std::size_t> seq;
  for (std::size_t s = 0; s < gpi.num_items(); ++s) {
    if (mask[s] != 3) seq.push_back(s);
  }
  for (std::size_t s = 0; s < gpi.num_items(); ++s) {
    if (mask[s] == 3) seq.push_back(s);
  }
  return Ordering(std::move(seq), gpi.num_items());
}

Labeling3 label_three_buyers(const BipartiteGraph& gpi) {
  const auto classes = legal_classes_3(gpi);
  if (!classes[0].empty() || !classes[1].empty() || !classes[2].empty() || !classes[4].empty()) {
    throw ContractViolation("label_three_buyers: some item is legal for fewer than two buyers");
  }
  Labeling3 out;
  out.theta.assign(gpi.num_items(), 0);
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gpi.capacity(a) > gpi.capacity(b); });
  out.buyer_order = order;
  for (int i = 0; i < 3; ++i) out.reduced_demand[i] = gpi.capacity(order[i]);
  const auto& b = out.reduced_demand;

  std::size_t total = 0;
  for (unsigned m : {3u, 5u, 6u, 7u}) total += classes[m].size();
  if (static_cast<int>(total) != b[0] + b[1] + b[2]) {
    throw ContractViolation("label_three_buyers: item count differs from total demand");
  }
  for (std::size_t s : classes[7]) out.theta[s] = 5;

  // Pair (i, j) with i before j in demand order; the middle label is 3 for
  // the two largest buyers and 2 otherwise.
  auto label_pair = [&](int i, int j, int middle) {
    const unsigned m = (1u << order[i]) | (1u << order[j]);
    const auto& items = classes[m];
    if (static_cast<int>(items.size()) > b[i] + b[j]) {
      throw ContractViolation("label_three_buyers: a pairwise class exceeds the pair's demand");
    }
    std::size_t k = 0;
    for (int c = 0; c < b[j] && k < items.size(); ++c) out.theta[items[k++]] = 4;
    for (int c = 0; c < b[i] - b[j] && k < items.size(); ++c) out.theta[items[k++]] = middle;
    while (k < items.size()) out.theta[items[k++]] = 1;
  };
  label_pair(0, 1, 3);
  label_pair(0, 2, 2);
  label_pair(1, 2, 2);
  return out;
}

Ordering adequate_three_buyers(const BipartiteGraph& gpi) {
  if (gpi.num_buyers() > 3) throw ContractViolation("adequate_three_buyers needs at most three buyers");
  require_factor(gpi, "adequate_three_buyers");
  if (gpi.num_buyers() <= 1) return Ordering::identity(gpi.num_items());
  if (gpi.num_buyers() == 2) return adequate_two_buyers(gpi);

  // Items legal for exactly one buyer go first and reduce that buyer's demand.
  std::vector<unsigned> mask(gpi.num_items(), 0);
  for (const auto& e : gpi.edges()) mask[e.item] |= 1u << e.buyer;
  std::vector<std::size_t> seq;
  std::vector<bool> keep_items(gpi.num_items(), true);
  std::array<int, 3> reduced{gpi.capacity(0), gpi.capacity(1), gpi.capacity(2)};
  for (std::size_t s = 0; s < gpi.num_items(); ++s) {
    if (std::popcount(mask[s]) == 1) {
      seq.push_back(s);
      keep_items[s] = false;
      --reduced[std::countr_zero(mask[s])];
    }
  }
  if (seq.empty()) {
    const auto labels = label_three_buyers(gpi);
    std::vector<std::size_t> order(gpi.num_items());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return labels.theta[a] < labels.theta[b];
    });
    return Ordering(std::move(order), gpi.num_items());
  }

  std::vector<bool> keep_buyers(3, true);
  for (std::size_t t = 0; t < 3; ++t) {
    if (reduced[t] < 0) throw InternalError("adequate_three_buyers: negative reduced demand");
    if (reduced[t] == 0) keep_buyers[t] = false;
  }
  auto sub = gpi.induced(keep_items, keep_buyers);
  std::size_t k = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    if (keep_buyers[t]) sub = sub.with_capacity(k++, reduced[t]);
  }
  append_mapped(seq, adequate_three_buyers(sub), indices_of(keep_items));
  return Ordering(std::move(seq), gpi.num_items());
}

namespace {

class BidemandBuilder {
 public:
  explicit BidemandBuilder(std::vector<CaseTraceEntry>* trace) : trace_(trace) {}

  // Prune to edges tight under a structured unit-weight
  // covering, order that graph, then combine with the covering.
  Ordering order(const BipartiteGraph& h, int depth) {
    if (!has_bfactor(h)) throw InternalError("adequate_bidemand: subproblem lost its b-factor");
    if (h.num_items() == 0) return Ordering();
    const auto unit = h.with_unit_weights();
    const auto sc = refine_covering(unit);
    const auto core = core_order(tight_subgraph(sc, unit), depth);
    return combine(sc.pi, core);
  }

 private:
  std::vector<std::string> names(const BipartiteGraph& g, const BuyerSet& ys) const {
    std::vector<std::string> out;
    for (std::size_t t : ys) out.push_back(g.buyers()[t]);
    return out;
  }

  CaseTraceEntry& record(const BipartiteGraph& g, int depth, std::string branch) {
    if (!trace_) return scratch_ = {};
    CaseTraceEntry entry;
    entry.depth = depth;
    entry.branch = std::move(branch);
    entry.buyers = g.buyers();
    trace_->push_back(std::move(entry));
    return trace_->back();
  }

  static std::vector<bool> buyer_mask(const BipartiteGraph& g, const BuyerSet& ys) {
    std::vector<bool> m(g.num_buyers(), false);
    for (std::size_t t : ys) m[t] = true;
    return m;
  }

  // Lowest-index item of `items` adjacent to a buyer outside `group`.
  static std::size_t shared_item(const BipartiteGraph& g, const std::vector<bool>& items,
                                 const std::vector<bool>& group) {
    for (std::size_t s = 0; s < g.num_items(); ++s) {
      if (!items[s]) continue;
      for (std::size_t e : g.item_edges(s)) {
        if (!group[g.edges()[e].buyer]) return s;
      }
    }
    throw InternalError("adequate_bidemand: no item links the dangerous set to the rest");
  }

  // First infeasible b(t)-subset for a buyer of X, as (buyer, items).
  static std::optional<std::vector<std::size_t>> infeasible_bundle(const BipartiteGraph& g,
                                                                   const BuyerSet& xs) {
    for (std::size_t t : xs) {
      const auto nbr = g.neighbors(t);
      const int b = g.capacity(t);
      if (b == 1) {
        for (std::size_t s : nbr) {
          if (!feasible_bundle(g, t, {s})) return std::vector<std::size_t>{s};
        }
        continue;
      }
      for (std::size_t i = 0; i < nbr.size(); ++i) {
        for (std::size_t j = i + 1; j < nbr.size(); ++j) {
          if (!feasible_bundle(g, t, {nbr[i], nbr[j]})) return std::vector<std::size_t>{nbr[i], nbr[j]};
        }
      }
    }
    return std::nullopt;
  }

  Ordering core_order(const BipartiteGraph& g, int depth) {
    const std::size_t ns = g.num_items();
    if (g.num_buyers() <= 1) {
      record(g, depth, "single");
      return Ordering::identity(ns);
    }
    const auto best = min_surplus_set(g, {});
    if (!best || best->surplus >= 2) {
      record(g, depth, "case1");
      return Ordering::identity(ns);
    }

    std::vector<std::size_t> seq;
    if (best->surplus <= 0) {
      // Disconnected: a component T' with |N(T')| = b(T').
      record(g, depth, "case3").z = names(g, best->buyers);
      const auto in_part = buyer_mask(g, best->buyers);
      const auto part_items = g.neighborhood(in_part);
      std::vector<bool> rest_buyers(in_part.size());
      std::vector<bool> rest_items(part_items.size());
      for (std::size_t t = 0; t < in_part.size(); ++t) rest_buyers[t] = !in_part[t];
      for (std::size_t s = 0; s < ns; ++s) rest_items[s] = !part_items[s];
      append_mapped(seq, order(g.induced(part_items, in_part), depth + 1), indices_of(part_items));
      append_mapped(seq, order(g.induced(rest_items, rest_buyers), depth + 1), indices_of(rest_items));
      return Ordering(std::move(seq), ns);
    }

    const auto z = maximal_dangerous_set(g);
    if (!z) throw InternalError("adequate_bidemand: surplus-one set found but no dangerous set");
    const auto in_z = buyer_mask(g, *z);
    const auto nz = g.neighborhood(in_z);
    const auto x = minimal_dangerous_disjoint(g, *z);

    if (!x) {
      const std::size_t s0 = shared_item(g, nz, in_z);
      auto& entry = record(g, depth, "case2.1");
      entry.z = names(g, *z);
      entry.pivot_items = {g.items()[s0]};
      for (std::size_t s = 0; s < ns; ++s) {
        if (!nz[s]) seq.push_back(s);
      }
      auto inner_items = nz;
      inner_items[s0] = false;
      append_mapped(seq, order(g.induced(inner_items, in_z), depth + 1), indices_of(inner_items));
      seq.push_back(s0);
      return Ordering(std::move(seq), ns);
    }

    const auto in_x = buyer_mask(g, *x);
    const auto nx = g.neighborhood(in_x);
    std::vector<bool> outside_x(g.num_buyers());
    for (std::size_t t = 0; t < outside_x.size(); ++t) outside_x[t] = !in_x[t];
    const auto bad = infeasible_bundle(g, *x);

    if (!bad) {
      const std::size_t s0 = shared_item(g, nx, in_x);
      auto& entry = record(g, depth, "case2.2.1");
      entry.z = names(g, *z);
      entry.x = names(g, *x);
      entry.pivot_items = {g.items()[s0]};
      std::vector<bool> keep_items(ns, true);
      for (std::size_t s = 0; s < ns; ++s) keep_items[s] = !nx[s] || s == s0;
      append_mapped(seq, order(g.induced(keep_items, outside_x), depth + 1), indices_of(keep_items));
      for (std::size_t s = 0; s < ns; ++s) {
        if (nx[s] && s != s0) seq.push_back(s);
      }
      return Ordering(std::move(seq), ns);
    }

    if (bad->size() != 2) throw InternalError("adequate_bidemand: unit-demand buyer with infeasible item");
    const std::size_t s1 = std::min((*bad)[0], (*bad)[1]);
    const std::size_t s2 = std::max((*bad)[0], (*bad)[1]);
    auto& entry = record(g, depth, "case2.2.2");
    entry.z = names(g, *z);
    entry.x = names(g, *x);
    entry.pivot_items = {g.items()[s1], g.items()[s2]};
    // X and Z cover all buyers and share exactly the blocked pair.
    for (std::size_t t = 0; t < g.num_buyers(); ++t) {
      if (in_x[t] == in_z[t]) throw InternalError("adequate_bidemand: X and Z do not partition the buyers");
    }
    for (std::size_t s = 0; s < ns; ++s) {
      const bool shared = nx[s] && nz[s];
      if (shared != (s == s1 || s == s2)) {
        throw InternalError("adequate_bidemand: N(X) and N(Z) do not meet in the blocked pair");
      }
    }
    std::vector<bool> keep_items(ns, true);
    for (std::size_t s = 0; s < ns; ++s) keep_items[s] = !nx[s] || s == s1;
    append_mapped(seq, order(g.induced(keep_items, outside_x), depth + 1), indices_of(keep_items));
    for (std::size_t s = 0; s < ns; ++s) {
      if (nx[s] && s != s1 && s != s2) seq.push_back(s);
    }
    seq.push_back(s2);
    return Ordering(std::move(seq), ns);
  }

  std::vector<CaseTraceEntry>* trace_;
  CaseTraceEntry scratch_;
};

}  // namespace

Ordering adequate_bidemand(const BipartiteGraph& h, std::vector<CaseTraceEntry>* trace) {
  for (std::size_t t = 0; t < h.num_buyers(); ++t) {
    if (h.capacity(t) < 1 || h.capacity(t) > 2) {
      throw ContractViolation("adequate_bidemand: every demand must be one or two");
    }
  }
  require_factor(h, "adequate_bidemand");
  return BidemandBuilder(trace).order(h, 0);
}

}  // namespace dynprice
