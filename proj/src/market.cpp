#include "dynprice/market.hpp"

#include "dynprice/errors.hpp"
#include "dynprice/matching.hpp"

namespace dynprice {

Market::Market(std::vector<ItemId> items, std::vector<Buyer> buyers)
    : items_(std::move(items)), buyers_(std::move(buyers)) {
  for (std::size_t s = 0; s < items_.size(); ++s) {
    if (!item_pos_.emplace(items_[s], s).second) {
      throw ModelError("duplicate item id '" + items_[s] + "'");
    }
  }
  for (std::size_t t = 0; t < buyers_.size(); ++t) {
    const auto& b = buyers_[t];
    if (!buyer_pos_.emplace(b.id, t).second) {
      throw ModelError("duplicate buyer id '" + b.id + "'");
    }
    if (item_pos_.contains(b.id)) {
      throw ModelError("id '" + b.id + "' names both an item and a buyer");
    }
    if (b.demand < 1) throw ModelError("buyer '" + b.id + "' has demand < 1");
    if (b.values.size() != items_.size()) {
      throw ModelError("buyer '" + b.id + "' does not value every item");
    }
    for (std::size_t s = 0; s < items_.size(); ++s) {
      if (b.values[s].sign() < 0) {
        throw ModelError("negative value for buyer '" + b.id + "' on item '" + items_[s] + "'");
      }
    }
  }
}

std::size_t Market::item_index(const ItemId& id) const {
  auto it = item_pos_.find(id);
  if (it == item_pos_.end()) throw ModelError("unknown item '" + id + "'");
  return it->second;
}

std::size_t Market::buyer_index(const BuyerId& id) const {
  auto it = buyer_pos_.find(id);
  if (it == buyer_pos_.end()) throw ModelError("unknown buyer '" + id + "'");
  return it->second;
}

const Rational& Market::value(const BuyerId& buyer, const ItemId& item) const {
  return value(buyer_index(buyer), item_index(item));
}

int Market::total_demand() const {
  int sum = 0;
  for (const auto& b : buyers_) sum += b.demand;
  return sum;
}

Rational Market::max_value() const {
  Rational best;
  for (const auto& b : buyers_) {
    for (const auto& v : b.values) best = max(best, v);
  }
  return best;
}

const std::set<ItemId>& Allocation::of(const BuyerId& t) const {
  static const std::set<ItemId> kEmpty;
  auto it = bundle.find(t);
  return it == bundle.end() ? kEmpty : it->second;
}

std::size_t Allocation::num_items() const {
  std::size_t n = 0;
  for (const auto& [t, items] : bundle) n += items.size();
  return n;
}

Rational welfare(const Market& m, const Allocation& a) {
  Rational sum;
  std::set<ItemId> used;
  for (const auto& [buyer, items] : a.bundle) {
    const std::size_t t = m.buyer_index(buyer);
    if (static_cast<int>(items.size()) > m.buyers()[t].demand) {
      throw ModelError("bundle of '" + buyer + "' exceeds its demand");
    }
    for (const auto& item : items) {
      if (!used.insert(item).second) throw ModelError("item '" + item + "' allocated twice");
      sum += m.value(t, m.item_index(item));
    }
  }
  return sum;
}

namespace {

Allocation to_allocation(const BipartiteGraph& g, const BMatching& mt) {
  Allocation a;
  for (std::size_t e : mt.edges) {
    const auto& edge = g.edges()[e];
    a.bundle[g.buyers()[edge.buyer]].insert(g.items()[edge.item]);
  }
  return a;
}

}  // namespace

OptReport check_opt_property(const Market& m) {
  const auto g = BipartiteGraph::from_market(m);
  OptReport report;
  report.opt_welfare = solve_bmatching(g).weight;
  for (std::size_t t = 0; t < g.num_buyers(); ++t) {
    const auto reduced = g.with_capacity(t, g.capacity(t) - 1);
    const auto sol = solve_bmatching(reduced);
    if (sol.weight < report.opt_welfare) continue;
    report.opt_property_holds = false;
    report.witness = OptWitness{g.buyers()[t], to_allocation(reduced, sol.matching)};
    break;
  }
  return report;
}

Market keep_items(const Market& m, const std::set<ItemId>& keep) {
  std::vector<ItemId> items;
  std::vector<std::size_t> idx;
  for (std::size_t s = 0; s < m.num_items(); ++s) {
    if (keep.contains(m.items()[s])) {
      items.push_back(m.items()[s]);
      idx.push_back(s);
    }
  }
  std::vector<Buyer> buyers;
  for (const auto& b : m.buyers()) {
    Buyer nb{b.id, b.demand, {}};
    for (std::size_t s : idx) nb.values.push_back(b.values[s]);
    buyers.push_back(std::move(nb));
  }
  return Market(std::move(items), std::move(buyers));
}

TrimResult trim_items(const Market& m) {
  const auto g = BipartiteGraph::from_market(m);
  const auto mt = max_weight_min_cardinality(g);
  std::set<ItemId> used;
  for (std::size_t e : mt.edges) used.insert(g.items()[g.edges()[e].item]);
  TrimResult out{keep_items(m, used), {}};
  for (const auto& s : m.items()) {
    if (!used.contains(s)) out.removed.insert(s);
  }
  return out;
}

Market restrict_market(const Market& m, const BuyerId& departed, const std::set<ItemId>& sold) {
  const std::size_t gone = m.buyer_index(departed);
  for (const auto& s : sold) m.item_index(s);
  std::set<ItemId> keep;
  for (const auto& s : m.items()) {
    if (!sold.contains(s)) keep.insert(s);
  }
  const Market kept = keep_items(m, keep);
  std::vector<Buyer> buyers;
  for (std::size_t t = 0; t < kept.num_buyers(); ++t) {
    if (t != gone) buyers.push_back(kept.buyers()[t]);
  }
  return Market(kept.items(), std::move(buyers));
}

}  // namespace dynprice
