#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynprice/rational.hpp"

namespace dynprice {

using ItemId = std::string;
using BuyerId = std::string;

struct Buyer {
  BuyerId id;
  int demand = 1;
  // One entry per market item, aligned with Market::items().
  std::vector<Rational> values;
};

// Multi-demand market on a complete bipartite valuation: every buyer has a
// value (possibly zero) for every item. Immutable after construction.
class Market {
 public:
  Market() = default;
  // Throws ModelError on duplicate ids, demand < 1, negative values, or a
  // value vector whose length differs from the item count.
  Market(std::vector<ItemId> items, std::vector<Buyer> buyers);

  const std::vector<ItemId>& items() const { return items_; }
  const std::vector<Buyer>& buyers() const { return buyers_; }
  std::size_t num_items() const { return items_.size(); }
  std::size_t num_buyers() const { return buyers_.size(); }

  // Throw ModelError for unknown ids.
  std::size_t item_index(const ItemId& id) const;
  std::size_t buyer_index(const BuyerId& id) const;
  bool has_item(const ItemId& id) const { return item_pos_.contains(id); }
  bool has_buyer(const BuyerId& id) const { return buyer_pos_.contains(id); }

  const Rational& value(std::size_t buyer, std::size_t item) const {
    return buyers_[buyer].values[item];
  }
  const Rational& value(const BuyerId& buyer, const ItemId& item) const;
  int demand(const BuyerId& buyer) const { return buyers_[buyer_index(buyer)].demand; }
  int total_demand() const;
  Rational max_value() const;

  friend bool operator==(const Market& a, const Market& b) {
    if (a.items_ != b.items_ || a.buyers_.size() != b.buyers_.size()) return false;
    for (std::size_t i = 0; i < a.buyers_.size(); ++i) {
      const auto& x = a.buyers_[i];
      const auto& y = b.buyers_[i];
      if (x.id != y.id || x.demand != y.demand || x.values != y.values) return false;
    }
    return true;
  }

 private:
  std::vector<ItemId> items_;
  std::vector<Buyer> buyers_;
  std::unordered_map<ItemId, std::size_t> item_pos_;
  std::unordered_map<BuyerId, std::size_t> buyer_pos_;
};

// Buyers absent from the map hold the empty bundle.
struct Allocation {
  std::map<BuyerId, std::set<ItemId>> bundle;

  const std::set<ItemId>& of(const BuyerId& t) const;
  std::size_t num_items() const;
  friend bool operator==(const Allocation&, const Allocation&) = default;
  friend auto operator<=>(const Allocation&, const Allocation&) = default;
};

struct OptWitness {
  BuyerId buyer;
  Allocation allocation;
};

struct OptReport {
  Rational opt_welfare;
  bool opt_property_holds = true;
  std::optional<OptWitness> witness;
};

// Sum of values of allocated items. Throws ModelError on unknown ids,
// overlapping bundles or a bundle larger than the buyer's demand.
Rational welfare(const Market& m, const Allocation& a);

// (OPT): every buyer receives exactly its demand in every maximum-welfare
// allocation. Decided per buyer by comparing the optimum against the optimum
// with that buyer's demand lowered by one.
OptReport check_opt_property(const Market& m);

struct TrimResult {
  Market market;
  std::set<ItemId> removed;
};

// Restricts the market to the items of a maximum-welfare allocation that uses
// as few items as possible (weight first, then item count). Every optimal
// allocation of the result uses every remaining item.
TrimResult trim_items(const Market& m);

// Removes one departed buyer and the items it bought.
Market restrict_market(const Market& m, const BuyerId& departed, const std::set<ItemId>& sold);

// Keeps the listed items (in market order); all buyers stay.
Market keep_items(const Market& m, const std::set<ItemId>& keep);

}  // namespace dynprice
