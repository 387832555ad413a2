#include "dynprice/simulation.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <utility>

#include "dynprice/errors.hpp"
#include "dynprice/matching.hpp"

namespace dynprice {

namespace {

// Calls `emit` with every k-subset of `pool` (as positions into pool).
void for_each_combination(std::size_t n, std::size_t k,
                          const std::function<void(const std::vector<std::size_t>&)>& emit) {
  if (k > n) return;
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    emit(pick);
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
}

Rational bundle_value(const Market& m, const BuyerId& t, const Bundle& x) {
  Rational v;
  for (const auto& s : x) v += m.value(t, s);
  return v;
}

Rational bundle_price(const PriceVector& p, const Bundle& x) {
  Rational v;
  for (const auto& s : x) v += p.at(s);
  return v;
}

Rational market_optimum(const Market& m) {
  return max_weight_bmatching(BipartiteGraph::from_market(m)).weight;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

RunStep make_step(const Market& m, const BuyerId& t, const PriceVector& p, Bundle x, std::size_t choices) {
  RunStep step;
  step.buyer = t;
  step.prices = p;
  step.paid = bundle_price(p, x);
  step.value = bundle_value(m, t, x);
  step.bundle = std::move(x);
  step.choices = choices;
  return step;
}

void check_unique(const SimulationOptions& opts, const BuyerId& t, std::size_t choices) {
  if (opts.mode == PricingMode::kMulti && choices != 1) {
    throw InternalError("buyer '" + t + "' has " + std::to_string(choices) +
                        " utility-maximizing bundles under multi-demand prices");
  }
}

// Exhaustive search over residual states (remaining buyers, remaining items)
// of the original market, both as bit masks.
class Explorer {
 public:
  Explorer(const Market& m, const SimulationOptions& opts) : m_(m), opts_(opts) {
    if (m.num_items() > 64 || m.num_buyers() > 64) {
      throw ContractViolation("run_exhaustive supports at most 64 items and 64 buyers");
    }
  }

  struct Choice {
    std::size_t buyer;
    std::uint64_t items;
  };

  struct Node {
    Rational min_future;
    std::uint64_t runs = 0;
    std::optional<PriceVector> prices;
    std::optional<std::string> halted;
    std::vector<std::size_t> choices_per_buyer;  // by buyer index
    std::optional<Choice> worst;
  };

  struct BudgetExceeded {};

  const Node& visit(std::uint64_t buyers, std::uint64_t items, bool root = false) {
    const auto key = std::make_pair(buyers, items);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    Node node;
    if (buyers == 0) {
      node.runs = 1;
      return memo_.emplace(key, std::move(node)).first->second;
    }
    if (++priced_ > opts_.budget) throw BudgetExceeded{};
    const Market sub = submarket(buyers, items);
    try {
      node.prices = price_round(sub, opts_.mode, opts_.pricing);
    } catch (const UnsupportedMarket& e) {
      if (root) throw;
      node.halted = e.what();
      node.runs = 1;
      return memo_.emplace(key, std::move(node)).first->second;
    }

    node.choices_per_buyer.assign(m_.num_buyers(), 0);
    bool first = true;
    for (std::size_t t = 0; t < m_.num_buyers(); ++t) {
      if (!(buyers >> t & 1)) continue;
      const auto& id = m_.buyers()[t].id;
      const auto options = best_bundles(sub, id, *node.prices);
      check_unique(opts_, id, options.size());
      node.choices_per_buyer[t] = options.size();
      for (const auto& x : options) {
        const std::uint64_t taken = mask_of(x);
        const Rational v = bundle_value(sub, id, x);
        path_.push_back({t, taken});
        const Node& next = visit(buyers & ~(std::uint64_t{1} << t), items & ~taken);
        path_.pop_back();
        const Rational total = v + next.min_future;
        if (first || total < node.min_future) {
          node.min_future = total;
          node.worst = Choice{t, taken};
          first = false;
        }
        node.runs = saturating_add(node.runs, next.runs);
        note_counterexample(buyers, items, t, taken, v, next);
      }
    }
    return memo_.emplace(key, std::move(node)).first->second;
  }

  // Follows worst choices from the given path prefix down to a leaf.
  RunTrace build_trace(const std::vector<Choice>& prefix) const {
    RunTrace trace;
    std::uint64_t buyers = all_bits(m_.num_buyers());
    std::uint64_t items = all_bits(m_.num_items());
    std::size_t depth = 0;
    while (buyers != 0) {
      const Choice c = depth < prefix.size() ? prefix[depth] : memo_.at({buyers, items}).worst.value();
      ++depth;
      const auto& id = m_.buyers()[c.buyer].id;
      // States on an unfinished branch are not memoized yet; price them again.
      PriceVector prices;
      std::size_t choices = 0;
      if (auto it = memo_.find({buyers, items}); it != memo_.end()) {
        if (it->second.halted) {
          trace.halted = *it->second.halted;
          break;
        }
        prices = *it->second.prices;
        choices = it->second.choices_per_buyer[c.buyer];
      } else {
        const Market sub = submarket(buyers, items);
        prices = price_round(sub, opts_.mode, opts_.pricing);
        choices = best_bundles(sub, id, prices).size();
      }
      trace.order.push_back(id);
      trace.steps.push_back(make_step(m_, id, prices, bundle_of(c.items), choices));
      trace.final_welfare += trace.steps.back().value;
      buyers &= ~(std::uint64_t{1} << c.buyer);
      items &= ~c.items;
    }
    for (std::size_t t = 0; t < m_.num_buyers(); ++t) {
      if (buyers >> t & 1) trace.order.push_back(m_.buyers()[t].id);
    }
    trace.leftover_items = bundle_of(items);
    return trace;
  }

  void set_optimum(const Rational& opt) { optimum_ = opt; }
  const std::optional<std::vector<Choice>>& early_counterexample() const { return early_; }
  std::uint64_t all_bits(std::size_t n) const {
    return n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  }

 private:
  // Records the first branch whose best completion already falls short of
  // the optimum, so a partial verdict can still show it.
  void note_counterexample(std::uint64_t buyers, std::uint64_t items, std::size_t t, std::uint64_t taken,
                           const Rational& v, const Node& next) {
    if (early_) return;
    Rational prefix_value;
    std::uint64_t b = all_bits(m_.num_buyers());
    std::uint64_t i = all_bits(m_.num_items());
    for (const auto& c : path_) {
      prefix_value += bundle_value(m_, m_.buyers()[c.buyer].id, bundle_of(c.items));
      b &= ~(std::uint64_t{1} << c.buyer);
      i &= ~c.items;
    }
    if (b != buyers || i != items) throw InternalError("run_exhaustive: path bookkeeping out of sync");
    if (prefix_value + v + next.min_future < optimum_) {
      early_ = path_;
      early_->push_back({t, taken});
    }
  }

  Market submarket(std::uint64_t buyers, std::uint64_t items) const {
    std::vector<ItemId> keep_items;
    std::vector<std::size_t> item_pos;
    for (std::size_t s = 0; s < m_.num_items(); ++s) {
      if (items >> s & 1) {
        keep_items.push_back(m_.items()[s]);
        item_pos.push_back(s);
      }
    }
    std::vector<Buyer> keep_buyers;
    for (std::size_t t = 0; t < m_.num_buyers(); ++t) {
      if (!(buyers >> t & 1)) continue;
      Buyer b{m_.buyers()[t].id, m_.buyers()[t].demand, {}};
      for (std::size_t s : item_pos) b.values.push_back(m_.value(t, s));
      keep_buyers.push_back(std::move(b));
    }
    return Market(std::move(keep_items), std::move(keep_buyers));
  }

  std::uint64_t mask_of(const Bundle& x) const {
    std::uint64_t mask = 0;
    for (const auto& s : x) mask |= std::uint64_t{1} << m_.item_index(s);
    return mask;
  }

  Bundle bundle_of(std::uint64_t mask) const {
    Bundle x;
    for (std::size_t s = 0; s < m_.num_items(); ++s) {
      if (mask >> s & 1) x.insert(m_.items()[s]);
    }
    return x;
  }

  const Market& m_;
  const SimulationOptions& opts_;
  Rational optimum_;
  std::uint64_t priced_ = 0;
  std::map<std::pair<std::uint64_t, std::uint64_t>, Node> memo_;
  std::vector<Choice> path_;
  std::optional<std::vector<Choice>> early_;
};

}  // namespace

std::vector<Bundle> best_bundles(const Market& m, const BuyerId& t, const PriceVector& p) {
  const std::size_t ti = m.buyer_index(t);
  const auto b = static_cast<std::size_t>(m.buyers()[ti].demand);
  std::vector<std::pair<Rational, std::size_t>> util;
  for (std::size_t s = 0; s < m.num_items(); ++s) util.emplace_back(m.value(ti, s) - p.at(m.items()[s]), s);
  std::sort(util.begin(), util.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });

  std::size_t positive = 0;
  while (positive < util.size() && util[positive].first.sign() > 0) ++positive;

  // Items every best bundle contains, the pool the rest is drawn from, and
  // how many pool items a bundle may take.
  std::vector<std::size_t> must;
  std::vector<std::size_t> pool;
  std::size_t lo = 0;
  std::size_t hi = 0;
  if (positive >= b) {
    const Rational& threshold = util[b - 1].first;
    for (const auto& [u, s] : util) {
      if (u > threshold) must.push_back(s);
      else if (u == threshold) pool.push_back(s);
    }
    lo = hi = b - must.size();
  } else {
    for (std::size_t k = 0; k < positive; ++k) must.push_back(util[k].second);
    for (std::size_t k = positive; k < util.size() && util[k].first.is_zero(); ++k) pool.push_back(util[k].second);
    lo = 0;
    hi = std::min(b - positive, pool.size());
  }

  std::vector<Bundle> out;
  for (std::size_t k = lo; k <= hi; ++k) {
    for_each_combination(pool.size(), k, [&](const std::vector<std::size_t>& pick) {
      Bundle x;
      for (std::size_t s : must) x.insert(m.items()[s]);
      for (std::size_t i : pick) x.insert(m.items()[pool[i]]);
      out.push_back(std::move(x));
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunTrace run_once(const Market& m, const std::vector<BuyerId>& order, const TieBreak& tiebreak,
                  const SimulationOptions& opts) {
  {
    std::vector<BuyerId> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<BuyerId> ids;
    for (const auto& b : m.buyers()) ids.push_back(b.id);
    std::sort(ids.begin(), ids.end());
    if (sorted != ids) throw ContractViolation("run_once: order is not a permutation of the buyers");
  }
  RunTrace trace;
  trace.order = order;
  Market residual = m;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& t = order[k];
    PriceVector p;
    try {
      p = price_round(residual, opts.mode, opts.pricing);
    } catch (const UnsupportedMarket& e) {
      if (k == 0) throw;
      trace.halted = e.what();
      break;
    }
    const auto options = best_bundles(residual, t, p);
    check_unique(opts, t, options.size());
    const std::size_t pick = tiebreak(options);
    if (pick >= options.size()) throw ContractViolation("run_once: tie-break picked a missing bundle");
    trace.steps.push_back(make_step(residual, t, p, options[pick], options.size()));
    trace.final_welfare += trace.steps.back().value;
    residual = restrict_market(residual, t, options[pick]);
  }
  trace.leftover_items.insert(residual.items().begin(), residual.items().end());
  return trace;
}

Verdict run_exhaustive(const Market& m, const SimulationOptions& opts, const std::string& instance_id) {
  Verdict v;
  v.instance_id = instance_id;
  v.optimum = market_optimum(m);
  Explorer explorer(m, opts);
  explorer.set_optimum(v.optimum);
  const std::uint64_t all_buyers = explorer.all_bits(m.num_buyers());
  const std::uint64_t all_items = explorer.all_bits(m.num_items());
  try {
    const auto& root = explorer.visit(all_buyers, all_items, true);
    v.runs_checked = root.runs;
    v.worst_welfare = root.min_future;
    v.all_optimal = root.min_future == v.optimum;
    if (root.min_future > v.optimum) throw InternalError("run_exhaustive: a run beat the optimum");
    if (!v.all_optimal) v.counterexample = explorer.build_trace({});
  } catch (const Explorer::BudgetExceeded&) {
    v.complete = false;
    v.all_optimal = false;
    v.worst_welfare = v.optimum;
    if (const auto& early = explorer.early_counterexample()) {
      v.counterexample = explorer.build_trace(*early);
      v.worst_welfare = v.counterexample->final_welfare;
    }
  }
  return v;
}

Verdict run_sampled(const Market& m, std::size_t runs, std::uint64_t seed, const SimulationOptions& opts,
                    const std::string& instance_id) {
  Verdict v;
  v.instance_id = instance_id;
  v.optimum = market_optimum(m);
  v.worst_welfare = v.optimum;
  v.all_optimal = true;
  std::mt19937_64 rng(seed);
  std::vector<BuyerId> order;
  for (const auto& b : m.buyers()) order.push_back(b.id);
  const TieBreak pick = [&rng](const std::vector<Bundle>& options) {
    return static_cast<std::size_t>(rng() % options.size());
  };
  for (std::size_t r = 0; r < runs; ++r) {
    std::shuffle(order.begin(), order.end(), rng);
    RunTrace trace = run_once(m, order, pick, opts);
    ++v.runs_checked;
    if (trace.final_welfare < v.worst_welfare) v.worst_welfare = trace.final_welfare;
    if (trace.final_welfare != v.optimum) {
      v.all_optimal = false;
      if (!v.counterexample) v.counterexample = std::move(trace);
    }
  }
  return v;
}

OracleResult oracle_opt(const Market& m, std::size_t max_items) {
  const std::size_t n = m.num_items();
  if (n > max_items) {
    throw ContractViolation("oracle_opt: " + std::to_string(n) + " items exceed the cap of " +
                            std::to_string(max_items));
  }
  if (n > 20) throw ContractViolation("oracle_opt: at most 20 items");
  const std::size_t nt = m.num_buyers();
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;

  auto value_of = [&](std::size_t t, std::uint32_t x) {
    Rational v;
    for (std::size_t s = 0; s < n; ++s) {
      if (x >> s & 1) v += m.value(t, s);
    }
    return v;
  };
  auto fits = [&](std::size_t t, std::uint32_t x) { return std::popcount(x) <= m.buyers()[t].demand; };

  // best[t][used]: maximum welfare of buyers t.. on the items outside `used`.
  std::vector<std::vector<std::optional<Rational>>> best(nt + 1, std::vector<std::optional<Rational>>(full + 1));
  std::function<const Rational&(std::size_t, std::uint32_t)> f = [&](std::size_t t, std::uint32_t used) -> const Rational& {
    auto& slot = best[t][used];
    if (slot) return *slot;
    if (t == nt) return slot.emplace(0);
    const std::uint32_t free = full & ~used;
    Rational top = f(t + 1, used);
    for (std::uint32_t x = free; x != 0; x = (x - 1) & free) {
      if (!fits(t, x)) continue;
      top = max(top, value_of(t, x) + f(t + 1, used | x));
    }
    return slot.emplace(top);
  };

  OracleResult out;
  out.optimum = f(0, 0);

  std::vector<std::uint32_t> chosen(nt, 0);
  std::function<void(std::size_t, std::uint32_t, const Rational&)> collect =
      [&](std::size_t t, std::uint32_t used, const Rational& need) {
        if (t == nt) {
          Allocation a;
          for (std::size_t b = 0; b < nt; ++b) {
            if (chosen[b] == 0) continue;
            auto& bundle = a.bundle[m.buyers()[b].id];
            for (std::size_t s = 0; s < n; ++s) {
              if (chosen[b] >> s & 1) bundle.insert(m.items()[s]);
            }
          }
          out.optimal.insert(std::move(a));
          return;
        }
        const std::uint32_t free = full & ~used;
        for (std::uint32_t x = free;; x = (x - 1) & free) {
          if (fits(t, x)) {
            const Rational v = value_of(t, x);
            if (v + f(t + 1, used | x) == need) {
              chosen[t] = x;
              collect(t + 1, used | x, need - v);
            }
          }
          if (x == 0) break;
        }
        chosen[t] = 0;
      };
  collect(0, 0, out.optimum);
  return out;
}

}  // namespace dynprice
