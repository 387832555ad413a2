// Command-line front end: dynprice <verb> [options]. JSON on stdout by
// default, a plain-text report with --pretty.

#include <CLI11.hpp>
#include <json.hpp>

#include <bit>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dynprice/errors.hpp"
#include "dynprice/io.hpp"
#include "dynprice/market.hpp"
#include "dynprice/matching.hpp"
#include "dynprice/orderings.hpp"
#include "dynprice/pricing.hpp"
#include "dynprice/set_analysis.hpp"
#include "dynprice/simulation.hpp"
#include "dynprice/structured_dual.hpp"

using namespace dynprice;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kFalse = 1;
constexpr int kError = 2;

struct Common {
  std::string input;
  bool pretty = false;
};

Market load(const std::string& path) {
  std::stringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
  } else {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open '" + path + "'");
    buf << in.rdbuf();
  }
  return parse_market(buf.str());
}

Json covering_json(const Covering& pi, const BipartiteGraph& g) {
  Json out;
  out["items"] = Json::object();
  for (std::size_t s = 0; s < g.num_items(); ++s) out["items"][g.items()[s]] = pi.item[s].str();
  out["buyers"] = Json::object();
  for (std::size_t t = 0; t < g.num_buyers(); ++t) out["buyers"][g.buyers()[t]] = pi.buyer[t].str();
  return out;
}

Json edge_json(const BipartiteGraph& g, std::size_t e) {
  return Json{{"buyer", g.buyers()[g.edges()[e].buyer]}, {"item", g.items()[g.edges()[e].item]}};
}

Json names(const BipartiteGraph& g, const std::vector<std::size_t>& idx, bool items) {
  Json out = Json::array();
  for (std::size_t i : idx) out.push_back(items ? g.items()[i] : g.buyers()[i]);
  return out;
}

Json prices_json(const PriceVector& p) {
  Json out = Json::object();
  for (const auto& [s, v] : p.price) out[s] = v.str();
  return out;
}

Json trace_json(const RunTrace& t) {
  Json steps = Json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"buyer", s.buyer},
                     {"bundle", s.bundle},
                     {"value", s.value.str()},
                     {"paid", s.paid.str()},
                     {"choices", s.choices},
                     {"prices", prices_json(s.prices)}});
  }
  Json out{{"order", t.order},
           {"steps", steps},
           {"final_welfare", t.final_welfare.str()},
           {"leftover_items", t.leftover_items}};
  out["halted"] = t.halted ? Json(*t.halted) : Json(nullptr);
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return "{" + out + "}";
}

std::string join(const std::set<std::string>& xs) { return join(std::vector<std::string>(xs.begin(), xs.end())); }

void emit(const Json& doc, bool pretty, const std::function<void(std::ostream&)>& text) {
  if (pretty) {
    text(std::cout);
  } else {
    std::cout << doc.dump() << "\n";
  }
}

int cmd_solve(const Common& c) {
  const Market m = load(c.input);
  const auto g = BipartiteGraph::from_market(m);
  const auto sol = solve_bmatching(g);
  Json matching = Json::array();
  for (std::size_t e : sol.matching.edges) matching.push_back(edge_json(g, e));
  Json doc{{"optimum", sol.weight.str()}, {"matching", matching}, {"pi", covering_json(sol.covering, g)}};
  emit(doc, c.pretty, [&](std::ostream& os) {
    os << "optimum welfare: " << sol.weight << "\n";
    for (std::size_t e : sol.matching.edges) {
      os << "  " << g.buyers()[g.edges()[e].buyer] << " <- " << g.items()[g.edges()[e].item] << "  ("
         << g.edges()[e].weight << ")\n";
    }
  });
  return kOk;
}

int cmd_dual(const Common& c) {
  const Market m = load(c.input);
  const auto g = BipartiteGraph::from_market(m);
  const auto sc = refine_covering(g);
  Json tight = Json::array();
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    if (sc.tight[e]) tight.push_back(edge_json(g, e));
  }
  Json doc{{"optimum", sc.optimum.str()}, {"pi", covering_json(sc.pi, g)}, {"tight_edges", tight}};
  doc["slack"] = sc.slack ? Json(sc.slack->str()) : Json(nullptr);
  emit(doc, c.pretty, [&](std::ostream& os) {
    os << "optimum: " << sc.optimum << "\nslack: " << (sc.slack ? sc.slack->str() : "infinity") << "\n";
    for (std::size_t t = 0; t < g.num_buyers(); ++t) os << "  pi(" << g.buyers()[t] << ") = " << sc.pi.buyer[t] << "\n";
    for (std::size_t s = 0; s < g.num_items(); ++s) os << "  pi(" << g.items()[s] << ") = " << sc.pi.item[s] << "\n";
    os << "tight edges:\n";
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      if (sc.tight[e]) os << "  " << g.buyers()[g.edges()[e].buyer] << " - " << g.items()[g.edges()[e].item] << "\n";
    }
  });
  return kOk;
}

OrderingStrategy parse_strategy(const std::string& s) {
  if (s == "three") return OrderingStrategy::kThreeBuyers;
  if (s == "bidemand") return OrderingStrategy::kBidemand;
  return OrderingStrategy::kAuto;
}

int cmd_order(const Common& c, const std::string& strategy) {
  const Market m = trim_items(load(c.input)).market;
  PricingOptions opts;
  opts.strategy = parse_strategy(strategy);
  const auto r = round_prices_multi(m, opts);
  std::vector<std::string> seq;
  for (std::size_t s : r.ordering.sequence()) seq.push_back(m.items()[s]);
  Json trace = Json::array();
  for (const auto& e : r.case_trace) {
    trace.push_back({{"depth", e.depth},
                     {"branch", e.branch},
                     {"buyers", e.buyers},
                     {"z", e.z},
                     {"x", e.x},
                     {"pivot_items", e.pivot_items}});
  }
  const bool adequate = verify_adequate(tight_subgraph(r.covering, r.graph), r.ordering);
  Json doc{{"ordering", seq}, {"adequate", adequate}, {"case_trace", trace}};
  emit(doc, c.pretty, [&](std::ostream& os) {
    os << "ordering: ";
    for (const auto& s : seq) os << s << " ";
    os << "\nadequate: " << (adequate ? "yes" : "NO") << "\n";
    for (const auto& e : r.case_trace) {
      os << std::string(2 * static_cast<std::size_t>(e.depth) + 2, ' ') << e.branch << " on " << join(e.buyers);
      if (!e.z.empty()) os << "  Z=" << join(e.z);
      if (!e.x.empty()) os << "  X=" << join(e.x);
      if (!e.pivot_items.empty()) os << "  pivots=" << join(e.pivot_items);
      os << "\n";
    }
  });
  return adequate ? kOk : kFalse;
}

int cmd_price(const Common& c, const std::string& mode, const std::string& strategy) {
  const Market full = load(c.input);
  const auto trimmed = trim_items(full);
  const Market& m = trimmed.market;
  Json doc;
  PriceVector prices;
  if (mode == "unit") {
    prices = price_round(full, PricingMode::kUnit);
    const auto g = BipartiteGraph::from_market(m);
    doc["prices"] = prices_json(prices);
    doc["pi"] = covering_json(refine_covering(g).pi, g);
    doc["sigma"] = nullptr;
  } else {
    PricingOptions opts;
    opts.strategy = parse_strategy(strategy);
    const auto r = round_prices_multi(m, opts);
    prices = r.prices;
    for (const auto& s : trimmed.removed) prices.price[s] = full.max_value() + Rational(1);
    doc["prices"] = prices_json(prices);
    doc["pi"] = covering_json(r.covering.pi, r.graph);
    Json sigma = Json::object();
    for (std::size_t s = 0; s < m.num_items(); ++s) sigma[m.items()[s]] = r.ordering.rank(s);
    doc["sigma"] = sigma;
  }
  doc["delta"] = prices.delta.str();
  doc["trimmed_items"] = trimmed.removed;
  emit(doc, c.pretty, [&](std::ostream& os) {
    os << "delta: " << prices.delta << "\n";
    for (const auto& [s, p] : prices.price) os << "  p(" << s << ") = " << p << "\n";
    if (!trimmed.removed.empty()) os << "priced out (unused by a smallest optimum): " << join(trimmed.removed) << "\n";
  });
  return kOk;
}

int cmd_simulate(const Common& c, const std::string& mode, bool exhaustive, std::size_t orders,
                 std::uint64_t seed, std::uint64_t budget, const std::string& strategy) {
  const Market m = load(c.input);
  SimulationOptions opts;
  opts.mode = mode == "unit" ? PricingMode::kUnit : PricingMode::kMulti;
  opts.pricing.strategy = parse_strategy(strategy);
  opts.budget = budget;
  const Verdict v = exhaustive || orders == 0 ? run_exhaustive(m, opts, c.input) : run_sampled(m, orders, seed, opts, c.input);
  Json doc{{"instance", v.instance_id},
           {"mode", mode},
           {"search", exhaustive || orders == 0 ? "exhaustive" : "sampled"},
           {"runs_checked", v.runs_checked},
           {"complete", v.complete},
           {"all_optimal", v.all_optimal},
           {"optimum", v.optimum.str()},
           {"worst_welfare", v.worst_welfare.str()}};
  doc["counterexample"] = v.counterexample ? trace_json(*v.counterexample) : Json(nullptr);
  emit(doc, c.pretty, [&](std::ostream& os) {
    os << "runs checked: " << v.runs_checked << (v.complete ? "" : " (budget exhausted, partial)") << "\n";
    os << "optimum: " << v.optimum << "  worst run: " << v.worst_welfare << "\n";
    os << "all optimal: " << (v.all_optimal ? "yes" : "no") << "\n";
    if (v.counterexample) {
      os << "counterexample:\n";
      for (const auto& s : v.counterexample->steps) {
        os << "  " << s.buyer << " takes " << join(s.bundle) << " value " << s.value << " paid " << s.paid << "\n";
      }
      if (v.counterexample->halted) os << "  halted: " << *v.counterexample->halted << "\n";
      os << "  welfare " << v.counterexample->final_welfare << "\n";
    }
  });
  return v.all_optimal && v.complete ? kOk : kFalse;
}

int cmd_generate(bool pretty, std::uint64_t seed, std::size_t buyers, const std::vector<int>& demands,
                 std::int64_t lo, std::int64_t hi, const std::string& output) {
  const Market m = generate_instance(seed, {buyers, demands, lo, hi});
  const std::string text = serialize_market(m, pretty ? 2 : -1) + "\n";
  if (output.empty() || output == "-") {
    std::cout << text;
  } else {
    std::ofstream out(output);
    if (!out) throw ModelError("cannot write '" + output + "'");
    out << text;
  }
  return kOk;
}

int cmd_verify(const Common& c, std::size_t table_limit) {
  const Market full = load(c.input);
  const auto report = check_opt_property(full);
  Json doc{{"opt_welfare", report.opt_welfare.str()}, {"opt_property", report.opt_property_holds}};
  if (!report.opt_property_holds) {
    Json alloc = Json::object();
    for (const auto& [t, b] : report.witness->allocation.bundle) alloc[t] = b;
    doc["witness"] = {{"buyer", report.witness->buyer}, {"allocation", alloc}};
    emit(doc, c.pretty, [&](std::ostream& os) {
      os << "(OPT) fails: buyer " << report.witness->buyer << " is short in an optimum of welfare "
         << report.opt_welfare << "\n";
    });
    return kFalse;
  }
  const Market m = trim_items(full).market;
  const auto g = BipartiteGraph::from_market(m);
  const auto gpi = tight_subgraph(refine_covering(g), g);

  Json dangerous = nullptr;
  if (gpi.num_buyers() <= 16) {
    dangerous = Json::array();
    const std::uint32_t all = (std::uint32_t{1} << gpi.num_buyers()) - 1;
    for (std::uint32_t y = 1; y < all; ++y) {
      BuyerSet set;
      for (std::size_t t = 0; t < gpi.num_buyers(); ++t) {
        if (y >> t & 1) set.push_back(t);
      }
      if (surplus(gpi, set) == 1) dangerous.push_back(names(gpi, set, false));
    }
  }
  doc["dangerous_sets"] = dangerous;
  std::optional<BuyerSet> z;
  try {
    z = maximal_dangerous_set(gpi);
  } catch (const ContractViolation&) {
    z.reset();  // a surplus-zero split: the graph falls apart, nothing is dangerous across it
  }
  doc["maximal_dangerous_set"] = z ? names(gpi, *z, false) : Json(nullptr);

  Json tables = Json::object();
  std::size_t infeasible = 0;
  for (std::size_t t = 0; t < gpi.num_buyers(); ++t) {
    const auto nbr = gpi.neighbors(t);
    const int b = gpi.capacity(t);
    Json rows = Json::array();
    bool truncated = false;
    std::vector<std::size_t> pick(static_cast<std::size_t>(b));
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t from, std::size_t depth) {
      if (truncated) return;
      if (depth == pick.size()) {
        if (rows.size() >= table_limit) {
          truncated = true;
          return;
        }
        const bool ok = feasible_bundle(gpi, t, pick);
        infeasible += !ok;
        rows.push_back({{"bundle", names(gpi, pick, true)}, {"feasible", ok}});
        return;
      }
      for (std::size_t i = from; i < nbr.size(); ++i) {
        pick[depth] = nbr[i];
        rec(i + 1, depth + 1);
      }
    };
    rec(0, 0);
    tables[gpi.buyers()[t]] = {{"bundles", rows}, {"truncated", truncated}};
  }
  doc["feasibility"] = tables;
  emit(doc, c.pretty, [&](std::ostream& os) {
    os << "(OPT) holds, optimum " << report.opt_welfare << "\n";
    if (dangerous.is_array()) {
      os << "dangerous sets: " << dangerous.size() << "\n";
      for (const auto& d : dangerous) os << "  " << join(d.get<std::vector<std::string>>()) << "\n";
    }
    if (z) os << "maximal dangerous set: " << join(names(gpi, *z, false).get<std::vector<std::string>>()) << "\n";
    os << "infeasible tight bundles: " << infeasible << "\n";
    for (auto it = tables.begin(); it != tables.end(); ++it) {
      for (const auto& row : it.value()["bundles"]) {
        if (!row["feasible"].get<bool>()) {
          os << "  " << it.key() << " cannot take " << join(row["bundle"].get<std::vector<std::string>>()) << "\n";
        }
      }
    }
  });
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic posted prices for multi-demand markets"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-i,--input", common.input, "market JSON file ('-' for stdin)")->required();
    sub->add_flag("--pretty", common.pretty, "human-readable output");
  };

  auto* solve = app.add_subcommand("solve", "maximum-welfare allocation and an optimal covering");
  add_common(solve);
  auto* dual = app.add_subcommand("dual", "structured optimal covering: tight edges are exactly the legal ones");
  add_common(dual);

  std::string strategy = "auto";
  const std::vector<std::string> strategies{"auto", "three", "bidemand"};
  auto* order = app.add_subcommand("order", "adequate item ordering with the case trace");
  add_common(order);
  order->add_option("--strategy", strategy, "ordering construction")->check(CLI::IsMember(strategies));

  std::string mode = "multi";
  const std::vector<std::string> modes{"unit", "multi"};
  auto* price = app.add_subcommand("price", "one round of posted prices");
  add_common(price);
  price->add_option("--mode", mode, "unit or multi")->check(CLI::IsMember(modes));
  price->add_option("--strategy", strategy, "ordering construction")->check(CLI::IsMember(strategies));

  bool exhaustive = false;
  std::size_t orders = 0;
  std::uint64_t seed = 0;
  std::uint64_t budget = 200000;
  std::string format = "json";
  auto* simulate = app.add_subcommand("simulate", "check every arrival order and tie-break");
  add_common(simulate);
  simulate->add_option("--mode", mode, "unit or multi")->check(CLI::IsMember(modes));
  simulate->add_option("--strategy", strategy, "ordering construction")->check(CLI::IsMember(strategies));
  auto* ex_flag = simulate->add_flag("--exhaustive", exhaustive, "all orders and tie-breaks (default)");
  simulate->add_option("--orders", orders, "sample this many random runs instead")->excludes(ex_flag);
  simulate->add_option("--seed", seed, "seed for sampled runs");
  simulate->add_option("--budget", budget, "maximum residual markets priced in exhaustive search");
  simulate->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

  std::size_t gen_buyers = 2;
  std::vector<int> gen_demands{1};
  std::int64_t gen_min = 1;
  std::int64_t gen_max = 20;
  std::string gen_output;
  bool gen_pretty = false;
  auto* generate = app.add_subcommand("generate", "random market with |S| = b(T) and positive values");
  generate->add_option("--seed", seed, "generator seed");
  generate->add_option("--buyers", gen_buyers, "number of buyers");
  generate->add_option("--demand", gen_demands, "one demand, or one per buyer")->delimiter(',');
  generate->add_option("--min", gen_min, "smallest value");
  generate->add_option("--max", gen_max, "largest value");
  generate->add_option("-o,--output", gen_output, "output file (default stdout)");
  generate->add_flag("--pretty", gen_pretty, "indented JSON");

  std::size_t table_limit = 500;
  auto* verify = app.add_subcommand("verify", "(OPT), dangerous sets and bundle feasibility tables");
  add_common(verify);
  verify->add_option("--table-limit", table_limit, "maximum bundles listed per buyer");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*solve) return cmd_solve(common);
    if (*dual) return cmd_dual(common);
    if (*order) return cmd_order(common, strategy);
    if (*price) return cmd_price(common, mode, strategy);
    if (*simulate) {
      if (format == "text") common.pretty = true;
      return cmd_simulate(common, mode, exhaustive, orders, seed, budget, strategy);
    }
    if (*generate) return cmd_generate(gen_pretty, seed, gen_buyers, gen_demands, gen_min, gen_max, gen_output);
    if (*verify) return cmd_verify(common, table_limit);
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const UnsupportedMarket& e) {
    std::cerr << "unsupported market: " << e.what() << "\n";
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
  }
  return kError;
}
