#include "dynprice/structured_dual.hpp"

#include <algorithm>
#include <string>

#include "dynprice/errors.hpp"

namespace dynprice {

namespace {

bool saturated_in_matching(const BipartiteGraph& g, const BMatching& m, Vertex v) {
  if (v.side == Side::kItem) return m.item_degrees(g)[v.index] >= 1;
  return m.buyer_degrees(g)[v.index] >= g.capacity(v.index);
}

}  // namespace

StructuredCovering refine_covering(const BipartiteGraph& g, std::vector<RefineStep>* trace) {
  std::vector<Rational> w;
  for (const auto& e : g.edges()) w.push_back(e.weight);

  auto current = solve_bmatching(g);
  const Rational optimum = current.weight;

  // The optimum set never changes across steps, so each gap also decides
  // legality and saturation for the original weights.
  std::vector<bool> legal(g.edges().size());
  std::vector<bool> always_saturated(g.num_items() + g.num_buyers());

  // Phase 1: push non-legal edges off tightness.
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const bool in_optimum = std::binary_search(current.matching.edges.begin(),
                                               current.matching.edges.end(), i);
    Rational eps;
    if (!in_optimum) {
      const auto gi = g.with_weights(w);
      eps = current.weight - max_weight_forced_edge(gi, i);
    }
    legal[i] = eps.is_zero();
    if (eps.sign() > 0) {
      w[i] += eps / Rational(2);
      current = solve_bmatching(g.with_weights(w));
    }
    if (trace) {
      trace->push_back({RefineStep::Phase::kEdge, i, eps, current.weight,
                        current.covering.total_value(g)});
    }
  }

  // Phase 2: lift always-saturated vertices off zero.
  const std::size_t n = g.num_items() + g.num_buyers();
  std::vector<Rational> lift(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vertex v = j < g.num_items() ? Vertex{Side::kItem, j}
                                       : Vertex{Side::kBuyer, j - g.num_items()};
    const auto gj = g.with_weights(w);
    Rational delta;
    if (saturated_in_matching(gj, current.matching, v)) {
      delta = current.weight - max_weight_reduced_capacity(gj, v);
    }
    always_saturated[j] = delta.sign() > 0;
    if (delta.sign() > 0) {
      const int cap = v.side == Side::kItem ? 1 : g.capacity(v.index);
      lift[j] = delta / Rational(cap + 1);
      const auto& incident = v.side == Side::kItem ? g.item_edges(v.index) : g.buyer_edges(v.index);
      for (std::size_t e : incident) w[e] -= lift[j];
      current = solve_bmatching(g.with_weights(w));
    }
    if (trace) {
      trace->push_back({RefineStep::Phase::kVertex, j, delta, current.weight,
                        current.covering.total_value(g)});
    }
  }

  StructuredCovering out;
  out.optimum = optimum;
  out.pi = current.covering;
  for (std::size_t s = 0; s < g.num_items(); ++s) out.pi.item[s] += lift[s];
  for (std::size_t t = 0; t < g.num_buyers(); ++t) out.pi.buyer[t] += lift[g.num_items() + t];

  if (!out.pi.is_feasible(g) || out.pi.total_value(g) != optimum) {
    throw InternalError("refine_covering: result is not an optimal covering");
  }
  out.tight.resize(g.edges().size());
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    out.tight[e] = out.pi.is_tight(g, e);
    if (out.tight[e] != legal[e]) {
      throw InternalError("refine_covering: tightness of edge " + std::to_string(e) +
                          " disagrees with legality");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const Vertex v = j < g.num_items() ? Vertex{Side::kItem, j}
                                       : Vertex{Side::kBuyer, j - g.num_items()};
    if ((out.pi.at(v).sign() > 0) != always_saturated[j]) {
      throw InternalError("refine_covering: dual of '" + g.vertex_name(v) +
                          "' disagrees with saturation");
    }
  }
  out.slack = slack_of(out.pi, g);
  return out;
}

BipartiteGraph tight_subgraph(const StructuredCovering& sc, const BipartiteGraph& g) {
  return g.edge_subgraph(sc.tight).with_unit_weights();
}

bool is_legal_edge(const BipartiteGraph& g, std::size_t edge) {
  if (edge >= g.edges().size()) throw ContractViolation("is_legal_edge: unknown edge");
  return max_weight_forced_edge(g, edge) == solve_bmatching(g).weight;
}

std::optional<Rational> slack_of(const Covering& pi, const BipartiteGraph& g) {
  std::optional<Rational> best;
  auto offer = [&](const Rational& x) {
    if (!best || x < *best) best = x;
  };
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    auto gap = pi.edge_slack(g, e);
    if (gap.sign() > 0) offer(gap);
  }
  for (const auto& p : pi.item) {
    if (p.sign() > 0) offer(p);
  }
  for (const auto& p : pi.buyer) {
    if (p.sign() > 0) offer(p);
  }
  return best;
}

}  // namespace dynprice
