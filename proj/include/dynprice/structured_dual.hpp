#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dynprice/matching.hpp"

namespace dynprice {

// Optimal covering in which
//   (a) an edge is tight exactly when some maximum-weight b-matching uses it;
//   (b) a vertex has dual zero exactly when some maximum-weight b-matching
//       leaves it below capacity.
struct StructuredCovering {
  Covering pi;
  std::vector<bool> tight;  // per edge of the source graph
  // Smallest positive gap: over non-tight edge slacks and positive duals.
  // nullopt stands for +infinity (both sets empty).
  std::optional<Rational> slack;
  Rational optimum;
};

// One perturbation step of refine_covering, recorded for inspection.
struct RefineStep {
  enum class Phase { kEdge, kVertex } phase;
  std::size_t index;   // edge index or vertex ordinal (items first, then buyers)
  Rational gap;        // epsilon_i or delta_j
  Rational optimum;    // max weight under the step's weights
  Rational dual_value; // pi . b of the re-solved covering
};

// Two-phase perturbation. Edges are visited in graph order: each edge whose
// forced optimum falls short of the optimum by eps gets its weight raised by
// eps/2. Vertices are then visited items first, buyers second: each vertex
// saturated in every optimum (gap delta > 0) gets its incident weights
// lowered by delta/(b+1). The covering of the final weights, with each
// vertex's delta/(b+1) added back, is verified against (a) and (b) before it
// is returned; a failed check throws InternalError.
StructuredCovering refine_covering(const BipartiteGraph& g, std::vector<RefineStep>* trace = nullptr);

// Same vertices and capacities, only tight edges, unit weights.
BipartiteGraph tight_subgraph(const StructuredCovering& sc, const BipartiteGraph& g);

// Some maximum-weight b-matching contains the edge.
bool is_legal_edge(const BipartiteGraph& g, std::size_t edge);

std::optional<Rational> slack_of(const Covering& pi, const BipartiteGraph& g);
inline std::optional<Rational> slack_of(const StructuredCovering& sc, const BipartiteGraph& g) {
  return slack_of(sc.pi, g);
}

}  // namespace dynprice
