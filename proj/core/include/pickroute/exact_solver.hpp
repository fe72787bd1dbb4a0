#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

#include "pickroute/tour_graph.hpp"
#include "pickroute/warehouse.hpp"

namespace pickroute {

inline constexpr Length kUnreachable = std::numeric_limits<Length>::infinity();

/// Cost-to-go table of the aisle-by-aisle dynamic program: cost[i][s] is the
/// cheapest completion from aisle position i entered in state s, choice[i][s]
/// the pair achieving it. Cells without a valid completion hold kUnreachable.
struct DpTable {
  std::vector<std::array<Length, kNumEquivalenceStates>> cost;
  std::vector<std::array<std::size_t, kNumEquivalenceStates>> choice;
};

DpTable build_dp_table(const AisleSequence& seq, bool simplified = false);

struct OptimalSolution {
  Length length = 0;
  Rollout rollout;
};

/// Minimum-length tour graph. Runs in time linear in the number of non-empty
/// aisles. Among equal-cost continuations the lower action-pair index wins,
/// so the returned rollout is deterministic. `simplified` restricts the
/// search to gap-free tours.
OptimalSolution solve_optimal(const AisleSequence& seq, bool simplified = false);
OptimalSolution solve_optimal(const Instance& instance);

inline constexpr std::size_t kBruteForceMaxItems = 12;

/// Exact TSP over depot and items with the warehouse shortest-path metric
/// (Held-Karp over item subsets). Independent of the tour-graph machinery.
/// Throws ContractViolation when the pick list exceeds `max_items`.
Length brute_force_tsp(const Instance& instance, std::size_t max_items = kBruteForceMaxItems);

}  // namespace pickroute
