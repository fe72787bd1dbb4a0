#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pickroute/tour_graph.hpp"
#include "pickroute/warehouse.hpp"

// Test-only reference implementation: materialises tour subgraphs as explicit
// multigraphs and classifies them by degree parity and connectivity, without
// using the transition tables.

namespace pickroute::oracle {

class Multigraph {
 public:
  /// Returns the id of the vertex with this label, creating it if needed.
  std::size_t vertex(const std::string& label);
  void add_edge(const std::string& u, const std::string& v, Length length = 0,
                int multiplicity = 1);

  std::size_t degree(const std::string& label) const;
  bool has_vertex(const std::string& label) const { return ids_.contains(label); }
  /// Connected components among vertices of positive degree.
  std::size_t components() const;
  bool all_degrees_even() const;
  Length total_length() const { return length_; }
  std::size_t edge_count() const { return edges_.size(); }

 private:
  std::map<std::string, std::size_t> ids_;
  std::vector<std::size_t> degree_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  Length length_ = 0;
};

/// Label such as "UU1C": parity of `back` then `front` ('0' isolated,
/// 'U' odd, 'E' even), then the component count. A graph without edges is
/// "000C".
std::string classify(const Multigraph& graph, const std::string& back, const std::string& front);

struct TourAudit {
  /// Label after each step, taken at the next aisle's cross-aisle nodes (or
  /// the final aisle's own nodes for the last step).
  std::vector<std::string> states_after_step;
  /// Label after only the vertical edges of each aisle, at that aisle's nodes.
  std::vector<std::string> states_after_vertical;
  bool connected = false;
  bool all_even = false;
  bool covers_all_picks = false;
  Length length = 0;

  bool is_tour() const { return connected && all_even && covers_all_picks; }
};

/// Builds the subgraph of `actions` edge by edge. Action pairs are taken at
/// face value: invalid ones just produce graphs the audit rejects.
TourAudit audit_rollout(const AisleSequence& seq, std::span<const ActionPair> actions);

}  // namespace pickroute::oracle
