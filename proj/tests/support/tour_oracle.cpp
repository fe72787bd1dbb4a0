#include "tour_oracle.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace pickroute::oracle {

std::size_t Multigraph::vertex(const std::string& label) {
  auto [it, inserted] = ids_.try_emplace(label, degree_.size());
  if (inserted) degree_.push_back(0);
  return it->second;
}

void Multigraph::add_edge(const std::string& u, const std::string& v, Length length,
                          int multiplicity) {
  const std::size_t a = vertex(u);
  const std::size_t b = vertex(v);
  for (int i = 0; i < multiplicity; ++i) {
    edges_.emplace_back(a, b);
    ++degree_[a];
    ++degree_[b];
    length_ += length;
  }
}

std::size_t Multigraph::degree(const std::string& label) const {
  const auto it = ids_.find(label);
  return it == ids_.end() ? 0 : degree_[it->second];
}

std::size_t Multigraph::components() const {
  std::vector<std::size_t> parent(degree_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : edges_) parent[find(a)] = find(b);
  std::set<std::size_t> roots;
  for (std::size_t v = 0; v < degree_.size(); ++v)
    if (degree_[v] > 0) roots.insert(find(v));
  return roots.size();
}

bool Multigraph::all_degrees_even() const {
  return std::all_of(degree_.begin(), degree_.end(), [](std::size_t d) { return d % 2 == 0; });
}

std::string classify(const Multigraph& graph, const std::string& back, const std::string& front) {
  if (graph.edge_count() == 0) return "000C";
  auto parity = [&](const std::string& label) {
    const std::size_t d = graph.degree(label);
    return d == 0 ? '0' : (d % 2 == 1 ? 'U' : 'E');
  };
  std::string label;
  label += parity(back);
  label += parity(front);
  label += std::to_string(graph.components());
  label += 'C';
  return label;
}

namespace {

std::string back_node(std::size_t i) { return "a" + std::to_string(i); }
std::string front_node(std::size_t i) { return "b" + std::to_string(i); }

// Points of aisle i from front to back: front node, every pick, back node.
// The depot is its own vertex joined to the front node by zero-length edges.
std::vector<std::pair<std::string, Length>> aisle_points(const AisleSequence& seq, std::size_t i) {
  std::vector<std::pair<std::string, Length>> pts{{front_node(i), 0}};
  for (Length y : seq[i].ys) {
    pts.emplace_back("p" + std::to_string(i) + "_" + std::to_string(static_cast<long long>(y * 1000)), y);
  }
  pts.emplace_back(back_node(i), seq.aisle_length());
  return pts;
}

void add_path(Multigraph& g, const std::vector<std::pair<std::string, Length>>& pts,
              std::size_t from, std::size_t to, int multiplicity) {
  for (std::size_t k = from; k < to; ++k) {
    g.add_edge(pts[k].first, pts[k + 1].first, pts[k + 1].second - pts[k].second, multiplicity);
  }
}

void add_vertical(Multigraph& g, const AisleSequence& seq, std::size_t i, VerticalAction action) {
  const auto pts = aisle_points(seq, i);
  const std::size_t last = pts.size() - 1;
  const std::size_t lowest = 1;
  const std::size_t highest = last - 1;
  switch (action) {
    case VerticalAction::kOnePass:
      add_path(g, pts, 0, last, 1);
      break;
    case VerticalAction::kTop:
      add_path(g, pts, lowest, last, 2);
      break;
    case VerticalAction::kBottom:
      add_path(g, pts, 0, highest, 2);
      break;
    case VerticalAction::kGap: {
      // Skip the widest stretch between consecutive picks.
      std::size_t skip = lowest;
      Length widest = -1;
      for (std::size_t k = lowest; k < highest; ++k) {
        const Length d = pts[k + 1].second - pts[k].second;
        if (d > widest) {
          widest = d;
          skip = k;
        }
      }
      add_path(g, pts, 0, skip, 2);
      add_path(g, pts, skip + 1, last, 2);
      break;
    }
  }
  // Make sure every pick vertex exists, even when uncovered.
  for (const auto& p : pts) g.vertex(p.first);
}

void add_horizontal(Multigraph& g, const AisleSequence& seq, std::size_t i,
                    HorizontalAction action) {
  const Length dx = seq[i + 1].x - seq[i].x;
  const int top = action == HorizontalAction::kH11 ? 1 : (action == HorizontalAction::kH02 ? 0 : 2);
  const int bottom = action == HorizontalAction::kH11 ? 1 : (action == HorizontalAction::kH20 ? 0 : 2);
  if (top > 0) g.add_edge(back_node(i), back_node(i + 1), dx, top);
  if (bottom > 0) g.add_edge(front_node(i), front_node(i + 1), dx, bottom);
}

}  // namespace

TourAudit audit_rollout(const AisleSequence& seq, std::span<const ActionPair> actions) {
  Multigraph g;
  TourAudit audit;
  const std::size_t n = std::min(actions.size(), seq.size());
  for (std::size_t i = 0; i < n; ++i) {
    add_vertical(g, seq, i, actions[i].vertical);
    audit.states_after_vertical.push_back(classify(g, back_node(i), front_node(i)));
    if (i + 1 < seq.size()) {
      add_horizontal(g, seq, i, actions[i].horizontal);
      audit.states_after_step.push_back(classify(g, back_node(i + 1), front_node(i + 1)));
    } else {
      audit.states_after_step.push_back(classify(g, back_node(i), front_node(i)));
    }
  }
  audit.connected = g.components() == 1;
  audit.all_even = g.all_degrees_even();
  audit.covers_all_picks = actions.size() == seq.size();
  for (std::size_t i = 0; i < seq.size() && audit.covers_all_picks; ++i) {
    for (const auto& point : aisle_points(seq, i)) {
      if (point.first[0] == 'p' && g.degree(point.first) == 0) audit.covers_all_picks = false;
    }
  }
  audit.length = g.total_length();
  return audit;
}

}  // namespace pickroute::oracle
