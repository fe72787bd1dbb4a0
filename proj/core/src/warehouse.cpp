#include "pickroute/warehouse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "pickroute/error.hpp"
#include "pickroute/random.hpp"

namespace pickroute {
namespace {

std::string describe(const Location& loc) {
  std::ostringstream out;
  out << "(aisle " << loc.aisle << ", y=" << loc.y << ")";
  return out.str();
}

void check_location(const Location& loc, const WarehouseGeometry& g) {
  if (loc.aisle < 1 || loc.aisle > g.n_aisles || !(loc.y >= 0) ||
      loc.y > g.aisle_length()) {
    throw DomainError("location " + describe(loc) + " lies outside the warehouse");
  }
}

int slot_of(Length y, const WarehouseGeometry& g) {
  return static_cast<int>(std::lround(y / g.slot_pitch));
}

// Truncated, discretised normal over {1..count}; out-of-range draws are
// resampled.
int sample_truncated_normal(Rng& rng, int count, double sigma_fraction) {
  const double mean = (1.0 + count) / 2.0;
  const double sigma = sigma_fraction * count;
  while (true) {
    const auto v = static_cast<int>(std::lround(rng.normal(mean, sigma)));
    if (v >= 1 && v <= count) return v;
  }
}

}  // namespace

void WarehouseGeometry::validate() const {
  if (n_aisles < 1) throw DomainError("geometry: n_aisles must be positive");
  if (slots_per_aisle < 1) throw DomainError("geometry: slots_per_aisle must be positive");
  if (!(slot_pitch > 0) || !(cross_aisle_offset > 0) || !(aisle_pitch > 0)) {
    throw DomainError("geometry: all lengths must be strictly positive");
  }
}

WarehouseGeometry WarehouseGeometry::scaled(double k) const {
  if (!(k > 0)) throw ContractViolation("geometry scale factor must be positive");
  WarehouseGeometry g = *this;
  g.slot_pitch *= k;
  g.cross_aisle_offset *= k;
  g.aisle_pitch *= k;
  return g;
}

std::string to_string(DistributionMode mode) {
  return mode == DistributionMode::kNormal ? "normal" : "uniform";
}

DistributionMode parse_distribution_mode(const std::string& text) {
  if (text == "normal") return DistributionMode::kNormal;
  if (text == "uniform") return DistributionMode::kUniform;
  throw ContractViolation("unknown distribution mode '" + text + "'");
}

std::vector<ProblemClass> benchmark_classes(DistributionMode mode) {
  std::vector<ProblemClass> classes;
  for (int aisles : kBenchmarkAisleCounts) {
    for (int items : kBenchmarkPickListSizes) classes.push_back({aisles, items, mode});
  }
  return classes;
}

ProblemClass parse_problem_class(const std::string& text, DistributionMode mode) {
  const auto sep = text.find_first_of(",:x");
  if (sep == std::string::npos) {
    throw ContractViolation("problem class must look like 'A,M' (got '" + text + "')");
  }
  try {
    std::size_t used_a = 0;
    std::size_t used_m = 0;
    const std::string a_text = text.substr(0, sep);
    const std::string m_text = text.substr(sep + 1);
    ProblemClass cls{std::stoi(a_text, &used_a), std::stoi(m_text, &used_m), mode};
    if (used_a != a_text.size() || used_m != m_text.size()) throw std::invalid_argument("");
    if (cls.n_aisles < 1 || cls.n_items < 1) {
      throw ContractViolation("problem class counts must be positive: '" + text + "'");
    }
    return cls;
  } catch (const std::invalid_argument&) {
    throw ContractViolation("problem class must look like 'A,M' (got '" + text + "')");
  } catch (const std::out_of_range&) {
    throw ContractViolation("problem class out of range: '" + text + "'");
  }
}

std::string to_string(const ProblemClass& cls) {
  return std::to_string(cls.n_aisles) + "," + std::to_string(cls.n_items);
}

void Instance::validate() const {
  geometry.validate();
  if (depot.aisle != 1 || depot.y != 0) {
    throw DomainError("depot must sit at the front of aisle 1");
  }
  if (items.empty()) throw ContractViolation("instance has no items");
  std::set<Location> seen;
  for (const auto& item : items) {
    check_location(item, geometry);
    const int slot = slot_of(item.y, geometry);
    if (slot < 1 || slot > geometry.slots_per_aisle || geometry.slot_y(slot) != item.y) {
      throw DomainError("item " + describe(item) + " is not on a storage slot");
    }
    if (!seen.insert(item).second) {
      throw ContractViolation("duplicate item " + describe(item));
    }
  }
}

Instance make_instance(const WarehouseGeometry& geometry,
                       const std::vector<std::pair<int, int>>& aisle_slots,
                       std::uint64_t seed) {
  Instance inst;
  inst.geometry = geometry;
  inst.seed = seed;
  inst.items.reserve(aisle_slots.size());
  for (const auto& [aisle, slot] : aisle_slots) {
    inst.items.push_back({aisle, geometry.slot_y(slot)});
  }
  inst.validate();
  return inst;
}

Instance scale_instance(const Instance& instance, double k) {
  Instance out = instance;
  out.geometry = instance.geometry.scaled(k);
  out.depot.y *= k;
  for (auto& item : out.items) item.y *= k;
  return out;
}

Length shortest_path_distance(const Location& a, const Location& b,
                              const WarehouseGeometry& geometry) {
  check_location(a, geometry);
  check_location(b, geometry);
  if (a.aisle == b.aisle) return std::abs(a.y - b.y);
  const Length h = geometry.aisle_length();
  const Length dx = std::abs(geometry.aisle_x(a.aisle) - geometry.aisle_x(b.aisle));
  return dx + std::min(a.y + b.y, 2 * h - (a.y + b.y));
}

Length route_length(std::span<const std::size_t> order, const Instance& instance) {
  const std::size_t m = instance.items.size();
  if (order.size() != m) {
    throw ContractViolation("route_length: order visits " + std::to_string(order.size()) +
                            " items, instance has " + std::to_string(m));
  }
  std::vector<bool> visited(m, false);
  Length total = 0;
  Location current = instance.depot;
  for (std::size_t idx : order) {
    if (idx >= m || visited[idx]) {
      throw ContractViolation("route_length: duplicate or unknown item index " +
                              std::to_string(idx));
    }
    visited[idx] = true;
    total += shortest_path_distance(current, instance.items[idx], instance.geometry);
    current = instance.items[idx];
  }
  return total + shortest_path_distance(current, instance.depot, instance.geometry);
}

Instance generate_instance(const ProblemClass& cls, std::uint64_t seed,
                           const GenerationOptions& options) {
  WarehouseGeometry geometry = options.geometry;
  geometry.n_aisles = cls.n_aisles;
  geometry.validate();
  const auto capacity = static_cast<std::int64_t>(geometry.n_aisles) * geometry.slots_per_aisle;
  if (cls.n_items < 1 || cls.n_items > capacity) {
    throw DomainError("cannot place " + std::to_string(cls.n_items) + " items in " +
                      std::to_string(capacity) + " storage slots");
  }
  if (!(options.sigma_fraction > 0)) throw DomainError("sigma_fraction must be positive");

  Rng rng(seed);
  std::vector<std::pair<int, int>> picks;
  picks.reserve(static_cast<std::size_t>(cls.n_items));
  std::set<std::pair<int, int>> taken;

  if (cls.mode == DistributionMode::kNormal) {
    while (static_cast<int>(picks.size()) < cls.n_items) {
      const int aisle = sample_truncated_normal(rng, geometry.n_aisles, options.sigma_fraction);
      const int slot = sample_truncated_normal(rng, geometry.slots_per_aisle, options.sigma_fraction);
      if (taken.insert({aisle, slot}).second) picks.emplace_back(aisle, slot);
    }
  } else {
    // Floyd's sampling without replacement over flattened slot indices.
    std::set<std::int64_t> chosen;
    for (std::int64_t j = capacity - cls.n_items; j < capacity; ++j) {
      const std::int64_t t = rng.uniform_int(0, j);
      const std::int64_t pick = chosen.insert(t).second ? t : j;
      if (pick == j) chosen.insert(j);
      const int aisle = static_cast<int>(pick / geometry.slots_per_aisle) + 1;
      const int slot = static_cast<int>(pick % geometry.slots_per_aisle) + 1;
      picks.emplace_back(aisle, slot);
    }
  }
  return make_instance(geometry, picks, seed);
}

AisleSequence to_aisle_sequence(const Instance& instance) {
  instance.validate();
  const auto& g = instance.geometry;
  std::map<int, NonEmptyAisle> by_aisle;
  auto touch = [&](int aisle) -> NonEmptyAisle& {
    auto [it, inserted] = by_aisle.try_emplace(aisle);
    if (inserted) {
      it->second.aisle = aisle;
      it->second.x = g.aisle_x(aisle);
      it->second.slots.assign(static_cast<std::size_t>(g.slots_per_aisle), 0);
    }
    return it->second;
  };

  NonEmptyAisle& depot_aisle = touch(instance.depot.aisle);
  depot_aisle.ys.push_back(instance.depot.y);
  depot_aisle.holds_depot = true;

  for (const auto& item : instance.items) {
    NonEmptyAisle& rec = touch(item.aisle);
    rec.ys.push_back(item.y);
    rec.slots[static_cast<std::size_t>(slot_of(item.y, g) - 1)] = 1;
  }

  AisleSequence seq;
  seq.geometry = g;
  seq.aisles.reserve(by_aisle.size());
  for (auto& [aisle, rec] : by_aisle) {
    std::sort(rec.ys.begin(), rec.ys.end());
    seq.aisles.push_back(std::move(rec));
  }
  return seq;
}

}  // namespace pickroute
