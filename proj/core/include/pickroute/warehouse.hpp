#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pickroute {

/// Warehouse length unit (LU). Default-geometry lengths are small integers,
/// which doubles represent exactly, so sums and comparisons of route lengths
/// are exact at default geometry.
using Length = double;

/// Single-block rectangular warehouse: parallel pick aisles between a front
/// cross-aisle at y = 0 and a back cross-aisle at y = h.
struct WarehouseGeometry {
  int n_aisles = 5;
  int slots_per_aisle = 90;
  Length slot_pitch = 1;
  Length cross_aisle_offset = 1;
  Length aisle_pitch = 5;

  /// h = slots_per_aisle * slot_pitch + cross_aisle_offset.
  Length aisle_length() const {
    return slots_per_aisle * slot_pitch + cross_aisle_offset;
  }
  /// Aisles are 1-based; aisle 1 sits at x = 0.
  Length aisle_x(int aisle) const { return (aisle - 1) * aisle_pitch; }
  Length slot_y(int slot) const { return slot * slot_pitch; }

  /// Throws DomainError for non-positive counts or lengths.
  void validate() const;

  /// Every length multiplied by k (counts unchanged).
  WarehouseGeometry scaled(double k) const;

  bool operator==(const WarehouseGeometry&) const = default;
};

struct Location {
  int aisle = 1;
  Length y = 0;

  auto operator<=>(const Location&) const = default;
};

enum class DistributionMode { kNormal, kUniform };

std::string to_string(DistributionMode mode);
DistributionMode parse_distribution_mode(const std::string& text);

/// (number of aisles, pick-list size, location distribution).
struct ProblemClass {
  int n_aisles = 5;
  int n_items = 30;
  DistributionMode mode = DistributionMode::kNormal;

  bool operator==(const ProblemClass&) const = default;
};

inline constexpr int kBenchmarkAisleCounts[] = {5, 10, 15, 20, 25, 30};
inline constexpr int kBenchmarkPickListSizes[] = {30, 45, 60, 75, 90};

/// The 30 benchmark classes, ordered by aisle count then pick-list size.
std::vector<ProblemClass> benchmark_classes(
    DistributionMode mode = DistributionMode::kNormal);

/// Parses "A,M" or "A:M" into a class.
ProblemClass parse_problem_class(const std::string& text,
                                 DistributionMode mode = DistributionMode::kNormal);
std::string to_string(const ProblemClass& cls);

/// A pick list. The depot is always at the front of aisle 1.
struct Instance {
  WarehouseGeometry geometry;
  Location depot;
  std::vector<Location> items;
  std::uint64_t seed = 0;

  /// Checks geometry, slot alignment, range and pairwise distinctness.
  /// Throws DomainError for out-of-range values and ContractViolation for
  /// duplicates or an empty pick list.
  void validate() const;

  std::size_t size() const { return items.size(); }
};

/// Builds and validates an instance from slot indices.
Instance make_instance(const WarehouseGeometry& geometry,
                       const std::vector<std::pair<int, int>>& aisle_slots,
                       std::uint64_t seed = 0);

/// Same instance with every length multiplied by k.
Instance scale_instance(const Instance& instance, double k);

/// Shortest walking distance between two locations: within an aisle the
/// vertical difference, otherwise the horizontal offset plus the cheaper
/// detour over the front or the back cross-aisle.
Length shortest_path_distance(const Location& a, const Location& b,
                              const WarehouseGeometry& geometry);

/// Tour length depot -> items[order[0]] -> ... -> depot. order must be a
/// permutation of item indices.
Length route_length(std::span<const std::size_t> order, const Instance& instance);

/// Sampling controls for instance generation. The geometry's n_aisles is
/// taken from the problem class.
struct GenerationOptions {
  WarehouseGeometry geometry{};
  /// Standard deviation of the truncated normal, as a fraction of the number
  /// of aisles (or slots); centred at the middle of the range.
  double sigma_fraction = 1.0 / 3.0;
};

Instance generate_instance(const ProblemClass& cls, std::uint64_t seed,
                           const GenerationOptions& options = {});

/// Per-aisle view of an instance, restricted to aisles holding a pick or the
/// depot.
struct NonEmptyAisle {
  int aisle = 1;
  Length x = 0;
  /// Sorted ascending; includes the depot (y = 0) for the depot aisle.
  std::vector<Length> ys;
  /// Binary slot occupancy, one entry per slot (slot j at index j - 1).
  /// The depot is not a slot and never appears here.
  std::vector<std::uint8_t> slots;
  bool holds_depot = false;

  /// Number of real picks (the depot excluded).
  std::size_t pick_count() const { return ys.size() - (holds_depot ? 1 : 0); }
};

struct AisleSequence {
  WarehouseGeometry geometry;
  std::vector<NonEmptyAisle> aisles;

  std::size_t size() const { return aisles.size(); }
  const NonEmptyAisle& operator[](std::size_t i) const { return aisles[i]; }
  Length aisle_length() const { return geometry.aisle_length(); }
};

/// Depot injected as a mandatory pick at the front of aisle 1, empty aisles
/// dropped, aisles ordered by index.
AisleSequence to_aisle_sequence(const Instance& instance);

}  // namespace pickroute
