#pragma once

#include <filesystem>
#include <string>

#include "pickroute/warehouse.hpp"

namespace pickroute {

inline constexpr int kInstanceFormatVersion = 1;

/// Instance document:
///   {"format_version": 1,
///    "geometry": {"n_aisles", "slots_per_aisle", "slot_pitch",
///                 "cross_aisle_offset", "aisle_pitch"},
///    "depot": {"aisle": 1, "slot": 0},
///    "items": [{"aisle": a, "slot": s}, ...],
///    "seed": n}
/// Unknown versions and unknown fields are rejected with DomainError.
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

void save_instance(const Instance& instance, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

}  // namespace pickroute
