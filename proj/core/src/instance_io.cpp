#include "pickroute/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pickroute/error.hpp"

namespace pickroute {
namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw DomainError("instance file: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw DomainError("instance file: unknown field '" + key + "' in " + where);
    }
  }
  for (const auto& key : allowed) {
    if (!obj.contains(key)) {
      throw DomainError("instance file: missing field '" + key + "' in " + where);
    }
  }
}

int slot_index(const Location& loc, const WarehouseGeometry& g) {
  return static_cast<int>(std::lround(loc.y / g.slot_pitch));
}

}  // namespace

std::string instance_to_json(const Instance& instance) {
  const auto& g = instance.geometry;
  json doc;
  doc["format_version"] = kInstanceFormatVersion;
  doc["geometry"] = {{"n_aisles", g.n_aisles},
                     {"slots_per_aisle", g.slots_per_aisle},
                     {"slot_pitch", g.slot_pitch},
                     {"cross_aisle_offset", g.cross_aisle_offset},
                     {"aisle_pitch", g.aisle_pitch}};
  doc["depot"] = {{"aisle", instance.depot.aisle}, {"slot", 0}};
  json items = json::array();
  for (const auto& item : instance.items) {
    items.push_back({{"aisle", item.aisle}, {"slot", slot_index(item, g)}});
  }
  doc["items"] = std::move(items);
  doc["seed"] = instance.seed;
  return doc.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("instance file: malformed JSON: ") + e.what());
  }
  try {
    require_keys(doc, {"format_version", "geometry", "depot", "items", "seed"}, "document");
    const int version = doc.at("format_version").get<int>();
    if (version != kInstanceFormatVersion) {
      throw DomainError("instance file: unsupported format_version " + std::to_string(version) +
                        " (expected " + std::to_string(kInstanceFormatVersion) + ")");
    }
    const json& gj = doc.at("geometry");
    require_keys(gj, {"n_aisles", "slots_per_aisle", "slot_pitch", "cross_aisle_offset", "aisle_pitch"},
                 "geometry");
    WarehouseGeometry g;
    g.n_aisles = gj.at("n_aisles").get<int>();
    g.slots_per_aisle = gj.at("slots_per_aisle").get<int>();
    g.slot_pitch = gj.at("slot_pitch").get<double>();
    g.cross_aisle_offset = gj.at("cross_aisle_offset").get<double>();
    g.aisle_pitch = gj.at("aisle_pitch").get<double>();

    const json& dj = doc.at("depot");
    require_keys(dj, {"aisle", "slot"}, "depot");
    if (dj.at("aisle").get<int>() != 1 || dj.at("slot").get<int>() != 0) {
      throw DomainError("instance file: depot must be {\"aisle\": 1, \"slot\": 0}");
    }

    const json& ij = doc.at("items");
    if (!ij.is_array()) throw DomainError("instance file: 'items' must be an array");
    std::vector<std::pair<int, int>> picks;
    for (const auto& item : ij) {
      require_keys(item, {"aisle", "slot"}, "items[]");
      picks.emplace_back(item.at("aisle").get<int>(), item.at("slot").get<int>());
    }
    return make_instance(g, picks, doc.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw DomainError(std::string("instance file: ") + e.what());
  }
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << instance_to_json(instance);
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return instance_from_json(buffer.str());
}

}  // namespace pickroute
