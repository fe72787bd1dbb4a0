#include <gtest/gtest.h>

#include <filesystem>

#include "pickroute/error.hpp"
#include "pickroute/instance_io.hpp"

namespace pickroute {
namespace {

TEST(InstanceIo, JsonRoundTrip) {
  const auto inst = generate_instance({10, 45}, 5);
  const auto back = instance_from_json(instance_to_json(inst));
  EXPECT_EQ(back.items, inst.items);
  EXPECT_EQ(back.geometry, inst.geometry);
  EXPECT_EQ(back.seed, inst.seed);
  EXPECT_EQ(instance_to_json(back), instance_to_json(inst));
}

TEST(InstanceIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "pickroute_io_test.json";
  const auto inst = generate_instance({5, 30, DistributionMode::kUniform}, 11);
  save_instance(inst, path);
  EXPECT_EQ(load_instance(path).items, inst.items);
  std::filesystem::remove(path);
}

TEST(InstanceIo, RejectsUnknownVersion) {
  auto text = instance_to_json(make_instance({}, {{1, 10}}));
  const std::string key = "\"format_version\": 1";
  const auto pos = text.find(key);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, key.size(), "\"format_version\": 9");
  EXPECT_THROW(instance_from_json(text), DomainError);
}

TEST(InstanceIo, RejectsMalformedInput) {
  EXPECT_THROW(instance_from_json("not json"), DomainError);
  EXPECT_THROW(instance_from_json("{}"), DomainError);
}

TEST(InstanceIo, MissingFileIsIoError) {
  EXPECT_THROW(load_instance("/nonexistent/instance.json"), std::runtime_error);
}

}  // namespace
}  // namespace pickroute
