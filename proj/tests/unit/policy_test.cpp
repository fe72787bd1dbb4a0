#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "pickroute/error.hpp"
#include "pickroute/policy.hpp"
#include "tour_oracle.hpp"

namespace pickroute {
namespace {

namespace ad = autodiff;

ModelConfig small_config() {
  ModelConfig c;
  c.d_h = 8;
  c.heads = 2;
  c.layers = 1;
  return c;
}

ModelConfig medium_config() {
  ModelConfig c;
  c.d_h = 16;
  c.heads = 4;
  c.layers = 2;
  return c;
}

std::vector<double> values_of(const ad::Tensor& t) { return {t.values().begin(), t.values().end()}; }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(AisleEncoding, Values) {
  const auto zero = aisle_encoding(0, 8);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(zero[k], k % 2 == 0 ? 0.0 : 1.0);
  EXPECT_NEAR(aisle_encoding(1, 8)[0], 0.8414709848, 1e-9);
  for (std::size_t p = 0; p < 40; ++p) {
    for (double v : aisle_encoding(p, 16)) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ModelConfig, Validation) {
  ModelConfig c;
  c.heads = 3;
  EXPECT_THROW(c.validate(), ContractViolation);
  EXPECT_NO_THROW(ModelConfig{}.validate());
}

TEST(Policy, InitialisationScheme) {
  const PolicyNetwork net(small_config(), 1);
  const double bound = 1.0 / std::sqrt(8.0);
  for (const auto& p : net.parameters()) {
    const bool is_gain = p.name.ends_with(".gain");
    const bool is_bias = p.name.ends_with(".b") || p.name.ends_with(".bias");
    for (double v : p.value.values()) {
      if (is_gain) {
        EXPECT_EQ(v, 1.0);
      } else if (is_bias) {
        EXPECT_EQ(v, 0.0);
      } else {
        EXPECT_LE(std::abs(v), bound);
      }
    }
  }
}

TEST(Policy, ForwardShapeAndRange) {
  const PolicyNetwork net(medium_config(), 2);
  const auto single = to_aisle_sequence(make_instance({}, {{1, 10}}));
  EXPECT_EQ(net.forward(single).shape(), (ad::Shape{1, 16}));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto seq = to_aisle_sequence(generate_instance({10, 45}, s));
    const auto logits = net.forward(seq);
    EXPECT_EQ(logits.shape(), (ad::Shape{seq.size(), 16}));
    for (double v : logits.values()) {
      EXPECT_GE(v, -10.0);
      EXPECT_LE(v, 10.0);
    }
  }
}

TEST(Policy, WrongSlotCountRejected) {
  ModelConfig c = small_config();
  c.d_z = 50;
  const PolicyNetwork net(c, 1);
  EXPECT_THROW(net.forward(to_aisle_sequence(make_instance({}, {{1, 10}}))), ContractViolation);
}

TEST(Policy, RowsIgnoreEarlierAisles) {
  const PolicyNetwork net(medium_config(), 3);
  WarehouseGeometry g;
  g.n_aisles = 6;
  const auto a = to_aisle_sequence(make_instance(g, {{1, 10}, {2, 40}, {3, 7}, {5, 60}, {6, 2}}));
  const auto b = to_aisle_sequence(make_instance(g, {{1, 80}, {2, 12}, {2, 13}, {3, 7}, {5, 60}, {6, 2}}));
  ASSERT_EQ(a.size(), b.size());
  const auto la = net.forward(a);
  const auto lb = net.forward(b);
  // Aisles 1 and 2 differ; rows for aisles 3, 5, 6 must match bit for bit.
  for (std::size_t i = 2; i < a.size(); ++i) {
    for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(la.at(i, k), lb.at(i, k));
  }
  bool earlier_differs = false;
  for (std::size_t k = 0; k < 16; ++k) earlier_differs |= la.at(0, k) != lb.at(0, k);
  EXPECT_TRUE(earlier_differs);
}

TEST(Policy, PaddingIsInvisible) {
  const PolicyNetwork net(medium_config(), 4);
  const auto seq = to_aisle_sequence(generate_instance({10, 30}, 8));
  const auto plain = net.forward(seq);
  for (std::size_t pad : {1u, 3u, 7u}) {
    const auto padded = net.forward(seq, pad);
    ASSERT_EQ(padded.shape(), plain.shape());
    for (std::size_t i = 0; i < plain.size(); ++i) {
      EXPECT_NEAR(padded.values()[i], plain.values()[i], 1e-9);
    }
  }
}

TEST(Decode, GreedyIsDeterministicAndValid) {
  const PolicyNetwork net(medium_config(), 5);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto seq = to_aisle_sequence(generate_instance({15, 45}, s));
    const auto a = net.decode(seq, DecodeMode::kGreedy);
    const auto b = net.decode(seq, DecodeMode::kGreedy);
    EXPECT_EQ(a.rollout.actions, b.rollout.actions);
    EXPECT_EQ(a.rollout.total_length, b.rollout.total_length);
    EXPECT_EQ(a.log_prob.item(), b.log_prob.item());
    EXPECT_EQ(rollout_length(a.rollout.actions, seq), a.rollout.total_length);
    EXPECT_TRUE(oracle::audit_rollout(seq, a.rollout.actions).is_tour());
  }
}

TEST(Decode, SimplifiedNeverEmitsGap) {
  ModelConfig c = small_config();
  c.simplified = true;
  const PolicyNetwork net(c, 6);
  Rng rng(6);
  int decodes = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto seq = to_aisle_sequence(generate_instance({5, 30}, s));
    const auto d = net.decode(seq, DecodeMode::kSample, &rng);
    for (const auto& a : d.rollout.actions) ASSERT_NE(a.vertical, VerticalAction::kGap);
    ++decodes;
  }
  EXPECT_EQ(decodes, 1000);
}

TEST(Decode, UniformParametersAndForcedAction) {
  PolicyNetwork net(small_config(), 7);
  for (auto& p : net.parameters()) {
    for (double& v : p.value.mutable_values()) v = 0.0;
  }
  const auto seq = to_aisle_sequence(make_instance({}, {{1, 10}, {2, 30}}));
  const ActionPair actions[] = {{VerticalAction::kOnePass, HorizontalAction::kH11},
                                {VerticalAction::kOnePass, HorizontalAction::kH11}};
  const auto first = valid_action_pairs(initial_env(seq));
  EnvState env = step(initial_env(seq), actions[0]).next;
  ASSERT_EQ(valid_action_pairs(env).count(), 1u);
  EXPECT_NEAR(net.log_probability(seq, actions).item(), -std::log(static_cast<double>(first.count())),
              1e-12);
}

TEST(Decode, MaskedPairsHaveZeroProbability) {
  const PolicyNetwork net(medium_config(), 8);
  Rng rng(8);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto seq = to_aisle_sequence(generate_instance({10, 30}, s));
    const auto d = net.decode(seq, DecodeMode::kSample, &rng);
    EXPECT_TRUE(std::isfinite(d.log_prob.item()));
    EXPECT_NO_THROW(replay(d.rollout.actions, seq));
  }
}

TEST(Decode, SamplingNeedsRng) {
  const PolicyNetwork net(small_config(), 1);
  const auto seq = to_aisle_sequence(make_instance({}, {{1, 10}}));
  EXPECT_THROW(net.decode(seq, DecodeMode::kSample), ContractViolation);
}

TEST(Decode, LogProbabilityGradientMatchesFiniteDifferences) {
  const PolicyNetwork net(small_config(), 9);
  WarehouseGeometry g;
  g.n_aisles = 3;
  const auto seq = to_aisle_sequence(make_instance(g, {{1, 20}, {2, 45}, {2, 70}, {3, 33}}));
  ASSERT_EQ(seq.size(), 3u);
  const auto actions = net.decode(seq, DecodeMode::kGreedy).rollout.actions;
  std::vector<ad::Tensor> leaves;
  for (const auto& p : net.parameters()) leaves.push_back(p.value);
  const double err = ad::finite_diff_check(
      [&] { return ad::scale(net.log_probability(seq, actions), 1.0 / 3.0); }, leaves);
  EXPECT_LT(err, 1e-4);
}

TEST(Weights, RoundTripIsExact) {
  const PolicyNetwork net(medium_config(), 10);
  const auto path = temp_file("pickroute_weights_a.bin");
  const auto path2 = temp_file("pickroute_weights_b.bin");
  save_params(net, path);
  const PolicyNetwork loaded = load_params(path);
  save_params(loaded, path2);
  EXPECT_EQ(read_bytes(path), read_bytes(path2));
  const auto seq = to_aisle_sequence(generate_instance({10, 30}, 1));
  EXPECT_EQ(values_of(net.forward(seq)), values_of(loaded.forward(seq)));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST(Weights, WrongWidthNamesBothValues) {
  const PolicyNetwork net(medium_config(), 11);
  const auto path = temp_file("pickroute_weights_c.bin");
  save_params(net, path);
  ModelConfig expected = medium_config();
  expected.d_h = 32;
  try {
    load_params(path, expected);
    FAIL();
  } catch (const DomainError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("d_h"), std::string::npos);
    EXPECT_NE(what.find("32"), std::string::npos);
    EXPECT_NE(what.find("16"), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(Weights, RejectsForeignFiles) {
  const auto path = temp_file("pickroute_weights_d.bin");
  std::ofstream(path) << "hello world, not weights";
  EXPECT_THROW(load_params(path), DomainError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_params(path), std::runtime_error);
}

TEST(Policy, CloneIsIndependent) {
  PolicyNetwork net(small_config(), 12);
  const PolicyNetwork copy = net.clone();
  net.parameters()[0].value.mutable_values()[0] += 1.0;
  EXPECT_NE(net.parameters()[0].value.values()[0], copy.parameters()[0].value.values()[0]);
}

}  // namespace
}  // namespace pickroute
