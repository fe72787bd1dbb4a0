#include "pickroute/policy.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pickroute/error.hpp"

namespace pickroute {
namespace {

namespace ad = autodiff;
using json = nlohmann::json;

constexpr std::size_t kEmbedW = 0;
constexpr std::size_t kEmbedB = 1;
constexpr std::size_t kLayerBase = 2;
constexpr std::size_t kPerLayer = 12;

// Offsets inside one encoder layer.
enum LayerParam : std::size_t {
  kWq, kWk, kWv, kWo, kNorm1Gain, kNorm1Bias, kFf1W, kFf1B, kFf2W, kFf2B, kNorm2Gain, kNorm2Bias
};

constexpr char kMagic[4] = {'P', 'K', 'R', 'W'};

std::size_t layer_param(std::size_t layer, LayerParam which) {
  return kLayerBase + layer * kPerLayer + which;
}

ad::Tensor uniform_tensor(ad::Shape shape, double bound, Rng& rng) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  std::vector<double> values(count);
  for (double& v : values) v = rng.uniform(-bound, bound);
  return ad::Tensor::variable(std::move(shape), std::move(values));
}

ad::Tensor filled(ad::Shape shape, double value) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  return ad::Tensor::variable(std::move(shape), std::vector<double>(count, value));
}

json config_to_json(const ModelConfig& c) {
  return {{"d_h", c.d_h},     {"heads", c.heads}, {"layers", c.layers},
          {"d_ff", c.feed_forward_width()},       {"clip", c.clip},
          {"d_z", c.d_z},     {"d_out", c.d_out}, {"simplified", c.simplified},
          {"encoding", to_string(c.encoding)}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.d_h = j.at("d_h").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.d_ff = j.at("d_ff").get<std::size_t>();
  c.clip = j.at("clip").get<double>();
  c.d_z = j.at("d_z").get<std::size_t>();
  c.d_out = j.at("d_out").get<std::size_t>();
  c.simplified = j.at("simplified").get<bool>();
  c.encoding = parse_encoding_position(j.at("encoding").get<std::string>());
  return c;
}

template <typename T>
void check_field(const char* name, const T& expected, const T& actual) {
  if (expected != actual) {
    std::ostringstream out;
    out << "weights config mismatch: " << name << " expected " << expected << ", got " << actual;
    throw DomainError(out.str());
  }
}

void write_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void write_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint64_t read_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

// Probabilities of one logits row restricted to `valid`.
std::array<double, kNumActionPairs> row_probabilities(std::span<const double> row,
                                                      const ActionMask& valid) {
  std::array<double, kNumActionPairs> probs{};
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kNumActionPairs; ++k)
    if (valid.test(k)) peak = std::max(peak, row[k]);
  double total = 0;
  for (std::size_t k = 0; k < kNumActionPairs; ++k) {
    if (!valid.test(k)) continue;
    probs[k] = std::exp(row[k] - peak);
    total += probs[k];
  }
  for (double& q : probs) q /= total;
  return probs;
}

}  // namespace

std::string to_string(EncodingPosition mode) {
  return mode == EncodingPosition::kAisleIndex ? "aisle" : "sequence";
}

EncodingPosition parse_encoding_position(const std::string& text) {
  if (text == "aisle") return EncodingPosition::kAisleIndex;
  if (text == "sequence") return EncodingPosition::kSequenceIndex;
  throw ContractViolation("unknown encoding position '" + text + "'");
}

void ModelConfig::validate() const {
  if (d_h == 0 || heads == 0 || layers == 0 || d_z == 0) {
    throw ContractViolation("model config: sizes must be positive");
  }
  if (d_h % heads != 0) {
    throw ContractViolation("model config: d_h=" + std::to_string(d_h) +
                            " is not divisible by heads=" + std::to_string(heads));
  }
  if (d_out != kNumActionPairs) {
    throw ContractViolation("model config: d_out must be " + std::to_string(kNumActionPairs));
  }
  if (!(clip > 0)) throw ContractViolation("model config: clip must be positive");
}

std::vector<double> aisle_encoding(std::size_t position, std::size_t d_h) {
  std::vector<double> enc(d_h);
  const auto p = static_cast<double>(position);
  for (std::size_t k = 0; k < d_h; ++k) {
    const std::size_t j = k / 2;
    const double angle =
        p / std::pow(10000.0, 2.0 * static_cast<double>(j) / static_cast<double>(d_h));
    enc[k] = (k % 2 == 0) ? std::sin(angle) : std::cos(angle);
  }
  return enc;
}

PolicyNetwork::PolicyNetwork(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  if (config_.d_ff == 0) config_.d_ff = config_.feed_forward_width();
  Rng rng(seed);
  const std::size_t d = config_.d_h;
  const std::size_t ff = config_.d_ff;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));

  params_.emplace_back("embed.W", uniform_tensor({config_.d_z, d}, bound, rng));
  params_.emplace_back("embed.b", filled({1, d}, 0.0));
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    params_.emplace_back(prefix + "Wq", uniform_tensor({d, d}, bound, rng));
    params_.emplace_back(prefix + "Wk", uniform_tensor({d, d}, bound, rng));
    params_.emplace_back(prefix + "Wv", uniform_tensor({d, d}, bound, rng));
    params_.emplace_back(prefix + "Wo", uniform_tensor({d, d}, bound, rng));
    params_.emplace_back(prefix + "norm1.gain", filled({1, d}, 1.0));
    params_.emplace_back(prefix + "norm1.bias", filled({1, d}, 0.0));
    params_.emplace_back(prefix + "ff1.W", uniform_tensor({d, ff}, bound, rng));
    params_.emplace_back(prefix + "ff1.b", filled({1, ff}, 0.0));
    params_.emplace_back(prefix + "ff2.W", uniform_tensor({ff, d}, bound, rng));
    params_.emplace_back(prefix + "ff2.b", filled({1, d}, 0.0));
    params_.emplace_back(prefix + "norm2.gain", filled({1, d}, 1.0));
    params_.emplace_back(prefix + "norm2.bias", filled({1, d}, 0.0));
  }
  params_.emplace_back("out.W", uniform_tensor({d, config_.d_out}, bound, rng));
  params_.emplace_back("out.b", filled({1, config_.d_out}, 0.0));
}

const Parameter& PolicyNetwork::parameter(const std::string& name) const {
  for (const auto& param : params_)
    if (param.name == name) return param;
  throw ContractViolation("no parameter named '" + name + "'");
}

std::size_t PolicyNetwork::parameter_count() const {
  std::size_t total = 0;
  for (const auto& param : params_) total += param.value.size();
  return total;
}

PolicyNetwork PolicyNetwork::clone() const {
  PolicyNetwork copy = *this;
  for (auto& param : copy.params_) {
    const auto v = param.value.values();
    param = Parameter(param.name, ad::Tensor::variable(param.value.shape(), {v.begin(), v.end()}));
  }
  return copy;
}

void PolicyNetwork::copy_values_from(const PolicyNetwork& other) {
  if (!(other.config_ == config_)) {
    throw ContractViolation("copy_values_from: model configs differ");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto src = other.params_[i].value.values();
    auto dst = params_[i].value.mutable_values();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

ad::Tensor PolicyNetwork::embed(const AisleSequence& seq, std::size_t pad_rows) const {
  const std::size_t n = seq.size();
  const std::size_t rows = n + pad_rows;
  const std::size_t d = config_.d_h;
  std::vector<double> z(rows * config_.d_z, 0.0);
  std::vector<double> enc(rows * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& aisle = seq[i];
    if (aisle.slots.size() != config_.d_z) {
      throw ContractViolation("forward: aisle has " + std::to_string(aisle.slots.size()) +
                              " slots, model expects d_z=" + std::to_string(config_.d_z));
    }
    const std::size_t r = pad_rows + i;
    for (std::size_t k = 0; k < config_.d_z; ++k) z[r * config_.d_z + k] = aisle.slots[k];
    const std::size_t position = config_.encoding == EncodingPosition::kAisleIndex
                                     ? static_cast<std::size_t>(aisle.aisle - 1)
                                     : i;
    const auto e = aisle_encoding(position, d);
    std::copy(e.begin(), e.end(), enc.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  const auto Z = ad::Tensor::constant({rows, config_.d_z}, std::move(z));
  const auto E = ad::Tensor::constant({rows, d}, std::move(enc));
  const auto h = ad::add(ad::matmul(Z, p(kEmbedW)), p(kEmbedB));
  return ad::add(ad::scale(h, std::sqrt(static_cast<double>(d))), E);
}

ad::Tensor PolicyNetwork::forward(const AisleSequence& seq, std::size_t pad_rows) const {
  if (seq.size() == 0) throw ContractViolation("forward: empty aisle sequence");
  const std::size_t rows = seq.size() + pad_rows;
  const std::size_t heads = config_.heads;
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(config_.d_h / heads));

  // Query i may look at key j only if j >= i and j is not padding.
  std::vector<std::uint8_t> mask(rows * rows, 0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < rows; ++j) mask[i * rows + j] = (j < i || j < pad_rows) ? 1 : 0;

  ad::Tensor x = embed(seq, pad_rows);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const auto q = ad::split_heads(ad::matmul(x, p(layer_param(l, kWq))), heads);
    const auto k = ad::split_heads(ad::matmul(x, p(layer_param(l, kWk))), heads);
    const auto v = ad::split_heads(ad::matmul(x, p(layer_param(l, kWv))), heads);
    std::vector<ad::Tensor> outputs;
    outputs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
      const auto scores = ad::scale(ad::matmul(q[h], ad::transpose(k[h])), score_scale);
      outputs.push_back(ad::matmul(ad::masked_softmax(scores, mask), v[h]));
    }
    const auto attended = ad::matmul(ad::concat_heads(outputs), p(layer_param(l, kWo)));
    x = ad::layer_norm(ad::add(x, attended), p(layer_param(l, kNorm1Gain)),
                       p(layer_param(l, kNorm1Bias)));
    const auto hidden =
        ad::relu(ad::add(ad::matmul(x, p(layer_param(l, kFf1W))), p(layer_param(l, kFf1B))));
    const auto ff = ad::add(ad::matmul(hidden, p(layer_param(l, kFf2W))), p(layer_param(l, kFf2B)));
    x = ad::layer_norm(ad::add(x, ff), p(layer_param(l, kNorm2Gain)),
                       p(layer_param(l, kNorm2Bias)));
  }
  const std::size_t out = kLayerBase + config_.layers * kPerLayer;
  auto logits = ad::scale(ad::tanh(ad::add(ad::matmul(x, p(out)), p(out + 1))), config_.clip);
  if (pad_rows == 0) return logits;
  std::vector<std::size_t> real(seq.size());
  for (std::size_t i = 0; i < real.size(); ++i) real[i] = pad_rows + i;
  return ad::gather_rows(logits, real);
}

Decoded PolicyNetwork::decode(const AisleSequence& seq, DecodeMode mode, Rng* rng) const {
  if (mode == DecodeMode::kSample && rng == nullptr) {
    throw ContractViolation("decode: sampling needs a random source");
  }
  const ad::Tensor logits = forward(seq);
  const auto values = logits.values();
  const std::size_t n = seq.size();

  std::vector<std::uint8_t> excluded(n * kNumActionPairs, 1);
  std::vector<std::size_t> chosen(n);
  EnvState env = initial_env(seq);
  Decoded result;
  for (std::size_t i = 0; i < n; ++i) {
    const ActionMask valid = valid_action_pairs(env, config_.simplified);
    const auto row = values.subspan(i * kNumActionPairs, kNumActionPairs);
    std::size_t pick = kNumActionPairs;
    if (mode == DecodeMode::kGreedy) {
      for (std::size_t k = 0; k < kNumActionPairs; ++k) {
        if (valid.test(k) && (pick == kNumActionPairs || row[k] > row[pick])) pick = k;
      }
    } else {
      const auto probs = row_probabilities(row, valid);
      const double u = rng->uniform01();
      double cumulative = 0;
      for (std::size_t k = 0; k < kNumActionPairs; ++k) {
        if (!valid.test(k)) continue;
        pick = k;
        cumulative += probs[k];
        if (u < cumulative) break;
      }
    }
    for (std::size_t k = 0; k < kNumActionPairs; ++k) excluded[i * kNumActionPairs + k] = !valid.test(k);
    chosen[i] = pick;
    const ActionPair pair = ActionPair::from_index(pick);
    auto [next, cost] = step(env, pair);
    env = std::move(next);
    result.rollout.actions.push_back(pair);
    result.rollout.step_costs.push_back(cost);
  }
  if (!is_terminal_valid(env.eq_state)) {
    throw InternalError("decode finished in non-terminal state " +
                        std::string(to_string(env.eq_state)));
  }
  result.rollout.total_length = env.accumulated_cost;

  const auto chosen_logp = ad::log(ad::pick(ad::masked_softmax(logits, excluded), chosen));
  for (double lp : chosen_logp.values()) result.rollout.log_probs.push_back(lp);
  result.log_prob = ad::sum(chosen_logp);
  return result;
}

ad::Tensor PolicyNetwork::log_probability(const AisleSequence& seq,
                                          std::span<const ActionPair> actions) const {
  if (actions.size() != seq.size()) {
    throw InvalidActionError("log_probability: action count does not match the aisles",
                             std::min(actions.size(), seq.size()));
  }
  const ad::Tensor logits = forward(seq);
  std::vector<std::uint8_t> excluded(seq.size() * kNumActionPairs, 1);
  std::vector<std::size_t> chosen(seq.size());
  EnvState env = initial_env(seq);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const ActionMask valid = valid_action_pairs(env, config_.simplified);
    if (!valid.test(actions[i].index())) {
      throw InvalidActionError("log_probability: action " + to_string(actions[i]) + " is masked", i);
    }
    for (std::size_t k = 0; k < kNumActionPairs; ++k) excluded[i * kNumActionPairs + k] = !valid.test(k);
    chosen[i] = actions[i].index();
    env = step(env, actions[i]).next;
  }
  return ad::sum(ad::log(ad::pick(ad::masked_softmax(logits, excluded), chosen)));
}

void save_params(const PolicyNetwork& network, const std::filesystem::path& path) {
  json header;
  header["format_version"] = kWeightsFormatVersion;
  header["config"] = config_to_json(network.config());
  header["tensors"] = json::array();
  std::size_t offset = 0;
  for (const auto& param : network.parameters()) {
    header["tensors"].push_back(
        {{"name", param.name}, {"shape", param.value.shape()}, {"offset", offset}});
    offset += param.value.size();
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write weights file " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kWeightsFormatVersion);
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& param : network.parameters()) {
    for (double v : param.value.values()) write_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw std::runtime_error("failed writing weights file " + path.string());
}

PolicyNetwork load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weights file " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  const auto fail = [&](const std::string& why) -> DomainError {
    return DomainError("weights file " + path.string() + ": " + why);
  };
  if (bytes.size() < 16 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw fail("not a weights file");
  }
  const auto version = static_cast<std::uint32_t>(read_le(bytes.data() + 4, 4));
  if (version != kWeightsFormatVersion) {
    throw fail("format version " + std::to_string(version) + ", expected " +
               std::to_string(kWeightsFormatVersion));
  }
  const std::uint64_t header_size = read_le(bytes.data() + 8, 8);
  if (header_size > bytes.size() - 16) throw fail("truncated header");
  json header;
  try {
    header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_size));
  } catch (const json::exception& e) {
    throw fail(std::string("malformed header: ") + e.what());
  }

  PolicyNetwork network = [&] {
    try {
      return PolicyNetwork(config_from_json(header.at("config")), 0);
    } catch (const json::exception& e) {
      throw fail(std::string("bad config: ") + e.what());
    }
  }();
  const std::size_t data_start = 16 + header_size;
  const std::size_t data_doubles = (bytes.size() - data_start) / 8;
  const auto& tensors = header.at("tensors");
  auto& params = network.parameters();
  if (tensors.size() != params.size()) {
    throw fail("holds " + std::to_string(tensors.size()) + " tensors, model expects " +
               std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = tensors[i];
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<autodiff::Shape>();
    const auto offset = entry.at("offset").get<std::size_t>();
    if (name != params[i].name) throw fail("tensor " + name + " where " + params[i].name + " expected");
    if (shape != params[i].value.shape()) {
      throw fail("tensor " + name + " has shape " + autodiff::to_string(shape) + ", expected " +
                 autodiff::to_string(params[i].value.shape()));
    }
    auto dst = params[i].value.mutable_values();
    if (offset + dst.size() > data_doubles) throw fail("tensor " + name + " runs past the end");
    for (std::size_t k = 0; k < dst.size(); ++k) {
      dst[k] = std::bit_cast<double>(read_le(bytes.data() + data_start + 8 * (offset + k), 8));
    }
  }
  return network;
}

PolicyNetwork load_params(const std::filesystem::path& path, const ModelConfig& expected) {
  PolicyNetwork network = load_params(path);
  const ModelConfig& got = network.config();
  check_field("d_h", expected.d_h, got.d_h);
  check_field("heads", expected.heads, got.heads);
  check_field("layers", expected.layers, got.layers);
  check_field("d_ff", expected.feed_forward_width(), got.feed_forward_width());
  check_field("clip", expected.clip, got.clip);
  check_field("d_z", expected.d_z, got.d_z);
  check_field("d_out", expected.d_out, got.d_out);
  check_field("simplified", expected.simplified, got.simplified);
  check_field("encoding", to_string(expected.encoding), to_string(got.encoding));
  return network;
}

}  // namespace pickroute
