#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pickroute/optim.hpp"
#include "pickroute/random.hpp"
#include "pickroute/tensor.hpp"
#include "pickroute/tour_graph.hpp"
#include "pickroute/warehouse.hpp"

namespace pickroute {

/// Which index feeds the sinusoidal aisle encoding.
enum class EncodingPosition {
  kAisleIndex,     // original aisle index - 1, so skipped empty aisles leave gaps
  kSequenceIndex,  // position in the compacted non-empty sequence
};

std::string to_string(EncodingPosition mode);
EncodingPosition parse_encoding_position(const std::string& text);

struct ModelConfig {
  std::size_t d_h = 128;
  std::size_t heads = 8;
  std::size_t layers = 3;
  /// 0 means 4 * d_h.
  std::size_t d_ff = 0;
  double clip = 10.0;
  /// Slots per aisle.
  std::size_t d_z = 90;
  std::size_t d_out = kNumActionPairs;
  /// Masks the gap action during decoding.
  bool simplified = false;
  EncodingPosition encoding = EncodingPosition::kAisleIndex;

  std::size_t feed_forward_width() const { return d_ff == 0 ? 4 * d_h : d_ff; }
  /// Throws ContractViolation for inconsistent sizes.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Sinusoidal encoding: component 2j is sin(p / 10000^(2j/d_h)), component
/// 2j+1 the matching cosine.
std::vector<double> aisle_encoding(std::size_t position, std::size_t d_h);

enum class DecodeMode { kGreedy, kSample };

struct Decoded {
  Rollout rollout;
  /// Sum of the chosen actions' log-probabilities; part of the recorded graph
  /// when gradients are enabled.
  autodiff::Tensor log_prob;
};

/// Encoder-only attention policy producing one row of 16 action-pair logits
/// per non-empty aisle. Row i attends only to aisles i and later.
class PolicyNetwork {
 public:
  /// Initialises weights uniformly in +-1/sqrt(d_h); biases zero, norm gains
  /// one.
  PolicyNetwork(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  const Parameter& parameter(const std::string& name) const;
  std::size_t parameter_count() const;

  /// Deep copy with fresh optimizer state.
  PolicyNetwork clone() const;
  /// Overwrites parameter values (not optimizer state) from a network with
  /// the same config.
  void copy_values_from(const PolicyNetwork& other);

  /// Clipped logits, shape (seq.size(), d_out). `pad_rows` zero rows are
  /// prepended and hidden from attention; the result excludes them.
  autodiff::Tensor forward(const AisleSequence& seq, std::size_t pad_rows = 0) const;

  /// Runs the environment from the initial state, choosing among valid pairs
  /// only. Greedy breaks ties towards the lowest pair index; sampling needs
  /// `rng`.
  Decoded decode(const AisleSequence& seq, DecodeMode mode, Rng* rng = nullptr) const;

  /// Log-probability of a fixed action sequence.
  autodiff::Tensor log_probability(const AisleSequence& seq,
                                   std::span<const ActionPair> actions) const;

 private:
  autodiff::Tensor embed(const AisleSequence& seq, std::size_t pad_rows) const;
  const autodiff::Tensor& p(std::size_t index) const { return params_[index].value; }

  ModelConfig config_;
  std::vector<Parameter> params_;
};

/// Weights file: "PKRW", u32 format version, u64 header size, a JSON header
/// {format_version, config, tensors: [{name, shape, offset}]}, then every
/// tensor as little-endian IEEE-754 doubles; offsets count doubles from the
/// start of the data block.
inline constexpr std::uint32_t kWeightsFormatVersion = 1;

void save_params(const PolicyNetwork& network, const std::filesystem::path& path);
/// Throws DomainError on a bad magic, version or shape and
/// std::runtime_error when the file cannot be read.
PolicyNetwork load_params(const std::filesystem::path& path);
/// Also requires the stored config to equal `expected`; the error names the
/// first differing field with expected and actual values.
PolicyNetwork load_params(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace pickroute
