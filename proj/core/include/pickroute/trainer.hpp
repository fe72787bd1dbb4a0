#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pickroute/optim.hpp"
#include "pickroute/policy.hpp"
#include "pickroute/warehouse.hpp"

namespace pickroute {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t steps_per_epoch = 100;
  std::size_t batch_size = 16;
  /// Significance level of the baseline gate.
  double alpha = 0.05;
  std::vector<ProblemClass> classes = benchmark_classes();
  /// Instances in the freshly generated per-epoch gate set.
  std::size_t eval_set_size = 256;
  std::uint64_t seed = 1;
  AdamConfig adam;
  ModelConfig model;
  GenerationOptions generation;

  /// All 30 classes, 100 epochs of 100 batches.
  static TrainConfig standard();
  /// Gap action masked, 25- and 30-aisle classes, 150 epochs of 200 batches.
  static TrainConfig simplified();

  void validate() const;
};

/// Applies a JSON object of overrides: epochs, steps_per_epoch, batch_size,
/// alpha, eval_set_size, seed, learning_rate, d_h, heads, layers, d_ff,
/// encoding ("aisle" or "sequence") and classes (["A,M", ...]). Unknown keys
/// are a DomainError.
TrainConfig apply_overrides(TrainConfig cfg, const std::string& json_text);

/// Baseline-normalised advantage (L - b) / b, with b clamped to at least 1 LU.
double advantage(Length sampled, Length baseline);

struct BatchStats {
  std::vector<Length> lengths;
  std::vector<Length> baselines;
  std::vector<double> advantages;
  double mean_length = 0;
  double mean_baseline = 0;
  double mean_advantage = 0;
};

struct ReinforceResult {
  /// Gradient of mean_k advantage_k * log p(rollout_k).
  GradientMap gradients;
  BatchStats stats;
};

/// One sampled rollout under `policy` and one greedy rollout under
/// `baseline` per sequence. Leaves the policy's gradient buffers zeroed.
ReinforceResult reinforce_gradient(const std::vector<AisleSequence>& batch, PolicyNetwork& policy,
                                   const PolicyNetwork& baseline, Rng& rng);

struct TTestResult {
  double mean_difference = 0;
  double t_statistic = 0;
  double p_value = 1;
};

/// One-sided paired t-test of mean(candidate - baseline) < 0. Zero variance
/// gives p = 1 unless the (constant) difference is negative, then p = 0.
TTestResult one_sided_paired_t_test(std::span<const Length> candidate,
                                    std::span<const Length> baseline);
bool baseline_gate(std::span<const Length> candidate, std::span<const Length> baseline,
                   double alpha);

struct HistoryRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double mean_length = 0;
  double mean_baseline = 0;
  double mean_advantage = 0;
  double grad_norm = 0;
  /// Cumulative number of accepted baseline replacements.
  std::size_t gate_updates = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double candidate_mean = 0;
  double baseline_mean = 0;
  double p_value = 1;
  bool accepted = false;
};

struct TrainOptions {
  /// Per-epoch checkpoints "epoch_NNNN.bin" when set.
  std::optional<std::filesystem::path> checkpoint_dir;
  /// Start from these weights instead of a fresh initialisation.
  const PolicyNetwork* initial = nullptr;
  std::function<void(const HistoryRecord&)> on_step;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  PolicyNetwork policy;
  PolicyNetwork baseline;
  std::vector<HistoryRecord> history;
  std::vector<EpochRecord> epochs;
};

/// REINFORCE with a greedy rollout baseline. Each step draws one class
/// uniformly and a batch from it. Throws InternalError on a non-finite
/// length or gradient. Deterministic for a fixed config.
TrainResult train(const TrainConfig& cfg, const TrainOptions& options = {});

/// CSV: epoch,step,mean_len,mean_baseline,mean_advantage,grad_norm,gate_updates
void write_history_header(std::ostream& out);
void write_history_row(std::ostream& out, const HistoryRecord& record);

}  // namespace pickroute
