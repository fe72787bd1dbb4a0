#include "pickroute/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "pickroute/error.hpp"
#include "pickroute/parallel.hpp"

namespace pickroute {
namespace {

std::vector<Length> greedy_lengths(const PolicyNetwork& network,
                                   const std::vector<AisleSequence>& seqs) {
  std::vector<Length> out(seqs.size());
  parallel_for(seqs.size(), [&](std::size_t i) {
    autodiff::NoGradGuard no_grad;
    out[i] = network.decode(seqs[i], DecodeMode::kGreedy).rollout.total_length;
  });
  return out;
}

std::vector<AisleSequence> make_batch(const ProblemClass& cls, std::size_t count, Rng& rng,
                                      const GenerationOptions& generation) {
  std::vector<AisleSequence> batch;
  batch.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    batch.push_back(to_aisle_sequence(generate_instance(cls, rng.next(), generation)));
  }
  return batch;
}

double mean_of(std::span<const double> xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

TrainConfig TrainConfig::standard() { return TrainConfig{}; }

TrainConfig TrainConfig::simplified() {
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.steps_per_epoch = 200;
  cfg.classes.clear();
  for (const auto& cls : benchmark_classes()) {
    if (cls.n_aisles == 25 || cls.n_aisles == 30) cfg.classes.push_back(cls);
  }
  cfg.model.simplified = true;
  return cfg;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ContractViolation("train: batch size must be positive");
  if (classes.empty()) throw ContractViolation("train: no problem classes");
  if (!(alpha > 0 && alpha < 1)) throw ContractViolation("train: alpha must lie in (0, 1)");
  if (eval_set_size < 2) throw ContractViolation("train: gate set needs at least two instances");
  adam.validate();
  model.validate();
  if (model.d_z != static_cast<std::size_t>(generation.geometry.slots_per_aisle)) {
    throw ContractViolation("train: model d_z=" + std::to_string(model.d_z) +
                            " differs from slots_per_aisle=" +
                            std::to_string(generation.geometry.slots_per_aisle));
  }
}

TrainConfig apply_overrides(TrainConfig cfg, const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("overrides: ") + e.what());
  }
  if (!doc.is_object()) throw DomainError("overrides: expected a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "epochs") cfg.epochs = value.get<std::size_t>();
      else if (key == "steps_per_epoch") cfg.steps_per_epoch = value.get<std::size_t>();
      else if (key == "batch_size") cfg.batch_size = value.get<std::size_t>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "eval_set_size") cfg.eval_set_size = value.get<std::size_t>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "learning_rate") cfg.adam.learning_rate = value.get<double>();
      else if (key == "d_h") cfg.model.d_h = value.get<std::size_t>();
      else if (key == "heads") cfg.model.heads = value.get<std::size_t>();
      else if (key == "layers") cfg.model.layers = value.get<std::size_t>();
      else if (key == "d_ff") cfg.model.d_ff = value.get<std::size_t>();
      else if (key == "encoding") cfg.model.encoding = parse_encoding_position(value.get<std::string>());
      else if (key == "classes") {
        cfg.classes.clear();
        for (const auto& c : value) cfg.classes.push_back(parse_problem_class(c.get<std::string>()));
      } else {
        throw DomainError("overrides: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("overrides: ") + e.what());
  }
  return cfg;
}

double advantage(Length sampled, Length baseline) {
  return (sampled - baseline) / std::max(baseline, Length{1});
}

ReinforceResult reinforce_gradient(const std::vector<AisleSequence>& batch, PolicyNetwork& policy,
                                   const PolicyNetwork& baseline, Rng& rng) {
  if (batch.empty()) throw ContractViolation("reinforce_gradient: empty batch");
  auto& params = policy.parameters();
  zero_gradients(params);

  ReinforceResult result;
  BatchStats& stats = result.stats;
  stats.baselines = greedy_lengths(baseline, batch);
  result.gradients = zeros_like(params);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Decoded sampled = policy.decode(batch[k], DecodeMode::kSample, &rng);
    const Length length = sampled.rollout.total_length;
    const double adv = advantage(length, stats.baselines[k]);
    stats.lengths.push_back(length);
    stats.advantages.push_back(adv);
    if (adv == 0 || !sampled.log_prob.requires_grad()) continue;
    autodiff::backward(autodiff::scale(sampled.log_prob, adv * inv_batch));
    accumulate(result.gradients, collect_gradients(params));
    zero_gradients(params);
  }
  stats.mean_length = mean_of(stats.lengths);
  stats.mean_baseline = mean_of(stats.baselines);
  stats.mean_advantage = mean_of(stats.advantages);
  return result;
}

TTestResult one_sided_paired_t_test(std::span<const Length> candidate,
                                    std::span<const Length> baseline) {
  if (candidate.size() != baseline.size() || candidate.size() < 2) {
    throw ContractViolation("paired t-test needs two equal-length samples of size >= 2");
  }
  const std::size_t n = candidate.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = candidate[i] - baseline[i];
  TTestResult r;
  r.mean_difference = mean_of(diff);
  double ss = 0;
  for (double d : diff) ss += (d - r.mean_difference) * (d - r.mean_difference);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0) {
    r.t_statistic = r.mean_difference < 0 ? -std::numeric_limits<double>::infinity()
                    : r.mean_difference > 0 ? std::numeric_limits<double>::infinity()
                                            : 0.0;
    r.p_value = r.mean_difference < 0 ? 0.0 : 1.0;
    return r;
  }
  r.t_statistic = r.mean_difference / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  r.p_value = boost::math::cdf(dist, r.t_statistic);
  return r;
}

bool baseline_gate(std::span<const Length> candidate, std::span<const Length> baseline,
                   double alpha) {
  return one_sided_paired_t_test(candidate, baseline).p_value < alpha;
}

TrainResult train(const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  Rng rng(cfg.seed);
  PolicyNetwork policy = options.initial ? options.initial->clone()
                                         : PolicyNetwork(cfg.model, mix_seed(cfg.seed, 0x1417));
  ModelConfig wanted = cfg.model;
  wanted.d_ff = wanted.feed_forward_width();
  if (!(policy.config() == wanted)) {
    throw ContractViolation("train: initial weights do not match the model config");
  }
  TrainResult result{policy, policy.clone(), {}, {}};
  PolicyNetwork& theta = result.policy;
  PolicyNetwork& theta_bl = result.baseline;
  if (options.checkpoint_dir) std::filesystem::create_directories(*options.checkpoint_dir);

  std::size_t gate_updates = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t step = 0; step < cfg.steps_per_epoch; ++step) {
      const ProblemClass& cls = cfg.classes[rng.uniform_index(cfg.classes.size())];
      const auto batch = make_batch(cls, cfg.batch_size, rng, cfg.generation);
      ReinforceResult r = reinforce_gradient(batch, theta, theta_bl, rng);
      HistoryRecord rec{epoch, step, r.stats.mean_length, r.stats.mean_baseline,
                        r.stats.mean_advantage, gradient_norm(r.gradients), gate_updates};
      if (!std::isfinite(rec.mean_length) || !std::isfinite(rec.mean_advantage) ||
          !all_finite(r.gradients)) {
        std::ostringstream msg;
        msg << "non-finite training signal at epoch " << epoch << " step " << step << " (class "
            << to_string(cls) << "): mean_len=" << rec.mean_length
            << " mean_advantage=" << rec.mean_advantage << " grad_norm=" << rec.grad_norm;
        throw InternalError(msg.str());
      }
      adam_step(theta.parameters(), r.gradients, cfg.adam);
      result.history.push_back(rec);
      if (options.on_step) options.on_step(rec);
    }

    std::vector<AisleSequence> gate_set;
    gate_set.reserve(cfg.eval_set_size);
    for (std::size_t i = 0; i < cfg.eval_set_size; ++i) {
      const ProblemClass& cls = cfg.classes[rng.uniform_index(cfg.classes.size())];
      gate_set.push_back(to_aisle_sequence(generate_instance(cls, rng.next(), cfg.generation)));
    }
    const auto candidate = greedy_lengths(theta, gate_set);
    const auto current = greedy_lengths(theta_bl, gate_set);
    const TTestResult test = one_sided_paired_t_test(candidate, current);
    EpochRecord er{epoch, mean_of(candidate), mean_of(current), test.p_value,
                   test.p_value < cfg.alpha};
    if (er.accepted) {
      theta_bl.copy_values_from(theta);
      ++gate_updates;
    }
    result.epochs.push_back(er);
    if (options.on_epoch) options.on_epoch(er);
    if (options.checkpoint_dir) {
      std::ostringstream name;
      name << "epoch_" << std::setw(4) << std::setfill('0') << epoch + 1 << ".bin";
      save_params(theta, *options.checkpoint_dir / name.str());
    }
  }
  return result;
}

void write_history_header(std::ostream& out) {
  out << "epoch,step,mean_len,mean_baseline,mean_advantage,grad_norm,gate_updates\n";
}

void write_history_row(std::ostream& out, const HistoryRecord& r) {
  out << r.epoch << ',' << r.step << ',' << format_length(r.mean_length) << ','
      << format_length(r.mean_baseline) << ',' << format_length(r.mean_advantage) << ','
      << format_length(r.grad_norm) << ',' << r.gate_updates << '\n';
}

}  // namespace pickroute
