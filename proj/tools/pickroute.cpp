// pickroute: generate instances, solve them, train the policy and report
// optimality gaps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef PICKROUTE_CLI11_SINGLE_HEADER
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif

#include "pickroute/error.hpp"
#include "pickroute/evaluation.hpp"
#include "pickroute/exact_solver.hpp"
#include "pickroute/heuristics.hpp"
#include "pickroute/instance_io.hpp"
#include "pickroute/policy.hpp"
#include "pickroute/trainer.hpp"

namespace fs = std::filesystem;
using namespace pickroute;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::vector<ProblemClass> parse_classes(const std::vector<std::string>& texts, DistributionMode mode) {
  std::vector<ProblemClass> classes;
  for (const auto& t : texts) {
    if (t == "all") {
      const auto all = benchmark_classes(mode);
      classes.insert(classes.end(), all.begin(), all.end());
    } else {
      classes.push_back(parse_problem_class(t, mode));
    }
  }
  return classes;
}

struct GenerateArgs {
  std::string cls = "5,30";
  std::size_t count = 1;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string mode = "normal";
};

int run_generate(const GenerateArgs& a) {
  const ProblemClass cls = parse_problem_class(a.cls, parse_distribution_mode(a.mode));
  fs::create_directories(a.out);
  for (std::size_t i = 0; i < a.count; ++i) {
    const Instance inst = generate_instance(cls, instance_seed(a.seed, cls, i));
    std::ostringstream name;
    name << "instance_" << cls.n_aisles << 'x' << cls.n_items << '_' << i << ".json";
    const fs::path path = fs::path(a.out) / name.str();
    save_instance(inst, path);
    std::cout << path.string() << '\n';
  }
  return 0;
}

struct SolveArgs {
  std::string method = "optimal";
  std::string instance;
  std::string weights;
  bool dump_route = false;
};

int run_solve(const SolveArgs& a) {
  const Instance inst = load_instance(a.instance);
  const AisleSequence seq = to_aisle_sequence(inst);
  Rollout rollout;
  if (a.method == "optimal") {
    rollout = solve_optimal(seq).rollout;
  } else if (a.method == "model") {
    if (a.weights.empty()) throw ContractViolation("--method model needs --weights");
    const PolicyNetwork net = load_params(a.weights);
    autodiff::NoGradGuard no_grad;
    rollout = net.decode(seq, DecodeMode::kGreedy).rollout;
  } else {
    rollout = run_heuristic(parse_heuristic(a.method), seq);
  }
  if (a.dump_route) {
    write_rollout(std::cout, rollout, seq);
  } else {
    std::cout << format_length(rollout.total_length) << '\n';
  }
  return 0;
}

struct TrainArgs {
  std::string preset = "standard";
  std::string overrides;
  std::string out_weights;
  std::string history;
  std::string checkpoints;
  std::string init_weights;
};

int run_train(const TrainArgs& a) {
  TrainConfig cfg;
  if (a.preset == "standard") {
    cfg = TrainConfig::standard();
  } else if (a.preset == "simplified") {
    cfg = TrainConfig::simplified();
  } else {
    throw ContractViolation("unknown preset '" + a.preset + "'");
  }
  if (!a.overrides.empty()) {
    std::ifstream in(a.overrides);
    if (!in) throw std::runtime_error("cannot open " + a.overrides);
    std::ostringstream text;
    text << in.rdbuf();
    cfg = apply_overrides(cfg, text.str());
  }

  std::optional<std::ofstream> history;
  if (!a.history.empty()) {
    history = open_output(a.history);
    write_history_header(*history);
  }
  std::optional<PolicyNetwork> initial;
  TrainOptions options;
  if (!a.init_weights.empty()) {
    initial = load_params(a.init_weights);
    options.initial = &*initial;
  }
  if (!a.checkpoints.empty()) options.checkpoint_dir = a.checkpoints;
  options.on_step = [&](const HistoryRecord& r) {
    if (history) {
      write_history_row(*history, r);
      history->flush();
    }
  };
  options.on_epoch = [&](const EpochRecord& e) {
    std::cerr << "epoch " << e.epoch + 1 << '/' << cfg.epochs << " candidate "
              << e.candidate_mean << " baseline " << e.baseline_mean << " p " << e.p_value
              << (e.accepted ? " (baseline updated)" : "") << '\n';
  };
  const TrainResult result = train(cfg, options);
  save_params(result.policy, a.out_weights);
  return 0;
}

struct EvaluateArgs {
  std::vector<std::string> methods{"optimal", "sshape", "return", "largestgap", "composite"};
  std::vector<std::string> classes{"all"};
  std::string mode = "normal";
  std::string weights;
  std::string simplified_weights;
  std::uint64_t seed = 1;
  std::size_t instances = 100;
  std::string csv;
  std::string markdown;
  bool timing = false;
};

int run_evaluate(const EvaluateArgs& a) {
  EvalConfig cfg;
  for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
  cfg.classes = parse_classes(a.classes, parse_distribution_mode(a.mode));
  cfg.instances_per_class = a.instances;
  cfg.seed = a.seed;
  std::optional<PolicyNetwork> model, simplified;
  if (!a.weights.empty()) {
    model = load_params(a.weights);
    cfg.model = &*model;
  }
  if (!a.simplified_weights.empty()) {
    simplified = load_params(a.simplified_weights);
    cfg.simplified_model = &*simplified;
  }
  const GapReport report = evaluate(cfg);
  if (!a.csv.empty()) {
    auto out = open_output(a.csv);
    write_csv(out, report, a.timing);
  }
  if (!a.markdown.empty()) {
    auto out = open_output(a.markdown);
    write_markdown(out, report);
  }
  if (a.csv.empty() && a.markdown.empty()) write_markdown(std::cout, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order picker routing: exact solver, heuristics and a learned policy"};
  app.set_config("--config", "", "Read option defaults from a TOML/INI file");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write random instances as JSON files");
  generate->add_option("--class", gen.cls, "Problem class 'aisles,items'");
  generate->add_option("--count", gen.count, "Number of instances");
  generate->add_option("--seed", gen.seed, "Base seed");
  generate->add_option("--out", gen.out, "Output directory");
  generate->add_option("--mode", gen.mode, "Location distribution")->check(CLI::IsMember({"normal", "uniform"}));

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Route one instance");
  solve->add_option("--method", sol.method, "optimal|sshape|return|largestgap|composite|model");
  solve->add_option("--instance", sol.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--weights", sol.weights, "Weights for --method model");
  solve->add_flag("--dump-route", sol.dump_route, "Print the per-aisle actions");

  TrainArgs tr;
  auto* trainer = app.add_subcommand("train", "Train the policy with REINFORCE");
  trainer->add_option("--preset", tr.preset, "standard|simplified")->check(CLI::IsMember({"standard", "simplified"}));
  trainer->add_option("--overrides", tr.overrides, "JSON file overriding preset values");
  trainer->add_option("--out-weights", tr.out_weights, "Where to write the final weights")->required();
  trainer->add_option("--history", tr.history, "Training history CSV");
  trainer->add_option("--checkpoints", tr.checkpoints, "Directory for per-epoch weights");
  trainer->add_option("--init-weights", tr.init_weights, "Resume from these weights");

  EvaluateArgs ev;
  auto* evaluator = app.add_subcommand("evaluate", "Report mean optimality gaps per class");
  evaluator->add_option("--methods", ev.methods, "Methods to score")->delimiter(',');
  evaluator->add_option("--classes", ev.classes, "Classes 'A,M' separated by spaces, or 'all'");
  evaluator->add_option("--mode", ev.mode, "Location distribution")->check(CLI::IsMember({"normal", "uniform"}));
  evaluator->add_option("--weights", ev.weights, "Weights for method 'model'");
  evaluator->add_option("--simplified-weights", ev.simplified_weights, "Weights for 'model-simplified'");
  evaluator->add_option("--seed", ev.seed, "Base seed");
  evaluator->add_option("--instances", ev.instances, "Instances per class");
  evaluator->add_option("--csv", ev.csv, "CSV output path");
  evaluator->add_option("--markdown", ev.markdown, "Markdown output path");
  evaluator->add_flag("--timing", ev.timing, "Add mean runtime to the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*solve) return run_solve(sol);
    if (*trainer) return run_train(tr);
    if (*evaluator) return run_evaluate(ev);
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
