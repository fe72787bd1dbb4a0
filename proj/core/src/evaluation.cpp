#include "pickroute/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "pickroute/error.hpp"
#include "pickroute/exact_solver.hpp"
#include "pickroute/parallel.hpp"
#include "pickroute/random.hpp"

namespace pickroute {
namespace {

std::string fixed(double value, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << value;
  return out.str();
}

const PolicyNetwork& require_network(const PolicyNetwork* network, const std::string& method) {
  if (network == nullptr) {
    throw ContractViolation("method '" + method + "' needs trained weights");
  }
  return *network;
}

}  // namespace

double optimality_gap(Length length, Length optimal) {
  if (!(optimal > 0)) throw ContractViolation("optimality_gap: optimal length must be positive");
  if (length < optimal) {
    throw InternalError("route length " + format_length(length) + " is below the optimum " +
                        format_length(optimal));
  }
  return 100.0 * (length - optimal) / optimal;
}

Method parse_method(const std::string& name) {
  if (name == "optimal") return {MethodKind::kOptimal, HeuristicKind::kSShape, name};
  if (name == "model") return {MethodKind::kModel, HeuristicKind::kSShape, name};
  if (name == "model-simplified") return {MethodKind::kSimplifiedModel, HeuristicKind::kSShape, name};
  return {MethodKind::kHeuristic, parse_heuristic(name), name};
}

const GapRow& GapReport::at(const ProblemClass& cls, const std::string& method) const {
  for (const auto& row : rows)
    if (row.cls == cls && row.method == method) return row;
  throw ContractViolation("report has no row for class " + to_string(cls) + " method " + method);
}

std::uint64_t instance_seed(std::uint64_t seed, const ProblemClass& cls, std::size_t index) {
  std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(cls.n_aisles));
  s = mix_seed(s, static_cast<std::uint64_t>(cls.n_items));
  s = mix_seed(s, static_cast<std::uint64_t>(cls.mode));
  return mix_seed(s, index);
}

GapReport evaluate(const EvalConfig& cfg) {
  if (cfg.methods.empty()) throw ContractViolation("evaluate: no methods");
  if (cfg.classes.empty()) throw ContractViolation("evaluate: no problem classes");
  if (cfg.instances_per_class == 0) throw ContractViolation("evaluate: zero instances per class");
  for (const auto& m : cfg.methods) {
    if (m.kind == MethodKind::kModel) require_network(cfg.model, m.name);
    if (m.kind == MethodKind::kSimplifiedModel) require_network(cfg.simplified_model, m.name);
  }

  const std::size_t n_methods = cfg.methods.size();
  const std::size_t per_class = cfg.instances_per_class;
  const std::size_t total = cfg.classes.size() * per_class;
  std::vector<double> gaps(total * n_methods);
  std::vector<double> runtimes(total * n_methods);

  parallel_for(
      total,
      [&](std::size_t job) {
        autodiff::NoGradGuard no_grad;
        const ProblemClass& cls = cfg.classes[job / per_class];
        const std::uint64_t seed = instance_seed(cfg.seed, cls, job % per_class);
        const Instance inst = generate_instance(cls, seed, cfg.generation);
        const AisleSequence seq = to_aisle_sequence(inst);
        const Length optimal = solve_optimal(seq).length;
        for (std::size_t m = 0; m < n_methods; ++m) {
          const Method& method = cfg.methods[m];
          const auto start = std::chrono::steady_clock::now();
          Length length = 0;
          switch (method.kind) {
            case MethodKind::kOptimal:
              length = solve_optimal(seq).length;
              break;
            case MethodKind::kHeuristic:
              length = run_heuristic(method.heuristic, seq).total_length;
              break;
            case MethodKind::kModel:
              length = cfg.model->decode(seq, DecodeMode::kGreedy).rollout.total_length;
              break;
            case MethodKind::kSimplifiedModel:
              length = cfg.simplified_model->decode(seq, DecodeMode::kGreedy).rollout.total_length;
              break;
          }
          const auto elapsed = std::chrono::steady_clock::now() - start;
          if (length < optimal) {
            throw InternalError("method " + method.name + " beat the optimum on class " +
                                to_string(cls) + " instance seed " + std::to_string(seed) + ": " +
                                format_length(length) + " < " + format_length(optimal));
          }
          gaps[job * n_methods + m] = optimality_gap(length, optimal);
          runtimes[job * n_methods + m] =
              std::chrono::duration<double, std::milli>(elapsed).count();
        }
      },
      cfg.threads);

  GapReport report;
  for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      GapRow row{cfg.classes[c], cfg.methods[m].name, per_class, 0, 0, 0};
      double sum = 0, time = 0;
      for (std::size_t i = 0; i < per_class; ++i) {
        sum += gaps[(c * per_class + i) * n_methods + m];
        time += runtimes[(c * per_class + i) * n_methods + m];
      }
      const auto n = static_cast<double>(per_class);
      row.mean_gap = sum / n;
      row.mean_runtime_ms = time / n;
      if (per_class > 1) {
        double ss = 0;
        for (std::size_t i = 0; i < per_class; ++i) {
          const double d = gaps[(c * per_class + i) * n_methods + m] - row.mean_gap;
          ss += d * d;
        }
        row.std_error = std::sqrt(ss / (n - 1)) / std::sqrt(n);
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_csv(std::ostream& out, const GapReport& report, bool include_runtime) {
  out << "class,mode,method,count,mean_gap,std_error";
  if (include_runtime) out << ",mean_runtime_ms";
  out << '\n';
  for (const auto& row : report.rows) {
    out << row.cls.n_aisles << 'x' << row.cls.n_items << ',' << to_string(row.cls.mode) << ','
        << row.method << ',' << row.count << ',' << fixed(row.mean_gap, 6) << ','
        << fixed(row.std_error, 6);
    if (include_runtime) out << ',' << fixed(row.mean_runtime_ms, 4);
    out << '\n';
  }
}

void write_markdown(std::ostream& out, const GapReport& report) {
  std::vector<std::string> methods;
  std::vector<ProblemClass> classes;
  for (const auto& row : report.rows) {
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) {
      methods.push_back(row.method);
    }
    if (std::find(classes.begin(), classes.end(), row.cls) == classes.end()) {
      classes.push_back(row.cls);
    }
  }
  out << "| aisles | items |";
  for (const auto& m : methods) out << ' ' << m << " |";
  out << "\n|---:|---:|";
  for (std::size_t i = 0; i < methods.size(); ++i) out << "---:|";
  out << '\n';
  for (const auto& cls : classes) {
    out << "| " << cls.n_aisles << " | " << cls.n_items << " |";
    for (const auto& m : methods) out << ' ' << fixed(report.at(cls, m).mean_gap, 2) << " |";
    out << '\n';
  }
}

}  // namespace pickroute
