#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pickroute/heuristics.hpp"
#include "pickroute/policy.hpp"
#include "pickroute/warehouse.hpp"

namespace pickroute {

/// 100 * (length - optimal) / optimal. Throws InternalError when length is
/// below optimal and ContractViolation when optimal is not positive.
double optimality_gap(Length length, Length optimal);

enum class MethodKind { kOptimal, kHeuristic, kModel, kSimplifiedModel };

struct Method {
  MethodKind kind = MethodKind::kOptimal;
  HeuristicKind heuristic = HeuristicKind::kSShape;
  std::string name;
};

/// "optimal", "sshape", "return", "largestgap", "composite", "model",
/// "model-simplified".
Method parse_method(const std::string& name);

struct EvalConfig {
  std::vector<Method> methods;
  std::vector<ProblemClass> classes;
  std::size_t instances_per_class = 100;
  std::uint64_t seed = 1;
  GenerationOptions generation;
  /// Required by "model" and "model-simplified" respectively.
  const PolicyNetwork* model = nullptr;
  const PolicyNetwork* simplified_model = nullptr;
  /// 0 = worker_count().
  std::size_t threads = 0;
};

struct GapRow {
  ProblemClass cls;
  std::string method;
  std::size_t count = 0;
  double mean_gap = 0;
  double std_error = 0;
  double mean_runtime_ms = 0;
};

struct GapReport {
  std::vector<GapRow> rows;  // class-major, methods in configured order

  const GapRow& at(const ProblemClass& cls, const std::string& method) const;
};

/// Seed of instance `index` in `cls`; independent of the class list order.
std::uint64_t instance_seed(std::uint64_t seed, const ProblemClass& cls, std::size_t index);

/// Generates the instances, solves each optimally once and scores every
/// method. Rows are ordered by class then method, so the report does not
/// depend on scheduling.
GapReport evaluate(const EvalConfig& cfg);

/// Columns: class,mode,method,count,mean_gap,std_error[,mean_runtime_ms].
/// Runtime is opt-in because it is the only non-deterministic column.
void write_csv(std::ostream& out, const GapReport& report, bool include_runtime = false);
/// One row per class, one column per method, mean gap in percent.
void write_markdown(std::ostream& out, const GapReport& report);

}  // namespace pickroute
