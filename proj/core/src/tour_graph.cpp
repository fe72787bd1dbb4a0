#include "pickroute/tour_graph.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <ostream>

#include "pickroute/error.hpp"

namespace pickroute {
namespace {

using S = EquivalenceState;
constexpr std::optional<S> kNone = std::nullopt;

// Rows: UU1C, 0E1C, E01C, EE1C, EE2C, 000C.
// Columns: 1pass, top, bottom, gap.
constexpr std::array<std::array<std::optional<S>, 4>, 6> kVerticalTable{{
    {S::kEE1C, S::kUU1C, S::kUU1C, S::kUU1C},
    {S::kUU1C, S::kEE2C, S::k0E1C, S::kEE2C},
    {S::kUU1C, S::kE01C, S::kEE2C, S::kEE2C},
    {S::kUU1C, S::kEE1C, S::kEE1C, S::kEE1C},
    {S::kUU1C, S::kEE2C, S::kEE2C, S::kEE2C},
    {S::kUU1C, S::kE01C, S::k0E1C, S::kEE2C},
}};

// Columns: 11, 20, 02, 22.
constexpr std::array<std::array<std::optional<S>, 4>, 6> kHorizontalTable{{
    {S::kUU1C, kNone, kNone, kNone},
    {kNone, kNone, S::k0E1C, S::kEE2C},
    {kNone, S::kE01C, kNone, S::kEE2C},
    {kNone, S::kE01C, S::k0E1C, S::kEE1C},
    {kNone, kNone, kNone, S::kEE2C},
    {kNone, kNone, kNone, kNone},
}};

std::size_t row(S state) { return static_cast<std::size_t>(state); }

}  // namespace

std::string_view to_string(EquivalenceState state) {
  switch (state) {
    case S::kUU1C: return "UU1C";
    case S::k0E1C: return "0E1C";
    case S::kE01C: return "E01C";
    case S::kEE1C: return "EE1C";
    case S::kEE2C: return "EE2C";
    case S::kInitial000C: return "000C";
  }
  return "?";
}

std::string_view to_string(VerticalAction action) {
  switch (action) {
    case VerticalAction::kOnePass: return "1pass";
    case VerticalAction::kTop: return "top";
    case VerticalAction::kBottom: return "bottom";
    case VerticalAction::kGap: return "gap";
  }
  return "?";
}

std::string_view to_string(HorizontalAction action) {
  switch (action) {
    case HorizontalAction::kH11: return "11";
    case HorizontalAction::kH20: return "20";
    case HorizontalAction::kH02: return "02";
    case HorizontalAction::kH22: return "22";
  }
  return "?";
}

std::string to_string(ActionPair pair) {
  return "(" + std::string(to_string(pair.vertical)) + "," +
         std::string(to_string(pair.horizontal)) + ")";
}

std::optional<EquivalenceState> parse_equivalence_state(std::string_view text) {
  for (std::size_t i = 0; i < kNumEquivalenceStates; ++i) {
    const auto s = static_cast<S>(i);
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::optional<EquivalenceState> transition(EquivalenceState state, VerticalAction action) {
  return kVerticalTable[row(state)][static_cast<std::size_t>(action)];
}

std::optional<EquivalenceState> transition(EquivalenceState state, HorizontalAction action) {
  return kHorizontalTable[row(state)][static_cast<std::size_t>(action)];
}

bool is_terminal_valid(EquivalenceState state) {
  return state == S::kE01C || state == S::k0E1C || state == S::kEE1C;
}

Length largest_interior_gap(std::span<const Length> ys) {
  Length best = 0;
  for (std::size_t i = 1; i < ys.size(); ++i) best = std::max(best, ys[i] - ys[i - 1]);
  return best;
}

Length vertical_cost(VerticalAction action, std::span<const Length> ys, Length aisle_length) {
  if (ys.empty()) throw ContractViolation("vertical_cost: aisle holds no picks");
  switch (action) {
    case VerticalAction::kOnePass:
      return aisle_length;
    case VerticalAction::kTop:
      return 2 * (aisle_length - ys.front());
    case VerticalAction::kBottom:
      return 2 * ys.back();
    case VerticalAction::kGap:
      if (ys.size() < 2) throw InvalidActionError("gap needs at least two picks in the aisle", 0);
      return 2 * (aisle_length - largest_interior_gap(ys));
  }
  throw ContractViolation("vertical_cost: unknown action");
}

Length horizontal_cost(HorizontalAction action, Length x, Length x_next) {
  if (!(x_next > x)) {
    throw ContractViolation("horizontal_cost: aisles must be strictly increasing in x");
  }
  const Length dx = x_next - x;
  return action == HorizontalAction::kH22 ? 4 * dx : 2 * dx;
}

ActionMask valid_action_pairs(EquivalenceState state, const AisleSequence& seq,
                              std::size_t position, bool simplified) {
  if (position >= seq.size()) {
    throw ContractViolation("valid_action_pairs: position past the last aisle");
  }
  const bool last = position + 1 == seq.size();
  const bool next_is_last = position + 2 == seq.size();
  const std::size_t picks = seq[position].ys.size();

  ActionMask mask;
  for (std::size_t idx = 0; idx < kNumActionPairs; ++idx) {
    const ActionPair pair = ActionPair::from_index(idx);
    if (pair.vertical == VerticalAction::kGap && (simplified || picks < 2)) continue;
    const auto after_vertical = transition(state, pair.vertical);
    if (!after_vertical) continue;
    if (last) {
      if (pair.horizontal == HorizontalAction::kH11 && is_terminal_valid(*after_vertical)) {
        mask.set(idx);
      }
      continue;
    }
    const auto after_horizontal = transition(*after_vertical, pair.horizontal);
    if (!after_horizontal) continue;
    if (next_is_last && *after_horizontal == S::kEE2C) continue;
    mask.set(idx);
  }
  return mask;
}

Length step_cost(const AisleSequence& seq, std::size_t position, ActionPair pair) {
  const NonEmptyAisle& aisle = seq[position];
  Length cost = vertical_cost(pair.vertical, aisle.ys, seq.aisle_length());
  if (position + 1 < seq.size()) {
    cost += horizontal_cost(pair.horizontal, aisle.x, seq[position + 1].x);
  }
  return cost;
}

EnvState initial_env(const AisleSequence& seq) {
  if (seq.size() == 0) throw ContractViolation("initial_env: empty aisle sequence");
  EnvState env;
  env.seq = &seq;
  return env;
}

ActionMask valid_action_pairs(const EnvState& env, bool simplified) {
  if (env.seq == nullptr || env.terminal()) {
    throw ContractViolation("valid_action_pairs: environment is terminal");
  }
  const ActionMask mask = valid_action_pairs(env.eq_state, *env.seq, env.cursor, simplified);
  if (mask.none()) {
    throw InternalError("no valid action pair in state " + std::string(to_string(env.eq_state)) +
                        " at aisle position " + std::to_string(env.cursor));
  }
  return mask;
}

StepResult step(const EnvState& env, ActionPair pair) {
  if (env.seq == nullptr || env.terminal()) {
    throw InvalidActionError("step: environment is already terminal", env.history.size());
  }
  const auto mask = valid_action_pairs(env.eq_state, *env.seq, env.cursor);
  if (!mask.test(pair.index())) {
    throw InvalidActionError("action " + to_string(pair) + " is invalid in state " +
                                 std::string(to_string(env.eq_state)),
                             env.history.size());
  }
  StepResult result{env, step_cost(*env.seq, env.cursor, pair)};
  EnvState& next = result.next;
  EquivalenceState s = *transition(env.eq_state, pair.vertical);
  if (env.cursor + 1 < env.seq->size()) s = *transition(s, pair.horizontal);
  next.eq_state = s;
  next.cursor = env.cursor + 1;
  next.accumulated_cost = env.accumulated_cost + result.cost;
  next.history.push_back(pair);
  return result;
}

Rollout replay(std::span<const ActionPair> actions, const AisleSequence& seq) {
  EnvState env = initial_env(seq);
  Rollout rollout;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (env.terminal()) {
      throw InvalidActionError("action sequence longer than the aisle sequence", i);
    }
    auto [next, cost] = step(env, actions[i]);
    env = std::move(next);
    rollout.actions.push_back(actions[i]);
    rollout.step_costs.push_back(cost);
  }
  if (!env.terminal()) {
    throw InvalidActionError("action sequence ends before the last aisle", actions.size());
  }
  rollout.total_length = env.accumulated_cost;
  return rollout;
}

Length rollout_length(std::span<const ActionPair> actions, const AisleSequence& seq) {
  return replay(actions, seq).total_length;
}

std::string format_length(Length value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

void write_rollout(std::ostream& out, const Rollout& rollout, const AisleSequence& seq) {
  if (rollout.actions.size() != seq.size() || rollout.step_costs.size() != seq.size()) {
    throw ContractViolation("write_rollout: rollout does not match the aisle sequence");
  }
  for (std::size_t i = 0; i < rollout.actions.size(); ++i) {
    out << seq[i].aisle << ' ' << to_string(rollout.actions[i].vertical) << ' '
        << to_string(rollout.actions[i].horizontal) << ' '
        << format_length(rollout.step_costs[i]) << '\n';
  }
  out << "total " << format_length(rollout.total_length) << '\n';
}

}  // namespace pickroute
