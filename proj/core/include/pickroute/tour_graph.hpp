#pragma once

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pickroute/warehouse.hpp"

namespace pickroute {

/// Equivalence class of a partial tour subgraph: parity of the rightmost
/// back (first symbol) and front (second symbol) cross-aisle nodes, then the
/// number of connected components.
enum class EquivalenceState : std::uint8_t {
  kUU1C,
  k0E1C,
  kE01C,
  kEE1C,
  kEE2C,
  kInitial000C,
};
inline constexpr std::size_t kNumEquivalenceStates = 6;

/// How a pick aisle is covered.
enum class VerticalAction : std::uint8_t {
  kOnePass,  // single traversal front to back
  kTop,      // in and out from the back cross-aisle
  kBottom,   // in and out from the front cross-aisle
  kGap,      // in and out from both ends, skipping the largest gap
};

/// Cross-aisle edges between consecutive non-empty aisles:
/// (number of back passes, number of front passes).
enum class HorizontalAction : std::uint8_t { kH11, kH20, kH02, kH22 };

inline constexpr std::size_t kNumVerticalActions = 4;
inline constexpr std::size_t kNumHorizontalActions = 4;
inline constexpr std::size_t kNumActionPairs = 16;

struct ActionPair {
  VerticalAction vertical = VerticalAction::kOnePass;
  HorizontalAction horizontal = HorizontalAction::kH11;

  /// Policy-head index: 4 * vertical + horizontal.
  constexpr std::size_t index() const {
    return kNumHorizontalActions * static_cast<std::size_t>(vertical) +
           static_cast<std::size_t>(horizontal);
  }
  static constexpr ActionPair from_index(std::size_t index) {
    return {static_cast<VerticalAction>(index / kNumHorizontalActions),
            static_cast<HorizontalAction>(index % kNumHorizontalActions)};
  }

  bool operator==(const ActionPair&) const = default;
};

using ActionMask = std::bitset<kNumActionPairs>;

std::string_view to_string(EquivalenceState state);
std::string_view to_string(VerticalAction action);
std::string_view to_string(HorizontalAction action);
std::string to_string(ActionPair pair);

std::optional<EquivalenceState> parse_equivalence_state(std::string_view text);

/// Vertical transition table; std::nullopt for combinations that are never
/// valid.
std::optional<EquivalenceState> transition(EquivalenceState state, VerticalAction action);
/// Horizontal transition table; std::nullopt marks the dashed entries (odd
/// degrees, no completion can connect, or the initial state).
std::optional<EquivalenceState> transition(EquivalenceState state, HorizontalAction action);

/// A complete tour graph must end in one of E01C, 0E1C, EE1C.
bool is_terminal_valid(EquivalenceState state);

/// Largest difference between consecutive sorted values; 0 for fewer than two.
Length largest_interior_gap(std::span<const Length> ys);

/// Length of the vertical edges added for one aisle. ys sorted ascending,
/// non-empty; kGap needs at least two entries (InvalidActionError otherwise).
Length vertical_cost(VerticalAction action, std::span<const Length> ys, Length aisle_length);

/// Length of the cross-aisle edges between x and x_next (> x).
Length horizontal_cost(HorizontalAction action, Length x, Length x_next);

/// Valid pairs for the aisle at `position` of `seq` when the partial tour is
/// in `state`. In the final aisle only (vertical, H11) pairs can be valid; the
/// horizontal half is a zero-cost placeholder. `simplified` removes every
/// kGap pair.
ActionMask valid_action_pairs(EquivalenceState state, const AisleSequence& seq,
                              std::size_t position, bool simplified = false);

/// Cost of `pair` at `position`, without validity checks.
Length step_cost(const AisleSequence& seq, std::size_t position, ActionPair pair);

/// Environment state while constructing a tour aisle by aisle. `seq` must
/// outlive the state.
struct EnvState {
  const AisleSequence* seq = nullptr;
  std::size_t cursor = 0;  // index of the next aisle to act on
  EquivalenceState eq_state = EquivalenceState::kInitial000C;
  Length accumulated_cost = 0;
  std::vector<ActionPair> history;

  bool terminal() const { return seq != nullptr && cursor >= seq->size(); }
};

EnvState initial_env(const AisleSequence& seq);

/// Valid pairs in a non-terminal env. Throws InternalError if the set is
/// empty, which the masking rules make unreachable.
ActionMask valid_action_pairs(const EnvState& env, bool simplified = false);

struct StepResult {
  EnvState next;
  Length cost = 0;
};

/// Applies the vertical transition, then (outside the final aisle) the
/// horizontal one. Throws InvalidActionError for masked pairs.
StepResult step(const EnvState& env, ActionPair pair);

/// A complete aisle-by-aisle tour.
struct Rollout {
  std::vector<ActionPair> actions;
  std::vector<Length> step_costs;
  Length total_length = 0;
  /// Per-step log-probabilities when produced by a stochastic policy.
  std::vector<double> log_probs;
};

/// Replays `actions` from the initial state. Throws InvalidActionError with
/// the failing index for invalid steps, including sequences that stop early
/// or overrun the aisles.
Rollout replay(std::span<const ActionPair> actions, const AisleSequence& seq);

Length rollout_length(std::span<const ActionPair> actions, const AisleSequence& seq);

/// Text form: one line "aisle_index vertical horizontal cost" per aisle, then
/// "total <length>".
void write_rollout(std::ostream& out, const Rollout& rollout, const AisleSequence& seq);

/// Shortest round-trip decimal for a length.
std::string format_length(Length value);

}  // namespace pickroute
