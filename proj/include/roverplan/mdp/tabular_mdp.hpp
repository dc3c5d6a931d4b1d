#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <ranges>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace roverplan::mdp {

using StateIndex = std::uint32_t;
using ActionIndex = std::uint32_t;

/// Placeholder action stored for terminal states in a Policy.
inline constexpr ActionIndex kNoAction = std::numeric_limits<ActionIndex>::max();

/// One successor of a (state, action) pair. The reward is attached to the
/// edge because r depends on (s, a, s').
struct TransitionEntry {
    StateIndex next;
    double probability;
    double reward;
};

/// Finite MDP in a compressed sparse layout.
///
/// Entries are grouped by state, then by action. Each entry stores the
/// successor plus an index into a table of distinct (probability, reward)
/// pairs; grid-world style MDPs have only a handful of those, so an entry is
/// eight bytes regardless of the reward model.
class TabularMdp {
public:
    struct Outcome {
        double probability;
        double reward;
    };
    struct PackedEntry {
        StateIndex next;
        std::uint32_t outcome;
    };

    TabularMdp() = default;

    std::size_t state_count() const { return state_count_; }
    std::size_t action_count() const { return action_count_; }
    double discount() const { return discount_; }
    std::size_t entry_count() const { return entries_.size(); }

    bool is_terminal(StateIndex s) const { return terminal_[s] != 0; }

    /// True when (s, a) has at least one stored successor.
    bool has_action(StateIndex s, ActionIndex a) const {
        return per_action_[static_cast<std::size_t>(s) * action_count_ + a] != 0;
    }

    std::span<const PackedEntry> packed(StateIndex s, ActionIndex a) const;
    std::span<const PackedEntry> packed_state(StateIndex s) const {
        return {entries_.data() + state_offset_[s], entries_.data() + state_offset_[s + 1]};
    }
    std::uint16_t entries_for(StateIndex s, ActionIndex a) const {
        return per_action_[static_cast<std::size_t>(s) * action_count_ + a];
    }
    const Outcome& outcome(std::uint32_t id) const { return outcomes_[id]; }
    std::span<const Outcome> outcome_table() const { return outcomes_; }

    /// Successors of (s, a) as TransitionEntry values.
    auto transitions(StateIndex s, ActionIndex a) const {
        return packed(s, a) | std::views::transform([this](const PackedEntry& e) {
                   const Outcome& o = outcomes_[e.outcome];
                   return TransitionEntry{e.next, o.probability, o.reward};
               });
    }

    /// Returns a copy with every reward multiplied by `factor`.
    TabularMdp with_scaled_rewards(double factor) const;

    /// Checks the structural invariants; throws ConfigError naming the first
    /// offending (state, action).
    void validate() const;

private:
    friend class TabularMdpBuilder;

    std::size_t state_count_ = 0;
    std::size_t action_count_ = 0;
    double discount_ = 1.0;
    std::vector<std::uint32_t> state_offset_;
    std::vector<std::uint16_t> per_action_;
    std::vector<PackedEntry> entries_;
    std::vector<Outcome> outcomes_;
    std::vector<std::uint8_t> terminal_;
};

/// Incremental construction of a TabularMdp. Transitions must be added in
/// nondecreasing (state, action) order; zero-probability entries are dropped.
class TabularMdpBuilder {
public:
    TabularMdpBuilder(std::size_t state_count, std::size_t action_count, double discount);

    void reserve(std::size_t entries);
    void mark_terminal(StateIndex s);
    void add(StateIndex s, ActionIndex a, StateIndex next, double probability, double reward);

    TabularMdp build();

private:
    std::uint32_t intern(double probability, double reward);
    void advance_to(StateIndex s);

    TabularMdp mdp_;
    StateIndex current_state_ = 0;
    ActionIndex current_action_ = 0;
    struct KeyHash {
        std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
            return std::hash<std::uint64_t>{}(k.first * 0x9e3779b97f4a7c15ULL ^ k.second);
        }
    };
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::uint32_t, KeyHash> interned_;
};

struct ValueFunction {
    std::vector<double> values;
};

struct Policy {
    std::vector<ActionIndex> actions;
};

struct TraceStep {
    StateIndex state;
    ActionIndex action;
    double reward;
};

/// A realized episode. `final_state` is the state reached after the last step.
struct Trace {
    std::vector<TraceStep> steps;
    StateIndex final_state = 0;
    double discounted_return = 0.0;
    double undiscounted_return = 0.0;
};

/// Sum of discount^k * reward_k over the steps.
double discounted_sum(std::span<const TraceStep> steps, double discount);

struct SolveReport {
    ValueFunction value_function;
    Policy policy;
    std::size_t iterations = 0;
    double bellman_residual = 0.0;
    double wall_time = 0.0;
    bool converged = false;
    /// Max-norm change after each sweep.
    std::vector<double> residual_history;
    /// (state, action) backups performed per sweep.
    std::uint64_t backups_per_sweep = 0;
};

} // namespace roverplan::mdp
