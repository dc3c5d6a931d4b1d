#include "roverplan/mdp/tabular_mdp.hpp"

#include "roverplan/errors.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace roverplan::mdp {

namespace {

std::string where(StateIndex s, ActionIndex a) {
    return "(state " + std::to_string(s) + ", action " + std::to_string(a) + ")";
}

} // namespace

std::span<const TabularMdp::PackedEntry> TabularMdp::packed(StateIndex s, ActionIndex a) const {
    const std::size_t row = static_cast<std::size_t>(s) * action_count_;
    std::size_t begin = state_offset_[s];
    for (ActionIndex b = 0; b < a; ++b)
        begin += per_action_[row + b];
    return {entries_.data() + begin, per_action_[row + a]};
}

TabularMdp TabularMdp::with_scaled_rewards(double factor) const {
    TabularMdp copy = *this;
    for (auto& o : copy.outcomes_)
        o.reward *= factor;
    return copy;
}

void TabularMdp::validate() const {
    if (!(discount_ > 0.0 && discount_ <= 1.0))
        throw ConfigError("discount must lie in (0, 1], got " + std::to_string(discount_));
    for (StateIndex s = 0; s < state_count_; ++s) {
        const bool terminal = is_terminal(s);
        bool any_action = false;
        for (ActionIndex a = 0; a < action_count_; ++a) {
            const auto entries = packed(s, a);
            if (entries.empty())
                continue;
            if (terminal)
                throw ConfigError("terminal state has outgoing transitions at " + where(s, a));
            any_action = true;
            double total = 0.0;
            for (const auto& e : entries) {
                const Outcome& o = outcomes_[e.outcome];
                if (e.next >= state_count_)
                    throw ConfigError("successor out of range at " + where(s, a));
                if (!(o.probability > 0.0) || !std::isfinite(o.probability))
                    throw ConfigError("non-positive transition probability at " + where(s, a));
                if (!std::isfinite(o.reward))
                    throw ConfigError("non-finite reward at " + where(s, a));
                total += o.probability;
            }
            if (std::abs(total - 1.0) > 1e-9)
                throw ConfigError("transition probabilities sum to " + std::to_string(total) +
                                  " at " + where(s, a));
        }
        if (!terminal && !any_action)
            throw ConfigError("non-terminal state " + std::to_string(s) + " has no legal action");
    }
}

TabularMdpBuilder::TabularMdpBuilder(std::size_t state_count, std::size_t action_count,
                                     double discount) {
    if (state_count == 0 || action_count == 0)
        throw ConfigError("an MDP needs at least one state and one action");
    if (state_count >= std::numeric_limits<StateIndex>::max())
        throw ResourceError("too many states for 32-bit state indices");
    mdp_.state_count_ = state_count;
    mdp_.action_count_ = action_count;
    mdp_.discount_ = discount;
    mdp_.state_offset_.assign(state_count + 1, 0);
    mdp_.per_action_.assign(state_count * action_count, 0);
    mdp_.terminal_.assign(state_count, 0);
}

void TabularMdpBuilder::reserve(std::size_t entries) { mdp_.entries_.reserve(entries); }

void TabularMdpBuilder::mark_terminal(StateIndex s) {
    if (s >= mdp_.state_count_)
        throw ContractViolation("terminal state out of range");
    mdp_.terminal_[s] = 1;
}

void TabularMdpBuilder::advance_to(StateIndex s) {
    const auto offset = static_cast<std::uint32_t>(mdp_.entries_.size());
    while (current_state_ < s)
        mdp_.state_offset_[++current_state_] = offset;
}

std::uint32_t TabularMdpBuilder::intern(double probability, double reward) {
    const auto key = std::make_pair(std::bit_cast<std::uint64_t>(probability),
                                    std::bit_cast<std::uint64_t>(reward));
    auto [it, inserted] =
        interned_.try_emplace(key, static_cast<std::uint32_t>(mdp_.outcomes_.size()));
    if (inserted)
        mdp_.outcomes_.push_back({probability, reward});
    return it->second;
}

void TabularMdpBuilder::add(StateIndex s, ActionIndex a, StateIndex next, double probability,
                            double reward) {
    if (s >= mdp_.state_count_ || a >= mdp_.action_count_)
        throw ContractViolation("transition source out of range " + where(s, a));
    if (s < current_state_ || (s == current_state_ && a < current_action_))
        throw ContractViolation("transitions must be added in (state, action) order " + where(s, a));
    advance_to(s);
    current_action_ = a;
    if (probability == 0.0)
        return;
    auto& count = mdp_.per_action_[static_cast<std::size_t>(s) * mdp_.action_count_ + a];
    if (count == std::numeric_limits<std::uint16_t>::max())
        throw ResourceError("too many successors for " + where(s, a));
    if (mdp_.entries_.size() >= std::numeric_limits<std::uint32_t>::max())
        throw ResourceError("transition table exceeds 2^32 entries");
    ++count;
    mdp_.entries_.push_back({next, intern(probability, reward)});
}

TabularMdp TabularMdpBuilder::build() {
    advance_to(static_cast<StateIndex>(mdp_.state_count_));
    interned_.clear();
    current_state_ = 0;
    current_action_ = 0;
    return std::move(mdp_);
}

double discounted_sum(std::span<const TraceStep> steps, double discount) {
    double total = 0.0;
    double factor = 1.0;
    for (const auto& step : steps) {
        total += factor * step.reward;
        factor *= discount;
    }
    return total;
}

} // namespace roverplan::mdp
