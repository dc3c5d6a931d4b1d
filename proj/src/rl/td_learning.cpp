#include "roverplan/rl/td_learning.hpp"

#include "roverplan/errors.hpp"
#include "roverplan/mdp/simulate.hpp"
#include "roverplan/rng.hpp"

#include <chrono>
#include <cmath>

namespace roverplan::rl {

namespace {

enum class Target { max_next, sampled_next };

using Clock = std::chrono::steady_clock;

class TdLearner {
public:
    TdLearner(const mdp::TabularMdp& model, const LearnConfig& cfg)
        : mdp_(model), cfg_(cfg), rng_(cfg.seed) {
        table_.states = mdp_.state_count();
        table_.actions = mdp_.action_count();
        table_.q.assign(table_.states * table_.actions, cfg.initial_q);
        for (StateIndex s = 0; s < mdp_.state_count(); ++s) {
            if (mdp_.is_terminal(s)) {
                for (ActionIndex a = 0; a < table_.actions; ++a)
                    table_.at(s, a) = 0.0;
            } else {
                starts_.push_back(s);
            }
        }
        if (starts_.empty())
            throw ConfigError("MDP has no non-terminal state to learn from");
    }

    LearnResult run(Target target) {
        LearnResult result;
        double epsilon = cfg_.epsilon;
        double trained = 0.0;
        mdp::Policy previous;
        auto resume = Clock::now();

        for (std::size_t episode = 0; episode < cfg_.episodes; ++episode) {
            run_episode(target, epsilon);
            epsilon *= cfg_.epsilon_decay;

            const bool last = episode + 1 == cfg_.episodes;
            if (cfg_.eval_interval > 0 && ((episode + 1) % cfg_.eval_interval == 0 || last)) {
                trained += std::chrono::duration<double>(Clock::now() - resume).count();
                mdp::Policy current = greedy_policy(mdp_, table_);
                const StateIndex from = cfg_.eval_state.value_or(cfg_.start_state.value_or(0));
                const auto stats = mdp::evaluate_policy(mdp_, current, from, cfg_.eval_rollouts,
                                                        derive_seed(cfg_.seed, episode));
                result.learning_curve.push_back({episode + 1, trained, stats.mean});
                result.policy_stable = !previous.actions.empty() && previous.actions == current.actions;
                previous = std::move(current);
                resume = Clock::now();
            }
        }
        trained += std::chrono::duration<double>(Clock::now() - resume).count();

        result.policy = greedy_policy(mdp_, table_);
        result.table = std::move(table_);
        result.wall_time = trained;
        return result;
    }

private:
    ActionIndex greedy(StateIndex s) const {
        ActionIndex best = mdp::kNoAction;
        for (ActionIndex a = 0; a < table_.actions; ++a) {
            if (!mdp_.has_action(s, a))
                continue;
            if (best == mdp::kNoAction || table_.at(s, a) > table_.at(s, best))
                best = a;
        }
        return best;
    }

    /// Epsilon-greedy; always consumes one uniform draw, plus one more when exploring.
    ActionIndex choose(StateIndex s, double epsilon) {
        if (rng_.uniform() < epsilon) {
            std::size_t legal = 0;
            for (ActionIndex a = 0; a < table_.actions; ++a)
                legal += mdp_.has_action(s, a) ? 1 : 0;
            std::uint64_t pick = rng_.below(legal);
            for (ActionIndex a = 0; a < table_.actions; ++a) {
                if (mdp_.has_action(s, a) && pick-- == 0)
                    return a;
            }
        }
        return greedy(s);
    }

    double max_q(StateIndex s) const { return table_.at(s, greedy(s)); }

    void run_episode(Target target, double epsilon) {
        StateIndex s = cfg_.start_state ? *cfg_.start_state : starts_[rng_.below(starts_.size())];
        if (mdp_.is_terminal(s))
            return;
        ActionIndex a = choose(s, epsilon);
        const double discount = mdp_.discount();
        for (std::size_t step = 0; step < cfg_.step_cap; ++step) {
            const auto entries = mdp_.packed(s, a);
            const std::size_t pick = mdp::sample_successor(rng_, entries.size(), [&](std::size_t k) {
                return mdp_.outcome(entries[k].outcome).probability;
            });
            const double reward = mdp_.outcome(entries[pick].outcome).reward;
            const StateIndex next = entries[pick].next;

            // The next behavior action is drawn before the update for both
            // targets, so with epsilon = 0 the two learners stay in lockstep.
            double bootstrap = 0.0;
            ActionIndex next_action = mdp::kNoAction;
            if (!mdp_.is_terminal(next)) {
                next_action = choose(next, epsilon);
                bootstrap = target == Target::max_next ? max_q(next) : table_.at(next, next_action);
            }
            double& q = table_.at(s, a);
            q += cfg_.learning_rate * (reward + discount * bootstrap - q);

            if (next_action == mdp::kNoAction)
                return;
            s = next;
            a = next_action;
        }
    }

    const mdp::TabularMdp& mdp_;
    const LearnConfig& cfg_;
    Rng rng_;
    QTable table_;
    std::vector<StateIndex> starts_;
};

} // namespace

void LearnConfig::validate() const {
    if (episodes < 1)
        throw ConfigError("learning needs at least one episode");
    if (step_cap < 1)
        throw ConfigError("learning needs step_cap >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw ConfigError("learning_rate must lie in (0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw ConfigError("epsilon must lie in [0, 1]");
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
        throw ConfigError("epsilon_decay must lie in (0, 1]");
    if (!std::isfinite(initial_q))
        throw ConfigError("initial_q must be finite");
}

mdp::Policy greedy_policy(const mdp::TabularMdp& mdp, const QTable& table) {
    mdp::Policy policy;
    policy.actions.assign(mdp.state_count(), mdp::kNoAction);
    for (StateIndex s = 0; s < mdp.state_count(); ++s) {
        if (mdp.is_terminal(s))
            continue;
        for (ActionIndex a = 0; a < mdp.action_count(); ++a) {
            if (!mdp.has_action(s, a))
                continue;
            if (policy.actions[s] == mdp::kNoAction || table.at(s, a) > table.at(s, policy.actions[s]))
                policy.actions[s] = a;
        }
    }
    return policy;
}

LearnResult q_learning(const mdp::TabularMdp& mdp, const LearnConfig& cfg) {
    cfg.validate();
    mdp.validate();
    return TdLearner(mdp, cfg).run(Target::max_next);
}

LearnResult sarsa(const mdp::TabularMdp& mdp, const LearnConfig& cfg) {
    cfg.validate();
    mdp.validate();
    return TdLearner(mdp, cfg).run(Target::sampled_next);
}

} // namespace roverplan::rl
