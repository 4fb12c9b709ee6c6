#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "delrl/mdp.hpp"
#include "delrl/util.hpp"

namespace delrl {

/**
 * One environment interaction record. Time indices count environment steps
 * from episode start and increase by exactly 1 between consecutive records.
 */
template <class ObsT, class ActT>
struct Trajectory {
    struct Record {
        int t = 0;
        ObsT state;
        ActT action;
        double reward = 0.0;
        ObsT next_state;
    };
    std::vector<Record> records;
    bool terminal = false;

    std::size_t size() const { return records.size(); }
};

/**
 * Runs a policy against an environment for at most `horizon` steps (shorter
 * only on terminal). The environment is seeded before reset, the policy draws
 * from a decorrelated stream, so the outcome is a pure function of
 * (env snapshot, seed).
 */
template <class Env, class Policy>
Trajectory<typename Env::Obs, typename Env::Act> rollout(Env& env, Policy&& policy, int horizon,
                                                         std::uint64_t seed) {
    require(horizon >= 1, "rollout: horizon must be >= 1");
    env.seed(seed);
    Rng policy_rng(seed ^ 0x9e3779b97f4a7c15ull);
    Trajectory<typename Env::Obs, typename Env::Act> traj;
    traj.records.reserve(std::size_t(horizon));
    auto obs = env.reset();
    for (int t = 0; t < horizon; ++t) {
        auto action = policy(obs, policy_rng);
        auto step = env.step(action);
        traj.records.push_back({t, obs, action, step.reward, step.obs});
        obs = step.obs;
        if (step.done) {
            traj.terminal = true;
            break;
        }
    }
    return traj;
}

/// Sum of gamma^t r_t over records, discount indexed by environment time.
template <class ObsT, class ActT>
double discounted_return(const Trajectory<ObsT, ActT>& traj, double gamma) {
    require(gamma >= 0.0 && gamma < 1.0, "discounted_return: gamma must lie in [0,1)");
    double total = 0.0;
    for (const auto& rec : traj.records) total += std::pow(gamma, rec.t) * rec.reward;
    return total;
}

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int episodes = 0;
};

/**
 * Monte Carlo estimate of the discounted return. Episodes use seeds
 * seed, seed+1, ... so the estimate is deterministic given the seed.
 * `reset_override`, when given, re-seats the episode start (e.g. a fixed
 * state) and returns the corresponding observation.
 */
template <class Env, class Policy, class ResetFn>
McEstimate mc_value_estimate(Env& env, Policy&& policy, int n_episodes, int horizon, double gamma,
                             std::uint64_t seed, ResetFn&& reset_override) {
    require(n_episodes >= 2, "mc_value_estimate: need at least 2 episodes");
    std::vector<double> returns;
    returns.reserve(std::size_t(n_episodes));
    for (int ep = 0; ep < n_episodes; ++ep) {
        std::uint64_t ep_seed = seed + std::uint64_t(ep);
        env.seed(ep_seed);
        Rng policy_rng(ep_seed ^ 0x9e3779b97f4a7c15ull);
        auto obs = env.reset();
        if constexpr (!std::is_same_v<std::decay_t<ResetFn>, std::nullptr_t>)
            obs = reset_override(env);
        double total = 0.0;
        double disc = 1.0;
        for (int t = 0; t < horizon; ++t) {
            auto action = policy(obs, policy_rng);
            auto step = env.step(action);
            total += disc * step.reward;
            disc *= gamma;
            obs = step.obs;
            if (step.done) break;
        }
        returns.push_back(total);
    }
    MeanStd ms = mean_std(returns);
    return {ms.mean, standard_error(ms), n_episodes};
}

template <class Env, class Policy>
McEstimate mc_value_estimate(Env& env, Policy&& policy, int n_episodes, int horizon, double gamma,
                             std::uint64_t seed) {
    return mc_value_estimate(env, std::forward<Policy>(policy), n_episodes, horizon, gamma, seed,
                             nullptr);
}

/// CSV export (t, s, a, r); states/actions go through caller-supplied formatters.
template <class ObsT, class ActT>
void trajectory_to_csv(const Trajectory<ObsT, ActT>& traj, std::ostream& os,
                       const std::function<std::string(const ObsT&)>& fmt_state,
                       const std::function<std::string(const ActT&)>& fmt_action) {
    os << "t,s,a,r\n";
    for (const auto& rec : traj.records)
        os << rec.t << "," << fmt_state(rec.state) << "," << fmt_action(rec.action) << "," << rec.reward
           << "\n";
}

}  // namespace delrl
