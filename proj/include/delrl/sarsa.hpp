#pragma once

#include <deque>

#include "delrl/delay.hpp"
#include "delrl/dida.hpp"
#include "delrl/pendulum.hpp"
#include "delrl/util.hpp"

namespace delrl {

struct SarsaParams {
    double alpha = 0.1;
    double gamma = 0.99;
    double lambda = 0.9;
    double epsilon = 0.2;
};

/// Q table plus accumulating eligibility traces over (observation, action) cells.
class TabularQ {
  public:
    TabularQ(long n_obs, int n_actions) : n_obs_(n_obs), n_actions_(n_actions) {
        require(n_obs >= 1 && n_actions >= 1, "TabularQ: empty table");
        q_.assign(std::size_t(n_obs) * std::size_t(n_actions), 0.0);
    }

    double q(long obs, int a) const { return q_[cell(obs, a)]; }
    long rows() const { return n_obs_; }
    int actions() const { return n_actions_; }

    int greedy(long obs) const {
        int best = 0;
        for (int a = 1; a < n_actions_; ++a)
            if (q_[cell(obs, a)] > q_[cell(obs, best)]) best = a;
        return best;  // strict comparison: ties stay at the lowest index
    }

    void reset_traces() { active_.clear(); }

    /**
     * SARSA(lambda) update crediting (obs, credited): accumulate the trace,
     * then move every active cell along the TD error of the credited pair.
     */
    void update(long obs, int credited, double reward, long next_obs, int next_credited,
                bool terminal, const SarsaParams& p) {
        require(obs >= 0 && obs < n_obs_ && next_obs >= 0 && next_obs < n_obs_,
                "TabularQ: observation index out of range");
        require(credited >= 0 && credited < n_actions_ && next_credited >= 0 &&
                    next_credited < n_actions_,
                "TabularQ: action index out of range");
        double target = reward + (terminal ? 0.0 : p.gamma * q_[cell(next_obs, next_credited)]);
        double td = target - q_[cell(obs, credited)];

        bool found = false;
        for (auto& [idx, e] : active_)
            if (idx == cell(obs, credited)) {
                e += 1.0;
                found = true;
                break;
            }
        if (!found) active_.emplace_back(cell(obs, credited), 1.0);

        double decay = p.gamma * p.lambda;
        std::size_t keep = 0;
        for (std::size_t i = 0; i < active_.size(); ++i) {
            auto [idx, e] = active_[i];
            q_[idx] += p.alpha * td * e;
            e *= decay;
            if (e > 1e-8) active_[keep++] = {idx, e};
        }
        active_.resize(keep);
    }

    const std::vector<double>& raw() const { return q_; }

  private:
    std::size_t cell(long obs, int a) const { return std::size_t(obs) * std::size_t(n_actions_) + std::size_t(a); }

    long n_obs_;
    int n_actions_;
    std::vector<double> q_;
    std::vector<std::pair<std::size_t, double>> active_;
};

// ---------------------------------------------------------------------------
// Observation indexers and action grids
// ---------------------------------------------------------------------------

/// 15x15 default grid over (theta, theta_dot), matching the tabular baselines.
struct PendulumDiscretizer {
    int bins = 15;
    double max_speed = 8.0;

    long n_cells() const { return long(bins) * bins; }
    long index(const PendulumState& s) const {
        double th = (wrap_angle(s.theta) + M_PI) / (2.0 * M_PI);  // [0,1)
        double om = clamp((s.theta_dot + max_speed) / (2.0 * max_speed), 0.0, 1.0);
        int bi = std::min(bins - 1, int(th * bins));
        int bj = std::min(bins - 1, int(om * bins));
        return long(bi) * bins + bj;
    }
};

struct TorqueGrid {
    int n = 3;
    double max_torque = 2.0;
    double action(int i) const { return -max_torque + 2.0 * max_torque * double(i) / double(n - 1); }
};

/// Identity views for finite environments (already index-valued).
struct IdentityIndexer {
    long n;
    long n_cells() const { return n; }
    long index(int s) const { return s; }
};
struct IdentityGrid {
    int n = 2;
    int action(int i) const { return i; }
};

// ---------------------------------------------------------------------------
// Unified delayed tabular runner
// ---------------------------------------------------------------------------

enum class TabularMode { memoryless, dsarsa, augmented };

inline const char* to_string(TabularMode m) {
    switch (m) {
        case TabularMode::memoryless: return "sarsa";
        case TabularMode::dsarsa: return "dsarsa";
        case TabularMode::augmented: return "aug-sarsa";
    }
    return "?";
}

struct TabularRunConfig {
    TabularMode mode = TabularMode::memoryless;
    SarsaParams params;
    long total_steps = 100000;
    int episode_len = 200;
    long eval_every = 10000;
    int eval_episodes = 5;
    std::uint64_t seed = 0;
    long table_cap = 4000000;  // augmented rows beyond this raise a capability error
};

namespace detail {

inline long pow_long(long base, int exp) {
    long v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

}  // namespace detail

/**
 * SARSA(lambda) on a delayed environment in one of three crediting modes.
 *
 * - memoryless: observation = discretized base state, credit the action
 *   chosen now (the naive pairing that ignores the delay).
 * - dsarsa: same observation, credit the oldest queued action, the one
 *   actually applied at the observed state.
 * - augmented: observation = (base state, queue of own action indices),
 *   credit the action chosen now, consuming the reward stream with a lag of
 *   `delay` steps so rewards pair with the augmented state they were earned
 *   at.
 *
 * All modes share one code path; at delay 0 they take identical branches and
 * produce bit-identical tables for equal seeds.
 */
struct TabularRunOutput {
    TabularQ table;
    std::vector<CurveRow> curve;
};

template <class E, class Indexer, class Grid>
TabularRunOutput run_tabular(DelayedEnv<E>& denv, const Indexer& indexer, const Grid& grid,
                             const TabularRunConfig& config) {
    const int delay = denv.delay();
    const long base_rows = indexer.n_cells();
    long rows = base_rows;
    if (config.mode == TabularMode::augmented) {
        rows = base_rows * detail::pow_long(grid.n, delay);
        if (rows > config.table_cap)
            throw std::runtime_error("run_tabular: augmented table needs " + std::to_string(rows) +
                                     " rows, over the cap of " + std::to_string(config.table_cap));
    }
    TabularQ table(rows, grid.n);
    Rng rng(config.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> random_action(0, grid.n - 1);

    std::deque<int> own_queue;  // agent-side action indices, oldest first
    auto augmented_row = [&](long base_cell) {
        long row = base_cell;
        for (int idx : own_queue) row = row * grid.n + idx;
        return row;
    };
    auto observation_row = [&](long base_cell) {
        return config.mode == TabularMode::augmented ? augmented_row(base_cell) : base_cell;
    };

    auto epsilon_greedy = [&](long row) {
        if (unif(rng) < config.params.epsilon) return random_action(rng);
        return table.greedy(row);
    };

    auto reset_episode = [&]() {
        std::vector<typename E::Act> queue;
        own_queue.clear();
        for (int k = 0; k < delay; ++k) {
            int idx = random_action(rng);
            own_queue.push_back(idx);
            queue.push_back(grid.action(idx));
        }
        denv.reset_with_queue(queue);
        table.reset_traces();
    };

    struct Pending {
        long row;
        int credited;
    };
    std::deque<Pending> lag;  // augmented mode: transitions awaiting their reward

    std::vector<CurveRow> curve;
    long env_steps = 0;
    int eval_count = 0;
    int episode_clock = 0;
    long prev_row = -1;
    int prev_credited = -1;
    double prev_reward = 0.0;

    for (long step = 0; step < config.total_steps; ++step) {
        if (episode_clock == 0) {
            reset_episode();
            env_steps += delay;
            lag.clear();
            prev_row = -1;
        }
        long base_cell = indexer.index(denv.observation().base);
        long row = observation_row(base_cell);
        int chosen = epsilon_greedy(row);
        int credited = chosen;
        int next_oldest = -1;
        if (config.mode == TabularMode::dsarsa && delay > 0) {
            credited = own_queue.front();
            next_oldest = delay > 1 ? own_queue[1] : chosen;
        }

        // close out the previous transition now that its successor pair is known
        if (prev_row >= 0) {
            int succ_credited = credited;
            table.update(prev_row, prev_credited, prev_reward, row, succ_credited, false,
                         config.params);
        }

        denv.step(grid.action(chosen));
        env_steps += 1;
        if (delay > 0) {
            own_queue.push_back(chosen);
            own_queue.pop_front();
        }
        // the reward arriving now was realized at the transition just revealed
        double observed = *denv.observed_reward();

        if (config.mode == TabularMode::augmented && delay > 0) {
            // the reward revealed now belongs to the transition taken `delay`
            // steps ago; its successor pair is the next lag entry
            lag.push_back({row, chosen});
            if (int(lag.size()) > delay + 1) lag.pop_front();
            if (int(lag.size()) == delay + 1)
                table.update(lag[0].row, lag[0].credited, observed, lag[1].row, lag[1].credited,
                             false, config.params);
            prev_row = -1;
        } else {
            prev_row = row;
            prev_credited = credited;
            prev_reward = observed;
            if (config.mode == TabularMode::dsarsa && delay > 0) {
                // dsarsa's successor credit is already known; update immediately
                long next_base = indexer.index(denv.observation().base);
                table.update(row, credited, observed, next_base, next_oldest, false, config.params);
                prev_row = -1;
            }
        }

        episode_clock = (episode_clock + 1) % config.episode_len;
        if (episode_clock == 0) prev_row = -1;

        if ((step + 1) % config.eval_every == 0 || step + 1 == config.total_steps) {
            ++eval_count;
            auto eval_env = denv;  // value copy; evaluation never disturbs training state
            std::vector<double> returns;
            Rng eval_rng(config.seed ^ (0x9e3779b97f4a7c15ull + std::uint64_t(eval_count)));
            std::uniform_int_distribution<int> eval_action(0, grid.n - 1);
            for (int ep = 0; ep < config.eval_episodes; ++ep) {
                eval_env.seed(config.seed * 31 + std::uint64_t(eval_count) * 1000003ull +
                              std::uint64_t(ep));
                std::deque<int> eval_queue;
                std::vector<typename E::Act> queue;
                for (int k = 0; k < delay; ++k) {
                    int idx = eval_action(eval_rng);
                    eval_queue.push_back(idx);
                    queue.push_back(grid.action(idx));
                }
                eval_env.reset_with_queue(queue);
                double total = 0.0;
                for (int t = 0; t < config.episode_len; ++t) {
                    long cell = indexer.index(eval_env.observation().base);
                    long erow = cell;
                    if (config.mode == TabularMode::augmented)
                        for (int idx : eval_queue) erow = erow * grid.n + idx;
                    int a = table.greedy(erow);
                    total += eval_env.step(grid.action(a)).reward;
                    if (delay > 0) {
                        eval_queue.push_back(a);
                        eval_queue.pop_front();
                    }
                }
                returns.push_back(total);
            }
            MeanStd ms = mean_std(returns);
            curve.push_back({eval_count, env_steps, ms.mean, ms.stddev, 0.0});
        }
    }
    return {std::move(table), std::move(curve)};
}

}  // namespace delrl
