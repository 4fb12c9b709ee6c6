#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "delrl/mdp.hpp"
#include "delrl/util.hpp"

namespace delrl {

/**
 * Observation of a delayed process: the last observed state (delay steps old)
 * together with the queue of actions taken since, oldest first. The queue
 * length always equals the wrapper's configured delay.
 */
template <class StateT, class ActT>
struct AugmentedState {
    StateT base;
    std::vector<ActT> queue;
};

/**
 * Wraps an environment with a constant integer observation delay.
 *
 * Reset draws the observed base state from the inner initial distribution and
 * fills the queue with uniform random actions; those actions are applied to
 * the inner environment, so the hidden current state is distributed exactly
 * as the belief of the initial augmented state. Each step applies the chosen
 * action to the hidden state and reveals the state from `delay` steps ago.
 *
 * Rewards are realized at true environment time: `step` returns the reward of
 * the current hidden transition. The reward the *agent* observes (the one
 * realized at the revealed transition, delayed alongside it) is published
 * through `observed_reward()`; it is empty only before the first step.
 *
 * `true_state()` deliberately leaks the hidden state for harness use (expert
 * queries during imitation, diagnostics). It is not part of the observation.
 */
template <class E>
class DelayedEnv {
  public:
    using InnerObs = typename E::Obs;
    using Act = typename E::Act;
    using Obs = AugmentedState<InnerObs, Act>;

    DelayedEnv(E inner, int delay, std::uint64_t seed = 0)
        : inner_(std::move(inner)), delay_(delay) {
        require(delay >= 0, "DelayedEnv: delay must be >= 0");
        this->seed(seed);
    }

    void seed(std::uint64_t s) {
        inner_.seed(s);
        queue_rng_.seed(s ^ 0xd1b54a32d192ed03ull);
    }

    Obs reset() {
        std::vector<Act> queue;
        queue.reserve(std::size_t(delay_));
        for (int k = 0; k < delay_; ++k) queue.push_back(inner_.sample_uniform_action_with(queue_rng_));
        return reset_with_queue(queue);
    }

    /// Reset with a pinned initial action queue instead of uniform draws.
    Obs reset_with_queue(const std::vector<Act>& queue) {
        require(int(queue.size()) == delay_, "DelayedEnv: queue length must equal the delay");
        state_window_.clear();
        reward_window_.clear();
        Obs obs;
        InnerObs s = inner_.reset();
        state_window_.push_back(s);
        obs.base = s;
        for (const Act& a : queue) {
            auto step = inner_.step(a);
            obs.queue.push_back(a);
            state_window_.push_back(step.obs);
            reward_window_.push_back(step.reward);
        }
        observed_reward_.reset();
        ready_ = true;
        obs_ = obs;
        return obs;
    }

    Step<Obs> step(const Act& a) {
        require(ready_, "DelayedEnv: step before reset");
        auto inner_step = inner_.step(a);
        state_window_.push_back(inner_step.obs);
        reward_window_.push_back(inner_step.reward);
        // reveal the transition from `delay` steps ago
        state_window_.pop_front();
        obs_.base = state_window_.front();
        observed_reward_ = reward_window_.front();
        reward_window_.pop_front();
        if (delay_ > 0) {
            obs_.queue.erase(obs_.queue.begin());
            obs_.queue.push_back(a);
        }
        return {obs_, inner_step.reward, inner_step.done};
    }

    int delay() const { return delay_; }
    const Obs& observation() const { return obs_; }
    /// Hidden current state (harness privilege, not an observation).
    const InnerObs& true_state() const { return state_window_.back(); }
    /// Reward realized `delay` steps ago, i.e. at the revealed state.
    std::optional<double> observed_reward() const { return observed_reward_; }

    E& inner() { return inner_; }
    const E& inner() const { return inner_; }

  private:
    E inner_;
    int delay_;
    Rng queue_rng_;
    std::deque<InnerObs> state_window_;  // s_{t-delay} .. s_t
    std::deque<double> reward_window_;
    Obs obs_;
    std::optional<double> observed_reward_;
    bool ready_ = false;
};

template <class E>
DelayedEnv<E> wrap_delayed(E inner, int delay, std::uint64_t seed = 0) {
    return DelayedEnv<E>(std::move(inner), delay, seed);
}

/**
 * Exact belief over the current state of a finite MDP given an augmented
 * state: the Dirac at the observed base state pushed through the queued
 * actions' transition kernels, oldest first.
 */
inline std::vector<double> belief_exact(const FiniteMdp& mdp, int base_state,
                                        const std::vector<int>& queue) {
    require(base_state >= 0 && base_state < mdp.n_states, "belief_exact: base state out of range");
    std::vector<double> b(std::size_t(mdp.n_states), 0.0);
    b[std::size_t(base_state)] = 1.0;
    std::vector<double> next(std::size_t(mdp.n_states));
    for (int a : queue) {
        require(a >= 0 && a < mdp.n_actions, "belief_exact: queued action out of range");
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < mdp.n_states; ++s) {
            double w = b[std::size_t(s)];
            if (w == 0.0) continue;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) next[std::size_t(s2)] += w * mdp.p(s, a, s2);
        }
        b.swap(next);
    }
    return b;
}

template <class ActT>
std::vector<double> belief_exact(const FiniteMdp& mdp, const AugmentedState<int, ActT>& x) {
    std::vector<int> queue(x.queue.begin(), x.queue.end());
    return belief_exact(mdp, x.base, queue);
}

// ---------------------------------------------------------------------------
// Fractional delay
// ---------------------------------------------------------------------------

/**
 * Wraps a substeppable environment with a constant non-integer delay
 * d = m + f, m integer >= 0, f in (0,1). The action chosen at integer time t
 * becomes active at t + d; every unit step therefore integrates the dynamics
 * for duration f under the pending action and 1-f under its successor.
 * The observation is the integer-grid state plus the ceil(d)-long queue.
 *
 * The inner environment must expose step_fraction(action, fraction) advancing
 * its dynamics for a fraction of one control step, and supports_fraction(f)
 * declaring whether that fraction lands on its integration grid.
 *
 * The reward of a step is r(state at the switch instant, incoming action),
 * the reward realized where the newly activated action starts acting.
 */
template <class E>
class FractionalDelayedEnv {
  public:
    using InnerObs = typename E::Obs;
    using Act = typename E::Act;
    using Obs = AugmentedState<InnerObs, Act>;

    FractionalDelayedEnv(E inner, double delay, std::uint64_t seed = 0)
        : inner_(std::move(inner)) {
        require(delay > 0.0, "FractionalDelayedEnv: delay must be positive");
        int_part_ = int(std::floor(delay));
        frac_ = delay - double(int_part_);
        require(frac_ > 0.0 && frac_ < 1.0,
                "FractionalDelayedEnv: delay must have a non-integer part (use DelayedEnv otherwise)");
        if (!inner_.supports_fraction(frac_))
            throw std::invalid_argument(
                "FractionalDelayedEnv: environment cannot integrate the requested fraction");
        this->seed(seed);
    }

    void seed(std::uint64_t s) {
        inner_.seed(s);
        queue_rng_.seed(s ^ 0xd1b54a32d192ed03ull);
    }

    Obs reset() {
        std::vector<Act> queue;
        const int pending = int_part_ + 1;  // ceil(d)
        for (int k = 0; k < pending; ++k) queue.push_back(inner_.sample_uniform_action_with(queue_rng_));
        return reset_with_queue(queue);
    }

    Obs reset_with_queue(const std::vector<Act>& queue) {
        require(int(queue.size()) == int_part_ + 1,
                "FractionalDelayedEnv: queue length must equal ceil(delay)");
        obs_.base = inner_.reset();
        obs_.queue = queue;
        mid_phase_ = false;
        ready_ = true;
        return obs_;
    }

    /**
     * Advances the hidden dynamics to the in-step switch instant t+f under
     * the pending action and returns the state there; commit() finishes the
     * step. Split form used by imitation harnesses that must query an expert
     * at the state where the incoming action starts acting.
     */
    const InnerObs& advance_to_switch() {
        require(ready_, "FractionalDelayedEnv: step before reset");
        require(!mid_phase_, "FractionalDelayedEnv: already at the switch point");
        auto part = inner_.step_fraction(obs_.queue.front(), frac_);
        switch_state_ = part.obs;
        mid_phase_ = true;
        return switch_state_;
    }

    Step<Obs> commit(const Act& a) {
        require(mid_phase_, "FractionalDelayedEnv: commit without advance_to_switch");
        obs_.queue.push_back(a);
        obs_.queue.erase(obs_.queue.begin());
        const Act& active = obs_.queue.front();  // successor of the consumed action
        double reward = inner_.reward_at(switch_state_, active);
        auto rest = inner_.step_fraction(active, 1.0 - frac_);
        obs_.base = rest.obs;
        mid_phase_ = false;
        return {obs_, reward, rest.done};
    }

    Step<Obs> step(const Act& a) {
        advance_to_switch();
        return commit(a);
    }

    double delay() const { return double(int_part_) + frac_; }
    double fraction() const { return frac_; }
    const Obs& observation() const { return obs_; }
    E& inner() { return inner_; }

  private:
    E inner_;
    int int_part_ = 0;
    double frac_ = 0.0;
    Rng queue_rng_;
    Obs obs_;
    InnerObs switch_state_;
    bool mid_phase_ = false;
    bool ready_ = false;
};

template <class E>
FractionalDelayedEnv<E> wrap_fractional(E inner, double delay, std::uint64_t seed = 0) {
    return FractionalDelayedEnv<E>(std::move(inner), delay, seed);
}

// ---------------------------------------------------------------------------
// Substep-kernel composition check
// ---------------------------------------------------------------------------

struct CompositionReport {
    double max_deviation = 0.0;       // worst |empirical - p| over all cells
    double confidence_bound = 0.0;    // Hoeffding bound at the configured level
    double max_exact_deviation = 0.0; // worst |B_f * B_{1-f} - P| cell
    int cells = 0;
    bool pass = false;
};

/**
 * Checks that two substep kernels compose to the one-step kernel: samples
 * z ~ B_f(.|s,a), s' ~ B_{1-f}(.|z,a) and compares the empirical law of s'
 * against p(.|s,a) cell by cell. Kernels are |S|x|S| row-stochastic matrices
 * per action, row-major. Also reports the exact matrix-product deviation.
 */
inline CompositionReport check_fractional_composition(const FiniteMdp& mdp,
                                                      const std::vector<std::vector<double>>& kernel_f,
                                                      const std::vector<std::vector<double>>& kernel_rest,
                                                      int n_samples, std::uint64_t seed,
                                                      double alpha = 1e-3) {
    const int S = mdp.n_states;
    require(int(kernel_f.size()) == mdp.n_actions && int(kernel_rest.size()) == mdp.n_actions,
            "check_fractional_composition: one kernel per action required");
    require(n_samples >= 100, "check_fractional_composition: need a sensible sample budget");
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&](const std::vector<double>& kernel, int row) {
        double u = unif(rng);
        double acc = 0.0;
        for (int j = 0; j < S; ++j) {
            acc += kernel[std::size_t(row * S + j)];
            if (u <= acc) return j;
        }
        return S - 1;
    };

    CompositionReport rep;
    rep.cells = S * S * mdp.n_actions;
    for (int a = 0; a < mdp.n_actions; ++a) {
        require(int(kernel_f[std::size_t(a)].size()) == S * S, "check_fractional_composition: kernel shape");
        require(int(kernel_rest[std::size_t(a)].size()) == S * S,
                "check_fractional_composition: kernel shape");
        for (int s = 0; s < S; ++s) {
            std::vector<int> counts(std::size_t(S), 0);
            for (int n = 0; n < n_samples; ++n) {
                int z = draw(kernel_f[std::size_t(a)], s);
                int s2 = draw(kernel_rest[std::size_t(a)], z);
                counts[std::size_t(s2)]++;
            }
            for (int s2 = 0; s2 < S; ++s2) {
                double freq = double(counts[std::size_t(s2)]) / double(n_samples);
                rep.max_deviation = std::max(rep.max_deviation, std::abs(freq - mdp.p(s, a, s2)));
                double exact = 0.0;
                for (int z = 0; z < S; ++z)
                    exact += kernel_f[std::size_t(a)][std::size_t(s * S + z)] *
                             kernel_rest[std::size_t(a)][std::size_t(z * S + s2)];
                rep.max_exact_deviation =
                    std::max(rep.max_exact_deviation, std::abs(exact - mdp.p(s, a, s2)));
            }
        }
    }
    // Hoeffding per cell with a union bound over all cells
    rep.confidence_bound =
        std::sqrt(std::log(2.0 * double(rep.cells) / alpha) / (2.0 * double(n_samples)));
    rep.pass = rep.max_deviation <= rep.confidence_bound && rep.max_exact_deviation <= 1e-9;
    return rep;
}

}  // namespace delrl
