#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "delrl/util.hpp"

namespace delrl {

/**
 * Explicit-tensor finite MDP. States and actions are dense indices; every
 * state carries a real-line embedding so Lipschitz constants and Wasserstein
 * distances are well defined (default e[s] = s, g[a] = a).
 */
struct FiniteMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transition;  // p[s][a][s'], row-major (s*A+a)*S+s'
    std::vector<double> reward;      // r[s][a], mean reward
    std::vector<double> state_embedding;
    std::vector<double> action_embedding;
    std::vector<double> initial;  // mu over states
    double gamma = 0.9;

    double p(int s, int a, int s2) const { return transition[std::size_t((s * n_actions + a) * n_states + s2)]; }
    double& p(int s, int a, int s2) { return transition[std::size_t((s * n_actions + a) * n_states + s2)]; }
    double r(int s, int a) const { return reward[std::size_t(s * n_actions + a)]; }
    double& r(int s, int a) { return reward[std::size_t(s * n_actions + a)]; }

    static FiniteMdp make(int n_states, int n_actions, double gamma) {
        require(n_states >= 1 && n_actions >= 1, "FiniteMdp: need at least one state and action");
        require(gamma >= 0.0 && gamma < 1.0, "FiniteMdp: gamma must lie in [0,1)");
        FiniteMdp m;
        m.n_states = n_states;
        m.n_actions = n_actions;
        m.gamma = gamma;
        m.transition.assign(std::size_t(n_states) * n_actions * n_states, 0.0);
        m.reward.assign(std::size_t(n_states) * n_actions, 0.0);
        m.state_embedding.resize(std::size_t(n_states));
        for (int s = 0; s < n_states; ++s) m.state_embedding[std::size_t(s)] = double(s);
        m.action_embedding.resize(std::size_t(n_actions));
        for (int a = 0; a < n_actions; ++a) m.action_embedding[std::size_t(a)] = double(a);
        m.initial.assign(std::size_t(n_states), 1.0 / double(n_states));
        return m;
    }

    void validate() const {
        require(gamma >= 0.0 && gamma < 1.0, "FiniteMdp: gamma must lie in [0,1)");
        for (int s = 0; s < n_states; ++s)
            for (int a = 0; a < n_actions; ++a) {
                double total = 0.0;
                for (int s2 = 0; s2 < n_states; ++s2) {
                    double v = p(s, a, s2);
                    require(v >= -1e-15, "FiniteMdp: negative transition probability");
                    total += v;
                }
                require(std::abs(total - 1.0) <= 1e-12, "FiniteMdp: transition row does not sum to 1");
            }
        double mu = std::accumulate(initial.begin(), initial.end(), 0.0);
        require(std::abs(mu - 1.0) <= 1e-12, "FiniteMdp: initial distribution does not sum to 1");
        for (double e : state_embedding) require(std::isfinite(e), "FiniteMdp: non-finite embedding");
        for (double v : reward) require(std::isfinite(v), "FiniteMdp: non-finite reward");
    }
};

/// Stochastic tabular policy pi(a|s); rows sum to 1.
struct TabularPolicy {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> prob;  // pi[s][a]

    static TabularPolicy uniform(int n_states, int n_actions) {
        TabularPolicy pi;
        pi.n_states = n_states;
        pi.n_actions = n_actions;
        pi.prob.assign(std::size_t(n_states) * n_actions, 1.0 / double(n_actions));
        return pi;
    }
    static TabularPolicy deterministic(int n_states, int n_actions, const std::vector<int>& action_of) {
        TabularPolicy pi;
        pi.n_states = n_states;
        pi.n_actions = n_actions;
        pi.prob.assign(std::size_t(n_states) * n_actions, 0.0);
        for (int s = 0; s < n_states; ++s) pi.prob[std::size_t(s * n_actions + action_of[std::size_t(s)])] = 1.0;
        return pi;
    }
    double operator()(int s, int a) const { return prob[std::size_t(s * n_actions + a)]; }
    double& at(int s, int a) { return prob[std::size_t(s * n_actions + a)]; }

    void validate() const {
        for (int s = 0; s < n_states; ++s) {
            double total = 0.0;
            for (int a = 0; a < n_actions; ++a) total += (*this)(s, a);
            require(std::abs(total - 1.0) <= 1e-9, "TabularPolicy: row does not sum to 1");
        }
    }

    int sample(int s, Rng& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double u = unif(rng);
        double acc = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            acc += (*this)(s, a);
            if (u <= acc) return a;
        }
        return n_actions - 1;
    }
};

namespace detail {

inline Eigen::MatrixXd policy_transition(const FiniteMdp& mdp, const TabularPolicy& pi) {
    Eigen::MatrixXd P(mdp.n_states, mdp.n_states);
    P.setZero();
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double w = pi(s, a);
            if (w == 0.0) continue;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) P(s, s2) += w * mdp.p(s, a, s2);
        }
    return P;
}

}  // namespace detail

/**
 * Exact state values of a tabular policy: solves (I - gamma P^pi) V = r^pi by
 * dense LU. Throws if the residual exceeds 1e-10 (cannot happen for gamma<1
 * and a valid model).
 */
inline std::vector<double> solve_v_exact(const FiniteMdp& mdp, const TabularPolicy& pi) {
    pi.validate();
    const int n = mdp.n_states;
    Eigen::MatrixXd P = detail::policy_transition(mdp, pi);
    Eigen::VectorXd r(n);
    for (int s = 0; s < n; ++s) {
        double v = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) v += pi(s, a) * mdp.r(s, a);
        r(s) = v;
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - mdp.gamma * P;
    Eigen::VectorXd V = A.partialPivLu().solve(r);
    double residual = (A * V - r).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-10))
        throw std::runtime_error("solve_v_exact: linear solve residual " + std::to_string(residual));
    return std::vector<double>(V.data(), V.data() + n);
}

/// Q(s,a) = r(s,a) + gamma * sum_s' p(s'|s,a) V(s'), with V from solve_v_exact.
inline std::vector<double> solve_q_exact(const FiniteMdp& mdp, const TabularPolicy& pi) {
    std::vector<double> V = solve_v_exact(mdp, pi);
    std::vector<double> Q(std::size_t(mdp.n_states) * mdp.n_actions, 0.0);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double v = mdp.r(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2) v += mdp.gamma * mdp.p(s, a, s2) * V[std::size_t(s2)];
            Q[std::size_t(s * mdp.n_actions + a)] = v;
        }
    return Q;
}

/**
 * Discounted occupancy d(x) = (1-gamma) sum_t gamma^t P(x_t = x) under pi,
 * started from the given distribution. Solved exactly from the transposed
 * linear system.
 */
inline std::vector<double> occupancy_exact(const FiniteMdp& mdp, const TabularPolicy& pi,
                                           const std::vector<double>& start) {
    const int n = mdp.n_states;
    require(int(start.size()) == n, "occupancy_exact: start size mismatch");
    Eigen::MatrixXd P = detail::policy_transition(mdp, pi);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - mdp.gamma * P.transpose();
    Eigen::VectorXd rho(n);
    for (int s = 0; s < n; ++s) rho(s) = (1.0 - mdp.gamma) * start[std::size_t(s)];
    Eigen::VectorXd d = A.partialPivLu().solve(rho);
    return std::vector<double>(d.data(), d.data() + n);
}

struct ValueIterationResult {
    std::vector<double> v;
    std::vector<int> greedy;  // ties broken toward the lowest action index
    int iterations = 0;
};

/// Optimal values by value iteration to sup-norm tolerance tol on V*.
inline ValueIterationResult value_iteration(const FiniteMdp& mdp, double tol = 1e-10,
                                            int max_iters = 2000000) {
    require(tol > 0.0, "value_iteration: tol must be positive");
    const int n = mdp.n_states;
    std::vector<double> v(std::size_t(n), 0.0), v_next(std::size_t(n), 0.0);
    ValueIterationResult out;
    out.greedy.assign(std::size_t(n), 0);
    // stop when the Bellman residual guarantees ||v - v*|| <= tol
    double stop = tol * (1.0 - mdp.gamma) / std::max(mdp.gamma, 1e-12);
    for (int it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < mdp.n_actions; ++a) {
                double q = mdp.r(s, a);
                for (int s2 = 0; s2 < n; ++s2) q += mdp.gamma * mdp.p(s, a, s2) * v[std::size_t(s2)];
                if (q > best + 1e-15) {
                    best = q;
                    best_a = a;
                }
            }
            v_next[std::size_t(s)] = best;
            out.greedy[std::size_t(s)] = best_a;
            delta = std::max(delta, std::abs(best - v[std::size_t(s)]));
        }
        std::swap(v, v_next);
        ++out.iterations;
        if (delta <= stop || mdp.gamma == 0.0) {
            out.v = v;
            return out;
        }
    }
    throw std::runtime_error("value_iteration: no convergence within iteration cap");
}

// ---------------------------------------------------------------------------
// Sampling environment over a FiniteMdp
// ---------------------------------------------------------------------------

template <class ObsT>
struct Step {
    ObsT obs;
    double reward = 0.0;
    bool done = false;
};

/// Stateful sampler for a FiniteMdp; observation is the state index.
class FiniteEnv {
  public:
    using Obs = int;
    using Act = int;

    explicit FiniteEnv(FiniteMdp mdp, std::uint64_t seed = 0) : mdp_(std::move(mdp)), rng_(seed) {
        mdp_.validate();
    }

    void seed(std::uint64_t s) { rng_.seed(s); }

    Obs reset() {
        state_ = sample_index(mdp_.initial);
        return state_;
    }

    /// Forces the current state; used by evaluation from fixed starts.
    Obs reset_to(int s) {
        require(s >= 0 && s < mdp_.n_states, "FiniteEnv: start state out of range");
        state_ = s;
        return state_;
    }

    Step<Obs> step(Act a) {
        require(a >= 0 && a < mdp_.n_actions, "FiniteEnv: action out of range");
        double reward = mdp_.r(state_, a);
        std::vector<double> row(std::size_t(mdp_.n_states));
        for (int s2 = 0; s2 < mdp_.n_states; ++s2) row[std::size_t(s2)] = mdp_.p(state_, a, s2);
        state_ = sample_index(row);
        return {state_, reward, false};
    }

    Act sample_uniform_action_with(Rng& rng) const {
        std::uniform_int_distribution<int> d(0, mdp_.n_actions - 1);
        return d(rng);
    }

    const FiniteMdp& model() const { return mdp_; }

  private:
    int sample_index(const std::vector<double>& w) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double u = unif(rng_);
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            acc += w[i];
            if (u <= acc) return int(i);
        }
        return int(w.size()) - 1;
    }

    FiniteMdp mdp_;
    Rng rng_;
    int state_ = 0;
};

// ---------------------------------------------------------------------------
// Structured text serialization
// ---------------------------------------------------------------------------

inline void save_finite_mdp(const FiniteMdp& mdp, std::ostream& os) {
    os << "finite_mdp v1\n";
    os << std::setprecision(17);
    os << "n_states " << mdp.n_states << "\n";
    os << "n_actions " << mdp.n_actions << "\n";
    os << "gamma " << mdp.gamma << "\n";
    os << "state_embedding";
    for (double e : mdp.state_embedding) os << " " << e;
    os << "\naction_embedding";
    for (double g : mdp.action_embedding) os << " " << g;
    os << "\ninitial";
    for (double m : mdp.initial) os << " " << m;
    os << "\n";
    for (int s = 0; s < mdp.n_states; ++s) {
        os << "reward " << s;
        for (int a = 0; a < mdp.n_actions; ++a) os << " " << mdp.r(s, a);
        os << "\n";
    }
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            os << "transition " << s << " " << a;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) os << " " << mdp.p(s, a, s2);
            os << "\n";
        }
}

inline FiniteMdp load_finite_mdp(std::istream& is) {
    std::string header, version;
    is >> header >> version;
    require(header == "finite_mdp" && version == "v1", "load_finite_mdp: unknown format header");
    int n_states = 0, n_actions = 0;
    double gamma = 0.0;
    std::string key;
    is >> key >> n_states;
    require(key == "n_states", "load_finite_mdp: expected n_states");
    is >> key >> n_actions;
    require(key == "n_actions", "load_finite_mdp: expected n_actions");
    is >> key >> gamma;
    require(key == "gamma", "load_finite_mdp: expected gamma");
    FiniteMdp mdp = FiniteMdp::make(n_states, n_actions, gamma);
    is >> key;
    require(key == "state_embedding", "load_finite_mdp: expected state_embedding");
    for (int s = 0; s < n_states; ++s) is >> mdp.state_embedding[std::size_t(s)];
    is >> key;
    require(key == "action_embedding", "load_finite_mdp: expected action_embedding");
    for (int a = 0; a < n_actions; ++a) is >> mdp.action_embedding[std::size_t(a)];
    is >> key;
    require(key == "initial", "load_finite_mdp: expected initial");
    for (int s = 0; s < n_states; ++s) is >> mdp.initial[std::size_t(s)];
    for (int s = 0; s < n_states; ++s) {
        int si = 0;
        is >> key >> si;
        require(key == "reward" && si == s, "load_finite_mdp: malformed reward row");
        for (int a = 0; a < n_actions; ++a) is >> mdp.r(s, a);
    }
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
            int si = 0, ai = 0;
            is >> key >> si >> ai;
            require(key == "transition" && si == s && ai == a, "load_finite_mdp: malformed transition row");
            for (int s2 = 0; s2 < n_states; ++s2) is >> mdp.p(s, a, s2);
        }
    mdp.validate();
    return mdp;
}

inline void save_tabular_policy(const TabularPolicy& pi, std::ostream& os) {
    os << "tabular_policy v1\n" << std::setprecision(17);
    os << "n_states " << pi.n_states << "\nn_actions " << pi.n_actions << "\n";
    for (int s = 0; s < pi.n_states; ++s) {
        os << "policy " << s;
        for (int a = 0; a < pi.n_actions; ++a) os << " " << pi(s, a);
        os << "\n";
    }
}

inline TabularPolicy load_tabular_policy(std::istream& is) {
    std::string header, version, key;
    is >> header >> version;
    require(header == "tabular_policy" && version == "v1", "load_tabular_policy: unknown format header");
    int n_states = 0, n_actions = 0;
    is >> key >> n_states;
    require(key == "n_states", "load_tabular_policy: expected n_states");
    is >> key >> n_actions;
    require(key == "n_actions", "load_tabular_policy: expected n_actions");
    TabularPolicy pi = TabularPolicy::uniform(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
        int si = 0;
        is >> key >> si;
        require(key == "policy" && si == s, "load_tabular_policy: malformed policy row");
        for (int a = 0; a < n_actions; ++a) is >> pi.at(s, a);
    }
    pi.validate();
    return pi;
}

}  // namespace delrl
