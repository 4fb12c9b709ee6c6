#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

#include "delrl/chain.hpp"
#include "delrl/delay.hpp"
#include "delrl/experts.hpp"
#include "delrl/gaussian_walk.hpp"
#include "delrl/lipschitz.hpp"
#include "delrl/mdp.hpp"
#include "delrl/wasserstein.hpp"

namespace delrl {

/// One verification record; slack = rhs - lhs (negative would be a violation).
struct CheckRecord {
    std::string check;
    std::string fixture;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool pass = false;
};

// ---------------------------------------------------------------------------
// Augmented MDP
// ---------------------------------------------------------------------------

/**
 * The delayed process cast onto X = S x A^delay. Index codec: the base state
 * is the most significant digit, then queue slots oldest first,
 *   x = ((s * A + q[0]) * A + q[1]) ... .
 * Rewards are belief-averaged, the initial distribution is mu x uniform^delay,
 * and the state embedding is inherited from the observed base state.
 */
struct AugmentedMdp {
    FiniteMdp mdp;  // over X
    int base_states = 0;
    int base_actions = 0;
    int delay = 0;

    long size() const { return mdp.n_states; }

    long index_of(int s, std::span<const int> queue) const {
        long x = s;
        for (int a : queue) x = x * base_actions + a;
        return x;
    }

    std::pair<int, std::vector<int>> decode(long x) const {
        std::vector<int> queue(std::size_t(delay), 0);
        for (int k = delay - 1; k >= 0; --k) {
            queue[std::size_t(k)] = int(x % base_actions);
            x /= base_actions;
        }
        return {int(x), std::move(queue)};
    }
};

inline AugmentedMdp build_augmented_mdp(const FiniteMdp& base, int delay, long cap = 2000000) {
    require(delay >= 0, "build_augmented_mdp: delay must be >= 0");
    base.validate();
    AugmentedMdp aug;
    aug.base_states = base.n_states;
    aug.base_actions = base.n_actions;
    aug.delay = delay;
    if (delay == 0) {
        aug.mdp = base;  // identity: the undelayed process is its own augmentation
        return aug;
    }
    long n_aug = base.n_states;
    for (int k = 0; k < delay; ++k) {
        n_aug *= base.n_actions;
        if (n_aug > cap)
            throw std::runtime_error("build_augmented_mdp: " + std::to_string(base.n_states) + "*" +
                                     std::to_string(base.n_actions) + "^" + std::to_string(delay) +
                                     " augmented states exceed the cap of " + std::to_string(cap));
    }

    aug.mdp = FiniteMdp::make(int(n_aug), base.n_actions, base.gamma);
    aug.mdp.action_embedding = base.action_embedding;
    double queue_mass = 1.0;
    for (int k = 0; k < delay; ++k) queue_mass /= double(base.n_actions);

    for (long x = 0; x < n_aug; ++x) {
        auto [s1, queue] = aug.decode(x);
        aug.mdp.state_embedding[std::size_t(x)] = base.state_embedding[std::size_t(s1)];
        aug.mdp.initial[std::size_t(x)] = base.initial[std::size_t(s1)] * queue_mass;
        std::vector<double> b = belief_exact(base, s1, queue);
        int oldest = queue.front();
        std::vector<int> tail(queue.begin() + 1, queue.end());
        tail.push_back(0);  // placeholder for the incoming action
        for (int a = 0; a < base.n_actions; ++a) {
            double r_tilde = 0.0;
            for (int s = 0; s < base.n_states; ++s) r_tilde += b[std::size_t(s)] * base.r(s, a);
            aug.mdp.r(x, a) = r_tilde;
            tail.back() = a;
            for (int s2 = 0; s2 < base.n_states; ++s2) {
                double w = base.p(s1, oldest, s2);
                if (w == 0.0) continue;
                aug.mdp.p(x, a, aug.index_of(s2, tail)) = w;
            }
        }
    }
    aug.mdp.validate();
    return aug;
}

/// Exact belief at an augmented index.
inline std::vector<double> belief_at(const FiniteMdp& base, const AugmentedMdp& aug, long x) {
    auto [s1, queue] = aug.decode(x);
    return belief_exact(base, s1, queue);
}

/// Belief mixture of an undelayed expert: pi(a|x) = sum_s b(s|x) pi_E(a|s).
inline TabularPolicy belief_policy(const TabularPolicy& expert, const FiniteMdp& base,
                                   const AugmentedMdp& aug) {
    require(expert.n_states == base.n_states && expert.n_actions == base.n_actions,
            "belief_policy: expert does not match the base MDP");
    TabularPolicy pi = TabularPolicy::uniform(int(aug.size()), base.n_actions);
    for (long x = 0; x < aug.size(); ++x) {
        std::vector<double> b = belief_at(base, aug, x);
        for (int a = 0; a < base.n_actions; ++a) {
            double w = 0.0;
            for (int s = 0; s < base.n_states; ++s) w += b[std::size_t(s)] * expert(s, a);
            pi.at(int(x), a) = w;
        }
    }
    pi.validate();
    return pi;
}

// ---------------------------------------------------------------------------
// Delayed performance difference identity
// ---------------------------------------------------------------------------

struct PerfDiffReport {
    double max_residual = 0.0;
    long worst_x = 0;
    int n_checked = 0;
};

struct PerfDiffIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

/// Both sides of the delayed performance-difference identity at one x.
inline PerfDiffIdentity perf_diff_check(const FiniteMdp& base, const TabularPolicy& expert,
                                        const AugmentedMdp& aug, const TabularPolicy& delayed,
                                        long x) {
    require(x >= 0 && x < aug.size(), "perf_diff_check: augmented index out of range");
    std::vector<double> v_expert = solve_v_exact(base, expert);
    std::vector<double> q_expert = solve_q_exact(base, expert);
    std::vector<double> v_delayed = solve_v_exact(aug.mdp, delayed);

    auto expectations_at = [&](long xi) {
        std::vector<double> b = belief_at(base, aug, xi);
        double e_v = 0.0, e_q = 0.0;
        for (int s = 0; s < base.n_states; ++s) {
            e_v += b[std::size_t(s)] * v_expert[std::size_t(s)];
            for (int a = 0; a < base.n_actions; ++a)
                e_q += b[std::size_t(s)] * delayed(int(xi), a) *
                       q_expert[std::size_t(s * base.n_actions + a)];
        }
        return std::make_pair(e_v, e_q);
    };

    std::vector<double> start(std::size_t(aug.size()), 0.0);
    start[std::size_t(x)] = 1.0;
    std::vector<double> occ = occupancy_exact(aug.mdp, delayed, start);

    PerfDiffIdentity out;
    out.lhs = expectations_at(x).first - v_delayed[std::size_t(x)];
    for (long x2 = 0; x2 < aug.size(); ++x2) {
        if (occ[std::size_t(x2)] == 0.0) continue;
        auto [e_v, e_q] = expectations_at(x2);
        out.rhs += occ[std::size_t(x2)] * (e_v - e_q);
    }
    out.rhs /= 1.0 - aug.mdp.gamma;
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

/**
 * Verifies the delayed performance-difference identity at every augmented
 * state: E_b[V^E] - V^del(x) equals the occupancy-weighted advantage term
 * scaled by the effective horizon.
 */
inline PerfDiffReport perf_diff_check_all(const FiniteMdp& base, const TabularPolicy& expert,
                                          const AugmentedMdp& aug, const TabularPolicy& delayed) {
    std::vector<double> v_expert = solve_v_exact(base, expert);
    std::vector<double> q_expert = solve_q_exact(base, expert);
    std::vector<double> v_delayed = solve_v_exact(aug.mdp, delayed);

    const long n = aug.size();
    // per-x' advantage gap: E_b V^E - E_{b, pi_del} Q^E
    Eigen::VectorXd gap(n), ev(n);
    for (long x = 0; x < n; ++x) {
        std::vector<double> b = belief_at(base, aug, x);
        double e_v = 0.0, e_q = 0.0;
        for (int s = 0; s < base.n_states; ++s) {
            e_v += b[std::size_t(s)] * v_expert[std::size_t(s)];
            for (int a = 0; a < base.n_actions; ++a)
                e_q += b[std::size_t(s)] * delayed(int(x), a) *
                       q_expert[std::size_t(s * base.n_actions + a)];
        }
        ev(x) = e_v;
        gap(x) = e_v - e_q;
    }

    // all Dirac-start occupancies at once: columns of (1-gamma)(I - gamma P^T)^-1
    Eigen::MatrixXd P = detail::policy_transition(aug.mdp, delayed);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - aug.mdp.gamma * P.transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::MatrixXd occ = lu.solve((1.0 - aug.mdp.gamma) * Eigen::MatrixXd::Identity(n, n));

    PerfDiffReport rep;
    rep.n_checked = int(n);
    for (long x = 0; x < n; ++x) {
        double lhs = ev(x) - v_delayed[std::size_t(x)];
        double rhs = occ.col(x).dot(gap) / (1.0 - aug.mdp.gamma);
        double residual = std::abs(lhs - rhs);
        if (residual > rep.max_residual) {
            rep.max_residual = residual;
            rep.worst_x = x;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// sigma_b and the performance bounds
// ---------------------------------------------------------------------------

/// E_{s,s' iid b(.|x)} |e_s - e_s'| for every augmented state.
inline std::vector<double> belief_spread(const FiniteMdp& base, const AugmentedMdp& aug) {
    std::vector<double> spread(std::size_t(aug.size()), 0.0);
    for (long x = 0; x < aug.size(); ++x) {
        std::vector<double> b = belief_at(base, aug, x);
        double m = 0.0;
        for (int s = 0; s < base.n_states; ++s) {
            if (b[std::size_t(s)] == 0.0) continue;
            for (int s2 = 0; s2 < base.n_states; ++s2)
                m += b[std::size_t(s)] * b[std::size_t(s2)] *
                     std::abs(base.state_embedding[std::size_t(s)] -
                              base.state_embedding[std::size_t(s2)]);
        }
        spread[std::size_t(x)] = m;
    }
    return spread;
}

/// Discounted-occupancy average of the belief spread, started from one x.
inline double sigma_b_from(const FiniteMdp& base, const AugmentedMdp& aug,
                           const TabularPolicy& delayed, long start_x) {
    std::vector<double> start(std::size_t(aug.size()), 0.0);
    start[std::size_t(start_x)] = 1.0;
    std::vector<double> occ = occupancy_exact(aug.mdp, delayed, start);
    std::vector<double> spread = belief_spread(base, aug);
    double total = 0.0;
    for (long x = 0; x < aug.size(); ++x) total += occ[std::size_t(x)] * spread[std::size_t(x)];
    return total;
}

/// Same, averaged over a start distribution rho on X (mu-tilde by default).
inline double sigma_b_rho(const FiniteMdp& base, const AugmentedMdp& aug,
                          const TabularPolicy& delayed, const std::vector<double>* rho = nullptr) {
    const std::vector<double>& start = rho ? *rho : aug.mdp.initial;
    std::vector<double> occ = occupancy_exact(aug.mdp, delayed, start);
    std::vector<double> spread = belief_spread(base, aug);
    double total = 0.0;
    for (long x = 0; x < aug.size(); ++x) total += occ[std::size_t(x)] * spread[std::size_t(x)];
    return total;
}

struct BoundReport {
    int n_checked = 0;
    double worst_violation = 0.0;  // max over x of lhs - rhs; <= tolerance to pass
    double min_slack = 0.0;        // rhs - lhs at the tightest x
    double max_lhs = 0.0;
    double max_rhs = 0.0;
    bool pass = false;
};

/**
 * Checks the dispersion form of the gap bound on a finite fixture: at every
 * augmented state the value gap of the belief policy stays below
 * L_Q L_pi sigma_b^x / (1-gamma), with every constant measured by enumeration.
 */
inline BoundReport check_bound_thm2(const FiniteMdp& base, const TabularPolicy& expert, int delay,
                                    double tolerance = 1e-9) {
    AugmentedMdp aug = build_augmented_mdp(base, delay);
    TabularPolicy pidel = belief_policy(expert, base, aug);
    LipschitzReport lips = lipschitz_report(base, expert);

    std::vector<double> v_expert = solve_v_exact(base, expert);
    std::vector<double> v_delayed = solve_v_exact(aug.mdp, pidel);
    std::vector<double> spread = belief_spread(base, aug);

    const long n = aug.size();
    Eigen::MatrixXd P = detail::policy_transition(aug.mdp, pidel);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - aug.mdp.gamma * P.transpose();
    Eigen::MatrixXd occ =
        A.partialPivLu().solve((1.0 - aug.mdp.gamma) * Eigen::MatrixXd::Identity(n, n));

    BoundReport rep;
    rep.n_checked = int(n);
    rep.min_slack = std::numeric_limits<double>::infinity();
    for (long x = 0; x < n; ++x) {
        std::vector<double> b = belief_at(base, aug, x);
        double lhs = -v_delayed[std::size_t(x)];
        for (int s = 0; s < base.n_states; ++s) lhs += b[std::size_t(s)] * v_expert[std::size_t(s)];
        double sigma = 0.0;
        for (long x2 = 0; x2 < n; ++x2) sigma += occ(x2, x) * spread[std::size_t(x2)];
        double rhs = lips.lip_q * lips.lip_pi / (1.0 - base.gamma) * sigma;
        rep.worst_violation = std::max(rep.worst_violation, lhs - rhs);
        rep.min_slack = std::min(rep.min_slack, rhs - lhs);
        rep.max_lhs = std::max(rep.max_lhs, lhs);
        rep.max_rhs = std::max(rep.max_rhs, rhs);
    }
    rep.pass = rep.worst_violation <= tolerance;
    return rep;
}

/**
 * Checks the time-Lipschitz form of the gap bound: 2 delay L_T L_Q L_pi
 * / (1-gamma) dominates the value gap at every x, and sigma_b itself stays
 * below 2 delay L_T.
 */
inline BoundReport check_bound_cor3(const FiniteMdp& base, const TabularPolicy& expert, int delay,
                                    double tolerance = 1e-9) {
    AugmentedMdp aug = build_augmented_mdp(base, delay);
    TabularPolicy pidel = belief_policy(expert, base, aug);
    LipschitzReport lips = lipschitz_report(base, expert);

    std::vector<double> v_expert = solve_v_exact(base, expert);
    std::vector<double> v_delayed = solve_v_exact(aug.mdp, pidel);
    double bound = 2.0 * double(delay) * lips.lip_t * lips.lip_q * lips.lip_pi / (1.0 - base.gamma);

    BoundReport rep;
    rep.n_checked = int(aug.size());
    rep.min_slack = std::numeric_limits<double>::infinity();
    rep.max_rhs = bound;
    for (long x = 0; x < aug.size(); ++x) {
        std::vector<double> b = belief_at(base, aug, x);
        double lhs = -v_delayed[std::size_t(x)];
        for (int s = 0; s < base.n_states; ++s) lhs += b[std::size_t(s)] * v_expert[std::size_t(s)];
        rep.worst_violation = std::max(rep.worst_violation, lhs - bound);
        rep.min_slack = std::min(rep.min_slack, bound - lhs);
        rep.max_lhs = std::max(rep.max_lhs, lhs);
    }
    // sigma_b itself obeys the time-Lipschitz cap under any start
    double sigma = sigma_b_rho(base, aug, pidel);
    rep.worst_violation = std::max(rep.worst_violation, sigma - 2.0 * double(delay) * lips.lip_t);
    rep.pass = rep.worst_violation <= tolerance;
    return rep;
}

// ---------------------------------------------------------------------------
// Gaussian-walk gap bounds, Monte Carlo
// ---------------------------------------------------------------------------

struct WalkGapEstimate {
    double gap = 0.0;      // E[V*] - V^pidel, from long-run per-step regret
    double stderr_ = 0.0;  // of the gap
    long steps = 0;
};

/**
 * Long-run value gap of a delayed policy on the Gaussian walk. V* is 0, so
 * the gap is the discounted sum of expected per-step losses; stationarity of
 * the loss process turns that into mean-per-step / (1-gamma). Episodes start
 * from the zero action queue: the walk's loss law does not depend on the
 * queue once the policy is fixed, and the zero start keeps clamped actions
 * out of the transient.
 */
template <class Policy>
WalkGapEstimate measure_walk_gap(const GaussianWalkParams& params, int delay, Policy&& policy,
                                 long n_steps, std::uint64_t seed) {
    auto denv = wrap_delayed(GaussianWalkEnv(params, 0), delay, seed);
    denv.seed(seed);
    auto x = denv.reset_with_queue(std::vector<double>(std::size_t(delay), 0.0));
    std::vector<double> losses;
    losses.reserve(std::size_t(n_steps));
    for (long t = 0; t < n_steps; ++t) {
        auto step = denv.step(policy(x));
        losses.push_back(-step.reward);
        x = step.obs;
    }
    MeanStd ms = mean_std(losses);
    WalkGapEstimate est;
    est.gap = ms.mean / (1.0 - params.gamma);
    // consecutive losses are independent: each is driven by a fresh noise window?
    // they overlap over `delay` steps, so inflate the naive stderr accordingly
    est.stderr_ = standard_error(ms) / (1.0 - params.gamma) * std::sqrt(double(delay + 1));
    est.steps = n_steps;
    return est;
}

/// The deterministic forward image phi(x) = base + sum(queue)/L_pi.
inline double walk_forward_image(const AugmentedState<double, double>& x, double lip_pi) {
    double phi = x.base;
    for (double a : x.queue) phi += a / lip_pi;
    return phi;
}

struct Cor4Report {
    WalkGapEstimate lhs;
    double rhs = 0.0;
    bool pass = false;
};

/// Euclidean-variance gap bound on the walk: belief-policy gap vs 2 L_Q L_pi sqrt(delay) sigma / (1-gamma).
inline Cor4Report check_bound_cor4_mc(const GaussianWalkParams& params, int delay, long n_steps,
                                      std::uint64_t seed) {
    auto belief_mean_policy = [&](const AugmentedState<double, double>& x) {
        return -params.lip_pi * walk_forward_image(x, params.lip_pi);
    };
    Cor4Report rep;
    rep.lhs = measure_walk_gap(params, delay, belief_mean_policy, n_steps, seed);
    rep.rhs = 2.0 * params.lip_q * params.lip_pi * std::sqrt(double(delay)) * params.sigma /
              (1.0 - params.gamma);
    rep.pass = rep.lhs.gap <= rep.rhs + 3.0 * rep.lhs.stderr_;
    return rep;
}

struct Thm5PolicyResult {
    std::string name;
    WalkGapEstimate gap;
    bool above_bound = false;
};

struct Thm5Report {
    double bound = 0.0;           // sqrt(2/pi) L_Q L_pi sqrt(delay) sigma / (1-gamma)
    double optimal_gap = 0.0;     // measured gap of the forward-image policy
    double optimal_rel_err = 0.0; // |measured - bound| / bound
    std::vector<Thm5PolicyResult> policies;
    bool noiseless_exact = false;
    bool pass = false;
};

/**
 * Lower-bound check on the constructive walk fixture: the forward-image
 * policy's measured gap matches the bound (it is the optimal delayed policy),
 * and every supplied delayed policy stays above the bound minus Monte Carlo
 * confidence.
 */
template <class ExtraPolicies>
Thm5Report check_lower_bound_thm5(const GaussianWalkParams& params, int delay, long n_steps,
                                  std::uint64_t seed, const ExtraPolicies& extra,
                                  double rel_tolerance = 0.02) {
    Thm5Report rep;
    rep.bound = std::sqrt(2.0 / M_PI) * params.lip_q * params.lip_pi * std::sqrt(double(delay)) *
                params.sigma / (1.0 - params.gamma);

    // (a) the noiseless fixture is exactly solvable: zero gap
    {
        GaussianWalkParams p0 = params;
        p0.sigma = 0.0;
        auto policy = [&](const AugmentedState<double, double>& x) {
            return -p0.lip_pi * walk_forward_image(x, p0.lip_pi);
        };
        auto est = measure_walk_gap(p0, delay, policy, 1000, seed);
        rep.noiseless_exact = est.gap == 0.0;
    }

    auto forward_policy = [&](const AugmentedState<double, double>& x) {
        return -params.lip_pi * walk_forward_image(x, params.lip_pi);
    };
    auto opt = measure_walk_gap(params, delay, forward_policy, n_steps, seed + 1);
    rep.optimal_gap = opt.gap;
    rep.optimal_rel_err = std::abs(opt.gap - rep.bound) / rep.bound;

    bool all_above = true;
    for (const auto& [name, policy] : extra) {
        Thm5PolicyResult res;
        res.name = name;
        res.gap = measure_walk_gap(params, delay, policy, n_steps, seed + 2 + rep.policies.size());
        res.above_bound = res.gap.gap >= rep.bound - 3.0 * res.gap.stderr_;
        all_above = all_above && res.above_bound;
        rep.policies.push_back(std::move(res));
    }
    rep.pass = rep.noiseless_exact && rep.optimal_rel_err <= rel_tolerance && all_above;
    return rep;
}

// ---------------------------------------------------------------------------
// Wasserstein and belief-dispersion inequalities
// ---------------------------------------------------------------------------

struct AppendixAReport {
    double worst_mean_gap_violation = 0.0;  // |EX-EY| - W1
    double worst_tlc_violation = 0.0;       // W1(b, dirac) - delay*L_T
    double worst_euclid_violation = 0.0;    // E|s-s'| - sqrt(2 Var_b), per x
    double worst_sigma_violation = 0.0;     // sigma_b - 2 delay L_T
    double min_slack_tlc = std::numeric_limits<double>::infinity();
    int n_distributions = 0;
    long n_augmented_states = 0;
    bool pass = false;
};

inline AppendixAReport check_appendix_a_props(int n_random_distributions, std::uint64_t seed,
                                              double tolerance = 1e-9) {
    AppendixAReport rep;
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // |E X - E Y| <= W1 on random finite 1-D distributions
    for (int trial = 0; trial < n_random_distributions; ++trial) {
        int n = 2 + int(rng() % 6);
        std::vector<double> pa(std::size_t(n), 0.0), wa(std::size_t(n), 0.0);
        std::vector<double> pb(std::size_t(n), 0.0), wb(std::size_t(n), 0.0);
        double ta = 0.0, tb = 0.0;
        for (int i = 0; i < n; ++i) {
            pa[std::size_t(i)] = 8.0 * unif(rng) - 4.0;
            pb[std::size_t(i)] = 8.0 * unif(rng) - 4.0;
            wa[std::size_t(i)] = unif(rng) + 1e-3;
            wb[std::size_t(i)] = unif(rng) + 1e-3;
            ta += wa[std::size_t(i)];
            tb += wb[std::size_t(i)];
        }
        double mean_a = 0.0, mean_b = 0.0;
        for (int i = 0; i < n; ++i) {
            wa[std::size_t(i)] /= ta;
            wb[std::size_t(i)] /= tb;
            mean_a += pa[std::size_t(i)] * wa[std::size_t(i)];
            mean_b += pb[std::size_t(i)] * wb[std::size_t(i)];
        }
        double w1 = wasserstein_1d(pa, wa, pb, wb);
        rep.worst_mean_gap_violation =
            std::max(rep.worst_mean_gap_violation, std::abs(mean_a - mean_b) - w1);
        rep.n_distributions++;
    }
    // equality at point masses
    {
        std::vector<double> one{1.0}, p{0.3}, q{-1.7};
        double w1 = wasserstein_1d(p, one, q, one);
        rep.worst_mean_gap_violation = std::max(rep.worst_mean_gap_violation, std::abs(2.0 - w1));
    }

    // TLC chain fixtures: belief drift, Euclidean bound, sigma_b cap
    for (double slip : {0.0, 0.3, 0.5, 0.8}) {
        for (int delay : {1, 2, 3}) {
            FiniteMdp chain = make_chain_mdp(4, slip, 1.0, 0.5, 0.9);
            MdpConstants consts = measure_constants(chain);
            AugmentedMdp aug = build_augmented_mdp(chain, delay);
            TabularPolicy expert = value_iteration_expert(chain);
            TabularPolicy pidel = belief_policy(expert, chain, aug);
            std::vector<double> spread = belief_spread(chain, aug);

            std::vector<double> dirac(std::size_t(chain.n_states), 0.0);
            for (long x = 0; x < aug.size(); ++x) {
                auto [s1, queue] = aug.decode(x);
                std::vector<double> b = belief_exact(chain, s1, queue);
                std::fill(dirac.begin(), dirac.end(), 0.0);
                dirac[std::size_t(s1)] = 1.0;
                double w1 = wasserstein_1d(b, dirac, chain.state_embedding);
                double cap = double(delay) * consts.lip_t;
                rep.worst_tlc_violation = std::max(rep.worst_tlc_violation, w1 - cap);
                rep.min_slack_tlc = std::min(rep.min_slack_tlc, cap - w1);

                // scalar Euclidean bound: E|s-s'| <= sqrt(2 Var_b)
                double mean = 0.0, second = 0.0;
                for (int s = 0; s < chain.n_states; ++s) {
                    double e = chain.state_embedding[std::size_t(s)];
                    mean += b[std::size_t(s)] * e;
                    second += b[std::size_t(s)] * e * e;
                }
                double var = std::max(0.0, second - mean * mean);
                rep.worst_euclid_violation = std::max(
                    rep.worst_euclid_violation, spread[std::size_t(x)] - std::sqrt(2.0 * var));
                rep.n_augmented_states++;
            }
            double sigma = sigma_b_rho(chain, aug, pidel);
            rep.worst_sigma_violation =
                std::max(rep.worst_sigma_violation, sigma - 2.0 * double(delay) * consts.lip_t);
        }
    }

    rep.pass = rep.worst_mean_gap_violation <= tolerance && rep.worst_tlc_violation <= tolerance &&
               rep.worst_euclid_violation <= tolerance && rep.worst_sigma_violation <= tolerance;
    return rep;
}

}  // namespace delrl
