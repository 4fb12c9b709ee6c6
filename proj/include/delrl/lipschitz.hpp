#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "delrl/mdp.hpp"
#include "delrl/wasserstein.hpp"

namespace delrl {

struct MdpConstants {
    double lip_p = 0.0;  // transition kernel, joint (state, action) argument
    double lip_r = 0.0;  // mean reward, joint argument
    double lip_t = 0.0;  // time-Lipschitz: W1(p(.|s,a), delta_s)
};

namespace detail {

inline double ratio_or_inf(double num, double den) {
    if (num <= 1e-15) return 0.0;
    if (den <= 1e-15) return std::numeric_limits<double>::infinity();
    return num / den;
}

}  // namespace detail

/**
 * Exact Lipschitz constants of a finite embedded MDP: maxima over all
 * state-action pairs using the 1-D Wasserstein distance on the state
 * embedding and absolute distances on the embeddings themselves.
 */
inline MdpConstants measure_constants(const FiniteMdp& mdp) {
    MdpConstants out;
    const int S = mdp.n_states, A = mdp.n_actions;
    std::vector<double> row_a(std::size_t(S), 0.0), row_b(std::size_t(S), 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            for (int j = 0; j < S; ++j) row_a[std::size_t(j)] = mdp.p(s, a, j);
            // L_T: distance moved away from the Dirac at s in one step
            double lt = 0.0;
            for (int j = 0; j < S; ++j)
                lt += row_a[std::size_t(j)] *
                      std::abs(mdp.state_embedding[std::size_t(j)] - mdp.state_embedding[std::size_t(s)]);
            out.lip_t = std::max(out.lip_t, lt);

            for (int s2 = 0; s2 < S; ++s2)
                for (int a2 = 0; a2 < A; ++a2) {
                    if (s2 == s && a2 == a) continue;
                    double den = std::abs(mdp.state_embedding[std::size_t(s)] -
                                          mdp.state_embedding[std::size_t(s2)]) +
                                 std::abs(mdp.action_embedding[std::size_t(a)] -
                                          mdp.action_embedding[std::size_t(a2)]);
                    for (int j = 0; j < S; ++j) row_b[std::size_t(j)] = mdp.p(s2, a2, j);
                    double w = wasserstein_1d(row_a, row_b, mdp.state_embedding);
                    out.lip_p = std::max(out.lip_p, detail::ratio_or_inf(w, den));
                    out.lip_r =
                        std::max(out.lip_r, detail::ratio_or_inf(std::abs(mdp.r(s, a) - mdp.r(s2, a2)), den));
                }
        }
    return out;
}

/// Smallest L such that W1(pi(.|s), pi(.|s')) <= L |e_s - e_s'| on the action embedding.
inline double measure_policy_lipschitz(const FiniteMdp& mdp, const TabularPolicy& pi) {
    double lip = 0.0;
    std::vector<double> row_a(std::size_t(mdp.n_actions), 0.0), row_b(std::size_t(mdp.n_actions), 0.0);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int s2 = s + 1; s2 < mdp.n_states; ++s2) {
            for (int a = 0; a < mdp.n_actions; ++a) {
                row_a[std::size_t(a)] = pi(s, a);
                row_b[std::size_t(a)] = pi(s2, a);
            }
            double w = wasserstein_1d(row_a, row_b, mdp.action_embedding);
            double den =
                std::abs(mdp.state_embedding[std::size_t(s)] - mdp.state_embedding[std::size_t(s2)]);
            lip = std::max(lip, detail::ratio_or_inf(w, den));
        }
    return lip;
}

/// Lipschitz constant of Q in the action argument only: max_s max_{a,a'} |dQ|/|dg|.
inline double measure_q_action_lipschitz(const FiniteMdp& mdp, const std::vector<double>& q) {
    double lip = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            for (int a2 = a + 1; a2 < mdp.n_actions; ++a2) {
                double num = std::abs(q[std::size_t(s * mdp.n_actions + a)] -
                                      q[std::size_t(s * mdp.n_actions + a2)]);
                double den = std::abs(mdp.action_embedding[std::size_t(a)] -
                                      mdp.action_embedding[std::size_t(a2)]);
                lip = std::max(lip, detail::ratio_or_inf(num, den));
            }
    return lip;
}

/**
 * Collected smoothness constants of a fixture. The closed-form value
 * L_r / (1 - gamma L_P (1 + L_pi)) is reported only where its condition
 * holds; lip_q is always the enumerated second-argument constant.
 */
struct LipschitzReport {
    double lip_p = 0.0;
    double lip_r = 0.0;
    double lip_t = 0.0;
    double lip_pi = 0.0;
    double lip_q = 0.0;
    bool formula_valid = false;
    double lip_q_formula = 0.0;
};

inline LipschitzReport lipschitz_report(const FiniteMdp& mdp, const TabularPolicy& expert) {
    LipschitzReport rep;
    MdpConstants mc = measure_constants(mdp);
    rep.lip_p = mc.lip_p;
    rep.lip_r = mc.lip_r;
    rep.lip_t = mc.lip_t;
    rep.lip_pi = measure_policy_lipschitz(mdp, expert);
    rep.lip_q = measure_q_action_lipschitz(mdp, solve_q_exact(mdp, expert));
    double cond = mdp.gamma * rep.lip_p * (1.0 + rep.lip_pi);
    if (cond < 1.0) {
        rep.formula_valid = true;
        rep.lip_q_formula = rep.lip_r / (1.0 - cond);
    }
    return rep;
}

}  // namespace delrl
