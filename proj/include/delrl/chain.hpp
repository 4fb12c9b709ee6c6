#pragma once

#include "delrl/mdp.hpp"
#include "delrl/util.hpp"

namespace delrl {

/**
 * 1-D chain of n states with actions {left, stay, right} (embeddings -1,0,+1)
 * and a slip probability of not moving. Moves off the edges stay in place.
 * Rewards are affine in the embedded state and action, so the chain is
 * Lipschitz by construction with constants measurable exactly:
 *
 *   r(s,a) = state_gain * e[s]/(n-1) + action_gain * g[a]
 *
 * With slip in [0,1] the chain is (1-slip)-TLC.
 */
inline FiniteMdp make_chain_mdp(int n_states, double slip, double state_gain, double action_gain,
                                double gamma) {
    require(n_states >= 2, "make_chain_mdp: need at least 2 states");
    require(slip >= 0.0 && slip <= 1.0, "make_chain_mdp: slip must lie in [0,1]");
    FiniteMdp mdp = FiniteMdp::make(n_states, 3, gamma);
    mdp.action_embedding = {-1.0, 0.0, 1.0};
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < 3; ++a) {
            mdp.r(s, a) = state_gain * mdp.state_embedding[std::size_t(s)] / double(n_states - 1) +
                          action_gain * mdp.action_embedding[std::size_t(a)];
            int target = s + (a - 1);
            if (target < 0 || target >= n_states) target = s;
            if (a == 1 || target == s) {
                mdp.p(s, a, s) = 1.0;
            } else {
                mdp.p(s, a, target) = 1.0 - slip;
                mdp.p(s, a, s) += slip;
            }
        }
    }
    mdp.validate();
    return mdp;
}

}  // namespace delrl
