#pragma once

#include <cmath>

#include "delrl/mdp.hpp"
#include "delrl/util.hpp"

namespace delrl {

/**
 * Linear-Gaussian walk with the constructive lower-bound structure:
 * s' = s + a/L_pi + N(0, sigma^2), r(s,a) = -L_r |s + a/L_pi| with
 * L_r = L_Q * L_pi. The policy a = -L_pi s collects zero reward everywhere
 * and is optimal; Q*(s,a) = -L_Q |L_pi s + a|.
 */
struct GaussianWalkParams {
    double lip_pi = 1.0;
    double lip_q = 1.0;
    double sigma = 0.1;
    double gamma = 0.9;
    double state_clip = 50.0;   // numerical safety, measure-negligible at tested sigma
    double action_bound = 10.0;

    double lip_r() const { return lip_q * lip_pi; }
};

inline std::pair<double, double> gaussian_walk_step(double s, double a, const GaussianWalkParams& p,
                                                    Rng& rng) {
    require(p.lip_pi > 0.0 && p.lip_q > 0.0 && p.sigma >= 0.0, "gaussian_walk_step: bad parameters");
    a = clamp(a, -p.action_bound, p.action_bound);
    double drift = s + a / p.lip_pi;
    double reward = -p.lip_r() * std::abs(drift);
    double noise = 0.0;
    if (p.sigma > 0.0) {
        std::normal_distribution<double> d(0.0, p.sigma);
        noise = d(rng);
    }
    double next = clamp(drift + noise, -p.state_clip, p.state_clip);
    return {next, reward};
}

class GaussianWalkEnv {
  public:
    using Obs = double;
    using Act = double;

    explicit GaussianWalkEnv(GaussianWalkParams params = {}, std::uint64_t seed = 0)
        : params_(params), rng_(seed) {}

    void seed(std::uint64_t s) { rng_.seed(s); }

    Obs reset() {
        state_ = 0.0;
        return state_;
    }

    Step<Obs> step(Act a) {
        auto [next, reward] = gaussian_walk_step(state_, a, params_, rng_);
        state_ = next;
        return {state_, reward, false};
    }

    Act sample_uniform_action_with(Rng& rng) const {
        std::uniform_real_distribution<double> d(-params_.action_bound, params_.action_bound);
        return d(rng);
    }

    const GaussianWalkParams& params() const { return params_; }
    Obs state() const { return state_; }

  private:
    GaussianWalkParams params_;
    Rng rng_;
    double state_ = 0.0;
};

/**
 * Grid discretization of the walk for exact solves. The action grid mirrors
 * -L_pi * (state grid), so the optimal continuous action stays representable
 * and V* remains exactly 0 on the grid.
 */
inline FiniteMdp discretize_gaussian_walk(const GaussianWalkParams& p, int n_states, double s_max) {
    require(n_states >= 3, "discretize_gaussian_walk: need at least 3 grid points");
    FiniteMdp mdp = FiniteMdp::make(n_states, n_states, p.gamma);
    double h = 2.0 * s_max / double(n_states - 1);
    for (int i = 0; i < n_states; ++i) {
        double s = -s_max + h * double(i);
        mdp.state_embedding[std::size_t(i)] = s;
        mdp.action_embedding[std::size_t(i)] = -p.lip_pi * s;
    }
    for (int si = 0; si < n_states; ++si) {
        double s = mdp.state_embedding[std::size_t(si)];
        for (int ai = 0; ai < n_states; ++ai) {
            double a = mdp.action_embedding[std::size_t(ai)];
            double drift = s + a / p.lip_pi;
            mdp.r(si, ai) = -p.lip_r() * std::abs(drift);
            // bin the Gaussian around the drift onto the grid, renormalized
            double total = 0.0;
            for (int sj = 0; sj < n_states; ++sj) {
                double center = mdp.state_embedding[std::size_t(sj)];
                double lo = center - h / 2.0, hi = center + h / 2.0;
                double mass;
                if (p.sigma == 0.0) {
                    mass = (drift >= lo && drift < hi) ? 1.0 : 0.0;
                } else {
                    auto cdf = [&](double x) {
                        return 0.5 * std::erfc(-(x - drift) / (p.sigma * std::sqrt(2.0)));
                    };
                    mass = cdf(hi) - cdf(lo);
                }
                mdp.p(si, ai, sj) = mass;
                total += mass;
            }
            if (total <= 0.0) {
                int nearest = int(std::lround((clamp(drift, -s_max, s_max) + s_max) / h));
                mdp.p(si, ai, nearest) = 1.0;
                total = 1.0;
            }
            for (int sj = 0; sj < n_states; ++sj) mdp.p(si, ai, sj) /= total;
        }
    }
    int mid = (n_states - 1) / 2;
    mdp.initial.assign(std::size_t(n_states), 0.0);
    mdp.initial[std::size_t(mid)] = 1.0;
    mdp.validate();
    return mdp;
}

}  // namespace delrl
