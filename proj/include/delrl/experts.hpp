#pragma once

#include <cmath>

#include "delrl/gaussian_walk.hpp"
#include "delrl/mdp.hpp"
#include "delrl/pendulum.hpp"
#include "delrl/util.hpp"

namespace delrl {

/**
 * Undelayed swing-up controller: energy-shaping torque k_e * theta_dot *
 * (E_target - E) far from upright, blended smoothly into PD stabilization
 * near the top. The logistic blend keeps the policy continuous, so its
 * empirical Lipschitz constant is finite; `audit_lipschitz` measures it.
 */
struct PendulumExpertGains {
    double energy = 1.2;
    double kp = 12.0;
    double kd = 3.2;
    double blend_cos_center = 0.92;  // engage PD once cos(theta) climbs past this
    double blend_cos_width = 0.03;
    double blend_speed_center = 2.5;  // and the spin has died down
    double blend_speed_width = 0.5;
};

class PendulumEnergyExpert {
  public:
    explicit PendulumEnergyExpert(PendulumParams params = {}, PendulumExpertGains gains = {})
        : params_(params), gains_(gains) {
        target_energy_ = params_.mass * params_.gravity * params_.length / 2.0;
    }

    double operator()(const PendulumState& s) const {
        double theta = wrap_angle(s.theta);
        double energy_gap = target_energy_ - pendulum_energy(s, params_);
        double pump = gains_.energy * s.theta_dot * energy_gap;
        double pd = -gains_.kp * theta - gains_.kd * s.theta_dot;
        double w = logistic((std::cos(theta) - gains_.blend_cos_center) / gains_.blend_cos_width) *
                   logistic((gains_.blend_speed_center - std::abs(s.theta_dot)) / gains_.blend_speed_width);
        double u = w * pd + (1.0 - w) * pump;
        return clamp(u, -params_.max_torque, params_.max_torque);
    }

    double operator()(const PendulumState& s, Rng&) const { return (*this)(s); }

    /**
     * Finite-difference Lipschitz audit over random nearby state pairs under
     * the metric sqrt(wrap(dtheta)^2 + dthetadot^2). The measured constant is
     * stored as the expert's declared smoothness.
     */
    double audit_lipschitz(int n_pairs = 10000, std::uint64_t seed = 0, double eps = 1e-3) {
        Rng rng(seed);
        std::uniform_real_distribution<double> ang(-M_PI, M_PI);
        std::uniform_real_distribution<double> vel(-8.0, 8.0);
        std::uniform_real_distribution<double> dir(-1.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < n_pairs; ++i) {
            PendulumState a{ang(rng), vel(rng)};
            double dx = dir(rng), dy = dir(rng);
            double norm = std::sqrt(dx * dx + dy * dy);
            if (norm < 1e-9) continue;
            PendulumState b{wrap_angle(a.theta + eps * dx / norm), a.theta_dot + eps * dy / norm};
            double d_state = std::sqrt(std::pow(wrap_angle(a.theta - b.theta), 2) +
                                       std::pow(a.theta_dot - b.theta_dot, 2));
            if (d_state < 1e-12) continue;
            worst = std::max(worst, std::abs((*this)(a) - (*this)(b)) / d_state);
        }
        declared_lipschitz_ = worst;
        return worst;
    }

    double declared_lipschitz() const { return declared_lipschitz_; }
    const PendulumParams& params() const { return params_; }

  private:
    static double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

    PendulumParams params_;
    PendulumExpertGains gains_;
    double target_energy_ = 0.0;
    double declared_lipschitz_ = 0.0;
};

/// Greedy policy of the value-iteration fixed point; ties go to the lowest action index.
inline TabularPolicy value_iteration_expert(const FiniteMdp& mdp, double tol = 1e-9) {
    auto vi = value_iteration(mdp, tol);
    return TabularPolicy::deterministic(mdp.n_states, mdp.n_actions, vi.greedy);
}

/// The zero-reward policy of the Gaussian walk: a = -L_pi * s, exactly.
struct GaussianOptimalExpert {
    double lip_pi = 1.0;
    double operator()(double s) const { return -lip_pi * s; }
    double operator()(double s, Rng&) const { return -lip_pi * s; }
};

}  // namespace delrl
