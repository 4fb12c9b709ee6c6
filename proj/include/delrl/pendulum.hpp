#pragma once

#include <cmath>
#include <string>

#include "delrl/mdp.hpp"
#include "delrl/util.hpp"

namespace delrl {

/**
 * Swing-up pendulum matching the conventional simulator: g=10, m=1, l=1,
 * dt=0.05, torque clamped to [-2,2], angular velocity clipped to [-8,8],
 * cost theta^2 + 0.1 theta_dot^2 + 0.001 u^2 with theta wrapped to (-pi,pi]
 * (0 = upright). Episodes are fixed-length (200 by convention); the
 * environment itself never terminates.
 *
 * One control step integrates `substeps` semi-implicit Euler micro-steps of
 * dt/substeps each. Because fractions of a step reuse the same micro-grid,
 * integrating f then 1-f of a step under one action reproduces the full step
 * exactly, which is what constant non-integer delays require.
 */
struct PendulumParams {
    double gravity = 10.0;
    double mass = 1.0;
    double length = 1.0;
    double dt = 0.05;
    double max_torque = 2.0;
    double max_speed = 8.0;
    int substeps = 1;
};

struct PendulumState {
    double theta = 0.0;
    double theta_dot = 0.0;
};

/// Advances one control step scaled by dt_fraction; reward from the pre-step state and torque.
inline std::pair<PendulumState, double> pendulum_step(const PendulumState& state, double torque,
                                                      const PendulumParams& params,
                                                      double dt_fraction = 1.0) {
    require(dt_fraction > 0.0 && dt_fraction <= 1.0, "pendulum_step: dt_fraction must lie in (0,1]");
    double u = clamp(torque, -params.max_torque, params.max_torque);
    double cost = wrap_angle(state.theta) * wrap_angle(state.theta) +
                  0.1 * state.theta_dot * state.theta_dot + 0.001 * u * u;

    int micro = std::max(1, int(std::lround(dt_fraction * params.substeps)));
    require(std::abs(dt_fraction * params.substeps - double(micro)) < 1e-9,
            "pendulum_step: dt_fraction must land on the integration micro-grid");
    double h = params.dt / double(params.substeps);
    PendulumState s = state;
    for (int k = 0; k < micro; ++k) {
        double accel = 3.0 * params.gravity / (2.0 * params.length) * std::sin(s.theta) +
                       3.0 / (params.mass * params.length * params.length) * u;
        s.theta_dot = clamp(s.theta_dot + accel * h, -params.max_speed, params.max_speed);
        s.theta = wrap_angle(s.theta + s.theta_dot * h);
    }
    return {s, -cost};
}

/// Total mechanical energy (rod pivoted at one end; upright potential mg*l/2).
inline double pendulum_energy(const PendulumState& s, const PendulumParams& p) {
    double inertia = p.mass * p.length * p.length / 3.0;
    return 0.5 * inertia * s.theta_dot * s.theta_dot +
           p.mass * p.gravity * (p.length / 2.0) * std::cos(s.theta);
}

class PendulumEnv {
  public:
    using Obs = PendulumState;
    using Act = double;

    explicit PendulumEnv(PendulumParams params = {}, std::uint64_t seed = 0)
        : params_(params), rng_(seed) {}

    void seed(std::uint64_t s) { rng_.seed(s); }

    Obs reset() {
        std::uniform_real_distribution<double> ang(-M_PI, M_PI);
        std::uniform_real_distribution<double> vel(-1.0, 1.0);
        state_.theta = ang(rng_);
        state_.theta_dot = vel(rng_);
        return state_;
    }

    Obs reset_to(const PendulumState& s) {
        state_ = s;
        return state_;
    }

    Step<Obs> step(Act torque) { return step_fraction(torque, 1.0); }

    Step<Obs> step_fraction(Act torque, double fraction) {
        auto [next, reward] = pendulum_step(state_, torque, params_, fraction);
        state_ = next;
        return {state_, reward, false};
    }

    bool supports_fraction(double f) const {
        double cells = f * params_.substeps;
        return cells > 0.5 && std::abs(cells - std::lround(cells)) < 1e-9;
    }

    double reward_at(const Obs& s, Act torque) const {
        double u = clamp(torque, -params_.max_torque, params_.max_torque);
        return -(wrap_angle(s.theta) * wrap_angle(s.theta) + 0.1 * s.theta_dot * s.theta_dot +
                 0.001 * u * u);
    }

    Act sample_uniform_action_with(Rng& rng) const {
        std::uniform_real_distribution<double> d(-params_.max_torque, params_.max_torque);
        return d(rng);
    }

    const PendulumParams& params() const { return params_; }
    const Obs& state() const { return state_; }

  private:
    PendulumParams params_;
    Rng rng_;
    PendulumState state_;
};

// ---------------------------------------------------------------------------
// Action-noise menu for the stochastic pendulum
// ---------------------------------------------------------------------------

/**
 * i.i.d. action noise eps = scale * (eta + shift), or a full uniform
 * replacement of the action with probability override_prob. The beta rows of
 * the menu default to the zero-mean reading (shift -0.5); the literal table
 * shift (+0.5) stays available behind the factory flag.
 */
struct NoiseSpec {
    enum class Kind { none, beta, triangular, lognormal, uniform_override };
    Kind kind = Kind::none;
    double p1 = 0.0;  // beta alpha / triangular low / lognormal mu
    double p2 = 0.0;  // beta beta / triangular mode / lognormal sigma
    double p3 = 0.0;  // triangular high
    double shift = 0.0;
    double scale = 1.0;
    double override_prob = 0.0;
    std::string name = "none";
};

inline NoiseSpec make_noise(const std::string& name, bool literal_table_shift = false) {
    double beta_shift = literal_table_shift ? 0.5 : -0.5;
    NoiseSpec n;
    n.name = name;
    if (name == "none") {
        n.kind = NoiseSpec::Kind::none;
    } else if (name == "beta_8_2") {
        n = {NoiseSpec::Kind::beta, 8.0, 2.0, 0.0, beta_shift, 2.0, 0.0, name};
    } else if (name == "beta_2_2") {
        n = {NoiseSpec::Kind::beta, 2.0, 2.0, 0.0, beta_shift, 2.0, 0.0, name};
    } else if (name == "u_shaped") {
        n = {NoiseSpec::Kind::beta, 0.5, 0.5, 0.0, beta_shift, 2.0, 0.0, name};
    } else if (name == "triangular") {
        n = {NoiseSpec::Kind::triangular, -2.0, 1.0, 2.0, 0.0, 1.0, 0.0, name};
    } else if (name == "lognormal_1") {
        n = {NoiseSpec::Kind::lognormal, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0, name};
    } else if (name == "lognormal_01") {
        n = {NoiseSpec::Kind::lognormal, 0.0, 0.1, 0.0, -1.0, 1.0, 0.0, name};
    } else if (name == "uniform") {
        n.kind = NoiseSpec::Kind::uniform_override;
        n.override_prob = 0.1;
    } else {
        throw std::invalid_argument("make_noise: unknown noise name '" + name + "'");
    }
    return n;
}

inline double sample_noise_eta(const NoiseSpec& spec, Rng& rng) {
    switch (spec.kind) {
        case NoiseSpec::Kind::beta: {
            std::gamma_distribution<double> ga(spec.p1, 1.0), gb(spec.p2, 1.0);
            double x = ga(rng), y = gb(rng);
            return x / (x + y);
        }
        case NoiseSpec::Kind::triangular: {
            // inverse-CDF sampling on (low, mode, high)
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            double u = unif(rng);
            double low = spec.p1, mode = spec.p2, high = spec.p3;
            double cut = (mode - low) / (high - low);
            if (u < cut) return low + std::sqrt(u * (high - low) * (mode - low));
            return high - std::sqrt((1.0 - u) * (high - low) * (high - mode));
        }
        case NoiseSpec::Kind::lognormal: {
            std::lognormal_distribution<double> d(spec.p1, spec.p2);
            return d(rng);
        }
        default:
            return 0.0;
    }
}

/// Applies the noise to an action and clamps the result to [lo, hi].
inline double apply_noise(const NoiseSpec& spec, double action, double lo, double hi, Rng& rng) {
    if (spec.kind == NoiseSpec::Kind::none) return clamp(action, lo, hi);
    if (spec.kind == NoiseSpec::Kind::uniform_override) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        if (unif(rng) < spec.override_prob) {
            std::uniform_real_distribution<double> act(lo, hi);
            return act(rng);
        }
        return clamp(action, lo, hi);
    }
    double eps = spec.scale * (sample_noise_eta(spec, rng) + spec.shift);
    return clamp(action + eps, lo, hi);
}

/// Pendulum with the configured action noise applied at every true step.
class NoisyPendulumEnv {
  public:
    using Obs = PendulumState;
    using Act = double;

    NoisyPendulumEnv(PendulumParams params, NoiseSpec noise, std::uint64_t seed = 0)
        : env_(params), noise_(noise) {
        this->seed(seed);
    }

    void seed(std::uint64_t s) {
        env_.seed(s);
        noise_rng_.seed(s ^ 0xa0761d6478bd642full);
    }

    Obs reset() { return env_.reset(); }

    Step<Obs> step(Act torque) {
        double lo = -env_.params().max_torque, hi = env_.params().max_torque;
        return env_.step(apply_noise(noise_, torque, lo, hi, noise_rng_));
    }

    Act sample_uniform_action_with(Rng& rng) const { return env_.sample_uniform_action_with(rng); }

    const PendulumParams& params() const { return env_.params(); }
    const Obs& state() const { return env_.state(); }

  private:
    PendulumEnv env_;
    NoiseSpec noise_;
    Rng noise_rng_;
};

}  // namespace delrl
