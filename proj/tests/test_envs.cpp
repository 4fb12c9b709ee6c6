#include <catch2/catch_amalgamated.hpp>

#include "delrl/chain.hpp"
#include "delrl/delay.hpp"
#include "delrl/gaussian_walk.hpp"
#include "delrl/lipschitz.hpp"
#include "delrl/pendulum.hpp"

using namespace delrl;

TEST_CASE("pendulum cost anchors", "[pendulum]") {
    PendulumParams p;
    auto [up, r_up] = pendulum_step({0.0, 0.0}, 0.0, p);
    REQUIRE(r_up == 0.0);
    REQUIRE(up.theta == 0.0);
    REQUIRE(up.theta_dot == 0.0);  // upright is the cost's fixed point

    auto [down, r_down] = pendulum_step({M_PI, 0.0}, 0.0, p);
    REQUIRE_THAT(r_down, Catch::Matchers::WithinAbs(-M_PI * M_PI, 1e-12));
    (void)down;

    auto [st, r_torque] = pendulum_step({0.0, 0.0}, 2.0, p);
    REQUIRE_THAT(r_torque, Catch::Matchers::WithinAbs(-0.004, 1e-15));
    (void)st;
}

TEST_CASE("pendulum wrapping and clipping are enforced per substep", "[pendulum]") {
    PendulumParams p;
    auto [s, r] = pendulum_step({M_PI - 0.01, 7.9}, 2.0, p);
    REQUIRE(s.theta_dot <= p.max_speed);
    REQUIRE(s.theta > -M_PI);
    REQUIRE(s.theta <= M_PI);
    (void)r;
}

TEST_CASE("pendulum energy drift shrinks with the micro-step", "[pendulum][property]") {
    auto worst_step_drift = [](int substeps) {
        PendulumParams p;
        p.substeps = substeps;
        PendulumState s{2.0, 0.0};  // swings freely, spin never reaches the clip
        double worst = 0.0;
        for (int t = 0; t < 200; ++t) {
            double e_before = pendulum_energy(s, p);
            s = pendulum_step(s, 0.0, p).first;
            worst = std::max(worst, std::abs(pendulum_energy(s, p) - e_before));
        }
        return worst;
    };
    double d1 = worst_step_drift(1);
    double d4 = worst_step_drift(4);
    REQUIRE(d1 < 0.12);       // O(dt^2) scale at dt=0.05
    REQUIRE(d4 < d1 / 2.5);   // refining the grid shrinks the drift
}

TEST_CASE("noise with zero scale leaves the action alone", "[noise]") {
    NoiseSpec spec = make_noise("beta_2_2");
    spec.scale = 0.0;
    Rng rng(0);
    REQUIRE(apply_noise(spec, 0.7, -2.0, 2.0, rng) == 0.7);
}

TEST_CASE("beta noise menu is zero-mean with the documented variances", "[noise]") {
    const int n = 1000000;
    for (auto [name, want_var] : {std::pair<const char*, double>{"beta_2_2", 0.2},
                                  std::pair<const char*, double>{"u_shaped", 0.5}}) {
        NoiseSpec spec = make_noise(name);
        Rng rng(8);
        std::vector<double> eps(std::size_t(n), 0.0);
        for (int i = 0; i < n; ++i)
            eps[std::size_t(i)] = spec.scale * (sample_noise_eta(spec, rng) + spec.shift);
        MeanStd ms = mean_std(eps);
        REQUIRE(std::abs(ms.mean) <= 3.0 * standard_error(ms));
        REQUIRE_THAT(ms.stddev * ms.stddev, Catch::Matchers::WithinAbs(want_var, 0.005));
    }
}

TEST_CASE("remaining noise rows match their analytic means", "[noise]") {
    const int n = 1000000;
    struct Row {
        const char* name;
        double mean;
    };
    for (auto row : {Row{"beta_8_2", 2.0 * (0.8 - 0.5)}, Row{"triangular", 1.0 / 3.0},
                     Row{"lognormal_1", std::exp(0.5) - 1.0},
                     Row{"lognormal_01", std::exp(0.005) - 1.0}}) {
        NoiseSpec spec = make_noise(row.name);
        Rng rng(21);
        std::vector<double> eps(std::size_t(n), 0.0);
        for (int i = 0; i < n; ++i)
            eps[std::size_t(i)] = spec.scale * (sample_noise_eta(spec, rng) + spec.shift);
        MeanStd ms = mean_std(eps);
        REQUIRE(std::abs(ms.mean - row.mean) <= 3.0 * standard_error(ms));
    }
}

TEST_CASE("literal table shift stays available behind the flag", "[noise]") {
    NoiseSpec spec = make_noise("beta_2_2", true);
    Rng rng(3);
    double total = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) total += spec.scale * (sample_noise_eta(spec, rng) + spec.shift);
    REQUIRE_THAT(total / n, Catch::Matchers::WithinAbs(2.0, 0.01));  // 2*(0.5+0.5)
}

TEST_CASE("uniform override hits a 5-deep queue with the tabulated probability", "[noise]") {
    NoiseSpec spec = make_noise("uniform");
    Rng rng(13);
    const int groups = 200000;
    int hit = 0;
    for (int g = 0; g < groups; ++g) {
        bool any = false;
        for (int k = 0; k < 5; ++k)
            if (apply_noise(spec, 0.0, -2.0, 2.0, rng) != 0.0) any = true;
        if (any) ++hit;
    }
    double freq = double(hit) / double(groups);
    REQUIRE_THAT(freq, Catch::Matchers::WithinAbs(1.0 - std::pow(0.9, 5), 0.005));
}

TEST_CASE("gaussian walk step anchors", "[walk]") {
    GaussianWalkParams p;
    p.sigma = 0.0;
    Rng rng(0);
    auto [s1, r1] = gaussian_walk_step(2.7, -p.lip_pi * 2.7, p, rng);
    REQUIRE(s1 == 0.0);
    REQUIRE(r1 == 0.0);
    auto [s2, r2] = gaussian_walk_step(1.0, 0.0, p, rng);
    REQUIRE(s2 == 1.0);
    REQUIRE(r2 == -p.lip_r());
}

TEST_CASE("optimal policy pins the walk at zero when noiseless", "[walk]") {
    GaussianWalkParams p;
    p.sigma = 0.0;
    GaussianWalkEnv env(p, 0);
    env.reset();
    Rng rng(0);
    auto [s, r] = gaussian_walk_step(-3.2, p.lip_pi * 3.2 / 1.0, p, rng);
    REQUIRE(s == 0.0);
    for (int t = 0; t < 5; ++t) {
        auto step = env.step(-p.lip_pi * env.state());
        REQUIRE(step.obs == 0.0);
        REQUIRE(step.reward == 0.0);
    }
    (void)r;
}

TEST_CASE("delayed walk under the forward-image policy pays the half-normal rate", "[walk]") {
    // delta=1 delayed optimum: a = -L_pi * phi(x); per-step reward -L_r sigma sqrt(2/pi)
    GaussianWalkParams p;  // sigma 0.1
    auto denv = wrap_delayed(GaussianWalkEnv(p, 0), 1, 5);
    auto x = denv.reset();
    double total = 0.0;
    const int n = 200000;
    for (int t = 0; t < n; ++t) {
        double phi = x.base + x.queue[0] / p.lip_pi;
        auto step = denv.step(-p.lip_pi * phi);
        total += step.reward;
        x = step.obs;
    }
    double expected = -p.lip_r() * p.sigma * std::sqrt(2.0 / M_PI);
    REQUIRE_THAT(total / n, Catch::Matchers::WithinAbs(expected, 6e-4));
}

TEST_CASE("chain time constants follow the slip", "[chain][constants]") {
    REQUIRE(measure_constants(make_chain_mdp(5, 0.0, 0.0, 0.0, 0.9)).lip_t == 1.0);
    REQUIRE(measure_constants(make_chain_mdp(5, 1.0, 0.0, 0.0, 0.9)).lip_t == 0.0);
    REQUIRE_THAT(measure_constants(make_chain_mdp(3, 0.5, 0.0, 0.0, 0.9)).lip_t,
                 Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("degenerate constants vanish", "[constants]") {
    FiniteMdp constant_reward = make_chain_mdp(4, 0.2, 0.0, 0.0, 0.9);
    REQUIRE(measure_constants(constant_reward).lip_r == 0.0);

    FiniteMdp same_rows = FiniteMdp::make(3, 2, 0.9);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a)
            for (int s2 = 0; s2 < 3; ++s2) same_rows.p(s, a, s2) = 1.0 / 3.0;
    REQUIRE(measure_constants(same_rows).lip_p == 0.0);
}

TEST_CASE("constants are invariant under consistent state relabeling", "[constants][property]") {
    FiniteMdp m = make_chain_mdp(5, 0.3, 1.2, -0.4, 0.9);
    MdpConstants base = measure_constants(m);

    std::vector<int> perm{3, 0, 4, 1, 2};
    FiniteMdp permuted = FiniteMdp::make(5, 3, 0.9);
    permuted.action_embedding = m.action_embedding;
    for (int s = 0; s < 5; ++s) {
        permuted.state_embedding[std::size_t(perm[std::size_t(s)])] = m.state_embedding[std::size_t(s)];
        for (int a = 0; a < 3; ++a) {
            permuted.r(perm[std::size_t(s)], a) = m.r(s, a);
            for (int s2 = 0; s2 < 5; ++s2)
                permuted.p(perm[std::size_t(s)], a, perm[std::size_t(s2)]) = m.p(s, a, s2);
        }
    }
    permuted.validate();
    MdpConstants shuffled = measure_constants(permuted);
    REQUIRE_THAT(shuffled.lip_p, Catch::Matchers::WithinAbs(base.lip_p, 1e-12));
    REQUIRE_THAT(shuffled.lip_r, Catch::Matchers::WithinAbs(base.lip_r, 1e-12));
    REQUIRE_THAT(shuffled.lip_t, Catch::Matchers::WithinAbs(base.lip_t, 1e-12));
}

TEST_CASE("discretized walk reproduces the closed-form optimal Q", "[walk][oracle]") {
    GaussianWalkParams p;
    p.lip_pi = 1.0;
    p.lip_q = 1.0;
    p.sigma = 0.1;
    FiniteMdp grid = discretize_gaussian_walk(p, 41, 2.0);
    auto vi = value_iteration(grid, 1e-9);
    for (double v : vi.v) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-6));
    TabularPolicy greedy = TabularPolicy::deterministic(grid.n_states, grid.n_actions, vi.greedy);
    auto q = solve_q_exact(grid, greedy);
    for (int s = 0; s < grid.n_states; ++s)
        for (int a = 0; a < grid.n_actions; ++a) {
            double closed_form = -p.lip_q * std::abs(p.lip_pi * grid.state_embedding[std::size_t(s)] +
                                                     grid.action_embedding[std::size_t(a)]);
            REQUIRE_THAT(q[std::size_t(s * grid.n_actions + a)],
                         Catch::Matchers::WithinAbs(closed_form, 1e-6));
        }
}
