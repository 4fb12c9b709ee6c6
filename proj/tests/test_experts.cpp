#include <catch2/catch_amalgamated.hpp>

#include "delrl/experts.hpp"

using namespace delrl;

namespace {

FiniteMdp random_mdp(int n_states, int n_actions, double gamma, Rng& rng) {
    FiniteMdp m = FiniteMdp::make(n_states, n_actions, gamma);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
            double total = 0.0;
            for (int s2 = 0; s2 < n_states; ++s2) {
                double w = unif(rng) + 1e-3;
                m.p(s, a, s2) = w;
                total += w;
            }
            for (int s2 = 0; s2 < n_states; ++s2) m.p(s, a, s2) /= total;
            m.r(s, a) = 2.0 * unif(rng) - 1.0;
        }
    return m;
}

}  // namespace

TEST_CASE("pendulum expert is quiet at the upright equilibrium", "[experts]") {
    PendulumEnergyExpert expert;
    REQUIRE(expert({0.0, 0.0}) == 0.0);
}

TEST_CASE("pendulum expert swings up within the return budget", "[experts]") {
    PendulumParams params;
    PendulumEnergyExpert expert(params);
    double total = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        PendulumEnv env(params);
        env.seed(std::uint64_t(seed));
        auto s = env.reset();
        double ret = 0.0;
        for (int t = 0; t < 200; ++t) {
            auto step = env.step(expert(s));
            ret += step.reward;
            s = step.obs;
        }
        total += ret;
    }
    REQUIRE(total / 100.0 >= -200.0);
}

TEST_CASE("pendulum expert passes its own finite-difference audit", "[experts]") {
    PendulumEnergyExpert expert;
    double declared = expert.audit_lipschitz(20000, 0);
    REQUIRE(declared > 0.0);
    REQUIRE(std::isfinite(declared));
    REQUIRE(declared == expert.declared_lipschitz());

    // fresh perturbation pairs stay within the declared constant (small margin
    // for the audit being a finite sample)
    Rng rng(777);
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    std::uniform_real_distribution<double> vel(-8.0, 8.0);
    std::uniform_real_distribution<double> dir(-1.0, 1.0);
    const double eps = 1e-3;
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        PendulumState a{ang(rng), vel(rng)};
        double dx = dir(rng), dy = dir(rng);
        double norm = std::sqrt(dx * dx + dy * dy);
        if (norm < 1e-9) continue;
        PendulumState b{wrap_angle(a.theta + eps * dx / norm), a.theta_dot + eps * dy / norm};
        double d = std::sqrt(std::pow(wrap_angle(a.theta - b.theta), 2) +
                             std::pow(a.theta_dot - b.theta_dot, 2));
        worst = std::max(worst, std::abs(expert(a) - expert(b)) / d);
    }
    REQUIRE(worst <= 1.25 * declared);
}

TEST_CASE("value iteration expert tie-breaks to the lowest action index", "[experts]") {
    FiniteMdp m = FiniteMdp::make(3, 3, 0.9);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 3; ++a) m.p(s, a, s) = 1.0;  // constant zero reward
    TabularPolicy pi = value_iteration_expert(m);
    for (int s = 0; s < 3; ++s) REQUIRE(pi(s, 0) == 1.0);
}

TEST_CASE("value iteration expert is myopic at gamma=0", "[experts]") {
    Rng rng(17);
    FiniteMdp m = random_mdp(2, 3, 0.0, rng);
    TabularPolicy pi = value_iteration_expert(m);
    for (int s = 0; s < 2; ++s) {
        int best = 0;
        for (int a = 1; a < 3; ++a)
            if (m.r(s, a) > m.r(s, best)) best = a;
        REQUIRE(pi(s, best) == 1.0);
    }
}

TEST_CASE("value iteration expert matches brute-force policy enumeration", "[experts][oracle]") {
    Rng rng(123);
    const double tol = 1e-9;
    for (int trial = 0; trial < 30; ++trial) {
        int S = 2 + int(rng() % 2);  // up to 3 states
        int A = 2;
        FiniteMdp m = random_mdp(S, A, 0.9, rng);
        TabularPolicy expert = value_iteration_expert(m, tol);
        auto v_expert = solve_v_exact(m, expert);

        double slack = tol * (1.0 + m.gamma) / (1.0 - m.gamma);
        int n_policies = 1;
        for (int s = 0; s < S; ++s) n_policies *= A;
        for (int code = 0; code < n_policies; ++code) {
            std::vector<int> act(std::size_t(S), 0);
            int c = code;
            for (int s = 0; s < S; ++s) {
                act[std::size_t(s)] = c % A;
                c /= A;
            }
            auto v = solve_v_exact(m, TabularPolicy::deterministic(S, A, act));
            for (int s = 0; s < S; ++s)
                REQUIRE(v_expert[std::size_t(s)] >= v[std::size_t(s)] - slack);
        }
    }
}

TEST_CASE("gaussian optimal expert", "[experts]") {
    GaussianOptimalExpert expert{2.0};
    REQUIRE(expert(0.0) == 0.0);
    REQUIRE(expert(1.0) == -2.0);
    // induced next-state mean is zero for any state
    Rng rng(3);
    GaussianWalkParams p;
    p.lip_pi = 2.0;
    for (double s : {-3.0, -0.5, 0.0, 1.7}) {
        auto [next, reward] = gaussian_walk_step(s, expert(s), p, rng);
        (void)reward;
        REQUIRE_THAT(next, Catch::Matchers::WithinAbs(0.0, 3.5 * p.sigma));
    }
}
