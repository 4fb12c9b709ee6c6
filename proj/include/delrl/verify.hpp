#pragma once

#include <json.hpp>
#include <ostream>

#include "delrl/theory.hpp"

namespace delrl {

inline nlohmann::json to_json(const CheckRecord& rec) {
    return {{"check", rec.check},   {"fixture", rec.fixture}, {"lhs", rec.lhs},
            {"rhs", rec.rhs},       {"slack", rec.slack},     {"pass", rec.pass}};
}

struct SuiteResult {
    std::string suite;
    std::vector<CheckRecord> records;
    bool pass() const {
        for (const auto& r : records)
            if (!r.pass) return false;
        return !records.empty();
    }
};

namespace detail {

inline CheckRecord make_record(std::string check, std::string fixture, double lhs, double rhs) {
    CheckRecord rec;
    rec.check = std::move(check);
    rec.fixture = std::move(fixture);
    rec.lhs = lhs;
    rec.rhs = rhs;
    rec.slack = rhs - lhs;
    rec.pass = lhs <= rhs;
    return rec;
}

inline FiniteMdp random_verify_mdp(int n_states, int n_actions, double gamma, Rng& rng) {
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

inline TabularPolicy random_verify_policy(int n_states, int n_actions, Rng& rng) {
    TabularPolicy pi = TabularPolicy::uniform(n_states, n_actions);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int s = 0; s < n_states; ++s) {
        double total = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            double w = unif(rng) + 1e-3;
            pi.at(s, a) = w;
            total += w;
        }
        for (int a = 0; a < n_actions; ++a) pi.at(s, a) /= total;
    }
    return pi;
}

inline FiniteMdp random_chain(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int n = 2 + int(rng() % 3);
    return make_chain_mdp(n, unif(rng), 2.0 * unif(rng), unif(rng) - 0.5, 0.9);
}

inline TabularPolicy random_chain_expert(const FiniteMdp& chain, Rng& rng, int trial) {
    if (trial % 2 == 0) return value_iteration_expert(chain);
    std::vector<int> map(std::size_t(chain.n_states), 0);
    for (int s = 0; s < chain.n_states; ++s) map[std::size_t(s)] = int(rng() % 3);
    return TabularPolicy::deterministic(chain.n_states, chain.n_actions, map);
}

}  // namespace detail

/// Delayed performance-difference identity over randomized fixtures and policies.
inline SuiteResult verify_lemma1(int n_fixtures = 100, std::uint64_t seed = 20240417,
                                 double tolerance = 1e-6) {
    SuiteResult result{"lemma1", {}};
    Rng rng(seed);
    for (int i = 0; i < n_fixtures; ++i) {
        int S = 2 + int(rng() % 4);   // up to 5 states
        int A = 2 + int(rng() % 2);   // up to 3 actions
        int delay = int(rng() % 4);   // up to 3
        FiniteMdp m = detail::random_verify_mdp(S, A, 0.9, rng);
        TabularPolicy expert = detail::random_verify_policy(S, A, rng);
        AugmentedMdp aug = build_augmented_mdp(m, delay);
        TabularPolicy pidel = detail::random_verify_policy(int(aug.size()), A, rng);
        auto rep = perf_diff_check_all(m, expert, aug, pidel);
        std::string fixture = "mdp" + std::to_string(i) + "_S" + std::to_string(S) + "_A" +
                              std::to_string(A) + "_d" + std::to_string(delay);
        result.records.push_back(
            detail::make_record("lemma1.residual", fixture, rep.max_residual, tolerance));
    }
    return result;
}

/// Dispersion-form gap bound over randomized Lipschitz chain fixtures.
inline SuiteResult verify_thm2(int n_fixtures = 50, std::uint64_t seed = 20240418,
                               double tolerance = 1e-9) {
    SuiteResult result{"thm2", {}};
    Rng rng(seed);
    for (int i = 0; i < n_fixtures; ++i) {
        FiniteMdp chain = detail::random_chain(rng);
        TabularPolicy expert = detail::random_chain_expert(chain, rng, i);
        int delay = 1 + int(rng() % 2);
        auto rep = check_bound_thm2(chain, expert, delay);
        std::string fixture = "chain" + std::to_string(i) + "_n" + std::to_string(chain.n_states) +
                              "_d" + std::to_string(delay);
        result.records.push_back(
            detail::make_record("thm2.violation", fixture, rep.worst_violation, tolerance));
    }
    return result;
}

/// Time-Lipschitz gap bound plus its exact linear scaling in the delay.
inline SuiteResult verify_cor3(int n_fixtures = 50, std::uint64_t seed = 20240419,
                               double tolerance = 1e-9) {
    SuiteResult result{"cor3", {}};
    Rng rng(seed);
    for (int i = 0; i < n_fixtures; ++i) {
        FiniteMdp chain = detail::random_chain(rng);
        TabularPolicy expert = detail::random_chain_expert(chain, rng, i);
        int delay = 1 + int(rng() % 3);
        auto rep = check_bound_cor3(chain, expert, delay);
        std::string fixture = "chain" + std::to_string(i) + "_n" + std::to_string(chain.n_states) +
                              "_d" + std::to_string(delay);
        result.records.push_back(
            detail::make_record("cor3.violation", fixture, rep.worst_violation, tolerance));
    }
    // the bound is linear in the delay by construction; verify the rendered values
    for (int i = 0; i < 5; ++i) {
        FiniteMdp chain = detail::random_chain(rng);
        TabularPolicy expert = detail::random_chain_expert(chain, rng, i);
        double unit = 0.0;
        double worst = 0.0;
        for (int delay : {1, 2, 3}) {
            auto rep = check_bound_cor3(chain, expert, delay);
            double per_delay = rep.max_rhs / double(delay);
            if (delay == 1)
                unit = per_delay;
            else
                worst = std::max(worst, std::abs(per_delay - unit));
        }
        result.records.push_back(detail::make_record(
            "cor3.linear_in_delay", "chainL" + std::to_string(i), worst, 1e-12));
    }
    return result;
}

/// Euclidean-variance gap bound, Monte Carlo on the Gaussian walk.
inline SuiteResult verify_cor4(long n_steps = 150000, std::uint64_t seed = 20240420) {
    SuiteResult result{"cor4", {}};
    GaussianWalkParams noiseless;
    noiseless.sigma = 0.0;
    auto rep0 = check_bound_cor4_mc(noiseless, 1, 2000, seed);
    result.records.push_back(detail::make_record("cor4.noiseless", "sigma0_d1", rep0.lhs.gap, 0.0));
    for (int delay : {1, 4}) {
        GaussianWalkParams params;
        auto rep = check_bound_cor4_mc(params, delay, n_steps, seed + std::uint64_t(delay));
        result.records.push_back(detail::make_record("cor4.bound", "walk_d" + std::to_string(delay),
                                                     rep.lhs.gap, rep.rhs + 3.0 * rep.lhs.stderr_));
    }
    return result;
}

/// Constructive lower bound on the Gaussian walk for a set of delayed policies.
inline SuiteResult verify_thm5(long n_steps = 150000, std::uint64_t seed = 20240421,
                               double rel_tolerance = 0.02) {
    SuiteResult result{"thm5", {}};
    GaussianWalkParams params;
    using X = AugmentedState<double, double>;
    std::vector<std::pair<std::string, std::function<double(const X&)>>> extra{
        {"memoryless", [&params](const X& x) { return -params.lip_pi * x.base; }},
        {"zero", [](const X&) { return 0.0; }},
    };
    for (int delay : {1, 4}) {
        auto rep = check_lower_bound_thm5(params, delay, n_steps, seed + std::uint64_t(delay), extra,
                                          rel_tolerance);
        std::string fixture = "walk_d" + std::to_string(delay);
        result.records.push_back(detail::make_record("thm5.noiseless_exact", fixture,
                                                     rep.noiseless_exact ? 0.0 : 1.0, 0.5));
        result.records.push_back(
            detail::make_record("thm5.optimal_gap_relerr", fixture, rep.optimal_rel_err, rel_tolerance));
        for (const auto& p : rep.policies)
            result.records.push_back(detail::make_record("thm5.lower_bound." + p.name, fixture,
                                                         rep.bound - 3.0 * p.gap.stderr_, p.gap.gap));
    }
    return result;
}

/// Wasserstein and belief-dispersion inequalities over randomized batches.
inline SuiteResult verify_appendix_a(int n_distributions = 300, std::uint64_t seed = 20240422,
                                     double tolerance = 1e-9) {
    SuiteResult result{"appendixA", {}};
    auto rep = check_appendix_a_props(n_distributions, seed, tolerance);
    result.records.push_back(
        detail::make_record("appendixA.mean_vs_w1", "random_1d", rep.worst_mean_gap_violation, tolerance));
    result.records.push_back(
        detail::make_record("appendixA.belief_drift_tlc", "chains", rep.worst_tlc_violation, tolerance));
    result.records.push_back(
        detail::make_record("appendixA.euclidean_sigma", "chains", rep.worst_euclid_violation, tolerance));
    result.records.push_back(
        detail::make_record("appendixA.sigma_tlc_cap", "chains", rep.worst_sigma_violation, tolerance));
    return result;
}

/// Substep-kernel composition checks for non-integer delays.
inline SuiteResult verify_fractional(long n_samples = 200000, std::uint64_t seed = 20240423) {
    SuiteResult result{"fractional", {}};

    {  // deterministic dynamics compose exactly
        FiniteMdp m = make_chain_mdp(4, 0.0, 0.0, 0.0, 0.9);
        const int S = m.n_states;
        std::vector<std::vector<double>> ident(3, std::vector<double>(std::size_t(S * S), 0.0));
        std::vector<std::vector<double>> full(3, std::vector<double>(std::size_t(S * S), 0.0));
        for (int a = 0; a < 3; ++a)
            for (int s = 0; s < S; ++s) {
                ident[std::size_t(a)][std::size_t(s * S + s)] = 1.0;
                for (int s2 = 0; s2 < S; ++s2)
                    full[std::size_t(a)][std::size_t(s * S + s2)] = m.p(s, a, s2);
            }
        auto rep = check_fractional_composition(m, ident, full, 4000, seed);
        result.records.push_back(
            detail::make_record("fractional.deterministic", "chain_det", rep.max_deviation, 0.0));
        // delta -> 0: the first kernel is the identity, composition is p itself
        result.records.push_back(detail::make_record("fractional.delta_zero_identity", "chain_det",
                                                     rep.max_exact_deviation, 0.0));
    }

    {  // symmetric square-root kernels composed by construction
        const double q = 0.2;
        const double flip = 2.0 * q * (1.0 - q);
        FiniteMdp m = FiniteMdp::make(2, 1, 0.9);
        m.p(0, 0, 0) = 1.0 - flip;
        m.p(0, 0, 1) = flip;
        m.p(1, 0, 1) = 1.0 - flip;
        m.p(1, 0, 0) = flip;
        std::vector<std::vector<double>> half{{1.0 - q, q, q, 1.0 - q}};
        auto rep = check_fractional_composition(m, half, half, n_samples, seed + 1);
        result.records.push_back(detail::make_record("fractional.sqrt_kernel_mc", "flip2",
                                                     rep.max_deviation, rep.confidence_bound));
        result.records.push_back(detail::make_record("fractional.sqrt_kernel_exact", "flip2",
                                                     rep.max_exact_deviation, 1e-9));
    }
    return result;
}

inline SuiteResult run_verify_suite(const std::string& name) {
    if (name == "lemma1") return verify_lemma1();
    if (name == "thm2") return verify_thm2();
    if (name == "cor3") return verify_cor3();
    if (name == "cor4") return verify_cor4();
    if (name == "thm5") return verify_thm5();
    if (name == "appendixA") return verify_appendix_a();
    if (name == "fractional") return verify_fractional();
    throw std::invalid_argument(
        "unknown verify suite '" + name +
        "' (expected one of lemma1, thm2, cor3, cor4, thm5, appendixA, fractional)");
}

inline void write_suite_report(const SuiteResult& result, std::ostream& jsonl, std::ostream& human) {
    for (const auto& rec : result.records) jsonl << to_json(rec).dump() << "\n";
    human << "suite " << result.suite << ": " << result.records.size() << " checks\n";
    human << std::left << std::setw(34) << "check" << std::setw(22) << "fixture" << std::right
          << std::setw(14) << "lhs" << std::setw(14) << "rhs" << std::setw(14) << "slack"
          << "  status\n";
    for (const auto& rec : result.records)
        human << std::left << std::setw(34) << rec.check << std::setw(22) << rec.fixture << std::right
              << std::setw(14) << std::setprecision(6) << rec.lhs << std::setw(14) << rec.rhs
              << std::setw(14) << rec.slack << "  " << (rec.pass ? "pass" : "FAIL") << "\n";
    human << "suite " << result.suite << (result.pass() ? ": all checks passed\n" : ": FAILURES\n");
}

}  // namespace delrl
