#include <catch2/catch_amalgamated.hpp>

#include "delrl/chain.hpp"
#include "delrl/dida.hpp"
#include "delrl/experts.hpp"

using namespace delrl;

namespace {

FiniteMdp mixing_mdp() {
    // 3 states, 2 actions, visibly stochastic rows
    FiniteMdp m = FiniteMdp::make(3, 2, 0.9);
    double rows[3][2][3] = {{{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}},
                            {{0.3, 0.4, 0.3}, {0.1, 0.6, 0.3}},
                            {{0.25, 0.25, 0.5}, {0.4, 0.2, 0.4}}};
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a)
            for (int s2 = 0; s2 < 3; ++s2) m.p(s, a, s2) = rows[s][a][s2];
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) m.r(s, a) = 0.0;
    m.validate();
    return m;
}

}  // namespace

TEST_CASE("beta schedule follows the dagger default", "[dida]") {
    BetaSchedule beta = BetaSchedule::dagger_default();
    REQUIRE(beta(1) == 1.0);
    REQUIRE(beta(2) == 0.0);
    REQUIRE(beta(100) == 0.0);
    REQUIRE_THROWS_AS(beta(0), std::invalid_argument);
}

TEST_CASE("pendulum encoding layout", "[dida][encode]") {
    PendulumCodec flat{0};
    AugmentedState<PendulumState, double> x0{{0.5, -1.0}, {}};
    Eigen::VectorXd v0 = flat.encode(x0);
    REQUIRE(v0.size() == 3);  // delay 0: plain state encoding
    REQUIRE_THAT(v0(0), Catch::Matchers::WithinAbs(std::cos(0.5), 1e-15));
    REQUIRE_THAT(v0(1), Catch::Matchers::WithinAbs(std::sin(0.5), 1e-15));
    REQUIRE_THAT(v0(2), Catch::Matchers::WithinAbs(-1.0 / 8.0, 1e-15));

    PendulumCodec two{2};
    AugmentedState<PendulumState, double> x{{0.0, 0.0}, {0.0, 0.0}};
    Eigen::VectorXd v = two.encode(x);
    REQUIRE(v.size() == 5);
    REQUIRE(v(0) == 1.0);
    for (int i = 1; i < 5; ++i) REQUIRE(v(i) == 0.0);

    for (int delay : {0, 1, 3, 7}) {
        PendulumCodec c{delay};
        REQUIRE(c.input_dim() == 3 + delay * 1);  // state encoding + delay * action dim
    }
    AugmentedState<PendulumState, double> bad{{0.0, 0.0}, {0.0}};
    REQUIRE_THROWS_AS(two.encode(bad), std::invalid_argument);
}

TEST_CASE("beta=1 executes expert actions while aggregating augmented states", "[dida]") {
    FiniteMdp m = mixing_mdp();
    auto denv = wrap_delayed(FiniteEnv(m, 3), 2, 3);
    auto expert = [](int) { return 1; };
    FiniteCodec codec = FiniteCodec::for_mdp(m, 2);
    ImitationDataset dataset(10);
    dataset.begin_iteration();
    Rng rng(0);
    int clock = 0;
    auto stats = dida_collect(denv, expert, nullptr, codec, 1.0, 40, 20, dataset, rng, clock);
    REQUIRE(stats.pairs_added == 40);
    REQUIRE(dataset.size() == 40);
    // after >=2 steps in the episode, the queue holds the last executed actions
    REQUIRE(denv.observation().queue == std::vector<int>{1, 1});
}

TEST_CASE("beta=0 executes the imitator while labels stay expert", "[dida]") {
    FiniteMdp m = mixing_mdp();
    FiniteCodec codec = FiniteCodec::for_mdp(m, 1, true);  // classifier decode = argmax

    // train a tiny classifier to always answer action 1
    MlpConfig net;
    net.input_dim = codec.input_dim();
    net.output_dim = codec.output_dim();
    net.hidden = {8};
    net.classifier = true;
    Rng mrng(4);
    MlpModel always_one(net, mrng);
    ImitationDataset seed_data(1);
    seed_data.begin_iteration();
    auto denv0 = wrap_delayed(FiniteEnv(m, 3), 1, 3);
    denv0.reset();
    for (int i = 0; i < 60; ++i) {
        seed_data.add(codec.encode(denv0.observation()), codec.action_target(1));
        denv0.step(int(i % 2));
    }
    Rng trng(5);
    train_imitator(always_one, seed_data, 200, trng);

    auto denv = wrap_delayed(FiniteEnv(m, 3), 1, 7);
    auto expert = [](int) { return 0; };
    ImitationDataset dataset(10);
    dataset.begin_iteration();
    Rng rng(0);
    int clock = 0;
    dida_collect(denv, expert, &always_one, codec, 0.0, 30, 15, dataset, rng, clock);
    REQUIRE(denv.observation().queue == std::vector<int>{1});  // imitator acted
    auto [x, y] = dataset.to_matrices();
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        REQUIRE(y(i, 0) == 1.0);  // stored label is the expert's action 0, one-hot
        REQUIRE(y(i, 1) == 0.0);
    }
    (void)x;
}

TEST_CASE("dataset retention keeps at most K of the newest buckets", "[dida]") {
    ImitationDataset dataset(3);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(2);
    for (int it = 1; it <= 5; ++it) {
        dataset.begin_iteration();
        for (int k = 0; k < it; ++k) dataset.add(v, v);  // bucket i holds i pairs
    }
    REQUIRE(dataset.bucket_count() == 3);
    REQUIRE(dataset.size() == 3 + 4 + 5);  // oldest buckets (1,2 pairs) evicted
    REQUIRE_THROWS_AS(ImitationDataset(0), std::invalid_argument);
}

TEST_CASE("training a single-valued map interpolates it", "[dida][train]") {
    // every augmented state carries exactly one action value
    const int n_patterns = 6;
    std::vector<double> values{0.37, -0.8, 0.1, 0.55, -0.2, 0.9};
    ImitationDataset dataset(5);
    dataset.begin_iteration();
    for (int rep = 0; rep < 40; ++rep)
        for (int k = 0; k < n_patterns; ++k) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(n_patterns);
            x(k) = 1.0;
            Eigen::VectorXd y(1);
            y << values[std::size_t(k)];
            dataset.add(x, y);
        }
    MlpConfig net;
    net.input_dim = n_patterns;
    net.output_dim = 1;
    net.hidden = {16};
    Rng mrng(0), trng(2);
    MlpModel model(net, mrng);
    auto result = train_imitator(model, dataset, 400, trng);
    REQUIRE(result.final_loss < 1e-4);
    for (int k = 0; k < n_patterns; ++k) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_patterns);
        x(k) = 1.0;
        REQUIRE_THAT(model.forward(x)(0), Catch::Matchers::WithinAbs(values[std::size_t(k)], 1e-2));
    }
}

TEST_CASE("mse training converges to the conditional mean", "[dida][train]") {
    // a single augmented-state pattern labeled 0 half the time and 1 half the time
    ImitationDataset dataset(5);
    dataset.begin_iteration();
    Eigen::VectorXd x(2);
    x << 1.0, 0.0;
    Eigen::VectorXd zero(1), one(1);
    zero << 0.0;
    one << 1.0;
    for (int i = 0; i < 400; ++i) dataset.add(x, (i % 2 == 0) ? zero : one);
    MlpConfig net;
    net.input_dim = 2;
    net.output_dim = 1;
    net.hidden = {16};
    Rng mrng(3), trng(4);
    MlpModel model(net, mrng);
    train_imitator(model, dataset, 120, trng);
    REQUIRE_THAT(model.forward(x)(0), Catch::Matchers::WithinAbs(0.5, 0.05));
}

TEST_CASE("training is stable under dataset shuffling", "[dida][train]") {
    Rng data_rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    for (int i = 0; i < 300; ++i) {
        Eigen::VectorXd x(2), y(1);
        x << unif(data_rng), unif(data_rng);
        y << std::sin(x(0)) * x(1);
        pairs.emplace_back(x, y);
    }
    auto train_with_order = [&](bool reversed) {
        ImitationDataset dataset(5);
        dataset.begin_iteration();
        if (reversed)
            for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) dataset.add(it->first, it->second);
        else
            for (const auto& p : pairs) dataset.add(p.first, p.second);
        MlpConfig net;
        net.input_dim = 2;
        net.output_dim = 1;
        net.hidden = {16, 16};
        Rng mrng(0), trng(1);
        MlpModel model(net, mrng);
        return train_imitator(model, dataset, 80, trng).final_loss;
    };
    double forward_loss = train_with_order(false);
    double reversed_loss = train_with_order(true);
    REQUIRE(std::abs(forward_loss - reversed_loss) <= 0.1 * std::max(forward_loss, reversed_loss));
}

TEST_CASE("empty dataset is a usage error", "[dida][errors]") {
    ImitationDataset dataset(3);
    MlpConfig net;
    Rng mrng(0), trng(0);
    MlpModel model(net, mrng);
    REQUIRE_THROWS_AS(train_imitator(model, dataset, 1, trng), std::invalid_argument);
}

TEST_CASE("run_dida emits one curve row per iteration", "[dida]") {
    FiniteMdp m = mixing_mdp();
    auto denv = wrap_delayed(FiniteEnv(m, 3), 1, 5);
    TabularPolicy expert_pi = TabularPolicy::deterministic(3, 2, {1, 0, 1});
    auto expert = [&expert_pi](int s) {
        for (int a = 0; a < 2; ++a)
            if (expert_pi(s, a) == 1.0) return a;
        return 0;
    };
    DidaConfig cfg;
    cfg.iterations = 4;
    cfg.steps_per_iteration = 200;
    cfg.episode_len = 25;
    cfg.epochs_per_iteration = 3;
    cfg.eval_episodes = 2;
    cfg.net.hidden = {16};
    auto result = run_dida(denv, expert, FiniteCodec::for_mdp(m, 1), cfg);
    REQUIRE(result.curve.size() == 4);
    for (std::size_t i = 0; i < result.curve.size(); ++i) {
        REQUIRE(result.curve[i].iteration == int(i) + 1);
        REQUIRE(result.curve[i].env_steps > 0);
    }
    // step axis is cumulative and strictly increasing
    for (std::size_t i = 1; i < result.curve.size(); ++i)
        REQUIRE(result.curve[i].env_steps > result.curve[i - 1].env_steps);
}

TEST_CASE("imitator converges to the belief-mean expert action on a finite fixture",
          "[dida][fixedpoint]") {
    FiniteMdp m = mixing_mdp();
    m.action_embedding = {0.0, 1.0};
    const int delay = 1;
    TabularPolicy expert_pi = TabularPolicy::deterministic(3, 2, {1, 0, 1});
    auto expert = [&expert_pi](int s) {
        for (int a = 0; a < 2; ++a)
            if (expert_pi(s, a) == 1.0) return a;
        return 0;
    };
    auto denv = wrap_delayed(FiniteEnv(m, 3), delay, 11);
    FiniteCodec codec = FiniteCodec::for_mdp(m, delay);
    DidaConfig cfg;
    cfg.iterations = 6;
    cfg.steps_per_iteration = 2500;
    cfg.episode_len = 5;  // frequent resets cover every augmented state
    cfg.epochs_per_iteration = 25;
    cfg.eval_episodes = 2;
    cfg.net.hidden = {32, 32};
    cfg.seed = 1;
    auto result = run_dida(denv, expert, codec, cfg);

    for (int base = 0; base < 3; ++base)
        for (int queued = 0; queued < 2; ++queued) {
            AugmentedState<int, int> x{base, {queued}};
            auto b = belief_exact(m, x);
            double want = 0.0;
            for (int s = 0; s < 3; ++s)
                want += b[std::size_t(s)] * m.action_embedding[std::size_t(expert(s))];
            double got = result.model.forward(codec.encode(x))(0);
            REQUIRE_THAT(got, Catch::Matchers::WithinAbs(want, 0.1));
        }
}
