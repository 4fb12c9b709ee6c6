#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>

#include "delrl/delay.hpp"
#include "delrl/gaussian_walk.hpp"
#include "delrl/mlp.hpp"
#include "delrl/pendulum.hpp"
#include "delrl/util.hpp"

namespace delrl {

/// Per-iteration mixing weight between expert- and imitator-executed actions.
struct BetaSchedule {
    std::function<double(int)> rule;

    /// beta_1 = 1 (sample only from the expert first), beta_{i>=2} = 0.
    static BetaSchedule dagger_default() {
        return {[](int i) { return i <= 1 ? 1.0 : 0.0; }};
    }
    static BetaSchedule constant(double b) {
        return {[b](int) { return b; }};
    }

    double operator()(int iteration) const {
        require(iteration >= 1, "BetaSchedule: iterations are 1-based");
        double b = rule(iteration);
        require(b >= 0.0 && b <= 1.0, "BetaSchedule: weight must lie in [0,1]");
        return b;
    }
};

/**
 * Aggregated (encoded augmented state, expert target) pairs, kept in
 * per-iteration buckets with a bounded retention: once more than
 * `retention_cap` buckets exist, the oldest is dropped.
 */
class ImitationDataset {
  public:
    explicit ImitationDataset(int retention_cap = 10) : retention_cap_(retention_cap) {
        require(retention_cap >= 1, "ImitationDataset: retention cap must be >= 1");
    }

    void begin_iteration() {
        buckets_.emplace_back();
        if (int(buckets_.size()) > retention_cap_) buckets_.pop_front();
    }

    void add(const Eigen::VectorXd& input, const Eigen::VectorXd& target) {
        require(!buckets_.empty(), "ImitationDataset: begin_iteration before adding pairs");
        buckets_.back().inputs.push_back(input);
        buckets_.back().targets.push_back(target);
    }

    std::size_t size() const {
        std::size_t total = 0;
        for (const auto& b : buckets_) total += b.inputs.size();
        return total;
    }
    int bucket_count() const { return int(buckets_.size()); }
    int retention_cap() const { return retention_cap_; }
    std::size_t newest_bucket_size() const {
        return buckets_.empty() ? 0 : buckets_.back().inputs.size();
    }

    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> to_matrices() const {
        std::size_t n = size();
        require(n > 0, "ImitationDataset: empty dataset");
        Eigen::Index in_dim = buckets_.front().inputs.front().size();
        Eigen::Index out_dim = buckets_.front().targets.front().size();
        Eigen::MatrixXd x(n, in_dim), y(n, out_dim);
        Eigen::Index row = 0;
        for (const auto& b : buckets_)
            for (std::size_t i = 0; i < b.inputs.size(); ++i, ++row) {
                x.row(row) = b.inputs[i].transpose();
                y.row(row) = b.targets[i].transpose();
            }
        return {std::move(x), std::move(y)};
    }

  private:
    struct Bucket {
        std::vector<Eigen::VectorXd> inputs;
        std::vector<Eigen::VectorXd> targets;
    };
    std::deque<Bucket> buckets_;
    int retention_cap_;
};

// ---------------------------------------------------------------------------
// Environment codecs: fixed encodings of augmented states, documented layouts
// ---------------------------------------------------------------------------

/// Layout: (cos theta, sin theta, theta_dot/8, queue torques / max_torque...).
struct PendulumCodec {
    int delay = 0;
    double max_torque = 2.0;
    double max_speed = 8.0;

    int input_dim() const { return 3 + delay; }
    int output_dim() const { return 1; }

    template <class Queue>
    Eigen::VectorXd encode(const PendulumState& base, const Queue& queue) const {
        require(int(queue.size()) == delay, "PendulumCodec: queue length does not match the layout");
        Eigen::VectorXd v(input_dim());
        v(0) = std::cos(base.theta);
        v(1) = std::sin(base.theta);
        v(2) = base.theta_dot / max_speed;
        for (int k = 0; k < delay; ++k) v(3 + k) = queue[std::size_t(k)] / max_torque;
        return v;
    }
    Eigen::VectorXd encode(const AugmentedState<PendulumState, double>& x) const {
        return encode(x.base, x.queue);
    }

    Eigen::VectorXd action_target(double torque) const {
        Eigen::VectorXd t(1);
        t(0) = torque / max_torque;
        return t;
    }
    double decode_action(const Eigen::VectorXd& out) const {
        return clamp(out(0) * max_torque, -max_torque, max_torque);
    }
};

/// Layout: (state, queue actions...), all raw.
struct GaussianWalkCodec {
    int delay = 0;
    double action_bound = 10.0;

    int input_dim() const { return 1 + delay; }
    int output_dim() const { return 1; }

    Eigen::VectorXd encode(const AugmentedState<double, double>& x) const {
        require(int(x.queue.size()) == delay, "GaussianWalkCodec: queue length mismatch");
        Eigen::VectorXd v(input_dim());
        v(0) = x.base;
        for (int k = 0; k < delay; ++k) v(1 + k) = x.queue[std::size_t(k)];
        return v;
    }
    Eigen::VectorXd action_target(double a) const {
        Eigen::VectorXd t(1);
        t(0) = a;
        return t;
    }
    double decode_action(const Eigen::VectorXd& out) const {
        return clamp(out(0), -action_bound, action_bound);
    }
};

/**
 * Finite-fixture layout: one-hot base state followed by one-hot queue slots.
 * Regression mode targets the expert action's embedding and executes the
 * nearest embedded action; classifier mode targets the one-hot expert action.
 */
struct FiniteCodec {
    int n_states = 0;
    int n_actions = 0;
    int delay = 0;
    bool classifier = false;
    std::vector<double> action_embedding;

    static FiniteCodec for_mdp(const FiniteMdp& mdp, int delay, bool classifier = false) {
        return {mdp.n_states, mdp.n_actions, delay, classifier, mdp.action_embedding};
    }

    int input_dim() const { return n_states + delay * n_actions; }
    int output_dim() const { return classifier ? n_actions : 1; }

    Eigen::VectorXd encode(const AugmentedState<int, int>& x) const {
        require(int(x.queue.size()) == delay, "FiniteCodec: queue length mismatch");
        Eigen::VectorXd v = Eigen::VectorXd::Zero(input_dim());
        v(x.base) = 1.0;
        for (int k = 0; k < delay; ++k) v(n_states + k * n_actions + x.queue[std::size_t(k)]) = 1.0;
        return v;
    }

    Eigen::VectorXd action_target(int a) const {
        if (classifier) {
            Eigen::VectorXd t = Eigen::VectorXd::Zero(n_actions);
            t(a) = 1.0;
            return t;
        }
        Eigen::VectorXd t(1);
        t(0) = action_embedding[std::size_t(a)];
        return t;
    }

    int decode_action(const Eigen::VectorXd& out) const {
        if (classifier) {
            int best = 0;
            for (int a = 1; a < n_actions; ++a)
                if (out(a) > out(best)) best = a;
            return best;
        }
        int best = 0;
        for (int a = 1; a < n_actions; ++a)
            if (std::abs(out(0) - action_embedding[std::size_t(a)]) <
                std::abs(out(0) - action_embedding[std::size_t(best)]))
                best = a;
        return best;
    }
};

// ---------------------------------------------------------------------------
// Collection and training
// ---------------------------------------------------------------------------

struct DidaIterationStats {
    long env_steps = 0;  // including reset burn-in interactions
    int episodes_started = 0;
    std::size_t pairs_added = 0;
};

namespace detail {

template <class DEnv, class Expert, class Codec>
auto expert_label_and_obs(DEnv& denv, Expert&& expert, const Codec& codec) {
    // integer-delay path: the expert sees the hidden current state
    Eigen::VectorXd encoded = codec.encode(denv.observation());
    auto label = expert(denv.true_state());
    return std::make_pair(std::move(encoded), label);
}

template <class E, class Expert, class Codec>
auto expert_label_and_obs(FractionalDelayedEnv<E>& denv, Expert&& expert, const Codec& codec) {
    // fractional path: the expert is an undelayed policy of the interleaved
    // process, queried where the incoming action starts acting
    Eigen::VectorXd encoded = codec.encode(denv.observation());
    auto label = expert(denv.advance_to_switch());
    return std::make_pair(std::move(encoded), label);
}

template <class DEnv, class Act>
Step<typename DEnv::Obs> execute(DEnv& denv, const Act& a) {
    return denv.step(a);
}

template <class E, class Act>
Step<typename FractionalDelayedEnv<E>::Obs> execute(FractionalDelayedEnv<E>& denv, const Act& a) {
    return denv.commit(a);
}

template <class DEnv>
long reset_cost(const DEnv& denv) {
    return long(denv.observation().queue.size());  // burn-in applies the queue
}

template <class E>
long reset_cost(const FractionalDelayedEnv<E>&) {
    return 0;  // the pending queue is virtual, no environment steps happen
}

}  // namespace detail

/**
 * One data-collection pass of the imitation loop: for each of n_steps, label
 * the current situation with the expert's action on the (hidden) current
 * state, execute either that action or the imitator's (probability 1-beta),
 * aggregate the labeled pair, and advance. The dataset entry is stored before
 * any overwrite, so labels never depend on which action executed. Episodes
 * are cut at episode_len and reset with a fresh uniform queue.
 */
template <class DEnv, class Expert, class Codec>
DidaIterationStats dida_collect(DEnv& denv, Expert&& expert, const MlpModel* imitator,
                                const Codec& codec, double beta, int n_steps, int episode_len,
                                ImitationDataset& dataset, Rng& rng, int& episode_clock) {
    DidaIterationStats stats;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int j = 0; j < n_steps; ++j) {
        if (episode_clock == 0) {
            denv.reset();
            stats.env_steps += detail::reset_cost(denv);
            stats.episodes_started++;
        }
        auto [encoded, expert_action] = detail::expert_label_and_obs(denv, expert, codec);
        auto executed = expert_action;
        if (unif(rng) >= beta && imitator != nullptr)
            executed = codec.decode_action(imitator->forward(encoded));
        dataset.add(encoded, codec.action_target(expert_action));
        stats.pairs_added++;
        detail::execute(denv, executed);
        stats.env_steps++;
        episode_clock = (episode_clock + 1) % episode_len;
    }
    return stats;
}

struct TrainResult {
    double final_loss = 0.0;
    int epochs = 0;
};

/// Mini-batch regression/classification on the aggregated dataset (warm-start).
inline TrainResult train_imitator(MlpModel& model, const ImitationDataset& dataset, int epochs,
                                  Rng& rng) {
    require(dataset.size() > 0, "train_imitator: empty dataset");
    auto [x, y] = dataset.to_matrices();
    TrainResult out;
    for (int e = 0; e < epochs; ++e) {
        out.final_loss = model.train_epoch(x, y, rng);
        out.epochs++;
    }
    return out;
}

/// Greedy evaluation on the delayed environment; per-episode undiscounted returns.
template <class DEnv, class Codec>
MeanStd evaluate_policy(DEnv& denv, const MlpModel& model, const Codec& codec, int episodes,
                        int episode_len, std::uint64_t seed) {
    std::vector<double> returns;
    returns.reserve(std::size_t(episodes));
    for (int ep = 0; ep < episodes; ++ep) {
        denv.seed(seed + std::uint64_t(ep));
        denv.reset();
        double total = 0.0;
        for (int t = 0; t < episode_len; ++t) {
            auto action = codec.decode_action(model.forward(codec.encode(denv.observation())));
            total += denv.step(action).reward;
        }
        returns.push_back(total);
    }
    return mean_std(returns);
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

struct DidaConfig {
    int iterations = 50;
    int steps_per_iteration = 2000;
    int episode_len = 200;
    int epochs_per_iteration = 8;
    int eval_episodes = 5;  // 1000 evaluation steps at the default episode length
    int retention = 10;
    MlpConfig net;  // layout fields are filled from the codec
    BetaSchedule beta = BetaSchedule::dagger_default();
    std::uint64_t seed = 0;
    long expert_pretraining_steps = 0;  // added to the step axis when nonzero
};

struct CurveRow {
    int iteration = 0;
    long env_steps = 0;
    double mean_return = 0.0;
    double std_return = 0.0;
    double train_loss = 0.0;
};

struct DidaResult {
    std::vector<CurveRow> curve;
    MlpModel model;
};

template <class DEnv, class Expert, class Codec>
DidaResult run_dida(DEnv& denv, Expert&& expert, const Codec& codec, const DidaConfig& config) {
    MlpConfig net = config.net;
    net.input_dim = codec.input_dim();
    net.output_dim = codec.output_dim();

    Rng model_rng(config.seed ^ 0x6a09e667f3bcc909ull);
    Rng collect_rng(config.seed ^ 0xbb67ae8584caa73bull);
    Rng train_rng(config.seed ^ 0x3c6ef372fe94f82bull);

    DidaResult result;
    result.model = MlpModel(net, model_rng);
    ImitationDataset dataset(config.retention);
    denv.seed(config.seed);

    long cumulative_steps = config.expert_pretraining_steps;
    int episode_clock = 0;
    for (int i = 1; i <= config.iterations; ++i) {
        double beta = config.beta(i);
        dataset.begin_iteration();
        const MlpModel* imitator = (i == 1 && beta >= 1.0) ? nullptr : &result.model;
        auto stats = dida_collect(denv, expert, imitator, codec, beta, config.steps_per_iteration,
                                  config.episode_len, dataset, collect_rng, episode_clock);
        cumulative_steps += stats.env_steps;
        auto train = train_imitator(result.model, dataset, config.epochs_per_iteration, train_rng);
        auto eval = evaluate_policy(denv, result.model, codec, config.eval_episodes,
                                    config.episode_len, config.seed * 7919u + std::uint64_t(i));
        // only sampling steps build the curve's x axis; evaluation is free
        result.curve.push_back({i, cumulative_steps, eval.mean, eval.stddev, train.final_loss});
        episode_clock = 0;  // evaluation moved the env; start the next iteration fresh
    }
    return result;
}

}  // namespace delrl
