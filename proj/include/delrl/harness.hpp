#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>

#include "delrl/chain.hpp"
#include "delrl/config.hpp"
#include "delrl/dida.hpp"
#include "delrl/experts.hpp"
#include "delrl/gaussian_walk.hpp"
#include "delrl/pendulum.hpp"
#include "delrl/sarsa.hpp"

namespace delrl {

// ---------------------------------------------------------------------------
// Presets: the shipped hyperparameter tables as named configs
// ---------------------------------------------------------------------------

inline const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> table{
        {"dida-pendulum",
         "env.name = pendulum\n"
         "algo = dida\n"
         "delay = 5\n"
         "seeds = 0,1,2,3,4,5,6,7,8,9\n"
         "episode_len = 200\n"
         "expert.name = pendulum-energy\n"
         "dida.iterations = 50\n"
         "dida.steps_per_iteration = 2000\n"
         "dida.epochs = 8\n"
         "dida.retention = 10\n"
         "dida.eval_episodes = 5\n"
         "dida.hidden = 100,100,10\n"
         "dida.learning_rate = 1e-3\n"
         "dida.batch_size = 64\n"},
        {"sarsa-pendulum",
         "env.name = pendulum\n"
         "algo = sarsa\n"
         "delay = 5\n"
         "seeds = 0,1,2,3,4,5,6,7,8,9\n"
         "episode_len = 200\n"
         "sarsa.total_steps = 1000000\n"
         "sarsa.alpha = 0.1\n"
         "sarsa.gamma = 0.99\n"
         "sarsa.lambda = 0.9\n"
         "sarsa.epsilon = 0.2\n"
         "sarsa.bins = 15\n"
         "sarsa.eval_every = 50000\n"
         "sarsa.eval_episodes = 5\n"},
        {"dsarsa-pendulum",
         "env.name = pendulum\n"
         "algo = dsarsa\n"
         "delay = 5\n"
         "seeds = 0,1,2,3,4,5,6,7,8,9\n"
         "episode_len = 200\n"
         "sarsa.total_steps = 1000000\n"
         "sarsa.alpha = 0.1\n"
         "sarsa.gamma = 0.99\n"
         "sarsa.lambda = 0.9\n"
         "sarsa.epsilon = 0.2\n"
         "sarsa.bins = 15\n"
         "sarsa.eval_every = 50000\n"
         "sarsa.eval_episodes = 5\n"},
        {"aug-sarsa-pendulum",
         "env.name = pendulum\n"
         "algo = aug-sarsa\n"
         "delay = 5\n"
         "seeds = 0,1,2,3,4,5,6,7,8,9\n"
         "episode_len = 200\n"
         "sarsa.total_steps = 1000000\n"
         "sarsa.alpha = 0.1\n"
         "sarsa.gamma = 0.99\n"
         "sarsa.lambda = 0.9\n"
         "sarsa.epsilon = 0.2\n"
         "sarsa.bins = 15\n"
         "sarsa.eval_every = 50000\n"
         "sarsa.eval_episodes = 5\n"},
        {"dida-pendulum-frac",
         "env.name = pendulum\n"
         "algo = dida\n"
         "delay = 0.5\n"
         "seeds = 0,1,2\n"
         "episode_len = 200\n"
         "expert.name = pendulum-energy\n"
         "dida.iterations = 15\n"
         "dida.steps_per_iteration = 2000\n"
         "dida.epochs = 8\n"
         "dida.retention = 10\n"
         "dida.eval_episodes = 5\n"
         "dida.hidden = 100,100,10\n"
         "dida.learning_rate = 1e-3\n"
         "dida.batch_size = 64\n"},
        {"dida-walk",
         "env.name = gaussian-walk\n"
         "algo = dida\n"
         "delay = 1\n"
         "seeds = 0,1,2\n"
         "episode_len = 200\n"
         "expert.name = walk-optimal\n"
         "dida.iterations = 5\n"
         "dida.steps_per_iteration = 2000\n"
         "dida.epochs = 10\n"
         "dida.retention = 10\n"
         "dida.eval_episodes = 5\n"
         "dida.hidden = 32,32\n"
         "dida.learning_rate = 1e-3\n"
         "dida.batch_size = 64\n"},
    };
    return table;
}

inline Config load_config_or_preset(const std::string& path_or_preset) {
    const std::string prefix = "preset:";
    if (path_or_preset.rfind(prefix, 0) == 0) {
        std::string name = path_or_preset.substr(prefix.size());
        auto it = presets().find(name);
        if (it == presets().end())
            throw std::invalid_argument("unknown preset '" + name + "' (see list-presets)");
        return Config::parse_string(it->second);
    }
    return Config::parse_file(path_or_preset);
}

// ---------------------------------------------------------------------------
// Per-seed experiment dispatch
// ---------------------------------------------------------------------------

namespace detail {

inline PendulumParams pendulum_params_from(const Config& cfg) {
    PendulumParams p;
    p.substeps = cfg.get_int("pendulum.substeps", 1);
    return p;
}

inline int infer_substeps(double frac, int configured) {
    if (configured > 1) return configured;
    for (int k = 2; k <= 64; ++k)
        if (std::abs(frac * k - std::lround(frac * k)) < 1e-9) return k;
    throw std::invalid_argument(
        "delay: fractional part has no small integration grid; set pendulum.substeps explicitly");
}

inline GaussianWalkParams walk_params_from(const Config& cfg) {
    GaussianWalkParams p;
    p.lip_pi = cfg.get_double("walk.lip_pi", 1.0);
    p.lip_q = cfg.get_double("walk.lip_q", 1.0);
    p.sigma = cfg.get_double("walk.sigma", 0.1);
    p.gamma = cfg.get_double("walk.gamma", 0.9);
    return p;
}

inline FiniteMdp chain_from(const Config& cfg) {
    return make_chain_mdp(cfg.get_int("chain.n", 4), cfg.get_double("chain.slip", 0.3),
                          cfg.get_double("chain.state_gain", 1.0),
                          cfg.get_double("chain.action_gain", 0.2),
                          cfg.get_double("chain.gamma", 0.9));
}

inline DidaConfig dida_config_from(const Config& cfg, std::uint64_t seed) {
    DidaConfig d;
    d.iterations = cfg.get_int("dida.iterations", 50);
    d.steps_per_iteration = cfg.get_int("dida.steps_per_iteration", 2000);
    d.episode_len = cfg.get_int("episode_len", 200);
    d.epochs_per_iteration = cfg.get_int("dida.epochs", 8);
    d.eval_episodes = cfg.get_int("dida.eval_episodes", 5);
    d.retention = cfg.get_int("dida.retention", 10);
    d.net.hidden = cfg.get_int_list("dida.hidden", {100, 100, 10});
    d.net.learning_rate = cfg.get_double("dida.learning_rate", 1e-3);
    d.net.batch_size = cfg.get_int("dida.batch_size", 64);
    d.seed = seed;
    if (cfg.get_bool("expert.include_steps", false))
        d.expert_pretraining_steps = cfg.get_long("expert.training_steps", 0);
    return d;
}

inline SarsaParams sarsa_params_from(const Config& cfg) {
    SarsaParams p;
    p.alpha = cfg.get_double("sarsa.alpha", 0.1);
    p.gamma = cfg.get_double("sarsa.gamma", 0.99);
    p.lambda = cfg.get_double("sarsa.lambda", 0.9);
    p.epsilon = cfg.get_double("sarsa.epsilon", 0.2);
    return p;
}

inline TabularRunConfig tabular_config_from(const Config& cfg, TabularMode mode,
                                            std::uint64_t seed) {
    TabularRunConfig t;
    t.mode = mode;
    t.params = sarsa_params_from(cfg);
    t.total_steps = cfg.get_long("sarsa.total_steps", 100000);
    t.episode_len = cfg.get_int("episode_len", 200);
    t.eval_every = cfg.get_long("sarsa.eval_every", 10000);
    t.eval_episodes = cfg.get_int("sarsa.eval_episodes", 5);
    t.table_cap = cfg.get_long("sarsa.table_cap", 4000000);
    t.seed = seed;
    return t;
}

inline TabularMode tabular_mode_from(const std::string& algo) {
    if (algo == "sarsa") return TabularMode::memoryless;
    if (algo == "dsarsa") return TabularMode::dsarsa;
    return TabularMode::augmented;
}

inline void require_expert(const Config& cfg, const std::string& expected) {
    std::string name = cfg.get_string("expert.name", expected);
    if (name != expected)
        throw std::invalid_argument("config: expert.name '" + name + "' does not exist for env.name '" +
                                    cfg.get_string("env.name") + "' (expected '" + expected + "')");
}

inline std::string checkpoint_of(const MlpModel& model) {
    std::ostringstream os;
    model.save(os);
    return os.str();
}

}  // namespace detail

struct SeedRun {
    std::vector<CurveRow> curve;
    std::string model_checkpoint;  // empty for tabular learners
};

/// Runs the configured (environment, algorithm) pair for one seed.
inline SeedRun run_one_seed(const Config& cfg, std::uint64_t seed) {
    const std::string env_name = cfg.get_string("env.name");
    const std::string algo = cfg.get_string("algo", "dida");
    const double delay = cfg.get_double("delay", 0.0);
    require(delay >= 0.0, "config: delay must be >= 0");
    const bool integral_delay = std::abs(delay - std::lround(delay)) < 1e-12;

    if (algo == "dida") {
        DidaConfig dcfg = detail::dida_config_from(cfg, seed);
        if (env_name == "pendulum" || env_name == "pendulum-noisy") {
            detail::require_expert(cfg, "pendulum-energy");
            PendulumParams params = detail::pendulum_params_from(cfg);
            PendulumEnergyExpert expert(params);
            if (!integral_delay) {
                if (env_name == "pendulum-noisy")
                    throw std::invalid_argument(
                        "config: pendulum.noise with fractional delay is not supported");
                double frac = delay - std::floor(delay);
                params.substeps = detail::infer_substeps(frac, params.substeps);
                auto denv = wrap_fractional(PendulumEnv(params), delay, seed);
                PendulumCodec codec{int(std::ceil(delay))};
                auto result = run_dida(denv, PendulumEnergyExpert(params), codec, dcfg);
                return {std::move(result.curve), detail::checkpoint_of(result.model)};
            }
            PendulumCodec codec{int(std::lround(delay))};
            if (env_name == "pendulum-noisy") {
                NoiseSpec noise = make_noise(cfg.get_string("pendulum.noise"),
                                             cfg.get_bool("pendulum.noise_literal_shift", false));
                auto denv =
                    wrap_delayed(NoisyPendulumEnv(params, noise), int(std::lround(delay)), seed);
                auto result = run_dida(denv, expert, codec, dcfg);
                return {std::move(result.curve), detail::checkpoint_of(result.model)};
            }
            auto denv = wrap_delayed(PendulumEnv(params), int(std::lround(delay)), seed);
            auto result = run_dida(denv, expert, codec, dcfg);
            return {std::move(result.curve), detail::checkpoint_of(result.model)};
        }
        if (env_name == "gaussian-walk") {
            detail::require_expert(cfg, "walk-optimal");
            require(integral_delay, "config: gaussian-walk supports integer delays only");
            GaussianWalkParams params = detail::walk_params_from(cfg);
            auto denv = wrap_delayed(GaussianWalkEnv(params), int(std::lround(delay)), seed);
            GaussianWalkCodec codec{int(std::lround(delay)), params.action_bound};
            GaussianOptimalExpert expert{params.lip_pi};
            auto result = run_dida(denv, expert, codec, dcfg);
            return {std::move(result.curve), detail::checkpoint_of(result.model)};
        }
        if (env_name == "chain") {
            detail::require_expert(cfg, "chain-vi");
            require(integral_delay, "config: chain supports integer delays only");
            FiniteMdp mdp = detail::chain_from(cfg);
            TabularPolicy expert_pi = value_iteration_expert(mdp);
            auto expert = [expert_pi](int s) {
                for (int a = 0; a < expert_pi.n_actions; ++a)
                    if (expert_pi(s, a) == 1.0) return a;
                return 0;
            };
            auto denv = wrap_delayed(FiniteEnv(mdp), int(std::lround(delay)), seed);
            FiniteCodec codec = FiniteCodec::for_mdp(mdp, int(std::lround(delay)));
            auto result = run_dida(denv, expert, codec, dcfg);
            return {std::move(result.curve), detail::checkpoint_of(result.model)};
        }
        throw std::invalid_argument("config: unknown env.name '" + env_name + "'");
    }

    if (algo == "sarsa" || algo == "dsarsa" || algo == "aug-sarsa") {
        require(integral_delay, "config: tabular baselines support integer delays only (key: delay)");
        TabularRunConfig tcfg = detail::tabular_config_from(cfg, detail::tabular_mode_from(algo), seed);
        if (env_name == "pendulum") {
            PendulumParams params = detail::pendulum_params_from(cfg);
            auto denv = wrap_delayed(PendulumEnv(params), int(std::lround(delay)), seed);
            PendulumDiscretizer disc{cfg.get_int("sarsa.bins", 15)};
            return {run_tabular(denv, disc, TorqueGrid{}, tcfg).curve, {}};
        }
        if (env_name == "chain") {
            FiniteMdp mdp = detail::chain_from(cfg);
            auto denv = wrap_delayed(FiniteEnv(mdp), int(std::lround(delay)), seed);
            return {run_tabular(denv, IdentityIndexer{mdp.n_states}, IdentityGrid{mdp.n_actions}, tcfg)
                        .curve,
                    {}};
        }
        throw std::invalid_argument("config: env.name '" + env_name + "' has no tabular baseline");
    }

    throw std::invalid_argument("config: unknown algo '" + algo + "'");
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

namespace detail {

// round-trip exact so aggregates recompute bit-for-bit from the files
inline std::string render_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace detail

inline void write_seed_curve(std::ostream& os, const std::vector<CurveRow>& curve,
                             const std::string& config_hash, std::uint64_t seed) {
    os << "# config_hash=" << config_hash << "\n";
    os << "# seed=" << seed << "\n";
    os << "iteration,env_steps,mean_return,std_return,train_loss,seed\n";
    for (const auto& row : curve)
        os << row.iteration << "," << row.env_steps << "," << detail::render_double(row.mean_return)
           << "," << detail::render_double(row.std_return) << ","
           << detail::render_double(row.train_loss) << "," << seed << "\n";
}

inline std::vector<CurveRow> read_seed_curve(std::istream& is) {
    std::vector<CurveRow> curve;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("iteration", 0) == 0) continue;
        CurveRow row;
        std::istringstream ls(line);
        std::string field;
        std::getline(ls, field, ',');
        row.iteration = std::stoi(field);
        std::getline(ls, field, ',');
        row.env_steps = std::stol(field);
        std::getline(ls, field, ',');
        row.mean_return = std::stod(field);
        std::getline(ls, field, ',');
        row.std_return = std::stod(field);
        std::getline(ls, field, ',');
        row.train_loss = std::stod(field);
        curve.push_back(row);
    }
    return curve;
}

struct AggregateRow {
    int iteration = 0;
    long env_steps = 0;
    double mean_return = 0.0;
    double std_return = 0.0;  // across seeds
};

inline std::vector<AggregateRow> aggregate_curves(const std::vector<std::vector<CurveRow>>& curves) {
    require(!curves.empty(), "aggregate_curves: no curves");
    std::size_t rows = curves.front().size();
    for (const auto& c : curves)
        require(c.size() == rows, "aggregate_curves: seed curves have different lengths");
    std::vector<AggregateRow> out;
    out.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<double> means;
        long steps = 0;
        for (const auto& c : curves) {
            means.push_back(c[i].mean_return);
            steps += c[i].env_steps;
        }
        MeanStd ms = mean_std(means);
        out.push_back({curves.front()[i].iteration, steps / long(curves.size()), ms.mean, ms.stddev});
    }
    return out;
}

inline void write_aggregate(std::ostream& os, const std::vector<AggregateRow>& rows,
                            const std::string& config_hash, const std::vector<long>& seeds) {
    os << "# config_hash=" << config_hash << "\n";
    os << "# seeds=";
    for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
    os << "\n";
    os << "iteration,env_steps,mean_return,std_return\n";
    for (const auto& row : rows)
        os << row.iteration << "," << row.env_steps << "," << detail::render_double(row.mean_return)
           << "," << detail::render_double(row.std_return) << "\n";
}

struct RunResult {
    std::vector<std::vector<CurveRow>> per_seed;
    std::vector<AggregateRow> aggregate;
    std::vector<std::filesystem::path> files;
};

/**
 * Runs every configured seed (in parallel), writes one CSV per seed plus the
 * cross-seed aggregate, all stamped with the config hash. With `self_audit`
 * the aggregate is recomputed from the files on disk and compared.
 */
inline RunResult run_experiment(const Config& cfg, const std::filesystem::path& out_dir,
                                bool self_audit = false) {
    std::vector<long> seeds = cfg.get_long_list("seeds");
    std::filesystem::create_directories(out_dir);
    const std::string hash = cfg.hash_hex();

    std::vector<std::future<SeedRun>> futures;
    futures.reserve(seeds.size());
    for (long seed : seeds)
        futures.push_back(std::async(std::launch::async,
                                     [&cfg, seed]() { return run_one_seed(cfg, std::uint64_t(seed)); }));

    RunResult result;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        SeedRun seed_run = futures[i].get();
        result.per_seed.push_back(std::move(seed_run.curve));
        auto path = out_dir / ("curve_seed" + std::to_string(seeds[i]) + ".csv");
        std::ofstream os(path);
        write_seed_curve(os, result.per_seed.back(), hash, std::uint64_t(seeds[i]));
        result.files.push_back(path);
        if (!seed_run.model_checkpoint.empty()) {
            auto model_path = out_dir / ("model_seed" + std::to_string(seeds[i]) + ".txt");
            std::ofstream ms(model_path);
            ms << seed_run.model_checkpoint;
            result.files.push_back(model_path);
        }
    }
    result.aggregate = aggregate_curves(result.per_seed);
    auto agg_path = out_dir / "curve_aggregate.csv";
    {
        std::ofstream os(agg_path);
        write_aggregate(os, result.aggregate, hash, seeds);
    }
    result.files.push_back(agg_path);

    if (self_audit) {
        std::vector<std::vector<CurveRow>> reread;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            std::ifstream is(out_dir / ("curve_seed" + std::to_string(seeds[i]) + ".csv"));
            reread.push_back(read_seed_curve(is));
        }
        auto recomputed = aggregate_curves(reread);
        std::ostringstream want, got;
        write_aggregate(want, result.aggregate, hash, seeds);
        write_aggregate(got, recomputed, hash, seeds);
        if (want.str() != got.str())
            throw std::runtime_error("self-audit: aggregate does not match the per-seed files");
    }
    return result;
}

struct SweepRow {
    double delay = 0.0;
    double mean_final_return = 0.0;
    double std_final_return = 0.0;
};

/// Reruns the config at each delay with hyperparameters held fixed.
inline std::vector<SweepRow> sweep_delay(const Config& base, std::vector<double> delays,
                                         const std::filesystem::path& out_dir) {
    require(!delays.empty(), "sweep_delay: no delays listed");
    std::sort(delays.begin(), delays.end());
    std::vector<SweepRow> rows;
    for (double d : delays) {
        Config cfg = base;
        std::ostringstream v;
        v << d;
        cfg.set("delay", v.str());
        std::ostringstream dir_name;
        dir_name << "delay_" << d;
        auto run = run_experiment(cfg, out_dir / dir_name.str());
        const AggregateRow& last = run.aggregate.back();
        rows.push_back({d, last.mean_return, last.std_return});
    }
    std::ofstream os(out_dir / "sweep.csv");
    os << "delay,mean_final_return,std\n";
    for (const auto& r : rows)
        os << detail::render_double(r.delay) << "," << detail::render_double(r.mean_final_return)
           << "," << detail::render_double(r.std_final_return) << "\n";
    return rows;
}

}  // namespace delrl
