#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "delrl/harness.hpp"
#include "delrl/verify.hpp"

namespace fs = std::filesystem;

namespace {

delrl::Config load_with_overrides(const std::string& config_arg, const std::string& preset,
                                  const std::vector<std::string>& overrides) {
    delrl::Config cfg = [&] {
        if (!preset.empty()) return delrl::load_config_or_preset("preset:" + preset);
        if (!config_arg.empty()) return delrl::load_config_or_preset(config_arg);
        throw CLI::ValidationError("provide a config file or --preset");
    }();
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delayed-RL toolkit: imitation of undelayed experts, tabular baselines, "
                 "and numerical verification of the performance bounds"};
    app.require_subcommand(1);

    std::string config_arg, preset, out_dir = "out";
    std::vector<std::string> overrides;
    bool self_audit = false;

    auto* run = app.add_subcommand("run", "run one experiment over its seed list");
    run->add_option("config", config_arg, "config file path");
    run->add_option("--preset", preset, "named preset instead of a file");
    run->add_option("--set", overrides, "override config keys (key=value)");
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--self-audit", self_audit, "recompute the aggregate from the per-seed files");

    std::string delays_csv = "1,2,5,10";
    auto* sweep = app.add_subcommand("sweep-delay", "rerun at several delays, fixed hyperparameters");
    sweep->add_option("config", config_arg, "config file path");
    sweep->add_option("--preset", preset, "named preset instead of a file");
    sweep->add_option("--set", overrides, "override config keys (key=value)");
    sweep->add_option("--delays", delays_csv, "comma-separated delays");
    sweep->add_option("--out", out_dir, "output directory");

    std::string suite;
    auto* verify = app.add_subcommand("verify", "run a numerical verification suite");
    verify->add_option("suite", suite,
                       "one of: lemma1, thm2, cor3, cor4, thm5, appendixA, fractional")
        ->required();
    verify->add_option("--out", out_dir, "output directory for the JSONL report");

    auto* list = app.add_subcommand("list-presets", "print the shipped preset configs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            delrl::Config cfg = load_with_overrides(config_arg, preset, overrides);
            auto result = delrl::run_experiment(cfg, out_dir, self_audit);
            std::cout << "wrote " << result.files.size() << " artifacts to " << out_dir
                      << " (config " << cfg.hash_hex() << ")\n";
            const auto& last = result.aggregate.back();
            std::cout << "final: iteration " << last.iteration << ", env_steps " << last.env_steps
                      << ", mean_return " << last.mean_return << ", std " << last.std_return << "\n";
        } else if (*sweep) {
            delrl::Config cfg = load_with_overrides(config_arg, preset, overrides);
            std::vector<double> delays;
            std::stringstream ss(delays_csv);
            std::string item;
            while (std::getline(ss, item, ',')) delays.push_back(std::stod(item));
            auto rows = delrl::sweep_delay(cfg, delays, out_dir);
            std::cout << "delay,mean_final_return,std\n";
            for (const auto& r : rows)
                std::cout << r.delay << "," << r.mean_final_return << "," << r.std_final_return
                          << "\n";
        } else if (*verify) {
            auto result = delrl::run_verify_suite(suite);
            fs::create_directories(out_dir);
            std::ofstream jsonl(fs::path(out_dir) / (suite + "_report.jsonl"));
            delrl::write_suite_report(result, jsonl, std::cout);
            return result.pass() ? 0 : 1;
        } else if (*list) {
            for (const auto& [name, text] : delrl::presets()) {
                std::cout << "--- " << name << " ---\n" << text << "\n";
            }
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
