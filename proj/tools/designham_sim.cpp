#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "designham/experiment.hpp"
#include "designham/mqc.hpp"
#include "designham/output.hpp"
#include "designham/parallel.hpp"
#include "designham/version.hpp"

namespace {

void print_json_error(const std::string& message) {
    std::cerr << nlohmann::json{{"error", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design-Hamiltonian pseudorandomness simulator"};
    app.set_version_flag("--version", std::string(designham::version_string));
    app.require_subcommand(1);

    std::size_t threads = 0;

    // run <config.json>
    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    std::string config_path;
    std::optional<std::string> output_dir;
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--output-dir", output_dir, "override the config's output directory");
    run->add_option("--threads", threads, "worker pool size (default: DESIGNHAM_THREADS or all cores)");

    // typical --n N
    auto* typical = app.add_subcommand("typical", "Print the fully scrambled coherence profile");
    int typical_n = 12;
    std::optional<std::string> typical_dir;
    typical->add_option("--n", typical_n, "qubit count")->required();
    typical->add_option("--output-dir", typical_dir, "also write typical.csv there");

    // verify-oracle --n N --trials K --seed S
    auto* verify = app.add_subcommand("verify-oracle",
                                      "Check the refocused effective Hamiltonian against the exact "
                                      "piecewise pulse simulation");
    int verify_n = 2;
    std::size_t verify_trials = 50;
    std::uint64_t verify_seed = 1;
    std::optional<std::string> verify_dir;
    verify->add_option("--n", verify_n, "qubit count")->required();
    verify->add_option("--trials", verify_trials, "number of random instances")->required();
    verify->add_option("--seed", verify_seed, "rng seed")->required();
    verify->add_option("--output-dir", verify_dir, "also write oracle_report.json there");
    verify->add_option("--threads", threads, "worker pool size");

    CLI11_PARSE(app, argc, argv);
    if (threads != 0) designham::default_thread_count() = threads;

    try {
        if (*run) {
            auto cfg = designham::load_experiment_config(config_path);
            auto manifest = designham::run_experiment(cfg, output_dir, threads);
            std::cout << "wrote "
                      << (output_dir ? *output_dir : cfg.output_dir) << "/manifest.json with "
                      << manifest.json.at("outputs").size() << " output file(s)\n";
        } else if (*typical) {
            auto prof = designham::typical_profile(typical_n);
            designham::CsvWriter csv({"nu", "intensity"});
            for (int nu = -typical_n; nu <= typical_n; ++nu)
                csv.add_row({static_cast<std::int64_t>(nu), prof.at(nu)});
            std::cout << csv.body();
            if (typical_dir) {
                std::filesystem::create_directories(*typical_dir);
                designham::write_file(std::filesystem::path(*typical_dir) / "typical.csv", csv.body());
            }
        } else if (*verify) {
            nlohmann::json doc{{"mode", "verify-oracle"},
                               {"n", verify_n},
                               {"trials", verify_trials},
                               {"rng_seed", verify_seed},
                               {"output_dir", verify_dir ? *verify_dir : std::string("out")}};
            auto cfg = designham::parse_experiment_config(doc);
            if (verify_dir) {
                auto manifest = designham::run_experiment(cfg, verify_dir, threads);
                std::cout << designham::read_file(std::filesystem::path(*verify_dir) /
                                                  "oracle_report.json");
            } else {
                // report to stdout without touching the filesystem
                auto tmp = std::filesystem::temp_directory_path() /
                           ("designham-verify-" + std::to_string(::getpid()));
                designham::run_experiment(cfg, tmp.string(), threads);
                std::cout << designham::read_file(tmp / "oracle_report.json");
                std::filesystem::remove_all(tmp);
            }
        }
    } catch (const designham::ConfigError& e) {
        print_json_error(e.what());
        return 1;
    } catch (const std::exception& e) {
        print_json_error(e.what());
        return 2;
    }
    return 0;
}
