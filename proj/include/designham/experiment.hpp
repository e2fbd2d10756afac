#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "designham/dense.hpp"
#include "designham/effective_hamiltonian.hpp"
#include "designham/frame_potential.hpp"
#include "designham/mqc.hpp"
#include "designham/output.hpp"
#include "designham/pauli.hpp"
#include "designham/propagator.hpp"
#include "designham/schedule.hpp"
#include "designham/spin_system.hpp"
#include "designham/version.hpp"

namespace designham {

/// Invalid or incomplete experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One archival experiment description, read from a JSON file. `mode`
/// selects the pipeline; every stochastic mode requires `rng_seed`.
struct ExperimentConfig {
    std::string mode;                      // frame-potential | mqc | verify-oracle | otoc-check | convergence
    std::string molecule = "builtin12";    // "builtin12" or a molecule file path
    std::optional<std::string> schedule;   // fixed-lambda schedule file
    double period_s = 0.03;
    int rounds = 2;
    std::size_t ensemble_size = 0;
    std::vector<int> k_list;
    std::optional<std::uint64_t> rng_seed;
    std::string initial_operator;          // Pauli string, leftmost letter = qubit 1
    int phi_points = 256;
    std::optional<std::vector<double>> times_s;
    std::size_t max_pairs = SIZE_MAX;
    int n = 0;                             // verify-oracle / otoc-check working size
    std::size_t trials = 0;
    int k = 1;
    std::size_t samples = 0;
    std::string output_dir = "out";

    nlohmann::json raw;                    // config echo for the manifest
};

inline ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
    ExperimentConfig cfg;
    cfg.raw = doc;
    if (!doc.contains("mode")) throw ConfigError("config: missing `mode`");
    cfg.mode = doc["mode"].get<std::string>();
    if (doc.contains("molecule")) cfg.molecule = doc["molecule"].get<std::string>();
    if (doc.contains("schedule")) cfg.schedule = doc["schedule"].get<std::string>();
    if (doc.contains("period_s")) cfg.period_s = doc["period_s"].get<double>();
    if (doc.contains("rounds")) cfg.rounds = doc["rounds"].get<int>();
    if (doc.contains("ensemble_size")) cfg.ensemble_size = doc["ensemble_size"].get<std::size_t>();
    if (doc.contains("k_list")) cfg.k_list = doc["k_list"].get<std::vector<int>>();
    if (doc.contains("rng_seed")) cfg.rng_seed = doc["rng_seed"].get<std::uint64_t>();
    if (doc.contains("initial_operator")) cfg.initial_operator = doc["initial_operator"].get<std::string>();
    if (doc.contains("phi_points")) cfg.phi_points = doc["phi_points"].get<int>();
    if (doc.contains("times_s")) cfg.times_s = doc["times_s"].get<std::vector<double>>();
    if (doc.contains("max_pairs")) cfg.max_pairs = doc["max_pairs"].get<std::size_t>();
    if (doc.contains("n")) cfg.n = doc["n"].get<int>();
    if (doc.contains("trials")) cfg.trials = doc["trials"].get<std::size_t>();
    if (doc.contains("k")) cfg.k = doc["k"].get<int>();
    if (doc.contains("samples")) cfg.samples = doc["samples"].get<std::size_t>();
    if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();

    if (cfg.mode == "frame-potential" || cfg.mode == "convergence") {
        if (cfg.ensemble_size < 2) throw ConfigError("config: `ensemble_size` >= 2 required");
        if (cfg.k_list.empty()) throw ConfigError("config: `k_list` required");
        if (!(cfg.period_s > 0.0)) throw ConfigError("config: `period_s` must be positive");
        if (cfg.rounds < 1 && !cfg.times_s) throw ConfigError("config: `rounds` must be positive");
    } else if (cfg.mode == "mqc") {
        if (cfg.initial_operator.empty()) throw ConfigError("config: `initial_operator` required");
        if (!(cfg.period_s > 0.0) && !cfg.schedule) throw ConfigError("config: `period_s` must be positive");
        if (cfg.phi_points < 1) throw ConfigError("config: `phi_points` must be positive");
    } else if (cfg.mode == "verify-oracle") {
        if (cfg.n < 1 || cfg.n > dense_max_qubits) throw ConfigError("config: `n` in 1..10 required");
        if (cfg.trials == 0) throw ConfigError("config: `trials` required");
    } else if (cfg.mode == "otoc-check") {
        if (cfg.n < 1) throw ConfigError("config: `n` required");
        if (cfg.n * cfg.k > 4) throw ConfigError("config: n*k must be <= 4 for otoc-check");
        if (cfg.ensemble_size < 1) throw ConfigError("config: `ensemble_size` required");
    } else {
        throw ConfigError("config: unknown mode `" + cfg.mode + "`");
    }
    // every mode draws randomness somewhere
    if (!cfg.rng_seed) throw ConfigError("config: `rng_seed` is mandatory");
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open `" + path + "`");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: parse failure: ") + e.what());
    }
    return parse_experiment_config(doc);
}

/// Record of one run: the config, resolved seeds, and a digest of every
/// output file.
struct RunManifest {
    nlohmann::json json;

    void verify_digests(const std::filesystem::path& dir) const {
        for (const auto& entry : json.at("outputs")) {
            auto content = read_file(dir / entry.at("file").get<std::string>());
            if (fnv1a64_hex(content) != entry.at("fnv1a64").get<std::string>())
                throw std::runtime_error("manifest digest mismatch for " +
                                         entry.at("file").get<std::string>());
        }
    }
};

namespace detail {

inline std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

struct OutputSet {
    std::filesystem::path dir;
    nlohmann::json entries = nlohmann::json::array();

    void emit(const std::string& name, const std::string& content) {
        write_file(dir / name, content);
        entries.push_back({{"file", name},
                           {"bytes", content.size()},
                           {"fnv1a64", fnv1a64_hex(content)}});
    }
};

inline std::pair<SpinSystem, SlotMap> resolve_molecule(const ExperimentConfig& cfg) {
    if (cfg.molecule == "builtin12") return builtin_12spin();
    return load_molecule(cfg.molecule);
}

/// Boundaries and mid half-period samples up to `rounds` full periods.
inline std::vector<double> default_time_grid(double period_s, int rounds) {
    std::vector<double> times;
    int quarters = 4 * rounds;
    times.reserve(static_cast<std::size_t>(quarters) + 1);
    for (int q = 0; q <= quarters; ++q) times.push_back(q * period_s / 4.0);
    return times;
}

/// Half-period boundaries 0, T/2, ..., rounds*T.
inline std::vector<double> boundary_time_grid(double period_s, int rounds) {
    std::vector<double> times;
    for (int m = 0; m <= 2 * rounds; ++m) times.push_back(m * period_s / 2.0);
    return times;
}

}  // namespace detail

/// Runs the configured pipeline and writes its outputs plus manifest.json
/// under the output directory. Deterministic for a fixed (config, seed).
inline RunManifest run_experiment(const ExperimentConfig& cfg,
                                  std::optional<std::string> output_dir_override = {},
                                  std::size_t threads = 0) {
    const std::string started = detail::utc_timestamp();
    detail::OutputSet out;
    out.dir = output_dir_override ? *output_dir_override : cfg.output_dir;
    std::filesystem::create_directories(out.dir);

    nlohmann::json seeds = nlohmann::json::object();
    const std::uint64_t master = cfg.rng_seed.value_or(0);

    if (cfg.mode == "frame-potential") {
        auto [system, slot_map] = detail::resolve_molecule(cfg);
        const double t_s = cfg.rounds * cfg.period_s;
        const std::uint64_t ensemble_seed = derive_seed(master, 1);
        const std::uint64_t pair_seed = derive_seed(master, 2);
        seeds["ensemble"] = ensemble_seed;
        seeds["pair_subsample"] = pair_seed;
        auto ensemble = design_ensemble(system, slot_map, cfg.period_s, t_s, cfg.ensemble_size,
                                        ensemble_seed, threads);
        auto estimates =
            frame_potential_estimate_multi(ensemble, cfg.k_list, cfg.max_pairs, pair_seed, threads);
        CsvWriter csv({"t_s", "k", "f_tilde", "f", "ensemble_size", "pair_count"});
        for (const auto& est : estimates)
            csv.add_row({t_s, static_cast<std::int64_t>(est.k), est.f_tilde, est.f,
                         static_cast<std::int64_t>(est.ensemble_size),
                         static_cast<std::int64_t>(est.pair_count)});
        out.emit("frame_potential.csv", csv.body());
    } else if (cfg.mode == "convergence") {
        auto [system, slot_map] = detail::resolve_molecule(cfg);
        auto times = cfg.times_s ? *cfg.times_s : detail::default_time_grid(cfg.period_s, cfg.rounds);
        CsvWriter csv({"t_s", "k", "f_tilde", "f", "ensemble_size", "pair_count"});
        for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
            const std::uint64_t curve_seed = derive_seed(master, 1 + ki);
            seeds["curve_k" + std::to_string(cfg.k_list[ki])] = curve_seed;
            auto curve = convergence_vs_time(system, slot_map, cfg.period_s, times, cfg.k_list[ki],
                                             cfg.ensemble_size, curve_seed, cfg.max_pairs, threads);
            const auto m = static_cast<double>(cfg.ensemble_size);
            const double d2k =
                std::pow(std::pow(2.0, system.n) * std::pow(2.0, system.n), cfg.k_list[ki]);
            std::size_t total_pairs = cfg.ensemble_size * (cfg.ensemble_size - 1) / 2;
            for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
                double f = d2k / m + (m - 1.0) / m * curve.values[i];
                csv.add_row({curve.abscissa[i], static_cast<std::int64_t>(curve.k), curve.values[i], f,
                             static_cast<std::int64_t>(cfg.ensemble_size),
                             static_cast<std::int64_t>(std::min(cfg.max_pairs, total_pairs))});
            }
        }
        out.emit("frame_potential.csv", csv.body());
    } else if (cfg.mode == "mqc") {
        auto [system, slot_map] = detail::resolve_molecule(cfg);
        LambdaSchedule schedule = [&] {
            int halfperiods = 2 * cfg.rounds;
            if (cfg.schedule) return load_schedule(*cfg.schedule, slot_map);
            const std::uint64_t schedule_seed = derive_seed(master, 1);
            seeds["schedule"] = schedule_seed;
            return sample_lambda(schedule_seed, slot_map, halfperiods, cfg.period_s);
        }();
        DesignTimeline timeline(schedule, system);
        auto rho0 = PauliString::parse(cfg.initial_operator);
        if (rho0.n() != system.n) throw ConfigError("config: initial_operator length != qubit count");
        if (rho0.is_identity()) throw ConfigError("config: initial_operator must not be the identity");
        auto times = cfg.times_s ? *cfg.times_s
                                 : detail::boundary_time_grid(timeline.period_s(),
                                                              timeline.halfperiods() / 2);
        auto series = mqc_growth_series(rho0, timeline, times, threads);

        CsvWriter spectra({"t_s", "nu", "intensity"});
        nlohmann::json eps = nlohmann::json::array();
        for (const auto& point : series) {
            for (int nu = -system.n; nu <= system.n; ++nu)
                spectra.add_row({point.t_s, static_cast<std::int64_t>(nu), point.spectrum.at(nu)});
            eps.push_back({{"t_s", point.t_s}, {"epsilon", point.epsilon}});
        }
        out.emit("spectra.csv", spectra.body());

        auto phis = default_phi_grid(cfg.phi_points);
        CsvWriter signal({"t_s", "phi", "re_S", "im_S"});
        for (const auto& point : series) {
            auto u = propagator_at_time(timeline, point.t_s);
            auto sig = mq_signal(rho0, u, phis, threads);
            for (std::size_t i = 0; i < sig.phis.size(); ++i)
                signal.add_row({point.t_s, sig.phis[i], sig.values[i].real(), sig.values[i].imag()});
        }
        out.emit("signal.csv", signal.body());
        out.emit("epsilon.json", nlohmann::json{{"epsilon", eps}}.dump(2) + "\n");
    } else if (cfg.mode == "verify-oracle") {
        const std::uint64_t trial_seed = derive_seed(master, 1);
        seeds["trials"] = trial_seed;
        double max_distance = 0.0;
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            Rng rng(derive_seed(trial_seed, trial));
            SpinSystem sys;
            sys.n = cfg.n;
            for (int i = 0; i < cfg.n; ++i) sys.labels.push_back("Q" + std::to_string(i + 1));
            sys.offset_hz.resize(static_cast<std::size_t>(cfg.n));
            for (auto& v : sys.offset_hz) v = rng.uniform(-14000.0, 14000.0);
            sys.coupling_hz.assign(static_cast<std::size_t>(cfg.n),
                                   std::vector<double>(static_cast<std::size_t>(cfg.n), 0.0));
            for (int i = 0; i < cfg.n; ++i)
                for (int j = i + 1; j < cfg.n; ++j) {
                    double v = rng.uniform(-170.0, 170.0);
                    sys.coupling_hz[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
                    sys.coupling_hz[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = v;
                }
            sys.validate();
            auto slot_map = identity_slot_map(cfg.n);
            std::vector<double> lambda(static_cast<std::size_t>(cfg.n));
            for (auto& v : lambda) v = rng.uniform();
            double t_half = rng.uniform(0.005, 0.02);
            auto oracle = oracle_refocusing_propagator(sys, lambda, slot_map, t_half);
            auto h_eff = effective_z_hamiltonian(sys, lambda, slot_map);
            auto direct = dense_z_propagator(h_eff, t_half);
            max_distance = std::max(max_distance, phase_quotient_distance(oracle, direct));
        }
        nlohmann::json report{{"n", cfg.n},
                              {"trials", cfg.trials},
                              {"max_operator_distance", max_distance},
                              {"offset_factor_sign", refocused_offset_sign},
                              {"pass", max_distance < 1e-10}};
        out.emit("oracle_report.json", report.dump(2) + "\n");
    } else if (cfg.mode == "otoc-check") {
        const std::uint64_t ensemble_seed = derive_seed(master, 1);
        seeds["ensemble"] = ensemble_seed;
        auto ensemble = haar_ensemble(cfg.n, cfg.ensemble_size, ensemble_seed, threads);
        double via_otoc = otoc_frame_potential(ensemble, cfg.k, threads);
        double exact = frame_potential_exact(ensemble, cfg.k, threads);
        nlohmann::json report{{"n", cfg.n},
                              {"k", cfg.k},
                              {"ensemble_size", cfg.ensemble_size},
                              {"frame_potential_otoc", via_otoc},
                              {"frame_potential_exact", exact},
                              {"abs_difference", std::abs(via_otoc - exact)}};
        out.emit("otoc_report.json", report.dump(2) + "\n");
    }

    RunManifest manifest;
    manifest.json = {{"version", version_string},
                     {"config", cfg.raw},
                     {"started_utc", started},
                     {"finished_utc", detail::utc_timestamp()},
                     {"master_seed", master},
                     {"derived_seeds", seeds},
                     {"outputs", out.entries}};
    write_file(out.dir / "manifest.json", manifest.json.dump(2) + "\n");
    manifest.verify_digests(out.dir);
    return manifest;
}

}  // namespace designham
