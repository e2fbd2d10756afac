#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "designham/experiment.hpp"
#include "designham/output.hpp"

using namespace designham;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("designham-test-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json tiny_molecule() {
    return nlohmann::json{
        {"labels", {"C1", "C2", "C3"}},
        {"offset_hz", {-9324.09, 11915.61, 4000.0}},
        {"j_hz",
         {{{"i", 1}, {"j", 2}, {"value", 57.58}},
          {{"i", 1}, {"j", 3}, {"value", -40.0}},
          {{"i", 2}, {"j", 3}, {"value", 120.0}}}},
    };
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS(parse_experiment_config({{"mode", "mqc"}}), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config({{"mode", "no-such-mode"}, {"rng_seed", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(nlohmann::json::object()), ConfigError);

    // seed is mandatory for stochastic runs
    nlohmann::json fp{{"mode", "frame-potential"}, {"ensemble_size", 10}, {"k_list", {1}}};
    CHECK_THROWS_AS(parse_experiment_config(fp), ConfigError);
    fp["rng_seed"] = 5;
    CHECK_NOTHROW(parse_experiment_config(fp));

    nlohmann::json vo{{"mode", "verify-oracle"}, {"n", 2}, {"trials", 5}, {"rng_seed", 1}};
    CHECK_NOTHROW(parse_experiment_config(vo));
    vo["n"] = 11;
    CHECK_THROWS_AS(parse_experiment_config(vo), ConfigError);
}

TEST_CASE("CSV writer emits a header even without rows") {
    CsvWriter csv({"a", "b"});
    CHECK(csv.body() == "a,b\n");
}

TEST_CASE("mqc experiment writes deterministic outputs") {
    auto mol_dir = fresh_dir("mol");
    auto mol_path = mol_dir / "tiny.json";
    write_file(mol_path, tiny_molecule().dump());

    nlohmann::json doc{{"mode", "mqc"},
                       {"molecule", mol_path.string()},
                       {"period_s", 0.03},
                       {"rounds", 1},
                       {"rng_seed", 77},
                       {"initial_operator", "ZII"},
                       {"phi_points", 32}};
    auto cfg = parse_experiment_config(doc);

    auto dir_a = fresh_dir("mqc-a");
    auto manifest_a = run_experiment(cfg, dir_a.string());
    CHECK(fs::exists(dir_a / "spectra.csv"));
    CHECK(fs::exists(dir_a / "signal.csv"));
    CHECK(fs::exists(dir_a / "epsilon.json"));
    CHECK(fs::exists(dir_a / "manifest.json"));
    CHECK_NOTHROW(manifest_a.verify_digests(dir_a));

    auto dir_b = fresh_dir("mqc-b");
    run_experiment(cfg, dir_b.string());
    CHECK(read_file(dir_a / "spectra.csv") == read_file(dir_b / "spectra.csv"));
    CHECK(read_file(dir_a / "signal.csv") == read_file(dir_b / "signal.csv"));
    CHECK(read_file(dir_a / "epsilon.json") == read_file(dir_b / "epsilon.json"));

    SECTION("spectra rows cover every order at every sampled time") {
        auto body = read_file(dir_a / "spectra.csv");
        std::size_t rows = std::count(body.begin(), body.end(), '\n');
        // default grid: half-period boundaries 0, T/2, T -> 3 times x 7 orders + header
        CHECK(rows == 1 + 3 * 7);
    }
}

TEST_CASE("fixed-schedule mqc run uses the fixture lambda") {
    nlohmann::json doc{{"mode", "mqc"},
                       {"molecule", "builtin12"},
                       {"schedule", std::string(DESIGNHAM_DATA_DIR) + "/schedules/experiment1_lambda.json"},
                       {"rounds", 1},
                       {"rng_seed", 1},
                       {"initial_operator", "IIIIIIZIIIII"},
                       {"phi_points", 8},
                       {"times_s", {0.0}}};
    auto cfg = parse_experiment_config(doc);
    auto dir = fresh_dir("mqc-fixed");
    auto manifest = run_experiment(cfg, dir.string());
    // the initial spectrum of a sigma_z string is pure order zero
    auto body = read_file(dir / "spectra.csv");
    CHECK(body.find(",0,1\n") != std::string::npos);
    CHECK_NOTHROW(manifest.verify_digests(dir));
}

TEST_CASE("frame-potential experiment is thread-count independent") {
    auto mol_dir = fresh_dir("mol-fp");
    auto mol_path = mol_dir / "tiny.json";
    write_file(mol_path, tiny_molecule().dump());

    nlohmann::json doc{{"mode", "frame-potential"},
                       {"molecule", mol_path.string()},
                       {"period_s", 0.03},
                       {"rounds", 2},
                       {"ensemble_size", 12},
                       {"k_list", {1, 2}},
                       {"rng_seed", 99}};
    auto cfg = parse_experiment_config(doc);

    auto dir_1 = fresh_dir("fp-1");
    run_experiment(cfg, dir_1.string(), 1);
    auto dir_3 = fresh_dir("fp-3");
    run_experiment(cfg, dir_3.string(), 3);
    CHECK(read_file(dir_1 / "frame_potential.csv") == read_file(dir_3 / "frame_potential.csv"));

    auto body = read_file(dir_1 / "frame_potential.csv");
    CHECK(body.rfind("t_s,k,f_tilde,f,ensemble_size,pair_count\n", 0) == 0);
}

TEST_CASE("verify-oracle experiment reports a passing distance") {
    nlohmann::json doc{{"mode", "verify-oracle"}, {"n", 2}, {"trials", 10}, {"rng_seed", 314}};
    auto cfg = parse_experiment_config(doc);
    auto dir = fresh_dir("vo");
    run_experiment(cfg, dir.string());
    auto report = nlohmann::json::parse(read_file(dir / "oracle_report.json"));
    CHECK(report["pass"].get<bool>());
    CHECK(report["max_operator_distance"].get<double>() < 1e-10);
    CHECK(report["offset_factor_sign"].get<double>() == -1.0);
}

TEST_CASE("otoc-check experiment matches both evaluations") {
    nlohmann::json doc{{"mode", "otoc-check"},
                       {"n", 1},
                       {"k", 2},
                       {"ensemble_size", 6},
                       {"rng_seed", 2718}};
    auto cfg = parse_experiment_config(doc);
    auto dir = fresh_dir("otoc");
    run_experiment(cfg, dir.string());
    auto report = nlohmann::json::parse(read_file(dir / "otoc_report.json"));
    CHECK(report["abs_difference"].get<double>() < 1e-8);
}

TEST_CASE("convergence experiment emits one row per time and k") {
    auto mol_dir = fresh_dir("mol-conv");
    auto mol_path = mol_dir / "tiny.json";
    write_file(mol_path, tiny_molecule().dump());
    nlohmann::json doc{{"mode", "convergence"},
                       {"molecule", mol_path.string()},
                       {"period_s", 0.03},
                       {"ensemble_size", 6},
                       {"k_list", {1}},
                       {"times_s", {0.0, 0.015, 0.03}},
                       {"rng_seed", 5}};
    auto cfg = parse_experiment_config(doc);
    auto dir = fresh_dir("conv");
    run_experiment(cfg, dir.string());
    auto body = read_file(dir / "frame_potential.csv");
    CHECK(std::count(body.begin(), body.end(), '\n') == 1 + 3);
}

#ifdef DESIGNHAM_CLI_BIN
TEST_CASE("CLI typical subcommand prints the full profile") {
    auto dir = fresh_dir("cli-typical");
    std::string cmd = std::string(DESIGNHAM_CLI_BIN) + " typical --n 12 > " +
                      (dir / "typical.csv").string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    auto body = read_file(dir / "typical.csv");
    CHECK(std::count(body.begin(), body.end(), '\n') == 1 + 25);
    CHECK(body.rfind("nu,intensity\n", 0) == 0);
}

TEST_CASE("CLI rejects a broken config with a machine-readable error") {
    auto dir = fresh_dir("cli-bad");
    write_file(dir / "bad.json", "{\"mode\": \"mqc\"}");
    std::string cmd = std::string(DESIGNHAM_CLI_BIN) + " run " + (dir / "bad.json").string() +
                      " 2> " + (dir / "err.txt").string();
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != 0);
    auto err = nlohmann::json::parse(read_file(dir / "err.txt"));
    CHECK(err.contains("error"));
}

TEST_CASE("CLI run executes a config end to end") {
    auto dir = fresh_dir("cli-run");
    nlohmann::json doc{{"mode", "verify-oracle"},
                       {"n", 2},
                       {"trials", 5},
                       {"rng_seed", 7},
                       {"output_dir", (dir / "out").string()}};
    write_file(dir / "cfg.json", doc.dump());
    std::string cmd = std::string(DESIGNHAM_CLI_BIN) + " run " + (dir / "cfg.json").string() +
                      " > /dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "out" / "oracle_report.json"));
    CHECK(fs::exists(dir / "out" / "manifest.json"));
}
#endif
