#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "designham/rng.hpp"
#include "designham/spin_system.hpp"

namespace designham {

/// Pulse-timing fractions for a run of refocusing sequences: one vector of
/// S entries in [0,1] per half-period. Entry s of half-period m places the
/// slot-s pulse at fraction lambda of that half-period.
struct LambdaSchedule {
    std::vector<std::vector<double>> lambdas;  // halfperiods() rows of S entries
    double period_s = 0.0;
    SlotMap slot_map;
    std::optional<std::uint64_t> seed;  // absent for schedules loaded from explicit matrices

    int halfperiods() const { return static_cast<int>(lambdas.size()); }
    int slots() const { return slot_map.slots; }
    double half_period_s() const { return period_s / 2.0; }
    double horizon_s() const { return halfperiods() * half_period_s(); }

    void validate() const {
        slot_map.validate();
        if (lambdas.empty()) throw std::invalid_argument("LambdaSchedule: need at least one half-period");
        if (!(period_s > 0.0)) throw std::invalid_argument("LambdaSchedule: period must be positive");
        for (const auto& row : lambdas) {
            if (row.size() != static_cast<std::size_t>(slot_map.slots))
                throw std::invalid_argument("LambdaSchedule: row length != slot count");
            for (double v : row)
                if (!(v >= 0.0 && v <= 1.0))
                    throw std::invalid_argument("LambdaSchedule: entries must lie in [0,1]");
        }
    }
};

/// Draws a schedule with independent uniform entries. Deterministic in the
/// seed, bit-exact across platforms.
inline LambdaSchedule sample_lambda(std::uint64_t rng_seed, const SlotMap& slot_map,
                                    int halfperiods, double period_s) {
    if (slot_map.slots < 1) throw std::invalid_argument("sample_lambda: slot count must be positive");
    if (halfperiods < 1) throw std::invalid_argument("sample_lambda: halfperiods must be positive");
    if (!(period_s > 0.0)) throw std::invalid_argument("sample_lambda: period must be positive");
    LambdaSchedule sched;
    sched.period_s = period_s;
    sched.slot_map = slot_map;
    sched.seed = rng_seed;
    Rng rng(rng_seed);
    sched.lambdas.resize(static_cast<std::size_t>(halfperiods));
    for (auto& row : sched.lambdas) {
        row.resize(static_cast<std::size_t>(slot_map.slots));
        for (double& v : row) v = rng.uniform();
    }
    sched.validate();
    return sched;
}

inline LambdaSchedule fixed_lambda(std::vector<std::vector<double>> lambdas, double period_s,
                                   const SlotMap& slot_map) {
    LambdaSchedule sched;
    sched.lambdas = std::move(lambdas);
    sched.period_s = period_s;
    sched.slot_map = slot_map;
    sched.validate();
    return sched;
}

inline LambdaSchedule parse_schedule(const nlohmann::json& doc, std::optional<SlotMap> slot_map = {}) {
    LambdaSchedule sched;
    sched.period_s = doc.at("period_s").get<double>();
    int slots = doc.at("slots").get<int>();
    sched.lambdas = doc.at("lambda").get<std::vector<std::vector<double>>>();
    if (doc.contains("seed")) sched.seed = doc["seed"].get<std::uint64_t>();
    if (slot_map) {
        if (slot_map->slots != slots)
            throw std::runtime_error("schedule: slot count does not match the supplied slot map");
        sched.slot_map = *slot_map;
    } else {
        sched.slot_map = identity_slot_map(slots);
    }
    sched.validate();
    return sched;
}

inline LambdaSchedule load_schedule(const std::string& path, std::optional<SlotMap> slot_map = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("schedule: cannot open `" + path + "`");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("schedule: parse failure in `" + path + "`: " + e.what());
    }
    return parse_schedule(doc, std::move(slot_map));
}

inline nlohmann::json schedule_to_json(const LambdaSchedule& sched) {
    nlohmann::json doc;
    doc["period_s"] = sched.period_s;
    doc["slots"] = sched.slots();
    doc["lambda"] = sched.lambdas;
    if (sched.seed) doc["seed"] = *sched.seed;
    return doc;
}

}  // namespace designham
