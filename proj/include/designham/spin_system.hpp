#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace designham {

/// Assignment of qubits to pulse slots. Qubits sharing a slot receive their
/// refocusing pulse at the same time. Slots are 0-based internally and
/// 1-based in files and user-facing output.
struct SlotMap {
    std::vector<int> slot_of_qubit;
    int slots = 0;

    void validate() const {
        if (slots < 1) throw std::invalid_argument("SlotMap: slot count must be positive");
        std::vector<bool> used(static_cast<std::size_t>(slots), false);
        for (int s : slot_of_qubit) {
            if (s < 0 || s >= slots) throw std::invalid_argument("SlotMap: slot index out of range");
            used[static_cast<std::size_t>(s)] = true;
        }
        for (bool u : used)
            if (!u) throw std::invalid_argument("SlotMap: every slot must be used by at least one qubit");
    }
};

/// One slot per qubit.
inline SlotMap identity_slot_map(int n) {
    SlotMap m;
    m.slots = n;
    m.slot_of_qubit.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) m.slot_of_qubit[static_cast<std::size_t>(i)] = i;
    m.validate();
    return m;
}

/// A weakly coupled spin system in the rotating frame: per-qubit offsets
/// Omega_i/(2*pi) and the symmetric scalar-coupling table J_ij, both in Hz.
/// Angular factors are applied only when Hamiltonian coefficients are built.
struct SpinSystem {
    int n = 0;
    std::vector<std::string> labels;
    std::vector<double> offset_hz;
    std::vector<std::vector<double>> coupling_hz;
    std::vector<double> t2_s;  // ingested for provenance, never used

    void validate() const {
        if (n < 1) throw std::invalid_argument("SpinSystem: qubit count must be positive");
        auto sz = static_cast<std::size_t>(n);
        if (labels.size() != sz || offset_hz.size() != sz || coupling_hz.size() != sz)
            throw std::invalid_argument("SpinSystem: per-qubit sequence length != n");
        if (!t2_s.empty() && t2_s.size() != sz)
            throw std::invalid_argument("SpinSystem: t2_s length != n");
        for (double w : offset_hz)
            if (!std::isfinite(w)) throw std::invalid_argument("SpinSystem: non-finite offset");
        for (std::size_t i = 0; i < sz; ++i) {
            if (coupling_hz[i].size() != sz)
                throw std::invalid_argument("SpinSystem: coupling table is not n x n");
            if (coupling_hz[i][i] != 0.0)
                throw std::invalid_argument("SpinSystem: coupling diagonal must be zero");
            for (std::size_t j = 0; j < sz; ++j) {
                if (!std::isfinite(coupling_hz[i][j]))
                    throw std::invalid_argument("SpinSystem: non-finite coupling");
                if (coupling_hz[i][j] != coupling_hz[j][i])
                    throw std::invalid_argument("SpinSystem: coupling table is not symmetric");
            }
        }
    }
};

namespace detail {

inline std::vector<std::vector<double>> zero_table(int n) {
    return std::vector<std::vector<double>>(static_cast<std::size_t>(n),
                                            std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

}  // namespace detail

/// Parses a molecule description. Offsets come either directly (`offset_hz`)
/// or from absolute frequencies plus per-channel references, in which case
/// Omega_i/(2*pi) = -(omega_i - O_channel). A qubit's channel is the
/// `channel_ref_hz` key that prefixes its label.
inline std::pair<SpinSystem, SlotMap> parse_molecule(const nlohmann::json& doc) {
    SpinSystem sys;
    if (!doc.contains("labels") || !doc["labels"].is_array())
        throw std::runtime_error("molecule: missing `labels`");
    sys.labels = doc["labels"].get<std::vector<std::string>>();
    sys.n = static_cast<int>(sys.labels.size());

    if (doc.contains("offset_hz")) {
        sys.offset_hz = doc["offset_hz"].get<std::vector<double>>();
    } else if (doc.contains("omega_hz") && doc.contains("channel_ref_hz")) {
        auto omega = doc["omega_hz"].get<std::vector<double>>();
        if (omega.size() != sys.labels.size())
            throw std::runtime_error("molecule: omega_hz length != labels length");
        const auto& refs = doc["channel_ref_hz"];
        sys.offset_hz.resize(omega.size());
        for (std::size_t i = 0; i < omega.size(); ++i) {
            // longest channel key that prefixes the label
            std::string best;
            double ref = 0.0;
            for (auto it = refs.begin(); it != refs.end(); ++it) {
                const std::string& key = it.key();
                if (sys.labels[i].rfind(key, 0) == 0 && key.size() > best.size()) {
                    best = key;
                    ref = it.value().get<double>();
                }
            }
            if (best.empty())
                throw std::runtime_error("molecule: no channel reference for qubit `" + sys.labels[i] + "`");
            sys.offset_hz[i] = -(omega[i] - ref);
        }
    } else {
        throw std::runtime_error("molecule: need `offset_hz` or `omega_hz` + `channel_ref_hz`");
    }

    sys.coupling_hz = detail::zero_table(sys.n);
    if (doc.contains("j_hz")) {
        for (const auto& entry : doc["j_hz"]) {
            int i = entry.at("i").get<int>();  // 1-based in files
            int j = entry.at("j").get<int>();
            double v = entry.at("value").get<double>();
            if (i < 1 || i > sys.n || j < 1 || j > sys.n || i == j)
                throw std::runtime_error("molecule: j_hz indices out of range");
            auto a = static_cast<std::size_t>(i - 1), b = static_cast<std::size_t>(j - 1);
            if (sys.coupling_hz[a][b] != 0.0 && sys.coupling_hz[a][b] != v)
                throw std::runtime_error("molecule: conflicting duplicate coupling entry (asymmetric table)");
            sys.coupling_hz[a][b] = v;
            sys.coupling_hz[b][a] = v;
        }
    }

    if (doc.contains("t2_s")) sys.t2_s = doc["t2_s"].get<std::vector<double>>();
    sys.validate();

    SlotMap slot_map;
    if (doc.contains("slot_of_qubit")) {
        auto raw = doc["slot_of_qubit"].get<std::vector<int>>();
        if (raw.size() != static_cast<std::size_t>(sys.n))
            throw std::runtime_error("molecule: slot_of_qubit length != n");
        int max_slot = 0;
        for (int s : raw) max_slot = std::max(max_slot, s);
        slot_map.slots = max_slot;
        slot_map.slot_of_qubit.reserve(raw.size());
        for (int s : raw) slot_map.slot_of_qubit.push_back(s - 1);
    } else {
        slot_map = identity_slot_map(sys.n);
    }
    slot_map.validate();
    return {sys, slot_map};
}

inline std::pair<SpinSystem, SlotMap> load_molecule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("molecule: cannot open `" + path + "`");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("molecule: parse failure in `" + path + "`: " + e.what());
    }
    return parse_molecule(doc);
}

inline nlohmann::json molecule_to_json(const SpinSystem& sys, const SlotMap& slot_map) {
    nlohmann::json doc;
    doc["labels"] = sys.labels;
    doc["offset_hz"] = sys.offset_hz;
    nlohmann::json couplings = nlohmann::json::array();
    for (int i = 0; i < sys.n; ++i)
        for (int j = i + 1; j < sys.n; ++j) {
            double v = sys.coupling_hz[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (v != 0.0) couplings.push_back({{"i", i + 1}, {"j", j + 1}, {"value", v}});
        }
    doc["j_hz"] = couplings;
    if (!sys.t2_s.empty()) doc["t2_s"] = sys.t2_s;
    nlohmann::json slots = nlohmann::json::array();
    for (int s : slot_map.slot_of_qubit) slots.push_back(s + 1);
    doc["slot_of_qubit"] = slots;
    return doc;
}

/// The bundled 12-spin molecule: seven labeled carbons and five protons,
/// reference frequencies O_C = 20696 Hz and O_H = 2696 Hz. Slots 1..7 hold
/// C1..C7 and slot 8 pulses all protons collectively.
inline std::pair<SpinSystem, SlotMap> builtin_12spin() {
    SpinSystem sys;
    sys.n = 12;
    sys.labels = {"C1", "C2", "C3", "C4", "C5", "C6", "C7", "H1", "H2", "H3", "H4", "H5"};
    const double omega_hz[12] = {30020.09, 8780.39,  6245.45, 10333.53, 15745.40, 34381.71,
                                 11928.71, 3307.85,  2464.15, 2155.59,  2687.69,  3645.08};
    const double o_carbon = 20696.0, o_proton = 2696.0;
    sys.offset_hz.resize(12);
    for (int i = 0; i < 12; ++i)
        sys.offset_hz[static_cast<std::size_t>(i)] = -(omega_hz[i] - (i < 7 ? o_carbon : o_proton));

    sys.coupling_hz = detail::zero_table(12);
    auto J = [&sys](int i, int j, double v) {
        sys.coupling_hz[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = v;
        sys.coupling_hz[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(i - 1)] = v;
    };
    // carbon-carbon
    J(1, 2, 57.58); J(1, 3, -2.00); J(1, 4, 0.02);  J(1, 5, 1.43);  J(1, 6, 5.54);  J(1, 7, -1.43);
    J(2, 3, 32.67); J(2, 4, 0.30);  J(2, 5, 2.62);  J(2, 6, -1.66); J(2, 7, 37.43);
    J(3, 4, 0.00);  J(3, 5, -1.10); J(3, 6, 0.00);  J(3, 7, 0.94);
    J(4, 5, 33.16); J(4, 6, -3.53); J(4, 7, 29.02);
    J(5, 6, 33.16); J(5, 7, 21.75);
    J(6, 7, 34.57);
    // carbon-proton (qubits 8..12 are H1..H5)
    J(1, 8, 0.04);   J(2, 8, 1.47);  J(3, 8, 2.03);   J(4, 8, 166.60); J(5, 8, 4.06);  J(6, 8, 5.39);  J(7, 8, 8.61);
    J(1, 9, 4.41);   J(2, 9, 1.47);  J(3, 9, 146.60); J(4, 9, 2.37);   J(5, 9, 0.00);  J(6, 9, 0.00);  J(7, 9, 0.00);
    J(1, 10, 1.86);  J(2, 10, 2.44); J(3, 10, 146.60);J(4, 10, 0.04);  J(5, 10, 0.00); J(6, 10, 0.00); J(7, 10, 0.00);
    J(1, 11, -10.10);J(2, 11, 133.60);J(3, 11, -6.97);J(4, 11, 6.23);  J(5, 11, 0.00); J(6, 11, 5.39); J(7, 11, 3.80);
    J(1, 12, 7.10);  J(2, 12, -4.86);J(3, 12, 3.14);  J(4, 12, 8.14);  J(5, 12, 2.36); J(6, 12, 8.52); J(7, 12, 148.50);
    // proton-proton
    J(8, 9, 0.00);   J(8, 10, 0.18); J(8, 11, -0.68); J(8, 12, 8.46);
    J(9, 10, -12.41);J(9, 11, 1.28); J(9, 12, -1.00);
    J(10, 11, 6.00); J(10, 12, -0.36);
    J(11, 12, 1.30);

    sys.t2_s = {0.4, 0.31, 0.44, 0.25, 0.25, 0.4, 0.38, 0.29, 0.39, 0.34, 0.15, 0.30};
    sys.validate();

    SlotMap slot_map;
    slot_map.slots = 8;
    slot_map.slot_of_qubit = {0, 1, 2, 3, 4, 5, 6, 7, 7, 7, 7, 7};
    slot_map.validate();
    return {sys, slot_map};
}

}  // namespace designham
